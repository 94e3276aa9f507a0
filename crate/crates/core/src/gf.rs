//! Exact arithmetic over F_q for prime powers q = p^m, including extension
//! fields F_{q^b} and the trace map down to the base field.
//!
//! Fields are constructed deterministically: the modulus is the
//! lexicographically smallest monic irreducible polynomial over F_p, so the
//! same (p, m) always yields the same field and element codes are stable
//! across runs. Elements are stored as integer codes Σ cᵢ pⁱ over the
//! polynomial basis; multiplication goes through log/antilog tables built at
//! construction (q ≤ 2^16 keeps them small).

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Element of F_q, stored as the integer code of its coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElement(pub u32);

#[derive(Debug)]
struct FieldSpec {
    p: u32,
    m: u32,
    q: u32,
    /// Monic irreducible modulus, little-endian coefficients, length m+1.
    modulus: Vec<u32>,
    /// antilog[i] = g^i for a fixed primitive element g, i in 0..q-1.
    antilog: Vec<u32>,
    /// log[code] for code in 1..q; log[0] unused.
    log: Vec<u32>,
}

/// Handle to a finite field F_{p^m}. Cheap to clone; immutable once built.
#[derive(Clone)]
pub struct Field(Arc<FieldSpec>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.0.p, self.0.m)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.m == other.0.m && self.0.modulus == other.0.modulus)
    }
}
impl Eq for Field {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Little-endian polynomial arithmetic over F_p, used only during field
/// construction (before the tables exist).
mod poly {
    pub fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
        trim(&mut out);
        out
    }

    /// Remainder of a modulo the monic polynomial m.
    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r: Vec<u32> = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        while r.len() > dm {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - dm;
            for i in 0..m.len() {
                let sub = (lead as u64 * m[i] as u64) % p as u64;
                let idx = shift + i;
                r[idx] = ((r[idx] as u64 + p as u64 - sub) % p as u64) as u32;
            }
            trim(&mut r);
            if r.is_empty() {
                break;
            }
        }
        r
    }
}

fn code_to_coeffs(code: u32, p: u32, m: u32) -> Vec<u32> {
    let mut c = code;
    (0..m)
        .map(|_| {
            let d = c % p;
            c /= p;
            d
        })
        .collect()
}

fn coeffs_to_code(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

/// True iff the monic polynomial f over F_p has no monic divisor of degree
/// in 1..=deg(f)/2 (trial division).
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for k in 1..=deg / 2 {
        let count = (p as u64).pow(k as u32);
        for lower in 0..count {
            let mut g = code_to_coeffs(lower as u32, p, k as u32);
            g.push(1); // monic of degree k
            if poly::rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Construct F_{p^m} with the lexicographically smallest monic
    /// irreducible modulus. Requires p prime and p^m ≤ 2^16.
    pub fn new(p: u32, m: u32) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if m == 0 {
            return Err(Error::ParameterMismatch("extension degree must be positive".into()));
        }
        let q = (p as u64).checked_pow(m).filter(|&q| q <= 1 << 16).ok_or(
            Error::FieldTooLarge { p: p as u64, m },
        )? as u32;

        let modulus = {
            let mut found = None;
            for lower in 0..q {
                let mut f = code_to_coeffs(lower, p, m);
                f.push(1);
                if is_irreducible(&f, p) {
                    found = Some(f);
                    break;
                }
            }
            found.expect("an irreducible polynomial of every degree exists")
        };

        // Multiplication of codes via the modulus, table-free.
        let raw_mul = |a: u32, b: u32| -> u32 {
            let pa = code_to_coeffs(a, p, m);
            let pb = code_to_coeffs(b, p, m);
            let prod = poly::mul(&pa, &pb, p);
            let r = poly::rem(&prod, &modulus, p);
            coeffs_to_code(&r, p)
        };
        let raw_pow = |mut base: u32, mut e: u64| -> u32 {
            let mut acc = 1u32;
            while e > 0 {
                if e & 1 == 1 {
                    acc = raw_mul(acc, base);
                }
                base = raw_mul(base, base);
                e >>= 1;
            }
            acc
        };

        // Primitive element: order q-1 checked against the prime factors of q-1.
        let group = (q - 1) as u64;
        let mut factors = vec![];
        {
            let mut n = group;
            let mut d = 2u64;
            while d * d <= n {
                if n % d == 0 {
                    factors.push(d);
                    while n % d == 0 {
                        n /= d;
                    }
                }
                d += 1;
            }
            if n > 1 {
                factors.push(n);
            }
        }
        let generator = (1..q)
            .find(|&g| factors.iter().all(|&f| raw_pow(g, group / f) != 1))
            .expect("the multiplicative group of a finite field is cyclic");

        let mut antilog = Vec::with_capacity(group as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for i in 0..group {
            antilog.push(cur);
            log[cur as usize] = i as u32;
            cur = raw_mul(cur, generator);
        }
        debug_assert_eq!(cur, 1);

        Ok(Field(Arc::new(FieldSpec { p, m, q, modulus, antilog, log })))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }
    pub fn m(&self) -> u32 {
        self.0.m
    }
    /// Field size q = p^m.
    pub fn q(&self) -> u32 {
        self.0.q
    }
    /// Modulus coefficients, little-endian, length m+1, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn elem(&self, code: u32) -> FqElement {
        assert!(code < self.0.q, "element code {} out of range for {:?}", code, self);
        FqElement(code)
    }
    pub fn zero(&self) -> FqElement {
        FqElement(0)
    }
    pub fn one(&self) -> FqElement {
        FqElement(1)
    }
    pub fn elements(&self) -> impl Iterator<Item = FqElement> {
        (0..self.0.q).map(FqElement)
    }

    pub fn coeffs(&self, a: FqElement) -> Vec<u32> {
        code_to_coeffs(a.0, self.0.p, self.0.m)
    }
    pub fn from_coeffs(&self, coeffs: &[u32]) -> FqElement {
        assert_eq!(coeffs.len(), self.0.m as usize);
        assert!(coeffs.iter().all(|&c| c < self.0.p));
        FqElement(coeffs_to_code(coeffs, self.0.p))
    }

    pub fn add(&self, a: FqElement, b: FqElement) -> FqElement {
        let s = &*self.0;
        if s.p == 2 {
            return FqElement(a.0 ^ b.0);
        }
        let (mut x, mut y, mut out, mut mult) = (a.0, b.0, 0u32, 1u32);
        for _ in 0..s.m {
            out += ((x % s.p + y % s.p) % s.p) * mult;
            x /= s.p;
            y /= s.p;
            mult *= s.p;
        }
        FqElement(out)
    }

    pub fn neg(&self, a: FqElement) -> FqElement {
        let s = &*self.0;
        if s.p == 2 {
            return a;
        }
        let (mut x, mut out, mut mult) = (a.0, 0u32, 1u32);
        for _ in 0..s.m {
            out += ((s.p - x % s.p) % s.p) * mult;
            x /= s.p;
            mult *= s.p;
        }
        FqElement(out)
    }

    pub fn sub(&self, a: FqElement, b: FqElement) -> FqElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElement, b: FqElement) -> FqElement {
        let s = &*self.0;
        if a.0 == 0 || b.0 == 0 {
            return FqElement(0);
        }
        let group = (s.q - 1) as u64;
        let idx = (s.log[a.0 as usize] as u64 + s.log[b.0 as usize] as u64) % group;
        FqElement(s.antilog[idx as usize])
    }

    pub fn inv(&self, a: FqElement) -> Result<FqElement> {
        let s = &*self.0;
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let group = s.q - 1;
        let idx = (group - s.log[a.0 as usize]) % group;
        Ok(FqElement(s.antilog[idx as usize]))
    }

    pub fn div(&self, a: FqElement, b: FqElement) -> Result<FqElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FqElement, e: u64) -> FqElement {
        let s = &*self.0;
        if a.0 == 0 {
            return if e == 0 { FqElement(1) } else { FqElement(0) };
        }
        let group = (s.q - 1) as u64;
        let idx = (s.log[a.0 as usize] as u64 * (e % group)) % group;
        FqElement(s.antilog[idx as usize])
    }

    pub fn is_zero(&self, a: FqElement) -> bool {
        a.0 == 0
    }
}

/// An extension F_{q^b} / F_q with both fields realized over F_p, the
/// subfield embedding, the trace map, and a trace-dual basis pair.
///
/// The embedding sends the base polynomial generator to the smallest root of
/// the base modulus inside the extension, which pins it deterministically.
pub struct Extension {
    base: Field,
    ext: Field,
    b: usize,
    embed_tab: Vec<u32>,
    unembed_tab: Vec<u32>,
    basis: Vec<FqElement>,
    dual: Vec<FqElement>,
}

impl Extension {
    pub fn new(base: &Field, ext: &Field) -> Result<Extension> {
        if base.p() != ext.p() {
            return Err(Error::IncompatibleFields(format!(
                "characteristics differ: {} vs {}",
                base.p(),
                ext.p()
            )));
        }
        if ext.m() % base.m() != 0 {
            return Err(Error::IncompatibleFields(format!(
                "degree {} does not divide {}",
                base.m(),
                ext.m()
            )));
        }
        let b = (ext.m() / base.m()) as usize;

        // Smallest root of the base modulus inside the extension.
        let eval = |poly: &[u32], x: FqElement| -> FqElement {
            let mut acc = ext.zero();
            for &c in poly.iter().rev() {
                acc = ext.add(ext.mul(acc, x), ext.elem(c));
            }
            acc
        };
        let root = ext
            .elements()
            .find(|&x| ext.is_zero(eval(base.modulus(), x)))
            .expect("base modulus splits in any extension of compatible degree");

        let mut embed_tab = Vec::with_capacity(base.q() as usize);
        let mut unembed_tab = vec![u32::MAX; ext.q() as usize];
        for a in base.elements() {
            let img = eval(&base.coeffs(a), root);
            embed_tab.push(img.0);
            unembed_tab[img.0 as usize] = a.0;
        }

        let mut e = Extension {
            base: base.clone(),
            ext: ext.clone(),
            b,
            embed_tab,
            unembed_tab,
            basis: vec![],
            dual: vec![],
        };

        // F_q-basis {1, t, ..., t^{b-1}} with t the extension generator, and
        // its trace-dual via Gram inversion over the base field.
        let t = if ext.m() == 1 { ext.one() } else { ext.elem(ext.p()) };
        let basis: Vec<FqElement> = (0..b as u64).map(|i| ext.pow(t, i)).collect();
        let gram: Vec<Vec<FqElement>> = (0..b)
            .map(|i| (0..b).map(|j| e.trace(ext.mul(basis[i], basis[j]))).collect())
            .collect();
        let ginv = invert_base_matrix(base, &gram).ok_or(Error::Degenerate)?;
        let dual: Vec<FqElement> = (0..b)
            .map(|j| {
                let mut acc = ext.zero();
                for k in 0..b {
                    acc = ext.add(acc, ext.mul(e.embed(ginv[j][k]), basis[k]));
                }
                acc
            })
            .collect();
        for i in 0..b {
            for j in 0..b {
                let tr = e.trace(ext.mul(basis[i], dual[j]));
                let expect = if i == j { base.one() } else { base.zero() };
                assert_eq!(tr, expect, "trace-dual basis failed the Gram check");
            }
        }
        e.basis = basis;
        e.dual = dual;
        Ok(e)
    }

    pub fn base(&self) -> &Field {
        &self.base
    }
    pub fn ext(&self) -> &Field {
        &self.ext
    }
    /// Extension degree b with q^b = |ext|.
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn embed(&self, a: FqElement) -> FqElement {
        FqElement(self.embed_tab[a.0 as usize])
    }

    /// Tr(x) = x + x^q + … + x^{q^{b-1}}, mapped back into the base field.
    pub fn trace(&self, x: FqElement) -> FqElement {
        let q = self.base.q() as u64;
        let mut acc = x;
        let mut cur = x;
        for _ in 1..self.b {
            cur = self.ext.pow(cur, q);
            acc = self.ext.add(acc, cur);
        }
        let code = self.unembed_tab[acc.0 as usize];
        assert_ne!(code, u32::MAX, "trace landed outside the base subfield");
        FqElement(code)
    }

    /// F_q-bases ({vᵢ}, {wⱼ}) of F_{q^b} with Tr(vᵢ wⱼ) = δᵢⱼ.
    pub fn trace_dual_basis(&self) -> (&[FqElement], &[FqElement]) {
        (&self.basis, &self.dual)
    }

    /// Coordinates of x in the primal basis: x = Σ φ(x)ᵢ vᵢ.
    pub fn phi_x(&self, x: FqElement) -> Vec<FqElement> {
        self.dual.iter().map(|&w| self.trace(self.ext.mul(x, w))).collect()
    }

    /// Coordinates of y in the dual basis: y = Σ φ(y)ⱼ wⱼ.
    pub fn phi_z(&self, y: FqElement) -> Vec<FqElement> {
        self.basis.iter().map(|&v| self.trace(self.ext.mul(y, v))).collect()
    }
}

/// Gauss-Jordan inverse of a small matrix over the base field.
fn invert_base_matrix(f: &Field, a: &[Vec<FqElement>]) -> Option<Vec<Vec<FqElement>>> {
    let n = a.len();
    let mut m: Vec<Vec<FqElement>> = a.to_vec();
    let mut inv: Vec<Vec<FqElement>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { f.one() } else { f.zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !f.is_zero(m[r][col]))?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = f.inv(m[col][col]).ok()?;
        for j in 0..n {
            m[col][j] = f.mul(m[col][j], scale);
            inv[col][j] = f.mul(inv[col][j], scale);
        }
        for r in 0..n {
            if r != col && !f.is_zero(m[r][col]) {
                let factor = m[r][col];
                for j in 0..n {
                    let t = f.mul(factor, m[col][j]);
                    m[r][j] = f.sub(m[r][j], t);
                    let t = f.mul(factor, inv[col][j]);
                    inv[r][j] = f.sub(inv[r][j], t);
                }
            }
        }
    }
    Some(inv)
}
