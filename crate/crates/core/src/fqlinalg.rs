//! Exact F_q linear algebra: matrices, canonical subspaces in reduced
//! row-echelon form, duals, sums/intersections, complements, and coset
//! machinery.
//!
//! Every `Subspace` keeps its basis in RREF with zero rows dropped, so two
//! subspaces are equal exactly when their stored bases are equal. List
//! outputs downstream are sets of cosets and rely on this canonical form.

use crate::error::{Error, Result};
use crate::gf::{Field, FqElement};

/// Default cap on exhaustive vector enumeration (2^22 vectors).
pub const DEFAULT_ENUM_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FqElement>,
}

impl FqMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FqMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &Field, cols: usize, rows: &[Vec<FqElement>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend_from_slice(r);
        }
        FqMatrix { field: field.clone(), rows: rows.len(), cols, data }
    }

    /// Rows given as integer element codes, the JSON wire format.
    pub fn from_codes(field: &Field, rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::ParameterMismatch("ragged matrix rows".into()));
            }
            for &c in r {
                if c >= field.q() {
                    return Err(Error::ParameterMismatch(format!(
                        "element code {} out of range for q={}",
                        c,
                        field.q()
                    )));
                }
                data.push(field.elem(c));
            }
        }
        Ok(FqMatrix { field: field.clone(), rows: rows.len(), cols, data })
    }

    pub fn to_codes(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|e| e.0).collect()).collect()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> FqElement {
        self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: FqElement) {
        self.data[i * self.cols + j] = v;
    }
    pub fn row(&self, i: usize) -> &[FqElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    pub fn row_iter(&self) -> impl Iterator<Item = &[FqElement]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn transpose(&self) -> FqMatrix {
        let mut out = FqMatrix::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &FqMatrix) -> FqMatrix {
        assert_eq!(self.cols, other.rows);
        let f = &self.field;
        let mut out = FqMatrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let t = f.mul(a, other.get(k, j));
                    out.set(i, j, f.add(out.get(i, j), t));
                }
            }
        }
        out
    }

    pub fn stack(&self, other: &FqMatrix) -> FqMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        FqMatrix {
            field: self.field.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Reduced row-echelon form with zero rows removed. Row space preserved.
    pub fn rref(&self) -> FqMatrix {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            let Some(r) = (pivot_row..m.rows).find(|&r| !f.is_zero(m.get(r, col))) else {
                continue;
            };
            for j in 0..m.cols {
                let (a, b) = (m.get(pivot_row, j), m.get(r, j));
                m.set(pivot_row, j, b);
                m.set(r, j, a);
            }
            let scale = f.inv(m.get(pivot_row, col)).expect("pivot is nonzero");
            for j in 0..m.cols {
                m.set(pivot_row, j, f.mul(m.get(pivot_row, j), scale));
            }
            for r2 in 0..m.rows {
                if r2 != pivot_row && !f.is_zero(m.get(r2, col)) {
                    let factor = m.get(r2, col);
                    for j in 0..m.cols {
                        let t = f.mul(factor, m.get(pivot_row, j));
                        m.set(r2, j, f.sub(m.get(r2, j), t));
                    }
                }
            }
            pivot_row += 1;
            if pivot_row == m.rows {
                break;
            }
        }
        m.data.truncate(pivot_row * m.cols);
        m.rows = pivot_row;
        m
    }

    pub fn rank(&self) -> usize {
        self.rref().rows
    }

    /// Basis of { x : M x = 0 }, canonicalized via RREF.
    pub fn kernel(&self) -> FqMatrix {
        let f = &self.field;
        let r = self.rref();
        let mut pivots = Vec::with_capacity(r.rows);
        for i in 0..r.rows {
            let col = (0..r.cols).find(|&c| !f.is_zero(r.get(i, c))).expect("no zero rows");
            pivots.push(col);
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut gens = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![f.zero(); self.cols];
            v[fc] = f.one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(i, fc));
            }
            gens.push(v);
        }
        FqMatrix::from_rows(f, self.cols, &gens).rref()
    }
}

/// An F_q-linear subspace of F_q^n, stored as a canonical RREF basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: FqMatrix,
}

impl Subspace {
    pub fn from_generators(field: &Field, ambient: usize, gens: &[Vec<FqElement>]) -> Subspace {
        let m = FqMatrix::from_rows(field, ambient, gens);
        Subspace { ambient, basis: m.rref() }
    }

    pub fn from_matrix(m: &FqMatrix) -> Subspace {
        Subspace { ambient: m.cols(), basis: m.rref() }
    }

    pub fn zero(field: &Field, ambient: usize) -> Subspace {
        Subspace { ambient, basis: FqMatrix::zeros(field, 0, ambient) }
    }

    pub fn full(field: &Field, ambient: usize) -> Subspace {
        Subspace { ambient, basis: FqMatrix::identity(field, ambient) }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }
    pub fn field(&self) -> &Field {
        self.basis.field()
    }
    /// Canonical RREF basis rows.
    pub fn basis(&self) -> &FqMatrix {
        &self.basis
    }

    pub fn contains(&self, v: &[FqElement]) -> bool {
        is_zero_vec(self.field(), &self.coset_reduce(v))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.row_iter().all(|r| self.contains(r))
    }

    /// Dual under the canonical bilinear form ⟨u,v⟩ = Σ uᵢvᵢ.
    pub fn perp(&self) -> Subspace {
        Subspace { ambient: self.ambient, basis: self.basis.kernel() }
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(Subspace {
            ambient: self.ambient,
            basis: self.basis.stack(&other.basis).rref(),
        })
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(self.perp().sum(&other.perp())?.perp())
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient || self.field() != other.field() {
            return Err(Error::AmbientMismatch(self.ambient, other.ambient));
        }
        Ok(())
    }

    /// Deterministic complement W with self = W ⊕ sub: greedy over the RREF
    /// basis of self, skipping vectors already in span(sub ∪ chosen).
    pub fn complement_in(&self, sub: &Subspace) -> Result<Subspace> {
        self.check_ambient(sub)?;
        if !self.contains_subspace(sub) {
            return Err(Error::NotSubspace);
        }
        let f = self.field();
        let mut span = sub.basis.clone();
        let mut chosen: Vec<Vec<FqElement>> = vec![];
        for row in self.basis.row_iter() {
            let candidate = span.stack(&FqMatrix::from_rows(f, self.ambient, &[row.to_vec()]));
            let r = candidate.rref();
            if r.rows() > span.rows() {
                chosen.push(row.to_vec());
                span = r;
            }
        }
        Ok(Subspace::from_generators(f, self.ambient, &chosen))
    }

    /// Canonical representative of v + self: v reduced by the RREF basis, so
    /// the result has zeros at every pivot column of self.
    pub fn coset_reduce(&self, v: &[FqElement]) -> Vec<FqElement> {
        assert_eq!(v.len(), self.ambient);
        let f = self.field();
        let mut out = v.to_vec();
        for row in self.basis.row_iter() {
            let pivot = (0..self.ambient)
                .find(|&c| !f.is_zero(row[c]))
                .expect("basis rows are nonzero");
            let factor = out[pivot];
            if !f.is_zero(factor) {
                for j in 0..self.ambient {
                    out[j] = f.sub(out[j], f.mul(factor, row[j]));
                }
            }
        }
        out
    }

    /// All q^dim vectors of the subspace, in deterministic counter order.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<Vec<FqElement>>> {
        let f = self.field();
        let total = (f.q() as u128).checked_pow(self.dim() as u32).unwrap_or(u128::MAX);
        if total > cap as u128 {
            return Err(Error::CapExceeded { needed: total, cap });
        }
        let mut out = Vec::with_capacity(total as usize);
        let mut digits = vec![0u32; self.dim()];
        loop {
            let mut v = vec![f.zero(); self.ambient];
            for (i, &d) in digits.iter().enumerate() {
                if d != 0 {
                    let scalar = f.elem(d);
                    for j in 0..self.ambient {
                        v[j] = f.add(v[j], f.mul(scalar, self.basis.get(i, j)));
                    }
                }
            }
            out.push(v);
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ok(out);
                }
                digits[i] += 1;
                if digits[i] < f.q() {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    /// Exactly q^{dim V - dim U} canonical representatives, one per coset of
    /// `sub` inside `self`. Requires sub ⊆ self.
    pub fn coset_enumerate(&self, sub: &Subspace, cap: u64) -> Result<Vec<Vec<FqElement>>> {
        if !self.contains_subspace(sub) {
            return Err(Error::NotSubspace);
        }
        let w = self.complement_in(sub)?;
        let mut reps: Vec<Vec<FqElement>> =
            w.enumerate(cap)?.iter().map(|v| sub.coset_reduce(v)).collect();
        reps.sort_by(vec_cmp);
        Ok(reps)
    }
}

pub fn vec_cmp(a: &Vec<FqElement>, b: &Vec<FqElement>) -> std::cmp::Ordering {
    a.iter().map(|e| e.0).cmp(b.iter().map(|e| e.0))
}

pub fn dot(f: &Field, a: &[FqElement], b: &[FqElement]) -> FqElement {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(f.zero(), |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

pub fn add_vec(f: &Field, a: &[FqElement], b: &[FqElement]) -> Vec<FqElement> {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

pub fn sub_vec(f: &Field, a: &[FqElement], b: &[FqElement]) -> Vec<FqElement> {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

pub fn is_zero_vec(f: &Field, v: &[FqElement]) -> bool {
    v.iter().all(|&x| f.is_zero(x))
}

/// Repeated exact solves against a fixed coefficient matrix A: solving
/// A x = b by a one-time Gauss pass stored as a row transform.
pub struct LinearSolver {
    field: Field,
    /// RREF of A.
    rref: FqMatrix,
    /// Transform T with T·A = rref(A) (padded with zero rows).
    transform: FqMatrix,
    /// Pivot column per RREF row.
    pivots: Vec<usize>,
}

impl LinearSolver {
    pub fn new(a: &FqMatrix) -> LinearSolver {
        let f = a.field().clone();
        let augmented = {
            let mut m = FqMatrix::zeros(&f, a.rows(), a.cols() + a.rows());
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    m.set(i, j, a.get(i, j));
                }
                m.set(i, a.cols() + i, f.one());
            }
            m
        };
        // RREF on the augmented block: pivots restricted to the A-columns by
        // eliminating manually.
        let mut m = augmented;
        let mut pivot_row = 0;
        let mut pivots = vec![];
        for col in 0..a.cols() {
            let Some(r) = (pivot_row..m.rows()).find(|&r| !f.is_zero(m.get(r, col))) else {
                continue;
            };
            for j in 0..m.cols() {
                let (x, y) = (m.get(pivot_row, j), m.get(r, j));
                m.set(pivot_row, j, y);
                m.set(r, j, x);
            }
            let scale = f.inv(m.get(pivot_row, col)).unwrap();
            for j in 0..m.cols() {
                m.set(pivot_row, j, f.mul(m.get(pivot_row, j), scale));
            }
            for r2 in 0..m.rows() {
                if r2 != pivot_row && !f.is_zero(m.get(r2, col)) {
                    let factor = m.get(r2, col);
                    for j in 0..m.cols() {
                        let t = f.mul(factor, m.get(pivot_row, j));
                        m.set(r2, j, f.sub(m.get(r2, j), t));
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        let mut rref = FqMatrix::zeros(&f, m.rows(), a.cols());
        let mut transform = FqMatrix::zeros(&f, m.rows(), a.rows());
        for i in 0..m.rows() {
            for j in 0..a.cols() {
                rref.set(i, j, m.get(i, j));
            }
            for j in 0..a.rows() {
                transform.set(i, j, m.get(i, a.cols() + j));
            }
        }
        LinearSolver { field: f, rref, transform, pivots }
    }

    /// One solution x with A x = b, or None if the system is inconsistent.
    /// Free variables are set to zero, so b = 0 always yields x = 0.
    pub fn solve(&self, b: &[FqElement]) -> Option<Vec<FqElement>> {
        let f = &self.field;
        assert_eq!(b.len(), self.transform.cols());
        let tb: Vec<FqElement> = (0..self.transform.rows())
            .map(|i| dot(f, self.transform.row(i), b))
            .collect();
        for i in self.pivots.len()..tb.len() {
            if !f.is_zero(tb[i]) {
                return None;
            }
        }
        let mut x = vec![f.zero(); self.rref.cols()];
        // Back-substitution is immediate: rref rows have unit pivots with
        // zeros above, and free variables stay zero.
        for (i, &col) in self.pivots.iter().enumerate().rev() {
            let mut val = tb[i];
            for j in col + 1..self.rref.cols() {
                if !f.is_zero(x[j]) {
                    val = f.sub(val, f.mul(self.rref.get(i, j), x[j]));
                }
            }
            x[col] = val;
        }
        Some(x)
    }
}
