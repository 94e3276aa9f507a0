//! CSS and vector-space (folded) CSS codes: construction, parameters,
//! folding, brute-force list oracles, syndromes, and the LDPC check.
//!
//! Ball convention: B(g, τ) is the OPEN ball {v : Δ(v, g) < τ} in the folded
//! Hamming metric, matching the strict inequalities used by the decoder
//! radius. Off-by-one at radius boundaries changes lists, so every oracle
//! here compares with `<`.

use crate::error::{Error, Result};
use crate::fqlinalg::{is_zero_vec, sub_vec, vec_cmp, FqMatrix, LinearSolver, Subspace};
use crate::gf::{Field, FqElement};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    X,
    Z,
}

/// A vector-space CSS code: subspaces (C_X, C_Z) of F_q^{n_phys} with
/// perp(C_Z) ⊆ C_X, folded into blocks of size b.
#[derive(Debug, Clone)]
pub struct CssCode {
    field: Field,
    n_phys: usize,
    b: usize,
    cx: Subspace,
    cz: Subspace,
    cxperp: Subspace,
    czperp: Subspace,
    /// Optional structured generating sets of C_X^⊥ / C_Z^⊥ used by the
    /// LDPC report (e.g. Hamming checks, or the local AEL generators).
    checks_x: Option<FqMatrix>,
    checks_z: Option<FqMatrix>,
}

/// Result of the exact folded-distance enumeration.
#[derive(Debug, Clone, PartialEq)]
pub enum FoldedDistance {
    Finite { weight: usize, witness: Vec<FqElement>, side: Side },
    /// Both set differences are empty (k = 0): distance undefined.
    Degenerate,
}

impl FoldedDistance {
    pub fn weight(&self) -> Option<usize> {
        match self {
            FoldedDistance::Finite { weight, .. } => Some(*weight),
            FoldedDistance::Degenerate => None,
        }
    }
    pub fn delta(&self, n_blocks: usize) -> Option<f64> {
        self.weight().map(|w| w as f64 / n_blocks as f64)
    }
}

/// A set of canonical coset representatives (reduced modulo C_Z^⊥ for the X
/// side, C_X^⊥ for the Z side), sorted for deterministic output.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetList {
    pub side: Side,
    pub reps: Vec<Vec<FqElement>>,
}

impl CosetList {
    pub fn len(&self) -> usize {
        self.reps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
    pub fn to_codes(&self) -> Vec<Vec<u32>> {
        self.reps.iter().map(|r| r.iter().map(|e| e.0).collect()).collect()
    }
}

/// Number of nonzero b-blocks of v.
pub fn folded_weight(field: &Field, v: &[FqElement], b: usize) -> usize {
    v.chunks(b).filter(|c| !is_zero_vec(field, c)).count()
}

/// Fractional folded Hamming distance between u and v over b-blocks.
pub fn folded_distance_frac(u: &[FqElement], v: &[FqElement], b: usize) -> f64 {
    assert_eq!(u.len(), v.len());
    let w = u
        .chunks(b)
        .zip(v.chunks(b))
        .filter(|(a, b)| a.iter().zip(b.iter()).any(|(x, y)| x != y))
        .count();
    w as f64 / (u.len() / b) as f64
}

impl CssCode {
    pub fn new(cx: Subspace, cz: Subspace, b: usize) -> Result<CssCode> {
        Self::with_checks(cx, cz, b, None, None)
    }

    pub fn with_checks(
        cx: Subspace,
        cz: Subspace,
        b: usize,
        checks_x: Option<FqMatrix>,
        checks_z: Option<FqMatrix>,
    ) -> Result<CssCode> {
        if cx.ambient() != cz.ambient() || cx.field() != cz.field() {
            return Err(Error::AmbientMismatch(cx.ambient(), cz.ambient()));
        }
        let n_phys = cx.ambient();
        if b == 0 || n_phys % b != 0 {
            return Err(Error::BadBlockSize { n: n_phys, b });
        }
        let cxperp = cx.perp();
        let czperp = cz.perp();
        // Both directions of the CSS duality symmetry, even though they are
        // equivalent.
        if !cx.contains_subspace(&czperp) || !cz.contains_subspace(&cxperp) {
            return Err(Error::CssConditionViolated);
        }
        if let Some(hx) = &checks_x {
            if Subspace::from_matrix(hx) != cxperp {
                return Err(Error::ParameterMismatch(
                    "supplied X checks do not span C_X^perp".into(),
                ));
            }
        }
        if let Some(hz) = &checks_z {
            if Subspace::from_matrix(hz) != czperp {
                return Err(Error::ParameterMismatch(
                    "supplied Z checks do not span C_Z^perp".into(),
                ));
            }
        }
        Ok(CssCode { field: cx.field().clone(), n_phys, b, cx, cz, cxperp, czperp, checks_x, checks_z })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    /// Unfolded length over F_q.
    pub fn n_phys(&self) -> usize {
        self.n_phys
    }
    /// Fold block size.
    pub fn b(&self) -> usize {
        self.b
    }
    /// Folded blocklength n = n_phys / b.
    pub fn n_blocks(&self) -> usize {
        self.n_phys / self.b
    }
    pub fn cx(&self) -> &Subspace {
        &self.cx
    }
    pub fn cz(&self) -> &Subspace {
        &self.cz
    }
    pub fn cx_perp(&self) -> &Subspace {
        &self.cxperp
    }
    pub fn cz_perp(&self) -> &Subspace {
        &self.czperp
    }

    /// Unfolded F_q-dimension k = dim(C_X) - dim(C_Z^⊥).
    pub fn k_phys(&self) -> usize {
        self.cx.dim() - self.czperp.dim()
    }

    /// Folded dimension k_phys / b, exact only when b divides k_phys.
    pub fn folded_k(&self) -> f64 {
        self.k_phys() as f64 / self.b as f64
    }

    fn spaces(&self, side: Side) -> (&Subspace, &Subspace) {
        match side {
            Side::X => (&self.cx, &self.czperp),
            Side::Z => (&self.cz, &self.cxperp),
        }
    }

    /// Exact folded distance by enumerating (C_X \ C_Z^⊥) ∪ (C_Z \ C_X^⊥).
    pub fn distance(&self, cap: u64) -> Result<FoldedDistance> {
        let mut best: Option<(usize, Vec<FqElement>, Side)> = None;
        for side in [Side::X, Side::Z] {
            let (space, dual) = self.spaces(side);
            for v in space.enumerate(cap)? {
                if dual.contains(&v) {
                    continue;
                }
                let w = folded_weight(&self.field, &v, self.b);
                if best.as_ref().map_or(true, |(bw, _, _)| w < *bw) {
                    best = Some((w, v, side));
                }
            }
        }
        Ok(match best {
            Some((weight, witness, side)) => FoldedDistance::Finite { weight, witness, side },
            None => FoldedDistance::Degenerate,
        })
    }

    /// Brute-force list oracle: the cosets of C_Z^⊥ in C_X (side X) whose
    /// intersection with the open folded ball B(g, τ) is nonempty.
    pub fn list_codewords(
        &self,
        side: Side,
        g: &[FqElement],
        tau: f64,
        cap: u64,
    ) -> Result<CosetList> {
        assert_eq!(g.len(), self.n_phys);
        let (space, dual) = self.spaces(side);
        let mut reps = std::collections::BTreeMap::<Vec<u32>, Vec<FqElement>>::new();
        for h in space.enumerate(cap)? {
            let d = folded_distance_frac(&h, g, self.b);
            if d < tau {
                let rep = dual.coset_reduce(&h);
                let key: Vec<u32> = rep.iter().map(|e| e.0).collect();
                reps.entry(key).or_insert(rep);
            }
        }
        Ok(CosetList { side, reps: reps.into_values().collect() })
    }

    /// Error list L_e(g_X, g_Z, τ) = (L_X - g_X) × (L_Z - g_Z), with each
    /// shifted coset reduced to its canonical representative.
    pub fn error_list(
        &self,
        g_x: &[FqElement],
        g_z: &[FqElement],
        tau: f64,
        cap: u64,
    ) -> Result<(CosetList, CosetList)> {
        let shift = |list: CosetList, g: &[FqElement], dual: &Subspace| -> CosetList {
            let mut reps: Vec<Vec<FqElement>> = list
                .reps
                .iter()
                .map(|h| dual.coset_reduce(&sub_vec(&self.field, h, g)))
                .collect();
            reps.sort_by(vec_cmp);
            CosetList { side: list.side, reps }
        };
        let lx = self.list_codewords(Side::X, g_x, tau, cap)?;
        let lz = self.list_codewords(Side::Z, g_z, tau, cap)?;
        Ok((shift(lx, g_x, &self.czperp), shift(lz, g_z, &self.cxperp)))
    }

    /// Syndrome of v against H = RREF basis of C_X^⊥ (side X) as rows.
    pub fn syndrome(&self, side: Side, v: &[FqElement]) -> Vec<FqElement> {
        assert_eq!(v.len(), self.n_phys);
        let h = match side {
            Side::X => self.cxperp.basis(),
            Side::Z => self.czperp.basis(),
        };
        (0..h.rows()).map(|i| crate::fqlinalg::dot(&self.field, h.row(i), v)).collect()
    }

    /// Any g' with syndrome(g') = s, via Gaussian elimination. s = 0 gives 0.
    pub fn syndrome_to_rep(&self, side: Side, s: &[FqElement]) -> Result<Vec<FqElement>> {
        let h = match side {
            Side::X => self.cxperp.basis(),
            Side::Z => self.czperp.basis(),
        };
        if s.len() != h.rows() {
            return Err(Error::InconsistentSyndrome);
        }
        LinearSolver::new(h).solve(s).ok_or(Error::InconsistentSyndrome)
    }

    /// Check-weight report over the stored generating sets (supplied checks
    /// when present, RREF bases otherwise; no further basis search).
    pub fn ldpc_report(&self, row_cap: usize, col_cap: usize) -> LdpcReport {
        let side_report = |supplied: &Option<FqMatrix>, rref: &Subspace| -> LdpcSideReport {
            let candidates: Vec<&FqMatrix> = supplied
                .iter()
                .chain(std::iter::once(rref.basis()))
                .collect();
            let weights = |m: &FqMatrix| -> (usize, usize) {
                let row_w = m
                    .row_iter()
                    .map(|r| r.iter().filter(|e| !self.field.is_zero(**e)).count())
                    .max()
                    .unwrap_or(0);
                let col_w = (0..m.cols())
                    .map(|j| (0..m.rows()).filter(|&i| !self.field.is_zero(m.get(i, j))).count())
                    .max()
                    .unwrap_or(0);
                (row_w, col_w)
            };
            let (max_row_weight, max_col_weight) =
                candidates.iter().map(|m| weights(m)).min().expect("at least the RREF basis");
            LdpcSideReport {
                n_checks: rref.dim(),
                max_row_weight,
                max_col_weight,
                within_caps: max_row_weight <= row_cap && max_col_weight <= col_cap,
            }
        };
        LdpcReport {
            x: side_report(&self.checks_x, &self.cxperp),
            z: side_report(&self.checks_z, &self.czperp),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LdpcSideReport {
    pub n_checks: usize,
    pub max_row_weight: usize,
    pub max_col_weight: usize,
    pub within_caps: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LdpcReport {
    pub x: LdpcSideReport,
    pub z: LdpcSideReport,
}

// ---------------------------------------------------------------------------
// Built-in constructors
// ---------------------------------------------------------------------------

/// Trivial [[n, n]] code: C_X = C_Z = F_q^n, C_Z^⊥ = {0}.
pub fn trivial(field: &Field, n: usize, b: usize) -> Result<CssCode> {
    CssCode::new(Subspace::full(field, n), Subspace::full(field, n), b)
}

/// The [[4,2,2]] code: C_X = C_Z = ker(1111) over F_2.
pub fn four_two_two() -> CssCode {
    let f = Field::new(2, 1).unwrap();
    let ones = FqMatrix::from_codes(&f, &[vec![1, 1, 1, 1]]).unwrap();
    let code = Subspace::from_matrix(&ones.kernel());
    CssCode::with_checks(code.clone(), code, 1, Some(ones.clone()), Some(ones)).unwrap()
}

/// Steane [[7,1,3]]: C_X = C_Z = the [7,4] Hamming code, with the standard
/// weight-4 parity checks attached.
pub fn steane() -> CssCode {
    let f = Field::new(2, 1).unwrap();
    let h = FqMatrix::from_codes(
        &f,
        &[
            vec![0, 0, 0, 1, 1, 1, 1],
            vec![0, 1, 1, 0, 0, 1, 1],
            vec![1, 0, 1, 0, 1, 0, 1],
        ],
    )
    .unwrap();
    let code = Subspace::from_matrix(&h.kernel());
    CssCode::with_checks(code.clone(), code, 1, Some(h.clone()), Some(h)).unwrap()
}

/// CSS from two classical codes C1, C2 (as generator subspaces) with
/// C2^⊥ ⊆ C1: C_X = C1, C_Z = C2.
pub fn from_classical(c1: Subspace, c2: Subspace, b: usize) -> Result<CssCode> {
    CssCode::new(c1, c2, b)
}

/// Quantum GRS code over F_q: C_X = GRS_{kx}(α, v) and C_Z = GRS_{kz}(α, 1)
/// with α the first n field elements and vᵢ = (Π_{j≠i}(αᵢ-αⱼ))⁻¹, so that
/// C_Z^⊥ = GRS_{n-kz}(α, v) nests inside C_X by degree. Requires
/// kx + kz ≥ n and n ≤ q.
pub fn grs(field: &Field, n: usize, kx: usize, kz: usize) -> Result<CssCode> {
    if n > field.q() as usize {
        return Err(Error::ParameterMismatch(format!(
            "GRS needs n ≤ q ({} > {})",
            n,
            field.q()
        )));
    }
    if kx + kz < n || kx > n || kz > n {
        return Err(Error::ParameterMismatch(
            "GRS nesting needs kx + kz ≥ n with kx, kz ≤ n".into(),
        ));
    }
    let alpha: Vec<FqElement> = (0..n as u32).map(|i| field.elem(i)).collect();
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let mut prod = field.one();
        for j in 0..n {
            if j != i {
                prod = field.mul(prod, field.sub(alpha[i], alpha[j]));
            }
        }
        v.push(field.inv(prod)?);
    }
    let grs_rows = |k: usize, mult: &dyn Fn(usize) -> FqElement| -> Vec<Vec<FqElement>> {
        (0..k as u64)
            .map(|t| (0..n).map(|i| field.mul(mult(i), field.pow(alpha[i], t))).collect())
            .collect()
    };
    let cx = Subspace::from_generators(field, n, &grs_rows(kx, &|i| v[i]));
    let cz = Subspace::from_generators(field, n, &grs_rows(kz, &|_| field.one()));
    // Structured dual generators: C_X^⊥ = GRS_{n-kx}(α, 1), C_Z^⊥ = GRS_{n-kz}(α, v).
    let checks_x = FqMatrix::from_rows(field, n, &grs_rows(n - kx, &|_| field.one()));
    let checks_z = FqMatrix::from_rows(field, n, &grs_rows(n - kz, &|i| v[i]));
    CssCode::with_checks(cx, cz, 1, Some(checks_x), Some(checks_z))
}

/// Random CSS sampler: a random subspace S = C_Z^⊥ of dimension `dim_s`,
/// a random superspace C_X ⊇ S of dimension dim_s + k, and C_Z = S^⊥.
pub fn random_css(
    field: &Field,
    n_phys: usize,
    b: usize,
    dim_s: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Result<CssCode> {
    assert!(dim_s + k <= n_phys);
    let rand_vec = |rng: &mut dyn rand::RngCore| -> Vec<FqElement> {
        (0..n_phys).map(|_| field.elem(rng.gen_range(0..field.q()))).collect()
    };
    let grow = |target: usize, start: &Subspace, rng: &mut dyn rand::RngCore| -> Subspace {
        let mut cur = start.clone();
        while cur.dim() < target {
            let v = rand_vec(rng);
            let grown = cur.sum(&Subspace::from_generators(field, n_phys, &[v])).unwrap();
            if grown.dim() > cur.dim() {
                cur = grown;
            }
        }
        cur
    };
    let s = grow(dim_s, &Subspace::zero(field, n_phys), rng);
    let cx = grow(dim_s + k, &s, rng);
    let cz = s.perp();
    CssCode::new(cx, cz, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqlinalg::DEFAULT_ENUM_CAP as CAP;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_code_parameters() {
        let f = Field::new(2, 1).unwrap();
        let c = trivial(&f, 4, 1).unwrap();
        assert_eq!(c.k_phys(), 4);
        assert_eq!(c.cz_perp().dim(), 0);
        match c.distance(CAP).unwrap() {
            FoldedDistance::Finite { weight, .. } => assert_eq!(weight, 1),
            _ => panic!("trivial code has distance 1"),
        }
    }

    #[test]
    fn steane_is_7_1_3() {
        let c = steane();
        assert_eq!((c.n_phys(), c.k_phys()), (7, 1));
        // Oracle: brute force over 16 codewords minus the 8 dual elements,
        // both sides.
        let d = c.distance(CAP).unwrap();
        assert_eq!(d.weight(), Some(3));
    }

    #[test]
    fn four_two_two_is_4_2_2() {
        let c = four_two_two();
        assert_eq!((c.n_phys(), c.k_phys()), (4, 2));
        assert_eq!(c.distance(CAP).unwrap().weight(), Some(2));
    }

    #[test]
    fn css_condition_is_enforced() {
        let f = Field::new(2, 1).unwrap();
        let cx = Subspace::from_generators(&f, 3, &[vec![f.one(), f.zero(), f.zero()]]);
        let cz = Subspace::from_generators(&f, 3, &[vec![f.zero(), f.one(), f.zero()]]);
        assert_eq!(CssCode::new(cx, cz, 1).unwrap_err(), Error::CssConditionViolated);
        let full = Subspace::full(&f, 3);
        assert!(matches!(
            CssCode::new(full.clone(), full, 2).unwrap_err(),
            Error::BadBlockSize { .. }
        ));
    }

    #[test]
    fn degenerate_distance_is_reported() {
        // C_X = C_Z^⊥ on both sides: k = 0, distance undefined.
        let f = Field::new(2, 1).unwrap();
        let rep = Subspace::from_generators(&f, 2, &[vec![f.one(), f.one()]]);
        let c = CssCode::new(rep.clone(), rep.perp().perp(), 1);
        // span{11}: perp is itself over F_2, so C_Z^⊥ = C_X and both set
        // differences are empty.
        let c = c.unwrap();
        assert_eq!(c.k_phys(), 0);
        assert_eq!(c.distance(CAP).unwrap(), FoldedDistance::Degenerate);
    }

    #[test]
    fn list_oracle_radius_edges() {
        let c = steane();
        let f = c.field().clone();
        let zero = vec![f.zero(); 7];
        // τ = 0: open ball is empty, even around a codeword.
        assert!(c.list_codewords(Side::X, &zero, 0.0, CAP).unwrap().is_empty());
        // small τ around a codeword: exactly its own coset
        let l = c.list_codewords(Side::X, &zero, 1e-9, CAP).unwrap();
        assert_eq!(l.reps, vec![zero.clone()]);
        // τ ≥ 1: every coset of C_Z^⊥ in C_X
        let l = c.list_codewords(Side::X, &zero, 1.0 + 1e-9, CAP).unwrap();
        assert_eq!(l.len(), 2);
        // Steane, g = 0, τ = 3/7: the other coset has min weight 3 and the
        // ball is open, so exactly the zero coset is listed.
        let l = c.list_codewords(Side::X, &zero, 3.0 / 7.0, CAP).unwrap();
        assert_eq!(l.reps, vec![zero]);
    }

    #[test]
    fn error_list_translation_invariance() {
        let c = steane();
        let f = c.field().clone();
        let zero = vec![f.zero(); 7];
        let tau = 2.0 / 7.0;
        let (ex0, ez0) = c.error_list(&zero, &zero, 0.0 + 1e-9, CAP).unwrap();
        assert_eq!(ex0.reps, vec![zero.clone()]);
        assert_eq!(ez0.reps, vec![zero.clone()]);

        // Planted weight-1 error: g = codeword + e.
        let cw = c.cx().basis().row(1).to_vec();
        let mut e = vec![f.zero(); 7];
        e[3] = f.one();
        let g: Vec<FqElement> = crate::fqlinalg::add_vec(&f, &cw, &e);
        let (ex, _) = c.error_list(&g, &zero, tau, CAP).unwrap();
        // Single error coset, and it contains the planted error.
        assert_eq!(ex.len(), 1);
        assert_eq!(ex.reps[0], c.cz_perp().coset_reduce(&e));
        // At τ = 1/7 the open ball contains only exact codewords, so the
        // list for a corrupted word is empty.
        let (ex_small, _) = c.error_list(&g, &zero, 1.0 / 7.0, CAP).unwrap();
        assert!(ex_small.is_empty());

        // Shifting g by any codeword leaves the error list unchanged.
        let g_shifted = crate::fqlinalg::add_vec(&f, &g, &cw);
        let (ex2, _) = c.error_list(&g_shifted, &zero, tau, CAP).unwrap();
        assert_eq!(ex.reps, ex2.reps);
    }

    #[test]
    fn syndrome_round_trip() {
        let c = steane();
        let f = c.field().clone();
        for v in c.cx().enumerate(CAP).unwrap() {
            assert!(is_zero_vec(&f, &c.syndrome(Side::X, &v)));
        }
        let zero_s = vec![f.zero(); c.cx_perp().dim()];
        assert_eq!(c.syndrome_to_rep(Side::X, &zero_s).unwrap(), vec![f.zero(); 7]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let v: Vec<FqElement> = (0..7).map(|_| f.elem(rng.gen_range(0..2))).collect();
            let s = c.syndrome(Side::X, &v);
            let g = c.syndrome_to_rep(Side::X, &s).unwrap();
            // v - g has zero syndrome, i.e. lies in C_X
            assert!(c.cx().contains(&sub_vec(&f, &v, &g)));
        }
    }

    #[test]
    fn ldpc_report_uses_supplied_checks() {
        let c = steane();
        let r = c.ldpc_report(4, 4);
        assert_eq!(r.x.max_row_weight, 4);
        assert!(r.x.within_caps && r.z.within_caps);
        let f = Field::new(2, 1).unwrap();
        let t = trivial(&f, 4, 1).unwrap();
        let r = t.ldpc_report(1, 1);
        assert_eq!(r.x.n_checks, 0);
        assert!(r.x.within_caps); // vacuously sparse
    }

    #[test]
    fn grs_5_1_over_f8() {
        let f8 = Field::new(2, 3).unwrap();
        let c = grs(&f8, 5, 3, 3).unwrap();
        assert_eq!((c.n_phys(), c.k_phys()), (5, 1));
        // MDS: quantum distance min(n-kx+1, n-kz+1) = 3
        assert_eq!(c.distance(CAP).unwrap().weight(), Some(3));
    }

    #[test]
    fn grs_rejects_bad_parameters() {
        let f4 = Field::new(2, 2).unwrap();
        assert!(grs(&f4, 5, 3, 3).is_err()); // n > q
        assert!(grs(&f4, 4, 1, 1).is_err()); // kx + kz < n
    }

    #[test]
    fn random_sampler_produces_valid_codes() {
        let f = Field::new(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let c = random_css(&f, 8, 2, 2, 2, &mut rng).unwrap();
            assert_eq!(c.k_phys(), 2);
            assert!(c.cx().contains_subspace(c.cz_perp()));
            assert!(c.cz().contains_subspace(c.cx_perp()));
        }
        // Determinism: same seed, same code.
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let c1 = random_css(&f, 6, 1, 2, 1, &mut r1).unwrap();
        let c2 = random_css(&f, 6, 1, 2, 1, &mut r2).unwrap();
        assert_eq!(c1.cx().basis(), c2.cx().basis());
    }

    #[test]
    fn folded_dimension_identity() {
        // Folded dimension · b = dim(cx) - dim(perp(cz)) exactly.
        let f4 = Field::new(2, 2).unwrap();
        let c = grs(&f4, 4, 3, 3).unwrap();
        assert_eq!(c.k_phys(), 2);
        assert!((c.folded_k() * c.b() as f64 - c.k_phys() as f64).abs() < 1e-12);
    }
}
