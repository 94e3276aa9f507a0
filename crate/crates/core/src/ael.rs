//! Concatenation E = D ∘_φ C and AEL distance amplification: the concatenated
//! code routed along a bipartite graph, the three distance metrics, local
//! inversion, the partial minimizer, and the distance theorem as executable
//! checks.
//!
//! Codewords are kept unfolded in edge-id order (left-major): the left block
//! of vertex ℓ occupies the contiguous coordinates [ℓ·d·b_in, (ℓ+1)·d·b_in).
//! The right-folded code F is a view over this representation; right blocks
//! are gathered through the graph's right port lists.

use crate::css::{CssCode, FoldedDistance};
use crate::duality::{complement_dual_maps, DualityMap};
use crate::error::{Error, Result};
use crate::fqlinalg::{is_zero_vec, sub_vec, vec_cmp, FqMatrix, LinearSolver, Subspace};
use crate::gf::{Field, FqElement};
use crate::graph::BipartiteGraph;

/// An unfolded codeword or received word: one Σ = F_q^{b_in} symbol per edge.
pub type EdgeWord = Vec<FqElement>;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Metrics {
    pub delta_l: f64,
    pub delta_lperp: f64,
    pub delta_r: f64,
}

pub struct AelCode {
    outer: CssCode,
    inner: CssCode,
    maps: DualityMap,
    graph: BipartiteGraph,
    concat: CssCode,
    lambda: f64,
    delta_in: f64,
    delta_out: Option<f64>,
    invert_x: LinearSolver,
    invert_z: LinearSolver,
}

impl AelCode {
    /// Concatenate `outer` with `inner` along `graph` and verify the defining
    /// subspace identities exactly.
    pub fn build(
        outer: CssCode,
        inner: CssCode,
        graph: BipartiteGraph,
        cap: u64,
    ) -> Result<AelCode> {
        if outer.field() != inner.field() {
            return Err(Error::IncompatibleFields("outer and inner fields differ".into()));
        }
        let n = graph.n();
        let d = graph.d();
        if outer.n_blocks() != n {
            return Err(Error::ParameterMismatch(format!(
                "outer blocklength {} != |L| = {}",
                outer.n_blocks(),
                n
            )));
        }
        if inner.n_blocks() != d {
            return Err(Error::ParameterMismatch(format!(
                "inner blocklength {} != degree {}",
                inner.n_blocks(),
                d
            )));
        }
        if inner.k_phys() != outer.b() {
            return Err(Error::ParameterMismatch(format!(
                "inner dimension b_in·k_in = {} must equal b_out = {}",
                inner.k_phys(),
                outer.b()
            )));
        }
        let field = outer.field().clone();
        let b_in = inner.b();
        let n_in = inner.n_phys();
        let ambient = n * n_in;

        let maps = complement_dual_maps(&inner)?;

        // Generators supported on a single left block.
        let locals = |space: &Subspace| -> Vec<EdgeWord> {
            let mut gens = vec![];
            for l in 0..n {
                for row in space.basis().row_iter() {
                    let mut v = vec![field.zero(); ambient];
                    v[l * n_in..(l + 1) * n_in].copy_from_slice(row);
                    gens.push(v);
                }
            }
            gens
        };
        let mapped = |space: &Subspace, x_side: bool| -> Vec<EdgeWord> {
            space
                .basis()
                .row_iter()
                .map(|row| if x_side { maps.extend_x(row) } else { maps.extend_z(row) })
                .collect()
        };

        let mut gens_x = mapped(outer.cx(), true);
        gens_x.extend(locals(inner.cz_perp()));
        let ex = Subspace::from_generators(&field, ambient, &gens_x);

        let mut gens_z = mapped(outer.cz(), false);
        gens_z.extend(locals(inner.cx_perp()));
        let ez = Subspace::from_generators(&field, ambient, &gens_z);

        // Structured parity checks: generators of E_X^⊥ are the mapped
        // generators of D_X^⊥ plus the left-local C_X^⊥ generators, each of
        // weight at most d·b_in.
        let mut checks_x_rows = mapped(&outer.cx_perp().clone(), false);
        checks_x_rows.extend(locals(inner.cx_perp()));
        let mut checks_z_rows = mapped(&outer.cz_perp().clone(), true);
        checks_z_rows.extend(locals(inner.cz_perp()));
        let checks_x = FqMatrix::from_rows(&field, ambient, &checks_x_rows);
        let checks_z = FqMatrix::from_rows(&field, ambient, &checks_z_rows);

        // The dual-space identities are verified by css construction: the
        // supplied check rows must span exactly E_X^⊥ and E_Z^⊥.
        let concat = CssCode::with_checks(ex, ez, b_in, Some(checks_x), Some(checks_z))?;

        // Folded dimension identity: k(E)·b_out = k(D)·k(C).
        if concat.k_phys() * outer.b() != outer.k_phys() * inner.k_phys() {
            return Err(Error::ParameterMismatch(format!(
                "concatenated dimension {} violates k_out·k_in",
                concat.k_phys()
            )));
        }

        let (_, lambda) = graph.sigma2();
        let delta_in = match inner.distance(cap)? {
            FoldedDistance::Finite { weight, .. } => weight as f64 / d as f64,
            FoldedDistance::Degenerate => {
                return Err(Error::ParameterMismatch("inner code is degenerate".into()))
            }
        };
        let delta_out = match outer.distance(cap) {
            Ok(FoldedDistance::Finite { weight, .. }) => Some(weight as f64 / n as f64),
            Ok(FoldedDistance::Degenerate) => None,
            Err(Error::CapExceeded { .. }) => None,
            Err(e) => return Err(e),
        };

        let invert_x = LinearSolver::new(
            &maps.phi_x_matrix().stack(inner.cz_perp().basis()).transpose(),
        );
        let invert_z = LinearSolver::new(
            &maps.phi_z_matrix().stack(inner.cx_perp().basis()).transpose(),
        );

        Ok(AelCode {
            outer,
            inner,
            maps,
            graph,
            concat,
            lambda,
            delta_in,
            delta_out,
            invert_x,
            invert_z,
        })
    }

    pub fn outer(&self) -> &CssCode {
        &self.outer
    }
    pub fn inner(&self) -> &CssCode {
        &self.inner
    }
    pub fn maps(&self) -> &DualityMap {
        &self.maps
    }
    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }
    /// The concatenated code E = (E_X, E_Z) with fold b_in.
    pub fn concat(&self) -> &CssCode {
        &self.concat
    }
    pub fn field(&self) -> &Field {
        self.concat.field()
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    /// Inner folded distance δ_in.
    pub fn delta_in(&self) -> f64 {
        self.delta_in
    }
    /// Outer folded distance δ_out, when enumerable under the build cap.
    pub fn delta_out(&self) -> Option<f64> {
        self.delta_out
    }
    pub fn n(&self) -> usize {
        self.graph.n()
    }
    pub fn d(&self) -> usize {
        self.graph.d()
    }
    pub fn b_in(&self) -> usize {
        self.inner.b()
    }
    /// Alphabet size s = q^{b_in} of Σ.
    pub fn s(&self) -> u64 {
        (self.field().q() as u64).pow(self.b_in() as u32)
    }

    pub fn zero_word(&self) -> EdgeWord {
        vec![self.field().zero(); self.concat.n_phys()]
    }

    /// Restriction z_ℓ in left-port order (contiguous in edge order).
    pub fn restrict_left<'a>(&self, z: &'a [FqElement], l: usize) -> &'a [FqElement] {
        let n_in = self.inner.n_phys();
        &z[l * n_in..(l + 1) * n_in]
    }

    /// Restriction z_r gathered in right-port order.
    pub fn restrict_right(&self, z: &[FqElement], r: usize) -> Vec<FqElement> {
        let b = self.b_in();
        let mut out = Vec::with_capacity(self.d() * b);
        for &e in self.graph.right_edges(r) {
            out.extend_from_slice(&z[e * b..(e + 1) * b]);
        }
        out
    }

    /// Scatter per-left-block values back into edge order.
    pub fn scatter_left(&self, blocks: &[Vec<FqElement>]) -> EdgeWord {
        assert_eq!(blocks.len(), self.n());
        let mut out = Vec::with_capacity(self.concat.n_phys());
        for b in blocks {
            assert_eq!(b.len(), self.inner.n_phys());
            out.extend_from_slice(b);
        }
        out
    }

    /// The three distance metrics (Δ_L, Δ_{L,C_Z^⊥}, Δ_R) between words.
    pub fn metrics(&self, z: &[FqElement], h: &[FqElement]) -> Metrics {
        assert_eq!(z.len(), h.len());
        let f = self.field();
        let n = self.n() as f64;
        let mut dl = 0usize;
        let mut dlp = 0usize;
        for l in 0..self.n() {
            let zl = self.restrict_left(z, l);
            let hl = self.restrict_left(h, l);
            if zl != hl {
                dl += 1;
                if !self.inner.cz_perp().contains(&sub_vec(f, zl, hl)) {
                    dlp += 1;
                }
            }
        }
        let mut dr = 0usize;
        for r in 0..self.n() {
            if self.restrict_right(z, r) != self.restrict_right(h, r) {
                dr += 1;
            }
        }
        Metrics { delta_l: dl as f64 / n, delta_lperp: dlp as f64 / n, delta_r: dr as f64 / n }
    }

    /// Fraction of nonzero right blocks.
    pub fn right_weight(&self, z: &[FqElement]) -> usize {
        let f = self.field();
        (0..self.n()).filter(|&r| !is_zero_vec(f, &self.restrict_right(z, r))).count()
    }

    /// Unique u with x = φ_X(u) + w, w ∈ C_Z^⊥, for x ∈ C_X (side X); the
    /// Z-side solves against φ_Z and C_X^⊥.
    pub fn local_invert(&self, x: &[FqElement], side: crate::css::Side) -> Result<Vec<FqElement>> {
        let solver = match side {
            crate::css::Side::X => &self.invert_x,
            crate::css::Side::Z => &self.invert_z,
        };
        let coeffs = solver.solve(x).ok_or(Error::NotInCode)?;
        Ok(coeffs[..self.maps.k()].to_vec())
    }

    /// Per-left-vertex local inversion of a word in E_X: the outer word
    /// u ∈ (F_q^{b_out})^L with x_ℓ = φ_X(u_ℓ) + (inner dual part).
    pub fn outer_shadow(&self, z: &[FqElement]) -> Result<Vec<FqElement>> {
        let mut out = Vec::with_capacity(self.n() * self.outer.b());
        for l in 0..self.n() {
            out.extend(self.local_invert(self.restrict_left(z, l), crate::css::Side::X)?);
        }
        Ok(out)
    }

    /// ψ(z, h): per left block, replace z_ℓ by h_ℓ when they agree modulo
    /// C_Z^⊥. Requires h ∈ E_X; z is arbitrary.
    pub fn partial_minimizer(&self, z: &[FqElement], h: &[FqElement]) -> Result<EdgeWord> {
        if !self.concat.cx().contains(h) {
            return Err(Error::NotInCode);
        }
        let f = self.field();
        let mut out = z.to_vec();
        let n_in = self.inner.n_phys();
        for l in 0..self.n() {
            let zl = self.restrict_left(z, l);
            let hl = self.restrict_left(h, l);
            if self.inner.cz_perp().contains(&sub_vec(f, zl, hl)) {
                out[l * n_in..(l + 1) * n_in].copy_from_slice(hl);
            }
        }
        Ok(out)
    }

    /// Per-pair distance certificate: Δ_R(z,h) ≥ δ_in − λ/Δ_{L,⊥}(z,h) for
    /// z, h ∈ E_X in different cosets of E_Z^⊥.
    pub fn distance_certificate(&self, z: &[FqElement], h: &[FqElement]) -> Result<CertReport> {
        if !self.concat.cx().contains(z) || !self.concat.cx().contains(h) {
            return Err(Error::NotInCode);
        }
        if self.concat.cz_perp().contains(&sub_vec(self.field(), z, h)) {
            return Err(Error::SameCoset);
        }
        let m = self.metrics(z, h);
        let bound = self.delta_in - self.lambda / m.delta_lperp;
        Ok(CertReport {
            delta_r: m.delta_r,
            delta_lperp: m.delta_lperp,
            delta_in: self.delta_in,
            lambda: self.lambda,
            bound,
            ok: m.delta_r >= bound - 1e-12,
        })
    }

    /// Exact δ_R by enumerating (E_X \ E_Z^⊥) ∪ (E_Z \ E_X^⊥) and minimizing
    /// the right-folded weight, checked against δ_in − λ/δ_out.
    pub fn ael_distance(&self, cap: u64) -> Result<DistanceReport> {
        let mut best: Option<(usize, EdgeWord)> = None;
        for (space, dual) in [
            (self.concat.cx(), self.concat.cz_perp()),
            (self.concat.cz(), self.concat.cx_perp()),
        ] {
            for v in space.enumerate(cap)? {
                if dual.contains(&v) {
                    continue;
                }
                let w = self.right_weight(&v);
                match &best {
                    Some((bw, bv)) if *bw < w || (*bw == w && vec_cmp(bv, &v).is_le()) => {}
                    _ => best = Some((w, v)),
                }
            }
        }
        let (weight, witness) = best.ok_or(Error::ParameterMismatch(
            "AEL code is degenerate (k = 0)".into(),
        ))?;
        let delta_r = weight as f64 / self.n() as f64;
        let bound = self.delta_out.map(|d_out| self.delta_in - self.lambda / d_out);
        Ok(DistanceReport {
            delta_r,
            weight,
            witness_codes: witness.iter().map(|e| e.0).collect(),
            delta_in: self.delta_in,
            delta_out: self.delta_out,
            lambda: self.lambda,
            bound,
            ok: bound.map_or(true, |b| delta_r >= b - 1e-12),
        })
    }

    /// Brute-force right-metric list oracle: canonical representatives of
    /// the cosets of E_Z^⊥ in E_X whose best member has Δ_R(g, ·) < τ.
    pub fn list_oracle_right(
        &self,
        g: &[FqElement],
        tau: f64,
        cap: u64,
    ) -> Result<Vec<EdgeWord>> {
        let dual = self.concat.cz_perp();
        let mut reps = std::collections::BTreeMap::<Vec<u32>, EdgeWord>::new();
        for h in self.concat.cx().enumerate(cap)? {
            let m = self.metrics(g, &h);
            if m.delta_r < tau {
                let rep = dual.coset_reduce(&h);
                let key: Vec<u32> = rep.iter().map(|e| e.0).collect();
                reps.entry(key).or_insert(rep);
            }
        }
        Ok(reps.into_values().collect())
    }

    /// Right-major coordinate permutation: the folded code F materialized as
    /// a CSS code with fold d·b_in, blocks indexed by right vertices.
    pub fn to_right_major(&self, z: &[FqElement]) -> Vec<FqElement> {
        let b = self.b_in();
        let mut out = Vec::with_capacity(z.len());
        for r in 0..self.n() {
            for &e in self.graph.right_edges(r) {
                out.extend_from_slice(&z[e * b..(e + 1) * b]);
            }
        }
        out
    }

    pub fn folded_css(&self) -> Result<CssCode> {
        let field = self.field().clone();
        let ambient = self.concat.n_phys();
        let perm = |s: &Subspace| -> Subspace {
            let rows: Vec<Vec<FqElement>> =
                s.basis().row_iter().map(|r| self.to_right_major(r)).collect();
            Subspace::from_generators(&field, ambient, &rows)
        };
        CssCode::new(perm(self.concat.cx()), perm(self.concat.cz()), self.d() * self.b_in())
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CertReport {
    pub delta_r: f64,
    pub delta_lperp: f64,
    pub delta_in: f64,
    pub lambda: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DistanceReport {
    pub delta_r: f64,
    pub weight: usize,
    pub witness_codes: Vec<u32>,
    pub delta_in: f64,
    pub delta_out: Option<f64>,
    pub lambda: f64,
    pub bound: Option<f64>,
    pub ok: bool,
}
