//! Pseudoexpectations over edge variables with an exact-distribution
//! backend: local distributions, conditioning, pseudo-covariance, η-goodness,
//! the covering optimization, and the PSD / mixing-lemma checks.
//!
//! The exact backend stores a weighted support of genuine codewords of E_X.
//! Any true distribution over codewords is a valid pseudoexpectation of every
//! degree, so the lemmas proved for degree-t pseudocodewords apply verbatim;
//! the interface stays small enough that an SDP-backed operator could be
//! dropped in behind it later.

use crate::ael::{AelCode, EdgeWord};
use crate::error::{Error, Result};
use crate::fqlinalg::vec_cmp;
use crate::gf::FqElement;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Mixed-radix code of a Σ-symbol (one b_in block) in [0, s).
fn symbol_code(ael: &AelCode, block: &[FqElement]) -> u64 {
    let q = ael.field().q() as u64;
    block.iter().rev().fold(0u64, |acc, e| acc * q + e.0 as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    Left(usize),
    Right(usize),
}

/// Restriction code of a word on a vertex neighborhood, in [0, s^d).
pub fn restriction_code(ael: &AelCode, word: &[FqElement], v: Vertex) -> u64 {
    let s = ael.s();
    let b = ael.b_in();
    match v {
        Vertex::Left(l) => {
            let blk = ael.restrict_left(word, l);
            blk.chunks(b).rev().fold(0u64, |acc, c| acc * s + symbol_code(ael, c))
        }
        Vertex::Right(r) => {
            let blk = ael.restrict_right(word, r);
            blk.chunks(b).rev().fold(0u64, |acc, c| acc * s + symbol_code(ael, c))
        }
    }
}

/// A d-local function on Σ^E depending on one vertex neighborhood, stored as
/// a full table over the s^d restriction codes (exact sup-norms for free).
#[derive(Debug, Clone)]
pub struct LocalFn {
    pub vertex: Vertex,
    table: Vec<f64>,
}

impl LocalFn {
    pub fn from_fn(ael: &AelCode, vertex: Vertex, f: impl Fn(u64) -> f64) -> LocalFn {
        let size = (ael.s() as u128).pow(ael.d() as u32);
        assert!(size <= 1 << 22, "local function table too large: s^d = {size}");
        LocalFn { vertex, table: (0..size as u64).map(f).collect() }
    }

    pub fn constant(ael: &AelCode, vertex: Vertex, c: f64) -> LocalFn {
        Self::from_fn(ael, vertex, |_| c)
    }

    /// 1{Z_v ≠ h_v} for a reference word h.
    pub fn indicator_ne(ael: &AelCode, vertex: Vertex, h: &[FqElement]) -> LocalFn {
        let hc = restriction_code(ael, h, vertex);
        Self::from_fn(ael, vertex, |c| if c == hc { 0.0 } else { 1.0 })
    }

    pub fn eval_code(&self, code: u64) -> f64 {
        self.table[code as usize]
    }

    pub fn norm_inf(&self) -> f64 {
        self.table.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Exact-distribution pseudoexpectation: a weighted support of E_X
/// codewords. Reported SoS degree is unbounded.
#[derive(Debug, Clone)]
pub struct Pseudocodeword {
    support: Vec<(EdgeWord, f64)>,
    /// Cached restriction codes: per support word, the n left codes and the
    /// n right codes.
    left_codes: Vec<Vec<u64>>,
    right_codes: Vec<Vec<u64>>,
}

impl Pseudocodeword {
    pub fn from_support(ael: &AelCode, support: Vec<(EdgeWord, f64)>) -> Result<Pseudocodeword> {
        let mut merged: Vec<(EdgeWord, f64)> = vec![];
        for (w, wt) in support {
            if !(wt > 0.0) {
                continue;
            }
            if !ael.concat().cx().contains(&w) {
                return Err(Error::NotInCode);
            }
            match merged.iter_mut().find(|(m, _)| *m == w) {
                Some((_, old)) => *old += wt,
                None => merged.push((w, wt)),
            }
        }
        if merged.is_empty() {
            return Err(Error::ZeroProbabilityEvent);
        }
        let total: f64 = merged.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::ParameterMismatch(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        merged.sort_by(|a, b| vec_cmp(&a.0, &b.0));
        Ok(Self::finish(ael, merged))
    }

    fn finish(ael: &AelCode, support: Vec<(EdgeWord, f64)>) -> Pseudocodeword {
        let left_codes = support
            .iter()
            .map(|(w, _)| (0..ael.n()).map(|l| restriction_code(ael, w, Vertex::Left(l))).collect())
            .collect();
        let right_codes = support
            .iter()
            .map(|(w, _)| {
                (0..ael.n()).map(|r| restriction_code(ael, w, Vertex::Right(r))).collect()
            })
            .collect();
        Pseudocodeword { support, left_codes, right_codes }
    }

    pub fn point_mass(ael: &AelCode, word: EdgeWord) -> Result<Pseudocodeword> {
        Self::from_support(ael, vec![(word, 1.0)])
    }

    pub fn support(&self) -> &[(EdgeWord, f64)] {
        &self.support
    }

    /// The exact backend represents a true distribution, hence a valid
    /// pseudoexpectation of unbounded SoS degree.
    pub fn degree(&self) -> Option<usize> {
        None
    }

    fn codes(&self, v: Vertex) -> impl Iterator<Item = (u64, f64)> + '_ {
        let (tab, idx): (&Vec<Vec<u64>>, usize) = match v {
            Vertex::Left(l) => (&self.left_codes, l),
            Vertex::Right(r) => (&self.right_codes, r),
        };
        self.support.iter().enumerate().map(move |(i, (_, wt))| (tab[i][idx], *wt))
    }

    /// Ẽ[μ(Z)] for a vertex-local function.
    pub fn eval(&self, f: &LocalFn) -> f64 {
        self.codes(f.vertex).map(|(c, wt)| wt * f.eval_code(c)).sum()
    }

    /// Ẽ[μ(Z)·ν(Z)] for two vertex-local functions.
    pub fn eval_pair(&self, f: &LocalFn, g: &LocalFn) -> f64 {
        self.support
            .iter()
            .enumerate()
            .map(|(i, (_, wt))| {
                let cf = match f.vertex {
                    Vertex::Left(l) => self.left_codes[i][l],
                    Vertex::Right(r) => self.right_codes[i][r],
                };
                let cg = match g.vertex {
                    Vertex::Left(l) => self.left_codes[i][l],
                    Vertex::Right(r) => self.right_codes[i][r],
                };
                wt * f.eval_code(cf) * g.eval_code(cg)
            })
            .sum()
    }

    /// Condition on Z_e = σ_e for the given edges. The support is filtered
    /// and renormalized; the event must have positive probability.
    pub fn condition_on_edges(
        &self,
        ael: &AelCode,
        edges: &[usize],
        sigma: &[FqElement],
    ) -> Result<Pseudocodeword> {
        let b = ael.b_in();
        assert_eq!(sigma.len(), edges.len() * b);
        let kept: Vec<(EdgeWord, f64)> = self
            .support
            .iter()
            .filter(|(w, _)| {
                edges
                    .iter()
                    .enumerate()
                    .all(|(i, &e)| w[e * b..(e + 1) * b] == sigma[i * b..(i + 1) * b])
            })
            .cloned()
            .collect();
        let total: f64 = kept.iter().map(|(_, w)| w).sum();
        if kept.is_empty() || total <= 0.0 {
            return Err(Error::ZeroProbabilityEvent);
        }
        let renorm: Vec<(EdgeWord, f64)> =
            kept.into_iter().map(|(w, wt)| (w, wt / total)).collect();
        Ok(Self::finish(ael, renorm))
    }

    /// Condition on the full neighborhoods of a set of right vertices, with
    /// σ read off a reference word.
    pub fn condition_on_right_set(
        &self,
        ael: &AelCode,
        us: &[usize],
        sigma_word: &[FqElement],
    ) -> Result<Pseudocodeword> {
        let b = ael.b_in();
        let mut edges: Vec<usize> = vec![];
        for &r in us {
            edges.extend_from_slice(ael.graph().right_edges(r));
        }
        edges.sort_unstable();
        edges.dedup();
        let sigma: Vec<FqElement> =
            edges.iter().flat_map(|&e| sigma_word[e * b..(e + 1) * b].to_vec()).collect();
        self.condition_on_edges(ael, &edges, &sigma)
    }

    /// Pseudo-covariance Cov(Z_ℓ, Z_r) = Σ_{α,β} |Cov(Z_{ℓ,α}, Z_{r,β})|.
    pub fn pseudo_cov(&self, l: usize, r: usize) -> f64 {
        let mut pl: HashMap<u64, f64> = HashMap::new();
        let mut pr: HashMap<u64, f64> = HashMap::new();
        let mut joint: HashMap<(u64, u64), f64> = HashMap::new();
        for (i, (_, wt)) in self.support.iter().enumerate() {
            let a = self.left_codes[i][l];
            let b = self.right_codes[i][r];
            *pl.entry(a).or_insert(0.0) += wt;
            *pr.entry(b).or_insert(0.0) += wt;
            *joint.entry((a, b)).or_insert(0.0) += wt;
        }
        let mut total = 0.0;
        for (&a, &pa) in &pl {
            for (&b, &pb) in &pr {
                let j = joint.get(&(a, b)).copied().unwrap_or(0.0);
                total += (j - pa * pb).abs();
            }
        }
        total
    }

    /// Average pairwise pseudo-covariance E_{ℓ,r}[Cov(Z_ℓ, Z_r)]; the
    /// quantity that must be ≤ η for an η-good pseudocodeword.
    pub fn avg_cov(&self, ael: &AelCode) -> f64 {
        let n = ael.n();
        let mut sum = 0.0;
        for l in 0..n {
            for r in 0..n {
                sum += self.pseudo_cov(l, r);
            }
        }
        sum / (n * n) as f64
    }

    /// Var(Z_v) = Σ_α p_α(1 - p_α) = 1 - Σ_α p_α².
    pub fn var(&self, v: Vertex) -> f64 {
        let mut probs: HashMap<u64, f64> = HashMap::new();
        for (c, wt) in self.codes(v) {
            *probs.entry(c).or_insert(0.0) += wt;
        }
        1.0 - probs.values().map(|p| p * p).sum::<f64>()
    }

    /// E_ℓ[Var(Z_ℓ)] over left vertices.
    pub fn avg_left_var(&self, ael: &AelCode) -> f64 {
        (0..ael.n()).map(|l| self.var(Vertex::Left(l))).sum::<f64>() / ael.n() as f64
    }

    /// Agreement ⟨Ẽ[χ(Z)], χ(h)⟩ = E_r P(Z_r = h_r) = 1 − Δ_R(Ẽ, h).
    pub fn agreement(&self, ael: &AelCode, h_codes: &[u64]) -> f64 {
        let n = ael.n();
        let mut sum = 0.0;
        for (i, (_, wt)) in self.support.iter().enumerate() {
            for r in 0..n {
                if self.right_codes[i][r] == h_codes[r] {
                    sum += wt;
                }
            }
        }
        sum / n as f64
    }

    /// Δ_R(Ẽ, h) against a concrete word.
    pub fn delta_r(&self, ael: &AelCode, h: &[FqElement]) -> f64 {
        let codes: Vec<u64> =
            (0..ael.n()).map(|r| restriction_code(ael, h, Vertex::Right(r))).collect();
        1.0 - self.agreement(ael, &codes)
    }

    /// Δ_{L,C_Z^⊥}(Ẽ, h) = E_ℓ Ẽ[1{Z_ℓ ∉ h_ℓ + C_Z^⊥}].
    pub fn delta_lperp(&self, ael: &AelCode, h: &[FqElement]) -> f64 {
        let f = ael.field();
        let mut sum = 0.0;
        for (w, wt) in &self.support {
            for l in 0..ael.n() {
                let diff = crate::fqlinalg::sub_vec(
                    f,
                    ael.restrict_left(w, l),
                    ael.restrict_left(h, l),
                );
                if !ael.inner().cz_perp().contains(&diff) {
                    sum += wt;
                }
            }
        }
        sum / ael.n() as f64
    }

    /// Ψ = ‖Ẽ[χ(Z)]‖² under the expectation inner product.
    pub fn psi(&self, ael: &AelCode) -> f64 {
        let n = ael.n();
        let k = self.support.len();
        let mut sum = 0.0;
        for r in 0..n {
            for i in 0..k {
                for j in 0..k {
                    if self.right_codes[i][r] == self.right_codes[j][r] {
                        sum += self.support[i].1 * self.support[j].1;
                    }
                }
            }
        }
        sum / n as f64
    }

    /// Mix with a point mass: (1-θ)·Ẽ + θ·δ_h.
    pub fn mix(&self, ael: &AelCode, h: &EdgeWord, theta: f64) -> Pseudocodeword {
        let mut support: Vec<(EdgeWord, f64)> = self
            .support
            .iter()
            .map(|(w, wt)| (w.clone(), wt * (1.0 - theta)))
            .collect();
        match support.iter_mut().find(|(w, _)| w == h) {
            Some((_, wt)) => *wt += theta,
            None => support.push((h.clone(), theta)),
        }
        support.retain(|(_, wt)| *wt > 0.0);
        support.sort_by(|a, b| vec_cmp(&a.0, &b.0));
        Self::finish(ael, support)
    }

    /// Weighted sample of a support word.
    pub fn sample_word<'a>(&'a self, rng: &mut impl Rng) -> &'a EdgeWord {
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        for (w, wt) in &self.support {
            acc += wt;
            if x < acc {
                return w;
            }
        }
        &self.support.last().expect("nonempty support").0
    }

    /// Serializable dump {support, weights} for experiment replay.
    pub fn dump(&self) -> PseudocodewordDump {
        PseudocodewordDump {
            support: self
                .support
                .iter()
                .map(|(w, _)| w.iter().map(|e| e.0).collect())
                .collect(),
            weights: self.support.iter().map(|(_, wt)| *wt).collect(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PseudocodewordDump {
    pub support: Vec<Vec<u32>>,
    pub weights: Vec<f64>,
}

// ---------------------------------------------------------------------------
// η-goodness and EML checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct EtaGoodReport {
    pub lhs: f64,
    pub rhs: f64,
    pub eta: f64,
    pub ok: bool,
}

/// E_{ℓ,r}Ẽ[X_ℓ Y_r] ≤ E_{ℓ,r}Ẽ[X_ℓ]Ẽ[Y_r] + η·max‖X‖∞·max‖Y‖∞ with
/// η = avg_cov.
pub fn eta_good_product_bound(
    ael: &AelCode,
    p: &Pseudocodeword,
    xs: &[LocalFn],
    ys: &[LocalFn],
) -> EtaGoodReport {
    let n = ael.n();
    assert_eq!(xs.len(), n);
    assert_eq!(ys.len(), n);
    let mut lhs = 0.0;
    let mut base = 0.0;
    for x in xs {
        for y in ys {
            lhs += p.eval_pair(x, y);
            base += p.eval(x) * p.eval(y);
        }
    }
    lhs /= (n * n) as f64;
    base /= (n * n) as f64;
    let eta = p.avg_cov(ael);
    let nx = xs.iter().map(LocalFn::norm_inf).fold(0.0f64, f64::max);
    let ny = ys.iter().map(LocalFn::norm_inf).fold(0.0f64, f64::max);
    let rhs = base + eta * nx * ny;
    EtaGoodReport { lhs, rhs, eta, ok: lhs <= rhs + 1e-9 }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EmlPsdReport {
    pub min_eigenvalue: f64,
    pub psd_ok: bool,
    pub eml_lhs: f64,
    pub eml_bound: f64,
    pub eml_ok: bool,
}

/// Builds the 2n×2n moment matrix of pairwise products and checks it is PSD
/// (up to -1e-8), then checks the mixing-lemma bound
/// |E_{ℓ∼r}Ẽ[X_ℓY_r] − E_{ℓ,r}Ẽ[X_ℓY_r]| ≤ λ·√(E Ẽ[X²])·√(E Ẽ[Y²]).
pub fn eml_psd_check(
    ael: &AelCode,
    p: &Pseudocodeword,
    xs: &[LocalFn],
    ys: &[LocalFn],
) -> EmlPsdReport {
    let n = ael.n();
    assert_eq!(xs.len(), n);
    assert_eq!(ys.len(), n);
    let all: Vec<&LocalFn> = xs.iter().chain(ys.iter()).collect();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        for j in i..2 * n {
            let v = p.eval_pair(all[i], all[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let min_eigenvalue = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);

    let graph = ael.graph();
    let edge_avg: f64 = (0..graph.n_edges())
        .map(|e| p.eval_pair(&xs[graph.left_of(e)], &ys[graph.right_of(e)]))
        .sum::<f64>()
        / graph.n_edges() as f64;
    let mut pair_avg = 0.0;
    for x in xs {
        for y in ys {
            pair_avg += p.eval_pair(x, y);
        }
    }
    pair_avg /= (n * n) as f64;
    let ex2 = xs.iter().map(|x| p.eval_pair(x, x)).sum::<f64>() / n as f64;
    let ey2 = ys.iter().map(|y| p.eval_pair(y, y)).sum::<f64>() / n as f64;
    let eml_lhs = (edge_avg - pair_avg).abs();
    let eml_bound = ael.lambda() * ex2.sqrt() * ey2.sqrt();
    EmlPsdReport {
        min_eigenvalue,
        psd_ok: min_eigenvalue >= -1e-8,
        eml_lhs,
        eml_bound,
        eml_ok: eml_lhs <= eml_bound + 1e-9,
    }
}

// ---------------------------------------------------------------------------
// Correlation rounding
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct RoundStep {
    pub u: u64,
    pub avg_cov: f64,
    pub avg_var: f64,
    /// Variance-decrease inequality vs the previous step, with 1e-9 slack.
    pub decrease_ok: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RoundingReport {
    pub u_star: u64,
    pub budget: u64,
    pub eta: f64,
    pub exact: bool,
    pub seed: Option<u64>,
    pub steps: Vec<RoundStep>,
}

/// Smallest u ≤ ⌈s^{3d}/η²⌉ such that conditioning on u independent random
/// right vertices (σ drawn from the local distribution) brings the expected
/// average covariance down to η. Exact averaging over all conditioning
/// tuples while the atom count stays ≤ 10^6, Monte Carlo (200 samples per
/// depth, recorded seed) beyond.
pub fn correlation_round(
    ael: &AelCode,
    p: &Pseudocodeword,
    eta: f64,
    seed: u64,
) -> Result<RoundingReport> {
    assert!(eta > 0.0);
    let s3d = (ael.s() as f64).powi(3 * ael.d() as i32);
    let budget = (s3d / (eta * eta)).ceil() as u64;
    // Exploration is capped by n: conditioning depth beyond the number of
    // right vertices repeats neighborhoods and cannot help an exact backend.
    let max_u = budget.min(ael.n() as u64 + 1);
    const ATOM_CAP: usize = 1_000_000;
    const MC_SAMPLES: usize = 200;

    let mut steps = vec![RoundStep {
        u: 0,
        avg_cov: p.avg_cov(ael),
        avg_var: p.avg_left_var(ael),
        decrease_ok: true,
    }];
    if steps[0].avg_cov <= eta {
        return Ok(RoundingReport {
            u_star: 0,
            budget,
            eta,
            exact: true,
            seed: None,
            steps,
        });
    }

    // Exact mode: atoms are (probability, conditioned backend).
    let mut atoms: Vec<(f64, Pseudocodeword)> = vec![(1.0, p.clone())];
    let mut exact = true;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ael.n();

    for u in 1..=max_u {
        if exact {
            let next_count: usize =
                atoms.iter().map(|(_, a)| n * a.support().len()).sum();
            if next_count > ATOM_CAP {
                exact = false;
            } else {
                let mut next: Vec<(f64, Pseudocodeword)> = Vec::with_capacity(next_count);
                for (prob, atom) in &atoms {
                    for r in 0..n {
                        // Distinct σ on N(r) with their marginal probabilities.
                        let mut groups: HashMap<u64, f64> = HashMap::new();
                        for (c, wt) in atom.codes(Vertex::Right(r)) {
                            *groups.entry(c).or_insert(0.0) += wt;
                        }
                        for (code, mass) in groups {
                            let sigma_word = atom
                                .support()
                                .iter()
                                .enumerate()
                                .find(|(i, _)| atom.right_codes[*i][r] == code)
                                .map(|(_, (w, _))| w.clone())
                                .expect("observed code has a witness");
                            let cond =
                                atom.condition_on_right_set(ael, &[r], &sigma_word)?;
                            next.push((prob * mass / n as f64, cond));
                        }
                    }
                }
                atoms = next;
            }
        }
        let (avg_cov, avg_var) = if exact {
            let c = atoms.iter().map(|(pr, a)| pr * a.avg_cov(ael)).sum::<f64>();
            let v = atoms.iter().map(|(pr, a)| pr * a.avg_left_var(ael)).sum::<f64>();
            (c, v)
        } else {
            let mut c = 0.0;
            let mut v = 0.0;
            let mut taken = 0usize;
            for _ in 0..MC_SAMPLES {
                let mut cur = p.clone();
                let mut ok = true;
                for _ in 0..u {
                    let r = rng.gen_range(0..n);
                    let w = cur.sample_word(&mut rng).clone();
                    match cur.condition_on_right_set(ael, &[r], &w) {
                        Ok(next) => cur = next,
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    c += cur.avg_cov(ael);
                    v += cur.avg_left_var(ael);
                    taken += 1;
                }
            }
            (c / taken as f64, v / taken as f64)
        };
        let prev = steps.last().unwrap();
        let decrease_ok =
            avg_var <= prev.avg_var - prev.avg_cov * prev.avg_cov / s3d + 1e-9;
        steps.push(RoundStep { u, avg_cov, avg_var, decrease_ok });
        if avg_cov <= eta {
            return Ok(RoundingReport {
                u_star: u,
                budget,
                eta,
                exact,
                seed: (!exact).then_some(seed),
                steps,
            });
        }
    }
    Err(Error::BudgetExceeded)
}

// ---------------------------------------------------------------------------
// Covering optimization
// ---------------------------------------------------------------------------

/// Johnson radius J(δ) = 1 − √(1−δ).
pub fn johnson_bound(delta: f64) -> f64 {
    1.0 - (1.0 - delta).sqrt()
}

/// Optimal mixing weight θ* = (Ψ − A)/(Ψ − 2A + 1) with A = α² + 2αε.
pub fn theta_star(psi: f64, a: f64) -> f64 {
    (psi - a) / (psi - 2.0 * a + 1.0)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MixStep {
    pub psi_before: f64,
    pub violator_agreement: f64,
    pub theta: f64,
    pub predicted_psi: f64,
    pub psi_after: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CoveringTrace {
    pub alpha: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub steps: Vec<MixStep>,
}

/// The Ψ-descent loop: starting from the point mass on the codeword nearest
/// to g, repeatedly mix in (with weight θ*) the most-violated list codeword
/// whose agreement with Ẽχ is still ≤ α² + 2αε, until none remains. The
/// output satisfies Δ_R(Ẽ, h) < 1 − α² − 2αε for every h ∈ E_X with
/// Δ_R(g, h) < 1 − α − ε.
pub fn covering_optimize(
    ael: &AelCode,
    g: &[FqElement],
    alpha: f64,
    epsilon: f64,
    cap: u64,
) -> Result<(Pseudocodeword, CoveringTrace)> {
    const SLACK: f64 = 1e-9;
    let codewords = ael.concat().cx().enumerate(cap)?;
    let codes: Vec<Vec<u64>> = codewords
        .iter()
        .map(|h| (0..ael.n()).map(|r| restriction_code(ael, h, Vertex::Right(r))).collect())
        .collect();
    let g_codes: Vec<u64> =
        (0..ael.n()).map(|r| restriction_code(ael, g, Vertex::Right(r))).collect();
    let agree_g = |hc: &[u64]| -> f64 {
        hc.iter().zip(&g_codes).filter(|(a, b)| a == b).count() as f64 / ael.n() as f64
    };
    // Promise set: codewords with Δ_R(g, h) < 1 - α - ε.
    let in_promise: Vec<usize> = (0..codewords.len())
        .filter(|&i| 1.0 - agree_g(&codes[i]) < 1.0 - alpha - epsilon)
        .collect();
    let Some(&h0) = in_promise.iter().max_by(|&&a, &&b| {
        agree_g(&codes[a]).partial_cmp(&agree_g(&codes[b])).unwrap()
    }) else {
        return Err(Error::EmptyPromise);
    };

    let a_thr = alpha * alpha + 2.0 * alpha * epsilon;
    let max_iters = 10 * codewords.len();
    let mut p = Pseudocodeword::point_mass(ael, codewords[h0].clone())?;
    let mut steps = vec![];
    for it in 0..=max_iters {
        let violator = in_promise
            .iter()
            .map(|&i| (i, p.agreement(ael, &codes[i])))
            .filter(|(_, agr)| *agr <= a_thr + SLACK)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let Some((h_idx, b_val)) = violator else {
            return Ok((
                p,
                CoveringTrace { alpha, epsilon, iterations: it, steps },
            ));
        };
        if it == max_iters {
            break;
        }
        let psi_before = p.psi(ael);
        let theta = theta_star(psi_before, a_thr);
        let predicted_psi = (1.0 - theta) * (1.0 - theta) * psi_before
            + 2.0 * theta * (1.0 - theta) * b_val
            + theta * theta;
        p = p.mix(ael, &codewords[h_idx], theta);
        let psi_after = p.psi(ael);
        steps.push(MixStep {
            psi_before,
            violator_agreement: b_val,
            theta,
            predicted_psi,
            psi_after,
        });
    }
    Err(Error::IterationCapExceeded)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct JohnsonReport {
    pub radius: f64,
    pub list_size: usize,
    pub bound: u64,
    pub size_ok: bool,
    pub covering_checked: bool,
    pub covering_ok: bool,
}

/// Oracle list size at the Johnson radius J(δ) against s^d·n + 1, plus the
/// existential covering property E_{f∼D}[Δ_R(f,h)] < 1 − α² verified with
/// the optimizer's output distribution.
pub fn johnson_list_check(
    ael: &AelCode,
    g: &[FqElement],
    delta: f64,
    cap: u64,
) -> Result<JohnsonReport> {
    let radius = johnson_bound(delta);
    let list = ael.list_oracle_right(g, radius, cap)?;
    let sd = (ael.s() as u128).pow(ael.d() as u32);
    let bound = (sd * ael.n() as u128).min(u64::MAX as u128) as u64 + 1;
    let size_ok = list.len() as u64 <= bound;

    let alpha = (1.0 - delta).sqrt();
    let epsilon = 1e-6;
    let (covering_checked, covering_ok) = match covering_optimize(ael, g, alpha, epsilon, cap) {
        Ok((p, _)) => {
            // Members of the list within the covering promise radius must be
            // covered in expectation.
            let ok = ael
                .concat()
                .cx()
                .enumerate(cap)?
                .iter()
                .filter(|h| ael.metrics(g, h).delta_r < 1.0 - alpha - epsilon)
                .all(|h| p.delta_r(ael, h) < 1.0 - alpha * alpha);
            (true, ok)
        }
        Err(Error::EmptyPromise) => (false, true),
        Err(e) => return Err(e),
    };
    Ok(JohnsonReport { radius, list_size: list.len(), bound, size_ok, covering_checked, covering_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqlinalg::DEFAULT_ENUM_CAP as CAP;
    use crate::instances::{
        k44_422 as k44_422_instance, random64_422 as random64_422_instance, tiny_trivial_inner,
    };

    fn random_codeword(ael: &AelCode, rng: &mut impl Rng) -> EdgeWord {
        let basis = ael.concat().cx().basis();
        let f = ael.field().clone();
        let mut v = vec![f.zero(); ael.concat().n_phys()];
        for i in 0..basis.rows() {
            if rng.gen::<bool>() {
                for j in 0..v.len() {
                    v[j] = f.add(v[j], basis.get(i, j));
                }
            }
        }
        v
    }

    fn two_point(ael: &AelCode, seed: u64, p0: f64) -> Pseudocodeword {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let a = random_codeword(ael, &mut rng);
            let b = random_codeword(ael, &mut rng);
            if a != b {
                return Pseudocodeword::from_support(
                    ael,
                    vec![(a, p0), (b, 1.0 - p0)],
                )
                .unwrap();
            }
        }
    }

    #[test]
    fn eval_basics() {
        let ael = k44_422_instance(21);
        let h = ael.concat().cx().basis().row(0).to_vec();
        let p = Pseudocodeword::point_mass(&ael, h.clone()).unwrap();
        // Ẽ[1] = 1
        let one = LocalFn::constant(&ael, Vertex::Right(0), 1.0);
        assert_eq!(p.eval(&one), 1.0);
        // point mass: Ẽ[1{Z_r ≠ h_r}] = 0
        for r in 0..ael.n() {
            let ind = LocalFn::indicator_ne(&ael, Vertex::Right(r), &h);
            assert_eq!(p.eval(&ind), 0.0);
        }
        assert_eq!(p.degree(), None);
    }

    #[test]
    fn domination_claim() {
        // μ₁ ≤ μ₂ pointwise ⇒ Ẽμ₁ ≤ Ẽμ₂.
        let ael = k44_422_instance(22);
        let p = two_point(&ael, 1, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for l in 0..ael.n() {
            let base: Vec<f64> =
                (0..(ael.s() as usize).pow(ael.d() as u32)).map(|_| rng.gen::<f64>()).collect();
            let mu1 = LocalFn::from_fn(&ael, Vertex::Left(l), |c| base[c as usize]);
            let mu2 = LocalFn::from_fn(&ael, Vertex::Left(l), |c| base[c as usize] + 0.25);
            assert!(p.eval(&mu1) <= p.eval(&mu2) + 1e-12);
        }
    }

    #[test]
    fn conditioning_examples() {
        let ael = k44_422_instance(23);
        let p = two_point(&ael, 3, 0.5);
        let (w0, _) = &p.support()[0];
        // Conditioning on a full assignment collapses to a point mass.
        let all: Vec<usize> = (0..ael.graph().n_edges()).collect();
        let full = p.condition_on_edges(&ael, &all, w0).unwrap();
        assert_eq!(full.support().len(), 1);
        assert!((full.support()[0].1 - 1.0).abs() < 1e-12);
        // Conditioning on an event matching everything changes nothing.
        let none: Vec<usize> = vec![];
        let same = p.condition_on_edges(&ael, &none, &[]).unwrap();
        assert_eq!(same.support().len(), p.support().len());
        // Zero-probability events are rejected.
        let f = ael.field().clone();
        let mut bad = w0.clone();
        bad[0] = f.add(bad[0], f.one());
        let w1 = &p.support()[1].0;
        if bad[0..ael.b_in()] != w1[0..ael.b_in()] {
            assert!(matches!(
                p.condition_on_edges(&ael, &[0], &bad[0..ael.b_in()]),
                Err(Error::ZeroProbabilityEvent)
            ));
        }
    }

    #[test]
    fn law_of_total_expectation() {
        let ael = k44_422_instance(24);
        let p = two_point(&ael, 5, 0.35);
        let mu = LocalFn::indicator_ne(&ael, Vertex::Left(1), &p.support()[0].0);
        // E over σ ~ Z_{N(r)} of the conditioned expectation equals Ẽ[μ].
        let r = 2usize;
        let mut groups: HashMap<u64, f64> = HashMap::new();
        for (c, wt) in p.codes(Vertex::Right(r)) {
            *groups.entry(c).or_insert(0.0) += wt;
        }
        let mut total = 0.0;
        for (code, mass) in groups {
            let w = p
                .support()
                .iter()
                .enumerate()
                .find(|(i, _)| p.right_codes[*i][r] == code)
                .map(|(_, (w, _))| w.clone())
                .unwrap();
            let cond = p.condition_on_right_set(&ael, &[r], &w).unwrap();
            total += mass * cond.eval(&mu);
        }
        assert!((total - p.eval(&mu)).abs() < 1e-12);
    }

    #[test]
    fn covariance_examples() {
        let ael = k44_422_instance(25);
        // Point mass: no variance anywhere.
        let h = ael.concat().cx().basis().row(0).to_vec();
        let pm = Pseudocodeword::point_mass(&ael, h).unwrap();
        assert_eq!(pm.avg_cov(&ael), 0.0);
        assert_eq!(pm.avg_left_var(&ael), 0.0);

        // Two-point support: closed-form 2-outcome covariance. If the two
        // words differ on both N(ℓ) and N(r), Cov(Z_ℓ,Z_r) = 4p(1-p).
        let p = two_point(&ael, 7, 0.25);
        let (w0, _) = &p.support()[0];
        let (w1, _) = &p.support()[1];
        for l in 0..ael.n() {
            for r in 0..ael.n() {
                let dl = ael.restrict_left(w0, l) != ael.restrict_left(w1, l);
                let dr = ael.restrict_right(w0, r) != ael.restrict_right(w1, r);
                let expect = if dl && dr { 4.0 * 0.25 * 0.75 } else { 0.0 };
                assert!((p.pseudo_cov(l, r) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_structure_has_zero_cross_covariance() {
        // Vary two different left blocks independently through inner C_Z^⊥
        // shifts: Z_{ℓ1} and any right vertex not adjacent to ℓ1 must be
        // uncorrelated.
        let ael = random64_422_instance(31);
        let f = ael.field().clone();
        let h = ael.concat().cx().basis().row(0).to_vec();
        let w = ael.inner().cz_perp().basis().row(0).to_vec();
        let n_in = ael.inner().n_phys();
        let shift = |word: &EdgeWord, l: usize| -> EdgeWord {
            let mut out = word.clone();
            for (i, &x) in w.iter().enumerate() {
                out[l * n_in + i] = f.add(out[l * n_in + i], x);
            }
            out
        };
        let (l1, l2) = (0usize, 1usize);
        let support = vec![
            (h.clone(), 0.2 * 0.6),
            (shift(&h, l1), 0.8 * 0.6),
            (shift(&h, l2), 0.2 * 0.4),
            (shift(&shift(&h, l1), l2), 0.8 * 0.4),
        ];
        let p = Pseudocodeword::from_support(&ael, support).unwrap();
        let adj: Vec<usize> = ael
            .graph()
            .left_edges(l1)
            .map(|e| ael.graph().right_of(e))
            .collect();
        for r in 0..ael.n() {
            if !adj.contains(&r) {
                assert!(p.pseudo_cov(l1, r).abs() < 1e-12, "cov(Z_{l1}, Z_{r}) ≠ 0");
            }
        }
    }

    #[test]
    fn variance_is_bounded_by_one() {
        let ael = k44_422_instance(26);
        for seed in 0..5 {
            let p = two_point(&ael, 40 + seed, 0.5);
            for v in 0..ael.n() {
                assert!(p.var(Vertex::Left(v)) <= 1.0 + 1e-12);
                assert!(p.var(Vertex::Right(v)) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn eta_good_bound_cases() {
        let ael = k44_422_instance(27);
        let h = ael.concat().cx().basis().row(0).to_vec();
        let pm = Pseudocodeword::point_mass(&ael, h.clone()).unwrap();
        let xs: Vec<LocalFn> =
            (0..ael.n()).map(|l| LocalFn::indicator_ne(&ael, Vertex::Left(l), &h)).collect();
        let ys: Vec<LocalFn> =
            (0..ael.n()).map(|r| LocalFn::indicator_ne(&ael, Vertex::Right(r), &h)).collect();
        let rep = eta_good_product_bound(&ael, &pm, &xs, &ys);
        assert!((rep.lhs - rep.rhs).abs() < 1e-12, "point mass: equality");

        // Constants: equality again.
        let xs: Vec<LocalFn> =
            (0..ael.n()).map(|l| LocalFn::constant(&ael, Vertex::Left(l), 0.7)).collect();
        let ys: Vec<LocalFn> =
            (0..ael.n()).map(|r| LocalFn::constant(&ael, Vertex::Right(r), -1.3)).collect();
        let p = two_point(&ael, 9, 0.4);
        let rep = eta_good_product_bound(&ael, &p, &xs, &ys);
        assert!((rep.lhs - (0.7 * -1.3)).abs() < 1e-12);
        assert!(rep.ok);

        // Random bounded functions.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let mk = |v: Vertex, rng: &mut ChaCha8Rng| {
                let tab: Vec<f64> = (0..(ael.s() as usize).pow(ael.d() as u32))
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                LocalFn { vertex: v, table: tab }
            };
            let xs: Vec<LocalFn> = (0..ael.n()).map(|l| mk(Vertex::Left(l), &mut rng)).collect();
            let ys: Vec<LocalFn> = (0..ael.n()).map(|r| mk(Vertex::Right(r), &mut rng)).collect();
            let rep = eta_good_product_bound(&ael, &p, &xs, &ys);
            assert!(rep.ok, "η-good product bound failed: {:?}", rep);
        }
    }

    #[test]
    fn eml_psd_cases() {
        // Point mass on a codeword reduces to the scalar EML; constants give
        // zero discrepancy; random two-point backends satisfy both checks.
        let ael = random64_422_instance(33);
        let h = ael.concat().cx().basis().row(1).to_vec();
        let pm = Pseudocodeword::point_mass(&ael, h.clone()).unwrap();
        let xs: Vec<LocalFn> =
            (0..ael.n()).map(|l| LocalFn::indicator_ne(&ael, Vertex::Left(l), &h)).collect();
        let ys: Vec<LocalFn> =
            (0..ael.n()).map(|r| LocalFn::indicator_ne(&ael, Vertex::Right(r), &h)).collect();
        let rep = eml_psd_check(&ael, &pm, &xs, &ys);
        assert!(rep.psd_ok && rep.eml_ok, "{:?}", rep);

        let xs: Vec<LocalFn> =
            (0..ael.n()).map(|l| LocalFn::constant(&ael, Vertex::Left(l), 2.0)).collect();
        let ys: Vec<LocalFn> =
            (0..ael.n()).map(|r| LocalFn::constant(&ael, Vertex::Right(r), 3.0)).collect();
        let p = two_point(&ael, 11, 0.5);
        let rep = eml_psd_check(&ael, &p, &xs, &ys);
        assert!(rep.eml_lhs < 1e-12 && rep.psd_ok);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for seed in 0..10 {
            let p = two_point(&ael, 100 + seed, rng.gen_range(0.1..0.9));
            let mk = |v: Vertex, rng: &mut ChaCha8Rng| {
                let tab: Vec<f64> = (0..(ael.s() as usize).pow(ael.d() as u32))
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                LocalFn { vertex: v, table: tab }
            };
            let xs: Vec<LocalFn> = (0..ael.n()).map(|l| mk(Vertex::Left(l), &mut rng)).collect();
            let ys: Vec<LocalFn> = (0..ael.n()).map(|r| mk(Vertex::Right(r), &mut rng)).collect();
            let rep = eml_psd_check(&ael, &p, &xs, &ys);
            assert!(rep.psd_ok && rep.eml_ok, "{:?}", rep);
        }
    }

    #[test]
    fn correlation_rounding_finds_u_star() {
        let ael = k44_422_instance(28);
        // Point mass: u* = 0.
        let h = ael.concat().cx().basis().row(0).to_vec();
        let pm = Pseudocodeword::point_mass(&ael, h).unwrap();
        let rep = correlation_round(&ael, &pm, 0.1, 1).unwrap();
        assert_eq!(rep.u_star, 0);

        // Correlated two-codeword backend: some u* within budget, with the
        // variance-decrease inequality holding at every step.
        let p = two_point(&ael, 13, 0.5);
        for eta in [0.1, 0.05] {
            let rep = correlation_round(&ael, &p, eta, 2).unwrap();
            assert!(rep.u_star <= rep.budget);
            assert!(rep.exact);
            assert!(rep.steps.iter().all(|s| s.decrease_ok), "{:?}", rep.steps);
            assert!(rep.steps.last().unwrap().avg_cov <= eta);
        }
    }

    #[test]
    fn pexp_axioms_on_random_polynomials() {
        // Axioms of a constrained pseudoexpectation, degree ≤ 4, on the
        // exact backend: Ẽ[1] = 1, Ẽ[p²] ≥ 0, Ẽ[q·(Z_{e,j}² − Z_{e,j})] = 0,
        // Ẽ[q·(Σ_j Z_{e,j} − 1)] = 0, and Ẽ[q·1{Z_ℓ ∉ C_X}] = 0.
        let ael = k44_422_instance(29);
        let p = two_point(&ael, 15, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let s = ael.s();
        let b = ael.b_in();
        let f = ael.field().clone();
        // A monomial is a set of (edge, symbol) indicator factors; evaluate
        // pointwise on each support word.
        let eval_monomial = |word: &EdgeWord, mono: &[(usize, u64)]| -> f64 {
            mono.iter()
                .all(|&(e, sym)| symbol_code(&ael, &word[e * b..(e + 1) * b]) == sym)
                .then_some(1.0)
                .unwrap_or(0.0)
        };
        let pexp = |poly: &[(f64, Vec<(usize, u64)>)]| -> f64 {
            p.support()
                .iter()
                .map(|(w, wt)| {
                    wt * poly.iter().map(|(c, m)| c * eval_monomial(w, m)).sum::<f64>()
                })
                .sum()
        };
        assert_eq!(pexp(&[(1.0, vec![])]), 1.0);
        for _ in 0..50 {
            // random degree ≤ 2 polynomial; square it via pointwise product
            let poly: Vec<(f64, Vec<(usize, u64)>)> = (0..3)
                .map(|_| {
                    let deg = rng.gen_range(0..=2);
                    let mono: Vec<(usize, u64)> = (0..deg)
                        .map(|_| {
                            (rng.gen_range(0..ael.graph().n_edges()), rng.gen_range(0..s))
                        })
                        .collect();
                    (rng.gen_range(-1.0..1.0), mono)
                })
                .collect();
            let sq: f64 = p
                .support()
                .iter()
                .map(|(w, wt)| {
                    let v: f64 = poly.iter().map(|(c, m)| c * eval_monomial(w, m)).sum();
                    wt * v * v
                })
                .sum();
            assert!(sq >= -1e-12);

            // ideal constraints vanish against arbitrary multipliers
            let e = rng.gen_range(0..ael.graph().n_edges());
            let j = rng.gen_range(0..s);
            let q_mono = vec![(rng.gen_range(0..ael.graph().n_edges()), rng.gen_range(0..s))];
            let zsq_minus_z: f64 = p
                .support()
                .iter()
                .map(|(w, wt)| {
                    let z = eval_monomial(w, &[(e, j)]);
                    wt * eval_monomial(w, &q_mono) * (z * z - z)
                })
                .sum();
            assert_eq!(zsq_minus_z, 0.0);
            let sum_minus_one: f64 = p
                .support()
                .iter()
                .map(|(w, wt)| {
                    let sum: f64 = (0..s).map(|jj| eval_monomial(w, &[(e, jj)])).sum();
                    wt * eval_monomial(w, &q_mono) * (sum - 1.0)
                })
                .sum();
            assert_eq!(sum_minus_one, 0.0);
        }
        // block constraints: every support word restricts into C_X
        for (w, _) in p.support() {
            for l in 0..ael.n() {
                assert!(ael.inner().cx().contains(ael.restrict_left(w, l)));
            }
        }
        let _ = f;
    }

    #[test]
    fn theta_star_spot_value() {
        assert!((theta_star(1.0, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn johnson_bound_spot_value() {
        assert!((johnson_bound(0.5) - 0.292893218813452476).abs() < 1e-12);
        assert_eq!(johnson_bound(0.0), 0.0);
    }

    #[test]
    fn covering_on_point_promise() {
        // g itself a codeword: the point mass on g already satisfies the
        // conclusion for its coset and the loop ends quickly.
        let ael = tiny_trivial_inner();
        let g = ael.zero_word();
        let (p, trace) = covering_optimize(&ael, &g, 0.3, 0.05, CAP).unwrap();
        assert!(trace.iterations <= p.support().len() + 1);
        assert!(p.delta_r(&ael, &g) < 1.0 - 0.09 - 2.0 * 0.3 * 0.05);
    }

    #[test]
    fn covering_two_codeword_list() {
        // The tiny instance has two X-cosets at right distance 1; a g built
        // from one block of each lies within radius of both and forces the
        // mixing loop to cover them.
        let ael = tiny_trivial_inner();
        let words = ael.concat().cx().enumerate(CAP).unwrap();
        let far: Vec<&EdgeWord> =
            words.iter().filter(|w| ael.right_weight(w) == ael.n()).collect();
        assert!(!far.is_empty());
        let h1 = ael.zero_word();
        let h2 = far[0].clone();
        let mut g = h1.clone();
        let b = ael.b_in();
        for &e in ael.graph().right_edges(0) {
            g[e * b..(e + 1) * b].copy_from_slice(&h2[e * b..(e + 1) * b]);
        }
        let (alpha, eps) = (0.3, 0.05);
        assert!(ael.metrics(&g, &h1).delta_r < 1.0 - alpha - eps);
        assert!(ael.metrics(&g, &h2).delta_r < 1.0 - alpha - eps);
        let (p, trace) = covering_optimize(&ael, &g, alpha, eps, CAP).unwrap();
        let thr = 1.0 - alpha * alpha - 2.0 * alpha * eps;
        assert!(p.delta_r(&ael, &h1) < thr);
        assert!(p.delta_r(&ael, &h2) < thr);
        // Ψ decreases monotonically and matches the quadratic prediction.
        for s in &trace.steps {
            assert!(s.psi_after < s.psi_before);
            assert!((s.psi_after - s.predicted_psi).abs() < 1e-9);
        }
    }

    #[test]
    fn johnson_check_on_small_instance() {
        let ael = k44_422_instance(30);
        let d = ael.ael_distance(CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = ael.field().clone();
        for _ in 0..10 {
            let g: EdgeWord =
                (0..ael.concat().n_phys()).map(|_| f.elem(rng.gen_range(0..2))).collect();
            let rep = johnson_list_check(&ael, &g, d.delta_r, CAP).unwrap();
            assert!(rep.size_ok && rep.covering_ok, "{:?}", rep);
        }
    }
}
