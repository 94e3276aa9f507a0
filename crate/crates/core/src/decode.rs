//! Outer unique decoding, the randomized list-decoding loop, its
//! derandomized threshold-rounding variant, the SoS distance check, and the
//! oracle-validated experiment harness.
//!
//! The randomized decoder follows the covering/condition/round/unique-decode
//! loop; the derandomized variant replaces each random choice by exhaustive
//! enumeration (all conditioning depths, all support-restricted (U, σ)
//! pairs, and one shared rounding threshold per cumulative-weight
//! breakpoint). Success of the randomized decoder is monotone in the
//! repetition count M: iterations only ever add cosets, so a batch that
//! succeeds at an executed M certifies success at any larger M with the
//! same seed stream.

use crate::ael::{AelCode, EdgeWord};

use crate::error::{Error, Result};

use crate::gf::FqElement;
use crate::pseudo::{covering_optimize, johnson_bound, Pseudocodeword};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// η = ε²·δ_dec / (16·δ_in).
pub fn eta_formula(epsilon: f64, delta_dec: f64, delta_in: f64) -> f64 {
    epsilon * epsilon * delta_dec / (16.0 * delta_in)
}

/// p = δ_dec²·ε⁶ / (2¹²·s^{3d}·δ_in⁴).
pub fn p_formula(s: u64, d: usize, delta_dec: f64, delta_in: f64, epsilon: f64) -> f64 {
    let s3d = (s as f64).powi(3 * d as i32);
    delta_dec * delta_dec * epsilon.powi(6) / (4096.0 * s3d * delta_in.powi(4))
}

/// Smallest M with (1/p)·e^{-pM} ≤ γ, i.e. M = ⌈(ln(1/γ) + ln(1/p))/p⌉.
pub fn repetition_count(p: f64, gamma: f64) -> u64 {
    assert!(p > 0.0 && p < 1.0 && gamma > 0.0 && gamma < 1.0);
    (((1.0 / gamma).ln() + (1.0 / p).ln()) / p).ceil() as u64
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DecodeParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub delta_dec: f64,
    pub delta_in: f64,
    pub lambda: f64,
    /// δ = δ_in − λ/δ_dec, the effective distance entering the Johnson radius.
    pub delta: f64,
    /// Decoding radius τ = J(δ) − ε.
    pub tau: f64,
    /// Covering agreement α = √(1−δ), wired so 1 − α − ε = τ.
    pub alpha: f64,
    pub eta: f64,
    pub p: f64,
    /// M from the corrected bound ⌈(ln(1/γ)+ln(1/p))/p⌉.
    pub m_theory: u64,
    /// The paper's displayed ln(1/γ)/(p·ln p), recorded for reference; its
    /// sign anomaly makes it unusable as a count.
    pub m_paper_formula: f64,
    /// Iterations actually executed, min(m_theory, m_cap); success at m_exec
    /// certifies success at m_theory by monotonicity.
    pub m_exec: u64,
    /// Conditioning depth budget ⌈s^{3d}/η²⌉.
    pub u_max: u64,
    pub seed: u64,
}

/// Derive all decoding parameters for an AEL code. Requires τ > 0 and, when
/// the outer distance is known, δ_dec ≤ δ_out/2.
pub fn derive_params(
    ael: &AelCode,
    epsilon: f64,
    gamma: f64,
    delta_dec: f64,
    seed: u64,
    m_cap: u64,
) -> Result<DecodeParams> {
    if !(epsilon > 0.0 && epsilon < 1.0 && gamma > 0.0 && gamma < 1.0 && delta_dec > 0.0) {
        return Err(Error::ParameterMismatch("ε, γ, δ_dec must be in (0,1)".into()));
    }
    if let Some(d_out) = ael.delta_out() {
        if delta_dec > d_out / 2.0 + 1e-12 {
            return Err(Error::ParameterMismatch(format!(
                "δ_dec = {delta_dec} exceeds unique-decoding radius δ_out/2 = {}",
                d_out / 2.0
            )));
        }
    }
    let delta_in = ael.delta_in();
    let lambda = ael.lambda();
    let delta = delta_in - lambda / delta_dec;
    let tau = johnson_bound(delta) - epsilon;
    if !(tau > 0.0) {
        return Err(Error::ParameterMismatch(format!(
            "decoding radius τ = J({delta:.4}) − {epsilon} = {tau:.4} is not positive"
        )));
    }
    let eta = eta_formula(epsilon, delta_dec, delta_in);
    let p = p_formula(ael.s(), ael.d(), delta_dec, delta_in, epsilon);
    let m_theory = repetition_count(p, gamma);
    let m_paper_formula = (1.0 / gamma).ln() / (p * p.ln());
    let u_max = ((ael.s() as f64).powi(3 * ael.d() as i32) / (eta * eta)).ceil().max(1.0);
    let u_max = if u_max >= u64::MAX as f64 { u64::MAX } else { u_max as u64 };
    Ok(DecodeParams {
        epsilon,
        gamma,
        delta_dec,
        delta_in,
        lambda,
        delta,
        tau,
        alpha: (1.0 - delta).sqrt(),
        eta,
        p,
        m_theory,
        m_paper_formula,
        m_exec: m_theory.min(m_cap),
        u_max,
        seed,
    })
}

/// Exact nearest-coset unique decoder for the outer code: enumerate D_X,
/// minimize the folded distance to y, and return the canonical coset
/// representative modulo D_Z^⊥ when the minimum is within δ_dec.
pub fn outer_unique_decode(
    outer: &crate::css::CssCode,
    y: &[FqElement],
    delta_dec: f64,
    cap: u64,
) -> Result<Option<Vec<FqElement>>> {
    assert_eq!(y.len(), outer.n_phys());
    let mut best: Option<(f64, Vec<FqElement>)> = None;
    for c in outer.cx().enumerate(cap)? {
        let d = crate::css::folded_distance_frac(&c, y, outer.b());
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, c));
        }
    }
    Ok(best.and_then(|(d, c)| {
        (d <= delta_dec + 1e-12).then(|| outer.cz_perp().coset_reduce(&c))
    }))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IterTrace {
    pub iter: u64,
    pub u: u64,
    pub vertices: Vec<usize>,
    /// σ as the conditioned edge set and its element codes.
    pub sigma_edges: Vec<usize>,
    pub sigma_codes: Vec<u32>,
    pub y_codes: Vec<u32>,
    pub outer_coset: Option<Vec<u32>>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DecodeReport {
    pub params: DecodeParams,
    /// Canonical coset representatives (element codes) of E_Z^⊥ in E_X.
    pub list: Vec<Vec<u32>>,
    pub trace: Vec<IterTrace>,
    /// False when a work cap truncated the derandomized enumeration.
    pub exhaustive: bool,
    pub covering_iterations: usize,
    #[serde(skip)]
    pub wall_time: std::time::Duration,
}

impl DecodeReport {
    pub fn list_words(&self, ael: &AelCode) -> Vec<EdgeWord> {
        let f = ael.field();
        self.list
            .iter()
            .map(|codes| codes.iter().map(|&c| f.elem(c)).collect())
            .collect()
    }
}

fn lift_outer_coset(ael: &AelCode, zbar: &[FqElement]) -> Vec<FqElement> {
    // h̄ ∈ D_X lifts along φ̃_X; reducing modulo E_Z^⊥ absorbs both the
    // D_Z^⊥ ambiguity and the F_q^n ⊗ C_Z^⊥ part.
    ael.concat().cz_perp().coset_reduce(&ael.maps().extend_x(zbar))
}

struct ShadowCache {
    map: HashMap<Vec<u32>, Vec<FqElement>>,
}

impl ShadowCache {
    fn new() -> Self {
        ShadowCache { map: HashMap::new() }
    }
    fn shadow<'a>(&'a mut self, ael: &AelCode, w: &EdgeWord) -> Result<&'a Vec<FqElement>> {
        let key: Vec<u32> = w.iter().map(|e| e.0).collect();
        if !self.map.contains_key(&key) {
            let s = ael.outer_shadow(w)?;
            self.map.insert(key.clone(), s);
        }
        Ok(self.map.get(&key).unwrap())
    }
}

/// Algorithm-style randomized list decoding: covering optimization, then
/// m_exec iterations of condition-on-random-right-set, per-vertex rounding,
/// and outer unique decoding, pruning to canonical cosets.
pub fn list_decode_randomized(
    ael: &AelCode,
    g: &[FqElement],
    params: &DecodeParams,
    cap: u64,
) -> Result<DecodeReport> {
    let start = std::time::Instant::now();
    let (pexp, cover_trace) =
        match covering_optimize(ael, g, params.alpha, params.epsilon, cap) {
            Ok(ok) => ok,
            Err(Error::EmptyPromise) => {
                return Ok(DecodeReport {
                    params: params.clone(),
                    list: vec![],
                    trace: vec![],
                    exhaustive: true,
                    covering_iterations: 0,
                    wall_time: start.elapsed(),
                })
            }
            Err(e) => return Err(e),
        };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut found: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut trace = vec![];
    let mut shadows = ShadowCache::new();
    let n = ael.n();
    let b_out = ael.outer().b();
    // Drawing more than 64·n i.i.d. vertices cannot change the conditioning
    // set except with probability < e^{-64}; cap the draw count there.
    let draw_cap = 64 * n as u64;

    for iter in 0..params.m_exec {
        let u = rng.gen_range(1..=params.u_max);
        let mut set = BTreeSet::new();
        for _ in 0..u.min(draw_cap) {
            set.insert(rng.gen_range(0..n));
        }
        let vertices: Vec<usize> = set.into_iter().collect();
        let sigma_word = pexp.sample_word(&mut rng).clone();
        let conditioned = pexp.condition_on_right_set(ael, &vertices, &sigma_word)?;

        let mut y: Vec<FqElement> = Vec::with_capacity(n * b_out);
        for l in 0..n {
            let w = conditioned.sample_word(&mut rng).clone();
            let shadow = shadows.shadow(ael, &w)?;
            y.extend_from_slice(&shadow[l * b_out..(l + 1) * b_out]);
        }
        let outer_coset = outer_unique_decode(ael.outer(), &y, params.delta_dec, cap)?;
        if let Some(zbar) = &outer_coset {
            let rep = lift_outer_coset(ael, zbar);
            debug_assert!(ael.concat().cx().contains(&rep));
            found.insert(rep.iter().map(|e| e.0).collect());
        }
        let b = ael.b_in();
        let sigma_edges: Vec<usize> = {
            let mut es: Vec<usize> = vertices
                .iter()
                .flat_map(|&r| ael.graph().right_edges(r).to_vec())
                .collect();
            es.sort_unstable();
            es.dedup();
            es
        };
        trace.push(IterTrace {
            iter,
            u,
            vertices,
            sigma_codes: sigma_edges
                .iter()
                .flat_map(|&e| sigma_word[e * b..(e + 1) * b].iter().map(|x| x.0))
                .collect(),
            sigma_edges,
            y_codes: y.iter().map(|e| e.0).collect(),
            outer_coset: outer_coset.map(|z| z.iter().map(|e| e.0).collect()),
        });
    }
    Ok(DecodeReport {
        params: params.clone(),
        list: found.into_iter().collect(),
        trace,
        exhaustive: true,
        covering_iterations: cover_trace.iterations,
        wall_time: start.elapsed(),
    })
}

/// Derandomized list decoding: all conditioning depths u ≤ min(u_max, n),
/// all right subsets U of size u, all support-restricted σ, and threshold
/// rounding over the ≤ q^{b_out}·n cumulative-weight breakpoints.
pub fn list_decode_derandomized(
    ael: &AelCode,
    g: &[FqElement],
    params: &DecodeParams,
    cap: u64,
    work_cap: u64,
) -> Result<DecodeReport> {
    let start = std::time::Instant::now();
    let (pexp, cover_trace) =
        match covering_optimize(ael, g, params.alpha, params.epsilon, cap) {
            Ok(ok) => ok,
            Err(Error::EmptyPromise) => {
                return Ok(DecodeReport {
                    params: params.clone(),
                    list: vec![],
                    trace: vec![],
                    exhaustive: true,
                    covering_iterations: 0,
                    wall_time: start.elapsed(),
                })
            }
            Err(e) => return Err(e),
        };
    let n = ael.n();
    let b_out = ael.outer().b();
    let t = (ael.field().q() as u64).pow(b_out as u32);
    let max_u = (params.u_max.min(n as u64)) as usize;
    let mut found: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut trace = vec![];
    let mut shadows = ShadowCache::new();
    let mut work = 0u64;
    let mut exhaustive = true;

    let subset = |pexp: &Pseudocodeword,
                      vertices: &[usize],
                      u: u64,
                      found: &mut BTreeSet<Vec<u32>>,
                      trace: &mut Vec<IterTrace>,
                      shadows: &mut ShadowCache,
                      work: &mut u64|
     -> Result<bool> {
        // Distinct σ patterns on N(U) present in the support.
        let mut sigma_groups: BTreeMap<Vec<u32>, EdgeWord> = BTreeMap::new();
        let b = ael.b_in();
        let edges: Vec<usize> = {
            let mut es: Vec<usize> = vertices
                .iter()
                .flat_map(|&r| ael.graph().right_edges(r).to_vec())
                .collect();
            es.sort_unstable();
            es.dedup();
            es
        };
        for (w, _) in pexp.support() {
            let key: Vec<u32> = edges
                .iter()
                .flat_map(|&e| w[e * b..(e + 1) * b].iter().map(|x| x.0))
                .collect();
            sigma_groups.entry(key).or_insert_with(|| w.clone());
        }
        for (sigma_codes, witness) in sigma_groups {
            let conditioned = pexp.condition_on_right_set(ael, vertices, &witness)?;
            // Per-vertex distributions over F_q^{b_out} in code order.
            let mut dists: Vec<Vec<(u64, f64)>> = vec![vec![]; n];
            for (w, wt) in conditioned.support() {
                let shadow = shadows.shadow(ael, w)?.clone();
                for l in 0..n {
                    let code = shadow[l * b_out..(l + 1) * b_out]
                        .iter()
                        .rev()
                        .fold(0u64, |acc, e| acc * ael.field().q() as u64 + e.0 as u64);
                    match dists[l].iter_mut().find(|(c, _)| *c == code) {
                        Some((_, p)) => *p += wt,
                        None => dists[l].push((code, *wt)),
                    }
                }
            }
            for d in &mut dists {
                d.sort_by_key(|(c, _)| *c);
            }
            // Shared-threshold breakpoints: prefix sums per vertex.
            let mut thetas: Vec<f64> = vec![0.0];
            for d in &dists {
                let mut acc = 0.0;
                for (_, p) in d {
                    acc += p;
                    if acc < 1.0 - 1e-12 {
                        thetas.push(acc);
                    }
                }
            }
            thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
            thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            assert!(
                thetas.len() as u64 <= t * n as u64,
                "threshold count exceeded q^b_out · n"
            );
            for &theta in &thetas {
                if *work >= work_cap {
                    return Ok(false);
                }
                *work += 1;
                let mut y: Vec<FqElement> = Vec::with_capacity(n * b_out);
                for d in &dists {
                    let mut acc = 0.0;
                    let mut chosen = d.last().expect("nonempty distribution").0;
                    for &(code, p) in d {
                        acc += p;
                        if theta < acc {
                            chosen = code;
                            break;
                        }
                    }
                    let f = ael.field();
                    let mut c = chosen;
                    for _ in 0..b_out {
                        y.push(f.elem((c % f.q() as u64) as u32));
                        c /= f.q() as u64;
                    }
                }
                let outer_coset = outer_unique_decode(ael.outer(), &y, params.delta_dec, cap)?;
                if let Some(zbar) = &outer_coset {
                    let rep = lift_outer_coset(ael, zbar);
                    debug_assert!(ael.concat().cx().contains(&rep));
                    let key: Vec<u32> = rep.iter().map(|e| e.0).collect();
                    if found.insert(key) {
                        trace.push(IterTrace {
                            iter: *work,
                            u,
                            vertices: vertices.to_vec(),
                            sigma_edges: edges.clone(),
                            sigma_codes: sigma_codes.clone(),
                            y_codes: y.iter().map(|e| e.0).collect(),
                            outer_coset: outer_coset
                                .as_ref()
                                .map(|z| z.iter().map(|e| e.0).collect()),
                        });
                    }
                }
            }
        }
        Ok(true)
    };

    'outer: for u in 1..=max_u {
        // All subsets of R of size u, in lexicographic order.
        let mut idx: Vec<usize> = (0..u).collect();
        loop {
            if !subset(&pexp, &idx, u as u64, &mut found, &mut trace, &mut shadows, &mut work)? {
                exhaustive = false;
                break 'outer;
            }
            // next combination
            let mut i = u;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if idx[i] != i + n - u {
                    idx[i] += 1;
                    for j in i + 1..u {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    idx.clear();
                    break;
                }
            }
            if idx.is_empty() {
                break;
            }
        }
    }

    Ok(DecodeReport {
        params: params.clone(),
        list: found.into_iter().collect(),
        trace,
        exhaustive,
        covering_iterations: cover_trace.iterations,
        wall_time: start.elapsed(),
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SosDistReport {
    pub delta_r: f64,
    pub delta_lperp: f64,
    pub eta: f64,
    pub lambda: f64,
    pub delta_in: f64,
    pub bound: f64,
    pub ok: bool,
    /// ψ chain facts under Ẽ: coset preservation and right-monotonicity on
    /// every support word.
    pub psi_chain_ok: bool,
}

/// Δ_R(Ẽ,h) ≥ δ_in − (λ+η)/Δ_{L,⊥}(Ẽ,h) for an η-good pseudocodeword, with
/// η = avg_cov, plus the per-word ψ identities used in its proof.
pub fn sos_distance_check(
    ael: &AelCode,
    p: &Pseudocodeword,
    h: &EdgeWord,
) -> Result<SosDistReport> {
    if !ael.concat().cx().contains(h) {
        return Err(Error::NotInCode);
    }
    let delta_lperp = p.delta_lperp(ael, h);
    if delta_lperp <= 0.0 {
        return Err(Error::SameCoset);
    }
    let delta_r = p.delta_r(ael, h);
    let eta = p.avg_cov(ael);
    let bound = ael.delta_in() - (ael.lambda() + eta) / delta_lperp;

    let f = ael.field();
    let mut psi_chain_ok = true;
    let mut psi_lperp = 0.0;
    let mut psi_l = 0.0;
    for (w, wt) in p.support() {
        let psi = ael.partial_minimizer(w, h)?;
        for l in 0..ael.n() {
            let diff = crate::fqlinalg::sub_vec(f, ael.restrict_left(&psi, l), ael.restrict_left(w, l));
            psi_chain_ok &= ael.inner().cz_perp().contains(&diff);
        }
        for r in 0..ael.n() {
            let m = usize::from(ael.restrict_right(&psi, r) != ael.restrict_right(h, r));
            let z = usize::from(ael.restrict_right(w, r) != ael.restrict_right(h, r));
            psi_chain_ok &= m <= z;
        }
        let m = ael.metrics(&psi, h);
        psi_lperp += wt * m.delta_lperp;
        psi_l += wt * m.delta_l;
    }
    // Δ_{L,⊥}(Ẽ,h) = Δ_{L,⊥}(ψ(Ẽ),h) and Δ_L(ψ(Ẽ),h) = Δ_{L,⊥}(ψ(Ẽ),h).
    psi_chain_ok &= (psi_lperp - delta_lperp).abs() < 1e-9 && (psi_l - psi_lperp).abs() < 1e-9;

    Ok(SosDistReport {
        delta_r,
        delta_lperp,
        eta,
        lambda: ael.lambda(),
        delta_in: ael.delta_in(),
        bound,
        ok: delta_r >= bound - 1e-9,
        psi_chain_ok,
    })
}

// ---------------------------------------------------------------------------
// Experiment harness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Randomized,
    Derandomized,
    Both,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub epsilon: f64,
    pub gamma: f64,
    /// Defaults to δ_out/2 when absent.
    pub delta_dec: Option<f64>,
    pub seed: u64,
    pub trials: u64,
    /// Planted folded error weight; defaults to the largest weight strictly
    /// inside the decoding radius.
    pub error_weight: Option<usize>,
    pub decoder: DecoderKind,
    /// Cap on executed randomized iterations (theory M is recorded anyway).
    pub m_cap: u64,
    /// Cap on derandomized outer-decoder invocations.
    pub work_cap: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::SpecError("trials must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) || !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::SpecError("epsilon and gamma must be in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub error_weight: usize,
    pub planted_coset: Vec<u32>,
    pub oracle_size: usize,
    pub planted_in_oracle: bool,
    pub randomized_ok: Option<bool>,
    pub derandomized_ok: Option<bool>,
    pub randomized_list_size: Option<usize>,
    pub derandomized_list_size: Option<usize>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub params: DecodeParams,
    pub trials: Vec<TrialOutcome>,
    pub randomized_successes: u64,
    pub derandomized_successes: u64,
    pub all_sound: bool,
}

/// Plant a random codeword, corrupt `weight` right blocks, decode, and
/// compare against the brute-force oracle list at radius τ. Success means
/// the decoder's list contains the oracle list.
pub fn run_experiment(ael: &AelCode, spec: &ExperimentSpec, cap: u64) -> Result<ExperimentReport> {
    spec.validate()?;
    let delta_dec = match spec.delta_dec {
        Some(d) => d,
        None => {
            ael.delta_out().ok_or_else(|| {
                Error::SpecError("delta_dec not given and outer distance unknown".into())
            })? / 2.0
        }
    };
    let params = derive_params(ael, spec.epsilon, spec.gamma, delta_dec, spec.seed, spec.m_cap)?;
    let weight = spec.error_weight.unwrap_or_else(|| {
        let max_inside = ((params.tau * ael.n() as f64).ceil() as usize).saturating_sub(1);
        max_inside.min(ael.n())
    });
    if weight as f64 / ael.n() as f64 >= params.tau {
        return Err(Error::SpecError(format!(
            "error weight {weight} is not inside the decoding radius τ·n = {:.3}",
            params.tau * ael.n() as f64
        )));
    }

    let f = ael.field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut trials = vec![];
    let mut rand_ok_count = 0;
    let mut derand_ok_count = 0;
    let mut all_sound = true;

    for trial in 0..spec.trials {
        // Plant a random codeword of E_X.
        let basis = ael.concat().cx().basis();
        let mut h = ael.zero_word();
        for i in 0..basis.rows() {
            let c = f.elem(rng.gen_range(0..f.q()));
            if !f.is_zero(c) {
                for j in 0..h.len() {
                    h[j] = f.add(h[j], f.mul(c, basis.get(i, j)));
                }
            }
        }
        // Corrupt exactly `weight` right blocks.
        let mut g = h.clone();
        let mut blocks: Vec<usize> = (0..ael.n()).collect();
        for i in 0..weight {
            let j = rng.gen_range(i..blocks.len());
            blocks.swap(i, j);
        }
        let b = ael.b_in();
        for &r in &blocks[..weight] {
            loop {
                for &e in ael.graph().right_edges(r) {
                    for t in 0..b {
                        g[e * b + t] = f.elem(rng.gen_range(0..f.q()));
                    }
                }
                if ael.restrict_right(&g, r) != ael.restrict_right(&h, r) {
                    break;
                }
            }
        }
        debug_assert_eq!(ael.metrics(&g, &h).delta_r, weight as f64 / ael.n() as f64);

        let oracle = ael.list_oracle_right(&g, params.tau, cap)?;
        let planted_rep = ael.concat().cz_perp().coset_reduce(&h);
        let planted_in_oracle = oracle.contains(&planted_rep);
        let oracle_codes: BTreeSet<Vec<u32>> = oracle
            .iter()
            .map(|w| w.iter().map(|e| e.0).collect())
            .collect();

        let trial_seed = rng.gen::<u64>();
        let trial_params = DecodeParams { seed: trial_seed, ..params.clone() };

        let mut check = |report: &DecodeReport| -> (bool, usize) {
            let sound = report.list_words(ael).iter().all(|w| {
                ael.concat().cx().contains(w)
                    && *w == ael.concat().cz_perp().coset_reduce(w)
            });
            all_sound &= sound;
            let set: BTreeSet<Vec<u32>> = report.list.iter().cloned().collect();
            (oracle_codes.is_subset(&set), report.list.len())
        };

        let (mut r_ok, mut d_ok, mut r_size, mut d_size) = (None, None, None, None);
        if matches!(spec.decoder, DecoderKind::Randomized | DecoderKind::Both) {
            let rep = list_decode_randomized(ael, &g, &trial_params, cap)?;
            let (ok, size) = check(&rep);
            rand_ok_count += ok as u64;
            r_ok = Some(ok);
            r_size = Some(size);
        }
        if matches!(spec.decoder, DecoderKind::Derandomized | DecoderKind::Both) {
            let rep = list_decode_derandomized(ael, &g, &trial_params, cap, spec.work_cap)?;
            let (ok, size) = check(&rep);
            derand_ok_count += ok as u64;
            d_ok = Some(ok);
            d_size = Some(size);
        }
        trials.push(TrialOutcome {
            trial,
            error_weight: weight,
            planted_coset: planted_rep.iter().map(|e| e.0).collect(),
            oracle_size: oracle.len(),
            planted_in_oracle,
            randomized_ok: r_ok,
            derandomized_ok: d_ok,
            randomized_list_size: r_size,
            derandomized_list_size: d_size,
        });
    }
    Ok(ExperimentReport {
        spec: spec.clone(),
        params,
        trials,
        randomized_successes: rand_ok_count,
        derandomized_successes: derand_ok_count,
        all_sound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fqlinalg::DEFAULT_ENUM_CAP as CAP;
    use crate::instances::{k44_422, tiny_trivial_inner};

    #[test]
    fn repetition_count_examples() {
        // p = 1/2, γ = 1/4: M = ⌈2(ln4 + ln2)⌉ = ⌈4.16⌉ = 5.
        assert_eq!(repetition_count(0.5, 0.25), 5);
        // Monotone: smaller γ needs more repetitions.
        assert!(repetition_count(0.5, 0.01) > repetition_count(0.5, 0.25));
        // Guarantee: (1/p)e^{-pM} ≤ γ at the returned M.
        for (p, gamma) in [(0.5, 0.25), (0.1, 0.05), (0.01, 0.1)] {
            let m = repetition_count(p, gamma);
            assert!((1.0 / p) * (-p * m as f64).exp() <= gamma + 1e-12);
            // boundary consistency: γ = (1/p)e^{-p·M} exactly at M' ≥ M - 1
            let gb = (1.0 / p) * (-(p * (m as f64))).exp();
            assert!(gb <= gamma);
        }
    }

    #[test]
    fn formula_spot_checks() {
        // η = ε²δ_dec/(16δ_in)
        assert!((eta_formula(0.5, 0.5, 0.5) - 0.25 * 0.5 / 8.0).abs() < 1e-15);
        // p display with constant 4096 = 2^12: s=2, d=2, δ_dec=δ_in=1/2, ε=1/2
        let expect = (0.25) * (1.0 / 64.0) / (4096.0 * 64.0 * (1.0 / 16.0));
        assert!((p_formula(2, 2, 0.5, 0.5, 0.5) - expect).abs() < 1e-18);
        assert!((expect - 1.0 / 4194304.0).abs() < 1e-18);
    }

    #[test]
    fn outer_decoder_contract() {
        let ael = k44_422(51);
        let outer = ael.outer();
        let f = outer.field().clone();
        let delta_dec = ael.delta_out().unwrap() / 2.0;
        // A codeword decodes to its own coset at distance 0.
        for c in outer.cx().enumerate(CAP).unwrap().into_iter().take(4) {
            let rep = outer_unique_decode(outer, &c, delta_dec, CAP).unwrap().unwrap();
            assert_eq!(rep, outer.cz_perp().coset_reduce(&c));
        }
        // Planted error of folded weight ≤ ⌊δ_dec·n⌋ recovers the coset.
        let w_max = (delta_dec * outer.n_blocks() as f64).floor() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        if w_max >= 1 {
            for _ in 0..20 {
                let cws = outer.cx().enumerate(CAP).unwrap();
                let c = &cws[rng.gen_range(0..cws.len())];
                let mut y = c.clone();
                let blk = rng.gen_range(0..outer.n_blocks());
                let b = outer.b();
                loop {
                    for t in 0..b {
                        y[blk * b + t] = f.elem(rng.gen_range(0..f.q()));
                    }
                    if y[blk * b..(blk + 1) * b] != c[blk * b..(blk + 1) * b] {
                        break;
                    }
                }
                let rep = outer_unique_decode(outer, &y, delta_dec, CAP).unwrap();
                assert_eq!(rep, Some(outer.cz_perp().coset_reduce(c)));
            }
        }
        // Far word: no coset within δ_dec. Distance from every codeword
        // must exceed δ_dec for the None contract; construct by taking a
        // maximally corrupted word and verifying the oracle distance first.
        let far: Vec<FqElement> =
            (0..outer.n_phys()).map(|i| f.elem((i % 2) as u32)).collect();
        let best = outer
            .cx()
            .enumerate(CAP)
            .unwrap()
            .iter()
            .map(|c| crate::css::folded_distance_frac(c, &far, outer.b()))
            .fold(f64::INFINITY, f64::min);
        let got = outer_unique_decode(outer, &far, delta_dec, CAP).unwrap();
        assert_eq!(got.is_some(), best <= delta_dec + 1e-12);
    }

    #[test]
    fn randomized_decoder_recovers_codeword_coset() {
        let ael = k44_422(52);
        let params = derive_params(&ael, 0.03, 0.1, ael.delta_out().unwrap() / 2.0, 77, 64)
            .unwrap();
        // g is itself a codeword: its coset must appear.
        let g = ael.concat().cx().basis().row(0).to_vec();
        let rep = list_decode_randomized(&ael, &g, &params, CAP).unwrap();
        let expect = ael.concat().cz_perp().coset_reduce(&g);
        let codes: Vec<u32> = expect.iter().map(|e| e.0).collect();
        assert!(rep.list.contains(&codes));
    }

    #[test]
    fn derandomized_contains_randomized_and_oracle() {
        let ael = k44_422(53);
        let params = derive_params(&ael, 0.03, 0.1, ael.delta_out().unwrap() / 2.0, 99, 48)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = ael.field().clone();
        for _ in 0..3 {
            let g: EdgeWord =
                (0..ael.concat().n_phys()).map(|_| f.elem(rng.gen_range(0..2))).collect();
            let derand = list_decode_derandomized(&ael, &g, &params, CAP, 1 << 22).unwrap();
            assert!(derand.exhaustive);
            let oracle = ael.list_oracle_right(&g, params.tau, CAP).unwrap();
            let derand_set: BTreeSet<Vec<u32>> = derand.list.iter().cloned().collect();
            for h in oracle {
                let codes: Vec<u32> = h.iter().map(|e| e.0).collect();
                assert!(derand_set.contains(&codes), "oracle coset missing");
            }
            for seed in [1u64, 2, 3] {
                let p2 = DecodeParams { seed, ..params.clone() };
                let rand = list_decode_randomized(&ael, &g, &p2, CAP).unwrap();
                let rand_set: BTreeSet<Vec<u32>> = rand.list.iter().cloned().collect();
                assert!(rand_set.is_subset(&derand_set));
            }
        }
    }

    #[test]
    fn point_mass_collapses_thresholds() {
        // With a point-mass pseudocodeword every vertex distribution is a
        // single step, so only θ = 0 survives; the derandomized loop runs
        // one rounding per (U, σ).
        let ael = tiny_trivial_inner();
        let params = derive_params(&ael, 0.05, 0.1, ael.delta_out().unwrap() / 2.0, 1, 16)
            .unwrap();
        let g = ael.zero_word();
        let rep = list_decode_derandomized(&ael, &g, &params, CAP, 1 << 20).unwrap();
        assert!(rep.exhaustive);
        let zero_codes: Vec<u32> = vec![0; ael.concat().n_phys()];
        assert!(rep.list.contains(&zero_codes));
    }

    #[test]
    fn sos_distance_check_cases() {
        let ael = k44_422(54);
        let words = ael.concat().cx().enumerate(CAP).unwrap();
        let dual = ael.concat().cz_perp();
        let h = &words[1];
        // Point mass in a different coset: η = 0, λ = 0 ⇒ Δ_R ≥ δ_in.
        let other = words
            .iter()
            .find(|w| !dual.contains(&crate::fqlinalg::sub_vec(ael.field(), w, h)))
            .unwrap();
        let pm = Pseudocodeword::point_mass(&ael, other.clone()).unwrap();
        let rep = sos_distance_check(&ael, &pm, h).unwrap();
        assert!(rep.ok && rep.psi_chain_ok);
        assert!(rep.delta_r >= ael.delta_in() - 1e-12);
        // Same coset is refused.
        let same = Pseudocodeword::point_mass(&ael, h.clone()).unwrap();
        assert!(matches!(sos_distance_check(&ael, &same, h), Err(Error::SameCoset)));
        // Random two-codeword backends.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let a = &words[rng.gen_range(0..words.len())];
            let b = &words[rng.gen_range(0..words.len())];
            if a == b {
                continue;
            }
            let p = Pseudocodeword::from_support(
                &ael,
                vec![(a.clone(), 0.5), (b.clone(), 0.5)],
            )
            .unwrap();
            match sos_distance_check(&ael, &p, h) {
                Ok(rep) => assert!(rep.ok && rep.psi_chain_ok, "{rep:?}"),
                Err(Error::SameCoset) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let ael = k44_422(55);
        let spec = ExperimentSpec {
            name: "det".into(),
            epsilon: 0.02,
            gamma: 0.1,
            delta_dec: None,
            seed: 123,
            trials: 3,
            error_weight: Some(0),
            decoder: DecoderKind::Both,
            m_cap: 32,
            work_cap: 1 << 20,
        };
        let r1 = run_experiment(&ael, &spec, CAP).unwrap();
        let r2 = run_experiment(&ael, &spec, CAP).unwrap();
        assert!(r1.all_sound);
        // Zero-error trials always succeed.
        assert_eq!(r1.derandomized_successes, 3);
        let j1 = serde_json::to_string(&r1).unwrap();
        let j2 = serde_json::to_string(&r2).unwrap();
        assert_eq!(j1, j2);
    }
}
