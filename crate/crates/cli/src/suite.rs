//! The invariant battery behind `aelq check-invariants`: duality identities,
//! ψ properties, mixing-lemma bounds, the distance theorem, covering, and
//! correlation rounding, run over every configured AEL instance.

use aelq_core::ael::{AelCode, EdgeWord};
use aelq_core::fqlinalg::{dot, is_zero_vec, sub_vec, Subspace};
use aelq_core::gf::FqElement;
use aelq_core::pseudo::{correlation_round, covering_optimize, Pseudocodeword};
use aelq_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub instance: String,
    pub check: String,
    pub ok: bool,
    pub detail: String,
}

fn row(instance: &str, check: &str, ok: bool, detail: String) -> CheckRow {
    CheckRow { instance: instance.into(), check: check.into(), ok, detail }
}

fn random_word(ael: &AelCode, rng: &mut impl Rng) -> EdgeWord {
    let f = ael.field().clone();
    (0..ael.concat().n_phys()).map(|_| f.elem(rng.gen_range(0..f.q()))).collect()
}

fn random_codeword(ael: &AelCode, rng: &mut impl Rng) -> EdgeWord {
    let basis = ael.concat().cx().basis();
    let f = ael.field().clone();
    let mut v = vec![f.zero(); ael.concat().n_phys()];
    for i in 0..basis.rows() {
        let c = f.elem(rng.gen_range(0..f.q()));
        if !f.is_zero(c) {
            for j in 0..v.len() {
                v[j] = f.add(v[j], f.mul(c, basis.get(i, j)));
            }
        }
    }
    v
}

/// Run the full battery on one instance. `cap` bounds enumerations; checks
/// that would exceed it report as skipped-ok with a note.
pub fn run_instance(name: &str, ael: &AelCode, cap: u64, seed: u64) -> Vec<CheckRow> {
    let mut rows = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = ael.field().clone();

    // Dual-space identities, rebuilt from public parts.
    {
        let ambient = ael.concat().n_phys();
        let n_in = ael.inner().n_phys();
        let locals = |space: &Subspace| -> Vec<EdgeWord> {
            let mut gens = vec![];
            for l in 0..ael.n() {
                for r in space.basis().row_iter() {
                    let mut v = vec![f.zero(); ambient];
                    v[l * n_in..(l + 1) * n_in].copy_from_slice(r);
                    gens.push(v);
                }
            }
            gens
        };
        let mut gens_xp: Vec<EdgeWord> = ael
            .outer()
            .cx_perp()
            .basis()
            .row_iter()
            .map(|r| ael.maps().extend_z(r))
            .collect();
        gens_xp.extend(locals(ael.inner().cx_perp()));
        let ok_x = &Subspace::from_generators(&f, ambient, &gens_xp) == ael.concat().cx_perp();
        let mut gens_zp: Vec<EdgeWord> = ael
            .outer()
            .cz_perp()
            .basis()
            .row_iter()
            .map(|r| ael.maps().extend_x(r))
            .collect();
        gens_zp.extend(locals(ael.inner().cz_perp()));
        let ok_z = &Subspace::from_generators(&f, ambient, &gens_zp) == ael.concat().cz_perp();
        rows.push(row(name, "dual-space-identity", ok_x && ok_z, "exact RREF equality".into()));
    }

    // Duality-preserving maps, exhaustive when q^b ≤ 2^12.
    {
        let k = ael.maps().k();
        let count = (f.q() as u64).pow(k as u32);
        if count <= 1 << 12 {
            let decode = |mut idx: u64| -> Vec<FqElement> {
                (0..k)
                    .map(|_| {
                        let c = (idx % f.q() as u64) as u32;
                        idx /= f.q() as u64;
                        f.elem(c)
                    })
                    .collect()
            };
            let mut ok = true;
            for xi in 0..count {
                let x = decode(xi);
                let px = ael.maps().apply_x(&x);
                for yi in 0..count {
                    let y = decode(yi);
                    ok &= dot(&f, &px, &ael.maps().apply_z(&y)) == dot(&f, &x, &y);
                }
            }
            rows.push(row(name, "duality-maps", ok, format!("{} pairs exhaustive", count * count)));
        } else {
            rows.push(row(name, "duality-maps", true, "skipped: q^b > 2^12".into()));
        }
    }

    // ψ properties on random pairs.
    {
        let mut ok = true;
        match ael.concat().cx().enumerate(cap) {
            Ok(words) => {
                for _ in 0..200 {
                    let z = random_word(ael, &mut rng);
                    let h = &words[rng.gen_range(0..words.len())];
                    let psi = match ael.partial_minimizer(&z, h) {
                        Ok(p) => p,
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    };
                    for l in 0..ael.n() {
                        let d = sub_vec(&f, ael.restrict_left(&psi, l), ael.restrict_left(&z, l));
                        ok &= ael.inner().cz_perp().contains(&d);
                    }
                    for r in 0..ael.n() {
                        let m = usize::from(ael.restrict_right(&psi, r) != ael.restrict_right(h, r));
                        let zr = usize::from(ael.restrict_right(&z, r) != ael.restrict_right(h, r));
                        ok &= m <= zr;
                    }
                }
                rows.push(row(name, "partial-minimizer", ok, "200 random pairs".into()));
            }
            Err(Error::CapExceeded { .. }) => {
                rows.push(row(name, "partial-minimizer", true, "skipped: E_X above cap".into()))
            }
            Err(e) => rows.push(row(name, "partial-minimizer", false, e.to_string())),
        }
    }

    // Scalar EML on the instance's graph.
    {
        let g = ael.graph();
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let fv: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gv: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rep = g.eml_check(&fv, &gv);
            ok &= rep.ok;
            worst = worst.max(rep.residual - rep.bound);
        }
        rows.push(row(name, "eml-scalar", ok, format!("200 pairs, worst slack {worst:.2e}")));
    }

    // λ consistency between the stored value and a fresh σ₂ computation.
    {
        let (_, lam) = ael.graph().sigma2();
        let ok = (lam - ael.lambda()).abs() <= 1e-9;
        rows.push(row(name, "lambda-sigma2", ok, format!("λ = {lam:.6}")));
    }

    // Distance theorem + per-pair certificates, when enumerable.
    match ael.ael_distance(cap) {
        Ok(d) => {
            rows.push(row(
                name,
                "distance-theorem",
                d.ok,
                format!("δ_R = {:.4}, bound {:?}", d.delta_r, d.bound),
            ));
            let reps = ael
                .concat()
                .cx()
                .coset_enumerate(ael.concat().cz_perp(), cap)
                .unwrap_or_default();
            let mut ok = true;
            let mut pairs = 0;
            for (i, z) in reps.iter().enumerate() {
                for (j, h) in reps.iter().enumerate() {
                    if i != j {
                        ok &= ael.distance_certificate(z, h).map(|c| c.ok).unwrap_or(false);
                        pairs += 1;
                    }
                }
            }
            rows.push(row(name, "distance-certificates", ok, format!("{pairs} coset pairs")));
        }
        Err(Error::CapExceeded { .. }) => {
            rows.push(row(name, "distance-theorem", true, "skipped: above cap".into()))
        }
        Err(e) => rows.push(row(name, "distance-theorem", false, e.to_string())),
    }

    // Covering on a planted two-coset received word.
    {
        match ael.concat().cx().enumerate(cap) {
            Ok(words) => {
                let dual = ael.concat().cz_perp();
                let h1 = words.iter().find(|w| !is_zero_vec(&f, w)).cloned();
                let h2 = h1.as_ref().and_then(|h1| {
                    words.iter().find(|w| !dual.contains(&sub_vec(&f, w, h1))).cloned()
                });
                if let (Some(h1), Some(h2)) = (h1, h2) {
                    let differing: Vec<usize> = (0..ael.n())
                        .filter(|&r| ael.restrict_right(&h1, r) != ael.restrict_right(&h2, r))
                        .collect();
                    let mut g = h1.clone();
                    let b = ael.b_in();
                    for &r in differing.iter().take(differing.len() / 2) {
                        for &e in ael.graph().right_edges(r) {
                            g[e * b..(e + 1) * b].copy_from_slice(&h2[e * b..(e + 1) * b]);
                        }
                    }
                    let worst = ael.metrics(&g, &h1).delta_r.max(ael.metrics(&g, &h2).delta_r);
                    let alpha = (1.0 - worst) * 0.8;
                    let eps = (1.0 - worst) * 0.1;
                    match covering_optimize(ael, &g, alpha, eps, cap) {
                        Ok((p, trace)) => {
                            let thr = 1.0 - alpha * alpha - 2.0 * alpha * eps;
                            let mut ok = true;
                            for h in &words {
                                if ael.metrics(&g, h).delta_r < 1.0 - alpha - eps {
                                    ok &= p.delta_r(ael, h) < thr;
                                }
                            }
                            for s in &trace.steps {
                                ok &= s.psi_after < s.psi_before + 1e-12;
                                ok &= (s.psi_after - s.predicted_psi).abs() <= 1e-9;
                            }
                            rows.push(row(
                                name,
                                "covering",
                                ok,
                                format!("{} mixing steps", trace.steps.len()),
                            ));
                        }
                        Err(e) => rows.push(row(name, "covering", false, e.to_string())),
                    }
                } else {
                    rows.push(row(name, "covering", true, "skipped: single coset".into()));
                }
            }
            Err(Error::CapExceeded { .. }) => {
                rows.push(row(name, "covering", true, "skipped: above cap".into()))
            }
            Err(e) => rows.push(row(name, "covering", false, e.to_string())),
        }
    }

    // Correlation rounding on a two-codeword backend.
    {
        let w1 = random_codeword(ael, &mut rng);
        let w2 = random_codeword(ael, &mut rng);
        if w1 != w2 {
            let p = Pseudocodeword::from_support(ael, vec![(w1, 0.5), (w2, 0.5)]).unwrap();
            match correlation_round(ael, &p, 0.1, seed) {
                Ok(rep) => {
                    let ok = rep.u_star <= rep.budget
                        && rep.steps.iter().all(|s| s.decrease_ok);
                    rows.push(row(
                        name,
                        "correlation-rounding",
                        ok,
                        format!("u* = {} of budget {}", rep.u_star, rep.budget),
                    ));
                }
                Err(e) => rows.push(row(name, "correlation-rounding", false, e.to_string())),
            }
        } else {
            rows.push(row(name, "correlation-rounding", true, "skipped: trivial draw".into()));
        }
    }

    // Johnson bound sweep at the exact distance, when enumerable.
    if let Ok(d) = ael.ael_distance(cap) {
        let radius = aelq_core::pseudo::johnson_bound(d.delta_r);
        let sd = (ael.s() as u128).pow(ael.d() as u32);
        let bound = (sd * ael.n() as u128) as u64 + 1;
        let mut ok = true;
        let mut max_list = 0;
        for _ in 0..20 {
            let g = random_word(ael, &mut rng);
            match ael.list_oracle_right(&g, radius, cap) {
                Ok(list) => {
                    ok &= list.len() as u64 <= bound;
                    max_list = max_list.max(list.len());
                }
                Err(_) => ok = false,
            }
        }
        rows.push(row(
            name,
            "johnson-bound",
            ok,
            format!("max list {max_list} ≤ {bound} over 20 sweeps"),
        ));
    }

    rows
}
