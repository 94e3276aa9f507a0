//! Bipartite d-regular graphs with port structure, the second singular
//! value of the biadjacency matrix, and expander-mixing-lemma checks.
//!
//! Edges are identified by (left vertex, left port): edge id e = ℓ·d + port.
//! Each edge records its right endpoint and right port, so codeword symbols
//! indexed by edge id can be gathered per left or right neighborhood.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Second singular values below this are reported as exactly zero.
pub const SIGMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    n: usize,
    d: usize,
    /// right endpoint of each edge, indexed by edge id.
    right_of: Vec<usize>,
    /// edge ids incident to each right vertex, in right-port order.
    right_ports: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    fn from_right_of(n: usize, d: usize, right_of: Vec<usize>) -> Result<BipartiteGraph> {
        let mut right_ports = vec![vec![]; n];
        for (e, &r) in right_of.iter().enumerate() {
            right_ports[r].push(e);
        }
        if right_ports.iter().any(|p| p.len() != d) {
            return Err(Error::ParameterMismatch("graph is not right d-regular".into()));
        }
        Ok(BipartiteGraph { n, d, right_of, right_ports })
    }

    /// Complete bipartite graph K_{n,n}; d = n and λ = 0.
    pub fn complete(n: usize) -> BipartiteGraph {
        let right_of = (0..n).flat_map(|_| 0..n).collect();
        Self::from_right_of(n, n, right_of).expect("K_nn is n-regular")
    }

    /// Union of d uniformly random perfect matchings (configuration model),
    /// resampling any matching that creates a parallel edge. Deterministic
    /// given the seed.
    pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<BipartiteGraph> {
        if n < d {
            return Err(Error::ParameterMismatch(format!("need n ≥ d, got n={n} d={d}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut used = vec![vec![false; n]; n];
        let mut right_of = vec![0usize; n * d];
        let mut retries = 0u32;
        for port in 0..d {
            loop {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                if (0..n).any(|l| used[l][perm[l]]) {
                    retries += 1;
                    if retries > 1000 {
                        return Err(Error::RetriesExceeded(retries));
                    }
                    continue;
                }
                for l in 0..n {
                    used[l][perm[l]] = true;
                    right_of[l * d + port] = perm[l];
                }
                break;
            }
        }
        Self::from_right_of(n, d, right_of)
    }

    /// Explicit edge list (left, right), in left-port order per left vertex.
    pub fn explicit(n: usize, edges: &[(usize, usize)]) -> Result<BipartiteGraph> {
        if edges.len() % n != 0 {
            return Err(Error::ParameterMismatch("edge count must be n·d".into()));
        }
        let d = edges.len() / n;
        let mut per_left = vec![vec![]; n];
        for &(l, r) in edges {
            if l >= n || r >= n {
                return Err(Error::ParameterMismatch("vertex index out of range".into()));
            }
            per_left[l].push(r);
        }
        if per_left.iter().any(|p| p.len() != d) {
            return Err(Error::ParameterMismatch("graph is not left d-regular".into()));
        }
        let right_of = per_left.into_iter().flatten().collect();
        Self::from_right_of(n, d, right_of)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn n_edges(&self) -> usize {
        self.n * self.d
    }
    pub fn left_of(&self, e: usize) -> usize {
        e / self.d
    }
    pub fn right_of(&self, e: usize) -> usize {
        self.right_of[e]
    }
    /// Edge ids of N(ℓ) in left-port order.
    pub fn left_edges(&self, l: usize) -> std::ops::Range<usize> {
        l * self.d..(l + 1) * self.d
    }
    /// Edge ids of N(r) in right-port order.
    pub fn right_edges(&self, r: usize) -> &[usize] {
        &self.right_ports[r]
    }

    pub fn biadjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in 0..self.n_edges() {
            a[(self.left_of(e), self.right_of(e))] += 1.0;
        }
        a
    }

    /// (σ₂, λ = σ₂/d) of the biadjacency matrix, with σ₂ < 1e-9 clamped to
    /// exactly zero so complete graphs report λ = 0.
    pub fn sigma2(&self) -> (f64, f64) {
        if self.n == 1 {
            return (0.0, 0.0);
        }
        let svd = self.biadjacency().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut s2 = sv[1];
        if s2 < SIGMA_TOL {
            s2 = 0.0;
        }
        (s2, s2 / self.d as f64)
    }

    /// Expander mixing lemma residual |E_{(ℓ,r)∼E}[fg] − E_ℓ f · E_r g| and
    /// its bound λ·‖f‖₂‖g‖₂ under expectation norms.
    pub fn eml_check(&self, f: &[f64], g: &[f64]) -> EmlReport {
        assert_eq!(f.len(), self.n);
        assert_eq!(g.len(), self.n);
        let ne = self.n_edges() as f64;
        let edge_avg: f64 = (0..self.n_edges())
            .map(|e| f[self.left_of(e)] * g[self.right_of(e)])
            .sum::<f64>()
            / ne;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let norm = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        let residual = (edge_avg - mean(f) * mean(g)).abs();
        let (_, lambda) = self.sigma2();
        let bound = lambda * norm(f) * norm(g);
        EmlReport { residual, bound, ok: residual <= bound + 1e-9 }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EmlReport {
    pub residual: f64,
    pub bound: f64,
    pub ok: bool,
}
