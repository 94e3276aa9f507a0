//! Small named AEL instances, fully enumerable, used by the test suites and
//! the CLI's invariant checks.

use crate::ael::AelCode;
use crate::css::{self, CssCode};
use crate::duality::field_downgrade;
use crate::error::Result;
use crate::fqlinalg::{Subspace, DEFAULT_ENUM_CAP};
use crate::gf::{Extension, Field};
use crate::graph::BipartiteGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// K_{2,2} with trivial inner [[2,2]] and a repetition-style outer code over
/// F_2^4: the smallest fully enumerable instance (16 edge words).
pub fn tiny_trivial_inner() -> AelCode {
    let f = Field::new(2, 1).unwrap();
    let inner = css::trivial(&f, 2, 1).unwrap();
    let dx = Subspace::from_generators(&f, 4, &[vec![f.one(); 4]]);
    let dz = Subspace::full(&f, 4);
    let outer = CssCode::new(dx, dz, 2).unwrap();
    AelCode::build(outer, inner, BipartiteGraph::complete(2), DEFAULT_ENUM_CAP).unwrap()
}

/// K_{3,3} with trivial inner [[3,3]] and a seeded random outer [[3,k]]_{2,3}.
pub fn k33_trivial_inner(seed: u64) -> Result<AelCode> {
    let f = Field::new(2, 1)?;
    let inner = css::trivial(&f, 3, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = css::random_css(&f, 9, 3, 3, 2, &mut rng)?;
    AelCode::build(outer, inner, BipartiteGraph::complete(3), DEFAULT_ENUM_CAP)
}

/// [[4,2,2]] inner on the complete graph K_{4,4} (λ = 0) with a seeded
/// random outer [[4,k]]_{2,2}.
pub fn k44_422(seed: u64) -> AelCode {
    let f = Field::new(2, 1).unwrap();
    let inner = css::four_two_two();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = css::random_css(&f, 8, 2, 3, 2, &mut rng).unwrap();
    AelCode::build(outer, inner, BipartiteGraph::complete(4), DEFAULT_ENUM_CAP).unwrap()
}

/// [[4,2,2]] inner on a seeded random (6,4) graph (λ > 0).
pub fn random64_422(seed: u64) -> AelCode {
    let f = Field::new(2, 1).unwrap();
    let inner = css::four_two_two();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = css::random_css(&f, 12, 2, 4, 2, &mut rng).unwrap();
    let graph = BipartiteGraph::random_regular(6, 4, seed).unwrap();
    AelCode::build(outer, inner, graph, DEFAULT_ENUM_CAP).unwrap()
}

/// [[4,2,2]] inner on a seeded random (8,4) graph.
pub fn random84_422(seed: u64) -> Result<AelCode> {
    let f = Field::new(2, 1)?;
    let inner = css::four_two_two();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = css::random_css(&f, 16, 2, 3, 2, &mut rng)?;
    let graph = BipartiteGraph::random_regular(8, 4, seed)?;
    AelCode::build(outer, inner, graph, DEFAULT_ENUM_CAP)
}

/// Trivial inner [[3,3]] on a seeded random (8,3) graph with a random outer
/// [[8,k]]_{2,3} code; the instance behind the mixing-lemma checks.
pub fn random83_trivial(seed: u64) -> Result<AelCode> {
    let f = Field::new(2, 1)?;
    let inner = css::trivial(&f, 3, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = css::random_css(&f, 24, 3, 4, 2, &mut rng)?;
    let graph = BipartiteGraph::random_regular(8, 3, seed)?;
    AelCode::build(outer, inner, graph, DEFAULT_ENUM_CAP)
}

/// GRS [[4,2]] over F_4 downgraded to a [[4,2]]_{2,2} inner code, on a
/// K_{4,4} graph with a random outer [[4,k]]_{2,4} code.
pub fn k44_grs_downgraded(seed: u64) -> Result<AelCode> {
    let f2 = Field::new(2, 1)?;
    let f4 = Field::new(2, 2)?;
    let ext = Extension::new(&f2, &f4)?;
    let grs = css::grs(&f4, 4, 3, 3)?;
    let inner = field_downgrade(&grs, &ext)?; // [[4, k_phys=4]]_{2,2}
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = css::random_css(&f2, 16, 4, 2, 2, &mut rng)?;
    AelCode::build(outer, inner, BipartiteGraph::complete(4), DEFAULT_ENUM_CAP)
}

/// Steane inner ([[7,1,3]], b_out = 1) on a seeded random (7,7)… complete
/// graph is the only 7-regular option at n = 7, giving λ = 0.
pub fn k77_steane(seed: u64) -> Result<AelCode> {
    let f = Field::new(2, 1)?;
    let inner = css::steane();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = css::random_css(&f, 7, 1, 2, 1, &mut rng)?;
    AelCode::build(outer, inner, BipartiteGraph::complete(7), DEFAULT_ENUM_CAP)
}

/// Five distinct compositions exercising the dual-space identity, trivial
/// inner included.
pub fn dual_identity_suite() -> Vec<(String, AelCode)> {
    vec![
        ("tiny-trivial-inner".into(), tiny_trivial_inner()),
        ("k33-trivial-inner".into(), k33_trivial_inner(1).unwrap()),
        ("k44-422".into(), k44_422(1)),
        ("random64-422".into(), random64_422(1)),
        ("k44-grs-downgraded".into(), k44_grs_downgraded(1).unwrap()),
        ("k77-steane".into(), k77_steane(1).unwrap()),
    ]
}
