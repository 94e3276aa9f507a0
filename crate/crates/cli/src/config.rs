//! Workspace configuration: named fields, codes, graphs, AEL compositions
//! and experiments, resolved into live objects.

use aelq_core::ael::AelCode;
use aelq_core::css::{self, CssCode};
use aelq_core::decode::{DecoderKind, ExperimentSpec};
use aelq_core::duality::field_downgrade;
use aelq_core::fqlinalg::{FqMatrix, Subspace, DEFAULT_ENUM_CAP};
use aelq_core::gf::{Extension, Field};
use aelq_core::graph::BipartiteGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Debug)]
pub enum ConfigError {
    Invalid(String),
    Build(aelq_core::Error),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Invalid(s) => write!(f, "config: {s}"),
            ConfigError::Build(e) => write!(f, "config: {e}"),
        }
    }
}
impl std::error::Error for ConfigError {}

impl From<aelq_core::Error> for ConfigError {
    fn from(e: aelq_core::Error) -> Self {
        ConfigError::Build(e)
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Deserialize)]
pub struct FieldJson {
    pub p: u32,
    pub m: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CodeJson {
    Builtin {
        builtin: String,
    },
    Trivial {
        trivial: TrivialJson,
    },
    Grs {
        grs: GrsJson,
    },
    Random {
        random: RandomJson,
    },
    Downgrade {
        downgrade: DowngradeJson,
    },
    Explicit {
        field: String,
        b: usize,
        cx_basis: Vec<Vec<u32>>,
        cz_basis: Vec<Vec<u32>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
pub struct TrivialJson {
    pub field: String,
    pub n: usize,
    #[serde(default = "one")]
    pub b: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GrsJson {
    pub field: String,
    pub n: usize,
    pub kx: usize,
    pub kz: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RandomJson {
    pub field: String,
    pub n_phys: usize,
    #[serde(default = "one")]
    pub b: usize,
    pub dim_s: usize,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DowngradeJson {
    pub code: String,
    pub base: String,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphJson {
    Complete { n: usize },
    RandomRegular { n: usize, d: usize, seed: u64 },
    Explicit { edges: Vec<(usize, usize)>, n: Option<usize> },
}

#[derive(Debug, Clone, Deserialize)]
pub struct AelJson {
    pub outer: String,
    pub inner: String,
    pub graph: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExperimentJson {
    pub ael: String,
    pub epsilon: f64,
    pub gamma: f64,
    #[serde(default)]
    pub delta_dec: Option<f64>,
    pub seed: u64,
    pub trials: u64,
    #[serde(default)]
    pub error_weight: Option<usize>,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderKind,
    #[serde(default = "default_m_cap")]
    pub m_cap: u64,
    #[serde(default = "default_work_cap")]
    pub work_cap: u64,
}

fn default_decoder() -> DecoderKind {
    DecoderKind::Both
}
fn default_m_cap() -> u64 {
    200
}
fn default_work_cap() -> u64 {
    1 << 22
}

#[derive(Debug, Clone, Deserialize)]
pub struct WorkspaceConfig {
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub cap: Option<u64>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldJson>,
    #[serde(default)]
    pub codes: BTreeMap<String, CodeJson>,
    #[serde(default)]
    pub graphs: BTreeMap<String, GraphJson>,
    #[serde(default)]
    pub ael: BTreeMap<String, AelJson>,
    #[serde(default)]
    pub experiments: BTreeMap<String, ExperimentJson>,
}

/// Resolved workspace: every named object constructed and validated.
pub struct Workspace {
    pub cap: u64,
    pub out_dir: String,
    pub fields: BTreeMap<String, Field>,
    pub codes: BTreeMap<String, CssCode>,
    pub graphs: BTreeMap<String, BipartiteGraph>,
    pub ael: BTreeMap<String, AelCode>,
    pub experiments: BTreeMap<String, (String, ExperimentSpec)>,
}

impl WorkspaceConfig {
    pub fn parse(text: &str) -> Result<WorkspaceConfig> {
        serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Cap precedence: CLI flag, config value, AELQ_CAP env, default.
    pub fn effective_cap(&self, flag: Option<u64>) -> u64 {
        flag.or(self.cap)
            .or_else(|| std::env::var("AELQ_CAP").ok().and_then(|v| v.parse().ok()))
            .unwrap_or(DEFAULT_ENUM_CAP)
    }

    pub fn resolve(&self, cap_flag: Option<u64>) -> Result<Workspace> {
        let cap = self.effective_cap(cap_flag);
        if cap == 0 {
            return Err(ConfigError::Invalid("cap must be positive".into()));
        }
        let mut fields = BTreeMap::new();
        for (name, fj) in &self.fields {
            fields.insert(name.clone(), Field::new(fj.p, fj.m)?);
        }
        let field_of = |fields: &BTreeMap<String, Field>, name: &str| -> Result<Field> {
            fields
                .get(name)
                .cloned()
                .ok_or_else(|| ConfigError::Invalid(format!("unknown field '{name}'")))
        };

        // Codes may reference codes (downgrade); resolve with a visiting set.
        let mut codes: BTreeMap<String, CssCode> = BTreeMap::new();
        fn resolve_code(
            name: &str,
            cfg: &WorkspaceConfig,
            fields: &BTreeMap<String, Field>,
            done: &mut BTreeMap<String, CssCode>,
            visiting: &mut Vec<String>,
        ) -> Result<CssCode> {
            if let Some(c) = done.get(name) {
                return Ok(c.clone());
            }
            if visiting.iter().any(|v| v == name) {
                return Err(ConfigError::Invalid(format!("code cycle through '{name}'")));
            }
            let spec = cfg
                .codes
                .get(name)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown code '{name}'")))?;
            visiting.push(name.to_string());
            let built = match spec {
                CodeJson::Builtin { builtin } => match builtin.as_str() {
                    "steane" => css::steane(),
                    "four-two-two" => css::four_two_two(),
                    other => {
                        return Err(ConfigError::Invalid(format!("unknown builtin '{other}'")))
                    }
                },
                CodeJson::Trivial { trivial } => {
                    let f = fields
                        .get(&trivial.field)
                        .ok_or_else(|| {
                            ConfigError::Invalid(format!("unknown field '{}'", trivial.field))
                        })?;
                    css::trivial(f, trivial.n, trivial.b)?
                }
                CodeJson::Grs { grs } => {
                    let f = fields.get(&grs.field).ok_or_else(|| {
                        ConfigError::Invalid(format!("unknown field '{}'", grs.field))
                    })?;
                    css::grs(f, grs.n, grs.kx, grs.kz)?
                }
                CodeJson::Random { random } => {
                    let f = fields.get(&random.field).ok_or_else(|| {
                        ConfigError::Invalid(format!("unknown field '{}'", random.field))
                    })?;
                    let mut rng = ChaCha8Rng::seed_from_u64(random.seed);
                    css::random_css(f, random.n_phys, random.b, random.dim_s, random.k, &mut rng)?
                }
                CodeJson::Downgrade { downgrade } => {
                    let inner = resolve_code(&downgrade.code, cfg, fields, done, visiting)?;
                    let base = fields.get(&downgrade.base).ok_or_else(|| {
                        ConfigError::Invalid(format!("unknown field '{}'", downgrade.base))
                    })?;
                    let ext = Extension::new(base, inner.field())?;
                    field_downgrade(&inner, &ext)?
                }
                CodeJson::Explicit { field, b, cx_basis, cz_basis } => {
                    let f = fields
                        .get(field)
                        .ok_or_else(|| ConfigError::Invalid(format!("unknown field '{field}'")))?;
                    let cx = Subspace::from_matrix(&FqMatrix::from_codes(f, cx_basis)?);
                    let cz = Subspace::from_matrix(&FqMatrix::from_codes(f, cz_basis)?);
                    CssCode::new(cx, cz, *b)?
                }
            };
            visiting.pop();
            done.insert(name.to_string(), built.clone());
            Ok(built)
        }
        for name in self.codes.keys() {
            let mut visiting = vec![];
            resolve_code(name, self, &fields, &mut codes, &mut visiting)?;
        }
        let _ = field_of;

        let mut graphs = BTreeMap::new();
        for (name, gj) in &self.graphs {
            let g = match gj {
                GraphJson::Complete { n } => BipartiteGraph::complete(*n),
                GraphJson::RandomRegular { n, d, seed } => {
                    BipartiteGraph::random_regular(*n, *d, *seed)?
                }
                GraphJson::Explicit { edges, n } => {
                    let n = n.unwrap_or_else(|| {
                        edges.iter().map(|&(l, r)| l.max(r) + 1).max().unwrap_or(0)
                    });
                    BipartiteGraph::explicit(n, edges)?
                }
            };
            graphs.insert(name.clone(), g);
        }

        let mut ael = BTreeMap::new();
        for (name, aj) in &self.ael {
            let outer = codes
                .get(&aj.outer)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown code '{}'", aj.outer)))?;
            let inner = codes
                .get(&aj.inner)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown code '{}'", aj.inner)))?;
            let graph = graphs
                .get(&aj.graph)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown graph '{}'", aj.graph)))?;
            ael.insert(
                name.clone(),
                AelCode::build(outer.clone(), inner.clone(), graph.clone(), cap)?,
            );
        }

        let mut experiments = BTreeMap::new();
        for (name, ej) in &self.experiments {
            if !ael.contains_key(&ej.ael) {
                return Err(ConfigError::Invalid(format!(
                    "experiment '{name}' references unknown ael '{}'",
                    ej.ael
                )));
            }
            let spec = ExperimentSpec {
                name: name.clone(),
                epsilon: ej.epsilon,
                gamma: ej.gamma,
                delta_dec: ej.delta_dec,
                seed: ej.seed,
                trials: ej.trials,
                error_weight: ej.error_weight,
                decoder: ej.decoder,
                m_cap: ej.m_cap,
                work_cap: ej.work_cap,
            };
            experiments.insert(name.clone(), (ej.ael.clone(), spec));
        }

        Ok(Workspace {
            cap,
            out_dir: self.out_dir.clone().unwrap_or_else(|| "reports".into()),
            fields,
            codes,
            graphs,
            ael,
            experiments,
        })
    }
}
