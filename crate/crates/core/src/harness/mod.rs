//! Experiment harness: JSON configuration with named presets, a seeded
//! parallel runner, min/median/max aggregation and CSV persistence.

mod csv;
mod presets;
mod runner;

pub use csv::{
    emit_summary_csv, emit_traces_csv, parse_traces_csv, summary_to_csv_string,
    traces_to_csv_string, write_string,
};
pub use presets::{describe_presets, preset_lookup, preset_names, PresetParts};
pub use runner::{aggregate, aggregate_by_time, run_experiment, SummaryRow};

use crate::dfpi::DfpiConfig;
use crate::error::{Error, Result};
use crate::objective::{self, Objective};
use crate::rng::RngState;
use crate::search::{AlgorithmConfig, BaselineConfig, ScheduleConfig, TimeSource};
use crate::vector::Vector as VectorOf;
use serde::{Deserialize, Serialize};

type Vector = VectorOf<f64>;

/// Stream id used for seed-derived initial points; run streams are
/// `1 + algorithm index`.
pub const INIT_STREAM: u64 = 0;

/// Initial-point selection, resolved per run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitConfig {
    /// The origin (the strict saddle of the quartic benchmark).
    Origin,
    /// Rastrigin stationary point with `count` negative-curvature
    /// coordinates, drawn per seed.
    RastriginSaddle { count: usize },
    /// The built-in strict saddle of the leading-eigenvector problem.
    EigSaddle,
    /// Explicit coordinates.
    Point { coords: Vec<f64> },
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig::Origin
    }
}

/// Objective selection: `name` is one of `quartic`, `rastrigin`,
/// `leading-eig`, `quadratic-saddle`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub name: String,
    #[serde(default)]
    pub d: Option<usize>,
    /// Seed of the random matrix behind `leading-eig`.
    #[serde(default = "default_matrix_seed")]
    pub matrix_seed: u64,
    /// Spectrum of `quadratic-saddle` (descending, last negative).
    #[serde(default)]
    pub eigenvalues: Option<Vec<f64>>,
    /// Optional random rotation of `quadratic-saddle`.
    #[serde(default)]
    pub rotation_seed: Option<u64>,
    #[serde(default)]
    pub init: InitConfig,
}

fn default_matrix_seed() -> u64 {
    1
}

/// One algorithm entry: either a preset reference, explicit components, or
/// a preset with explicit components overriding it wholesale.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgorithmEntry {
    /// `rs`, `rspi`, `stp`, `bds` or `ahds`.
    pub name: String,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub baseline: Option<BaselineConfig>,
    #[serde(default)]
    pub dfpi: Option<DfpiConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub objective: ObjectiveConfig,
    pub algorithms: Vec<AlgorithmEntry>,
    pub seeds: Vec<u64>,
    pub max_iters: usize,
    #[serde(default)]
    pub record_grad_norm: bool,
    #[serde(default)]
    pub time: TimeSource,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl ExperimentConfig {
    /// Full validation; on failure returns every violation, not just the
    /// first.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.seeds.is_empty() {
            errs.push("seeds must be nonempty".to_string());
        }
        {
            let mut sorted = self.seeds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != self.seeds.len() {
                errs.push("seeds must be distinct".to_string());
            }
        }
        if let Err(e) = self.build_objective() {
            errs.push(format!("objective: {e}"));
        }
        if self.algorithms.is_empty() {
            errs.push("algorithms must be nonempty".to_string());
        }
        for (i, entry) in self.algorithms.iter().enumerate() {
            match resolve_algorithm(entry) {
                Ok(algo) => {
                    if let Err(e) = algo.validate() {
                        errs.push(format!("algorithms[{i}]: {e}"));
                    }
                    if algo.name() == "ahds" {
                        if let Ok(obj) = self.build_objective() {
                            if obj.dim() > crate::matrix::DEFAULT_EIGEN_CAP {
                                errs.push(format!(
                                    "algorithms[{i}]: ahds needs d <= {}, objective has d = {}",
                                    crate::matrix::DEFAULT_EIGEN_CAP,
                                    obj.dim()
                                ));
                            }
                        }
                    }
                }
                Err(e) => errs.push(format!("algorithms[{i}]: {e}")),
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Builds the objective prototype (cloned per run cell).
    pub fn build_objective(&self) -> Result<Objective> {
        let need_d = || {
            self.objective.d.ok_or_else(|| {
                Error::config(format!("objective.d is required for `{}`", self.objective.name))
            })
        };
        match self.objective.name.as_str() {
            "quartic" => objective::quartic_saddle(need_d()?),
            "rastrigin" => objective::rastrigin(need_d()?),
            "leading-eig" => Ok(self.build_leading_eig()?.objective),
            "quadratic-saddle" => {
                let eigenvalues = self.objective.eigenvalues.clone().ok_or_else(|| {
                    Error::config("objective.eigenvalues is required for `quadratic-saddle`")
                })?;
                let rotation = self.objective.rotation_seed.map(|seed| {
                    crate::matrix::Rotation::random(
                        &mut RngState::with_stream(seed, INIT_STREAM),
                        eigenvalues.len(),
                    )
                });
                objective::quadratic_saddle(&objective::QuadraticSaddleSpec {
                    eigenvalues,
                    rotation,
                })
            }
            other => Err(Error::config(format!(
                "unknown objective `{other}` (expected quartic, rastrigin, leading-eig or quadratic-saddle)"
            ))),
        }
    }

    fn build_leading_eig(&self) -> Result<objective::LeadingEigProblem> {
        let d = self.objective.d.ok_or_else(|| {
            Error::config("objective.d is required for `leading-eig`")
        })?;
        objective::leading_eig(
            d,
            &mut RngState::with_stream(self.objective.matrix_seed, INIT_STREAM),
        )
    }

    /// Initial point for one run seed.
    pub fn build_init(&self, objective: &Objective, seed: u64) -> Result<Vector> {
        match (&self.objective.init, self.objective.name.as_str()) {
            (InitConfig::Origin, _) => Ok(Vector::zeros(objective.dim())),
            (InitConfig::Point { coords }, _) => {
                let v = Vector::new(coords.clone())?;
                if v.dim() != objective.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: objective.dim(),
                        got: v.dim(),
                    });
                }
                Ok(v)
            }
            (InitConfig::RastriginSaddle { count }, "rastrigin") => {
                objective::rastrigin_saddle_init_random(
                    objective.dim(),
                    *count,
                    &mut RngState::with_stream(seed, INIT_STREAM),
                )
            }
            (InitConfig::RastriginSaddle { .. }, other) => Err(Error::config(format!(
                "init kind `rastrigin-saddle` requires the rastrigin objective, got `{other}`"
            ))),
            (InitConfig::EigSaddle, "leading-eig") => Ok(self.build_leading_eig()?.saddle_init),
            (InitConfig::EigSaddle, other) => Err(Error::config(format!(
                "init kind `eig-saddle` requires the leading-eig objective, got `{other}`"
            ))),
        }
    }

    /// Stable hash of the canonical JSON encoding, carried into trace
    /// metadata.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a64(json.as_bytes()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Resolves an algorithm entry (preset and/or explicit components) into a
/// complete [`AlgorithmConfig`]. Explicit components override the preset's.
pub fn resolve_algorithm(entry: &AlgorithmEntry) -> Result<AlgorithmConfig> {
    let parts = match &entry.preset {
        Some(name) => Some(preset_lookup(name, &entry.name).ok_or_else(|| {
            Error::config(format!(
                "preset `{name}` has no entry for algorithm `{}` (known presets: {})",
                entry.name,
                preset_names().join(", ")
            ))
        })?),
        None => None,
    };
    let schedule = entry
        .schedule
        .or_else(|| parts.as_ref().and_then(|p| p.schedule));
    let baseline = entry
        .baseline
        .or_else(|| parts.as_ref().and_then(|p| p.baseline));
    let dfpi = entry.dfpi.or_else(|| parts.as_ref().and_then(|p| p.dfpi));

    match entry.name.as_str() {
        "rs" => Ok(AlgorithmConfig::Rs {
            schedule: schedule.ok_or_else(|| Error::config("rs requires `schedule`"))?,
        }),
        "rspi" => Ok(AlgorithmConfig::Rspi {
            schedule: schedule.ok_or_else(|| Error::config("rspi requires `schedule`"))?,
            dfpi: dfpi.ok_or_else(|| Error::config("rspi requires `dfpi`"))?,
        }),
        "stp" => Ok(AlgorithmConfig::Stp {
            baseline: baseline.ok_or_else(|| Error::config("stp requires `baseline`"))?,
        }),
        "bds" => Ok(AlgorithmConfig::Bds {
            baseline: baseline.ok_or_else(|| Error::config("bds requires `baseline`"))?,
        }),
        "ahds" => Ok(AlgorithmConfig::Ahds {
            baseline: baseline.ok_or_else(|| Error::config("ahds requires `baseline`"))?,
        }),
        other => Err(Error::config(format!(
            "unknown algorithm `{other}` (expected rs, rspi, stp, bds or ahds)"
        ))),
    }
}

/// Loads and fully validates a JSON experiment config.
pub fn load_config(path: &str) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::config(format!("{path}: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Worker-thread resolution: `CURVESEARCH_THREADS` overrides the CLI value;
/// `None` falls back to the rayon default. This is the only environment
/// variable the toolkit reads.
pub fn resolve_threads(cli: Option<usize>) -> Option<usize> {
    match std::env::var("CURVESEARCH_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n > 0).or(cli),
        Err(_) => cli,
    }
}
