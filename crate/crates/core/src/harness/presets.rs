//! Named hyperparameter presets, `paper/<task>-d<d>`.
//!
//! Radii, decay schedules and baseline step sizes mirror the published
//! benchmark tables for each task and dimension. The tables leave the DFPI
//! perturbation radii and step size unspecified; the presets fill those with
//! this crate's defaults (`c`, `r` relative-auto) and a per-task `eta` of
//! roughly the reciprocal local gradient-Lipschitz constant at the
//! initialization.

use crate::dfpi::{DfpiConfig, Estimator};
use crate::search::{BaselineConfig, Forcing, ScheduleConfig, StpSchedule};
use std::f64::consts::PI;

/// Components contributed by a preset; algorithms pick the ones they need.
#[derive(Clone, Copy, Debug, Default)]
pub struct PresetParts {
    pub schedule: Option<ScheduleConfig>,
    pub baseline: Option<BaselineConfig>,
    pub dfpi: Option<DfpiConfig>,
}

struct TaskPreset {
    name: &'static str,
    sigma1: f64,
    sigma2: f64,
    rho: f64,
    t_sigma1: usize,
    dfpi: DfpiConfig,
    stp: Option<BaselineConfig>,
    direct: BaselineConfig,
}

fn schedule(sigma1: f64, sigma2: f64, rho: f64, t_sigma1: usize) -> ScheduleConfig {
    ScheduleConfig {
        sigma1,
        sigma2,
        rho,
        t_sigma1,
        max_iters: 0,
    }
}

fn direct(eta0: f64, eta_max: f64, expand: f64, shrink: f64) -> BaselineConfig {
    BaselineConfig {
        eta0,
        eta_max,
        expand,
        shrink,
        forcing: Forcing::Zero,
        stp_schedule: StpSchedule::InvSqrt,
    }
}

fn stp_halving(eta0: f64, every: usize) -> BaselineConfig {
    BaselineConfig {
        eta0,
        eta_max: f64::INFINITY,
        expand: 2.0,
        shrink: 0.5,
        forcing: Forcing::Zero,
        stp_schedule: StpSchedule::HalveEvery { every },
    }
}

fn stp_inv_sqrt(eta0: f64) -> BaselineConfig {
    BaselineConfig {
        eta0,
        eta_max: f64::INFINITY,
        expand: 2.0,
        shrink: 0.5,
        forcing: Forcing::Zero,
        stp_schedule: StpSchedule::InvSqrt,
    }
}

fn spsa_shared(eta: f64) -> DfpiConfig {
    DfpiConfig {
        c: None,
        r: None,
        eta,
        t_dfpi: 20,
        estimator: Estimator::Spsa,
        spsa_shared_delta: true,
        record_trace: false,
    }
}

fn fd(eta: f64) -> DfpiConfig {
    DfpiConfig {
        c: None,
        r: None,
        eta,
        t_dfpi: 20,
        estimator: Estimator::Fd,
        spsa_shared_delta: false,
        record_trace: false,
    }
}

fn table() -> Vec<TaskPreset> {
    let rastrigin_eta = 1.0 / (2.0 + 40.0 * PI * PI);
    vec![
        // Quartic benchmark (ambient dimension d + 1).
        TaskPreset {
            name: "paper/quartic-d5",
            sigma1: 1.8,
            sigma2: 0.65,
            rho: 0.6,
            t_sigma1: 10,
            dfpi: spsa_shared(1.0 / 6.0),
            stp: Some(stp_halving(2.5, 10)),
            direct: direct(0.8, 10.0, 1.25, 0.5),
        },
        TaskPreset {
            name: "paper/quartic-d20",
            sigma1: 1.75,
            sigma2: 0.65,
            rho: 0.78,
            t_sigma1: 15,
            dfpi: spsa_shared(1.0 / 21.0),
            stp: Some(stp_halving(2.5, 10)),
            direct: direct(0.8, 10.0, 1.25, 0.5),
        },
        TaskPreset {
            name: "paper/quartic-d100",
            sigma1: 1.0,
            sigma2: 0.65,
            rho: 0.95,
            t_sigma1: 15,
            dfpi: spsa_shared(1.0 / 101.0),
            stp: Some(stp_halving(2.5, 10)),
            direct: direct(5.0, 20.0, 1.25, 0.5),
        },
        TaskPreset {
            name: "paper/quartic-d200",
            sigma1: 1.75,
            sigma2: 0.65,
            rho: 0.96,
            t_sigma1: 15,
            dfpi: spsa_shared(1.0 / 201.0),
            stp: Some(stp_halving(2.5, 10)),
            direct: direct(5.0, 20.0, 1.25, 0.5),
        },
        // Rastrigin.
        TaskPreset {
            name: "paper/rastrigin-d10",
            sigma1: 0.25,
            sigma2: 0.25,
            rho: 0.83,
            t_sigma1: 5,
            dfpi: fd(rastrigin_eta),
            stp: Some(stp_inv_sqrt(0.25)),
            direct: direct(0.25, 10.0, 1.1, 0.9),
        },
        TaskPreset {
            name: "paper/rastrigin-d20",
            sigma1: 0.255,
            sigma2: 0.25,
            rho: 0.83,
            t_sigma1: 5,
            dfpi: fd(rastrigin_eta),
            stp: Some(stp_inv_sqrt(0.25)),
            direct: direct(0.25, 10.0, 1.1, 0.9),
        },
        TaskPreset {
            name: "paper/rastrigin-d100",
            sigma1: 0.15,
            sigma2: 0.25,
            rho: 0.83,
            t_sigma1: 5,
            dfpi: fd(rastrigin_eta),
            stp: Some(stp_inv_sqrt(0.25)),
            direct: direct(0.25, 10.0, 1.1, 0.9),
        },
        TaskPreset {
            name: "paper/rastrigin-d200",
            sigma1: 0.15,
            sigma2: 0.25,
            rho: 0.83,
            t_sigma1: 5,
            dfpi: fd(rastrigin_eta),
            stp: Some(stp_inv_sqrt(0.25)),
            direct: direct(0.25, 10.0, 1.1, 0.9),
        },
        // Leading eigenvector (no STP row in the source table).
        TaskPreset {
            name: "paper/leading-eig-d350",
            sigma1: 9.25,
            sigma2: 4.5,
            rho: 0.97,
            t_sigma1: 25,
            dfpi: spsa_shared(0.03),
            stp: None,
            direct: direct(5.8, 35.0, 1.25, 0.5),
        },
    ]
}

/// Components a preset provides for one algorithm, or `None` when either the
/// preset or its row for that algorithm does not exist.
pub fn preset_lookup(preset: &str, algorithm: &str) -> Option<PresetParts> {
    let task = table().into_iter().find(|t| t.name == preset)?;
    let sched = schedule(task.sigma1, task.sigma2, task.rho, task.t_sigma1);
    match algorithm {
        "rs" => Some(PresetParts {
            schedule: Some(sched),
            ..Default::default()
        }),
        "rspi" => Some(PresetParts {
            schedule: Some(sched),
            dfpi: Some(task.dfpi),
            ..Default::default()
        }),
        "stp" => task.stp.map(|baseline| PresetParts {
            baseline: Some(baseline),
            ..Default::default()
        }),
        "bds" | "ahds" => Some(PresetParts {
            baseline: Some(task.direct),
            ..Default::default()
        }),
        _ => None,
    }
}

pub fn preset_names() -> Vec<&'static str> {
    table().into_iter().map(|t| t.name).collect()
}

/// Human-readable parameter listing for the CLI `presets` subcommand.
pub fn describe_presets() -> String {
    let mut out = String::new();
    for t in table() {
        out.push_str(&format!(
            "{}\n  rs/rspi: sigma1={} sigma2={} rho={} t_sigma1={}\n  dfpi: estimator={:?} t_dfpi={} eta={}{}\n",
            t.name,
            t.sigma1,
            t.sigma2,
            t.rho,
            t.t_sigma1,
            t.dfpi.estimator,
            t.dfpi.t_dfpi,
            t.dfpi.eta,
            if t.dfpi.spsa_shared_delta { " shared-delta" } else { "" },
        ));
        if let Some(stp) = t.stp {
            out.push_str(&format!(
                "  stp: eta0={} schedule={:?}\n",
                stp.eta0, stp.stp_schedule
            ));
        }
        out.push_str(&format!(
            "  bds/ahds: eta0={} eta_max={} expand={} shrink={} forcing=zero\n",
            t.direct.eta0, t.direct.eta_max, t.direct.expand, t.direct.shrink
        ));
    }
    out
}
