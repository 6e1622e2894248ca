//! Command-line front end: seeded experiments, dimension sweeps,
//! escape-probability and bound-verification grids, DFPI alignment probes
//! and preset listing. Progress goes to stderr; results go to CSV files.
//!
//! Exit codes: 0 success, 1 configuration/validation error, 2 runtime error.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use curvesearch::analysis::{
    dfpi_alignment_trace, escape_probability_mc, integral_bounds_check, sphere_cap_bounds_check,
};
use curvesearch::dfpi::{DfpiConfig, Estimator};
use curvesearch::harness::{
    self, aggregate, emit_summary_csv, emit_traces_csv, load_config, resolve_threads,
    run_experiment, write_string, ExperimentConfig,
};
use curvesearch::objective::QuadraticSaddleSpec;
use curvesearch::rng::RngState;
use curvesearch::Error;

#[derive(Parser)]
#[command(name = "curvesearch", version, about = "Derivative-free search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SeedArgs {
    /// Use seeds 1..=N.
    #[arg(long, conflicts_with = "seed_list")]
    seeds: Option<u64>,
    /// Explicit comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
}

impl SeedArgs {
    fn resolve(&self, default_n: u64) -> Vec<u64> {
        if let Some(list) = &self.seed_list {
            list.clone()
        } else {
            (1..=self.seeds.unwrap_or(default_n)).collect()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON-configured experiment and write trace + summary CSVs.
    Run {
        #[arg(long)]
        config: String,
        /// Output CSV path (overrides the config's output_path).
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        seed_args: SeedArgs,
    },
    /// Run one preset family over a dimension grid.
    Sweep {
        /// Objective: quartic | rastrigin.
        #[arg(long)]
        objective: String,
        /// Comma-separated dimensions with matching paper presets.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// Comma-separated algorithms (default rs,rspi,stp,bds).
        #[arg(long, value_delimiter = ',', default_value = "rs,rspi,stp,bds")]
        algos: Vec<String>,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long)]
        out: String,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        seed_args: SeedArgs,
    },
    /// Monte-Carlo decrease probability of a curvature step on worst-case
    /// quadratic saddles (per-dimension CSV rows).
    EscapeProb {
        #[arg(long, value_delimiter = ',', default_value = "4,6,8,10,12")]
        dims: Vec<usize>,
        /// Negative eigenvalues to probe.
        #[arg(long, value_delimiter = ',', default_value = "-0.5,-1.0")]
        lambda_min: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        sigma2: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: String,
    },
    /// Verify the sphere-cap and integral brackets on their default grids.
    VerifyBounds {
        /// Which check to run: 7 (integral), 8 (sphere cap) or all.
        #[arg(long, default_value = "all")]
        lemma: String,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output stem; files get `.integral.csv` / `.sphere-cap.csv`.
        #[arg(long)]
        out: String,
    },
    /// DFPI alignment trace on a quadratic saddle.
    DfpiProbe {
        #[arg(long, default_value_t = 50)]
        d: usize,
        /// Most negative eigenvalue (the rest are 1).
        #[arg(long, default_value_t = -0.1)]
        lambda_min: f64,
        #[arg(long, default_value = "fd")]
        estimator: String,
        #[arg(long, default_value_t = 0.45)]
        eta: f64,
        #[arg(long, default_value_t = 20)]
        t_dfpi: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Share the SPSA sign vector between g+ and g-.
        #[arg(long, default_value_t = false)]
        shared_delta: bool,
        #[arg(long)]
        out: String,
        #[command(flatten)]
        seed_args: SeedArgs,
    },
    /// List the built-in hyperparameter presets.
    Presets,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    std::process::exit(match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Error>()
                .map(|err| matches!(err, Error::Config(_) | Error::InvalidDimension(_)))
                .unwrap_or(false)
            {
                1
            } else {
                2
            }
        }
    });
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            seed_args,
        } => {
            let mut cfg = load_config(&config)?;
            if seed_args.seeds.is_some() || seed_args.seed_list.is_some() {
                cfg.seeds = seed_args.resolve(cfg.seeds.len() as u64);
                cfg.validate()?;
            }
            if let Some(path) = out {
                cfg.output_path = Some(path);
            }
            run_and_emit(&cfg, threads)
        }
        Command::Sweep {
            objective,
            dims,
            algos,
            iters,
            out,
            threads,
            seed_args,
        } => {
            let seeds = seed_args.resolve(10);
            for &d in &dims {
                let preset = format!("paper/{objective}-d{d}");
                let algorithms: Vec<serde_json::Value> = algos
                    .iter()
                    .map(|name| {
                        serde_json::json!({ "name": name, "preset": preset })
                    })
                    .collect();
                let init = if objective == "rastrigin" {
                    serde_json::json!({"kind": "rastrigin-saddle", "count": 1})
                } else {
                    serde_json::json!({"kind": "origin"})
                };
                let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
                    "objective": {"name": objective, "d": d, "init": init},
                    "algorithms": algorithms,
                    "seeds": seeds,
                    "max_iters": iters,
                    "output_path": format!("{out}/{objective}-d{d}.csv"),
                }))?;
                cfg.validate()?;
                eprintln!("sweep: {objective} d={d} ({} cells)", algos.len() * seeds.len());
                run_and_emit(&cfg, threads)?;
            }
            Ok(())
        }
        Command::EscapeProb {
            dims,
            lambda_min,
            sigma2,
            trials,
            seed,
            out,
        } => {
            let mut csv = String::from("d,lambda_d,sigma2,prob_lower,prob_est,ci,prob_upper\n");
            let base = RngState::new(seed);
            let mut stream = 0u64;
            for &d in &dims {
                for &lmin in &lambda_min {
                    for &s2 in &sigma2 {
                        stream += 1;
                        let mut lambda = vec![1.0; d];
                        lambda[d - 1] = lmin;
                        let spec = QuadraticSaddleSpec::axis_aligned(lambda);
                        let mut rng = base.stream(stream);
                        let report = escape_probability_mc(&spec, s2, trials, &mut rng)?;
                        let row = &report.rows[0];
                        csv.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            d, lmin, s2, row.lower, row.estimate, row.ci_halfwidth, row.upper
                        ));
                        eprintln!(
                            "escape-prob d={d} lambda_d={lmin} sigma2={s2}: p = {:.3e} ({})",
                            row.estimate,
                            if row.pass { "within bounds" } else { "BOUND VIOLATION" },
                        );
                    }
                }
            }
            write_string(&out, &csv)?;
            Ok(())
        }
        Command::VerifyBounds {
            lemma,
            trials,
            seed,
            out,
        } => {
            let rng = RngState::new(seed);
            if lemma == "8" || lemma == "all" {
                let mut report = curvesearch::analysis::BoundReport::default();
                for (i, d) in [4usize, 8, 16, 32].into_iter().enumerate() {
                    let r = sphere_cap_bounds_check(
                        d,
                        &[0.1, 0.3, 0.5, 0.7],
                        trials,
                        &rng.stream(100 + i as u64),
                    )?;
                    report = report.merge(r);
                }
                let path = format!("{out}.sphere-cap.csv");
                write_string(&path, &report.to_csv())?;
                eprintln!(
                    "sphere-cap: {} rows, all pass = {}",
                    report.rows.len(),
                    report.all_pass()
                );
            }
            if lemma == "7" || lemma == "all" {
                let report = integral_bounds_check(
                    &[1.5, 2.0, 5.0, 10.0, 25.0],
                    &[0.0, 0.25, 0.5, 0.75, 0.9],
                )?;
                let path = format!("{out}.integral.csv");
                write_string(&path, &report.to_csv())?;
                eprintln!(
                    "integral bracket: {} rows, all pass = {}",
                    report.rows.len(),
                    report.all_pass()
                );
            }
            Ok(())
        }
        Command::DfpiProbe {
            d,
            lambda_min,
            estimator,
            eta,
            t_dfpi,
            sigma2,
            shared_delta,
            out,
            seed_args,
        } => {
            let estimator = match estimator.as_str() {
                "fd" => Estimator::Fd,
                "spsa" => Estimator::Spsa,
                other => anyhow::bail!("unknown estimator `{other}` (fd or spsa)"),
            };
            let mut lambda = vec![1.0; d];
            lambda[d - 1] = lambda_min;
            let spec = QuadraticSaddleSpec::axis_aligned(lambda);
            let mut cfg = DfpiConfig::new(eta, t_dfpi, estimator);
            cfg.spsa_shared_delta = shared_delta;
            let mut csv = String::from("seed,t,alignment,f_value\n");
            for seed in seed_args.resolve(5) {
                let mut rng = RngState::new(seed);
                let trace = dfpi_alignment_trace(&spec, &cfg, sigma2, &mut rng)?;
                for p in &trace {
                    csv.push_str(&format!("{seed},{},{},{}\n", p.t, p.alignment, p.f_value));
                }
                eprintln!(
                    "dfpi-probe seed {seed}: final alignment {:.4}",
                    trace.last().map(|p| p.alignment).unwrap_or(0.0)
                );
            }
            write_string(&out, &csv)?;
            Ok(())
        }
        Command::Presets => {
            print!("{}", harness::describe_presets());
            Ok(())
        }
    }
}

fn run_and_emit(cfg: &ExperimentConfig, threads: Option<usize>) -> anyhow::Result<()> {
    let threads = resolve_threads(threads);
    let out = cfg
        .output_path
        .clone()
        .ok_or_else(|| Error::config("output path required (set output_path or --out)"))?;
    let started = std::time::Instant::now();
    let traces = run_experiment(cfg, threads)?;
    eprintln!(
        "ran {} traces in {:.2?}",
        traces.len(),
        started.elapsed()
    );
    emit_traces_csv(&traces, &out).context("writing trace CSV")?;
    eprintln!("wrote {out}");

    // Per-algorithm iteration summary next to the trace file.
    if let Some(f_star) = cfg.build_objective()?.f_star() {
        let mut summary = Vec::new();
        for entry in &cfg.algorithms {
            let group: Vec<_> = traces
                .iter()
                .filter(|t| t.meta.algorithm == entry.name)
                .cloned()
                .collect();
            if !group.is_empty() {
                summary.extend(aggregate(&group, f_star)?);
            }
        }
        let summary_path = format!("{}.summary.csv", out.trim_end_matches(".csv"));
        emit_summary_csv(&summary, &summary_path).context("writing summary CSV")?;
        eprintln!("wrote {summary_path}");
    }
    Ok(())
}
