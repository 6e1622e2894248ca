//! Parallel experiment execution and trace aggregation.

use super::{resolve_algorithm, ExperimentConfig};
use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::search::{run, RunOptions, RunTrace};
use rayon::prelude::*;

/// Runs every (algorithm, seed) cell of the experiment, in parallel over a
/// worker pool of `threads` (rayon default when `None`). Each cell owns a
/// cloned objective and the stream `1 + algorithm index` of its run seed,
/// so results are deterministic regardless of the parallelism. Traces come
/// back ordered by (algorithm index, seed index).
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<RunTrace>> {
    cfg.validate()?;
    let prototype = cfg.build_objective()?;
    let algorithms: Vec<_> = cfg
        .algorithms
        .iter()
        .map(resolve_algorithm)
        .collect::<Result<_>>()?;
    let config_hash = cfg.config_hash();

    let cells: Vec<(usize, usize)> = (0..algorithms.len())
        .flat_map(|a| (0..cfg.seeds.len()).map(move |s| (a, s)))
        .collect();

    let run_cell = |&(ai, si): &(usize, usize)| -> Result<((usize, usize), RunTrace)> {
        let algo = &algorithms[ai];
        let seed = cfg.seeds[si];
        let mut objective = prototype.clone();
        let x0 = cfg.build_init(&objective, seed)?;
        let mut rng = RngState::with_stream(seed, 1 + ai as u64);
        let opts = RunOptions {
            record_grad_norm: cfg.record_grad_norm,
            time: cfg.time,
            config_hash: config_hash.clone(),
        };
        let trace = run(algo, &mut objective, &x0, cfg.max_iters, &mut rng, &opts).map_err(
            |e| Error::Run {
                algorithm: algo.name().to_string(),
                seed,
                message: e.to_string(),
            },
        )?;
        Ok(((ai, si), trace))
    };

    let mut keyed: Vec<((usize, usize), RunTrace)> = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("worker pool: {e}")))?;
            pool.install(|| cells.par_iter().map(run_cell).collect::<Result<_>>())?
        }
        None => cells.par_iter().map(run_cell).collect::<Result<_>>()?,
    };
    keyed.sort_by_key(|(key, _)| *key);
    Ok(keyed.into_iter().map(|(_, trace)| trace).collect())
}

/// One aggregated band: min/median/max of the optimality gap across
/// repetitions at a common index (iteration or time bucket).
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algo: String,
    pub objective: String,
    pub d: usize,
    /// Iteration index, or bucket start in nanoseconds for time summaries.
    pub index: u64,
    pub gap_min: f64,
    pub gap_med: f64,
    pub gap_max: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn shared_key(traces: &[RunTrace]) -> Result<(String, String, usize)> {
    let first = traces
        .first()
        .ok_or_else(|| Error::config("aggregate needs at least one trace"))?;
    let key = (
        first.meta.algorithm.clone(),
        first.meta.objective.clone(),
        first.meta.d,
    );
    for t in traces {
        if (t.meta.algorithm.as_str(), t.meta.objective.as_str(), t.meta.d)
            != (key.0.as_str(), key.1.as_str(), key.2)
        {
            return Err(Error::config(format!(
                "aggregate over mixed keys: ({}, {}, {}) vs ({}, {}, {})",
                key.0, key.1, key.2, t.meta.algorithm, t.meta.objective, t.meta.d
            )));
        }
    }
    Ok(key)
}

/// Per-iteration min/median/max of the optimality gap `f - f_star` across
/// traces sharing (algorithm, objective, d).
pub fn aggregate(traces: &[RunTrace], f_star: f64) -> Result<Vec<SummaryRow>> {
    let (algo, objective, d) = shared_key(traces)?;
    let iters = traces.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    let mut rows = Vec::with_capacity(iters);
    for k in 0..iters {
        let mut gaps: Vec<f64> = traces.iter().map(|t| t.rows[k].f - f_star).collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
        rows.push(SummaryRow {
            algo: algo.clone(),
            objective: objective.clone(),
            d,
            index: k as u64,
            gap_min: gaps[0],
            gap_med: median(&gaps),
            gap_max: *gaps.last().unwrap(),
        });
    }
    Ok(rows)
}

/// Like [`aggregate`] but keyed by wall-clock buckets of `bucket_ns`: each
/// trace contributes its best value reached by the end of the bucket.
pub fn aggregate_by_time(
    traces: &[RunTrace],
    f_star: f64,
    bucket_ns: u64,
) -> Result<Vec<SummaryRow>> {
    if bucket_ns == 0 {
        return Err(Error::config("bucket_ns must be positive"));
    }
    let (algo, objective, d) = shared_key(traces)?;
    let horizon = traces
        .iter()
        .filter_map(|t| t.rows.last().map(|r| r.elapsed_ns))
        .max()
        .unwrap_or(0);
    let buckets = horizon / bucket_ns + 1;
    let mut rows = Vec::new();
    for b in 0..buckets {
        let cutoff = (b + 1) * bucket_ns;
        let mut gaps = Vec::with_capacity(traces.len());
        for t in traces {
            let best = t
                .rows
                .iter()
                .take_while(|r| r.elapsed_ns <= cutoff)
                .map(|r| r.f)
                .fold(f64::INFINITY, f64::min);
            let best = if best.is_finite() { best } else { t.initial_f() };
            gaps.push(best - f_star);
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
        rows.push(SummaryRow {
            algo: algo.clone(),
            objective: objective.clone(),
            d,
            index: b * bucket_ns,
            gap_min: gaps[0],
            gap_med: median(&gaps),
            gap_max: *gaps.last().unwrap(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{TimeSource, TraceMeta, TraceRow};

    fn test_config(algos: &str, seeds: &[u64], iters: usize) -> ExperimentConfig {
        let entries: Vec<String> = algos
            .split(',')
            .map(|name| match name {
                "rs" => r#"{"name":"rs","schedule":{"sigma1":0.4,"sigma2":0.25,"rho":0.9,"t_sigma1":5}}"#
                    .to_string(),
                "stp" => r#"{"name":"stp","baseline":{"eta0":0.25}}"#.to_string(),
                other => panic!("unsupported test algo {other}"),
            })
            .collect();
        let json = format!(
            r#"{{
              "objective": {{"name": "rastrigin", "d": 6, "init": {{"kind": "rastrigin-saddle", "count": 1}}}},
              "algorithms": [{}],
              "seeds": {:?},
              "max_iters": {},
              "time": "disabled"
            }}"#,
            entries.join(","),
            seeds,
            iters
        );
        serde_json::from_str(&json).unwrap()
    }

    #[test]
    fn cardinality_and_order() {
        let cfg = test_config("rs,stp", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10], 3);
        let traces = run_experiment(&cfg, Some(4)).unwrap();
        assert_eq!(traces.len(), 20);
        for (i, t) in traces.iter().enumerate() {
            let expected_algo = if i < 10 { "rs" } else { "stp" };
            assert_eq!(t.meta.algorithm, expected_algo);
            assert_eq!(t.meta.seed, cfg.seeds[i % 10]);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = test_config("rs,stp", &[3, 9], 20);
        let a = run_experiment(&cfg, Some(1)).unwrap();
        let b = run_experiment(&cfg, Some(8)).unwrap();
        assert_eq!(a, b);
    }

    fn fake_trace(algo: &str, seed: u64, fs: &[f64]) -> RunTrace {
        RunTrace {
            meta: TraceMeta {
                algorithm: algo.into(),
                objective: "obj".into(),
                d: 2,
                seed,
                config_hash: String::new(),
            },
            rows: fs
                .iter()
                .enumerate()
                .map(|(k, &f)| TraceRow {
                    iter: k,
                    evals: 1 + k as u64,
                    elapsed_ns: 10 * (k as u64 + 1),
                    f,
                    grad_norm: None,
                })
                .collect(),
            final_x: crate::Vector::zeros(2),
        }
    }

    #[test]
    fn aggregate_single_trace_bands_collapse() {
        let t = fake_trace("rs", 1, &[5.0, 3.0, 2.0]);
        let rows = aggregate(&[t], 1.0).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!(row.gap_min, row.gap_med);
            assert_eq!(row.gap_med, row.gap_max);
        }
        assert_eq!(rows[2].gap_min, 1.0);
    }

    #[test]
    fn aggregate_constant_traces_flat_bands() {
        let ts: Vec<RunTrace> = (0..4).map(|s| fake_trace("rs", s, &[2.0, 2.0, 2.0])).collect();
        let rows = aggregate(&ts, 0.0).unwrap();
        for row in rows {
            assert_eq!((row.gap_min, row.gap_med, row.gap_max), (2.0, 2.0, 2.0));
        }
    }

    #[test]
    fn aggregate_rejects_mixed_keys() {
        let a = fake_trace("rs", 1, &[1.0]);
        let b = fake_trace("stp", 2, &[1.0]);
        assert!(aggregate(&[a, b], 0.0).is_err());
    }

    #[test]
    fn time_buckets_use_best_so_far() {
        let t = fake_trace("rs", 1, &[5.0, 3.0, 4.0]);
        // elapsed 10, 20, 30; bucket 20ns -> buckets [0,20), [20,40).
        let rows = aggregate_by_time(&[t], 0.0, 20).unwrap();
        assert_eq!(rows[0].gap_min, 3.0);
        assert_eq!(rows[1].gap_min, 3.0);
    }

    #[test]
    fn disabled_clock_gives_zero_elapsed() {
        let cfg = test_config("rs", &[5], 4);
        assert_eq!(cfg.time, TimeSource::Disabled);
        let traces = run_experiment(&cfg, Some(1)).unwrap();
        assert!(traces[0].rows.iter().all(|r| r.elapsed_ns == 0));
    }
}
