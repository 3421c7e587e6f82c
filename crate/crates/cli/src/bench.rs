use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use submax::baselines::{random_greedy_cardinality, randomized_double_greedy};
use submax::usm::{SolverMode, UsmOptions};
use submax::{card, usm, SetFunction, ValueOracle};

use crate::commands::{instance_id, load, small_opt};
use crate::failure::{CliResult, Failure, PARTIAL};
use crate::report::{open_output, write_reports, RunReport};
use crate::BenchArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Algo {
    Usm,
    UsmGeneric,
    Card,
    DoubleGreedy,
    RandomGreedy,
}

impl Algo {
    fn parse(s: &str) -> Result<Self, Failure> {
        Ok(match s {
            "usm" => Algo::Usm,
            "usm-generic" => Algo::UsmGeneric,
            "card" => Algo::Card,
            "double-greedy" => Algo::DoubleGreedy,
            "random-greedy" => Algo::RandomGreedy,
            other => return Err(Failure::input(format!("unknown algorithm `{other}`"))),
        })
    }

    fn name(self) -> &'static str {
        match self {
            Algo::Usm => "usm",
            Algo::UsmGeneric => "usm-generic",
            Algo::Card => "card",
            Algo::DoubleGreedy => "double-greedy",
            Algo::RandomGreedy => "random-greedy",
        }
    }

    fn uses_k(self) -> bool {
        matches!(self, Algo::Card | Algo::RandomGreedy)
    }

    fn seeded(self) -> bool {
        matches!(self, Algo::DoubleGreedy | Algo::RandomGreedy)
    }
}

/// `a..b`, `a..=b` or a single seed.
fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::input(format!("bad seed range `{s}` (expected a..b, a..=b or a number)"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..=") {
        Ok((num(a)?..=num(b)?).collect())
    } else if let Some((a, b)) = s.split_once("..") {
        Ok((num(a)?..num(b)?).collect())
    } else {
        Ok(vec![num(s)?])
    }
}

struct Job {
    instance: usize,
    algo: Algo,
    k: Option<usize>,
    seed: Option<u64>,
}

type Loaded = Result<Arc<dyn SetFunction>, String>;

fn thread_count() -> Result<Option<usize>, Failure> {
    match std::env::var("SUBMAX_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Failure::input(format!(
                "SUBMAX_THREADS must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run(args: BenchArgs) -> CliResult {
    let algos: Vec<Algo> = args
        .algos
        .iter()
        .map(|a| Algo::parse(a.trim()))
        .collect::<Result<_, _>>()?;
    let seeds = parse_seeds(&args.seeds)?;
    if algos.iter().any(|a| a.uses_k()) && args.k.is_empty() {
        return Err(Failure::input("card and random-greedy need --k"));
    }
    let mut paths: Vec<PathBuf> = glob::glob(&args.instances)
        .map_err(|e| Failure::input(format!("bad instance glob: {e}")))?
        .filter_map(|p| p.ok())
        .collect();
    paths.sort();

    let loaded: Vec<Loaded> = paths
        .iter()
        .map(|p| {
            load(p)
                .map(|(_, oracle)| oracle.function().clone())
                .map_err(|f| f.message)
        })
        .collect();

    let mut jobs = Vec::new();
    for instance in 0..paths.len() {
        for &algo in &algos {
            let ks: Vec<Option<usize>> = if algo.uses_k() {
                args.k.iter().map(|&k| Some(k)).collect()
            } else {
                vec![None]
            };
            let job_seeds: Vec<Option<u64>> = if algo.seeded() {
                seeds.iter().map(|&s| Some(s)).collect()
            } else {
                vec![None]
            };
            for &k in &ks {
                for &seed in &job_seeds {
                    jobs.push(Job {
                        instance,
                        algo,
                        k,
                        seed,
                    });
                }
            }
        }
    }

    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_count()? {
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| Failure::input(format!("thread pool: {e}")))?
    };

    let (rows, failures) = pool.install(|| {
        // one brute-force optimum per (instance, k)
        let mut keys: Vec<(usize, Option<usize>)> = jobs.iter().map(|j| (j.instance, j.k)).collect();
        keys.sort();
        keys.dedup();
        let opts: BTreeMap<(usize, Option<usize>), Option<f64>> = keys
            .par_iter()
            .map(|&(i, k)| {
                let opt = match &loaded[i] {
                    Ok(f) => {
                        let oracle = ValueOracle::from_arc(f.clone());
                        match k {
                            Some(k) if k > oracle.n() => None,
                            _ => small_opt(&oracle, k).ok().flatten(),
                        }
                    }
                    Err(_) => None,
                };
                ((i, k), opt)
            })
            .collect();

        let results: Vec<(RunReport, Option<String>)> = jobs
            .par_iter()
            .map(|job| {
                let mut row = RunReport {
                    instance: instance_id(&paths[job.instance]),
                    algo: job.algo.name().into(),
                    k: job.k,
                    seed: job.seed,
                    ..Default::default()
                };
                let func = match &loaded[job.instance] {
                    Ok(f) => f.clone(),
                    Err(e) => return (row, Some(e.clone())),
                };
                let oracle = ValueOracle::from_arc(func);
                let start = Instant::now();
                match run_job(job, &oracle) {
                    Ok((value, support)) => {
                        row.value = Some(value);
                        row.queries = Some(oracle.query_count());
                        row.max_support = support;
                        row.ms = args.timing.then(|| start.elapsed().as_millis() as u64);
                        (row.with_opt(opts[&(job.instance, job.k)]), None)
                    }
                    Err(e) => (row, Some(e.to_string())),
                }
            })
            .collect();
        let mut rows = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        for (row, err) in results {
            if let Some(e) = err {
                failures.push(format!(
                    "{} {} k={:?} seed={:?}: {e}",
                    row.instance, row.algo, row.k, row.seed
                ));
            }
            rows.push(row);
        }
        (rows, failures)
    });

    write_reports(open_output(args.out.as_deref())?, &rows)?;
    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            eprintln!("row failed: {f}");
        }
        Err(Failure {
            code: PARTIAL,
            message: format!("{} of {} rows failed", failures.len(), rows.len()),
        })
    }
}

/// Value and, for the deterministic algorithms, the largest support.
fn run_job(job: &Job, oracle: &ValueOracle) -> submax::Result<(f64, Option<usize>)> {
    match job.algo {
        Algo::Usm | Algo::UsmGeneric => {
            let solver = if job.algo == Algo::Usm {
                SolverMode::Knapsack
            } else {
                SolverMode::Generic
            };
            let out = usm::run(
                oracle,
                &UsmOptions {
                    solver,
                    ..Default::default()
                },
            )?;
            Ok((out.value, Some(out.stats.max_support)))
        }
        Algo::Card => {
            let out = card::run(oracle, job.k.expect("card jobs carry k"))?;
            Ok((out.value, Some(out.stats.max_support)))
        }
        Algo::DoubleGreedy => Ok((randomized_double_greedy(oracle, job.seed.expect("seeded"))?.1, None)),
        Algo::RandomGreedy => Ok((
            random_greedy_cardinality(oracle, job.k.expect("k"), job.seed.expect("seeded"))?.1,
            None,
        )),
    }
}
