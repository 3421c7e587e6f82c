//! Seeded property suites: solver equivalence, approximation ratios, support
//! and query bounds, and the per-iteration inequalities of both algorithms.
//!
//! Each suite returns a [`SuiteReport`]; a violation carries the offending
//! instance in the instance file format so it can be replayed from the CLI.

use std::fmt;
use std::str::FromStr;

use crate::card::{self, CardOptions};
use crate::distribution::Distribution;
use crate::error::{invalid, Error, Result};
use crate::extreme_point::{
    enumerate_vertices, knapsack_lp, solve_signed_knapsack, BasicSolution, DenseLp, LpSolver, SignedKnapsackItem,
};
use crate::instance::{random_submodular_table, Instance};
use crate::oracle::{brute_force_opt, ValueOracle};
use crate::prng::SplitMix64;
use crate::set::ElementSet;
use crate::tightcase::{self, DEFAULT_ELL};
use crate::usm::{self, PairState, SolverMode, UsmOptions};

/// Slack for the per-iteration inequalities.
pub const LEMMA_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lp,
    Usm,
    Card,
    Tight,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(Suite::Lp),
            "usm" => Ok(Suite::Usm),
            "card" => Ok(Suite::Card),
            "tight" => Ok(Suite::Tight),
            other => Err(invalid(format!(
                "unknown suite `{other}` (expected usm, card, lp or tight)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Lp => "lp",
            Suite::Usm => "usm",
            Suite::Card => "card",
            Suite::Tight => "tight",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    /// Cases per family (seeds `0..seeds`).
    pub seeds: u64,
    /// Largest ground set for the algorithm suites.
    pub n_max: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seeds: 200, n_max: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub case: String,
    pub message: String,
    /// The instance as JSON, when there is one.
    pub instance: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub violations: Vec<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Run a suite. `solver` is the LP solver under test for the `lp` and `card`
/// suites.
pub fn run_suite(suite: Suite, config: &VerifyConfig, solver: &dyn LpSolver) -> Result<SuiteReport> {
    match suite {
        Suite::Lp => lp_suite(config, solver),
        Suite::Usm => usm_suite(config),
        Suite::Card => card_suite(config, solver),
        Suite::Tight => tight_suite(),
    }
}

/// A solver that returns a deliberately wrong point (the correct basic
/// solution with its first coordinate raised by one half). Used to check
/// that the suites notice.
#[derive(Debug, Clone, Copy)]
pub struct FaultySolver<S>(pub S);

impl<S: LpSolver> LpSolver for FaultySolver<S> {
    fn solve(&self, lp: &DenseLp) -> Result<BasicSolution> {
        let mut sol = self.0.solve(lp)?;
        if let Some(v) = sol.x.first_mut() {
            *v += 0.5;
        }
        Ok(BasicSolution::new(lp, sol.x))
    }
}

/// Seeded signed knapsack with 1 to 8 items. Half the instances use
/// coefficients on a coarse grid to provoke ties and zeros.
pub fn random_knapsack(seed: u64) -> (Vec<SignedKnapsackItem>, f64) {
    let mut rng = SplitMix64::new(seed);
    let m = 1 + rng.below(8);
    let coarse = rng.bernoulli(0.5);
    let mut draw = |lo: f64, hi: f64| {
        let v = rng.uniform(lo, hi);
        if coarse {
            (v * 2.0).round() / 2.0
        } else {
            v
        }
    };
    let items = (0..m)
        .map(|j| SignedKnapsackItem::new(j, draw(-2.0, 2.0), draw(-2.0, 2.0)))
        .collect();
    let budget = draw(-2.0, 3.0);
    (items, budget)
}

/// Seeded LP with 1 to 6 variables and 1 to 6 rows, one of which is a box
/// row `Σ x <= c` that keeps it bounded.
pub fn random_small_lp(seed: u64) -> DenseLp {
    let mut rng = SplitMix64::new(seed);
    let n = 1 + rng.below(6);
    let rows = 1 + rng.below(6);
    let coarse = rng.bernoulli(0.5);
    let mut draw = |lo: f64, hi: f64| {
        let v = rng.uniform(lo, hi);
        if coarse {
            (v * 2.0).round() / 2.0
        } else {
            v
        }
    };
    let objective = (0..n).map(|_| draw(-1.0, 2.0)).collect();
    let mut lp = DenseLp::new(n).with_objective(objective).expect("width matches");
    let cap = draw(0.5, 4.0).max(0.5);
    lp.add_le(vec![1.0; n], cap).expect("width matches");
    for _ in 1..rows {
        let coeffs: Vec<f64> = (0..n).map(|_| draw(-2.0, 2.0)).collect();
        let rhs = draw(-1.0, 3.0);
        if draw(0.0, 1.0) < 0.2 {
            lp.add_eq(coeffs, rhs).expect("width matches");
        } else {
            lp.add_le(coeffs, rhs).expect("width matches");
        }
    }
    lp
}

fn describe_lp(lp: &DenseLp) -> String {
    let rows: Vec<String> = lp
        .le_rows()
        .iter()
        .map(|r| format!("{:?} <= {}", r.coeffs, r.rhs))
        .chain(lp.eq_rows().iter().map(|r| format!("{:?} = {}", r.coeffs, r.rhs)))
        .collect();
    format!("max {:?} s.t. {}", lp.objective(), rows.join("; "))
}

fn lp_suite(config: &VerifyConfig, solver: &dyn LpSolver) -> Result<SuiteReport> {
    let mut violations = Vec::new();
    for seed in 0..config.seeds {
        let (items, budget) = random_knapsack(seed);
        let lp = knapsack_lp(&items, budget);
        let case = format!("knapsack seed {seed}");
        let reference = enumerate_vertices(&lp);
        let mut check = |name: &str, got: Result<(f64, Vec<f64>)>, max_fractional: Option<usize>| {
            let message = match (&reference, got) {
                (Err(a), Err(b)) if a == &b => None,
                (Ok(r), Ok((obj, x))) => {
                    let fractional = x.iter().filter(|&&z| z > 1e-9 && z < 1.0 - 1e-9).count();
                    if (r.objective - obj).abs() > 1e-9 {
                        Some(format!("{name} objective {obj} vs vertex enumeration {}", r.objective))
                    } else if lp.max_violation(&x) > 1e-9 {
                        Some(format!("{name} point infeasible by {:e}", lp.max_violation(&x)))
                    } else if max_fractional.is_some_and(|m| fractional > m) {
                        Some(format!("{name} has {fractional} fractional items"))
                    } else {
                        None
                    }
                }
                (r, g) => Some(format!(
                    "{name} returned {:?}, vertex enumeration {:?}",
                    g.map(|g| g.0),
                    r.as_ref().map(|r| r.objective)
                )),
            };
            if let Some(message) = message {
                violations.push(Violation {
                    case: case.clone(),
                    message,
                    instance: Some(describe_lp(&lp)),
                });
            }
        };
        check(
            "knapsack",
            solve_signed_knapsack(&items, budget).map(|s| (s.objective, s.z)),
            Some(1),
        );
        check("solver", solver.solve(&lp).map(|s| (s.objective, s.x)), None);
    }
    for seed in 0..config.seeds {
        let lp = random_small_lp(seed);
        let reference = enumerate_vertices(&lp);
        let got = solver.solve(&lp);
        let message = match (&reference, &got) {
            (Err(a), Err(b)) if a == b => None,
            (Ok(r), Ok(s)) => {
                if (r.objective - s.objective).abs() > 1e-9 {
                    Some(format!(
                        "solver objective {} vs vertex enumeration {}",
                        s.objective, r.objective
                    ))
                } else if lp.max_violation(&s.x) > 1e-9 {
                    Some(format!("solver point infeasible by {:e}", lp.max_violation(&s.x)))
                } else if s.nonzero_count > lp.num_rows() {
                    Some(format!("{} nonzeros with {} rows", s.nonzero_count, lp.num_rows()))
                } else {
                    None
                }
            }
            (r, g) => Some(format!(
                "solver returned {:?}, vertex enumeration {:?}",
                g.as_ref().map(|g| g.objective),
                r.as_ref().map(|r| r.objective)
            )),
        };
        if let Some(message) = message {
            violations.push(Violation {
                case: format!("lp seed {seed}"),
                message,
                instance: Some(describe_lp(&lp)),
            });
        }
    }
    Ok(SuiteReport {
        suite: Suite::Lp,
        cases: 2 * config.seeds as usize,
        violations,
    })
}

fn table_instance(n: usize, seed: u64) -> (Instance, ValueOracle) {
    let table = random_submodular_table(n, seed);
    let instance = Instance::Table {
        n,
        values: table.values().to_vec(),
    };
    (instance, ValueOracle::new(table))
}

/// Smallest slack of `E_i[f(X) + f(Y)] - E_{i-1}[f(X) + f(Y)] >=
/// 2 (E_{i-1}[f(OPT(X,Y))] - E_i[f(OPT(X,Y))])` over a run's trace, with
/// `OPT(X,Y) = (OPT ∪ X) ∩ Y`.
pub fn usm_potential_slack(trace: &[Distribution<PairState>], oracle: &ValueOracle, opt: &ElementSet) -> Result<f64> {
    let potential =
        |d: &Distribution<PairState>| d.try_expectation(|s| Ok::<_, Error>(oracle.eval(&s.x)? + oracle.eval(&s.y)?));
    let coerced = |d: &Distribution<PairState>| d.try_expectation(|s| oracle.eval(&opt.union(&s.x).intersection(&s.y)));
    let mut worst = f64::INFINITY;
    for w in trace.windows(2) {
        let lhs = potential(&w[1])? - potential(&w[0])?;
        let rhs = 2.0 * (coerced(&w[0])? - coerced(&w[1])?);
        worst = worst.min(lhs - rhs);
    }
    Ok(worst)
}

/// Smallest slack of `E_i[f(S)] - E_{i-1}[f(S)] >= (1/k) E_{i-1}[f(OPT ∪ S) - f(S)]`.
pub fn card_improvement_slack(
    trace: &[Distribution<ElementSet>],
    oracle: &ValueOracle,
    opt: &ElementSet,
    k: usize,
) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for w in trace.windows(2) {
        let gain = w[1].try_expectation(|s| oracle.eval(s))? - w[0].try_expectation(|s| oracle.eval(s))?;
        let room = w[0].try_expectation(|s| Ok::<_, Error>(oracle.eval(&opt.union(s))? - oracle.eval(s)?))?;
        worst = worst.min(gain - room / k as f64);
    }
    Ok(worst)
}

/// Smallest slack of `Pr_{D_i}[u ∉ S] >= (1 - 1/k)^i` over all `u` and `i`.
pub fn card_decay_slack(trace: &[Distribution<ElementSet>], n: usize, k: usize) -> f64 {
    let mut worst = f64::INFINITY;
    for (i, d) in trace.iter().enumerate() {
        let bound = (1.0 - 1.0 / k as f64).powi(i as i32);
        worst = worst.min(d.min_prob_not_containing(n) - bound);
    }
    worst
}

/// Smallest slack of `E_i[f(S)] >= (i/k)(1 - 1/k)^(i-1) f(OPT)`.
pub fn card_running_bound_slack(expectations: &[f64], opt_value: f64, k: usize) -> f64 {
    let kf = k as f64;
    expectations
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, e)| e - (i as f64 / kf) * (1.0 - 1.0 / kf).powi(i as i32 - 1) * opt_value)
        .fold(f64::INFINITY, f64::min)
}

fn usm_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    if config.n_max < 2 {
        return Err(invalid("usm suite needs --n-max of at least 2"));
    }
    let n_max = config.n_max.min(crate::oracle::MAX_CHECK_N);
    let mut violations = Vec::new();
    let mut cases = 0;
    for seed in 0..config.seeds {
        let n = 2 + (seed as usize) % (n_max - 1);
        let (instance, oracle) = table_instance(n, seed);
        let (opt_set, opt) = brute_force_opt(&oracle, None)?;
        for solver in [SolverMode::Knapsack, SolverMode::Generic] {
            cases += 1;
            let case = format!("usm seed {seed} n {n} {solver:?}");
            let mut fail = |message: String| {
                violations.push(Violation {
                    case: case.clone(),
                    message,
                    instance: Some(instance.to_json()),
                })
            };
            let options = UsmOptions {
                solver,
                record_trace: true,
                ..Default::default()
            };
            let out = match usm::run(&oracle.fresh(), &options) {
                Ok(out) => out,
                Err(e) => {
                    fail(format!("run failed: {e}"));
                    continue;
                }
            };
            if out.value < 0.5 * opt - 1e-9 {
                fail(format!("value {} below half of OPT {opt}", out.value));
            }
            let per_step = if solver == SolverMode::Knapsack { 1 } else { 2 };
            for (i, &s) in out.stats.support_sizes.iter().enumerate() {
                if s > per_step * i + 1 {
                    fail(format!("|D_{i}| = {s} exceeds {}", per_step * i + 1));
                }
            }
            for (i, &q) in out.stats.iteration_queries.iter().enumerate() {
                let bound = 4 * (i as u64 + 1) - 2;
                if q > bound {
                    fail(format!("iteration {} used {q} queries, bound {bound}", i + 1));
                }
            }
            let slack = usm_potential_slack(&out.trace, &oracle.fresh(), &opt_set)?;
            if slack < -LEMMA_TOL {
                fail(format!("potential inequality violated by {:e}", -slack));
            }
        }
    }
    Ok(SuiteReport {
        suite: Suite::Usm,
        cases,
        violations,
    })
}

fn card_suite(config: &VerifyConfig, solver: &dyn LpSolver) -> Result<SuiteReport> {
    if config.n_max < 4 {
        return Err(invalid("card suite needs --n-max of at least 4"));
    }
    let n_max = config.n_max.min(crate::oracle::MAX_CHECK_N);
    let mut violations = Vec::new();
    for seed in 0..config.seeds {
        let n = 4 + (seed as usize) % (n_max - 3);
        let k = 1 + (seed as usize / (n_max - 3)) % 4;
        let (instance, oracle) = table_instance(n, seed);
        let (opt_set, opt) = brute_force_opt(&oracle, Some(k))?;
        let case = format!("card seed {seed} n {n} k {k}");
        let mut fail = |message: String| {
            violations.push(Violation {
                case: case.clone(),
                message,
                instance: Some(instance.to_json()),
            })
        };
        let options = CardOptions {
            solver,
            record_trace: true,
            ..Default::default()
        };
        let out = match card::run_with(&oracle.fresh(), k, &options) {
            Ok(out) => out,
            Err(e) => {
                fail(format!("run failed: {e}"));
                continue;
            }
        };
        let ratio = (1.0 - 1.0 / k as f64).powi(k as i32 - 1);
        if out.value < ratio * opt - 1e-9 {
            fail(format!("value {} below {ratio} · OPT {opt}", out.value));
        }
        for (i, &s) in out.stats.support_sizes.iter().enumerate() {
            if s > k * i + 1 {
                fail(format!("|D_{i}| = {s} exceeds {}", k * i + 1));
            }
        }
        if out.stats.queries > (4 * k * k * n) as u64 {
            fail(format!("{} queries exceed 4k²n", out.stats.queries));
        }
        let decay = card_decay_slack(&out.trace, n, k);
        if decay < -LEMMA_TOL {
            fail(format!("probability decay violated by {:e}", -decay));
        }
        let improvement = card_improvement_slack(&out.trace, &oracle.fresh(), &opt_set, k)?;
        if improvement < -LEMMA_TOL {
            fail(format!("improvement inequality violated by {:e}", -improvement));
        }
        let running = card_running_bound_slack(&out.stats.expectations, opt, k);
        if running < -LEMMA_TOL {
            fail(format!("running lower bound violated by {:e}", -running));
        }
    }
    Ok(SuiteReport {
        suite: Suite::Card,
        cases: config.seeds as usize,
        violations,
    })
}

fn tight_suite() -> Result<SuiteReport> {
    let mut violations = Vec::new();
    let ks = [17, 32, 64, 128];
    for k in ks {
        let case = format!("tight k {k} ℓ {DEFAULT_ELL}");
        match tightcase::adversarial_run(k, DEFAULT_ELL) {
            Ok(run) => {
                let bound = (-1f64).exp() + DEFAULT_ELL / k as f64;
                if run.value > bound {
                    violations.push(Violation {
                        case,
                        message: format!("final value {} above {bound}", run.value),
                        instance: None,
                    });
                }
            }
            Err(e) => violations.push(Violation {
                case,
                message: e.to_string(),
                instance: None,
            }),
        }
    }
    Ok(SuiteReport {
        suite: Suite::Tight,
        cases: ks.len(),
        violations,
    })
}
