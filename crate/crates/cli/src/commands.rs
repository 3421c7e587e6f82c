use std::io::Write;
use std::path::Path;
use std::time::Instant;

use submax::card::{self, CardOptions};
use submax::distribution::HexState;
use submax::extreme_point::Simplex;
use submax::instance::Instance;
use submax::oracle::{brute_force_opt, MAX_BRUTE_FORCE_N};
use submax::tightcase;
use submax::usm::{self, SolverMode, UsmOptions};
use submax::verify::{self, FaultySolver, LEMMA_TOL};
use submax::{Distribution, SetFunction, ValueOracle};

use crate::failure::{CliResult, Failure};
use crate::report::{open_output, write_reports, RunReport};
use crate::{CardArgs, TightArgs, UsmArgs, VerifyArgs};

pub fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load(path: &Path) -> Result<(Instance, ValueOracle), Failure> {
    let instance = Instance::load(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let oracle = instance
        .oracle()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok((instance, oracle))
}

/// Brute-force optimum when the ground set is small enough.
pub fn small_opt(oracle: &ValueOracle, k: Option<usize>) -> Result<Option<f64>, Failure> {
    if oracle.n() > MAX_BRUTE_FORCE_N {
        return Ok(None);
    }
    Ok(Some(brute_force_opt(&oracle.fresh(), k)?.1))
}

fn dump<S: Clone + Ord + HexState>(path: Option<&Path>, dist: &Distribution<S>) -> CliResult {
    if let Some(p) = path {
        std::fs::write(p, dist.dump()).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn finish(violations: Vec<String>) -> CliResult {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::verification(violations.join("; ")))
    }
}

pub fn usm(args: UsmArgs) -> CliResult {
    let (_, oracle) = load(&args.run.instance)?;
    let solver: SolverMode = args.solver.parse()?;
    let options = UsmOptions {
        order: args.order,
        solver,
        keep_duplicates: args.no_unify,
        record_trace: args.run.dump_dist.is_some(),
    };
    let start = Instant::now();
    let out = usm::run(&oracle, &options)?;
    let ms = start.elapsed().as_millis() as u64;
    let opt = small_opt(&oracle, None)?;
    let row = RunReport {
        instance: instance_id(&args.run.instance),
        algo: if solver == SolverMode::Generic {
            "usm-generic"
        } else {
            "usm"
        }
        .into(),
        value: Some(out.value),
        queries: Some(out.stats.queries),
        max_support: Some(out.stats.max_support),
        ms: args.run.timing.then_some(ms),
        ..Default::default()
    }
    .with_opt(opt);
    write_reports(open_output(args.run.report.as_deref())?, &[row])?;
    if let Some(last) = out.trace.last() {
        dump(args.run.dump_dist.as_deref(), last)?;
    }

    if !args.run.verify {
        return Ok(());
    }
    let mut violations = Vec::new();
    if let Some(opt) = opt {
        if out.value < 0.5 * opt - 1e-9 {
            violations.push(format!("value {} below OPT/2 = {}", out.value, opt / 2.0));
        }
    }
    let per = if solver == SolverMode::Generic { 2 } else { 1 };
    for (i, &s) in out.stats.support_sizes.iter().enumerate() {
        if s > per * i + 1 {
            violations.push(format!("|D_{i}| = {s} exceeds {}", per * i + 1));
        }
    }
    for (i, &q) in out.stats.iteration_queries.iter().enumerate() {
        if q > 4 * (i as u64 + 1) - 2 {
            violations.push(format!("iteration {} made {q} queries", i + 1));
        }
    }
    finish(violations)
}

pub fn card(args: CardArgs) -> CliResult {
    let (_, oracle) = load(&args.run.instance)?;
    let k = args.k;
    let options = CardOptions {
        record_trace: args.run.verify || args.run.dump_dist.is_some(),
        ..Default::default()
    };
    let start = Instant::now();
    let out = card::run_with(&oracle, k, &options)?;
    let ms = start.elapsed().as_millis() as u64;
    let opt = small_opt(&oracle, Some(k))?;
    let row = RunReport {
        instance: instance_id(&args.run.instance),
        algo: "card".into(),
        k: Some(k),
        value: Some(out.value),
        queries: Some(out.stats.queries),
        max_support: Some(out.stats.max_support),
        ms: args.run.timing.then_some(ms),
        ..Default::default()
    }
    .with_opt(opt);
    write_reports(open_output(args.run.report.as_deref())?, &[row])?;
    if let Some(last) = out.trace.last() {
        dump(args.run.dump_dist.as_deref(), last)?;
    }

    if !args.run.verify {
        return Ok(());
    }
    let mut violations = Vec::new();
    if let (Some(opt), true) = (opt, k > 0) {
        let ratio = (1.0 - 1.0 / k as f64).powi(k as i32 - 1);
        if out.value < ratio * opt - 1e-9 {
            violations.push(format!("value {} below {ratio} · OPT = {}", out.value, ratio * opt));
        }
    }
    for (i, &s) in out.stats.support_sizes.iter().enumerate() {
        if s > k * i + 1 {
            violations.push(format!("|D_{i}| = {s} exceeds {}", k * i + 1));
        }
    }
    if out.stats.queries > (4 * k * k * oracle.n()).max(1) as u64 {
        violations.push(format!("{} queries exceed 4k²n", out.stats.queries));
    }
    if k > 0 {
        let decay = verify::card_decay_slack(&out.trace, oracle.n(), k);
        if decay < -LEMMA_TOL {
            violations.push(format!("probability decay violated by {:e}", -decay));
        }
    }
    finish(violations)
}

pub fn verify(args: VerifyArgs) -> CliResult {
    let suite: verify::Suite = args.suite.parse()?;
    let config = verify::VerifyConfig {
        seeds: args.seeds,
        n_max: args.n_max,
    };
    let report = if args.inject_fault {
        verify::run_suite(suite, &config, &FaultySolver(Simplex))?
    } else {
        verify::run_suite(suite, &config, &Simplex)?
    };
    println!(
        "suite {}: {} cases, {} violations",
        report.suite,
        report.cases,
        report.violations.len()
    );
    for v in &report.violations {
        println!("violation in {}: {}", v.case, v.message);
        if let Some(instance) = &v.instance {
            println!("{instance}");
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::verification(format!(
            "{} violation(s) in suite {}",
            report.violations.len(),
            report.suite
        )))
    }
}

pub fn tight(args: TightArgs) -> CliResult {
    let run = tightcase::adversarial_run(args.k, args.ell)?;
    let to_stdout = args.out.is_none();
    let mut w = csv::Writer::from_writer(open_output(args.out.as_deref())?);
    for row in &run.trace {
        w.serialize(row)?;
    }
    w.flush()?;
    drop(w);

    let bound = (-1f64).exp() + args.ell / args.k as f64;
    let mut stdout = std::io::stdout().lock();
    if to_stdout {
        writeln!(stdout)?;
    }
    let mut s = csv::Writer::from_writer(stdout);
    let func = tightcase::TightFunction::new(args.k, args.ell)?;
    let opt = func.value(&func.o());
    s.write_record(["k", "ell", "value", "opt", "ratio", "bound"])?;
    s.write_record([
        args.k.to_string(),
        args.ell.to_string(),
        run.value.to_string(),
        opt.to_string(),
        (run.value / opt).to_string(),
        bound.to_string(),
    ])?;
    s.flush()?;
    Ok(())
}
