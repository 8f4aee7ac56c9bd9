//! The `run`, `rates`, `verify` and `suite` commands.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use halmann_core::iterate::{check_trace_inequalities, run_variant, Trace};
use halmann_core::maps::check_nonexpansive;
use halmann_core::rates::sabach_bound;
use halmann_core::report::{CheckReport, Status, VerifyReport};
use halmann_core::schedules::{verify_moduli, ModulusReport};
use halmann_core::spaces::{check_ucw_inequality, check_w_axioms};
use halmann_core::verify::{check_rate, qxu_synthetic_check, sabach_synthetic_check};
use halmann_core::{IterationProblem, Modulus, ModulusKind, Nat, Variant};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{catalog, rate_table};
use crate::config::{ExperimentConfig, Overrides};
use crate::io;

/// Why a command could not finish.
#[derive(Debug)]
pub enum Failure {
    /// The configuration does not parse or does not validate.
    Config(anyhow::Error),
    /// Evaluation failed (overflow, domain error, IO).
    Runtime(anyhow::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config error: {e:#}"),
            Failure::Runtime(e) => write!(f, "runtime error: {e:#}"),
        }
    }
}

/// `Ok(true)` when everything checked passed.
pub type Outcome = Result<bool, Failure>;

pub fn exit_code(outcome: &Outcome) -> i32 {
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Config(_)) => 2,
        Err(Failure::Runtime(_)) => 3,
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn runtime_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

pub fn load(
    path: &Path,
    overrides: &Overrides,
) -> Result<(ExperimentConfig, IterationProblem), Failure> {
    let mut cfg = ExperimentConfig::load(path).map_err(config_err)?;
    cfg.apply(overrides);
    let problem = cfg.problem().map_err(config_err)?;
    Ok((cfg, problem))
}

/// Runs the iteration and writes `trace.csv` and `constants.json`.
pub fn run(
    cfg: &ExperimentConfig,
    problem: &IterationProblem,
    out: &mut dyn std::io::Write,
) -> Outcome {
    let trace = run_variant(cfg.variant, problem, cfg.n_max).map_err(runtime_err)?;
    let dir = cfg.out_dir();
    io::save_trace(&dir, &trace.series, cfg.variant).map_err(runtime_err)?;
    let _ = writeln!(
        out,
        "wrote {} rows to {} (M_p = {}, K = {})",
        cfg.n_max,
        dir.join("trace.csv").display(),
        trace.series.m_p,
        trace.series.k
    );
    Ok(true)
}

/// Writes `rates.json`: for each `k ≤ k_max` the value of every applicable
/// (or requested) rate, `null` when it cannot be represented.
pub fn rates(
    cfg: &ExperimentConfig,
    problem: &IterationProblem,
    out: &mut dyn std::io::Write,
) -> Outcome {
    let mut cat = catalog(problem, &cfg.rate_overrides).map_err(config_err)?;
    if let Some(requested) = &cfg.rates {
        cat.restrict(requested).map_err(config_err)?;
    }
    let table = rate_table(&cat, cfg.k_max).map_err(runtime_err)?;
    let path = cfg.out_dir().join("rates.json");
    io::write_json(&path, &table).map_err(runtime_err)?;
    let _ = writeln!(
        out,
        "wrote rates for k <= {} to {}",
        cfg.k_max,
        path.display()
    );
    Ok(true)
}

#[derive(Debug, Serialize)]
pub struct FullReport {
    pub passed: bool,
    pub axioms: CheckReport,
    pub uniform_convexity: Option<CheckReport>,
    pub nonexpansive: Vec<CheckReport>,
    pub moduli: ModulusReport,
    pub inequalities: CheckReport,
    pub claims: Vec<VerifyReport>,
    pub synthetic: Vec<VerifyReport>,
}

impl FullReport {
    fn compute_passed(&mut self) {
        self.passed = self.axioms.passed()
            && self
                .uniform_convexity
                .as_ref()
                .is_none_or(CheckReport::passed)
            && self.nonexpansive.iter().all(CheckReport::passed)
            && self.moduli.passed()
            && self.inequalities.passed()
            && self.claims.iter().all(VerifyReport::passed)
            && self.synthetic.iter().all(VerifyReport::passed);
    }

    /// One line per section, with the first witness of each failure.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut check = |label: &str, r: &CheckReport| {
            lines.push(format!("{} {label}: {}", verdict(r.passed()), r.subject));
            for c in r.failed_checks() {
                let w = c
                    .witness
                    .as_ref()
                    .map(|w| format!("n={:?} lhs={} rhs={} {}", w.n, w.lhs, w.rhs, w.detail));
                lines.push(format!(
                    "    {} failed {} of {} times; witness: {}",
                    c.name,
                    c.failures,
                    c.checked,
                    w.unwrap_or_default()
                ));
            }
        };
        check("axioms", &self.axioms);
        if let Some(u) = &self.uniform_convexity {
            check("uniform convexity", u);
        }
        for r in &self.nonexpansive {
            check("nonexpansive", r);
        }
        check("trace inequalities", &self.inequalities);
        lines.push(format!(
            "{} moduli: {}",
            verdict(self.moduli.passed()),
            self.moduli.schedule
        ));
        for c in self.moduli.checks.iter().filter(|c| !c.passed()) {
            if let Some(w) = &c.failure {
                lines.push(format!(
                    "    {} failed; witness: n={:?} {}",
                    c.name, w.n, w.detail
                ));
            }
        }
        for r in self.claims.iter().chain(&self.synthetic) {
            let s = &r.summary;
            lines.push(format!(
                "{} {}: verified {}, violated {}, skipped {}, precondition failures {}",
                verdict(r.passed()),
                r.claim,
                s.verified,
                s.violated,
                s.skipped_budget,
                s.precondition_failures
            ));
            for p in &r.preconditions {
                lines.push(format!("    precondition: {p}"));
            }
            if let Some(e) = r.first_violation() {
                if let Status::Violated {
                    n,
                    value,
                    bound,
                    note,
                } = &e.status
                {
                    lines.push(format!(
                        "    first violation at k={} n={n:?}: {value} > {bound} {}",
                        e.k,
                        note.clone().unwrap_or_default()
                    ));
                }
            }
        }
        lines
    }
}

fn synthetic_checks(
    cfg: &ExperimentConfig,
    problem: &IterationProblem,
    trace: &Trace,
) -> anyhow::Result<Vec<VerifyReport>> {
    let s = &problem.schedule;
    let mut out = Vec::new();
    if cfg.variant == Variant::Mann {
        return Ok(out);
    }
    if let (Some(s2), Some(s3), Some(s4)) = (&s.sigma2, &s.sigma3, &s.sigma4) {
        // s_{n+1} = (1 - α_n)s_n + 2|α_{n+1} - α_n| + 2|β_{n+1} - β_n|
        let c = |n: u64| {
            2.0 * (s.alpha(n + 1) - s.alpha(n)).abs() + 2.0 * (s.beta(n + 1) - s.beta(n)).abs()
        };
        let (s3, s4) = (s3.clone(), s4.clone());
        let chi = Modulus::new(
            "max(sigma3, sigma4)(4k+3)",
            ModulusKind::CauchyModulus,
            false,
            move |k| {
                let arg = 4 * k + 3;
                Ok(s3.eval(arg)?.max(s4.eval(arg)?))
            },
        );
        let total: f64 = (0..=cfg.budget).map(c).sum();
        let bound = (1.0 + total).ceil() as Nat;
        out.push(qxu_synthetic_check(
            &|n| s.alpha(n),
            &c,
            1.0,
            s2,
            &chi,
            bound,
            cfg.k_max.min(20),
            cfg.budget,
            cfg.rate_tol,
        )?);
    }
    if matches!(
        s.family,
        halmann_core::schedules::Family::CanonicalLinear { .. }
    ) {
        // d(x_n, x_{n+1}) ≤ 2K·2/(n+2) along the actual trace, and the extremal recursion
        let l = 2.0 * trace.series.k as f64;
        out.push(sabach_synthetic_check(
            l,
            2,
            2,
            1.0,
            &|_| l,
            l,
            cfg.budget,
            cfg.rate_tol,
        )?);
        let mut pointwise =
            VerifyReport::new("d_xx[n] <= 4K/(n+2)", 0, trace.series.n_max, cfg.rate_tol);
        let first = trace.series.d_xx.iter().enumerate().find_map(|(n, &v)| {
            let b = sabach_bound(l, 2, 1.0, n as u64).ok()?;
            // NaN counts as a violation
            let holds = v <= b + cfg.rate_tol * (1.0 + b);
            (!holds).then_some((n, v, b))
        });
        pointwise.push(
            0,
            None,
            match first {
                None => Status::Verified,
                Some((n, value, bound)) => Status::Violated {
                    n: Some(n as u64),
                    value,
                    bound,
                    note: None,
                },
            },
        );
        out.push(pointwise);
    }
    Ok(out)
}

/// Axioms, nonexpansiveness, moduli, trace inequalities, rate claims and
/// the synthetic sequence checks. Writes `report.json`.
pub fn verify_report(
    cfg: &ExperimentConfig,
    problem: &IterationProblem,
) -> Result<FullReport, Failure> {
    let space = problem.space.as_ref();
    let axioms = check_w_axioms(space, cfg.samples, cfg.seed, cfg.tol);
    let uniform_convexity = match space.modulus() {
        Some(_) => {
            Some(check_ucw_inequality(space, cfg.samples, cfg.seed, cfg.tol).map_err(runtime_err)?)
        }
        None => None,
    };
    let nonexpansive = [&problem.t, &problem.u]
        .iter()
        .map(|m| check_nonexpansive(space, m, cfg.samples, cfg.seed, cfg.tol))
        .collect();
    let moduli = verify_moduli(&problem.schedule, cfg.budget);
    let trace = run_variant(cfg.variant, problem, cfg.budget + 1).map_err(runtime_err)?;
    let inequalities = check_trace_inequalities(&trace, cfg.tol);

    let mut claims = Vec::new();
    if cfg.variant != Variant::Mann {
        let mut cat = catalog(problem, &cfg.rate_overrides).map_err(config_err)?;
        if let Some(requested) = &cfg.rates {
            cat.restrict(requested).map_err(config_err)?;
        }
        for claim in cat.claims() {
            claims.push(
                check_rate(&trace.series, &claim, cfg.k_max, cfg.rate_tol).map_err(runtime_err)?,
            );
        }
    }
    let synthetic = synthetic_checks(cfg, problem, &trace).map_err(runtime_err)?;
    let mut report = FullReport {
        passed: false,
        axioms,
        uniform_convexity,
        nonexpansive,
        moduli,
        inequalities,
        claims,
        synthetic,
    };
    for r in report.claims.iter_mut().chain(report.synthetic.iter_mut()) {
        r.seed = Some(cfg.seed);
    }
    report.compute_passed();
    Ok(report)
}

pub fn verify(
    cfg: &ExperimentConfig,
    problem: &IterationProblem,
    out: &mut dyn std::io::Write,
) -> Outcome {
    let report = verify_report(cfg, problem)?;
    let path = cfg.out_dir().join("report.json");
    io::write_json(&path, &report).map_err(runtime_err)?;
    for line in report.summary_lines() {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(
        out,
        "{} ({})",
        if report.passed { "PASSED" } else { "FAILED" },
        path.display()
    );
    Ok(report.passed)
}

/// Verifies every `*.json` config in `dir`, in parallel. Each config writes
/// to `<out>/<stem>`. The exit status is the worst one.
pub fn suite(dir: &Path, overrides: &Overrides, out: &mut dyn std::io::Write) -> i32 {
    let mut paths: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            let _ = writeln!(out, "config error: cannot read {}: {e}", dir.display());
            return 2;
        }
    };
    paths.sort();
    let base = overrides
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    let results: Vec<(PathBuf, Vec<u8>, i32)> = paths
        .par_iter()
        .map(|path| {
            let mut buf = Vec::new();
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let o = Overrides {
                out: Some(base.join(&stem)),
                ..overrides.clone()
            };
            let outcome =
                load(path, &o).and_then(|(cfg, problem)| verify(&cfg, &problem, &mut buf));
            if let Err(f) = &outcome {
                let _ = writeln!(buf, "{f}");
            }
            (path.clone(), buf, exit_code(&outcome))
        })
        .collect();
    let mut worst = 0;
    for (path, buf, code) in results {
        let _ = writeln!(out, "== {} (exit {code})", path.display());
        let _ = out.write_all(&buf);
        worst = worst.max(code);
    }
    let _ = writeln!(out, "suite: {} configs, exit {worst}", paths.len());
    worst
}
