//! JSON experiment configurations and their translation into core objects.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use halmann_core::iterate::IterationProblem;
use halmann_core::maps::make_map;
use halmann_core::schedules::{canonical_linear_schedule, harmonic_schedule};
use halmann_core::spaces::{CollapsedComb, Euclidean, Lp, SpiderTree, UcModulus, WithModulus};
use halmann_core::{MapSpec, Modulus, ModulusKind, Nat, Point, Schedule, SpaceHandle, Variant};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKindName {
    Euclidean,
    Spider,
    Lp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulusDescriptor {
    Cat0,
    Power { p: f64 },
    Constant { value: f64 },
}

impl ModulusDescriptor {
    fn build(&self) -> UcModulus {
        match *self {
            ModulusDescriptor::Cat0 => UcModulus::Cat0,
            ModulusDescriptor::Power { p } => UcModulus::Power { p },
            ModulusDescriptor::Constant { value } => UcModulus::Constant(value),
        }
    }
}

/// Deliberate defects, for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Defect {
    /// `comb(x, y, λ) = x`, which breaks (W7).
    CollapsedComb,
}

/// `{"kind": "euclidean"|"spider"|"lp", "dim"|"rays": n, "p": p}` with an
/// optional modulus override and defect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDescriptor {
    pub kind: SpaceKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<Defect>,
}

impl SpaceDescriptor {
    pub fn build(&self) -> anyhow::Result<SpaceHandle> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| anyhow::anyhow!("space kind {:?} needs \"{name}\"", self.kind))
        };
        let stray = |present: bool, name: &str| -> anyhow::Result<()> {
            anyhow::ensure!(
                !present,
                "field \"{name}\" does not apply to space kind {:?}",
                self.kind
            );
            Ok(())
        };
        let base: SpaceHandle = match self.kind {
            SpaceKindName::Euclidean => {
                stray(self.rays.is_some(), "rays")?;
                stray(self.p.is_some(), "p")?;
                let dim = need(self.dim, "dim")?;
                anyhow::ensure!(dim >= 1, "dim must be at least 1");
                Arc::new(Euclidean::new(dim))
            }
            SpaceKindName::Spider => {
                stray(self.dim.is_some(), "dim")?;
                stray(self.p.is_some(), "p")?;
                Arc::new(SpiderTree::new(need(self.rays, "rays")?)?)
            }
            SpaceKindName::Lp => {
                stray(self.rays.is_some(), "rays")?;
                let p = self
                    .p
                    .ok_or_else(|| anyhow::anyhow!("space kind lp needs \"p\""))?;
                Arc::new(Lp::new(need(self.dim, "dim")?, p)?)
            }
        };
        let with_modulus: SpaceHandle = match &self.modulus {
            Some(m) => Arc::new(WithModulus::new(base, m.build())),
            None => base,
        };
        Ok(match self.defect {
            Some(Defect::CollapsedComb) => Arc::new(CollapsedComb::new(with_modulus)),
            None => with_modulus,
        })
    }
}

/// A parameter sequence: a constant, a table (held at its last value past
/// the end) or `scale / (n + shift)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceDescriptor {
    Constant(f64),
    Table(Vec<f64>),
    Reciprocal { scale: f64, shift: f64 },
}

impl SequenceDescriptor {
    fn build(&self) -> anyhow::Result<Arc<dyn Fn(u64) -> f64 + Send + Sync>> {
        Ok(match self.clone() {
            SequenceDescriptor::Constant(c) => Arc::new(move |_| c),
            SequenceDescriptor::Table(t) => {
                anyhow::ensure!(!t.is_empty(), "sequence table is empty");
                Arc::new(move |n| t[(n as usize).min(t.len() - 1)])
            }
            SequenceDescriptor::Reciprocal { scale, shift } => {
                anyhow::ensure!(shift > 0.0, "reciprocal sequence needs shift > 0");
                Arc::new(move |n| scale / (n as f64 + shift))
            }
        })
    }
}

/// A modulus `ℕ → ℕ`: an explicit table or `a·k + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModulusSpec {
    Table(Vec<u64>),
    Affine { a: u64, b: u64 },
}

impl ModulusSpec {
    pub fn build(&self, label: &str, kind: ModulusKind) -> Modulus {
        match self {
            ModulusSpec::Table(t) => {
                Modulus::table(label, kind, t.iter().map(|&v| v as Nat).collect())
            }
            ModulusSpec::Affine { a, b } => Modulus::affine(label, kind, *a as Nat, *b as Nat),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    CanonicalLinear,
    Harmonic,
    Custom,
}

/// `{"kind": "canonical_linear"|"harmonic"|"custom", "beta": β}`; custom
/// schedules give `alpha` and `beta` sequences, and any schedule may
/// override its moduli and `Λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDescriptor {
    pub kind: ScheduleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<SequenceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<SequenceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<ModulusSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<ModulusSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma3: Option<ModulusSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma4: Option<ModulusSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "Lambda")]
    pub lambda: Option<Nat>,
}

impl ScheduleDescriptor {
    pub fn build(&self) -> anyhow::Result<Schedule> {
        let constant_beta = || match &self.beta {
            Some(SequenceDescriptor::Constant(b)) => Ok(*b),
            _ => anyhow::bail!(
                "schedule kind {:?} needs a constant \"beta\" in (0,1)",
                self.kind
            ),
        };
        let mut s = match self.kind {
            ScheduleKind::CanonicalLinear | ScheduleKind::Harmonic => {
                anyhow::ensure!(
                    self.alpha.is_none(),
                    "\"alpha\" only applies to custom schedules"
                );
                let beta = constant_beta()?;
                if self.kind == ScheduleKind::CanonicalLinear {
                    canonical_linear_schedule(beta)?
                } else {
                    harmonic_schedule(beta)?
                }
            }
            ScheduleKind::Custom => {
                let alpha = self
                    .alpha
                    .as_ref()
                    .ok_or_else(|| anyhow::anyhow!("custom schedule needs \"alpha\""))?
                    .build()?;
                let beta = self
                    .beta
                    .as_ref()
                    .ok_or_else(|| anyhow::anyhow!("custom schedule needs \"beta\""))?
                    .build()?;
                Schedule::custom("custom", move |n| alpha(n), move |n| beta(n))
            }
        };
        let kinds = [
            ModulusKind::RateOfConvergence,
            ModulusKind::RateOfDivergence,
            ModulusKind::CauchyModulus,
            ModulusKind::CauchyModulus,
        ];
        let specs = [&self.sigma1, &self.sigma2, &self.sigma3, &self.sigma4];
        for (i, (spec, kind)) in specs.into_iter().zip(kinds).enumerate() {
            if let Some(spec) = spec {
                let m = spec.build(&format!("sigma{}", i + 1), kind);
                s = match i {
                    0 => s.with_sigma1(m),
                    1 => s.with_sigma2(m),
                    2 => s.with_sigma3(m),
                    _ => s.with_sigma4(m),
                };
            }
        }
        if let Some(l) = self.lambda {
            s = s.with_lambda(l);
        }
        Ok(s)
    }
}

fn default_n_max() -> u64 {
    10_000
}
fn default_k_max() -> u64 {
    200
}
fn default_budget() -> u64 {
    100_000
}
fn default_tol() -> f64 {
    1e-9
}
fn default_rate_tol() -> f64 {
    halmann_core::verify::RATE_TOL
}
fn default_samples() -> usize {
    10_000
}

/// One experiment: a problem, its schedule, and run/verification limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceDescriptor,
    #[serde(rename = "T")]
    pub t: MapSpec,
    #[serde(rename = "U")]
    pub u: MapSpec,
    #[serde(rename = "u")]
    pub anchor: Point,
    pub x0: Point,
    pub p: Point,
    pub schedule: ScheduleDescriptor,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    /// Largest index at which a rate is checked; verification runs
    /// `budget + 1` iterations.
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Slack for axioms, fixed points and trace inequalities.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Relative slack for rate checks.
    #[serde(default = "default_rate_tol")]
    pub rate_tol: f64,
    #[serde(default)]
    pub seed: u64,
    /// Samples for the axiom and nonexpansiveness checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k_bound: Option<Nat>,
    /// Output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Rates to tabulate; all applicable ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<String>>,
    /// Replacement rate functions, keyed by rate name (for example `"Σ1"`).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rate_overrides: BTreeMap<String, ModulusSpec>,
}

/// Command line overrides of config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub budget: Option<u64>,
    pub k_max: Option<u64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        let mut cfg =
            Self::from_json(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        if cfg.out.is_none() {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            cfg.out = Some(PathBuf::from("out").join(stem));
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(b) = o.budget {
            self.budget = b;
        }
        if let Some(k) = o.k_max {
            self.k_max = k;
        }
        if let Some(t) = o.tol {
            self.tol = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Builds and cross-validates the problem: map kinds against the space,
    /// point shapes, `p` fixed by both maps, `K ≥ M_p`.
    pub fn problem(&self) -> anyhow::Result<IterationProblem> {
        anyhow::ensure!(self.tol > 0.0, "tol must be positive");
        anyhow::ensure!(self.rate_tol >= 0.0, "rate_tol must be nonnegative");
        let space = self.space.build()?;
        let t = make_map(&space, &self.t).map_err(|e| anyhow::anyhow!("T: {e}"))?;
        let u = make_map(&space, &self.u).map_err(|e| anyhow::anyhow!("U: {e}"))?;
        let schedule = self.schedule.build()?;
        let mut problem = IterationProblem::new(
            space,
            t,
            u,
            self.anchor.clone(),
            self.x0.clone(),
            self.p.clone(),
            schedule,
            self.tol,
        )?;
        if let Some(k) = self.k_bound {
            problem = problem.with_k(k);
        }
        problem.k_bound()?;
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REAL_LINE: &str = r#"{
        "space": {"kind": "euclidean", "dim": 1},
        "T": {"kind": "homothety", "factor": -1.0},
        "U": {"kind": "identity"},
        "u": [1.0], "x0": [1.0], "p": [0.0],
        "schedule": {"kind": "canonical_linear", "beta": 0.5}
    }"#;

    #[test]
    fn parses_defaults() {
        let cfg = ExperimentConfig::from_json(REAL_LINE).unwrap();
        assert_eq!(cfg.n_max, 10_000);
        assert_eq!(cfg.variant, Variant::HalpernMann);
        let p = cfg.problem().unwrap();
        assert_eq!(p.k_bound().unwrap(), 1);
    }

    #[test]
    fn rejects_bad_beta() {
        let text = REAL_LINE.replace("\"beta\": 0.5", "\"beta\": 1.5");
        let err = ExperimentConfig::from_json(&text)
            .unwrap()
            .problem()
            .unwrap_err();
        assert!(
            err.to_string().contains("(0, 1)") || err.to_string().contains("(0,1)"),
            "{err}"
        );
    }

    #[test]
    fn rejects_unknown_fields_and_mismatches() {
        assert!(ExperimentConfig::from_json(&REAL_LINE.replace("\"x0\"", "\"x00\"")).is_err());
        let spider = REAL_LINE.replace(
            r#"{"kind": "euclidean", "dim": 1}"#,
            r#"{"kind": "spider", "rays": 3}"#,
        );
        assert!(ExperimentConfig::from_json(&spider)
            .unwrap()
            .problem()
            .is_err());
        let stray = REAL_LINE.replace(r#""dim": 1}"#, r#""dim": 1, "rays": 2}"#);
        assert!(ExperimentConfig::from_json(&stray)
            .unwrap()
            .problem()
            .is_err());
    }

    #[test]
    fn spider_points_parse() {
        let text = r#"{
            "space": {"kind": "spider", "rays": 3},
            "T": {"kind": "ray_permutation", "perm": [1, 2, 0]},
            "U": {"kind": "radial_scale", "lambda": 0.5},
            "u": {"ray": 0, "r": 1.0}, "x0": {"ray": 1, "r": 1.0}, "p": {"ray": 0, "r": 0.0},
            "schedule": {"kind": "harmonic", "beta": 0.25}
        }"#;
        let p = ExperimentConfig::from_json(text)
            .unwrap()
            .problem()
            .unwrap();
        assert_eq!(p.schedule.lambda, Some(4));
    }

    #[test]
    fn custom_schedule() {
        let d: ScheduleDescriptor = serde_json::from_str(
            r#"{"kind": "custom", "alpha": {"scale": 2.0, "shift": 2.0}, "beta": [0.3, 0.5], "sigma1": {"a": 2, "b": 0}, "Lambda": 4}"#,
        )
        .unwrap();
        let s = d.build().unwrap();
        assert_eq!(s.alpha(2), 0.5);
        assert_eq!(s.beta(7), 0.5);
        assert_eq!(s.sigma1.unwrap().eval(3).unwrap(), 6);
        assert_eq!(s.lambda, Some(4));
    }
}
