//! Experiment descriptions, read from TOML or JSON.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use kaczmarz_core::{Method, StopRule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemSpec {
    /// Nonuniform trigonometric sampling with bandwidth `r` (2r+1 unknowns).
    Trigpoly {
        m: usize,
        r: usize,
    },
    Gaussian {
        m: usize,
        n: usize,
    },
    /// Matrix from a Matrix Market file; the right-hand side comes from a seeded solution.
    Mtx {
        path: PathBuf,
    },
    /// Kronecker blur of an image file, or of the built-in phantom when `image` is absent.
    Deblur {
        #[serde(default)]
        image: Option<PathBuf>,
        #[serde(default = "default_phantom_size")]
        size: usize,
        r: usize,
        s: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Identity {
        n: usize,
    },
}

impl ProblemSpec {
    /// Generated problems draw a fresh matrix per trial unless redraws are disabled.
    pub fn is_generated(&self) -> bool {
        matches!(self, Self::Trigpoly { .. } | Self::Gaussian { .. } | Self::Identity { .. })
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Trigpoly { m, r } => format!("trigpoly m={m} r={r}"),
            Self::Gaussian { m, n } => format!("gaussian {m}x{n}"),
            Self::Mtx { path } => format!("mtx {}", path.display()),
            Self::Deblur { image: Some(p), r, s, sigma, .. } => {
                format!("deblur {} r={r} s={s} sigma={sigma}", p.display())
            }
            Self::Deblur { image: None, size, r, s, sigma } => {
                format!("deblur phantom {size}x{size} r={r} s={s} sigma={sigma}")
            }
            Self::Identity { n } => format!("identity {n}x{n}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    #[serde(with = "method_names")]
    pub methods: Vec<Method>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, with = "stop_rule_name")]
    pub stop_rule: StopRule,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Trial `t` uses seed `seed + t`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_check_every")]
    pub check_every: usize,
    /// Per-method wall-clock budget; `deblur` defaults to 60 s when unset.
    #[serde(default)]
    pub budget_seconds: Option<f64>,
    #[serde(default = "default_true")]
    pub redraw: bool,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Seeded trajectories averaged by `diagnose`.
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    /// Iterations per trajectory used for the decay fit.
    #[serde(default = "default_decay_window")]
    pub decay_window: usize,
}

fn default_phantom_size() -> usize {
    64
}
fn default_sigma() -> f64 {
    1.0
}
fn default_trials() -> usize {
    5
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    800_000
}
fn default_l() -> f64 {
    0.01
}
fn default_eta() -> f64 {
    0.1
}
fn default_check_every() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_trajectories() -> usize {
    2000
}
fn default_decay_window() -> usize {
    50
}

impl ExperimentSpec {
    pub fn new(problem: ProblemSpec, methods: Vec<Method>) -> Self {
        Self {
            problem,
            methods,
            trials: default_trials(),
            stop_rule: StopRule::Residual,
            tol: default_tol(),
            max_iter: default_max_iter(),
            seed: 0,
            l: default_l(),
            eta: default_eta(),
            check_every: default_check_every(),
            budget_seconds: None,
            redraw: true,
            out: default_out(),
            trajectories: default_trajectories(),
            decay_window: default_decay_window(),
        }
    }

    /// Reads a spec; `.json` files are parsed as JSON, everything else as TOML.
    /// Relative file paths inside the problem resolve against the spec's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut spec: Self = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        if let Some(dir) = path.parent() {
            spec.resolve_paths(dir);
        }
        Ok(spec)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        match &mut self.problem {
            ProblemSpec::Mtx { path } => fix(path),
            ProblemSpec::Deblur { image: Some(path), .. } => fix(path),
            _ => {}
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Checks everything that can fail before any solve starts.
    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials >= 1, "trials must be at least 1");
        ensure!(!self.methods.is_empty(), "methods must not be empty");
        ensure!(self.tol > 0.0 && self.tol.is_finite(), "tol must be positive");
        ensure!(self.max_iter >= 1, "max_iter must be at least 1");
        ensure!(self.l > 0.0 && self.l < 1.0, "l must lie in (0, 1)");
        ensure!(self.eta > 0.0 && self.eta < 1.0, "eta must lie in (0, 1)");
        ensure!(self.check_every >= 1, "check_every must be at least 1");
        ensure!(
            self.trajectories >= 1 && self.decay_window >= 2,
            "diagnose needs trajectories >= 1 and decay_window >= 2"
        );
        if let Some(b) = self.budget_seconds {
            ensure!(b >= 0.0 && b.is_finite(), "budget_seconds must be finite and nonnegative");
        }
        for (k, m) in self.methods.iter().enumerate() {
            ensure!(!self.methods[..k].contains(m), "method {m} listed twice");
        }
        match &self.problem {
            ProblemSpec::Trigpoly { m, r } => ensure!(*m >= 1, "trigpoly needs m >= 1 (r = {r})"),
            ProblemSpec::Gaussian { m, n } => ensure!(*m >= 1 && *n >= 1, "gaussian needs positive sizes"),
            ProblemSpec::Identity { n } => ensure!(*n >= 1, "identity needs n >= 1"),
            ProblemSpec::Mtx { path } => {
                ensure!(path.is_file(), "matrix file {} is not readable", path.display())
            }
            ProblemSpec::Deblur { image, size, sigma, .. } => {
                if let Some(p) = image {
                    ensure!(p.is_file(), "image file {} is not readable", p.display());
                } else {
                    ensure!(*size >= 1, "phantom size must be positive");
                }
                ensure!(*sigma > 0.0, "sigma must be positive");
            }
        }
        Ok(())
    }
}

/// Parses a comma-separated method list such as `GRK,TGRK`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Method>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    if methods.is_empty() {
        bail!("no methods given");
    }
    Ok(methods)
}

pub fn stop_rule_label(rule: StopRule) -> &'static str {
    match rule {
        StopRule::Residual => "residual",
        StopRule::RelativeError => "relative-error",
    }
}

pub fn parse_stop_rule(s: &str) -> Result<StopRule> {
    match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "residual" | "res" => Ok(StopRule::Residual),
        "relative-error" | "error" => Ok(StopRule::RelativeError),
        other => bail!("unknown stop rule `{other}` (expected `residual` or `relative-error`)"),
    }
}

mod method_names {
    use kaczmarz_core::Method;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(methods: &[Method], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(methods.iter().map(|m| m.name()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Method>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|s| s.parse().map_err(D::Error::custom)).collect()
    }
}

mod stop_rule_name {
    use kaczmarz_core::StopRule;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rule: &StopRule, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(super::stop_rule_label(*rule))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<StopRule, D::Error> {
        super::parse_stop_rule(&String::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_defaults() {
        let spec: ExperimentSpec = toml::from_str(
            r#"
            methods = ["grk", "TGRK"]
            [problem]
            kind = "trigpoly"
            m = 1000
            r = 50
            "#,
        )
        .unwrap();
        assert_eq!(spec.methods, vec![Method::Grk, Method::Tgrk]);
        assert_eq!(spec.trials, 5);
        assert_eq!(spec.max_iter, 800_000);
        assert_eq!(spec.stop_rule, StopRule::Residual);
        assert_eq!(spec.problem, ProblemSpec::Trigpoly { m: 1000, r: 50 });
        spec.validate().unwrap();
    }

    #[test]
    fn json_and_toml_agree() {
        let mut spec = ExperimentSpec::new(ProblemSpec::Gaussian { m: 10, n: 4 }, vec![Method::Srk, Method::Tsrk]);
        spec.stop_rule = StopRule::RelativeError;
        let back: ExperimentSpec = toml::from_str(&spec.to_toml().unwrap()).unwrap();
        let json: ExperimentSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        for s in [back, json] {
            assert_eq!(s.problem, spec.problem);
            assert_eq!(s.methods, spec.methods);
            assert_eq!(s.stop_rule, StopRule::RelativeError);
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        let err = toml::from_str::<ExperimentSpec>("methods = [\"XYZ\"]\n[problem]\nkind = \"identity\"\nn = 3\n");
        assert!(err.unwrap_err().to_string().contains("unknown method"));
        let mut spec = ExperimentSpec::new(ProblemSpec::Identity { n: 3 }, vec![Method::Rk]);
        spec.trials = 0;
        assert!(spec.validate().is_err());
        spec.trials = 1;
        spec.methods.push(Method::Rk);
        assert!(spec.validate().is_err());
        let spec = ExperimentSpec::new(ProblemSpec::Mtx { path: "/nonexistent.mtx".into() }, vec![Method::Rk]);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn method_lists() {
        assert_eq!(parse_methods("srk, tsrk,").unwrap(), vec![Method::Srk, Method::Tsrk]);
        assert!(parse_methods("srk,nope").is_err());
        assert!(parse_methods("").is_err());
        assert_eq!(parse_stop_rule("relative_error").unwrap(), StopRule::RelativeError);
    }
}
