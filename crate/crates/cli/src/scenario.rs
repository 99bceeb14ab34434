//! Scenario files: strict JSON schema, defaults and validation.

use std::fs;
use std::path::{Path, PathBuf};

use laxlab_core::laxpair::{CLOSED_FORM_THRESHOLD, SAMPLED_THRESHOLD};
use laxlab_core::{CoefficientSet, Family, GridSpec, SecondFormCoeffs};
use serde::{Deserialize, Serialize};

use crate::Command;

/// Where partial derivatives come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivatives {
    /// Closed forms when the family provides them, stencils otherwise.
    #[default]
    Auto,
    /// Always use stencils on the sampled values.
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Pass bound on every structure and Lax residual (`verify`).
    pub residual: f64,
    /// Threshold for the constraint factors; defaults by family.
    pub branch_threshold: Option<f64>,
    /// Guard on `|cos(φ/2)|`, `|sin(φ/2)|` for the degeneracy warning.
    pub degeneracy_guard: f64,
    /// Relative bound on the discrete Gaussian curvature (`reconstruct`).
    pub curvature: f64,
    /// Optional bound on the solver's max error against the exact solution (`solve`).
    pub solver_error: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-6,
            branch_threshold: None,
            degeneracy_guard: 0.05,
            curvature: 0.02,
            solver_error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Bound on `Δt / Δx`.
    pub cfl: f64,
    /// Number of time steps; defaults to `nt - 1`.
    pub steps: Option<usize>,
    /// Write every `snapshot_stride`-th level to `phi.csv`.
    pub snapshot_stride: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { cfl: laxlab_core::sine_gordon::DEFAULT_CFL, steps: None, snapshot_stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructOptions {
    /// Factor applied to `u23` before integrating (1 leaves the data compatible).
    pub perturb_u23: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions { perturb_u23: 1.0 }
    }
}

/// A refinement level: `N` (an `N x N` grid) or `[nx, nt]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Square(usize),
    Pair([usize; 2]),
}

impl Resolution {
    pub fn dims(self) -> (usize, usize) {
        match self {
            Resolution::Square(n) => (n, n),
            Resolution::Pair([nx, nt]) => (nx, nt),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportOptions {
    pub resolutions: Vec<Resolution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub family: Family,
    pub grid: GridSpec,
    #[serde(default)]
    pub derivatives: Derivatives,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub reconstruct: ReconstructOptions,
    #[serde(default)]
    pub report: ReportOptions,
}

/// Input problem: reported on one line, exit code 2.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

fn invalid(key: &str, reason: impl std::fmt::Display) -> InvalidInput {
    InvalidInput(format!("{key}: {reason}"))
}

impl Scenario {
    /// Parse, fill defaults and validate for `command`.
    ///
    /// Relative CSV paths are resolved against the scenario file's directory;
    /// `out_override` replaces the `out` key.
    pub fn load(path: &Path, command: Command, out_override: Option<PathBuf>) -> Result<Scenario, InvalidInput> {
        let text = fs::read_to_string(path).map_err(|e| invalid("scenario", format!("{}: {e}", path.display())))?;
        let mut scenario = Scenario::parse(&text)?;
        if let Family::CustomCsv { path: csv } = &mut scenario.family {
            if csv.is_relative() {
                *csv = path.parent().unwrap_or(Path::new("")).join(&*csv);
            }
        }
        if out_override.is_some() {
            scenario.out = out_override;
        }
        scenario.resolve();
        scenario.validate(command)?;
        Ok(scenario)
    }

    pub fn parse(text: &str) -> Result<Scenario, InvalidInput> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." { "scenario".to_string() } else { key };
            invalid(&key, e.into_inner())
        })
    }

    /// Replace every `None` default with its concrete value.
    pub fn resolve(&mut self) {
        let t = &mut self.tolerances;
        t.branch_threshold.get_or_insert(if self.family.is_closed_form() {
            CLOSED_FORM_THRESHOLD
        } else {
            SAMPLED_THRESHOLD
        });
        self.solve.steps.get_or_insert(self.grid.nt() - 1);
        self.out.get_or_insert_with(|| PathBuf::from("out"));
    }

    fn validate(&self, command: Command) -> Result<(), InvalidInput> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive and finite (got {v})")))
            }
        };
        let t = &self.tolerances;
        positive("tolerances.residual", t.residual)?;
        positive("tolerances.branch_threshold", t.branch_threshold.unwrap_or(CLOSED_FORM_THRESHOLD))?;
        positive("tolerances.degeneracy_guard", t.degeneracy_guard)?;
        positive("tolerances.curvature", t.curvature)?;
        if let Some(e) = t.solver_error {
            positive("tolerances.solver_error", e)?;
        }
        if !self.reconstruct.perturb_u23.is_finite() {
            return Err(invalid("reconstruct.perturb_u23", "must be finite"));
        }
        match command {
            Command::Solve => {
                if !matches!(self.family, Family::Zero | Family::SineGordonKink(_)) {
                    return Err(invalid(
                        "family.name",
                        format!(
                            "solve needs sine-Gordon initial data (zero or sine_gordon_kink), got {}",
                            self.family.name()
                        ),
                    ));
                }
                positive("solve.cfl", self.solve.cfl)?;
                if self.solve.snapshot_stride == 0 {
                    return Err(invalid("solve.snapshot_stride", "must be at least 1"));
                }
                let steps = self.solve.steps.unwrap_or(self.grid.nt() - 1);
                if steps < 2 || steps >= self.grid.nt() {
                    return Err(invalid(
                        "solve.steps",
                        format!("must lie in [2, {}] (got {steps})", self.grid.nt() - 1),
                    ));
                }
            }
            Command::Report => {
                if matches!(self.family, Family::CustomCsv { .. }) {
                    return Err(invalid(
                        "family.name",
                        "report resamples the family and cannot refine custom_csv data",
                    ));
                }
                if self.report.resolutions.len() < 2 {
                    return Err(invalid(
                        "report.resolutions",
                        format!("needs at least 2 resolutions (got {})", self.report.resolutions.len()),
                    ));
                }
                for (i, r) in self.report.resolutions.iter().enumerate() {
                    let (nx, nt) = r.dims();
                    self.grid.with_resolution(nx, nt).map_err(|e| invalid(&format!("report.resolutions[{i}]"), e))?;
                }
            }
            Command::Verify | Command::Reconstruct => {}
        }
        Ok(())
    }

    pub fn out_dir(&self) -> &Path {
        self.out.as_deref().unwrap_or(Path::new("out"))
    }

    pub fn branch_threshold(&self) -> f64 {
        self.tolerances.branch_threshold.unwrap_or(CLOSED_FORM_THRESHOLD)
    }

    /// Sample the family on `grid`, dropping closed forms when stencils are requested.
    pub fn sample(&self, grid: &GridSpec) -> laxlab_core::Result<(CoefficientSet, SecondFormCoeffs)> {
        let (c, s) = laxlab_core::sample_family(&self.family, grid)?;
        Ok(match self.derivatives {
            Derivatives::Auto => (c, s),
            Derivatives::FiniteDifference => (c.sampled_only(), s.sampled_only()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINK: &str = r#"{
        "family": {"name": "sine_gordon_kink", "v": 0.0},
        "grid": {"x_min": -2, "x_max": 2, "nx": 41, "t_min": 0, "t_max": 1, "nt": 11}
    }"#;

    #[test]
    fn defaults_are_filled() {
        let mut s = Scenario::parse(KINK).unwrap();
        s.resolve();
        assert_eq!(s.tolerances.branch_threshold, Some(CLOSED_FORM_THRESHOLD));
        assert_eq!(s.solve.steps, Some(10));
        assert_eq!(s.derivatives, Derivatives::Auto);
        assert_eq!(s.out_dir(), Path::new("out"));
        s.validate(Command::Verify).unwrap();
    }

    #[test]
    fn unknown_keys_name_their_location() {
        let text = KINK.replace("\"v\": 0.0", "\"v\": 0.0, \"h111\": 2");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("h111"), "{err}");
        let text = KINK.replace("\"nt\": 11", "\"nt\": 11, \"dt\": 1");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.starts_with("grid"), "{err}");
        assert!(err.contains("dt"), "{err}");
        let text = KINK.replace("\"family\"", "\"tolerance\": {}, \"family\"");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("tolerance"), "{err}");
    }

    #[test]
    fn invalid_values_name_their_key() {
        let err = Scenario::parse(&KINK.replace("\"nx\": 41", "\"nx\": 1")).unwrap_err().to_string();
        assert!(err.starts_with("grid") && err.contains("nx"), "{err}");
        let err = Scenario::parse(&KINK.replace("\"v\": 0.0", "\"v\": 1.5")).unwrap_err().to_string();
        assert!(err.starts_with("family"), "{err}");
        let err = Scenario::parse(&KINK.replace("sine_gordon_kink", "breather")).unwrap_err().to_string();
        assert!(err.contains("breather"), "{err}");
    }

    #[test]
    fn command_specific_checks() {
        let mut s = Scenario::parse(KINK).unwrap();
        s.resolve();
        let err = s.validate(Command::Report).unwrap_err().to_string();
        assert!(err.starts_with("report.resolutions"), "{err}");
        s.report.resolutions = vec![Resolution::Square(11), Resolution::Pair([21, 2])];
        let err = s.validate(Command::Report).unwrap_err().to_string();
        assert!(err.starts_with("report.resolutions[1]"), "{err}");
        s.solve.snapshot_stride = 0;
        assert!(s.validate(Command::Solve).unwrap_err().to_string().starts_with("solve.snapshot_stride"));

        let mut c = Scenario::parse(
            &KINK.replace(r#""name": "sine_gordon_kink", "v": 0.0"#, r#""name": "constant", "u12": 1"#),
        )
        .unwrap();
        c.resolve();
        assert!(c.validate(Command::Solve).unwrap_err().to_string().starts_with("family.name"));
        c.tolerances.residual = -1.0;
        assert!(c.validate(Command::Verify).unwrap_err().to_string().starts_with("tolerances.residual"));
    }

    #[test]
    fn resolved_scenario_round_trips() {
        let mut s = Scenario::parse(KINK).unwrap();
        s.resolve();
        let text = serde_json::to_string_pretty(&s).unwrap();
        assert_eq!(Scenario::parse(&text).unwrap(), s);
    }
}
