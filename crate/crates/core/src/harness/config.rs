use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Field, Interval, ModelParams, SpatialGrid, State, Variant};
use crate::profiles::{AnalyticFamily, BoundaryData, BoundarySignal, Table};
use crate::solver::{Manufactured, NumericsConfig, RunSpec};

fn default_domain() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub variant: Variant,
    pub gamma: f64,
    #[serde(default = "default_domain")]
    pub domain: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

/// One boundary signal: an analytic family or a two-column `t,value` CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalSpec {
    Constant { value: f64 },
    OnePlusExpDecay { c: f64, lambda: f64 },
    ExpDecay { c: f64, lambda: f64 },
    DampedOscillation { c: f64, lambda: f64, omega: f64 },
    OnePlusAlgebraicDecay { c: f64, lambda: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub alpha1: SignalSpec,
    pub alpha2: SignalSpec,
    pub beta1: Option<SignalSpec>,
    pub beta2: Option<SignalSpec>,
}

fn one() -> u32 {
    1
}

/// Initial profile of one unknown. `x̂ = (x-a)/(b-a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant {
        value: f64,
    },
    /// Affine interpolant of the field's boundary data at `t = 0` plus
    /// `amplitude·sin(mode·π·x̂)`; compatible by construction.
    BoundaryProfile {
        #[serde(default)]
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    /// `left + (right-left)·x̂ + amplitude·sin(mode·π·x̂)`
    AffineSine {
        left: f64,
        right: f64,
        #[serde(default)]
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    /// `mean + amplitude·cos(mode·π·x̂)`
    Cosine {
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    /// Two-column `x,value` CSV, linearly re-interpolated onto the grid.
    Table {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub u: InitialSpec,
    pub v: InitialSpec,
}

/// A scenario file. When `manufactured` is set the boundary and initial
/// sections are ignored and the smooth exact solution is used instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub boundary: Option<BoundarySpec>,
    #[serde(default)]
    pub initial: Option<InitialSection>,
    pub numerics: NumericsConfig,
    pub diagnostics_cadence: usize,
    /// Relative to the output root; defaults to `name`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub manufactured: bool,
}

/// Parsed config text, kept as a TOML tree so individual fields can be
/// overridden before the scenario is built.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSource {
    pub origin: String,
    pub value: toml::Table,
    /// Directory that relative table paths resolve against.
    pub base_dir: Option<PathBuf>,
}

impl ScenarioSource {
    pub fn parse(text: &str, origin: impl Into<String>, base_dir: Option<PathBuf>) -> Result<Self> {
        let origin = origin.into();
        let value: toml::Table =
            text.parse().map_err(|e: toml::de::Error| Error::Config { path: origin.clone(), message: e.to_string() })?;
        let src = ScenarioSource { origin, value, base_dir };
        src.scenario()?;
        Ok(src)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.display().to_string(), path.parent().map(Path::to_path_buf))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let sc: Scenario = toml::Value::Table(self.value.clone())
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config { path: self.origin.clone(), message: e.to_string() })?;
        sc.validate().map_err(|e| Error::Config { path: self.origin.clone(), message: e.to_string() })?;
        Ok(sc)
    }

    /// Replaces the numeric field at a dotted path such as `model.gamma` or
    /// `boundary.alpha1.lambda`. Integer fields stay integers.
    pub fn with_override(&self, dotted: &str, value: f64) -> Result<Self> {
        let out = self.with_raw_override(dotted, value)?;
        out.scenario()?;
        Ok(out)
    }

    /// As [`with_override`](Self::with_override) without validating the
    /// resulting scenario.
    pub fn with_raw_override(&self, dotted: &str, value: f64) -> Result<Self> {
        let mut out = self.clone();
        let err = |m: String| Error::Config { path: self.origin.clone(), message: m };
        let keys: Vec<&str> = dotted.split('.').collect();
        let (last, parents) = keys.split_last().ok_or_else(|| err("empty axis path".into()))?;
        let mut table = &mut out.value;
        for k in parents {
            table = table
                .get_mut(*k)
                .and_then(toml::Value::as_table_mut)
                .ok_or_else(|| err(format!("axis path `{dotted}`: no table `{k}`")))?;
        }
        let slot = table.get_mut(*last).ok_or_else(|| err(format!("axis path `{dotted}` does not exist")))?;
        *slot = match slot {
            toml::Value::Integer(_) => {
                if value.fract() != 0.0 {
                    return Err(err(format!("`{dotted}` is an integer field, got {value}")));
                }
                toml::Value::Integer(value as i64)
            }
            toml::Value::Float(_) => toml::Value::Float(value),
            _ => return Err(err(format!("`{dotted}` is not a numeric field"))),
        };
        Ok(out)
    }

    /// Builds the run request, reading any referenced tables.
    pub fn run_spec(&self) -> Result<RunSpec> {
        self.scenario()?.run_spec(self.base_dir.as_deref())
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.model_params()?;
        SpatialGrid::on(self.domain()?, self.grid.n)?;
        self.numerics.validate()?;
        if self.diagnostics_cadence == 0 {
            return Err(Error::InvalidParams("diagnostics_cadence must be >= 1".into()));
        }
        if !self.manufactured {
            let b = self.boundary.as_ref().ok_or_else(|| Error::InvalidParams("missing [boundary] section".into()))?;
            if self.initial.is_none() {
                return Err(Error::InvalidParams("missing [initial] section".into()));
            }
            let has_beta = b.beta1.is_some() && b.beta2.is_some();
            if b.beta1.is_some() != b.beta2.is_some() {
                return Err(Error::InvalidParams("beta1 and beta2 must be given together".into()));
            }
            if self.model.variant == Variant::ParabolicParabolic && !has_beta {
                return Err(Error::MissingBetaSignals);
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Interval> {
        Interval::new(self.model.domain[0], self.model.domain[1])
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.model.variant, self.model.gamma, self.domain()?)
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::on(self.domain()?, self.grid.n)
    }

    pub fn output_subdir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(&self.name))
    }

    pub fn run_spec(&self, base_dir: Option<&Path>) -> Result<RunSpec> {
        self.validate()?;
        let params = self.model_params()?;
        let grid = self.grid()?;
        if self.manufactured {
            let m = Manufactured::new(params.domain, params.gamma, params.variant);
            let mut spec = RunSpec::new(params, m.boundary(), m.state(grid, 0.0), self.numerics, self.diagnostics_cadence);
            spec.source = Some(Arc::new(m));
            return Ok(spec);
        }
        let b = self.boundary.as_ref().expect("validated");
        let signal = |s: &SignalSpec| build_signal(s, base_dir);
        let beta = match (&b.beta1, &b.beta2) {
            (Some(b1), Some(b2)) if !params.variant.is_hyperbolic() => Some((signal(b1)?, signal(b2)?)),
            _ => None,
        };
        let bd = BoundaryData::new(signal(&b.alpha1)?, signal(&b.alpha2)?, beta)?;
        let init = self.initial.as_ref().expect("validated");
        let u0 = build_initial(&init.u, grid, base_dir, Some((bd.alpha1.value(0.0), bd.alpha2.value(0.0))))?;
        let v_ends = bd.beta.as_ref().map(|(b1, b2)| (b1.value(0.0), b2.value(0.0)));
        let v0 = build_initial(&init.v, grid, base_dir, v_ends)?;
        let state = State::new(0.0, u0, v0)?;
        Ok(RunSpec::new(params, bd, state, self.numerics, self.diagnostics_cadence))
    }
}

fn resolve(path: &Path, base_dir: Option<&Path>) -> PathBuf {
    match base_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Reads a headered two-column numeric CSV.
pub fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let bad = |message: String| Error::Csv { path: path.to_path_buf(), message };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.len() != 2 {
            return Err(bad(format!("row {} has {} columns, expected 2", line + 2, row.len())));
        }
        let parse = |i: usize| row[i].trim().parse::<f64>().map_err(|e| bad(format!("row {}: {e}", line + 2)));
        a.push(parse(0)?);
        b.push(parse(1)?);
    }
    Ok((a, b))
}

fn build_signal(s: &SignalSpec, base_dir: Option<&Path>) -> Result<BoundarySignal> {
    let f = match *s {
        SignalSpec::Constant { value } => AnalyticFamily::Constant { value },
        SignalSpec::OnePlusExpDecay { c, lambda } => AnalyticFamily::OnePlusExpDecay { c, lambda },
        SignalSpec::ExpDecay { c, lambda } => AnalyticFamily::ExpDecay { c, lambda },
        SignalSpec::DampedOscillation { c, lambda, omega } => AnalyticFamily::DampedOscillation { c, lambda, omega },
        SignalSpec::OnePlusAlgebraicDecay { c, lambda } => AnalyticFamily::OnePlusAlgebraicDecay { c, lambda },
        SignalSpec::Table { ref path } => {
            let (t, v) = read_two_columns(&resolve(path, base_dir))?;
            return Ok(BoundarySignal::Tabulated(Table::new(t, v)?));
        }
    };
    Ok(f.into())
}

fn build_initial(spec: &InitialSpec, grid: SpatialGrid, base_dir: Option<&Path>, ends: Option<(f64, f64)>) -> Result<Field> {
    use std::f64::consts::PI;
    let values: Vec<f64> = match *spec {
        InitialSpec::Constant { value } => vec![value; grid.n],
        InitialSpec::BoundaryProfile { amplitude, mode } => {
            let (l, r) =
                ends.ok_or_else(|| Error::InvalidParams("boundary-profile needs boundary data for this field".into()))?;
            affine_sine(grid, l, r, amplitude, mode)
        }
        InitialSpec::AffineSine { left, right, amplitude, mode } => affine_sine(grid, left, right, amplitude, mode),
        InitialSpec::Cosine { mean, amplitude, mode } => {
            (0..grid.n).map(|i| mean + amplitude * (mode as f64 * PI * grid.unit_coordinate(i)).cos()).collect()
        }
        InitialSpec::Table { ref path } => {
            let (xs, vs) = read_two_columns(&resolve(path, base_dir))?;
            let tab = Table::new(xs, vs)?;
            (0..grid.n).map(|i| tab.value(grid.x(i))).collect()
        }
    };
    Field::new(grid, values)
}

fn affine_sine(grid: SpatialGrid, left: f64, right: f64, amplitude: f64, mode: u32) -> Vec<f64> {
    (0..grid.n)
        .map(|i| {
            let th = grid.unit_coordinate(i);
            // sin(kπ) is not exactly zero; keep the endpoints exact
            let bump = if i == 0 || i + 1 == grid.n { 0.0 } else { amplitude * (mode as f64 * std::f64::consts::PI * th).sin() };
            (1.0 - th) * left + th * right + bump
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
diagnostics_cadence = 10
[model]
variant = "parabolic-parabolic"
gamma = 1.0
[grid]
n = 21
[numerics]
dt = 0.001
t_end = 0.1
[boundary.alpha1]
family = "one-plus-exp-decay"
c = 0.5
lambda = 1.0
[boundary.alpha2]
family = "constant"
value = 1.0
[boundary.beta1]
family = "constant"
value = 0.0
[boundary.beta2]
family = "constant"
value = 0.0
[initial.u]
kind = "boundary-profile"
amplitude = 0.1
[initial.v]
kind = "constant"
value = 0.0
"#;

    #[test]
    fn parses_and_builds() {
        let src = ScenarioSource::parse(BASE, "base", None).unwrap();
        let spec = src.run_spec().unwrap();
        assert_eq!(spec.initial.u.first(), 1.5);
        assert_eq!(spec.initial.u.last(), 1.0);
        assert_eq!(spec.cadence, 10);
    }

    #[test]
    fn missing_gamma_names_the_field() {
        let text = BASE.replace("gamma = 1.0\n", "");
        match ScenarioSource::parse(&text, "cfg.toml", None) {
            Err(Error::Config { path, message }) => {
                assert_eq!(path, "cfg.toml");
                assert!(message.contains("gamma"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let text = BASE.replace("n = 21", "n = 21\nm = 3");
        assert!(matches!(ScenarioSource::parse(&text, "x", None), Err(Error::Config { .. })));
    }

    #[test]
    fn override_keeps_types() {
        let src = ScenarioSource::parse(BASE, "base", None).unwrap();
        let o = src.with_override("model.gamma", 2.0).unwrap();
        assert_eq!(o.scenario().unwrap().model.gamma, 2.0);
        let o = src.with_override("grid.n", 41.0).unwrap();
        assert_eq!(o.scenario().unwrap().grid.n, 41);
        assert!(src.with_override("grid.n", 41.5).is_err());
        assert!(src.with_override("model.nope", 1.0).is_err());
        assert!(src.with_override("model.variant", 1.0).is_err());
        let o = src.with_override("boundary.alpha1.lambda", 0.0).unwrap();
        assert_eq!(o.scenario().unwrap().boundary.unwrap().alpha1, SignalSpec::OnePlusExpDecay { c: 0.5, lambda: 0.0 });
    }

    #[test]
    fn tables_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a1.csv"), "t,value\n0,1.5\n1,1.0\n").unwrap();
        std::fs::write(dir.path().join("u0.csv"), "x,value\n0,1.5\n1,1.0\n").unwrap();
        let text = BASE
            .replace("family = \"one-plus-exp-decay\"\nc = 0.5\nlambda = 1.0", "family = \"table\"\npath = \"a1.csv\"")
            .replace("kind = \"boundary-profile\"\namplitude = 0.1", "kind = \"table\"\npath = \"u0.csv\"");
        let p = dir.path().join("s.toml");
        std::fs::write(&p, text).unwrap();
        let spec = ScenarioSource::load(&p).unwrap().run_spec().unwrap();
        assert!(spec.boundary.has_tabulated());
        assert!((spec.initial.u.values[10] - 1.25).abs() < 1e-15);
        assert_eq!(spec.boundary.alpha1.derivative(0.5), -0.5);
    }

    #[test]
    fn manufactured_needs_no_sections() {
        let text = r#"
name = "m"
diagnostics_cadence = 10
manufactured = true
[model]
variant = "parabolic-hyperbolic"
gamma = 2.0
[grid]
n = 11
[numerics]
dt = 0.001
t_end = 0.01
"#;
        let spec = ScenarioSource::parse(text, "m", None).unwrap().run_spec().unwrap();
        assert!(spec.source.is_some());
        assert!(spec.boundary.beta.is_none());
    }
}
