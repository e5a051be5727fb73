//! Run configuration: a small TOML document.
//!
//! ```toml
//! problem = "robin"            # dirichlet | robin | auxiliary
//! checks = ["positivity", "linf"]
//! output_dir = "out"
//! seed = 7
//! samples = 20
//!
//! [domain]
//! omega = [-1.0, 1.0]
//! order = 0.5
//! n_interior = 64
//! n_exterior = 64
//! truncation_radius = 2.0
//!
//! [time]
//! horizon = 1.0
//! dt = 0.015625
//!
//! [data.source]
//! preset = "bump"
//! center = 0.0
//! radius = 0.5
//! amplitude = 1.0
//! rate = -1.0                  # optional factor e^{rate t}
//! ```
//!
//! `[data.exterior]` and `[data.initial]` take the same keys. Missing data
//! sections mean zero. The optional `[compare.*]` sections give the upper
//! data of a comparison run; unset ones fall back to `[data.*]`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::Variant;
use crate::data::{Preset, ProblemData};
use crate::error::{Error, Result};
use crate::kernel::FracParams;
use crate::mesh::{build_mesh, Mesh};
use crate::solver::{TimeGrid, TrajectoryKind};
use crate::verify::CHECK_NAMES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Dirichlet,
    Robin,
    /// The auxiliary Robin problem, with `ζ` and `η` given directly.
    Auxiliary,
}

impl Problem {
    pub fn variant(&self) -> Variant {
        match self {
            Problem::Dirichlet => Variant::Dirichlet,
            _ => Variant::Robin,
        }
    }

    pub fn kind(&self) -> TrajectoryKind {
        match self {
            Problem::Dirichlet => TrajectoryKind::Dirichlet,
            Problem::Robin => TrajectoryKind::Robin,
            Problem::Auxiliary => TrajectoryKind::AuxiliaryRobin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub omega: [f64; 2],
    pub order: f64,
    pub n_interior: usize,
    #[serde(default)]
    pub n_exterior: usize,
    #[serde(default)]
    pub truncation_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

impl PresetSpec {
    pub fn zero() -> Self {
        Self {
            preset: "zero".into(),
            value: None,
            center: None,
            radius: None,
            amplitude: None,
            coefficients: None,
            rate: None,
        }
    }

    /// The preset, or a diagnostic naming the offending key under `path`.
    pub fn to_preset(&self, path: &str) -> std::result::Result<Preset, (String, String)> {
        let err = |key: &str, reason: String| Err((format!("{path}.{key}"), reason));
        let need = |key: &str, v: Option<f64>| -> std::result::Result<f64, (String, String)> {
            match v {
                Some(x) if x.is_finite() => Ok(x),
                Some(x) => Err((format!("{path}.{key}"), format!("must be finite, got {x}"))),
                None => Err((
                    format!("{path}.{key}"),
                    format!("required by preset `{}`", self.preset),
                )),
            }
        };
        let allowed: &[&str] = match self.preset.as_str() {
            "zero" => &[],
            "constant" => &["value"],
            "bump" => &["center", "radius", "amplitude"],
            "polynomial" => &["coefficients"],
            other => {
                return err(
                    "preset",
                    format!("unknown preset `{other}` (zero, constant, bump, polynomial)"),
                )
            }
        };
        let present = [
            ("value", self.value.is_some()),
            ("center", self.center.is_some()),
            ("radius", self.radius.is_some()),
            ("amplitude", self.amplitude.is_some()),
            ("coefficients", self.coefficients.is_some()),
        ];
        for (key, set) in present {
            if set && !allowed.contains(&key) {
                return err(key, format!("not used by preset `{}`", self.preset));
            }
        }
        let base = match self.preset.as_str() {
            "zero" => Preset::Zero,
            "constant" => Preset::Constant(need("value", self.value)?),
            "bump" => {
                let radius = need("radius", self.radius)?;
                if radius <= 0.0 {
                    return err("radius", format!("must be positive, got {radius}"));
                }
                Preset::Bump {
                    center: need("center", self.center)?,
                    radius,
                    amplitude: need("amplitude", self.amplitude)?,
                }
            }
            _ => {
                let c = self.coefficients.clone().unwrap_or_default();
                if c.is_empty() {
                    return err("coefficients", "need at least one coefficient".into());
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return err("coefficients", "must be finite".into());
                }
                Preset::Polynomial(c)
            }
        };
        Ok(match self.rate {
            None => base,
            Some(r) if r.is_finite() => Preset::Modulated {
                rate: r,
                inner: Box::new(base),
            },
            Some(r) => return err("rate", format!("must be finite, got {r}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default = "PresetSpec::zero")]
    pub source: PresetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exterior: Option<PresetSpec>,
    #[serde(default = "PresetSpec::zero")]
    pub initial: PresetSpec,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            source: PresetSpec::zero(),
            exterior: None,
            initial: PresetSpec::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<PresetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exterior: Option<PresetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<PresetSpec>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Randomized runs per property sweep.
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub domain: DomainConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
}

/// Line (1-based) where `path` (`section.key` or `key`) is set in `text`.
fn locate(text: &str, path: &str) -> Option<usize> {
    let (section, key) = match path.rfind('.') {
        Some(i) => (&path[..i], &path[i + 1..]),
        None => ("", path),
    };
    let mut current = String::new();
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = h.trim().to_string();
            if current == path {
                return Some(n + 1);
            }
            continue;
        }
        if current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of(text, s.start)),
            field: "syntax".into(),
            reason: e.message().to_string(),
        })?;
        cfg.validate().map_err(|(field, reason)| Error::Config {
            line: locate(text, &field),
            field,
            reason,
        })?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: None,
            field: "config".into(),
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// Checks every field against the preconditions of the module it feeds.
    /// Errors carry the dotted field path.
    pub fn validate(&self) -> std::result::Result<(), (String, String)> {
        let bad = |f: &str, r: String| Err((f.to_string(), r));
        if self.seed > i64::MAX as u64 {
            return bad(
                "seed",
                format!("TOML integers stop at {}, got {}", i64::MAX, self.seed),
            );
        }
        let d = &self.domain;
        if !(d.order > 0.0 && d.order < 1.0) {
            return bad(
                "domain.order",
                format!("must lie in (0, 1), got {}", d.order),
            );
        }
        let [a, b] = d.omega;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return bad("domain.omega", format!("need finite a < b, got [{a}, {b}]"));
        }
        if d.n_interior < 2 {
            return bad(
                "domain.n_interior",
                format!("need at least 2, got {}", d.n_interior),
            );
        }
        if self.problem != Problem::Dirichlet && d.n_exterior == 0 {
            return bad(
                "domain.n_exterior",
                "the Robin problems need a collar (n_exterior ≥ 1)".into(),
            );
        }
        if d.n_exterior > 0 && !(d.truncation_radius > 0.0 && d.truncation_radius.is_finite()) {
            return bad(
                "domain.truncation_radius",
                format!(
                    "must be positive with a collar, got {}",
                    d.truncation_radius
                ),
            );
        }
        if let Err(Error::InvalidParameter { name, reason }) =
            TimeGrid::new(self.time.horizon, self.time.dt)
        {
            return bad(
                if name == "dt" {
                    "time.dt"
                } else {
                    "time.horizon"
                },
                reason,
            );
        }
        if self.samples == 0 {
            return bad("samples", "need at least one sample".into());
        }
        for c in &self.checks {
            if !CHECK_NAMES.contains(&c.as_str()) {
                return bad(
                    "checks",
                    format!("unknown check `{c}`; known: {}", CHECK_NAMES.join(", ")),
                );
            }
        }
        self.data.source.to_preset("data.source")?;
        self.data.initial.to_preset("data.initial")?;
        if let Some(g) = &self.data.exterior {
            if self.problem == Problem::Dirichlet {
                return bad(
                    "data.exterior",
                    "the Dirichlet problem takes no exterior datum".into(),
                );
            }
            g.to_preset("data.exterior")?;
        }
        if let Some(c) = &self.compare {
            for (name, spec) in [
                ("source", &c.source),
                ("exterior", &c.exterior),
                ("initial", &c.initial),
            ] {
                if let Some(p) = spec {
                    p.to_preset(&format!("compare.{name}"))?;
                }
            }
            if c.exterior.is_some() && self.problem == Problem::Dirichlet {
                return bad(
                    "compare.exterior",
                    "the Dirichlet problem takes no exterior datum".into(),
                );
            }
        }
        Ok(())
    }

    /// The configuration as TOML; parsing it back gives `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize")
    }

    pub fn params(&self) -> Result<FracParams> {
        FracParams::one_d(self.domain.order)
    }

    pub fn mesh(&self) -> Result<Mesh> {
        self.mesh_refined(1)
    }

    /// The mesh with every element split `factor` times.
    pub fn mesh_refined(&self, factor: usize) -> Result<Mesh> {
        let d = &self.domain;
        build_mesh(
            (d.omega[0], d.omega[1]),
            d.n_interior * factor,
            d.truncation_radius,
            d.n_exterior * factor,
        )
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.time.horizon, self.time.dt)
    }

    fn build_data(
        &self,
        source: &PresetSpec,
        exterior: Option<&PresetSpec>,
        initial: &PresetSpec,
    ) -> Result<ProblemData> {
        let p = |spec: &PresetSpec, path: &str| {
            spec.to_preset(path)
                .map_err(|(field, reason)| Error::Config {
                    line: None,
                    field,
                    reason,
                })
        };
        let f = p(source, "data.source")?.space_time();
        let rho0 = p(initial, "data.initial")?.point_field();
        Ok(match self.problem {
            Problem::Dirichlet => ProblemData::dirichlet(f, rho0),
            _ => {
                let zero = PresetSpec::zero();
                let g = p(exterior.unwrap_or(&zero), "data.exterior")?.space_time();
                ProblemData::robin(f, g, rho0)
            }
        })
    }

    pub fn problem_data(&self) -> Result<ProblemData> {
        self.build_data(
            &self.data.source,
            self.data.exterior.as_ref(),
            &self.data.initial,
        )
    }

    /// Upper data for a comparison run, if `[compare.*]` is set.
    pub fn compare_data(&self) -> Result<Option<ProblemData>> {
        let Some(c) = &self.compare else {
            return Ok(None);
        };
        let d = &self.data;
        self.build_data(
            c.source.as_ref().unwrap_or(&d.source),
            c.exterior.as_ref().or(d.exterior.as_ref()),
            c.initial.as_ref().unwrap_or(&d.initial),
        )
        .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
problem = "robin"
checks = ["positivity"]

[domain]
omega = [-1.0, 1.0]
order = 0.5
n_interior = 8
n_exterior = 4
truncation_radius = 1.0

[time]
horizon = 1.0
dt = 0.125

[data.source]
preset = "bump"
center = 0.0
radius = 0.5
amplitude = 1.0
rate = -1.0

[data.initial]
preset = "constant"
value = 0.5
"#;

    fn field_of(text: &str) -> (Option<usize>, String) {
        match RunConfig::parse(text) {
            Err(Error::Config { line, field, .. }) => (line, field),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::parse(BASE).unwrap();
        assert_eq!(cfg.problem, Problem::Robin);
        assert_eq!(cfg.samples, 20);
        assert_eq!(cfg.grid().unwrap().n_steps(), 8);
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        let d = cfg.problem_data().unwrap();
        assert!((d.source.eval(0.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(d.exterior().unwrap().eval(3.0, 0.0), 0.0);
        assert!(cfg.compare_data().unwrap().is_none());
    }

    #[test]
    fn diagnostics_name_field_and_line() {
        assert_eq!(
            field_of(&BASE.replace("order = 0.5", "order = 1.3")),
            (Some(7), "domain.order".into())
        );
        assert_eq!(
            field_of(&BASE.replace("n_exterior = 4", "n_exterior = 0")).1,
            "domain.n_exterior"
        );
        assert_eq!(
            field_of(&BASE.replace("dt = 0.125", "dt = 0.3")).1,
            "time.dt"
        );
        assert_eq!(
            field_of(&BASE.replace("\"positivity\"", "\"nope\"")).1,
            "checks"
        );
        assert_eq!(
            field_of(&BASE.replace("radius = 0.5", "radius = -0.5")).1,
            "data.source.radius"
        );
        assert_eq!(
            field_of(&BASE.replace("value = 0.5", "center = 0.5")).1,
            "data.initial.center"
        );
        assert_eq!(
            field_of(&BASE.replace("order = 0.5", "order = \"x\"")).1,
            "syntax"
        );
        assert_eq!(
            field_of(&BASE.replace("seed", "bogus").replace("checks", "bogus")).1,
            "syntax"
        );
    }

    #[test]
    fn dirichlet_rejects_exterior_data() {
        let text =
            BASE.replace("\"robin\"", "\"dirichlet\"") + "\n[data.exterior]\npreset = \"zero\"\n";
        assert_eq!(field_of(&text).1, "data.exterior");
    }

    #[test]
    fn compare_sections_fall_back_to_data() {
        let text = BASE.to_string() + "\n[compare.source]\npreset = \"constant\"\nvalue = 2.0\n";
        let cfg = RunConfig::parse(&text).unwrap();
        let hi = cfg.compare_data().unwrap().unwrap();
        assert_eq!(hi.source.eval(0.3, 0.0), 2.0);
        assert_eq!(hi.initial.eval(0.3), 0.5);
    }
}
