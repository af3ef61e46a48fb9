//! Run configuration read from TOML.
//!
//! Every table rejects unknown keys, so a misspelled key is reported by name
//! instead of being silently ignored.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use conullity::fields::{
    builtin_ch_eta, builtin_flat_bump, constant, constant_2d, expr_1d, expr_2d, Polynomial,
    ScalarField1D, ScalarField2D, Sine,
};
use conullity::gluing::GlueSpec;
use conullity::library;
use conullity::{Interval, ModelSpec};

use crate::scenarios::SCENARIOS;

/// A configuration problem, tagged with the dotted key it concerns.
#[derive(Debug, thiserror::Error)]
#[error("config error at `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; the machine's parallelism when absent.
    pub workers: Option<usize>,
    pub spec: Option<SpecDecl>,
    #[serde(default)]
    pub glue: GlueDecl,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub geodesics: GeodesicGrid,
    #[serde(default)]
    pub warp: WarpGrid,
    #[serde(default)]
    pub certificate: CertificateDecl,
    #[serde(default)]
    pub foliation: FoliationDecl,
    #[serde(default)]
    pub leaf: LeafGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_seed() -> u64 {
    42
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("conullity-out")
}

/// A scalar field of `x` (or of arc length `s` for turning angles).
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldDecl {
    Constant {
        value: f64,
    },
    Expr {
        expr: String,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    FlatBump {
        center: f64,
        radius: f64,
        amplitude: f64,
    },
}

impl FieldDecl {
    pub fn build(&self, key: &str) -> Result<ScalarField1D, ConfigError> {
        let err = |e: conullity::Error| ConfigError::new(key, e.to_string());
        Ok(match self {
            FieldDecl::Constant { value } => constant(*value),
            FieldDecl::Expr { expr } => expr_1d(expr).map_err(err)?,
            FieldDecl::Polynomial { coeffs } => Arc::new(Polynomial::new(coeffs.clone())),
            FieldDecl::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => Arc::new(Sine {
                amplitude: *amplitude,
                frequency: *frequency,
                phase: *phase,
                offset: *offset,
            }),
            FieldDecl::FlatBump {
                center,
                radius,
                amplitude,
            } => builtin_flat_bump(*center, *radius, *amplitude).map_err(err)?,
        })
    }
}

/// `η(x, u)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaDecl {
    Constant {
        value: f64,
    },
    Expr {
        expr: String,
    },
    /// `cosh u + k_γ(x) sinh u`.
    CurvatureHomogeneous {
        k_gamma: FieldDecl,
    },
}

impl EtaDecl {
    pub fn build(&self, key: &str) -> Result<ScalarField2D, ConfigError> {
        let err = |e: conullity::Error| ConfigError::new(key, e.to_string());
        match self {
            EtaDecl::Constant { value } => Ok(constant_2d(*value)),
            EtaDecl::Expr { expr } => expr_2d(expr).map_err(err),
            EtaDecl::CurvatureHomogeneous { k_gamma } => {
                builtin_ch_eta(k_gamma.build(&format!("{key}.k_gamma"))?).map_err(err)
            }
        }
    }
}

/// Either a library member by name or explicit `f` and `eta`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDecl {
    pub name: Option<String>,
    pub library: Option<String>,
    pub f: Option<Vec<FieldDecl>>,
    pub eta: Option<EtaDecl>,
    /// `[c1, c2]`; `[-inf, inf]` when absent.
    pub domain: Option<[f64; 2]>,
}

impl SpecDecl {
    pub fn build(&self) -> Result<(String, ModelSpec), ConfigError> {
        if let Some(lib) = &self.library {
            if self.f.is_some() || self.eta.is_some() || self.domain.is_some() {
                return Err(ConfigError::new(
                    "spec.library",
                    "`library` cannot be combined with `f`, `eta` or `domain`",
                ));
            }
            let spec = library::standard_spec(lib).ok_or_else(|| {
                let names: Vec<&str> = library::standard_specs().iter().map(|(n, _)| *n).collect();
                ConfigError::new(
                    "spec.library",
                    format!("unknown member `{lib}`; known: {}", names.join(", ")),
                )
            })?;
            return Ok((self.name.clone().unwrap_or_else(|| lib.clone()), spec));
        }
        let f = self
            .f
            .as_ref()
            .ok_or_else(|| ConfigError::new("spec.f", "missing (or give `spec.library`)"))?;
        if f.is_empty() {
            return Err(ConfigError::new("spec.f", "need at least one field"));
        }
        let fields = f
            .iter()
            .enumerate()
            .map(|(i, d)| d.build(&format!("spec.f[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let eta = self
            .eta
            .as_ref()
            .ok_or_else(|| ConfigError::new("spec.eta", "missing (or give `spec.library`)"))?
            .build("spec.eta")?;
        let domain = match self.domain {
            None => Interval::real_line(),
            Some([lo, hi]) => {
                Interval::new(lo, hi).map_err(|e| ConfigError::new("spec.domain", e.to_string()))?
            }
        };
        let spec = ModelSpec::new(fields, eta, domain)
            .map_err(|e| ConfigError::new("spec", e.to_string()))?;
        Ok((self.name.clone().unwrap_or_else(|| "custom".into()), spec))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlueDecl {
    /// `flat-bump` or `order-two-control`.
    pub library: String,
    /// Cantor depth for `flat-bump`.
    pub depth: usize,
    /// Also run the order-two negative control and expect it to fail.
    pub control: bool,
    /// Boundary points examined by the decay check; all when absent.
    pub dagger_points: Option<usize>,
    pub probe_points: usize,
    pub probe_order: usize,
    pub k_max: usize,
    pub ab_max: usize,
    pub factors_max: usize,
    pub m_min: u32,
    pub m_max: u32,
    pub u_box: [f64; 2],
    pub u_samples: usize,
    /// Half-width of the `x` window for the irreducibility proxy.
    pub window: f64,
}

impl Default for GlueDecl {
    fn default() -> Self {
        Self {
            library: "flat-bump".into(),
            depth: 2,
            control: true,
            dagger_points: None,
            probe_points: 5,
            probe_order: 4,
            k_max: 6,
            ab_max: 4,
            factors_max: 2,
            m_min: 3,
            m_max: 20,
            u_box: [-1.0, 1.0],
            u_samples: 5,
            window: 3.0,
        }
    }
}

impl GlueDecl {
    pub fn build(&self) -> Result<GlueSpec, ConfigError> {
        let glue = match self.library.as_str() {
            "flat-bump" => library::flat_bump_glue(self.depth),
            "order-two-control" => library::order_two_control_glue(),
            other => {
                return Err(ConfigError::new(
                    "glue.library",
                    format!("unknown glue `{other}`; known: flat-bump, order-two-control"),
                ))
            }
        };
        glue.map_err(|e| ConfigError::new("glue", e.to_string()))
    }
}

/// Random point sampling shared by the pointwise suites.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub points: usize,
    /// Points for the Christoffel oracle comparison.
    pub christoffel_points: usize,
    pub planes: usize,
    pub x_range: [f64; 2],
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
    pub fd_points: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            points: 200,
            christoffel_points: 500,
            planes: 100,
            x_range: [-2.0, 2.0],
            u_range: [-1.0, 1.0],
            v_range: [-1.5, 1.5],
            fd_points: 32,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeodesicGrid {
    pub step: f64,
    pub length: f64,
    /// Trajectories exported per spec.
    pub trajectories: usize,
    /// Random initial vectors `w` for the exponential-map check.
    pub exp_samples: usize,
    pub max_norm: f64,
    pub dphi_points: usize,
    pub export_every: usize,
}

impl Default for GeodesicGrid {
    fn default() -> Self {
        Self {
            step: 1e-3,
            length: 5.0,
            trajectories: 3,
            exp_samples: 40,
            max_norm: 10.0,
            dphi_points: 20,
            export_every: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WarpGrid {
    pub x_range: [f64; 2],
    pub step: f64,
    pub samples: usize,
}

impl Default for WarpGrid {
    fn default() -> Self {
        Self {
            x_range: [0.0, 10.0],
            step: 1e-3,
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateDecl {
    pub x_window: f64,
    pub x_count: usize,
    pub u_range: [f64; 2],
    pub u_count: usize,
    pub lambda: Option<f64>,
    /// Number of `c` values for the Jacobi minimum check.
    pub c_values: usize,
}

impl Default for CertificateDecl {
    fn default() -> Self {
        Self {
            x_window: 10.0,
            x_count: 201,
            u_range: [-3.0, 3.0],
            u_count: 61,
            lambda: None,
            c_values: 50,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FoliationDecl {
    /// Turning angles; each is checked to foliate.
    pub turning: Vec<FieldDecl>,
    /// Turning angles expected to fail (negative controls).
    pub controls: Vec<FieldDecl>,
    pub s_range: [f64; 2],
    pub step: f64,
    pub samples: usize,
    /// Sample region in Fermi coordinates: curve parameter and distance.
    pub region_s: [f64; 2],
    pub region_u: [f64; 2],
    pub export_every: usize,
}

impl Default for FoliationDecl {
    fn default() -> Self {
        Self {
            turning: vec![
                FieldDecl::Constant { value: 0.0 },
                FieldDecl::Expr {
                    expr: "sin(s)".into(),
                },
            ],
            controls: vec![FieldDecl::Polynomial {
                coeffs: vec![0.0, 1.5],
            }],
            s_range: [-8.0, 8.0],
            step: 1e-2,
            samples: 500,
            region_s: [-2.0, 2.0],
            region_u: [-1.0, 1.0],
            export_every: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LeafGrid {
    pub x_range: [f64; 2],
    pub paths: usize,
}

impl Default for LeafGrid {
    fn default() -> Self {
        Self {
            x_range: [-1.0, 1.5],
            paths: 4,
        }
    }
}

/// Pass thresholds; every one may be overridden.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub scal_rel: f64,
    pub nullity: f64,
    pub control_nullity: f64,
    pub christoffel: f64,
    pub leaf_symbols: f64,
    pub inverse: f64,
    pub riemann: f64,
    pub frenet: f64,
    pub covariant: f64,
    pub one_over_a1: f64,
    pub frame: f64,
    pub field_fd: f64,
    pub exp_map: f64,
    pub dphi: f64,
    pub inner_products: f64,
    pub speed_drift: f64,
    pub rotation_drift: f64,
    pub warped: f64,
    pub matrix_exp: f64,
    pub jacobi_min: f64,
    pub foot: f64,
    pub leaf_invariant: f64,
    pub plane_sec: f64,
    pub nullity_plane: f64,
    pub eta_extraction: f64,
    pub rotation_drift_per_unit: f64,
    pub modification: f64,
    pub within_leaf: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            scal_rel: 1e-5,
            nullity: 1e-6,
            control_nullity: 1e-3,
            christoffel: 1e-9,
            leaf_symbols: 1e-12,
            inverse: 1e-10,
            riemann: 1e-6,
            frenet: 1e-12,
            covariant: 1e-9,
            one_over_a1: 1e-8,
            frame: 1e-10,
            field_fd: 1e-4,
            exp_map: 1e-7,
            dphi: 1e-6,
            inner_products: 1e-8,
            speed_drift: 1e-8,
            rotation_drift: 1e-8,
            warped: 1e-7,
            matrix_exp: 1e-7,
            jacobi_min: 1e-6,
            foot: 1e-6,
            leaf_invariant: 1e-8,
            plane_sec: 1e-6,
            nullity_plane: 1e-10,
            eta_extraction: 1e-6,
            rotation_drift_per_unit: 1e-6,
            modification: 1e-12,
            within_leaf: 1e-12,
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let key = match unknown_key(&message) {
            Some(k) => match enclosing_table(text, &e) {
                Some(t) => format!("{t}.{k}"),
                None => k,
            },
            None => located_key(text, &e),
        };
        ConfigError::new(key, message)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

/// The last `[table]` header before the error location.
fn enclosing_table(text: &str, e: &toml::de::Error) -> Option<String> {
    let end = e.span()?.start.min(text.len());
    text[..end].lines().rev().find_map(|line| {
        let line = line.trim();
        let inner = line.strip_prefix('[')?.split(']').next()?;
        Some(inner.trim_matches(['[', ']']).trim().to_string())
    })
}

/// The key on the line the parser points at, or `<document>`.
fn located_key(text: &str, e: &toml::de::Error) -> String {
    e.span()
        .and_then(|span| {
            let line_start = text[..span.start.min(text.len())]
                .rfind('\n')
                .map_or(0, |i| i + 1);
            let line = text[line_start..].lines().next()?;
            let key = line.split('=').next()?.trim().trim_matches(['[', ']']);
            (!key.is_empty()).then(|| key.to_string())
        })
        .unwrap_or_else(|| "<document>".into())
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if !SCENARIOS.iter().any(|s| s.name == self.scenario) {
            let names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
            return Err(ConfigError::new(
                "scenario",
                format!(
                    "unknown scenario `{}`; known: {}",
                    self.scenario,
                    names.join(", ")
                ),
            ));
        }
        if self.workers == Some(0) {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        if let Some(spec) = &self.spec {
            spec.build()?;
        }
        if matches!(self.scenario.as_str(), "glue" | "all") {
            self.glue.build()?;
        }
        let positive = [
            ("geodesics.step", self.geodesics.step),
            ("geodesics.length", self.geodesics.length),
            ("warp.step", self.warp.step),
            ("foliation.step", self.foliation.step),
            ("certificate.x_window", self.certificate.x_window),
            ("glue.window", self.glue.window),
        ];
        for (key, v) in positive {
            if !(v > 0.0) {
                return Err(ConfigError::new(key, format!("must be > 0, got {v}")));
            }
        }
        let ranges = [
            ("sampling.x_range", self.sampling.x_range),
            ("sampling.u_range", self.sampling.u_range),
            ("sampling.v_range", self.sampling.v_range),
            ("warp.x_range", self.warp.x_range),
            ("certificate.u_range", self.certificate.u_range),
            ("foliation.s_range", self.foliation.s_range),
            ("foliation.region_s", self.foliation.region_s),
            ("foliation.region_u", self.foliation.region_u),
            ("leaf.x_range", self.leaf.x_range),
            ("glue.u_box", self.glue.u_box),
        ];
        for (key, [lo, hi]) in ranges {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ConfigError::new(
                    key,
                    format!("need finite lo < hi, got [{lo}, {hi}]"),
                ));
            }
        }
        if self.glue.probe_order > 4 {
            return Err(ConfigError::new("glue.probe_order", "at most 4"));
        }
        if self.glue.m_min > self.glue.m_max {
            return Err(ConfigError::new("glue.m_min", "must not exceed glue.m_max"));
        }
        if self.certificate.x_count < 2 || self.certificate.u_count < 2 {
            return Err(ConfigError::new(
                "certificate.x_count",
                "grid counts must be at least 2",
            ));
        }
        for (i, t) in self.foliation.turning.iter().enumerate() {
            t.build(&format!("foliation.turning[{i}]"))?;
        }
        for (i, t) in self.foliation.controls.iter().enumerate() {
            t.build(&format!("foliation.controls[{i}]"))?;
        }
        if self.leaf.paths < 3 {
            return Err(ConfigError::new("leaf.paths", "need at least 3 paths"));
        }
        let s = self.foliation.s_range;
        if !(s[0] < 0.0 && s[1] > 0.0) {
            return Err(ConfigError::new(
                "foliation.s_range",
                "must contain 0 in its interior",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = parse("scenario = \"invariants\"").unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.sampling.points, 200);
        assert_eq!(cfg.tolerances.scal_rel, 1e-5);
        assert!(cfg.spec.is_none());
    }

    #[test]
    fn unknown_top_level_key_is_named() {
        let e = parse("scenario = \"all\"\nsede = 3").unwrap_err();
        assert_eq!(e.key, "sede");
    }

    #[test]
    fn unknown_nested_key_carries_table() {
        let e = parse("scenario = \"all\"\n[sampling]\npoints = 10\npointz = 3\n").unwrap_err();
        assert_eq!(e.key, "sampling.pointz");
    }

    #[test]
    fn unknown_scenario_lists_known_ones() {
        let e = parse("scenario = \"nope\"").unwrap_err();
        assert_eq!(e.key, "scenario");
        assert!(e.message.contains("invariants"));
    }

    #[test]
    fn explicit_spec_builds() {
        let text = r#"
scenario = "completeness"
[spec]
name = "ch"
f = [{ kind = "constant", value = 1.0 }, { kind = "sine", amplitude = 0.5, frequency = 2.0 }]
eta = { kind = "curvature_homogeneous", k_gamma = { kind = "constant", value = 0.5 } }
"#;
        let cfg = parse(text).unwrap();
        let (name, spec) = cfg.spec.unwrap().build().unwrap();
        assert_eq!(name, "ch");
        assert_eq!(spec.n(), 2);
    }

    #[test]
    fn bad_expression_is_keyed_by_field() {
        let text = r#"
scenario = "invariants"
[spec]
f = [{ kind = "constant", value = 1.0 }, { kind = "expr", expr = "sin(" }]
eta = { kind = "expr", expr = "exp(u)" }
"#;
        let e = parse(text).unwrap_err();
        assert_eq!(e.key, "spec.f[1]");
    }

    #[test]
    fn unknown_field_kind_is_rejected() {
        let text = r#"
scenario = "invariants"
[spec]
f = [{ kind = "wiggle", value = 1.0 }]
eta = { kind = "expr", expr = "exp(u)" }
"#;
        let e = parse(text).unwrap_err();
        assert!(e.message.contains("wiggle"), "{}", e.message);
    }

    #[test]
    fn library_excludes_explicit_fields() {
        let text =
            "scenario = \"invariants\"\n[spec]\nlibrary = \"ch-cosine\"\ndomain = [0.0, 1.0]\n";
        assert_eq!(parse(text).unwrap_err().key, "spec.library");
        let ok = parse("scenario = \"invariants\"\n[spec]\nlibrary = \"ch-cosine\"\n").unwrap();
        assert_eq!(ok.spec.unwrap().build().unwrap().0, "ch-cosine");
    }

    #[test]
    fn ranges_and_counts_are_validated() {
        let e = parse("scenario = \"warp\"\n[warp]\nx_range = [3.0, 1.0]\n").unwrap_err();
        assert_eq!(e.key, "warp.x_range");
        let e = parse("scenario = \"warp\"\nworkers = 0\n").unwrap_err();
        assert_eq!(e.key, "workers");
        let e = parse("scenario = \"glue\"\n[glue]\nprobe_order = 5\n").unwrap_err();
        assert_eq!(e.key, "glue.probe_order");
        let e = parse("scenario = \"leaf-invariant\"\n[leaf]\npaths = 2\n").unwrap_err();
        assert_eq!(e.key, "leaf.paths");
    }

    #[test]
    fn type_errors_point_at_the_key() {
        let e = parse("scenario = \"all\"\nseed = \"abc\"\n").unwrap_err();
        assert_eq!(e.key, "seed");
    }
}
