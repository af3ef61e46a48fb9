//! Scenario registry and the shared run context.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conullity::library::standard_specs;
use conullity::{Interval, ModelSpec, Point};

use crate::config::RunConfig;
use crate::report::{Check, Section};

mod completeness;
mod foliate;
mod geodesics;
mod glue;
mod invariants;
mod leaf;
mod oracles;
mod warp;

pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub checks: &'static [&'static str],
    /// CSV files written, with their columns.
    pub tables: &'static [&'static str],
    run: Option<fn(&Context) -> Section>,
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "invariants",
        summary: "metric assembly, inverse, frame, positivity, field derivatives, Scal identity and nullity",
        checks: &[
            "field-derivatives",
            "positivity",
            "inverse",
            "frame",
            "scal-identity",
            "nullity",
            "nullity-control",
        ],
        tables: &[],
        run: Some(invariants::run),
    },
    ScenarioInfo {
        name: "curvature-oracles",
        summary: "Christoffel and Riemann closed forms, Frenet data, splitting tensor and plane curvatures",
        checks: &[
            "christoffel-oracles",
            "leaf-symbols",
            "riemann-xuu",
            "riemann-xuux",
            "frenet",
            "covariant-recursion",
            "splitting-nilpotent",
            "curvature-identities",
            "one-over-a1",
            "plane-sec",
            "nullity-planes",
        ],
        tables: &[],
        run: Some(oracles::run),
    },
    ScenarioInfo {
        name: "geodesics",
        summary: "geodesic integration, exponential-map coordinates and the derivative of the coordinate map",
        checks: &["exp-map", "speed-drift", "dphi", "dphi-inner-products"],
        tables: &["geodesic-<spec>-<k>.csv: arc,x,u,v_1..v_n,speed_error"],
        run: Some(geodesics::run),
    },
    ScenarioInfo {
        name: "completeness",
        summary: "completeness certificates and the Jacobi lower bound",
        checks: &["certificate", "jacobi-minimum"],
        tables: &[],
        run: Some(completeness::run),
    },
    ScenarioInfo {
        name: "warp",
        summary: "rotation ODE S' = S A and the warped-product form of the metric",
        checks: &["rotation-orthogonality", "rotation-drift", "warped-metric", "constant-f-matrix-exp"],
        tables: &[],
        run: Some(warp::run),
    },
    ScenarioInfo {
        name: "foliate",
        summary: "turning-angle curves in the hyperbolic plane and the orthogonal-geodesic foliation",
        checks: &[
            "curve-residuals",
            "unique-foot",
            "cosh-convexity",
            "closed-form-foot",
            "eta-extraction",
            "control-fails",
        ],
        tables: &["curve-<k>.csv: s,a,b,angle", "foot-<k>.csv: point_a,point_b,foot_s,distance"],
        run: Some(foliate::run),
    },
    ScenarioInfo {
        name: "glue",
        summary: "gluing along flat modifications: decay condition, smoothness probe, irreducibility",
        checks: &[
            "dagger-decay",
            "smoothness-probe",
            "family-inside",
            "modification-vanishes",
            "nullity-across",
            "irreducibility",
            "control-fails",
        ],
        tables: &["decay.csv: product_id,boundary,side,distance,value"],
        run: Some(glue::run),
    },
    ScenarioInfo {
        name: "leaf-invariant",
        summary: "the leaf invariant A(p, q): path independence, F_1 difference, zero within a leaf",
        checks: &["path-independence", "f1-difference", "within-leaf", "non-monotone-rejected"],
        tables: &[],
        run: Some(leaf::run),
    },
    ScenarioInfo {
        name: "all",
        summary: "every scenario above, in order",
        checks: &[],
        tables: &[],
        run: None,
    },
];

pub fn find(name: &str) -> Option<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name)
}

/// Runs a scenario (every scenario for `all`).
pub fn run(name: &str, ctx: &Context) -> Vec<Section> {
    match find(name).and_then(|s| s.run) {
        Some(f) => vec![f(ctx)],
        None => SCENARIOS
            .iter()
            .filter_map(|s| s.run)
            .map(|f| f(ctx))
            .collect(),
    }
}

pub struct Context {
    pub cfg: RunConfig,
    pub specs: Vec<(String, ModelSpec)>,
    /// Whether `specs` came from the config rather than the library sweep.
    pub custom_spec: bool,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, crate::config::ConfigError> {
        let (specs, custom_spec) = match &cfg.spec {
            Some(decl) => (vec![decl.build()?], true),
            None => (
                standard_specs()
                    .into_iter()
                    .map(|(n, s)| (n.to_string(), s))
                    .collect(),
                false,
            ),
        };
        Ok(Context {
            cfg,
            specs,
            custom_spec,
        })
    }

    /// Seed derived from the run seed and a tag (FNV-1a).
    pub fn seed(&self, tag: &str) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in tag.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^ self.cfg.seed
    }

    pub fn rng(&self, tag: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed(tag))
    }

    /// `x`-range from `range` clipped to the interior of the domain; the
    /// whole interior when they do not overlap.
    pub fn x_range(&self, spec: &ModelSpec, range: [f64; 2]) -> Interval {
        let dom = spec.domain();
        let margin = if dom.is_bounded() {
            0.05 * dom.width()
        } else {
            0.0
        };
        let clipped = Interval {
            lo: range[0].max(dom.lo + margin),
            hi: range[1].min(dom.hi - margin),
        };
        if clipped.lo < clipped.hi {
            clipped
        } else {
            Interval {
                lo: dom.lo + margin,
                hi: dom.hi - margin,
            }
        }
    }

    pub fn random_points(&self, spec: &ModelSpec, tag: &str, count: usize) -> Vec<Point> {
        let s = &self.cfg.sampling;
        let xr = self.x_range(spec, s.x_range);
        let mut rng = self.rng(tag);
        (0..count)
            .map(|_| {
                let x = rng.random_range(xr.lo..xr.hi);
                let u = rng.random_range(s.u_range[0]..s.u_range[1]);
                let v = (0..spec.n())
                    .map(|_| rng.random_range(s.v_range[0]..s.v_range[1]))
                    .collect();
                Point::new(x, u, v)
            })
            .collect()
    }
}

/// A failing check carrying the error that stopped it.
pub(crate) fn errored(name: &str, subject: &str, e: &conullity::Error) -> Check {
    Check::flag(name, subject, false, format!("error: {e}")).with_witness(Some(e.to_string()))
}

/// Folds per-point results into `(worst value, worst point)`, or the first error.
pub(crate) fn worst<T>(
    rows: Vec<conullity::Result<(f64, T)>>,
) -> conullity::Result<(f64, Option<T>)> {
    let mut best = (0.0_f64, None);
    for r in rows {
        let (v, at) = r?;
        if v > best.0 || v.is_nan() {
            best = (v, Some(at));
        }
    }
    Ok(best)
}

pub(crate) fn fmt_point(p: &Point) -> String {
    let v: Vec<String> = p.v.iter().map(|c| format!("{c:.6}")).collect();
    format!("(x, u, v) = ({:.6}, {:.6}, [{}])", p.x, p.u, v.join(", "))
}

/// Bound check from a fallible worst-case search, naming the worst point.
pub(crate) fn bound_at(
    name: &str,
    subject: &str,
    res: conullity::Result<(f64, Option<Point>)>,
    tol: f64,
) -> Check {
    match res {
        Ok((v, at)) => Check::bound(name, subject, v, tol)
            .with_witness(at.map(|p| format!("{v:.3e} at {}", fmt_point(&p)))),
        Err(e) => errored(name, subject, &e),
    }
}

type Pair = (
    Vec<conullity::Result<(f64, Point)>>,
    Vec<conullity::Result<(f64, Point)>>,
);

/// Splits two-valued per-point results into two series for [`worst`].
pub(crate) fn split2(rows: Vec<conullity::Result<(f64, f64, Point)>>) -> Pair {
    rows.into_iter()
        .map(|r| match r {
            Ok((a, b, p)) => (Ok((a, p.clone())), Ok((b, p))),
            Err(e) => (
                Err(conullity::Error::InvalidParameter(e.to_string())),
                Err(e),
            ),
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    #[test]
    fn every_runnable_scenario_is_listed_once() {
        for s in SCENARIOS {
            assert_eq!(find(s.name).map(|f| f.name), Some(s.name));
        }
        assert!(find("all").unwrap().run.is_none());
        assert!(find("nope").is_none());
    }

    #[test]
    fn seeds_depend_on_tag_and_seed() {
        let a = Context::new(parse("scenario = \"all\"\nseed = 1").unwrap()).unwrap();
        let b = Context::new(parse("scenario = \"all\"\nseed = 2").unwrap()).unwrap();
        assert_eq!(a.seed("x"), a.seed("x"));
        assert_ne!(a.seed("x"), a.seed("y"));
        assert_ne!(a.seed("x"), b.seed("x"));
    }

    #[test]
    fn no_spec_sweeps_the_library() {
        let ctx = Context::new(parse("scenario = \"all\"").unwrap()).unwrap();
        assert_eq!(ctx.specs.len(), 5);
        assert!(!ctx.custom_spec);
        let ctx =
            Context::new(parse("scenario = \"all\"\n[spec]\nlibrary = \"exp-linear\"").unwrap())
                .unwrap();
        assert_eq!(ctx.specs.len(), 1);
        assert!(ctx.custom_spec);
    }

    #[test]
    fn ranges_are_clipped_inside_bounded_domains() {
        let ctx = Context::new(parse("scenario = \"all\"").unwrap()).unwrap();
        let spec = conullity::library::standard_spec("bump-three").unwrap();
        let r = ctx.x_range(&spec, [-10.0, 10.0]);
        assert!(r.lo > -3.0 && r.hi < 3.0);
        let far = ctx.x_range(&spec, [5.0, 6.0]);
        assert!(far.lo < far.hi && far.hi < 3.0);
        for p in ctx.random_points(&spec, "t", 50) {
            assert!(r.contains_closed(p.x));
        }
    }
}
