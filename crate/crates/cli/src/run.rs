//! Dispatch of a parsed scenario to the library and assembly of its report.

use reebkit::certify::{
    certify_katok, certify_persist, certify_prequantization, certify_sphere, cross_validate, BundleData, Certificate,
    CrossVerdict, FactorBounds, NondegeneracyCheck, PersistOptions, TheoremId, MIN_SEEDS_PER_DIM,
};
use reebkit::constellation::build;
use reebkit::dynamics::ScanOptions;
use reebkit::geometry::{ConformalFactor, FactorSpec, HomotopyClass, ModelManifold, DEFAULT_FACTOR_GRID};
use reebkit::plug::{
    choose_parameters, delta_bound, gray_bounds, locate_orbit, make_spec, verify_contact, GrayGrid, ParameterOptions,
    PlugGrid,
};
use reebkit::profiles::abar;
use reebkit::spectrum::{analytic_spectrum, numeric_spectrum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::{Command, NondegeneracyMode, PlugSection, Scenario, SpectrumMode};

/// Command-line settings that take precedence over scenario fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub cap: Option<f64>,
    pub filled: bool,
    pub seed_grid: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Valid,
    Invalid,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub command: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
}

type Outcome = Result<(Value, bool), String>;

pub fn run(s: &Scenario, label: &str, o: &Overrides) -> Report {
    let outcome = match s.command {
        Command::Spectrum => spectrum(s, o),
        Command::Constellation => constellation(s, o),
        Command::Certify => certify(s, o),
        Command::Profile => profile(s, o),
        Command::Plug => plug(s.plug.as_ref().expect("checked at parse time"), o),
    };
    let (status, error, result) = match outcome {
        Ok((v, true)) => (Status::Valid, None, Some(v)),
        Ok((v, false)) => (Status::Invalid, None, Some(v)),
        Err(e) => (Status::Error, Some(e), None),
    };
    Report { scenario: label.into(), name: s.name.clone(), command: s.command.to_string(), status, error, result }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, String> {
    serde_json::to_value(v).map_err(err)
}

fn model(s: &Scenario) -> Result<ModelManifold, String> {
    let kind = s.model.clone().ok_or("field `model` is required")?;
    ModelManifold::new(kind).map_err(err)
}

fn factor(s: &Scenario, m: &ModelManifold, o: &Overrides) -> Result<ConformalFactor, String> {
    let spec = s.factor.clone().unwrap_or(FactorSpec::Constant { value: 1.0 });
    let grid = o.grid.or(s.factor_grid).unwrap_or(DEFAULT_FACTOR_GRID);
    ConformalFactor::with_grid(m, spec, grid).map_err(err)
}

fn class(s: &Scenario) -> HomotopyClass {
    s.class.clone().unwrap_or(HomotopyClass::Trivial)
}

/// Spectrum cap: flag, then scenario, then 3T + 1 (enough for T⁺ and the
/// action window T_min + T_min(α) of every catalog constellation).
fn cap(s: &Scenario, o: &Overrides) -> f64 {
    o.cap.or(s.cap).unwrap_or_else(|| 3.0 * s.t.unwrap_or(3.0) + 1.0)
}

fn scan_options(s: &Scenario, o: &Overrides) -> ScanOptions {
    let mut opts = ScanOptions {
        seeds_per_dim: o.seed_grid.or(s.scan.seeds_per_dim).unwrap_or(MIN_SEEDS_PER_DIM),
        ..ScanOptions::default()
    };
    if let Some(m) = s.scan.max_seeds {
        opts.max_seeds = m;
    }
    if let Some(t) = o.tol.or(s.tol) {
        opts.shooting.integrator.tol = t;
    }
    opts
}

fn spectrum(s: &Scenario, o: &Overrides) -> Outcome {
    let m = model(s)?;
    let f = factor(s, &m, o)?;
    let sp = match s.spectrum.mode {
        SpectrumMode::Analytic => {
            if !f.is_constant() {
                return Err("an analytic spectrum needs a constant factor; use `spectrum.mode = \"numeric\"`".into());
            }
            analytic_spectrum(&m, cap(s, o)).map_err(err)?.scaled(f.min())
        }
        SpectrumMode::Numeric => {
            let [lo, hi] = s.spectrum.window.expect("checked at parse time");
            numeric_spectrum(&f, &class(s), (lo, hi), &scan_options(s, o)).map_err(err)?
        }
    };
    Ok((to_value(&sp)?, true))
}

fn constellation(s: &Scenario, o: &Overrides) -> Outcome {
    let m = model(s)?;
    let sp = analytic_spectrum(&m, cap(s, o)).map_err(err)?;
    let c = build(Some(&m), &class(s), s.t.expect("checked at parse time"), &sp).map_err(err)?;
    Ok((to_value(&c)?, c.is_rigid()))
}

fn profile(s: &Scenario, o: &Overrides) -> Outcome {
    let m = model(s)?;
    let sp = analytic_spectrum(&m, cap(s, o)).map_err(err)?;
    let c = build(Some(&m), &class(s), s.t.expect("checked at parse time"), &sp).map_err(err)?;
    if !c.is_rigid() {
        return Ok((json!({ "constellation": c }), false));
    }
    let r = abar(&c, &sp, s.profile.kappa0, s.profile.kappa1).map_err(err)?;
    let ok = r.at_half.finely_tuned;
    Ok((json!({ "constellation": c, "abar": r }), ok))
}

fn bounds(s: &Scenario, o: &Overrides) -> Result<FactorBounds, String> {
    match s.theorem.as_ref().and_then(|t| t.f_range) {
        Some([lo, hi]) => FactorBounds::exact(lo, hi).map_err(err),
        None => Ok(FactorBounds::of(&factor(s, &model(s)?, o)?)),
    }
}

fn certify(s: &Scenario, o: &Overrides) -> Outcome {
    let th = s.theorem.as_ref().expect("checked at parse time");
    let filled = th.filled || o.filled;
    let mut cert: Certificate = match th.id {
        TheoremId::ElSphere => certify_sphere(&model(s)?, bounds(s, o)?).map_err(err)?,
        TheoremId::Prequantization => {
            let bundle = BundleData {
                dim_q: th.dim_q.expect("checked at parse time"),
                order: th.order.expect("checked at parse time"),
                primitive: th.primitive.unwrap_or(false),
            };
            certify_prequantization(bundle, bounds(s, o)?, filled).map_err(err)?
        }
        TheoremId::Katok => certify_katok(
            th.epsilon.expect("checked at parse time"),
            th.n.expect("checked at parse time"),
            bounds(s, o)?,
        )
        .map_err(err)?,
        TheoremId::Fast => {
            let (v, ok) = plug(s.plug.as_ref().expect("checked at parse time"), o)?;
            return Ok((v, ok));
        }
        id => {
            let m = model(s)?;
            let f = factor(s, &m, o)?;
            let sp = analytic_spectrum(&m, cap(s, o)).map_err(err)?;
            let nondegeneracy = match th.nondegeneracy {
                NondegeneracyMode::Assume => NondegeneracyCheck::Assume,
                NondegeneracyMode::Sample => NondegeneracyCheck::Sample(scan_options(s, o)),
            };
            let opts = PersistOptions { filled, nondegeneracy };
            let cert =
                certify_persist(&m, &class(s), s.t.expect("checked at parse time"), &f, &sp, &opts).map_err(err)?;
            if id != TheoremId::Persist && id != cert.theorem {
                return Err(format!(
                    "theorem {id:?} does not apply to {}; it falls under {:?}",
                    m.name(),
                    cert.theorem
                ));
            }
            cert
        }
    };
    if th.cross_validate && cert.cross_validation.is_none() {
        if s.model.is_none() {
            return Err("cross-validation needs a model and factor".into());
        }
        let m = model(s)?;
        let f = factor(s, &m, o)?;
        cert.cross_validation = Some(cross_validate(&cert, &f, &scan_options(s, o)));
    }
    let cross_ok = cert.cross_validation.as_ref().is_none_or(|cv| cv.verdict != CrossVerdict::Fail);
    let ok = cert.valid_for(filled) && cross_ok;
    Ok((to_value(&cert)?, ok))
}

fn plug_grids(o: &Overrides, dimension: usize, s_grid: Option<usize>) -> (PlugGrid, GrayGrid) {
    let mut contact = PlugGrid::default();
    let mut gray = GrayGrid::default_for(dimension);
    if let Some(n) = o.grid {
        contact = PlugGrid { tx: n, rho: (n / 8).max(4) };
        gray.space = contact;
    }
    if let Some(sg) = s_grid {
        gray.s = sg;
    }
    (contact, gray)
}

fn plug(p: &PlugSection, o: &Overrides) -> Outcome {
    let (contact_grid, gray_grid) = plug_grids(o, p.dimension, p.s_grid);
    if let (Some(c1), Some(c2)) = (p.c1, p.c2) {
        let opts = ParameterOptions { contact_grid, gray_grid: Some(gray_grid), ..ParameterOptions::default() };
        let r = choose_parameters(c1, c2, p.dimension, &opts).map_err(err)?;
        let ok = r.certificate.valid;
        return Ok((to_value(&r)?, ok));
    }
    let (e, d) = (p.epsilon.expect("checked at parse time"), p.delta.expect("checked at parse time"));
    let spec = make_spec(e, d, p.dimension).map_err(err)?;
    let cap = delta_bound(&spec, &PlugGrid::coarse()).map_err(err)?;
    let contact = verify_contact(&spec, &contact_grid).map_err(err)?;
    let orbit = locate_orbit(&spec, &contact_grid).map_err(err)?;
    let gray = gray_bounds(&spec, &gray_grid).map_err(err)?;
    let ok = contact.inner_ok
        && orbit.quadrature_ok
        && orbit.unique_on_grid
        && orbit.kernel_ok
        && gray.grid_factor_bound < gray.factor_bound;
    let v = json!({ "spec": spec, "cap": cap, "contact": contact, "orbit": orbit, "gray": gray });
    Ok((v, ok))
}
