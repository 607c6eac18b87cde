//! Semi-plug in the flow box λ₀ = dt + x dθ (+ κ₀ in higher dimension):
//! the deformed forms λ_{δ,ε} = (1 − δ𝒜)dt + ℬ dθ, their contact
//! condition, the inserted fast orbit on {t = 0, x = ε}, Gray-stability
//! bounds on the resulting conformal factor, and the parameter choice that
//! certifies a fast orbit for given (c₁, c₂).
//!
//! Coordinates are (t, x, θ, q₁, p₁, …, q_{n−2}, p_{n−2}) with θ of period
//! 2π and ρ = |z|²/2.

mod bumps;
mod form;
mod gray;
mod params;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bumps::{bell, plateau, step, Bumps, Jet, Partials, CUT_OFF, CUT_ON, SPIKE_WIDTH, STEP_BETA};
pub use form::{
    delta_bound, locate_orbit, verify_contact, ContactReport, DeltaBound, HatValues, OrbitReport, PlugForm, PlugGrid,
    CONTACT_TOL, KERNEL_POINTS, KERNEL_TOL, QUADRATURE_TOL,
};
pub use gray::{gray_bounds, GrayGrid, GrayReport};
pub use params::{choose_parameters, nice_floor, FastReport, ParameterOptions};

/// Largest ε for which the 𝒳 construction keeps 𝒳′ ≥ 0.
pub const MAX_EPSILON: f64 = 0.25;
pub const PROPERTY_SAMPLES: usize = 10_000;
const PROPERTY_SEED: u64 = 0x5eed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlugError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("bump property {property} fails: {detail}")]
    PropertyFailure { property: String, detail: String },
    #[error("contact density {min:e} ≤ 0 at {point:?}")]
    NotContact { min: f64, point: Vec<f64> },
    #[error("kernel residual {residual:e} exceeds the tolerance at {point:?}")]
    KernelResidual { residual: f64, point: Vec<f64> },
    #[error("{which} = {value:e} violates its bound {bound:e} at {point:?}")]
    BoundViolation { which: String, value: f64, bound: f64, point: Vec<f64> },
    #[error("no admissible parameters: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// Samples where an analytically positive quantity rounds to zero.
    pub underflow: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Vec<f64>>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub samples: usize,
    pub checks: Vec<PropertyCheck>,
    pub all: bool,
}

/// Parameters of the plug together with the verified bump properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlugSpec {
    pub epsilon: f64,
    pub delta: f64,
    /// Dimension 2n − 1 of the contact manifold.
    pub dimension: usize,
    pub properties: PropertyReport,
}

impl PlugSpec {
    pub fn n(&self) -> usize {
        (self.dimension + 1) / 2
    }

    pub fn bumps(&self) -> Bumps {
        Bumps::new(self.epsilon)
    }

    /// Same bumps with another δ (the bump properties do not involve δ).
    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..self.clone() }
    }

    /// Same bumps in another (odd) dimension.
    pub fn clone_with_dimension(&self, dimension: usize) -> Self {
        Self { dimension, ..self.clone() }
    }

    pub fn has_cut(&self) -> bool {
        self.dimension > 3
    }
}

/// Build the bumps for (ε, δ) in dimension `dimension` and verify every
/// listed property at PROPERTY_SAMPLES points.
pub fn make_spec(epsilon: f64, delta: f64, dimension: usize) -> Result<PlugSpec, PlugError> {
    if !(epsilon > 0.0 && epsilon <= MAX_EPSILON) {
        return Err(PlugError::InvalidParameters(format!("ε must lie in (0, {MAX_EPSILON}], got {epsilon}")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(PlugError::InvalidParameters(format!("δ must be a nonnegative number, got {delta}")));
    }
    if dimension < 3 || dimension % 2 == 0 {
        return Err(PlugError::InvalidParameters(format!("dimension must be odd and at least 3, got {dimension}")));
    }
    let properties = check_properties(&Bumps::new(epsilon), dimension > 3, PROPERTY_SAMPLES);
    if let Some(bad) = properties.checks.iter().find(|c| !c.holds) {
        return Err(PlugError::PropertyFailure {
            property: bad.name.clone(),
            detail: format!(
                "{} of {} samples violate it, first at {:?}",
                bad.violations, bad.samples, bad.first_violation
            ),
        });
    }
    Ok(PlugSpec { epsilon, delta, dimension, properties })
}

struct Checker {
    check: PropertyCheck,
}

impl Checker {
    fn new(name: &str) -> Self {
        Self {
            check: PropertyCheck {
                name: name.into(),
                samples: 0,
                violations: 0,
                underflow: 0,
                first_violation: None,
                holds: true,
            },
        }
    }

    fn record(&mut self, ok: bool, point: &[f64]) {
        self.check.samples += 1;
        if !ok {
            self.check.violations += 1;
            self.check.first_violation.get_or_insert_with(|| point.to_vec());
        }
    }

    fn underflow(&mut self) {
        self.check.samples += 1;
        self.check.underflow += 1;
    }

    fn finish(mut self) -> PropertyCheck {
        self.check.holds = self.check.violations == 0;
        self.check
    }
}

/// Sampled verification of the bump properties. Points are drawn from a
/// fixed-seed generator; distinguished points (0, ε, the rectangle corners)
/// are always included.
pub fn check_properties(b: &Bumps, with_cut: bool, samples: usize) -> PropertyReport {
    let e = b.epsilon;
    let e2 = e * e;
    let mut rng = ChaCha8Rng::seed_from_u64(PROPERTY_SEED);
    let mut uni = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    let mut checks = Vec::new();

    // (𝒜1) support in Q_ε
    let mut c = Checker::new("A1: A supported in Q_eps");
    for _ in 0..samples {
        let (t, x) = (uni(-3.0 * e, 3.0 * e), uni(-3.0 * e, 3.0 * e));
        if t.abs() >= 2.0 * e || x.abs() >= 2.0 * e {
            let a = b.a(t, x);
            c.record(a.v == 0.0 && a.t == 0.0 && a.x == 0.0, &[t, x]);
        } else {
            c.record(true, &[t, x]);
        }
    }
    checks.push(c.finish());

    // (𝒜2) −1 < 𝒜 ≤ 0
    let mut c = Checker::new("A2: -1 < A <= 0");
    for _ in 0..samples {
        let (t, x) = (uni(-2.0 * e, 2.0 * e), uni(-2.0 * e, 2.0 * e));
        let a = b.a(t, x).v;
        c.record(a > -1.0 && a <= 0.0, &[t, x]);
    }
    checks.push(c.finish());

    // (𝒜3) ∂ₓ𝒜 = 1 on the inner rectangle
    let mut c = Checker::new("A3: A_x = 1 on [-eps, eps] x [eps/2, 3eps/2]");
    for i in 0..samples {
        let (t, x) = match i {
            0 => (-e, 0.5 * e),
            1 => (e, 1.5 * e),
            2 => (0.0, e),
            _ => (uni(-e, e), uni(0.5 * e, 1.5 * e)),
        };
        c.record((b.a(t, x).x - 1.0).abs() <= 1e-10, &[t, x]);
    }
    checks.push(c.finish());

    // (𝒯1) support [−ε, ε]
    let mut c = Checker::new("T1: supp T = [-eps, eps]");
    for _ in 0..samples {
        let t = uni(-2.0 * e, 2.0 * e);
        let v = b.trans(t).v;
        if t.abs() >= e {
            c.record(v == 0.0, &[t]);
        } else if v == 0.0 {
            c.underflow();
        } else {
            c.record(v > 0.0 && v <= 1.0, &[t]);
        }
    }
    checks.push(c.finish());

    // (𝒯2) even
    let mut c = Checker::new("T2: T even");
    for _ in 0..samples {
        let t = uni(0.0, 2.0 * e);
        let (p, m) = (b.trans(t), b.trans(-t));
        c.record(p.v == m.v && p.d == -m.d && p.dd == m.dd, &[t]);
    }
    checks.push(c.finish());

    // (𝒯3) T⁻¹(1) = {0}
    let mut c = Checker::new("T3: T = 1 only at 0");
    c.record(b.trans(0.0).v == 1.0, &[0.0]);
    for _ in 1..samples {
        let t = uni(-e, e);
        c.record(t == 0.0 || b.trans(t).v < 1.0, &[t]);
    }
    checks.push(c.finish());

    // (𝒳1) 𝒳 ≥ x, equality only outside (ε/2, 3ε/2)
    let mut c = Checker::new("X1: X >= x, equality only outside (eps/2, 3eps/2)");
    for _ in 0..samples {
        let x = uni(-2.0 * e, 2.0 * e);
        let g = b.excess(x).v;
        let inside = x > 0.5 * e && x < 1.5 * e;
        if inside && g == 0.0 {
            c.underflow();
        } else {
            c.record(if inside { g > 0.0 } else { g == 0.0 }, &[x]);
        }
    }
    checks.push(c.finish());

    // (𝒳2) 𝒳′ ≥ 0 vanishing only at ε
    let mut c = Checker::new("X2: X' >= 0, zero only at eps");
    c.record(b.xfun(e).d.abs() <= 1e-14, &[e]);
    for _ in 1..samples {
        // half of the samples concentrate near ε, where 𝒳′ dips to 0
        let x = if rng_bool(&mut uni) { uni(-2.0 * e, 2.0 * e) } else { e + uni(-0.5, 0.5) * SPIKE_WIDTH * e2 };
        let d = b.xfun(x).d;
        c.record(x == e || d > 0.0, &[x]);
    }
    checks.push(c.finish());

    // (𝒳3) 𝒳(ε) = ε + ε²
    let mut c = Checker::new("X3: X(eps) = eps + eps^2");
    c.record((b.xfun(e).v - (e + e2)).abs() <= 4.0 * f64::EPSILON * e, &[e]);
    checks.push(c.finish());

    // (𝒳4) 𝒳 − x < 2ε²
    let mut c = Checker::new("X4: X - x < 2 eps^2");
    for _ in 0..samples {
        let x = uni(-2.0 * e, 2.0 * e);
        c.record(b.excess(x).v < 2.0 * e2, &[x]);
    }
    checks.push(c.finish());

    // (ℬ1) (0, ε) is the only critical point and the only zero of ℬₓ
    let mut c = Checker::new("B1: (0, eps) only critical point and only zero of B_x");
    let at = b.b(0.0, e);
    c.record(at.x.abs() <= 1e-14 && at.t.abs() <= 1e-14, &[0.0, e]);
    for _ in 1..samples {
        let (t, x) = if rng_bool(&mut uni) {
            (uni(-2.0 * e, 2.0 * e), uni(-2.0 * e, 2.0 * e))
        } else {
            (uni(-0.1, 0.1) * e, e + uni(-0.5, 0.5) * SPIKE_WIDTH * e2)
        };
        c.record((t == 0.0 && x == e) || b.b(t, x).x > 0.0, &[t, x]);
    }
    checks.push(c.finish());

    // (ℬ2) 0 ≤ ℬ − x < 2ε²
    let mut c = Checker::new("B2: 0 <= B - x < 2 eps^2");
    for _ in 0..samples {
        let (t, x) = (uni(-2.0 * e, 2.0 * e), uni(-2.0 * e, 2.0 * e));
        let g = b.b_excess(t, x).v;
        c.record((0.0..2.0 * e2).contains(&g), &[t, x]);
    }
    checks.push(c.finish());

    if with_cut {
        let mut c = Checker::new("c1: cut = 0 near eps^2/2");
        for _ in 0..samples {
            let r = uni(CUT_OFF * e2, 0.5 * e2);
            c.record(b.cut(r).v == 0.0, &[r]);
        }
        checks.push(c.finish());

        let mut c = Checker::new("c2: cut = 1 - rho near 0");
        for _ in 0..samples {
            let r = uni(0.0, CUT_ON * e2);
            let j = b.cut(r);
            c.record(j.v == 1.0 - r && j.d == -1.0, &[r]);
        }
        checks.push(c.finish());

        let mut c = Checker::new("c3: -4/eps^2 < cut' <= 0");
        for _ in 0..samples {
            let r = uni(0.0, 0.5 * e2);
            let d = b.cut(r).d;
            c.record(d <= 0.0 && d > -4.0 / e2, &[r]);
        }
        checks.push(c.finish());
    }

    let all = checks.iter().all(|c| c.holds);
    PropertyReport { samples, checks, all }
}

fn rng_bool(uni: &mut impl FnMut(f64, f64) -> f64) -> bool {
    uni(0.0, 1.0) < 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_properties_hold() {
        for dim in [3, 5] {
            let s = make_spec(0.05, 0.01, dim).unwrap();
            assert!(s.properties.all);
            assert_eq!(s.properties.checks.len(), if dim == 3 { 12 } else { 15 });
            for c in &s.properties.checks {
                assert!(c.samples >= 1, "{}", c.name);
            }
        }
        for eps in [0.01, 0.1, 0.2, 0.25] {
            assert!(make_spec(eps, 0.01, 5).unwrap().properties.all, "ε = {eps}");
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(make_spec(0.3, 0.01, 3), Err(PlugError::InvalidParameters(_))));
        assert!(matches!(make_spec(0.05, -1.0, 3), Err(PlugError::InvalidParameters(_))));
        assert!(matches!(make_spec(0.05, 0.01, 4), Err(PlugError::InvalidParameters(_))));
    }
}
