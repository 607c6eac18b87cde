//! Choice of (ε, δ) for prescribed (c₁, c₂) and the resulting certificate.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::form::{delta_bound, locate_orbit, verify_contact, ContactReport, DeltaBound, OrbitReport, PlugGrid};
use super::gray::{gray_bounds, GrayGrid, GrayReport};
use super::{make_spec, PlugError, PlugSpec, MAX_EPSILON};
use crate::certify::{certify_fast, Certificate, FastOrbitData, HypothesisStatus, LedgerEntry};

/// Largest number d·10^k (d ∈ 1..=9) strictly below `v`.
pub fn nice_floor(v: f64) -> f64 {
    assert!(v > 0.0 && v.is_finite(), "nice_floor needs a positive finite value");
    let k = v.log10().floor() as i32;
    let at = |d: f64, k: i32| if k < 0 { d / 10f64.powi(-k) } else { d * 10f64.powi(k) };
    // log10 can land one decade off near powers of ten
    let k = if at(1.0, k) > v {
        k - 1
    } else if at(1.0, k + 1) <= v {
        k + 1
    } else {
        k
    };
    let mut d = (v / at(1.0, k)).floor().clamp(1.0, 9.0);
    while d >= 1.0 && at(d, k) >= v {
        d -= 1.0;
    }
    if d < 1.0 {
        at(9.0, k - 1)
    } else {
        at(d, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterOptions {
    pub contact_grid: PlugGrid,
    /// Grid of the bisected δ cap.
    pub cap_grid: PlugGrid,
    /// Defaults to GrayGrid::default_for(dimension).
    pub gray_grid: Option<GrayGrid>,
    pub max_halvings: usize,
}

impl Default for ParameterOptions {
    fn default() -> Self {
        Self { contact_grid: PlugGrid::default(), cap_grid: PlugGrid::coarse(), gray_grid: None, max_halvings: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLimits {
    /// Root of 2π(ε + ε²) = c₂.
    pub period: f64,
    /// ln(1 + c₁)/4.
    pub factor: f64,
    pub construction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastReport {
    pub c1: f64,
    pub c2: f64,
    pub dimension: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub epsilon_limits: EpsilonLimits,
    /// ln(1 + c₁), the budget for 2δ + 4ε.
    pub log_budget: f64,
    /// Times δ was halved after a failed grid check.
    pub halvings: usize,
    pub spec: PlugSpec,
    pub cap: DeltaBound,
    pub contact: ContactReport,
    pub orbit: OrbitReport,
    pub gray: GrayReport,
    pub certificate: Certificate,
}

/// Pick ε and δ as round numbers inside every constraint, verify contact,
/// the orbit and the Gray bounds on grids, and certify a fast orbit of
/// period < c₂ for a form f·λ₀ with 1 ≤ f < 1 + c₁.
pub fn choose_parameters(c1: f64, c2: f64, dimension: usize, opts: &ParameterOptions) -> Result<FastReport, PlugError> {
    if !(c1 > 0.0 && c1.is_finite() && c2 > 0.0 && c2.is_finite()) {
        return Err(PlugError::InvalidParameters(format!("c₁ and c₂ must be positive, got ({c1}, {c2})")));
    }
    let log_budget = c1.ln_1p();
    let limits = EpsilonLimits {
        period: 0.5 * ((1.0 + 4.0 * c2 / TAU).sqrt() - 1.0),
        factor: log_budget / 4.0,
        construction: MAX_EPSILON,
    };
    let eps_max = limits.period.min(limits.factor);
    let epsilon = if eps_max > limits.construction { limits.construction } else { nice_floor(eps_max) };
    let base = make_spec(epsilon, 0.0, dimension)?;
    let cap = delta_bound(&base, &opts.cap_grid)?;
    let room = (log_budget - 4.0 * epsilon) / 2.0;
    let mut delta = nice_floor(cap.analytic_cap.min(cap.grid_cap).min(f64::MAX) / 2.0).min(nice_floor(room));
    let gray_grid = opts.gray_grid.unwrap_or_else(|| GrayGrid::default_for(dimension));

    let mut halvings = 0;
    loop {
        let spec = base.with_delta(delta);
        let attempt = verify_contact(&spec, &opts.contact_grid).and_then(|contact| {
            let orbit = locate_orbit(&spec, &opts.contact_grid)?;
            let gray = gray_bounds(&spec, &gray_grid)?;
            Ok((contact, orbit, gray))
        });
        match attempt {
            Ok((contact, orbit, gray)) => {
                let certificate = fast_certificate(c1, c2, &spec, &cap, &contact, &orbit, &gray, log_budget);
                return Ok(FastReport {
                    c1,
                    c2,
                    dimension,
                    epsilon,
                    delta,
                    epsilon_limits: limits,
                    log_budget,
                    halvings,
                    spec,
                    cap,
                    contact,
                    orbit,
                    gray,
                    certificate,
                });
            }
            Err(PlugError::NotContact { .. } | PlugError::BoundViolation { .. }) if halvings < opts.max_halvings => {
                delta /= 2.0;
                halvings += 1;
            }
            Err(e @ (PlugError::NotContact { .. } | PlugError::BoundViolation { .. })) => {
                return Err(PlugError::Infeasible(format!(
                    "grid checks still fail after {halvings} halvings of δ: {e}"
                )));
            }
            Err(e) => return Err(e),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn fast_certificate(
    c1: f64,
    c2: f64,
    spec: &PlugSpec,
    cap: &DeltaBound,
    contact: &ContactReport,
    orbit: &OrbitReport,
    gray: &GrayReport,
    log_budget: f64,
) -> Certificate {
    let (e, d) = (spec.epsilon, spec.delta);
    let sampled = HypothesisStatus::Sampled;
    let checks = vec![
        LedgerEntry::inequality("2δ + 4ε < ln(1 + c₁)", 2.0 * d + 4.0 * e, log_budget),
        LedgerEntry::inequality("δ < 1/|min x∂ₓ𝒜| (contact cap)", d, cap.analytic_cap),
        LedgerEntry::fact("bump properties hold at every sample", sampled, spec.properties.all)
            .with_note(format!("{} samples per property", spec.properties.samples)),
        LedgerEntry::inequality("0 < min contact density on the grid", 0.0, contact.min_density).with_status(sampled),
        LedgerEntry::inequality("δε/2 < inner-rectangle density", contact.inner_bound, contact.inner_min)
            .with_status(sampled),
        LedgerEntry::inequality(
            "|quadrature period − 2π(ε + ε²)|",
            (orbit.period_quadrature - orbit.period_formula).abs(),
            super::form::QUADRATURE_TOL,
        ),
        LedgerEntry::fact("K_t > 0 off the inserted orbit on the grid", sampled, orbit.unique_on_grid),
        LedgerEntry::inequality("kernel residual |ι_K dλ|/|K|", orbit.kernel_residual, super::form::KERNEL_TOL)
            .with_status(sampled),
        LedgerEntry::inequality("sup r̄ < 2δ", gray.max_rbar, gray.rbar_bound).with_status(sampled),
        LedgerEntry::inequality("sup r̂ < 4ε", gray.max_rhat, gray.rhat_bound).with_status(sampled),
        LedgerEntry::inequality("e^{∫ sup r̄ + ∫ sup r̂} ≤ e^{2δ+4ε}", gray.grid_factor_bound, gray.factor_bound)
            .with_status(sampled),
    ];
    let data = FastOrbitData {
        c1,
        c2,
        epsilon: e,
        delta: d,
        dimension: spec.dimension,
        period: orbit.period,
        factor_bound: gray.factor_bound,
    };
    certify_fast(&data, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_floor_is_strict_and_round() {
        assert_eq!(nice_floor(0.050018), 0.05);
        assert_eq!(nice_floor(0.05), 0.04);
        assert_eq!(nice_floor(0.0115), 0.01);
        assert_eq!(nice_floor(0.01), 0.009);
        assert_eq!(nice_floor(1.0), 0.9);
        assert_eq!(nice_floor(37.0), 30.0);
        assert_eq!(nice_floor(0.1), 0.09);
    }

    #[test]
    fn epsilon_follows_the_tighter_constraint() {
        let opts = ParameterOptions {
            contact_grid: PlugGrid { tx: 64, rho: 8 },
            cap_grid: PlugGrid { tx: 32, rho: 4 },
            gray_grid: Some(GrayGrid { s: 4, space: PlugGrid { tx: 64, rho: 8 } }),
            max_halvings: 20,
        };
        let r = choose_parameters(1.0, 0.7, 3, &opts).unwrap();
        assert_eq!(r.epsilon, 0.1);
        assert!(r.certificate.valid);
        assert!(choose_parameters(-1.0, 0.7, 3, &opts).is_err());
    }
}
