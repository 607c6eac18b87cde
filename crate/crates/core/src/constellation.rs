//! Candidate rigid constellations: the closed orbits in a class α with
//! period in [T_min(α), T], their T⁺, rank and rigidity conditions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ClassOrder, HomotopyClass, ModelKind, ModelManifold};
use crate::spectrum::{t_min, t_min_alpha, t_plus, PeriodSpectrum, SpectrumEntry, SpectrumError, TPlus, PERIOD_TOL};

/// Default tolerance for the strict inequalities of the rigidity check.
pub const RIGIDITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstellationError {
    #[error("spectrum cap {cap} is below max(T, T_min + T_min(α)) = {needed}")]
    CapInsufficient { needed: f64, cap: f64 },
    #[error("no orbit of class {class} has period in [T_min(α), {t}]")]
    Empty { class: String, t: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub tol: f64,
    /// Every member orbit is simple.
    pub simple: bool,
    /// Indices of members that are multiple covers.
    pub non_simple_members: Vec<usize>,
    /// T⁺ − T > tol.
    pub isolated_from_above: bool,
    /// T⁺ − T, or `None` when T⁺ = +∞.
    pub gap_above: Option<f64>,
    /// T < T_min(α) + T_min − tol.
    pub action_window: bool,
    /// T_min(α) + T_min − T.
    pub action_margin: f64,
    pub rigid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidConstellation {
    pub model: Option<String>,
    pub class: HomotopyClass,
    pub t: f64,
    pub t_min: f64,
    pub t_min_alpha: f64,
    pub cap: Option<f64>,
    pub families: Vec<SpectrumEntry>,
    pub t_plus: TPlus,
    pub rank: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_note: Option<String>,
    pub rigidity: RigidityReport,
}

impl RigidConstellation {
    pub fn is_rigid(&self) -> bool {
        self.rigidity.rigid
    }
}

/// Collect 𝒞_{λ₀,α}(T) from a spectrum and evaluate rank and rigidity.
pub fn build(
    model: Option<&ModelManifold>,
    class: &HomotopyClass,
    t: f64,
    spec: &PeriodSpectrum,
) -> Result<RigidConstellation, ConstellationError> {
    let class = match model {
        Some(m) => m.validate_class(class).map_err(SpectrumError::from)?,
        None => class.clone(),
    };
    let tmin = t_min(spec)?;
    let tmin_a = t_min_alpha(spec, &class)?;
    let needed = t.max(tmin + tmin_a);
    let cap = spec.cap_value();
    if cap < needed * (1.0 - 1e-12) {
        return Err(ConstellationError::CapInsufficient { needed, cap });
    }
    let upper = t + PERIOD_TOL * t.max(1.0);
    let families: Vec<SpectrumEntry> = spec.entries_in_class(&class).filter(|e| e.period <= upper).cloned().collect();
    if families.is_empty() {
        return Err(ConstellationError::Empty { class: class.to_string(), t });
    }
    let rank = rank(&families);
    let rank_note = match model.map(|m| m.kind()) {
        Some(ModelKind::CutS3 { k }) if class.is_trivial() && (t - std::f64::consts::TAU).abs() < 1e-9 => {
            Some(format!(
                "a rank of {} (8k + 1) is also in use for this constellation; the Betti-sum rule gives {}",
                8 * k + 1,
                rank
            ))
        }
        _ => None,
    };
    let mut c = RigidConstellation {
        model: model.map(|m| m.name()).or_else(|| spec.model.clone()),
        class: class.clone(),
        t,
        t_min: tmin,
        t_min_alpha: tmin_a,
        cap: spec.cap,
        t_plus: t_plus(spec, &class, t),
        families,
        rank,
        rank_note,
        rigidity: RigidityReport {
            tol: RIGIDITY_TOL,
            simple: false,
            non_simple_members: vec![],
            isolated_from_above: false,
            gap_above: None,
            action_window: false,
            action_margin: 0.0,
            rigid: false,
        },
    };
    c.rigidity = check_rigid(&c, RIGIDITY_TOL);
    Ok(c)
}

/// The three computable rigidity conditions: simplicity, a strict gap up
/// to T⁺ and the action window T < T_min(α) + T_min.
pub fn check_rigid(c: &RigidConstellation, tol: f64) -> RigidityReport {
    let non_simple_members: Vec<usize> =
        c.families.iter().enumerate().filter(|(_, e)| !e.is_simple()).map(|(i, _)| i).collect();
    let simple = non_simple_members.is_empty();
    let gap_above = match c.t_plus {
        TPlus::Infinite => None,
        other => Some(other.lower_bound() - c.t),
    };
    let isolated_from_above = gap_above.map_or(true, |g| g > tol);
    let action_margin = c.t_min_alpha + c.t_min - c.t;
    let action_window = action_margin > tol;
    RigidityReport {
        tol,
        simple,
        non_simple_members,
        isolated_from_above,
        gap_above,
        action_window,
        action_margin,
        rigid: simple && isolated_from_above && action_window,
    }
}

/// Sum over families of the total Betti number of the family's parameter
/// space.
pub fn rank(families: &[SpectrumEntry]) -> u64 {
    families.iter().map(|e| e.betti_sum()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Distinctness {
    /// Distinct orbits are automatically geometrically distinct.
    Always,
    /// Geometric distinctness holds if no closed orbit has period ≤ value.
    Threshold(f64),
}

/// Multiplicity |α| used by the distinctness threshold. The trivial class
/// and torsion classes are assigned 1, which gives the largest (most
/// conservative) threshold.
pub fn class_multiplicity(class: &HomotopyClass) -> u64 {
    match class {
        HomotopyClass::Winding(v) => v.iter().fold(0, |g, &c| crate::numeric::gcd(g, c)).unsigned_abs(),
        _ => 1,
    }
}

pub fn distinctness_threshold(class: &HomotopyClass, f_min: f64, f_max: f64, t: f64, t_min_alpha: f64) -> Distinctness {
    if class.is_primitive() || class.order() == ClassOrder::Infinite {
        return Distinctness::Always;
    }
    distinctness_threshold_with_multiplicity(class_multiplicity(class), f_min, f_max, t, t_min_alpha)
}

/// (T·max f − T_min(α)·min f)/|α| for an explicit multiplicity.
pub fn distinctness_threshold_with_multiplicity(
    multiplicity: u64,
    f_min: f64,
    f_max: f64,
    t: f64,
    t_min_alpha: f64,
) -> Distinctness {
    Distinctness::Threshold((t * f_max - t_min_alpha * f_min) / multiplicity.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::analytic_spectrum;
    use std::f64::consts::PI;

    #[test]
    fn sphere_constellation() {
        let m = ModelManifold::sphere(2);
        let sp = analytic_spectrum(&m, 7.0).unwrap();
        let c = build(Some(&m), &HomotopyClass::Trivial, PI, &sp).unwrap();
        assert_eq!(c.families.len(), 1);
        assert_eq!(c.rank, 2);
        assert!(c.is_rigid());
        assert!((c.rigidity.gap_above.unwrap() - PI).abs() < 1e-12);
        assert!((c.rigidity.action_margin - PI).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let m = ModelManifold::sphere(2);
        let sp = analytic_spectrum(&m, 5.0).unwrap();
        assert!(matches!(
            build(Some(&m), &HomotopyClass::Trivial, PI, &sp),
            Err(ConstellationError::CapInsufficient { .. })
        ));
    }

    #[test]
    fn thresholds() {
        assert_eq!(
            distinctness_threshold(&HomotopyClass::winding(vec![1, 0, 0]), 1.0, 1.2, 1.0, 1.0),
            Distinctness::Always
        );
        match distinctness_threshold(&HomotopyClass::Trivial, 1.0, 1.3, 2.0 * PI, 2.0 * PI) {
            Distinctness::Threshold(v) => assert!((v - 0.6 * PI).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(distinctness_threshold_with_multiplicity(3, 7.0, 10.0, 1.0, 1.0), Distinctness::Threshold(1.0));
    }
}
