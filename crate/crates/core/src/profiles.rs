//! Profile functions h on [0, ∞), tuned Hamiltonians H(τ,p) = h(e^{τ−κ}) on
//! the symplectization, their negative-action orbits, action gaps and
//! homotopy costs.

use std::sync::OnceLock;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constellation::RigidConstellation;
use crate::dynamics::{flow_samples, DynamicsError, Integrator, ReebField, VectorField};
use crate::geometry::{ConformalFactor, GeometryError, HomotopyClass, ModelManifold};
use crate::numeric::{bisect, bisect_predicate, extended_f64, smooth_step, smooth_step_d, GaussLegendre, NumericError};
use crate::spectrum::{PeriodSpectrum, SpectrumEntry, SpectrumError, TPlus, PERIOD_TOL};

/// Sharpness of the base step σ used by the ramps.
const RAMP_BETA: f64 = 1.0;
/// Uniform knots per grid family in the cumulative ramp table.
const TABLE_KNOTS: usize = 512;
const GL_NODES: usize = 16;
/// Quadrature panels along an orbit for the line-integral action.
const LINE_PANELS: usize = 8;
/// Default tolerance for the (h3) check.
pub const AREA_TOL: f64 = 1e-10;
/// Relative margin by which b·e^{−κ} must avoid the spectrum.
pub const SPECTRUM_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("a = {a} must be below b = {b}: the ramp cannot reach h(1+a) = a² otherwise")]
    InfeasibleArea { a: f64, b: f64 },
    #[error("invalid profile parameters: {0}")]
    InvalidParameters(String),
    #[error("shape parameter search failed: {0}")]
    NotBracketed(#[from] NumericError),
    #[error("b·e^(-κ) = {threshold} is (within margin) the period {period} of a closed orbit")]
    BInSpectrum { threshold: f64, period: f64 },
    #[error("c = {c} is too small: upper-bend orbits need c > {needed}")]
    CTooSmall { c: f64, needed: f64 },
    #[error("spectrum cap {cap} does not reach b·e^(-κ) = {threshold}; the gap below b is unknown")]
    GapUnknown { threshold: f64, cap: f64 },
    #[error("no admissible b: the window ({lo}, {hi}) is empty")]
    BWindowEmpty { lo: f64, hi: f64 },
    #[error("b = {b} lies outside the window ({lo}, {hi})")]
    BOutsideWindow { b: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn gauss() -> &'static GaussLegendre {
    static G: OnceLock<GaussLegendre> = OnceLock::new();
    G.get_or_init(|| GaussLegendre::new(GL_NODES))
}

/// Ramp g_p(u) = σ(u^p): smooth, increasing from 0 to 1 on [0,1] and flat
/// to all orders at both ends.
fn ramp(p: f64, u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        smooth_step(RAMP_BETA, (p * u.ln()).exp())
    }
}

fn ramp_d(p: f64, u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let v = (p * u.ln()).exp();
    if v == 0.0 {
        return 0.0;
    }
    smooth_step_d(RAMP_BETA, v) * p * v / u
}

/// Knots that resolve the ramp both for small and for large p: a uniform
/// grid in u merged with a uniform grid in v = u^p.
fn ramp_knots(p: f64) -> Vec<f64> {
    let n = TABLE_KNOTS;
    let mut k: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    k.extend((1..n).map(|i| ((i as f64 / n as f64).ln() / p).exp()));
    k.retain(|x| (0.0..=1.0).contains(x));
    k.sort_by(f64::total_cmp);
    k.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    k
}

fn ramp_area(p: f64) -> f64 {
    let k = ramp_knots(p);
    k.windows(2).map(|w| gauss().integrate(|u| ramp(p, u), w[0], w[1])).sum()
}

/// Inverse of σ on (0,1): the v with σ(v) = q.
fn smooth_step_inverse(q: f64) -> f64 {
    let e = ((1.0 - q) / q).ln();
    let b2 = 2.0 * RAMP_BETA;
    let root = (e * e + b2 * b2).sqrt();
    if e >= 0.0 {
        b2 / (e + b2 + root)
    } else {
        // e + root = b2²/(root − e), avoiding cancellation
        b2 / (b2 + b2 * b2 / (root - e))
    }
}

#[derive(Debug, Clone)]
struct RampTable {
    p: f64,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RampTable {
    fn new(p: f64) -> Self {
        let knots = ramp_knots(p);
        let mut cumulative = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in knots.windows(2) {
            acc += gauss().integrate(|u| ramp(p, u), w[0], w[1]);
            cumulative.push(acc);
        }
        Self { p, knots, cumulative }
    }

    /// ∫₀^u g_p.
    fn integral(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let u = u.min(1.0);
        let k = self.knots.partition_point(|&x| x <= u).saturating_sub(1);
        let lo = self.knots[k];
        if u <= lo {
            return self.cumulative[k];
        }
        self.cumulative[k] + gauss().integrate(|s| ramp(self.p, s), lo, u)
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }
}

/// The parameter record a profile is rebuilt from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Shape parameter of the ramp g_p(u) = σ(u^p).
    pub p: f64,
}

/// A profile h ∈ 𝔥_{a,b,c}: zero up to 1, convex ramp to slope b on
/// [1, 1+a], linear with slope b up to c, concave ramp back to slope 0 on
/// [c, c+a], constant afterwards.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "ProfileParams", try_from = "ProfileParams")]
pub struct Profile {
    a: f64,
    b: f64,
    c: f64,
    table: RampTable,
}

impl From<Profile> for ProfileParams {
    fn from(p: Profile) -> Self {
        p.params()
    }
}

impl TryFrom<ProfileParams> for Profile {
    type Error = ProfileError;
    fn try_from(p: ProfileParams) -> Result<Self, ProfileError> {
        Profile::from_params(p)
    }
}

fn validate_abc(a: f64, b: f64, c: f64) -> Result<(), ProfileError> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(ProfileError::InvalidParameters(format!("a = {a}, b = {b}, c = {c} must be positive and finite")));
    }
    if a >= b {
        return Err(ProfileError::InfeasibleArea { a, b });
    }
    if c <= 1.0 + a {
        return Err(ProfileError::InvalidParameters(format!("c = {c} must exceed 1 + a = {}", 1.0 + a)));
    }
    Ok(())
}

impl Profile {
    /// Build the profile, solving for the ramp shape so that h(1+a) = a².
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, ProfileError> {
        validate_abc(a, b, c)?;
        let target = a / b;
        let lnp = bisect(|lnp| ramp_area(lnp.exp()) - target, (1e-3f64).ln(), (1e12f64).ln(), 1e-13)?;
        Ok(Self { a, b, c, table: RampTable::new(lnp.exp()) })
    }

    /// Rebuild from a stored record; the shape parameter must still meet
    /// the area constraint.
    pub fn from_params(r: ProfileParams) -> Result<Self, ProfileError> {
        validate_abc(r.a, r.b, r.c)?;
        if !(r.p > 0.0 && r.p.is_finite()) {
            return Err(ProfileError::InvalidParameters(format!("shape parameter p = {} must be positive", r.p)));
        }
        let prof = Self { a: r.a, b: r.b, c: r.c, table: RampTable::new(r.p) };
        let err = (prof.lower_ramp_value() - r.a * r.a).abs();
        if err >= AREA_TOL {
            return Err(ProfileError::InvalidParameters(format!(
                "p = {} gives h(1+a) − a² = {err:e}; the ramp area constraint fails",
                r.p
            )));
        }
        Ok(prof)
    }

    pub fn params(&self) -> ProfileParams {
        ProfileParams { a: self.a, b: self.b, c: self.c, p: self.table.p }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn shape(&self) -> f64 {
        self.table.p
    }

    /// Value on s ≥ c + a. Both ramps carry area a², so this is
    /// b(c−1−a) + 2a².
    pub fn plateau(&self) -> f64 {
        self.b * (self.c - 1.0 - self.a) + 2.0 * self.a * self.a
    }

    /// h(1+a) as produced by the ramp, a·b·∫g_p.
    pub fn lower_ramp_value(&self) -> f64 {
        self.a * self.b * self.table.total()
    }

    pub fn h(&self, s: f64) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        if s <= 1.0 {
            0.0
        } else if s < 1.0 + a {
            a * b * self.table.integral((s - 1.0) / a)
        } else if s <= c {
            a * a + b * (s - 1.0 - a)
        } else if s < c + a {
            let w = (c + a - s) / a;
            self.plateau() - a * b * self.table.integral(w)
        } else {
            self.plateau()
        }
    }

    pub fn dh(&self, s: f64) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        if s <= 1.0 || s >= c + a {
            0.0
        } else if s < 1.0 + a {
            b * ramp(self.table.p, (s - 1.0) / a)
        } else if s <= c {
            b
        } else {
            b * ramp(self.table.p, (c + a - s) / a)
        }
    }

    pub fn d2h(&self, s: f64) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        if s <= 1.0 || s >= c + a || (s >= 1.0 + a && s <= c) {
            0.0
        } else if s < 1.0 + a {
            b / a * ramp_d(self.table.p, (s - 1.0) / a)
        } else {
            -b / a * ramp_d(self.table.p, (c + a - s) / a)
        }
    }

    /// The σ ∈ (1, 1+a) with h′(σ) = y, for 0 < y < b.
    pub fn solve_slope(&self, y: f64) -> Result<f64, ProfileError> {
        if !(y > 0.0 && y < self.b) {
            return Err(ProfileError::InvalidParameters(format!("slope {y} is outside (0, b = {})", self.b)));
        }
        let p = self.table.p;
        let q = y / self.b;
        let mut u = (smooth_step_inverse(q).ln() / p).exp();
        for _ in 0..3 {
            let d = ramp_d(p, u);
            if !(d > 0.0) {
                break;
            }
            let next = u - (ramp(p, u) - q) / d;
            if !(next > 0.0 && next < 1.0) {
                break;
            }
            u = next;
        }
        Ok(1.0 + self.a * u)
    }

    /// Sampled verification of (h1)–(h6) with `n` points per condition.
    pub fn check_invariants(&self, n: usize) -> InvariantReport {
        let (a, b, c) = (self.a, self.b, self.c);
        let n = n.max(2);
        let mid = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        let h1 = (0..n).all(|i| self.h(1.0 - 5.0 * i as f64 / (n - 1) as f64) == 0.0);
        let lower = SignSample::collect(n, |i| {
            let s = mid(1.0, 1.0 + a, i);
            (self.d2h(s), s > 1.0 && s < 1.0 + a)
        });
        let h3_error = (self.h(1.0 + a) - a * a).abs();
        let h4 = (0..n).all(|i| self.dh(1.0 + a + (c - 1.0 - a) * i as f64 / (n - 1) as f64) == b);
        let upper = SignSample::collect(n, |i| {
            let s = mid(c, c + a, i);
            (-self.d2h(s), s > c && s < c + a)
        });
        let plateau = self.plateau();
        let h6 = (0..n).all(|i| self.h(c + a + 10.0 * i as f64 / (n - 1) as f64) == plateau);
        let monotone = (0..n)
            .map(|i| self.h(0.5 + (c + a + 0.5) * i as f64 / (n - 1) as f64))
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] >= w[0]);
        let h3 = h3_error < AREA_TOL;
        InvariantReport {
            samples: n,
            h1,
            h2: lower,
            h3_error,
            h3,
            h4,
            h5: upper,
            h6,
            plateau,
            monotone,
            all: h1 && lower.holds && h3 && h4 && upper.holds && h6 && monotone,
        }
    }
}

/// Sign check of a second derivative on an open interval. Near the ends of
/// the ramps the value is positive but below the smallest f64; those samples
/// are counted separately and accepted because every factor of the
/// closed-form expression is positive at an interior point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignSample {
    pub representable: usize,
    pub underflow: usize,
    pub holds: bool,
}

impl SignSample {
    fn collect(n: usize, f: impl Fn(usize) -> (f64, bool)) -> Self {
        let mut out = SignSample { representable: 0, underflow: 0, holds: true };
        for i in 0..n {
            let (v, interior) = f(i);
            if v > 0.0 {
                out.representable += 1;
            } else if v == 0.0 && interior {
                out.underflow += 1;
            } else {
                out.holds = false;
            }
        }
        out.holds &= out.representable > 0;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub samples: usize,
    pub h1: bool,
    pub h2: SignSample,
    pub h3_error: f64,
    pub h3: bool,
    pub h4: bool,
    pub h5: SignSample,
    pub h6: bool,
    pub plateau: f64,
    pub monotone: bool,
    pub all: bool,
}

/// A function on ℝ × M, evaluated at τ and a chart point.
pub trait Hamiltonian: Sync {
    fn value(&self, tau: f64, x: &DVector<f64>) -> f64;
}

/// H(τ,p) = h(e^{τ−κ}).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "HamiltonianParams", try_from = "HamiltonianParams")]
pub struct TunedHamiltonian {
    pub profile: Profile,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub kappa: f64,
    pub p: f64,
}

impl From<TunedHamiltonian> for HamiltonianParams {
    fn from(h: TunedHamiltonian) -> Self {
        let p = h.profile.params();
        HamiltonianParams { a: p.a, b: p.b, c: p.c, kappa: h.kappa, p: p.p }
    }
}

impl TryFrom<HamiltonianParams> for TunedHamiltonian {
    type Error = ProfileError;
    fn try_from(r: HamiltonianParams) -> Result<Self, ProfileError> {
        let profile = Profile::from_params(ProfileParams { a: r.a, b: r.b, c: r.c, p: r.p })?;
        TunedHamiltonian::new(profile, r.kappa)
    }
}

impl TunedHamiltonian {
    pub fn new(profile: Profile, kappa: f64) -> Result<Self, ProfileError> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(ProfileError::InvalidParameters(format!("κ = {kappa} must be finite and ≥ 0")));
        }
        Ok(Self { profile, kappa })
    }

    pub fn params(&self) -> HamiltonianParams {
        self.clone().into()
    }

    pub fn h_of_tau(&self, tau: f64) -> f64 {
        self.profile.h((tau - self.kappa).exp())
    }

    /// b·e^{−κ}: orbits below this period are detected.
    pub fn threshold(&self) -> f64 {
        self.profile.b() * (-self.kappa).exp()
    }

    /// H vanishes where e^{τ−κ} ≤ 1 and is locally constant where
    /// e^{τ−κ} ≥ c + a, sampled at `n` points on each side.
    pub fn is_admissible(&self, n: usize) -> bool {
        let p = &self.profile;
        let top = (p.c() + p.a()).ln() + self.kappa;
        let n = n.max(2);
        let low = (0..n).all(|i| self.h_of_tau(self.kappa - 5.0 * i as f64 / (n - 1) as f64) == 0.0);
        let high = (0..n).all(|i| {
            let t = top + 3.0 * i as f64 / (n - 1) as f64;
            self.h_of_tau(t) == p.plateau() && p.dh((t - self.kappa).exp()) == 0.0
        });
        low && high
    }
}

impl Hamiltonian for TunedHamiltonian {
    fn value(&self, tau: f64, _x: &DVector<f64>) -> f64 {
        self.h_of_tau(tau)
    }
}

/// G(τ,p) = h(e^τ / f(p)).
#[derive(Debug, Clone)]
pub struct ConformalProfileHamiltonian<'a> {
    pub profile: &'a Profile,
    pub factor: &'a ConformalFactor,
}

impl Hamiltonian for ConformalProfileHamiltonian<'_> {
    fn value(&self, tau: f64, x: &DVector<f64>) -> f64 {
        self.profile.h(tau.exp() / self.factor.value(x))
    }
}

/// A strict inequality lhs < rhs with its margin rhs − lhs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    #[serde(with = "extended_f64")]
    pub lhs: f64,
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    #[serde(with = "extended_f64")]
    pub margin: f64,
    pub holds: bool,
}

impl Inequality {
    pub fn less(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        Self { label: label.into(), lhs, rhs, margin, holds: margin > 0.0 }
    }

    /// lhs < rhs with the margin required to exceed `tol`.
    pub fn less_tol(label: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let mut i = Self::less(label, lhs, rhs);
        i.holds = i.margin > tol;
        i
    }
}

/// A 1-periodic orbit of negative action, with its Reeb orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeOrbitRecord {
    pub period: f64,
    pub class: HomotopyClass,
    pub label: String,
    pub cover: u32,
    pub pole: bool,
    /// σ = e^{τ_x − κ} ∈ (1, 1+a).
    pub sigma: f64,
    /// e^{τ_x}.
    pub level: f64,
    pub tau: f64,
    pub action: f64,
    /// Per-orbit bracket −e^κ(1+a)T < action < −e^κT + a².
    pub bracket: bool,
    /// |h′(σ)e^{−κ} − T|.
    pub slope_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representative: Option<Vec<f64>>,
}

fn record_for(profile: &Profile, kappa: f64, e: &SpectrumEntry) -> Result<NegativeOrbitRecord, ProfileError> {
    let ek = kappa.exp();
    let sigma = profile.solve_slope(e.period * ek)?;
    let level = sigma * ek;
    let action = -level * e.period + profile.h(sigma);
    let a = profile.a();
    let bracket = -ek * (1.0 + a) * e.period < action && action < -ek * e.period + a * a;
    Ok(NegativeOrbitRecord {
        period: e.period,
        class: e.class.clone(),
        label: e.family.label.clone(),
        cover: e.cover,
        pole: e.pole,
        sigma,
        level,
        tau: level.ln(),
        action,
        bracket,
        slope_error: (profile.dh(sigma) / ek - e.period).abs(),
        representative: e.representative.clone(),
    })
}

fn check_threshold(spec: &PeriodSpectrum, threshold: f64) -> Result<(), ProfileError> {
    let cap = spec.cap_value();
    if cap < threshold {
        return Err(ProfileError::GapUnknown { threshold, cap });
    }
    if let Some(e) = spec.entries.iter().find(|e| (e.period - threshold).abs() <= SPECTRUM_MARGIN * threshold.max(1.0))
    {
        return Err(ProfileError::BInSpectrum { threshold, period: e.period });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargenessReport {
    /// Largest period below b·e^{−κ}, if any.
    pub period_below: Option<f64>,
    /// c(b − e^κ·T_below) − b(2a+1); with no period below, c·b − b(2a+1).
    pub value: f64,
    /// Smallest c for which the value is positive.
    pub c_needed: f64,
    pub holds: bool,
}

/// Positive action of the upper-bend orbits: c(b − e^κT) − b(2a+1) > 0
/// for the largest period T below b·e^{−κ}.
pub fn check_c_large(h: &TunedHamiltonian, spec: &PeriodSpectrum) -> Result<LargenessReport, ProfileError> {
    let thr = h.threshold();
    check_threshold(spec, thr)?;
    let p = &h.profile;
    let (a, b, c) = (p.a(), p.b(), p.c());
    let below = spec.entries.iter().map(|e| e.period).filter(|&t| t < thr).reduce(f64::max);
    let gap = match below {
        Some(t) => b - h.kappa.exp() * t,
        None => b,
    };
    let value = c * gap - b * (2.0 * a + 1.0);
    Ok(LargenessReport { period_below: below, value, c_needed: b * (2.0 * a + 1.0) / gap, holds: value > 0.0 })
}

/// One record per spectrum family with period below b·e^{−κ}, sorted by
/// period as in the spectrum.
pub fn enumerate_negative(
    h: &TunedHamiltonian,
    spec: &PeriodSpectrum,
) -> Result<Vec<NegativeOrbitRecord>, ProfileError> {
    let large = check_c_large(h, spec)?;
    if !large.holds {
        return Err(ProfileError::CTooSmall { c: h.profile.c(), needed: large.c_needed });
    }
    let thr = h.threshold();
    spec.entries.par_iter().filter(|e| e.period < thr).map(|e| record_for(&h.profile, h.kappa, e)).collect()
}

/// Action from the definition, −∮x*(e^τλ₀) + ∮H dt, with the contact term
/// integrated along the numerically flowed Reeb orbit. `None` for orbits
/// on excluded loci of a cut chart.
pub fn line_integral_action(
    h: &TunedHamiltonian,
    rec: &NegativeOrbitRecord,
    model: &ModelManifold,
    integ: &Integrator,
) -> Result<Option<f64>, ProfileError> {
    let Some(rep) = rec.representative.as_ref().filter(|_| !rec.pole) else { return Ok(None) };
    let field = ReebField::reference(model);
    let x0 = DVector::from_column_slice(rep);
    let width = rec.period / LINE_PANELS as f64;
    let (nodes, weights): (Vec<f64>, Vec<f64>) =
        (0..LINE_PANELS).flat_map(|k| gauss().points(k as f64 * width, (k + 1) as f64 * width)).unzip();
    let xs = flow_samples(&field, &x0, &nodes, integ)?;
    let mut contact = 0.0;
    for (x, w) in xs.iter().zip(&weights) {
        let v = field.eval(x)?;
        contact += w * model.contact_coeffs(x).dot(&v);
    }
    Ok(Some(-rec.level * contact + h.profile.h(rec.sigma)))
}

/// Δ: sup of pairwise differences of unequal actions, 0 when there are none.
pub fn action_gap(actions: &[f64]) -> f64 {
    action_gap_pair(actions, actions)
}

/// Δ(H⁰,H¹) = sup{A⁰ − A¹ : A⁰ ≠ A¹}, 0 when no pair has unequal actions.
pub fn action_gap_pair(a0: &[f64], a1: &[f64]) -> f64 {
    let mut best: Option<f64> = None;
    for &x in a0 {
        for &y in a1 {
            let d = x - y;
            if d.abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                best = Some(best.map_or(d, |b: f64| b.max(d)));
            }
        }
    }
    best.unwrap_or(0.0)
}

/// Δ_s(H⁰,H¹) = min{T_min(α)/2, T_min − Δ(H⁰,H¹)}.
pub fn delta_s(t_min: f64, t_min_alpha: f64, delta_pair: f64) -> f64 {
    (0.5 * t_min_alpha).min(t_min - delta_pair)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub t1: Inequality,
    pub t2_lower: Inequality,
    pub t2_upper: Inequality,
    pub t3: Inequality,
    pub tuned: bool,
}

/// Conditions (t1)–(t3) for H against a constellation.
pub fn check_tuned(h: &TunedHamiltonian, c: &RigidConstellation) -> TuningReport {
    let ek = h.kappa.exp();
    let tp = c.t_plus.lower_bound();
    let t1_rhs = (tp / c.t).min((c.t_min + c.t_min_alpha) / c.t);
    let b = h.profile.b();
    let t1 = Inequality::less("e^κ < min{T⁺/T, (T_min + T_min(α))/T}", ek, t1_rhs);
    let t2_lower = Inequality::less("T·e^κ < b", c.t * ek, b);
    let t2_upper = Inequality::less("b < T⁺", b, tp);
    let t3 = Inequality::less("2b/(b − T·e^κ) < c", 2.0 * b / (b - c.t * ek), h.profile.c());
    let t3 = if t2_lower.holds { t3 } else { Inequality { holds: false, ..t3 } };
    let tuned = t1.holds && t2_lower.holds && t2_upper.holds && t3.holds;
    TuningReport { t1, t2_lower, t2_upper, t3, tuned }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleFineReport {
    pub tuning: TuningReport,
    pub records: Vec<NegativeOrbitRecord>,
    /// Records in class α match the constellation one-to-one.
    pub bijection: bool,
    pub low: Inequality,
    pub delta: Inequality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineTuningReport {
    pub hamiltonians: Vec<SingleFineReport>,
    pub pair: Inequality,
    pub delta_s: f64,
    pub finely_tuned: bool,
}

fn class_actions(records: &[NegativeOrbitRecord], class: &HomotopyClass) -> Vec<f64> {
    records.iter().filter(|r| &r.class == class).map(|r| r.action).collect()
}

fn single_fine(
    h: &TunedHamiltonian,
    c: &RigidConstellation,
    spec: &PeriodSpectrum,
) -> Result<SingleFineReport, ProfileError> {
    let tuning = check_tuned(h, c);
    let records = enumerate_negative(h, spec)?;
    let actions = class_actions(&records, &c.class);
    let bijection = actions.len() == c.families.len();
    let max_action = actions.iter().copied().reduce(f64::max).unwrap_or(f64::NEG_INFINITY);
    let low = Inequality::less("max 𝒜_H < −T_min(α)/2", max_action, -0.5 * c.t_min_alpha);
    let delta = Inequality::less("Δ(H) < T_min", action_gap(&actions), c.t_min);
    Ok(SingleFineReport { tuning, records, bijection, low, delta })
}

/// The three inequalities that make H⁰ (and H¹) finely tuned, evaluated on
/// the enumerated orbits.
pub fn check_finely_tuned(
    h0: &TunedHamiltonian,
    h1: Option<&TunedHamiltonian>,
    c: &RigidConstellation,
    spec: &PeriodSpectrum,
) -> Result<FineTuningReport, ProfileError> {
    let mut hamiltonians = vec![single_fine(h0, c, spec)?];
    if let Some(h1) = h1 {
        hamiltonians.push(single_fine(h1, c, spec)?);
    }
    let a0 = class_actions(&hamiltonians[0].records, &c.class);
    let a1 = class_actions(&hamiltonians[hamiltonians.len() - 1].records, &c.class);
    let dpair = action_gap_pair(&a0, &a1);
    let pair = Inequality::less("Δ(H⁰, H¹) < T_min", dpair, c.t_min);
    let ds = delta_s(c.t_min, c.t_min_alpha, dpair);
    let finely_tuned =
        pair.holds && hamiltonians.iter().all(|r| r.tuning.tuned && r.bijection && r.low.holds && r.delta.holds);
    Ok(FineTuningReport { hamiltonians, pair, delta_s: ds, finely_tuned })
}

/// Choose b and c for a tuned Hamiltonian with the given a and κ: b at the
/// middle of (T·e^κ, T⁺) (clipped to the spectrum cap and moved off the
/// spectrum), c twice the larger of the (t3) and largeness thresholds.
pub fn tune(
    c: &RigidConstellation,
    spec: &PeriodSpectrum,
    a: f64,
    kappa: f64,
) -> Result<TunedHamiltonian, ProfileError> {
    let b = choose_b(c, spec, kappa)?;
    let ek = kappa.exp();
    let t3 = 2.0 * b / (b - c.t * ek);
    let thr = b / ek;
    let below = spec.entries.iter().map(|e| e.period).filter(|&t| t < thr).reduce(f64::max);
    let gap = below.map_or(b, |t| b - ek * t);
    let large = b * (2.0 * a + 1.0) / gap;
    let cc = (2.0 * t3.max(large)).max(1.0 + 2.0 * a) + 1.0;
    TunedHamiltonian::new(Profile::new(a, b, cc)?, kappa)
}

fn choose_b(c: &RigidConstellation, spec: &PeriodSpectrum, kappa: f64) -> Result<f64, ProfileError> {
    let ek = kappa.exp();
    let lo = c.t * ek;
    let cap_hi = spec.cap_value() * ek;
    let hi = match c.t_plus {
        TPlus::Finite(v) | TPlus::BeyondCap(v) => v,
        TPlus::Infinite => 2.0 * lo,
    }
    .min(cap_hi);
    if !(hi > lo) {
        return Err(ProfileError::BWindowEmpty { lo, hi });
    }
    let periods = spec.periods();
    let clear = |b: f64| periods.iter().all(|&t| (t - b / ek).abs() > 1e-3 * (hi - lo) / ek);
    for k in 0..64 {
        let frac = 0.5 + if k % 2 == 0 { 1.0 } else { -1.0 } * (k / 2) as f64 / 160.0;
        let b = lo + frac * (hi - lo);
        if clear(b) {
            return Ok(b);
        }
    }
    Err(ProfileError::BWindowEmpty { lo, hi })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbarReport {
    pub kappa0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa1: Option<f64>,
    /// Largest a (to bisection tolerance) for which the inequalities hold
    /// on the enumerated orbits.
    pub sampled: f64,
    /// Sufficient bound from the closed-form action brackets.
    pub proof: f64,
    /// The check at a = sampled/2.
    pub at_half: FineTuningReport,
}

const ABAR_SWEEP: usize = 24;

/// Largest a in [lo, hi] such that `pred` holds on the sweep up to a, to
/// bisection tolerance; 0 when `pred(lo)` fails.
fn first_failure(mut pred: impl FnMut(f64) -> bool, lo: f64, hi: f64) -> f64 {
    let ratio = (hi / lo).powf(1.0 / ABAR_SWEEP as f64);
    let mut good = lo;
    for k in 0..=ABAR_SWEEP {
        let a = if k == ABAR_SWEEP { hi } else { lo * ratio.powi(k as i32) };
        if !pred(a) {
            return if k == 0 { 0.0 } else { bisect_predicate(&mut pred, good, a, 1e-7 * a).unwrap_or(good) };
        }
        good = a;
    }
    hi
}

/// ā for a constellation: the first a at which the three inequalities
/// fail, with b and c chosen by [`tune`] for each κ. The predicate is not
/// monotone in a (very wide ramps can pass again), so a log-spaced sweep
/// locates the first failure before bisecting.
pub fn abar(
    c: &RigidConstellation,
    spec: &PeriodSpectrum,
    kappa0: f64,
    kappa1: Option<f64>,
) -> Result<AbarReport, ProfileError> {
    let check = |a: f64| -> Result<FineTuningReport, ProfileError> {
        let h0 = tune(c, spec, a, kappa0)?;
        let h1 = kappa1.map(|k| tune(c, spec, a, k)).transpose()?;
        check_finely_tuned(&h0, h1.as_ref(), c, spec)
    };
    let b_min = [Some(kappa0), kappa1]
        .into_iter()
        .flatten()
        .map(|k| choose_b(c, spec, k))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let hi = 0.999 * b_min;
    let lo = 1e-6;
    let pred = |a: f64| check(a).map(|r| r.finely_tuned).unwrap_or(false);
    let sampled = first_failure(pred, lo, hi);
    let proof = abar_proof(c, kappa0, kappa1);
    if sampled <= 0.0 {
        return Err(ProfileError::InvalidParameters(format!(
            "no a in [{lo}, {hi}] makes the Hamiltonian finely tuned"
        )));
    }
    let at_half = check(0.5 * sampled)?;
    Ok(AbarReport { kappa0, kappa1, sampled, proof, at_half })
}

/// Sufficient ā from the action brackets, using a⁰ = a¹ = a.
pub fn abar_proof(c: &RigidConstellation, kappa0: f64, kappa1: Option<f64>) -> f64 {
    let (t, tm, tma) = (c.t, c.t_min, c.t_min_alpha);
    let k1 = kappa1.unwrap_or(kappa0);
    let mut bound = f64::INFINITY;
    for k in [kappa0, k1] {
        let ek = k.exp();
        bound = bound.min((ek * tma - 0.5 * tma).max(0.0).sqrt());
        bound = bound.min(((tm - ek * (t - tma)) / (ek * t)).max(0.0));
    }
    let (e0, e1) = (kappa0.exp(), k1.exp());
    let d = tm + e0 * tma - e1 * t;
    let pair = if d > 0.0 { 0.5 * (-e1 * t + (e1 * e1 * t * t + 4.0 * d).sqrt()) } else { 0.0 };
    bound.min(pair)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// max (H¹ − H⁰) over the grid: the cost of the linear homotopy.
    pub max: f64,
    pub min: f64,
    /// max − min, the oscillation ‖H¹ − H⁰‖.
    pub norm: f64,
    pub grid_points: usize,
}

/// Cost of the linear homotopy from H⁰ to H¹ on a (τ, p) grid.
pub fn linear_cost(h0: &dyn Hamiltonian, h1: &dyn Hamiltonian, taus: &[f64], points: &[DVector<f64>]) -> CostReport {
    let (max, min) = taus
        .par_iter()
        .map(|&t| {
            points.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(mx, mn), x| {
                let d = h1.value(t, x) - h0.value(t, x);
                (mx.max(d), mn.min(d))
            })
        })
        .reduce(|| (f64::NEG_INFINITY, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1)));
    CostReport { max, min, norm: max - min, grid_points: taus.len() * points.len() }
}

/// Uniform τ grid covering the support window of profiles up to `s_max`
/// with shifts up to `kappa_max`.
pub fn tau_grid(kappa_max: f64, s_max: f64, n: usize) -> Vec<f64> {
    let lo = -1.0;
    let hi = kappa_max + s_max.ln() + 1.0;
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Closed grid over the model's sample coordinates, `per_axis` points per
/// coordinate, thinned so that the total stays below `max_points`.
pub fn model_grid(model: &ModelManifold, per_axis: usize, max_points: usize) -> Vec<DVector<f64>> {
    let coords = model.sample_coords();
    let mut per = per_axis.max(1);
    while per > 1 && per.pow(coords.len() as u32) > max_points {
        per -= 1;
    }
    let axes: Vec<Vec<f64>> = coords
        .iter()
        .map(|c| {
            if per == 1 {
                vec![0.5 * (c.lo + c.hi)]
            } else if c.periodic {
                (0..per).map(|j| c.lo + (c.hi - c.lo) * j as f64 / per as f64).collect()
            } else {
                (0..per).map(|j| c.lo + (c.hi - c.lo) * j as f64 / (per - 1) as f64).collect()
            }
        })
        .collect();
    let total: usize = axes.iter().map(|a| a.len()).product();
    (0..total)
        .map(|mut idx| {
            let s: Vec<f64> = axes
                .iter()
                .map(|a| {
                    let v = a[idx % a.len()];
                    idx /= a.len();
                    v
                })
                .collect();
            model.sample_point(&s)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PullbackShift {
    /// τ ↦ τ + ln f(p).
    LogFactor,
    /// τ ↦ τ + f(p), without the logarithm.
    Factor,
}

/// max over sample points of |Ψ*(e^τλ₀)(v) − e^τ f λ₀(v)| for the shift
/// Ψ(τ,p) = (τ + s(p), p), with DΨ from central differences.
pub fn pullback_residual(factor: &ConformalFactor, shift: PullbackShift, points: usize, seed: u64) -> f64 {
    let model = factor.model();
    let coords = model.sample_coords();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_of = |x: &DVector<f64>| match shift {
        PullbackShift::LogFactor => factor.value(x).ln(),
        PullbackShift::Factor => factor.value(x),
    };
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let tau: f64 = rng.gen_range(-1.0..1.0);
        let s: Vec<f64> = coords.iter().map(|c| rng.gen_range(c.lo..c.hi)).collect();
        let mut x = model.sample_point(&s);
        if model.is_cut() {
            x[2] = x[2].clamp(0.05, std::f64::consts::TAU - 0.05);
        }
        let frame = model.tangent_frame(&x);
        let xi = DVector::from_fn(frame.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let v = &frame * xi;
        let v_tau: f64 = rng.gen_range(-1.0..1.0);
        let psi = |t: f64, y: &DVector<f64>| (t + s_of(y), y.clone());
        let (tp, xp) = psi(tau + h * v_tau, &(&x + &v * h));
        let (tm, xm) = psi(tau - h * v_tau, &(&x - &v * h));
        let _ = (tp - tm) / (2.0 * h);
        let dx = (xp - xm) / (2.0 * h);
        let (t_img, x_img) = psi(tau, &x);
        let lhs = t_img.exp() * model.contact_coeffs(&x_img).dot(&dx);
        let rhs = tau.exp() * factor.value(&x) * model.contact_coeffs(&x).dot(&v);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub points: usize,
    /// min over the grid of H⁰ − G.
    pub upper_margin: f64,
    /// min over the grid of G − H¹.
    pub lower_margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub b: f64,
    /// (T·max f, T̂).
    pub b_window: [f64; 2],
    pub records: Vec<NegativeOrbitRecord>,
    /// [T_min(λ₀,α), T·max f].
    pub period_window: [f64; 2],
    /// Records whose action lies in (−(1+a)T·max f, −T_min(α) + a²).
    pub in_action_window: usize,
    /// Every such record has its period in `period_window`.
    pub window_ok: bool,
    pub pullback_log_residual: f64,
    pub pullback_literal_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<SandwichCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichOptions {
    pub pullback_points: usize,
    pub seed: u64,
    pub tau_points: usize,
    pub per_axis: usize,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        Self { pullback_points: 100, seed: 7, tau_points: 64, per_axis: 8 }
    }
}

/// Negative orbits of G(τ,p) = h(e^τ/f(p)) from the spectrum of λ = fλ₀,
/// the Ψ pullback identity and the H⁰ ≥ G ≥ H¹ sandwich.
pub fn conformal_sandwich(
    factor: &ConformalFactor,
    profile: &Profile,
    lambda_spec: &PeriodSpectrum,
    c: &RigidConstellation,
    opts: &SandwichOptions,
) -> Result<SandwichReport, ProfileError> {
    let fmax = factor.max_hi();
    let lo = c.t * fmax;
    let hi = c.t_plus.lower_bound().min(c.t_min + c.t_min_alpha);
    if !(hi > lo) {
        return Err(ProfileError::BWindowEmpty { lo, hi });
    }
    let b = profile.b();
    if !(b > lo && b < hi) {
        return Err(ProfileError::BOutsideWindow { b, lo, hi });
    }
    check_threshold(lambda_spec, b)?;
    let records: Vec<NegativeOrbitRecord> = lambda_spec
        .entries_in_class(&c.class)
        .filter(|e| e.period < b)
        .map(|e| record_for(profile, 0.0, e))
        .collect::<Result<_, _>>()?;
    let a = profile.a();
    let act_lo = -(1.0 + a) * c.t * fmax;
    let act_hi = -c.t_min_alpha + a * a;
    let period_window = [c.t_min_alpha, c.t * fmax];
    let tol = PERIOD_TOL * period_window[1].max(1.0);
    let selected: Vec<&NegativeOrbitRecord> =
        records.iter().filter(|r| r.action > act_lo && r.action < act_hi).collect();
    let window_ok = selected.iter().all(|r| r.period >= period_window[0] - tol && r.period <= period_window[1] + tol);
    let sandwich = if factor.min() >= 1.0 - 1e-12 {
        let h0 = TunedHamiltonian::new(profile.clone(), 0.0)?;
        let h1 = TunedHamiltonian::new(profile.clone(), factor.max().ln())?;
        let g = ConformalProfileHamiltonian { profile, factor };
        let taus = tau_grid(h1.kappa, profile.c() + profile.a(), opts.tau_points);
        let pts = model_grid(factor.model(), opts.per_axis, 4096);
        let up = linear_cost(&g, &h0, &taus, &pts);
        // h is evaluated at e^τ/f with f rounded; allow for that in the comparison
        let roundoff = 1e-12 * profile.plateau();
        let down = linear_cost(&h1, &g, &taus, &pts);
        Some(SandwichCheck {
            points: up.grid_points,
            upper_margin: up.min,
            lower_margin: down.min,
            holds: up.min >= -roundoff && down.min >= -roundoff,
        })
    } else {
        None
    };
    Ok(SandwichReport {
        b,
        b_window: [lo, hi],
        in_action_window: selected.len(),
        records,
        period_window,
        window_ok,
        pullback_log_residual: pullback_residual(factor, PullbackShift::LogFactor, opts.pullback_points, opts.seed),
        pullback_literal_residual: pullback_residual(factor, PullbackShift::Factor, opts.pullback_points, opts.seed),
        sandwich,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::build;
    use crate::geometry::FactorSpec;
    use crate::spectrum::analytic_spectrum;
    use std::f64::consts::PI;

    /// Independent trapezoid-free oracle: adaptive Simpson on h′.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let l = (m - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + m)) + f(m));
        let r = (b - m) / 6.0 * (f(m) + 4.0 * f(0.5 * (m + b)) + f(b));
        if depth == 0 || (l + r - whole).abs() < 1e-15 {
            l + r + (l + r - whole) / 15.0
        } else {
            simpson(f, a, m, depth - 1) + simpson(f, m, b, depth - 1)
        }
    }

    #[test]
    fn profile_values() {
        let p = Profile::new(0.1, 3.5, 10.0).unwrap();
        assert!((p.h(1.1) - 0.01).abs() < 1e-10);
        assert!(p.dh(1.1) == 3.5 && p.dh(5.0) == 3.5 && p.dh(10.0) == 3.5);
        assert!((p.plateau() - (3.5 * 8.9 + 0.02)).abs() < 1e-12);
        assert!((p.h(20.0) - p.plateau()).abs() < 1e-12);
        assert!((p.h(10.1 - 1e-12) - p.plateau()).abs() < 1e-9);
        let q = simpson(&|s| p.dh(s), 1.0, 1.1, 40);
        assert!((q - 0.01).abs() < 1e-10, "{q}");
        let r = p.check_invariants(10_000);
        assert!(r.all, "{r:?}");
    }

    #[test]
    fn profile_small_and_large_area_ratios() {
        for (a, b) in [(0.01, 4.6), (0.001, 6.0), (0.5, 0.6), (0.2, 0.25)] {
            let p = Profile::new(a, b, 100.0).unwrap();
            assert!((p.h(1.0 + a) - a * a).abs() < 1e-10, "{a} {b}");
            let r = p.check_invariants(2000);
            assert!(r.all, "{a} {b} {r:?}");
        }
        assert!(matches!(Profile::new(0.5, 0.5, 10.0), Err(ProfileError::InfeasibleArea { .. })));
    }

    #[test]
    fn h_is_zero_below_one() {
        let p = Profile::new(0.3, 2.0, 5.0).unwrap();
        for s in [-3.0, 0.0, 0.5, 1.0] {
            assert_eq!(p.h(s), 0.0);
        }
    }

    #[test]
    fn slope_inverse_and_round_trip() {
        let p = Profile::new(0.05, 3.5, 15.0).unwrap();
        for y in [0.01, 1.0, PI, 3.49] {
            let s = p.solve_slope(y).unwrap();
            assert!(s > 1.0 && s < 1.05);
            assert!((p.dh(s) - y).abs() < 1e-10 * y.max(1.0), "{y}");
        }
        let js = serde_json::to_string(&p).unwrap();
        let back: Profile = serde_json::from_str(&js).unwrap();
        assert_eq!(back.params(), p.params());
        let bad = ProfileParams { p: p.shape() * 1.5, ..p.params() };
        assert!(Profile::from_params(bad).is_err());
    }

    #[test]
    fn c_largeness_arithmetic() {
        let m = ModelManifold::sphere(2);
        let sp = analytic_spectrum(&m, 10.0).unwrap();
        let h = TunedHamiltonian::new(Profile::new(0.05, 3.5, 10.0).unwrap(), 0.0).unwrap();
        let r = check_c_large(&h, &sp).unwrap();
        assert!(!r.holds);
        assert!((r.value - (10.0 * (3.5 - PI) - 3.5 * 1.1)).abs() < 1e-12);
        let h = TunedHamiltonian::new(Profile::new(0.05, 3.5, 15.0).unwrap(), 0.0).unwrap();
        let r = check_c_large(&h, &sp).unwrap();
        assert!(r.holds && (r.value - (15.0 * (3.5 - PI) - 3.85)).abs() < 1e-12);
        let h = TunedHamiltonian::new(Profile::new(0.05, 2.0, 1.2).unwrap(), 0.0).unwrap();
        let r = check_c_large(&h, &sp).unwrap();
        assert!(r.period_below.is_none() && r.holds);
        let h = TunedHamiltonian::new(Profile::new(0.05, PI, 30.0).unwrap(), 0.0).unwrap();
        assert!(matches!(check_c_large(&h, &sp), Err(ProfileError::BInSpectrum { .. })));
    }

    #[test]
    fn sphere_enumeration() {
        let m = ModelManifold::sphere(2);
        let sp = analytic_spectrum(&m, 10.0).unwrap();
        let h = TunedHamiltonian::new(Profile::new(0.05, 3.5, 30.0).unwrap(), 0.0).unwrap();
        let recs = enumerate_negative(&h, &sp).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert!(r.action > -1.05 * PI && r.action < -PI + 0.0025, "{}", r.action);
        assert!(r.bracket && r.slope_error < 1e-10);
        let h = TunedHamiltonian::new(Profile::new(0.05, 3.5, 200.0).unwrap(), 1.1f64.ln()).unwrap();
        assert_eq!(enumerate_negative(&h, &sp).unwrap().len(), 1);
        let h = TunedHamiltonian::new(Profile::new(0.05, 3.5, 10.0).unwrap(), 0.0).unwrap();
        assert!(matches!(enumerate_negative(&h, &sp), Err(ProfileError::CTooSmall { .. })));
    }

    #[test]
    fn ellipsoid_enumeration_and_tuning() {
        let m = ModelManifold::ellipsoid(&[1.0, 1.2]).unwrap();
        let sp = analytic_spectrum(&m, 10.0).unwrap();
        let c = build(Some(&m), &HomotopyClass::Trivial, 1.44 * PI, &sp).unwrap();
        let needed = 2.0 * 4.6 / (4.6 - 1.44 * PI);
        assert!((needed - 120.88).abs() < 0.01, "{needed}");
        let h = TunedHamiltonian::new(Profile::new(0.01, 4.6, needed * 1.01).unwrap(), 0.0).unwrap();
        let t = check_tuned(&h, &c);
        assert!(t.tuned, "{t:?}");
        assert!((t.t3.lhs - needed).abs() < 1e-9);
        let h_low = TunedHamiltonian::new(Profile::new(0.01, 4.6, needed * 0.99).unwrap(), 0.0).unwrap();
        assert!(!check_tuned(&h_low, &c).t3.holds);
        let recs = enumerate_negative(&h, &sp).unwrap();
        assert_eq!(recs.len(), 2);
        let f = check_finely_tuned(&h, None, &c, &sp).unwrap();
        assert!(f.finely_tuned, "{f:?}");
        let d = f.hamiltonians[0].delta.lhs;
        assert!((d - 0.44 * PI).abs() < 0.02 * PI, "{d}");
    }

    #[test]
    fn gaps_follow_the_definition() {
        assert_eq!(action_gap(&[-3.0]), 0.0);
        assert_eq!(action_gap(&[-3.0, -3.0]), 0.0);
        assert_eq!(action_gap(&[-3.0, -4.5, -4.0]), 1.5);
        assert_eq!(action_gap_pair(&[-3.0], &[-3.0]), 0.0);
        assert_eq!(action_gap_pair(&[-3.0], &[-4.0, -3.0]), 1.0);
        assert_eq!(action_gap_pair(&[-4.0], &[-3.0]), -1.0);
        assert_eq!(delta_s(PI, PI, 0.0), 0.5 * PI);
    }

    #[test]
    fn linear_cost_of_scaled_profile_is_nonpositive() {
        let s = ModelManifold::sphere(2);
        let f = ConformalFactor::new(&s, FactorSpec::Ellipsoid { weights: vec![1.0, 1.2] }).unwrap();
        let p = Profile::new(0.05, 4.6, 200.0).unwrap();
        let h0 = TunedHamiltonian::new(p.clone(), 0.0).unwrap();
        let h1 = TunedHamiltonian::new(p.clone(), f.max().ln()).unwrap();
        let taus = tau_grid(h1.kappa, 200.05, 400);
        let pts = model_grid(&s, 4, 64);
        let same = linear_cost(&h0, &h0, &taus, &pts);
        assert_eq!((same.max, same.min), (0.0, 0.0));
        let down = linear_cost(&h0, &h1, &taus, &pts);
        assert!(down.max <= 0.0 && down.norm > 0.0);
        let g = ConformalProfileHamiltonian { profile: &p, factor: &f };
        assert!(linear_cost(&h0, &g, &taus, &pts).max <= 0.0);
        let lower = linear_cost(&g, &h1, &taus, &pts);
        assert!(lower.max <= 1e-12 * p.plateau(), "{lower:?}");
    }

    #[test]
    fn pullback_needs_the_log_shift() {
        let s = ModelManifold::sphere(2);
        let f = ConformalFactor::new(&s, FactorSpec::Ellipsoid { weights: vec![1.0, 1.2] }).unwrap();
        assert!(pullback_residual(&f, PullbackShift::LogFactor, 100, 1) < 1e-8);
        assert!(pullback_residual(&f, PullbackShift::Factor, 100, 1) > 1e-2);
    }
}
