//! Hypothesis ledgers for the orbit-existence results: each certificate
//! records the inequalities that were checked (with margins computed from
//! the enclosure of the conformal factor), the guaranteed number of closed
//! orbits, the period window that contains them and the condition under
//! which they are geometrically distinct.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constellation::{self, ConstellationError, Distinctness, RigidConstellation};
use crate::dynamics::{scan_orbits, Nondegeneracy, ReebField, ScanOptions};
use crate::geometry::{ClassOrder, ConformalFactor, GeometryError, HomotopyClass, ModelKind, ModelManifold};
use crate::numeric::extended_f64;
use crate::profiles::Inequality;
use crate::spectrum::{PeriodSpectrum, TPlus};

/// Relative slack applied to the period window when scanning for orbits.
pub const WINDOW_SLACK: f64 = 1e-7;
/// Seeds per scanned coordinate below which a scan cannot refute a count.
pub const MIN_SEEDS_PER_DIM: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("missing or inconsistent bundle data: {0}")]
    MissingBundleData(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("constellation of class {class} with T = {t} is not rigid")]
    ConstellationNotRigid { class: String, t: f64, constellation: Box<RigidConstellation> },
    #[error("certify_sphere needs a sphere model, got {0}")]
    WrongModel(String),
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    ElSphere,
    Prequantization,
    Persist,
    T3,
    S2xS1,
    S3,
    FlatTorus,
    Katok,
    Fast,
}

impl TheoremId {
    pub fn parse(s: &str) -> Option<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Some(match key.as_str() {
            "elsphere" | "sphere" => TheoremId::ElSphere,
            "prequantization" => TheoremId::Prequantization,
            "persist" => TheoremId::Persist,
            "t3" => TheoremId::T3,
            "s2xs1" => TheoremId::S2xS1,
            "s3" => TheoremId::S3,
            "flattorus" => TheoremId::FlatTorus,
            "katok" => TheoremId::Katok,
            "fast" => TheoremId::Fast,
            _ => return None,
        })
    }
}

/// How a ledger entry was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    /// Checked by arithmetic on certified quantities.
    Verified,
    /// Checked on the orbits a finite scan found.
    Sampled,
    /// Not checkable here; taken as a hypothesis.
    Assumed,
    /// An established analytic step that the computation relies on.
    Axiom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub status: HypothesisStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequality: Option<Inequality>,
    /// margin / rhs; 1 when the right-hand side is infinite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_margin: Option<f64>,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LedgerEntry {
    pub fn inequality(label: &str, lhs: f64, rhs: f64) -> Self {
        let ineq = Inequality::less(label, lhs, rhs);
        let relative_margin = if rhs.is_infinite() {
            Some(1.0)
        } else if rhs != 0.0 {
            Some(ineq.margin / rhs.abs())
        } else {
            None
        };
        Self {
            label: label.into(),
            status: HypothesisStatus::Verified,
            holds: ineq.holds,
            inequality: Some(ineq),
            relative_margin,
            note: None,
        }
    }

    pub fn fact(label: &str, status: HypothesisStatus, holds: bool) -> Self {
        Self { label: label.into(), status, inequality: None, relative_margin: None, holds, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_status(mut self, status: HypothesisStatus) -> Self {
        self.status = status;
        self
    }
}

/// Range of a conformal factor: nominal extrema and a rigorous enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorBounds {
    pub min: f64,
    pub max: f64,
    pub min_lo: f64,
    pub max_hi: f64,
}

impl FactorBounds {
    /// Bounds known exactly (enclosure equals the nominal range).
    pub fn exact(min: f64, max: f64) -> Result<Self, CertifyError> {
        Self::enclosed(min, max, min, max)
    }

    pub fn enclosed(min: f64, max: f64, min_lo: f64, max_hi: f64) -> Result<Self, CertifyError> {
        let ok = [min, max, min_lo, max_hi].iter().all(|v| v.is_finite())
            && min_lo > 0.0
            && min_lo <= min
            && min <= max
            && max <= max_hi;
        if !ok {
            return Err(CertifyError::InvalidParameters(format!(
                "factor range needs 0 < min_lo ≤ min ≤ max ≤ max_hi, got [{min_lo}, {min}, {max}, {max_hi}]"
            )));
        }
        Ok(Self { min, max, min_lo, max_hi })
    }

    pub fn of(f: &ConformalFactor) -> Self {
        Self { min: f.min(), max: f.max(), min_lo: f.min_lo(), max_hi: f.max_hi() }
    }

    pub fn ratio(&self) -> f64 {
        self.max / self.min
    }

    /// Ratio over the enclosure, the value every hypothesis is tested with.
    pub fn ratio_hi(&self) -> f64 {
        self.max_hi / self.min_lo
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { min: c * self.min, max: c * self.max, min_lo: c * self.min_lo, max_hi: c * self.max_hi }
    }

    /// Enclosure widened outward by `lo` below and `hi` above.
    pub fn widened(&self, lo: f64, hi: f64) -> Self {
        Self { min_lo: self.min_lo - lo.max(0.0), max_hi: self.max_hi + hi.max(0.0), ..*self }
    }

    pub fn is_constant(&self) -> bool {
        self.min_lo == self.max_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistinctnessVerdict {
    /// The guaranteed orbits are geometrically distinct.
    Geometric,
    /// Distinct as parametrized orbits; no geometric statement.
    DistinctOnly,
    /// Geometrically distinct if no closed orbit has period ≤ threshold.
    Conditional { threshold: f64 },
}

impl From<Distinctness> for DistinctnessVerdict {
    fn from(d: Distinctness) -> Self {
        match d {
            Distinctness::Always => DistinctnessVerdict::Geometric,
            Distinctness::Threshold(threshold) => DistinctnessVerdict::Conditional { threshold },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossVerdict {
    Pass,
    Fail,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedFamily {
    pub period: f64,
    pub dimension: usize,
    pub betti_sum: u64,
    pub nondegeneracy: Nondegeneracy,
    pub members: usize,
    pub representative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub verdict: CrossVerdict,
    pub required: u64,
    /// Scanned period window (certificate enclosure window with slack).
    pub window: [f64; 2],
    pub families: Vec<ObservedFamily>,
    /// Families counted by the rank rule (sum of Betti sums).
    pub observed_rank: u64,
    pub nondegenerate: usize,
    pub seeds: usize,
    pub seeds_per_dim: usize,
    pub convergence_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub theorem: TheoremId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<HomotopyClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<FactorBounds>,
    pub ledger: Vec<LedgerEntry>,
    /// Ledger of the variant for exactly fillable manifolds, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filled_ledger: Option<Vec<LedgerEntry>>,
    pub count: u64,
    /// Period window from the nominal extrema of f.
    pub window: [f64; 2],
    /// Period window from the enclosure of f; contains `window`.
    pub window_enclosure: [f64; 2],
    pub distinctness: DistinctnessVerdict,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filled_valid: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<CrossValidation>,
}

impl Certificate {
    /// Validity of the variant selected by `filled`.
    pub fn valid_for(&self, filled: bool) -> bool {
        if filled {
            self.filled_valid.unwrap_or(self.valid)
        } else {
            self.valid
        }
    }

    /// The smallest inequality margin in the ledger, if any.
    pub fn min_margin(&self) -> Option<f64> {
        self.ledger.iter().filter_map(|e| e.inequality.as_ref().map(|i| i.margin)).reduce(f64::min)
    }

    fn ratio_entry(&self) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|e| e.label.starts_with("max f / min f"))
    }

    /// Relative margin of the ratio hypothesis.
    pub fn ratio_relative_margin(&self) -> Option<f64> {
        self.ratio_entry().and_then(|e| e.relative_margin)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn all_hold(ledger: &[LedgerEntry]) -> bool {
    ledger.iter().all(|e| e.holds)
}

fn ratio_label(bound: &str) -> String {
    format!("max f / min f < {bound}")
}

fn positivity_entry(b: &FactorBounds) -> LedgerEntry {
    LedgerEntry::inequality("0 < min f", 0.0, b.min_lo).with_note("enclosure lower end")
}

/// Ratio hypothesis max f / min f < bound on the enclosure of f.
fn ratio_entry(b: &FactorBounds, bound: f64, bound_text: &str) -> LedgerEntry {
    let mut e = LedgerEntry::inequality(&ratio_label(bound_text), b.ratio_hi(), bound);
    if b.ratio_hi() != b.ratio() {
        e = e.with_note(format!("nominal ratio {:.12}, enclosure ratio {:.12}", b.ratio(), b.ratio_hi()));
    }
    e
}

/// Certificate for the unit sphere S^{2n−1} ⊂ C^n with f·λ₀: at least n
/// distinct closed orbits with period in [π min f, π max f] when
/// max f / min f < 2.
pub fn certify_sphere(model: &ModelManifold, bounds: FactorBounds) -> Result<Certificate, CertifyError> {
    let n = match model.kind() {
        ModelKind::Sphere { n } => *n,
        _ => return Err(CertifyError::WrongModel(model.name())),
    };
    let ledger = vec![
        positivity_entry(&bounds),
        ratio_entry(&bounds, 2.0, "2"),
        LedgerEntry::fact(
            "the (T_min, 2T_min) window of the round sphere persists under the ratio bound",
            HypothesisStatus::Axiom,
            true,
        ),
    ];
    Ok(Certificate {
        theorem: TheoremId::ElSphere,
        model: Some(model.name()),
        class: Some(HomotopyClass::Trivial),
        factor: Some(bounds),
        valid: all_hold(&ledger),
        ledger,
        filled_ledger: None,
        filled_valid: None,
        count: n as u64,
        window: [PI * bounds.min, PI * bounds.max],
        window_enclosure: [PI * bounds.min_lo, PI * bounds.max_hi],
        distinctness: DistinctnessVerdict::DistinctOnly,
        notes: vec![],
        cross_validation: None,
    })
}

/// Data of a prequantization bundle that the certificate takes as given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundleData {
    /// Real dimension of the base.
    pub dim_q: usize,
    /// Order of the class of the fibre.
    pub order: ClassOrder,
    pub primitive: bool,
}

impl BundleData {
    fn validate(&self) -> Result<(), CertifyError> {
        if self.dim_q == 0 || self.dim_q % 2 != 0 {
            return Err(CertifyError::MissingBundleData(format!(
                "base dimension must be a positive even number, got {}",
                self.dim_q
            )));
        }
        if self.order == ClassOrder::Finite(0) {
            return Err(CertifyError::MissingBundleData("fibre class order must be positive".into()));
        }
        Ok(())
    }
}

/// Certificate for a prequantization bundle with fibre period 2π: at least
/// dim Q / 2 + 1 distinct orbits with period in [2π min f, 2π max f].
pub fn certify_prequantization(
    bundle: BundleData,
    bounds: FactorBounds,
    filled: bool,
) -> Result<Certificate, CertifyError> {
    bundle.validate()?;
    let ledger = vec![
        positivity_entry(&bounds),
        ratio_entry(&bounds, 2.0, "2"),
        LedgerEntry::fact("fibre orbits form a rigid Morse–Bott constellation", HypothesisStatus::Axiom, true),
    ];
    let (filled_ledger, filled_valid) = if filled {
        let (bound, text) = match bundle.order {
            ClassOrder::Finite(m) => ((m + 1) as f64, format!("|α_f| + 1 = {}", m + 1)),
            ClassOrder::Infinite => (f64::INFINITY, "|α_f| + 1 = ∞".into()),
        };
        let l = vec![
            positivity_entry(&bounds),
            ratio_entry(&bounds, bound, &text),
            LedgerEntry::fact("the bundle admits an exact filling", HypothesisStatus::Assumed, true),
        ];
        let v = all_hold(&l);
        (Some(l), Some(v))
    } else {
        (None, None)
    };
    let distinctness = match bundle.order {
        ClassOrder::Infinite => DistinctnessVerdict::Geometric,
        _ if bundle.primitive => DistinctnessVerdict::Geometric,
        ClassOrder::Finite(m) => {
            DistinctnessVerdict::Conditional { threshold: TAU / m as f64 * (bounds.max_hi - bounds.min_lo) }
        }
    };
    Ok(Certificate {
        theorem: TheoremId::Prequantization,
        model: Some(format!("prequantization bundle over a base of dimension {}", bundle.dim_q)),
        class: None,
        factor: Some(bounds),
        valid: all_hold(&ledger),
        ledger,
        filled_ledger,
        filled_valid,
        count: (bundle.dim_q / 2 + 1) as u64,
        window: [TAU * bounds.min, TAU * bounds.max],
        window_enclosure: [TAU * bounds.min_lo, TAU * bounds.max_hi],
        distinctness,
        notes: vec![],
        cross_validation: None,
    })
}

/// Certificate for the convex-hypersurface setting with data ε: the
/// reference spectrum lies in [1−ε, 1+ε]·2π up to double periods, and 2n
/// orbits are guaranteed in [2π min f/(1+ε), 2π max f/(1−ε)] when
/// max f / min f < 2(1−ε)/(1+ε).
pub fn certify_katok(epsilon: f64, n: usize, bounds: FactorBounds) -> Result<Certificate, CertifyError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(CertifyError::InvalidParameters(format!("ε must lie in (0, 1/2), got {epsilon}")));
    }
    if n == 0 {
        return Err(CertifyError::InvalidParameters("n must be positive".into()));
    }
    let bound = 2.0 * (1.0 - epsilon) / (1.0 + epsilon);
    let ledger = vec![
        positivity_entry(&bounds),
        ratio_entry(&bounds, bound, &format!("2(1−ε)/(1+ε) = {bound:.12}")),
        LedgerEntry::fact(
            "reference periods lie in the ε-neighbourhood stated by the input data",
            HypothesisStatus::Assumed,
            true,
        ),
    ];
    let mut notes = vec![];
    if bound <= 1.0 {
        notes.push(format!("ratio bound {bound:.6} ≤ 1: no conformal factor satisfies the hypothesis"));
    }
    let window = [TAU * bounds.min / (1.0 + epsilon), TAU * bounds.max / (1.0 - epsilon)];
    let window_enclosure = [TAU * bounds.min_lo / (1.0 + epsilon), TAU * bounds.max_hi / (1.0 - epsilon)];
    Ok(Certificate {
        theorem: TheoremId::Katok,
        model: Some(format!("starshaped hypersurface in C^{n}")),
        class: Some(HomotopyClass::Trivial),
        factor: Some(bounds),
        valid: all_hold(&ledger),
        ledger,
        filled_ledger: None,
        filled_valid: None,
        count: 2 * n as u64,
        window,
        window_enclosure,
        distinctness: DistinctnessVerdict::Conditional { threshold: window_enclosure[1] - window_enclosure[0] },
        notes,
        cross_validation: None,
    })
}

/// How the nondegeneracy of the orbits of f·λ₀ in the window is handled.
#[derive(Debug, Clone, PartialEq)]
pub enum NondegeneracyCheck {
    /// Record the hypothesis as an assumption.
    Assume,
    /// Scan the window, classify the orbits found by Floquet analysis and
    /// attach the scan as cross-validation.
    Sample(ScanOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistOptions {
    pub filled: bool,
    pub nondegeneracy: NondegeneracyCheck,
}

impl Default for PersistOptions {
    fn default() -> Self {
        Self { filled: false, nondegeneracy: NondegeneracyCheck::Assume }
    }
}

fn persist_theorem(kind: &ModelKind) -> TheoremId {
    match kind {
        ModelKind::Torus3 { .. } => TheoremId::T3,
        ModelKind::CutS2xS1 { .. } => TheoremId::S2xS1,
        ModelKind::CutS3 { .. } => TheoremId::S3,
        ModelKind::FlatTorusCosphere { .. } => TheoremId::FlatTorus,
        _ => TheoremId::Persist,
    }
}

/// Closed-form ratio bound of the catalog models at T = T_min(α).
fn closed_form_bound(kind: &ModelKind, class: &HomotopyClass) -> Option<f64> {
    match (kind, class) {
        (ModelKind::Torus3 { .. }, HomotopyClass::Winding(v)) if v.len() == 3 && v[2] == 0 => {
            let r = ((v[0] * v[0] + v[1] * v[1]) as f64).sqrt();
            Some((r + 1.0) / r)
        }
        (ModelKind::CutS2xS1 { .. }, HomotopyClass::Winding(v)) if v.len() == 1 && v[0].abs() == 1 => Some(2f64.sqrt()),
        (ModelKind::CutS2xS1 { .. }, HomotopyClass::Trivial) => Some(2.0),
        (ModelKind::CutS3 { .. }, HomotopyClass::Trivial) => Some(2f64.sqrt()),
        _ => None,
    }
}

/// Ratio bound from a constellation: min{T⁺/T, (T_min + T_min(α))/T}, or
/// T⁺/T alone for the filled variant. Uses the certified lower bound of T⁺.
pub fn persist_bound(c: &RigidConstellation, filled: bool) -> f64 {
    let above = c.t_plus.lower_bound() / c.t;
    if filled {
        above
    } else {
        above.min((c.t_min + c.t_min_alpha) / c.t)
    }
}

fn persist_ledger(c: &RigidConstellation, bounds: &FactorBounds, filled: bool) -> Vec<LedgerEntry> {
    let mut ledger = vec![positivity_entry(bounds)];
    ledger.push(
        LedgerEntry::fact("constellation members are simple", HypothesisStatus::Verified, c.rigidity.simple)
            .with_note(format!("non-simple members: {:?}", c.rigidity.non_simple_members)),
    );
    if let Some(gap) = c.rigidity.gap_above {
        let mut e = LedgerEntry::inequality("T < T⁺", c.t, c.t + gap);
        if let TPlus::BeyondCap(cap) = c.t_plus {
            e = e.with_note(format!("no period above T up to the cap {cap}; T⁺ ≥ cap"));
        }
        ledger.push(e);
    }
    if !filled {
        ledger.push(LedgerEntry::inequality("T < T_min + T_min(α)", c.t, c.t_min + c.t_min_alpha));
    }
    let mut unknown = 0;
    let mut degenerate = 0;
    for e in &c.families {
        match e.nondegeneracy {
            None => unknown += 1,
            Some(Nondegeneracy::Degenerate { .. }) => degenerate += 1,
            Some(_) => {}
        }
    }
    let mut e = LedgerEntry::fact(
        "constellation members are nondegenerate or Morse–Bott",
        if unknown > 0 { HypothesisStatus::Assumed } else { HypothesisStatus::Verified },
        degenerate == 0,
    );
    if unknown > 0 {
        e = e.with_note(format!("{unknown} member(s) without Floquet data (collapsed-fibre orbits) are assumed"));
    }
    ledger.push(e);

    let bound = persist_bound(c, filled);
    let text = match (filled, c.t_plus) {
        (true, _) => format!("T⁺/T = {bound:.12}"),
        (false, TPlus::Infinite) => format!("(T_min + T_min(α))/T = {bound:.12} (T⁺ = ∞)"),
        (false, TPlus::BeyondCap(cap)) => {
            format!("min{{T⁺/T, (T_min + T_min(α))/T}} = {bound:.12} (T⁺ ≥ cap {cap})")
        }
        (false, TPlus::Finite(_)) => format!("min{{T⁺/T, (T_min + T_min(α))/T}} = {bound:.12}"),
    };
    ledger.push(ratio_entry(bounds, bound, &text));
    if filled {
        ledger.push(LedgerEntry::fact("the manifold admits an exact filling", HypothesisStatus::Assumed, true));
    }
    ledger.push(LedgerEntry::fact(
        "filtered continuation maps factor through the constellation homology",
        HypothesisStatus::Axiom,
        true,
    ));
    ledger
}

/// Persistence certificate from a constellation and a factor range:
/// rank(𝒞) orbits in class α with period in [min f·T_min(α), max f·T].
pub fn certify_constellation(
    c: &RigidConstellation,
    kind: Option<&ModelKind>,
    bounds: FactorBounds,
    filled: bool,
) -> Result<Certificate, CertifyError> {
    if !c.is_rigid() {
        return Err(CertifyError::ConstellationNotRigid {
            class: c.class.to_string(),
            t: c.t,
            constellation: Box::new(c.clone()),
        });
    }
    let mut ledger = persist_ledger(c, &bounds, false);
    ledger.push(LedgerEntry::fact("orbits of f·λ₀ in the window are nondegenerate", HypothesisStatus::Assumed, true));
    let (filled_ledger, filled_valid) = if filled {
        let mut l = persist_ledger(c, &bounds, true);
        l.push(LedgerEntry::fact("orbits of f·λ₀ in the window are nondegenerate", HypothesisStatus::Assumed, true));
        let v = all_hold(&l);
        (Some(l), Some(v))
    } else {
        (None, None)
    };
    let mut notes = Vec::new();
    if let Some(k) = kind {
        if let Some(b) = closed_form_bound(k, &c.class) {
            if (c.t - c.t_min_alpha).abs() <= 1e-12 * c.t.max(1.0) {
                notes.push(format!("closed-form ratio bound for this model and class: {b:.12}"));
            }
        }
    }
    if let Some(r) = &c.rank_note {
        notes.push(r.clone());
    }
    let distinctness =
        constellation::distinctness_threshold(&c.class, bounds.min_lo, bounds.max_hi, c.t, c.t_min_alpha);
    Ok(Certificate {
        theorem: kind.map_or(TheoremId::Persist, persist_theorem),
        model: c.model.clone(),
        class: Some(c.class.clone()),
        factor: Some(bounds),
        valid: all_hold(&ledger),
        ledger,
        filled_ledger,
        filled_valid,
        count: c.rank,
        window: [bounds.min * c.t_min_alpha, bounds.max * c.t],
        window_enclosure: [bounds.min_lo * c.t_min_alpha, bounds.max_hi * c.t],
        distinctness: distinctness.into(),
        notes,
        cross_validation: None,
    })
}

/// Persistence certificate for f·λ₀ on a catalog model.
pub fn certify_persist(
    model: &ModelManifold,
    class: &HomotopyClass,
    t: f64,
    factor: &ConformalFactor,
    spec: &PeriodSpectrum,
    opts: &PersistOptions,
) -> Result<Certificate, CertifyError> {
    if factor.model() != model {
        return Err(CertifyError::InvalidParameters(format!(
            "factor belongs to {}, not {}",
            factor.model().name(),
            model.name()
        )));
    }
    let c = constellation::build(Some(model), class, t, spec)?;
    let mut cert = certify_constellation(&c, Some(model.kind()), FactorBounds::of(factor), opts.filled)?;
    if factor.is_constant() {
        let entry =
            LedgerEntry::fact("orbits of f·λ₀ in the window are nondegenerate", HypothesisStatus::Verified, true)
                .with_note("f is constant: the orbits are the rescaled constellation, counted by the rank rule");
        replace_nondegeneracy(&mut cert, entry);
    }
    if let NondegeneracyCheck::Sample(scan) = &opts.nondegeneracy {
        let cv = cross_validate(&cert, factor, scan);
        if !factor.is_constant() {
            replace_nondegeneracy(&mut cert, sampled_nondegeneracy(&cv));
        }
        cert.cross_validation = Some(cv);
    }
    Ok(cert)
}

fn replace_nondegeneracy(cert: &mut Certificate, entry: LedgerEntry) {
    for ledger in std::iter::once(&mut cert.ledger).chain(cert.filled_ledger.as_mut()) {
        if let Some(slot) = ledger.iter_mut().find(|e| e.label == entry.label) {
            *slot = entry.clone();
        }
    }
    cert.valid = all_hold(&cert.ledger);
    cert.filled_valid = cert.filled_ledger.as_ref().map(|l| all_hold(l));
}

/// Ledger entry from the Floquet classification of the scanned orbits. A
/// positive-dimensional family already contains infinitely many orbits, so
/// only isolated degenerate orbits count against the hypothesis.
fn sampled_nondegeneracy(cv: &CrossValidation) -> LedgerEntry {
    let label = "orbits of f·λ₀ in the window are nondegenerate";
    if cv.verdict == CrossVerdict::Unverified && cv.families.is_empty() {
        return LedgerEntry::fact(label, HypothesisStatus::Assumed, true)
            .with_note(cv.note.clone().unwrap_or_else(|| "scan inconclusive".into()));
    }
    let isolated_degenerate = cv
        .families
        .iter()
        .filter(|f| f.dimension == 0 && matches!(f.nondegeneracy, Nondegeneracy::Degenerate { .. }))
        .count();
    let families = cv.families.iter().filter(|f| f.dimension > 0).count();
    let mut note = format!("{} orbit families found, {} nondegenerate", cv.families.len(), cv.nondegenerate);
    if families > 0 {
        note.push_str(&format!("; {families} positive-dimensional families (each contains infinitely many orbits)"));
    }
    LedgerEntry::fact(label, HypothesisStatus::Sampled, isolated_degenerate == 0).with_note(note)
}

/// Scan the certificate's window and class for closed orbits of f·λ₀ and
/// compare the count, by the rank rule, with the guaranteed number.
pub fn cross_validate(cert: &Certificate, factor: &ConformalFactor, opts: &ScanOptions) -> CrossValidation {
    let lo = cert.window_enclosure[0] * (1.0 - WINDOW_SLACK);
    let hi = cert.window_enclosure[1] * (1.0 + WINDOW_SLACK);
    let mut cv = CrossValidation {
        verdict: CrossVerdict::Unverified,
        required: cert.count,
        window: [lo, hi],
        families: vec![],
        observed_rank: 0,
        nondegenerate: 0,
        seeds: 0,
        seeds_per_dim: 0,
        convergence_rate: 0.0,
        note: None,
    };
    let class = cert.class.clone().unwrap_or(HomotopyClass::Trivial);
    if let Some(name) = &cert.model {
        if *name != factor.model().name() {
            cv.note = Some(format!("certificate model {name} differs from the factor's model"));
            return cv;
        }
    }
    let field = ReebField::conformal(factor);
    let report = match scan_orbits(&field, &class, (lo, hi), opts) {
        Ok(r) => r,
        Err(e) => {
            cv.note = Some(format!("scan failed: {e}"));
            return cv;
        }
    };
    cv.seeds = report.coverage.seeds;
    cv.seeds_per_dim = report.coverage.seeds_per_dim;
    cv.convergence_rate = report.coverage.convergence_rate;
    cv.families = report
        .families
        .iter()
        .map(|f| ObservedFamily {
            period: f.period,
            dimension: f.dimension,
            betti_sum: f.topology.betti_sum(),
            nondegeneracy: f.nondegeneracy,
            members: f.member_count,
            representative: f.representative().base.clone(),
        })
        .collect();
    cv.observed_rank = cv.families.iter().map(|f| f.betti_sum).sum();
    cv.nondegenerate = cv.families.iter().filter(|f| f.nondegeneracy == Nondegeneracy::Nondegenerate).count();
    let adequate = report.coverage.seeds_per_dim >= MIN_SEEDS_PER_DIM && report.coverage.failed_seeds == 0;
    cv.verdict = if cv.observed_rank >= cert.count {
        CrossVerdict::Pass
    } else if adequate {
        CrossVerdict::Fail
    } else {
        cv.note = Some(format!(
            "coverage below threshold ({} seeds per coordinate, {} failed seeds)",
            report.coverage.seeds_per_dim, report.coverage.failed_seeds
        ));
        CrossVerdict::Unverified
    };
    cv
}

/// Inputs of the fast-orbit certificate produced by the semi-plug.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastOrbitData {
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub dimension: usize,
    /// Period of the inserted orbit.
    pub period: f64,
    /// Upper bound e^{2δ+4ε} for max f.
    #[serde(with = "extended_f64")]
    pub factor_bound: f64,
}

/// Certificate that a form f·λ with max f < 1 + c₁ and min f = 1 has a
/// closed orbit of period < c₂, from checks carried out on the semi-plug.
pub fn certify_fast(data: &FastOrbitData, checks: Vec<LedgerEntry>) -> Certificate {
    let mut ledger = vec![
        LedgerEntry::inequality("inserted orbit period < c₂", data.period, data.c2),
        LedgerEntry::inequality("e^{2δ+4ε} < 1 + c₁", data.factor_bound, 1.0 + data.c1),
    ];
    ledger.extend(checks);
    ledger.push(LedgerEntry::fact(
        "Gray stability turns the plugged form into f·λ with min f = 1 and max f ≤ e^{∫ sup r̄ + ∫ sup r̂}",
        HypothesisStatus::Axiom,
        true,
    ));
    Certificate {
        theorem: TheoremId::Fast,
        model: Some(format!("semi-plug in dimension {}", data.dimension)),
        class: None,
        factor: None,
        valid: all_hold(&ledger),
        ledger,
        filled_ledger: None,
        filled_valid: None,
        count: 1,
        window: [data.period, data.period],
        window_enclosure: [data.period, data.period],
        distinctness: DistinctnessVerdict::Geometric,
        notes: vec!["parameters satisfy 2δ + 4ε < ln(1 + c₁), which gives max f < 1 + c₁".into()],
        cross_validation: None,
    }
}
