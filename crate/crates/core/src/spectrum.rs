//! Period spectra of Reeb flows: exact enumerations for the catalog models,
//! numeric spectra from orbit scans, and externally supplied data.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{scan_orbits, DynamicsError, FamilyTopology, Nondegeneracy, ReebField, ScanOptions};
use crate::geometry::{ConformalFactor, GeometryError, HomotopyClass, ModelKind, ModelManifold};
use crate::numeric::gcd;

/// Relative tolerance for treating two periods as equal.
pub const PERIOD_TOL: f64 = 1e-9;
/// Largest number of lattice points an analytic enumeration may visit.
const MAX_ENUMERATION: f64 = 5e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("spectrum has no entries")]
    Empty,
    #[error("no period in class {class} up to the cap")]
    EmptyClass { class: String },
    #[error("spectrum cap {cap} is below the required {needed}")]
    CapInsufficient { needed: f64, cap: f64 },
    #[error("cap {0} is too large for exact enumeration")]
    TooLarge(f64),
    #[error("invalid spectrum: {0}")]
    Invalid(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    Numeric { window: [f64; 2], seeds_per_dim: usize },
    External { source: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub topology: FamilyTopology,
    /// Dimension of the family after the ℝ/ℤ quotient.
    pub dimension: usize,
    pub label: String,
}

/// One orbit family of the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub period: f64,
    pub class: HomotopyClass,
    pub family: FamilyDescriptor,
    /// Multiplicity as a cover of a simple orbit (1 = simple).
    pub cover: u32,
    /// Orbit on a collapsed fibre of a cut model.
    #[serde(default)]
    pub pole: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nondegeneracy: Option<Nondegeneracy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representative: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SpectrumEntry {
    pub fn is_simple(&self) -> bool {
        self.cover == 1
    }

    pub fn betti_sum(&self) -> u64 {
        self.family.topology.betti_sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSpectrum {
    /// Model name, when the spectrum belongs to a catalog model.
    #[serde(default)]
    pub model: Option<String>,
    pub provenance: Provenance,
    /// Largest period enumerated; `None` means the data claims completeness.
    pub cap: Option<f64>,
    /// Every class whose smallest period is listed has all of its periods
    /// listed (true for models where each class has a single period).
    #[serde(default)]
    pub complete_classes: bool,
    pub entries: Vec<SpectrumEntry>,
    #[serde(default)]
    pub annotations: Vec<String>,
}

/// T⁺ as a certified quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum TPlus {
    Finite(f64),
    /// No period above T up to the cap; T⁺ ≥ cap.
    BeyondCap(f64),
    Infinite,
}

impl TPlus {
    /// Certified lower bound for T⁺.
    pub fn lower_bound(&self) -> f64 {
        match self {
            TPlus::Finite(v) | TPlus::BeyondCap(v) => *v,
            TPlus::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, TPlus::Finite(_))
    }
}

impl PeriodSpectrum {
    pub fn new(provenance: Provenance, cap: Option<f64>, mut entries: Vec<SpectrumEntry>) -> Self {
        sort_entries(&mut entries);
        Self { model: None, provenance, cap, complete_classes: false, entries, annotations: Vec::new() }
    }

    pub fn cap_value(&self) -> f64 {
        self.cap.unwrap_or(f64::INFINITY)
    }

    pub fn entries_in_class<'a>(&'a self, class: &'a HomotopyClass) -> impl Iterator<Item = &'a SpectrumEntry> + 'a {
        self.entries.iter().filter(move |e| &e.class == class)
    }

    /// Distinct periods in ascending order (merged within [`PERIOD_TOL`]).
    pub fn periods(&self) -> Vec<f64> {
        dedup_periods(self.entries.iter().map(|e| e.period))
    }

    pub fn periods_in_class(&self, class: &HomotopyClass) -> Vec<f64> {
        dedup_periods(self.entries_in_class(class).map(|e| e.period))
    }

    /// Check ordering, positivity and the presence of primitive orbits for
    /// every cover.
    pub fn validate(&self) -> Result<(), SpectrumError> {
        for w in self.entries.windows(2) {
            if w[1].period < w[0].period {
                return Err(SpectrumError::Invalid("entries are not sorted by period".into()));
            }
        }
        for e in &self.entries {
            if !(e.period > 0.0 && e.period.is_finite()) {
                return Err(SpectrumError::Invalid(format!("period {} is not positive", e.period)));
            }
            if e.cover == 0 {
                return Err(SpectrumError::Invalid("cover multiplicity must be ≥ 1".into()));
            }
            if e.cover > 1 {
                let base = e.period / e.cover as f64;
                if !self.entries.iter().any(|p| p.cover == 1 && same_period(p.period, base)) {
                    return Err(SpectrumError::Invalid(format!(
                        "entry at period {} is a {}-fold cover without a primitive entry",
                        e.period, e.cover
                    )));
                }
            }
        }
        if let Some(c) = self.cap {
            if !(c > 0.0) {
                return Err(SpectrumError::Invalid("cap must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }

    /// Parse a spectrum record; entries are re-sorted and validated.
    pub fn from_json(s: &str) -> Result<Self, SpectrumError> {
        let mut sp: PeriodSpectrum = serde_json::from_str(s).map_err(|e| SpectrumError::Invalid(e.to_string()))?;
        sort_entries(&mut sp.entries);
        sp.validate()?;
        Ok(sp)
    }

    /// Union of two spectra of the same model (cap = smaller cap).
    pub fn merge(&self, other: &PeriodSpectrum) -> PeriodSpectrum {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        sort_entries(&mut entries);
        let cap = match (self.cap, other.cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let mut annotations = self.annotations.clone();
        annotations.extend(other.annotations.iter().cloned());
        PeriodSpectrum {
            model: self.model.clone(),
            provenance: self.provenance.clone(),
            cap,
            complete_classes: self.complete_classes && other.complete_classes,
            entries,
            annotations,
        }
    }

    /// Spectrum with every period multiplied by c > 0.
    pub fn scaled(&self, c: f64) -> PeriodSpectrum {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.period *= c;
        }
        out.cap = self.cap.map(|v| v * c);
        out
    }
}

fn same_period(a: f64, b: f64) -> bool {
    (a - b).abs() <= PERIOD_TOL * a.abs().max(b.abs()).max(1.0)
}

fn dedup_periods(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| same_period(*a, *b));
    v
}

fn sort_entries(entries: &mut [SpectrumEntry]) {
    entries.sort_by(|a, b| {
        a.period.total_cmp(&b.period).then_with(|| a.class.cmp(&b.class)).then_with(|| {
            let ra = a.representative.as_deref().unwrap_or(&[]);
            let rb = b.representative.as_deref().unwrap_or(&[]);
            for (x, y) in ra.iter().zip(rb) {
                match x.total_cmp(y) {
                    std::cmp::Ordering::Equal => continue,
                    o => return o,
                }
            }
            ra.len().cmp(&rb.len())
        })
    });
}

/// Smallest period over all classes.
pub fn t_min(spec: &PeriodSpectrum) -> Result<f64, SpectrumError> {
    spec.entries.iter().map(|e| e.period).reduce(f64::min).ok_or(SpectrumError::Empty)
}

/// Smallest period in class α.
pub fn t_min_alpha(spec: &PeriodSpectrum, class: &HomotopyClass) -> Result<f64, SpectrumError> {
    spec.entries_in_class(class)
        .map(|e| e.period)
        .reduce(f64::min)
        .ok_or_else(|| SpectrumError::EmptyClass { class: class.to_string() })
}

/// Smallest period in class α strictly above T.
pub fn t_plus(spec: &PeriodSpectrum, class: &HomotopyClass, t: f64) -> TPlus {
    let next = spec.entries_in_class(class).map(|e| e.period).filter(|&p| p > t && !same_period(p, t)).reduce(f64::min);
    match next {
        Some(p) => TPlus::Finite(p),
        None => {
            let has_class = spec.entries_in_class(class).next().is_some();
            match spec.cap {
                None => TPlus::Infinite,
                Some(_) if spec.complete_classes && has_class => TPlus::Infinite,
                Some(c) => TPlus::BeyondCap(c),
            }
        }
    }
}

fn entry(
    period: f64,
    class: HomotopyClass,
    topology: FamilyTopology,
    dimension: usize,
    label: String,
    cover: u32,
    nondegeneracy: Option<Nondegeneracy>,
    representative: Vec<f64>,
) -> SpectrumEntry {
    SpectrumEntry {
        period,
        class,
        family: FamilyDescriptor { topology, dimension, label },
        cover,
        pole: false,
        nondegeneracy,
        representative: Some(representative),
        residual: None,
        note: None,
    }
}

/// Exact spectrum of the reference form of a catalog model up to `cap`.
pub fn analytic_spectrum(model: &ModelManifold, cap: f64) -> Result<PeriodSpectrum, SpectrumError> {
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(SpectrumError::Invalid(format!("cap {cap} must be positive and finite")));
    }
    let mut annotations = Vec::new();
    let mut complete = false;
    let entries = match model.kind() {
        ModelKind::Sphere { n } => {
            let n = *n;
            let mut rep = vec![0.0; 2 * n];
            rep[0] = 1.0;
            (1..=((cap / PI) * (1.0 + 1e-12)).floor() as u32)
                .map(|j| {
                    let d = 2 * n - 2;
                    entry(
                        j as f64 * PI,
                        HomotopyClass::Trivial,
                        FamilyTopology::for_model(model, d),
                        d,
                        format!("all of S^{}", 2 * n - 1),
                        j,
                        Some(Nondegeneracy::classify(d, Some(d))),
                        rep.clone(),
                    )
                })
                .collect()
        }
        ModelKind::Ellipsoid { r } => ellipsoid_entries(r, cap, &mut annotations),
        ModelKind::Torus3 { k } => {
            complete = true;
            torus_entries(*k, cap)?
        }
        ModelKind::CutS2xS1 { k } => cut_entries(model, *k as f64, false, cap)?,
        ModelKind::CutS3 { k } => {
            annotations.push(
                "only the fastest contractible orbits are certified for this model; higher periods follow the same torus enumeration"
                    .into(),
            );
            cut_entries(model, *k as f64 + 0.25, true, cap)?
        }
        ModelKind::FlatTorusCosphere { n } => {
            complete = true;
            cosphere_entries(model, *n, cap)?
        }
    };
    let mut sp = PeriodSpectrum::new(Provenance::Analytic, Some(cap), entries);
    sp.model = Some(model.name());
    sp.complete_classes = complete;
    sp.annotations = annotations;
    Ok(sp)
}

fn ellipsoid_entries(r: &[f64], cap: f64, annotations: &mut Vec<String>) -> Vec<SpectrumEntry> {
    let n = r.len();
    let mut raw: Vec<(f64, usize, u32)> = Vec::new();
    for (i, ri) in r.iter().enumerate() {
        let base = PI * ri * ri;
        let mut j = 1u32;
        while base * j as f64 <= cap * (1.0 + 1e-12) {
            raw.push((base * j as f64, i, j));
            j += 1;
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut groups: Vec<Vec<(f64, usize, u32)>> = Vec::new();
    for item in raw {
        match groups.last_mut() {
            Some(g) if same_period(g[0].0, item.0) => g.push(item),
            _ => groups.push(vec![item]),
        }
    }
    let mut out = Vec::new();
    for g in groups {
        let period = g[0].0;
        if g.len() == 1 {
            let (_, i, j) = g[0];
            let mut rep = vec![0.0; 2 * n];
            rep[2 * i] = 1.0;
            out.push(entry(
                period,
                HomotopyClass::Trivial,
                FamilyTopology::Point,
                0,
                format!("Γ{} (z{}-plane)", i + 1, i + 1),
                j,
                Some(Nondegeneracy::Nondegenerate),
                rep,
            ));
        } else {
            let planes: Vec<usize> = g.iter().map(|x| x.1).collect();
            let m = planes.len();
            let cover = g.iter().fold(0i64, |acc, x| gcd(acc, x.2 as i64)) as u32;
            let names: Vec<String> = planes.iter().map(|i| format!("z{}", i + 1)).collect();
            let mut rep = vec![0.0; 2 * n];
            for &i in &planes {
                rep[2 * i] = 1.0 / (m as f64).sqrt();
            }
            let d = 2 * m - 2;
            let mut e = entry(
                period,
                HomotopyClass::Trivial,
                FamilyTopology::Projective(m - 1),
                d,
                format!("sphere in the span of {}", names.join(",")),
                cover.max(1),
                Some(Nondegeneracy::classify(d, Some(d))),
                rep,
            );
            let msg = format!(
                "resonant weights: planes {} share period {:.12} and form a {}-dimensional family",
                names.join(","),
                period,
                d
            );
            e.note = Some(msg.clone());
            annotations.push(msg);
            out.push(e);
        }
    }
    out
}

fn torus_entries(k: u32, cap: f64) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    let b = cap.floor() as i64;
    if ((2 * b + 1) as f64).powi(2) > MAX_ENUMERATION {
        return Err(SpectrumError::TooLarge(cap));
    }
    let kf = k as f64;
    let mut out = Vec::new();
    for m in -b..=b {
        for n in -b..=b {
            if m == 0 && n == 0 {
                continue;
            }
            let period = ((m * m + n * n) as f64).sqrt();
            if period > cap * (1.0 + 1e-12) {
                continue;
            }
            let g = gcd(m, n) as u32;
            let a = (n as f64).atan2(m as f64);
            for j in 0..k {
                let theta = crate::numeric::wrap((a + TAU * j as f64) / kf, TAU);
                out.push(entry(
                    period,
                    HomotopyClass::winding(vec![m, n, 0]),
                    FamilyTopology::Circle,
                    1,
                    format!("torus θ = {theta:.12}"),
                    g,
                    Some(Nondegeneracy::MorseBott { dimension: 1 }),
                    vec![0.0, 0.0, theta],
                ));
            }
        }
    }
    Ok(out)
}

/// Orbits of cos(φ(t))dx + sin(φ(t))dy, φ(t) = rate·t, on the cut chart with
/// x, y ∈ ℝ/2πℤ. `s3` selects the S³ cut (y collapses at t=0, x at t=2π);
/// otherwise y collapses at both ends.
fn cut_entries(model: &ModelManifold, rate: f64, s3: bool, cap: f64) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    let b = (cap / TAU).floor() as i64;
    if ((2 * b + 1) as f64).powi(2) > MAX_ENUMERATION {
        return Err(SpectrumError::TooLarge(cap));
    }
    let phi_max = rate * TAU;
    let mut out = Vec::new();
    for m in -b..=b {
        for n in -b..=b {
            if m == 0 && n == 0 {
                continue;
            }
            let period = TAU * ((m * m + n * n) as f64).sqrt();
            if period > cap * (1.0 + 1e-12) {
                continue;
            }
            let g = gcd(m, n) as u32;
            let class = model.class_of_winding(&[m, n]);
            let a = (n as f64).atan2(m as f64);
            let j_lo = (-a / TAU).ceil() as i64;
            let j_hi = ((phi_max - a) / TAU + 1e-12).floor() as i64;
            for j in j_lo..=j_hi {
                let phi = a + TAU * j as f64;
                let at_start = n == 0 && m > 0 && j == 0;
                let at_end = if s3 {
                    m == 0 && n > 0 && (phi - phi_max).abs() < 1e-9
                } else {
                    n == 0 && m > 0 && (phi - phi_max).abs() < 1e-9
                };
                if at_start || at_end {
                    let t = if at_start { 0.0 } else { TAU };
                    let fibre = if at_end && s3 { "y" } else { "x" };
                    out.push(SpectrumEntry {
                        pole: true,
                        note: Some(format!(
                            "collapsed-fibre orbit ({fibre}-circle over t = {})",
                            if at_start { "0" } else { "2π" }
                        )),
                        ..entry(
                            period,
                            class.clone(),
                            FamilyTopology::Point,
                            0,
                            format!("pole fibre t = {}", if at_start { "0" } else { "2π" }),
                            g,
                            None,
                            vec![0.0, 0.0, t],
                        )
                    });
                    continue;
                }
                let t = phi / rate;
                if !(t > 0.0 && t < TAU) {
                    continue;
                }
                out.push(entry(
                    period,
                    class.clone(),
                    FamilyTopology::Circle,
                    1,
                    format!("torus t = {t:.12}"),
                    g,
                    Some(Nondegeneracy::MorseBott { dimension: 1 }),
                    vec![0.0, 0.0, t],
                ));
            }
        }
    }
    Ok(out)
}

fn cosphere_entries(model: &ModelManifold, n: usize, cap: f64) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    let b = cap.floor() as i64;
    if ((2 * b + 1) as f64).powi(n as i32) > MAX_ENUMERATION {
        return Err(SpectrumError::TooLarge(cap));
    }
    let side = (2 * b + 1) as usize;
    let total = side.pow(n as u32);
    let d = n - 1;
    let mut out = Vec::new();
    for idx in 0..total {
        let mut rem = idx;
        let mut alpha = vec![0i64; n];
        for a in alpha.iter_mut() {
            *a = (rem % side) as i64 - b;
            rem /= side;
        }
        if alpha.iter().all(|&a| a == 0) {
            continue;
        }
        let norm = alpha.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt();
        if norm > cap * (1.0 + 1e-12) {
            continue;
        }
        let g = alpha.iter().fold(0, |acc, &a| gcd(acc, a)) as u32;
        let mut rep = vec![0.0; 2 * n];
        for i in 0..n {
            rep[n + i] = alpha[i] as f64 / norm;
        }
        out.push(entry(
            norm,
            HomotopyClass::winding(alpha),
            FamilyTopology::for_model(model, d),
            d,
            "T^n family of straight geodesics".into(),
            g,
            Some(Nondegeneracy::MorseBott { dimension: d }),
            rep,
        ));
    }
    Ok(out)
}

/// Spectrum of f·λ₀ in class α within `window`, from an orbit scan.
pub fn numeric_spectrum(
    f: &ConformalFactor,
    class: &HomotopyClass,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Result<PeriodSpectrum, SpectrumError> {
    let field = ReebField::conformal(f);
    let report = scan_orbits(&field, class, window, opts)?;
    let entries = report
        .families
        .iter()
        .map(|fam| {
            let rep = fam.representative();
            SpectrumEntry {
                period: fam.period,
                class: fam.class.clone(),
                family: FamilyDescriptor {
                    topology: fam.topology,
                    dimension: fam.dimension,
                    label: format!("{} converged members", fam.member_count),
                },
                cover: rep.cover,
                pole: false,
                nondegeneracy: Some(fam.nondegeneracy),
                representative: Some(rep.base.clone()),
                residual: Some(rep.residual),
                note: None,
            }
        })
        .collect();
    let seeds_per_dim = report.coverage.seeds_per_dim;
    let mut sp = PeriodSpectrum::new(
        Provenance::Numeric { window: [window.0, window.1], seeds_per_dim },
        Some(window.1),
        entries,
    );
    sp.model = Some(f.model().name());
    sp.annotations.push(format!(
        "scan coverage: {} seeds, {} candidates, {} converged, {} in window",
        report.coverage.seeds, report.coverage.candidates, report.coverage.converged, report.coverage.in_window
    ));
    Ok(sp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_spectrum_and_t_plus() {
        let sp = analytic_spectrum(&ModelManifold::sphere(2), 7.0).unwrap();
        assert_eq!(sp.periods(), vec![PI, 2.0 * PI]);
        assert_eq!(t_plus(&sp, &HomotopyClass::Trivial, PI), TPlus::Finite(2.0 * PI));
        assert!(matches!(t_plus(&sp, &HomotopyClass::Trivial, 2.0 * PI), TPlus::BeyondCap(_)));
        sp.validate().unwrap();
    }

    #[test]
    fn ellipsoid_periods() {
        let m = ModelManifold::ellipsoid(&[1.0, 1.2, 1.3]).unwrap();
        let sp = analytic_spectrum(&m, 5.5).unwrap();
        let p = sp.periods();
        assert_eq!(p.len(), 3);
        for (a, b) in p.iter().zip([PI, 1.44 * PI, 1.69 * PI]) {
            assert!((a - b).abs() < 1e-12);
        }
        let m = ModelManifold::ellipsoid(&[1.0, 1.2]).unwrap();
        let sp = analytic_spectrum(&m, 7.0).unwrap();
        assert_eq!(t_plus(&sp, &HomotopyClass::Trivial, 1.44 * PI), TPlus::Finite(2.0 * PI));
    }

    #[test]
    fn round_ellipsoid_is_resonant() {
        let m = ModelManifold::ellipsoid(&[1.0, 1.0]).unwrap();
        let sp = analytic_spectrum(&m, 7.0).unwrap();
        assert_eq!(sp.entries.len(), 2);
        assert_eq!(sp.entries[0].family.topology, FamilyTopology::Projective(1));
        assert!(!sp.annotations.is_empty());
    }

    #[test]
    fn torus_low_periods() {
        let sp = analytic_spectrum(&ModelManifold::torus3(2), 1.5).unwrap();
        assert_eq!(sp.periods(), vec![1.0, 2f64.sqrt()]);
        assert_eq!(sp.entries.len(), 8 * 2);
        let c = HomotopyClass::winding(vec![1, 1, 0]);
        assert_eq!(t_plus(&sp, &c, 2f64.sqrt()), TPlus::Infinite);
    }

    #[test]
    fn cut_models_fastest_orbits() {
        for k in 1..4u32 {
            let sp = analytic_spectrum(&ModelManifold::cut_s2xs1(k), 7.0).unwrap();
            let one = HomotopyClass::winding(vec![1]);
            let fast: Vec<_> = sp.entries_in_class(&one).collect();
            assert_eq!(fast.iter().filter(|e| e.pole).count(), 2);
            assert_eq!(fast.len(), k as usize + 1);
            let sp3 = analytic_spectrum(&ModelManifold::cut_s3(k), 7.0).unwrap();
            assert_eq!(sp3.entries.len(), 4 * k as usize + 2);
            assert_eq!(sp3.entries.iter().filter(|e| e.pole).count(), 2);
        }
    }

    #[test]
    fn json_round_trip() {
        let sp = analytic_spectrum(&ModelManifold::torus3(1), 2.0).unwrap();
        let back = PeriodSpectrum::from_json(&sp.to_json()).unwrap();
        assert_eq!(back, sp);
    }
}
