use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::class::HomotopyClass;
use super::GeometryError;
use crate::numeric::{wrap, wrap_centered};

/// Which explicit contact manifold a [`ModelManifold`] describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    /// Unit sphere in C^n with λ₀ = ½Σ(p dq − q dp).
    Sphere { n: usize },
    /// Unit sphere with the ellipsoid form (Σ|z_j|²/r_j²)^{-1} λ₀.
    Ellipsoid { r: Vec<f64> },
    /// T³ with λ_k = cos(kθ)dx + sin(kθ)dy, x,y ∈ R/Z, θ ∈ R/2πZ.
    Torus3 { k: u32 },
    /// S²×S¹ presented as the chart (x,y,t), x,y ∈ R/2πZ, t ∈ [0,2π], form cos(kt)dx + sin(kt)dy.
    #[serde(rename = "cut-s2xs1")]
    CutS2xS1 { k: u32 },
    /// S³ presented as the chart (x,y,t) with form cos((k+¼)t)dx + sin((k+¼)t)dy.
    #[serde(rename = "cut-s3")]
    CutS3 { k: u32 },
    /// Unit cosphere bundle of the flat torus R^n/Z^n, λ = Σ p_i dq_i.
    FlatTorusCosphere { n: usize },
}

/// Coordinate system a [`Point`] is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartId {
    /// Real coordinates (Re z₁, Im z₁, …) of C^n restricted to |z| = 1.
    Complex,
    /// Angular coordinates (x, y, θ).
    Torus,
    /// Pre-cut chart (x, y, t) with collapsing circles over t ∈ {0, 2π}.
    Cut,
    /// (q, p) ∈ T^n × S^{n−1}.
    Cosphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateInfo {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

/// Coordinate ranges, identifications and excluded loci of a model chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartAtlas {
    pub chart: ChartId,
    pub coordinates: Vec<CoordinateInfo>,
    pub constraint: Option<String>,
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub chart: ChartId,
    pub coords: DVector<f64>,
}

/// A closed orbit sitting on an excluded locus of a cut chart, known in
/// closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleOrbit {
    pub label: String,
    pub base: Vec<f64>,
    pub period: f64,
    pub class: HomotopyClass,
}

/// One coordinate of the parametrization used for grids and seeding.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCoord {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
    /// True when the model's Reeb field commutes with translation in this
    /// coordinate (phases, torus angles).
    pub field_symmetry: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelManifold {
    kind: ModelKind,
}

impl ModelManifold {
    pub fn new(kind: ModelKind) -> Result<Self, GeometryError> {
        match &kind {
            ModelKind::Sphere { n } if *n == 0 => return Err(GeometryError::InvalidModel("sphere needs n ≥ 1".into())),
            ModelKind::Ellipsoid { r } => {
                if r.is_empty() {
                    return Err(GeometryError::InvalidModel("ellipsoid needs at least one weight".into()));
                }
                if r.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(GeometryError::InvalidModel("ellipsoid weights must be positive".into()));
                }
                if r.windows(2).any(|w| w[1] < w[0]) {
                    return Err(GeometryError::InvalidModel("ellipsoid weights must be nondecreasing".into()));
                }
            }
            ModelKind::Torus3 { k } | ModelKind::CutS2xS1 { k } | ModelKind::CutS3 { k } if *k == 0 => {
                return Err(GeometryError::InvalidModel("k must be a positive integer".into()))
            }
            ModelKind::FlatTorusCosphere { n } if *n < 2 => {
                return Err(GeometryError::InvalidModel("flat torus cosphere needs n ≥ 2".into()))
            }
            _ => {}
        }
        Ok(Self { kind })
    }

    pub fn sphere(n: usize) -> Self {
        Self::new(ModelKind::Sphere { n }).expect("valid sphere")
    }

    pub fn ellipsoid(r: &[f64]) -> Result<Self, GeometryError> {
        Self::new(ModelKind::Ellipsoid { r: r.to_vec() })
    }

    pub fn torus3(k: u32) -> Self {
        Self::new(ModelKind::Torus3 { k }).expect("valid torus")
    }

    pub fn cut_s2xs1(k: u32) -> Self {
        Self::new(ModelKind::CutS2xS1 { k }).expect("valid cut model")
    }

    pub fn cut_s3(k: u32) -> Self {
        Self::new(ModelKind::CutS3 { k }).expect("valid cut model")
    }

    pub fn flat_torus_cosphere(n: usize) -> Self {
        Self::new(ModelKind::FlatTorusCosphere { n }).expect("valid cosphere")
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ModelKind::Sphere { n } => format!("Sphere({n})"),
            ModelKind::Ellipsoid { r } => {
                let parts: Vec<String> = r.iter().map(|x| format!("{x}")).collect();
                format!("Ellipsoid({})", parts.join(","))
            }
            ModelKind::Torus3 { k } => format!("Torus3({k})"),
            ModelKind::CutS2xS1 { k } => format!("CutS2xS1({k})"),
            ModelKind::CutS3 { k } => format!("CutS3({k})"),
            ModelKind::FlatTorusCosphere { n } => format!("FlatTorusCosphere({n})"),
        }
    }

    /// Half the dimension of the symplectization, so that dim M = 2n − 1.
    pub fn n(&self) -> usize {
        match &self.kind {
            ModelKind::Sphere { n } | ModelKind::FlatTorusCosphere { n } => *n,
            ModelKind::Ellipsoid { r } => r.len(),
            _ => 2,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.n() - 1
    }

    /// Number of coordinates of the chart the model is computed in.
    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            ModelKind::Sphere { n } | ModelKind::FlatTorusCosphere { n } => 2 * n,
            ModelKind::Ellipsoid { r } => 2 * r.len(),
            _ => 3,
        }
    }

    pub fn chart(&self) -> ChartId {
        match &self.kind {
            ModelKind::Sphere { .. } | ModelKind::Ellipsoid { .. } => ChartId::Complex,
            ModelKind::Torus3 { .. } => ChartId::Torus,
            ModelKind::CutS2xS1 { .. } | ModelKind::CutS3 { .. } => ChartId::Cut,
            ModelKind::FlatTorusCosphere { .. } => ChartId::Cosphere,
        }
    }

    pub fn is_cut(&self) -> bool {
        self.chart() == ChartId::Cut
    }

    /// Period of each chart coordinate, `None` for non-periodic ones.
    pub fn coordinate_periods(&self) -> Vec<Option<f64>> {
        match &self.kind {
            ModelKind::Sphere { .. } | ModelKind::Ellipsoid { .. } => vec![None; self.ambient_dim()],
            ModelKind::Torus3 { .. } => vec![Some(1.0), Some(1.0), Some(TAU)],
            ModelKind::CutS2xS1 { .. } | ModelKind::CutS3 { .. } => vec![Some(TAU), Some(TAU), None],
            ModelKind::FlatTorusCosphere { n } => {
                let mut v = vec![Some(1.0); *n];
                v.extend(std::iter::repeat(None).take(*n));
                v
            }
        }
    }

    pub fn atlas(&self) -> ChartAtlas {
        let periods = self.coordinate_periods();
        let names = self.coordinate_names();
        let coordinates = names
            .into_iter()
            .zip(periods)
            .enumerate()
            .map(|(i, (name, p))| {
                let (lo, hi) = match (p, self.chart()) {
                    (Some(p), _) => (0.0, p),
                    (None, ChartId::Cut) => (0.0, TAU),
                    (None, _) => {
                        let _ = i;
                        (-1.0, 1.0)
                    }
                };
                CoordinateInfo { name, lo, hi, periodic: p.is_some() }
            })
            .collect();
        let (constraint, excluded) = match self.chart() {
            ChartId::Complex => (Some("|z| = 1".to_string()), vec![]),
            ChartId::Torus => (None, vec![]),
            ChartId::Cut => (
                None,
                vec![
                    "t = 0 (collapsing circle, pole fibre stored analytically)".to_string(),
                    "t = 2π (collapsing circle, pole fibre stored analytically)".to_string(),
                ],
            ),
            ChartId::Cosphere => (Some("|p| = 1".to_string()), vec![]),
        };
        ChartAtlas { chart: self.chart(), coordinates, constraint, excluded }
    }

    fn coordinate_names(&self) -> Vec<String> {
        match self.chart() {
            ChartId::Complex => {
                (0..self.n()).flat_map(|j| [format!("re z{}", j + 1), format!("im z{}", j + 1)]).collect()
            }
            ChartId::Torus => vec!["x".into(), "y".into(), "theta".into()],
            ChartId::Cut => vec!["x".into(), "y".into(), "t".into()],
            ChartId::Cosphere => {
                let n = self.n();
                (0..n).map(|i| format!("q{}", i + 1)).chain((0..n).map(|i| format!("p{}", i + 1))).collect()
            }
        }
    }

    /// Validate coordinates and return a normalized point (periodic
    /// coordinates wrapped, sphere constraints re-imposed).
    pub fn point(&self, coords: &[f64]) -> Result<Point, GeometryError> {
        let x = DVector::from_column_slice(coords);
        self.check_domain(&x, 1e-8)?;
        let mut x = x;
        self.project(&mut x);
        self.wrap_periodic(&mut x);
        Ok(Point { chart: self.chart(), coords: x })
    }

    fn check_domain(&self, x: &DVector<f64>, slack: f64) -> Result<(), GeometryError> {
        if x.len() != self.ambient_dim() {
            return Err(GeometryError::OutsideChart(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                x.len()
            )));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::OutsideChart("non-finite coordinate".into()));
        }
        match self.chart() {
            ChartId::Complex => {
                let r = x.norm();
                if (r - 1.0).abs() > slack {
                    return Err(GeometryError::OutsideChart(format!("|z| = {r} is not 1")));
                }
            }
            ChartId::Cut => {
                let t = x[2];
                if !(-slack..=TAU + slack).contains(&t) {
                    return Err(GeometryError::OutsideChart(format!("t = {t} outside [0, 2π]")));
                }
            }
            ChartId::Cosphere => {
                let n = self.n();
                let r = x.rows(n, n).norm();
                if (r - 1.0).abs() > slack {
                    return Err(GeometryError::OutsideChart(format!("|p| = {r} is not 1")));
                }
            }
            ChartId::Torus => {}
        }
        Ok(())
    }

    /// Re-impose sphere constraints (no-op for flat charts).
    pub fn project(&self, x: &mut DVector<f64>) {
        match self.chart() {
            ChartId::Complex => {
                let r = x.norm();
                if r > 0.0 {
                    *x /= r;
                }
            }
            ChartId::Cosphere => {
                let n = self.n();
                let r = x.rows(n, n).norm();
                if r > 0.0 {
                    let mut p = x.rows_mut(n, n);
                    p /= r;
                }
            }
            _ => {}
        }
    }

    pub fn wrap_periodic(&self, x: &mut DVector<f64>) {
        for (i, p) in self.coordinate_periods().into_iter().enumerate() {
            if let Some(p) = p {
                x[i] = wrap(x[i], p);
            }
        }
    }

    /// Coefficients of the reference contact form λ₀ at `x` (as a covector in
    /// chart coordinates).
    pub fn contact_coeffs(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            ModelKind::Sphere { .. } => standard_form(x),
            ModelKind::Ellipsoid { r } => {
                let q = ellipsoid_quadratic(r, x);
                standard_form(x) / q
            }
            ModelKind::Torus3 { k } => {
                let a = *k as f64 * x[2];
                DVector::from_vec(vec![a.cos(), a.sin(), 0.0])
            }
            ModelKind::CutS2xS1 { .. } | ModelKind::CutS3 { .. } => {
                let a = self.cut_angle(x[2]);
                DVector::from_vec(vec![a.cos(), a.sin(), 0.0])
            }
            ModelKind::FlatTorusCosphere { n } => {
                let mut c = DVector::zeros(2 * n);
                for i in 0..*n {
                    c[i] = x[n + i];
                }
                c
            }
        }
    }

    /// dλ₀ at `x` as the antisymmetric matrix W_ij = ∂_i c_j − ∂_j c_i.
    pub fn contact_differential(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = x.len();
        let mut w = DMatrix::zeros(d, d);
        match &self.kind {
            ModelKind::Sphere { .. } => standard_differential(&mut w),
            ModelKind::Ellipsoid { r } => {
                let q = ellipsoid_quadratic(r, x);
                let c0 = standard_form(x);
                let mut grad = DVector::zeros(d);
                for i in 0..d {
                    grad[i] = -2.0 * x[i] / (r[i / 2] * r[i / 2]) / (q * q);
                }
                standard_differential(&mut w);
                w = w / q + &grad * c0.transpose() - c0 * grad.transpose();
            }
            ModelKind::Torus3 { .. } | ModelKind::CutS2xS1 { .. } | ModelKind::CutS3 { .. } => {
                let (a, rate) = match &self.kind {
                    ModelKind::Torus3 { k } => (*k as f64 * x[2], *k as f64),
                    ModelKind::CutS2xS1 { k } => (*k as f64 * x[2], *k as f64),
                    ModelKind::CutS3 { k } => ((*k as f64 + 0.25) * x[2], *k as f64 + 0.25),
                    _ => unreachable!(),
                };
                let (dx, dy) = (-rate * a.sin(), rate * a.cos());
                w[(2, 0)] = dx;
                w[(0, 2)] = -dx;
                w[(2, 1)] = dy;
                w[(1, 2)] = -dy;
            }
            ModelKind::FlatTorusCosphere { n } => {
                for i in 0..*n {
                    w[(n + i, i)] = 1.0;
                    w[(i, n + i)] = -1.0;
                }
            }
        }
        w
    }

    /// Rotation angle φ(t) of the cut-model forms.
    pub fn cut_angle(&self, t: f64) -> f64 {
        match &self.kind {
            ModelKind::CutS2xS1 { k } => *k as f64 * t,
            ModelKind::CutS3 { k } => (*k as f64 + 0.25) * t,
            _ => 0.0,
        }
    }

    /// λ₀|_p(v).
    pub fn contact_eval(&self, p: &Point, v: &DVector<f64>) -> Result<f64, GeometryError> {
        if p.chart != self.chart() {
            return Err(GeometryError::ChartMismatch { expected: self.chart(), found: p.chart });
        }
        if v.len() != self.ambient_dim() {
            return Err(GeometryError::ChartMismatch { expected: self.chart(), found: p.chart });
        }
        Ok(self.contact_coeffs(&p.coords).dot(v))
    }

    /// Analytic Reeb vector of the reference form at `p`.
    pub fn reeb_field(&self, p: &Point) -> Result<DVector<f64>, GeometryError> {
        if p.chart != self.chart() {
            return Err(GeometryError::ChartMismatch { expected: self.chart(), found: p.chart });
        }
        self.check_domain(&p.coords, 1e-8)?;
        Ok(self.reeb_ambient(&p.coords))
    }

    /// The analytic Reeb field extended to the whole chart (used by the
    /// integrator, which moves slightly off constraint surfaces between
    /// projections). On the cut-model pole loci this is the pole-fibre
    /// direction: the only surviving direction of the collapsing torus.
    pub fn reeb_ambient(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            ModelKind::Sphere { .. } => rotate_complex(x, |_| 2.0),
            ModelKind::Ellipsoid { r } => rotate_complex(x, |j| 2.0 / (r[j] * r[j])),
            ModelKind::Torus3 { .. } | ModelKind::CutS2xS1 { .. } | ModelKind::CutS3 { .. } => {
                let c = self.contact_coeffs(x);
                DVector::from_vec(vec![c[0], c[1], 0.0])
            }
            ModelKind::FlatTorusCosphere { n } => {
                let mut v = DVector::zeros(2 * n);
                for i in 0..*n {
                    v[i] = x[n + i];
                }
                v
            }
        }
    }

    /// Orthonormal basis (columns) of the tangent space at `x`.
    pub fn tangent_frame(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self.chart() {
            ChartId::Complex => orthonormal_complement(x),
            ChartId::Torus | ChartId::Cut => DMatrix::identity(3, 3),
            ChartId::Cosphere => {
                let n = self.n();
                let p = x.rows(n, n).into_owned();
                let c = orthonormal_complement(&p);
                let mut m = DMatrix::zeros(2 * n, 2 * n - 1);
                for i in 0..n {
                    m[(i, i)] = 1.0;
                }
                for j in 0..n - 1 {
                    for i in 0..n {
                        m[(n + i, n + j)] = c[(i, j)];
                    }
                }
                m
            }
        }
    }

    /// Exceptional orbits on the excluded loci of cut charts.
    pub fn pole_orbits(&self) -> Vec<PoleOrbit> {
        match &self.kind {
            ModelKind::CutS2xS1 { .. } => vec![
                PoleOrbit {
                    label: "pole t=0 (x-circle)".into(),
                    base: vec![0.0, 0.0, 0.0],
                    period: TAU,
                    class: HomotopyClass::winding(vec![1]),
                },
                PoleOrbit {
                    label: "pole t=2π (x-circle)".into(),
                    base: vec![0.0, 0.0, TAU],
                    period: TAU,
                    class: HomotopyClass::winding(vec![1]),
                },
            ],
            ModelKind::CutS3 { .. } => vec![
                PoleOrbit {
                    label: "pole t=0 (x-circle)".into(),
                    base: vec![0.0, 0.0, 0.0],
                    period: TAU,
                    class: HomotopyClass::Trivial,
                },
                PoleOrbit {
                    label: "pole t=2π (y-circle)".into(),
                    base: vec![0.0, 0.0, TAU],
                    period: TAU,
                    class: HomotopyClass::Trivial,
                },
            ],
            _ => vec![],
        }
    }

    /// Canonical form of a class for this model, or an error when the class
    /// does not belong to the model's fundamental group.
    pub fn validate_class(&self, c: &HomotopyClass) -> Result<HomotopyClass, GeometryError> {
        let len = match &self.kind {
            ModelKind::Sphere { .. } | ModelKind::Ellipsoid { .. } | ModelKind::CutS3 { .. } => 0,
            ModelKind::Torus3 { .. } => 3,
            ModelKind::CutS2xS1 { .. } => 1,
            ModelKind::FlatTorusCosphere { n } => *n,
        };
        match c {
            HomotopyClass::Trivial => Ok(HomotopyClass::Trivial),
            HomotopyClass::Winding(v) if len > 0 && v.len() == len => Ok(HomotopyClass::winding(v.clone())),
            _ => Err(GeometryError::ClassMismatch { model: self.name(), class: c.to_string() }),
        }
    }

    /// Split a lifted displacement into a lattice winding vector (one entry
    /// per periodic coordinate) and the remaining residual.
    pub fn lattice_split(&self, delta: &DVector<f64>) -> (Vec<i64>, DVector<f64>) {
        let mut w = Vec::new();
        let mut res = delta.clone();
        for (i, p) in self.coordinate_periods().into_iter().enumerate() {
            if let Some(p) = p {
                let m = (delta[i] / p).round();
                w.push(m as i64);
                res[i] = delta[i] - m * p;
            }
        }
        (w, res)
    }

    /// Homotopy class of a closed loop with the given lattice winding.
    pub fn class_of_winding(&self, w: &[i64]) -> HomotopyClass {
        match &self.kind {
            ModelKind::Sphere { .. } | ModelKind::Ellipsoid { .. } | ModelKind::CutS3 { .. } => HomotopyClass::Trivial,
            ModelKind::Torus3 { .. } | ModelKind::FlatTorusCosphere { .. } => HomotopyClass::winding(w.to_vec()),
            ModelKind::CutS2xS1 { .. } => HomotopyClass::winding(vec![w[0]]),
        }
    }

    /// Distance between two chart points, minimized over periodic lattice
    /// translations.
    pub fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let mut d2 = 0.0;
        for (i, p) in self.coordinate_periods().into_iter().enumerate() {
            let diff = a[i] - b[i];
            let diff = match p {
                Some(p) => wrap_centered(diff, p),
                None => diff,
            };
            d2 += diff * diff;
        }
        d2.sqrt()
    }

    /// |a − b| in coordinate `i`, reduced modulo its period when periodic.
    pub fn distance_component(&self, i: usize, a: f64, b: f64) -> f64 {
        match self.coordinate_periods()[i] {
            Some(p) => wrap_centered(a - b, p).abs(),
            None => (a - b).abs(),
        }
    }

    /// Parametrization used for factor extremization grids and orbit seeds.
    pub fn sample_coords(&self) -> Vec<SampleCoord> {
        let n = self.n();
        match self.chart() {
            ChartId::Complex => {
                let mut v: Vec<SampleCoord> = (0..n - 1)
                    .map(|_| SampleCoord {
                        name: "amplitude",
                        lo: 0.0,
                        hi: PI / 2.0,
                        periodic: false,
                        field_symmetry: false,
                    })
                    .collect();
                v.extend((0..n).map(|_| SampleCoord {
                    name: "phase",
                    lo: 0.0,
                    hi: TAU,
                    periodic: true,
                    field_symmetry: true,
                }));
                v
            }
            ChartId::Torus => vec![
                SampleCoord { name: "x", lo: 0.0, hi: 1.0, periodic: true, field_symmetry: true },
                SampleCoord { name: "y", lo: 0.0, hi: 1.0, periodic: true, field_symmetry: true },
                SampleCoord { name: "theta", lo: 0.0, hi: TAU, periodic: true, field_symmetry: false },
            ],
            ChartId::Cut => vec![
                SampleCoord { name: "x", lo: 0.0, hi: TAU, periodic: true, field_symmetry: true },
                SampleCoord { name: "y", lo: 0.0, hi: TAU, periodic: true, field_symmetry: true },
                SampleCoord { name: "t", lo: 0.0, hi: TAU, periodic: false, field_symmetry: false },
            ],
            ChartId::Cosphere => {
                let mut v: Vec<SampleCoord> = (0..n)
                    .map(|_| SampleCoord { name: "q", lo: 0.0, hi: 1.0, periodic: true, field_symmetry: true })
                    .collect();
                v.extend((0..n - 2).map(|_| SampleCoord {
                    name: "polar",
                    lo: 0.0,
                    hi: PI,
                    periodic: false,
                    field_symmetry: false,
                }));
                v.push(SampleCoord { name: "azimuth", lo: 0.0, hi: TAU, periodic: true, field_symmetry: false });
                v
            }
        }
    }

    /// Chart point for sample parameters `s` (one value per [`SampleCoord`]).
    pub fn sample_point(&self, s: &[f64]) -> DVector<f64> {
        let n = self.n();
        match self.chart() {
            ChartId::Complex => {
                let moduli = spherical_moduli(&s[..n - 1], n);
                let mut x = DVector::zeros(2 * n);
                for j in 0..n {
                    let ph = s[n - 1 + j];
                    x[2 * j] = moduli[j] * ph.cos();
                    x[2 * j + 1] = moduli[j] * ph.sin();
                }
                x
            }
            ChartId::Torus | ChartId::Cut => DVector::from_column_slice(&s[..3]),
            ChartId::Cosphere => {
                let mut x = DVector::zeros(2 * n);
                for i in 0..n {
                    x[i] = s[i];
                }
                let p = sphere_from_angles(&s[n..], n);
                for i in 0..n {
                    x[n + i] = p[i];
                }
                x
            }
        }
    }
}

fn standard_form(x: &DVector<f64>) -> DVector<f64> {
    let mut c = DVector::zeros(x.len());
    for j in 0..x.len() / 2 {
        let (p, q) = (x[2 * j], x[2 * j + 1]);
        c[2 * j] = -0.5 * q;
        c[2 * j + 1] = 0.5 * p;
    }
    c
}

fn standard_differential(w: &mut DMatrix<f64>) {
    for j in 0..w.nrows() / 2 {
        w[(2 * j, 2 * j + 1)] = 1.0;
        w[(2 * j + 1, 2 * j)] = -1.0;
    }
}

pub(crate) fn ellipsoid_quadratic(r: &[f64], x: &DVector<f64>) -> f64 {
    (0..r.len()).map(|j| (x[2 * j] * x[2 * j] + x[2 * j + 1] * x[2 * j + 1]) / (r[j] * r[j])).sum()
}

/// z_j ↦ i·w_j·z_j in real coordinates.
fn rotate_complex(x: &DVector<f64>, w: impl Fn(usize) -> f64) -> DVector<f64> {
    let mut v = DVector::zeros(x.len());
    for j in 0..x.len() / 2 {
        let s = w(j);
        v[2 * j] = -s * x[2 * j + 1];
        v[2 * j + 1] = s * x[2 * j];
    }
    v
}

/// Moduli |z_1|, …, |z_n| on the unit sphere from n−1 angles in [0, π/2].
fn spherical_moduli(beta: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut s = 1.0;
    for j in 0..n - 1 {
        out[j] = s * beta[j].cos();
        s *= beta[j].sin();
    }
    out[n - 1] = s;
    out
}

/// Point of S^{n−1} from n−2 polar angles in [0, π] and one azimuth.
fn sphere_from_angles(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut s = 1.0;
    for j in 0..n - 2 {
        out[j] = s * a[j].cos();
        s *= a[j].sin();
    }
    let phi = a[n - 2];
    out[n - 2] = s * phi.cos();
    out[n - 1] = s * phi.sin();
    out
}

/// Orthonormal basis of v^⊥ (columns) from a Householder reflection.
pub fn orthonormal_complement(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    let norm = v.norm();
    let mut w = v.clone();
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    w[0] += sign * norm;
    let ww = w.dot(&w);
    let h =
        if ww > 0.0 { DMatrix::identity(n, n) - (&w * w.transpose()) * (2.0 / ww) } else { DMatrix::identity(n, n) };
    h.columns(1, n - 1).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_reeb_matches_rotation() {
        let m = ModelManifold::sphere(2);
        let p = m.point(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let r = m.reeb_field(&p).unwrap();
        assert_eq!(r.as_slice(), &[0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn standard_form_on_rotation_vector() {
        let m = ModelManifold::sphere(2);
        let p = m.point(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        // v = i·z at z = (1,0): ½(p dq − q dp)(v) = ½.
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        assert_relative_eq!(m.contact_eval(&p, &v).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn round_ellipsoid_equals_sphere() {
        let e = ModelManifold::ellipsoid(&[1.0, 1.0]).unwrap();
        let s = ModelManifold::sphere(2);
        let x = DVector::from_vec(vec![0.6, 0.0, 0.0, 0.8]);
        assert_eq!(e.reeb_ambient(&x), s.reeb_ambient(&x));
    }

    #[test]
    fn torus_reeb_and_theta_direction() {
        let m = ModelManifold::torus3(1);
        let p = m.point(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.reeb_field(&p).unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        let q = m.point(&[0.3, 0.1, 1.7]).unwrap();
        let dtheta = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert_eq!(m.contact_eval(&q, &dtheta).unwrap(), 0.0);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(ModelManifold::ellipsoid(&[1.2, 1.0]).is_err());
        assert!(ModelManifold::ellipsoid(&[0.0, 1.0]).is_err());
        assert!(ModelManifold::new(ModelKind::Torus3 { k: 0 }).is_err());
        let m = ModelManifold::sphere(2);
        assert!(m.point(&[2.0, 0.0, 0.0, 0.0]).is_err());
        assert!(m.point(&[1.0, 0.0, 0.0]).is_err());
        let c = ModelManifold::cut_s3(1);
        assert!(c.point(&[0.0, 0.0, 7.0]).is_err());
        let t = ModelManifold::torus3(1);
        let p = t.point(&[0.0, 0.0, 0.0]).unwrap();
        assert!(m.reeb_field(&p).is_err());
    }

    #[test]
    fn pole_branch_matches_surviving_direction() {
        let c = ModelManifold::cut_s3(2);
        let p0 = c.point(&[0.0, 0.0, 0.0]).unwrap();
        let p1 = c.point(&[0.0, 0.0, TAU]).unwrap();
        let r0 = c.reeb_field(&p0).unwrap();
        let r1 = c.reeb_field(&p1).unwrap();
        assert_relative_eq!(r0[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r1[1], 1.0, epsilon = 1e-12);
        assert!(r1[0].abs() < 1e-12);
    }

    #[test]
    fn frames_are_orthonormal_and_tangent() {
        let m = ModelManifold::flat_torus_cosphere(3);
        let x = m.sample_point(&[0.1, 0.2, 0.3, 0.7, 2.0]);
        let e = m.tangent_frame(&x);
        assert_eq!(e.ncols(), m.dim());
        let g = e.transpose() * &e;
        assert!((g - DMatrix::identity(5, 5)).norm() < 1e-12);
        let s = ModelManifold::sphere(3);
        let y = s.sample_point(&[0.4, 1.1, 0.1, 0.2, 0.3]);
        assert_relative_eq!(y.norm(), 1.0, epsilon = 1e-14);
        let f = s.tangent_frame(&y);
        assert!((f.transpose() * &y).norm() < 1e-14);
    }

    #[test]
    fn lattice_split_and_classes() {
        let m = ModelManifold::cut_s2xs1(2);
        let d = DVector::from_vec(vec![TAU + 1e-3, -TAU, 0.0]);
        let (w, r) = m.lattice_split(&d);
        assert_eq!(w, vec![1, -1]);
        assert!(r.norm() < 2e-3);
        assert_eq!(m.class_of_winding(&w), HomotopyClass::winding(vec![1]));
        let t = ModelManifold::torus3(1);
        assert!(t.validate_class(&HomotopyClass::winding(vec![1, 0])).is_err());
        assert!(ModelManifold::sphere(2).validate_class(&HomotopyClass::winding(vec![1])).is_err());
    }
}
