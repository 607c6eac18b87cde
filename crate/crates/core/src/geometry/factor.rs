use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{ellipsoid_quadratic, ChartId, ModelManifold};
use super::GeometryError;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrigFn {
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coord: usize,
    pub power: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigFactor {
    pub func: TrigFn,
    pub coord: usize,
    #[serde(default = "one")]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// coef · Π x_i^{k_i} · Π trig(ω x_j + φ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    #[serde(default)]
    pub monomials: Vec<Monomial>,
    #[serde(default)]
    pub trig: Vec<TrigFactor>,
}

/// Declarative description of a conformal factor f, evaluated in the
/// model's chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum FactorSpec {
    Constant {
        value: f64,
    },
    /// (Σ|z_j|²/w_j²)^{-1} on a complex chart.
    Ellipsoid {
        weights: Vec<f64>,
    },
    /// 1 + A·cos(ω·x_c + φ); the default coordinate is the model's
    /// non-symmetric angle (θ on T³, t on cut charts, the first coordinate
    /// otherwise).
    CosBump {
        amplitude: f64,
        #[serde(default)]
        coordinate: Option<usize>,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// constant + Σ terms.
    Terms {
        #[serde(default)]
        constant: f64,
        terms: Vec<Term>,
    },
    Product {
        factors: Vec<FactorSpec>,
    },
    Reciprocal {
        factor: Box<FactorSpec>,
    },
}

impl FactorSpec {
    fn resolve(&self, model: &ModelManifold) -> Result<FactorSpec, GeometryError> {
        let dim = model.ambient_dim();
        let periods = model.coordinate_periods();
        let check_coord = |c: usize| -> Result<(), GeometryError> {
            if c >= dim {
                Err(GeometryError::InvalidFactor(format!(
                    "coordinate index {c} out of range for {} (has {dim})",
                    model.name()
                )))
            } else {
                Ok(())
            }
        };
        let check_trig = |c: usize, freq: f64| -> Result<(), GeometryError> {
            check_coord(c)?;
            if let Some(p) = periods[c] {
                let m = freq * p / std::f64::consts::TAU;
                if (m - m.round()).abs() > 1e-9 {
                    return Err(GeometryError::InvalidFactor(format!(
                        "frequency {freq} is not compatible with the period {p} of coordinate {c}"
                    )));
                }
            }
            Ok(())
        };
        Ok(match self {
            FactorSpec::Constant { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(GeometryError::NonPositiveFactor { min: *value });
                }
                self.clone()
            }
            FactorSpec::Ellipsoid { weights } => {
                if model.chart() != ChartId::Complex || weights.len() != model.n() {
                    return Err(GeometryError::InvalidFactor(format!(
                        "ellipsoid preset needs {} weights on a complex chart",
                        model.n()
                    )));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(GeometryError::InvalidFactor("ellipsoid weights must be positive".into()));
                }
                self.clone()
            }
            FactorSpec::CosBump { amplitude, coordinate, frequency, phase } => {
                let c = coordinate.unwrap_or(match model.chart() {
                    ChartId::Torus | ChartId::Cut => 2,
                    _ => 0,
                });
                check_trig(c, *frequency)?;
                FactorSpec::CosBump { amplitude: *amplitude, coordinate: Some(c), frequency: *frequency, phase: *phase }
            }
            FactorSpec::Terms { terms, .. } => {
                for t in terms {
                    for m in &t.monomials {
                        check_coord(m.coord)?;
                        if periods[m.coord].is_some() && m.power > 0 {
                            return Err(GeometryError::InvalidFactor(format!(
                                "monomial in periodic coordinate {} is not well defined",
                                m.coord
                            )));
                        }
                    }
                    for g in &t.trig {
                        check_trig(g.coord, g.frequency)?;
                    }
                }
                self.clone()
            }
            FactorSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(GeometryError::InvalidFactor("empty product".into()));
                }
                FactorSpec::Product { factors: factors.iter().map(|f| f.resolve(model)).collect::<Result<_, _>>()? }
            }
            FactorSpec::Reciprocal { factor } => FactorSpec::Reciprocal { factor: Box::new(factor.resolve(model)?) },
        })
    }

    /// Value and gradient in chart coordinates.
    pub fn eval_with_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let n = x.len();
        match self {
            FactorSpec::Constant { value } => (*value, DVector::zeros(n)),
            FactorSpec::Ellipsoid { weights } => {
                let q = ellipsoid_quadratic(weights, x);
                let mut g = DVector::zeros(n);
                for j in 0..weights.len() {
                    let w2 = weights[j] * weights[j];
                    g[2 * j] = -2.0 * x[2 * j] / w2 / (q * q);
                    g[2 * j + 1] = -2.0 * x[2 * j + 1] / w2 / (q * q);
                }
                (1.0 / q, g)
            }
            FactorSpec::CosBump { amplitude, coordinate, frequency, phase } => {
                let c = coordinate.unwrap_or(0);
                let a = frequency * x[c] + phase;
                let mut g = DVector::zeros(n);
                g[c] = -amplitude * frequency * a.sin();
                (1.0 + amplitude * a.cos(), g)
            }
            FactorSpec::Terms { constant, terms } => {
                let mut v = *constant;
                let mut g = DVector::zeros(n);
                for t in terms {
                    let (tv, tg) = term_eval(t, x);
                    v += tv;
                    g += tg;
                }
                (v, g)
            }
            FactorSpec::Product { factors } => {
                let parts: Vec<(f64, DVector<f64>)> = factors.iter().map(|f| f.eval_with_gradient(x)).collect();
                let v: f64 = parts.iter().map(|p| p.0).product();
                let mut g = DVector::zeros(n);
                for i in 0..parts.len() {
                    let others: f64 = parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.0).product();
                    g += &parts[i].1 * others;
                }
                (v, g)
            }
            FactorSpec::Reciprocal { factor } => {
                let (v, g) = factor.eval_with_gradient(x);
                (1.0 / v, -g / (v * v))
            }
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.eval_with_gradient(x).0
    }
}

fn term_eval(t: &Term, x: &DVector<f64>) -> (f64, DVector<f64>) {
    let n = x.len();
    let mut vals: Vec<f64> = Vec::new();
    let mut ders: Vec<(usize, f64)> = Vec::new();
    for m in &t.monomials {
        let xv = x[m.coord];
        vals.push(xv.powi(m.power as i32));
        let d = if m.power == 0 { 0.0 } else { m.power as f64 * xv.powi(m.power as i32 - 1) };
        ders.push((m.coord, d));
    }
    for g in &t.trig {
        let a = g.frequency * x[g.coord] + g.phase;
        let (v, d) = match g.func {
            TrigFn::Sin => (a.sin(), g.frequency * a.cos()),
            TrigFn::Cos => (a.cos(), -g.frequency * a.sin()),
        };
        vals.push(v);
        ders.push((g.coord, d));
    }
    let value = t.coef * vals.iter().product::<f64>();
    let mut grad = DVector::zeros(n);
    for i in 0..vals.len() {
        let others: f64 = vals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).product();
        grad[ders[i].0] += t.coef * ders[i].1 * others;
    }
    (value, grad)
}

/// Extremal values of the unscaled shape with their enclosures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
    /// Certified lower end of the enclosure of min f.
    pub min_lo: f64,
    /// Certified upper end of the enclosure of max f.
    pub max_hi: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
    pub grid_points: usize,
}

/// A positive function f on a model, with cached extrema and symmetry tags.
#[derive(Debug, Clone)]
pub struct ConformalFactor {
    model: ModelManifold,
    spec: FactorSpec,
    scale: f64,
    extrema: Extrema,
    independent: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalDistance {
    pub value: f64,
    pub half_width: f64,
}

pub const DEFAULT_FACTOR_GRID: usize = 64;
const MAX_GRID_POINTS: usize = 1 << 21;

impl ConformalFactor {
    pub fn new(model: &ModelManifold, spec: FactorSpec) -> Result<Self, GeometryError> {
        Self::with_grid(model, spec, DEFAULT_FACTOR_GRID)
    }

    pub fn constant(model: &ModelManifold, value: f64) -> Result<Self, GeometryError> {
        Self::new(model, FactorSpec::Constant { value })
    }

    pub fn with_grid(model: &ModelManifold, spec: FactorSpec, grid: usize) -> Result<Self, GeometryError> {
        let spec = spec.resolve(model)?;
        let independent = detect_independence(model, &spec);
        let extrema = extremize(model, &spec, &independent, grid.max(4));
        if !(extrema.min_lo > 0.0) {
            return Err(GeometryError::NonPositiveFactor { min: extrema.min_lo });
        }
        Ok(Self { model: model.clone(), spec, scale: 1.0, extrema, independent })
    }

    pub fn model(&self) -> &ModelManifold {
        &self.model
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.scale * self.spec.eval(x)
    }

    pub fn value_with_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let (v, g) = self.spec.eval_with_gradient(x);
        (self.scale * v, g * self.scale)
    }

    pub fn min(&self) -> f64 {
        self.scale * self.extrema.min
    }

    pub fn max(&self) -> f64 {
        self.scale * self.extrema.max
    }

    pub fn min_lo(&self) -> f64 {
        self.scale * self.extrema.min_lo
    }

    pub fn max_hi(&self) -> f64 {
        self.scale * self.extrema.max_hi
    }

    pub fn extrema(&self) -> &Extrema {
        &self.extrema
    }

    /// max f / min f (nominal).
    pub fn ratio(&self) -> f64 {
        self.extrema.max / self.extrema.min
    }

    /// Upper end of the ratio after enclosure widening.
    pub fn ratio_hi(&self) -> f64 {
        self.extrema.max_hi / self.extrema.min_lo
    }

    pub fn is_constant(&self) -> bool {
        self.independent.iter().all(|&b| b)
    }

    /// Per sample coordinate: does f not depend on it?
    pub fn independent_coords(&self) -> &[bool] {
        &self.independent
    }

    /// Sample coordinates along which both f and the model's Reeb field are
    /// invariant; orbit searches may pin these.
    pub fn symmetric_coords(&self) -> Vec<bool> {
        self.model.sample_coords().iter().zip(&self.independent).map(|(c, &ind)| ind && c.field_symmetry).collect()
    }

    /// c·f, reusing the cached extrema so that ratios are unchanged bit for bit.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0 && c.is_finite());
        let mut out = self.clone();
        out.scale *= c;
        out
    }

    /// 1/f with extrema mapped exactly from those of f.
    pub fn reciprocal(&self) -> Self {
        let e = &self.extrema;
        let extrema = Extrema {
            min: 1.0 / e.max,
            max: 1.0 / e.min,
            min_lo: 1.0 / e.max_hi,
            max_hi: 1.0 / e.min_lo,
            argmin: e.argmax.clone(),
            argmax: e.argmin.clone(),
            grid_points: e.grid_points,
        };
        Self {
            model: self.model.clone(),
            spec: FactorSpec::Reciprocal { factor: Box::new(self.spec.clone()) },
            scale: 1.0 / self.scale,
            extrema,
            independent: self.independent.clone(),
        }
    }

    /// Pointwise product, with extrema recomputed on the grid.
    pub fn product(&self, other: &ConformalFactor) -> Result<Self, GeometryError> {
        let spec = FactorSpec::Product {
            factors: vec![
                FactorSpec::Product { factors: vec![self.spec.clone(), FactorSpec::Constant { value: self.scale }] },
                FactorSpec::Product { factors: vec![other.spec.clone(), FactorSpec::Constant { value: other.scale }] },
            ],
        };
        Self::new(&self.model, spec)
    }
}

/// ln(max f / min f) with the enclosure-induced half width.
pub fn conformal_distance(f: &ConformalFactor) -> ConformalDistance {
    let e = f.extrema();
    let value = (e.max / e.min).ln();
    let wide = (e.max_hi / e.min_lo).ln();
    ConformalDistance { value, half_width: (wide - value).max(0.0) }
}

fn lcg(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*state >> 11) as f64) / ((1u64 << 53) as f64)
}

fn detect_independence(model: &ModelManifold, spec: &FactorSpec) -> Vec<bool> {
    let coords = model.sample_coords();
    let mut state = 0x5eed_u64;
    let mut base: Vec<Vec<f64>> = Vec::new();
    for _ in 0..8 {
        base.push(coords.iter().map(|c| c.lo + (c.hi - c.lo) * lcg(&mut state)).collect());
    }
    coords
        .iter()
        .enumerate()
        .map(|(i, c)| {
            base.iter().all(|s| {
                let f0 = spec.eval(&model.sample_point(s));
                (0..3).all(|_| {
                    let mut s2 = s.clone();
                    s2[i] = c.lo + (c.hi - c.lo) * lcg(&mut state);
                    let f1 = spec.eval(&model.sample_point(&s2));
                    (f1 - f0).abs() <= 1e-13 * (1.0 + f0.abs())
                })
            })
        })
        .collect()
}

fn extremize(model: &ModelManifold, spec: &FactorSpec, independent: &[bool], grid: usize) -> Extrema {
    let coords = model.sample_coords();
    let base: Vec<f64> = coords.iter().map(|c| if c.periodic { c.lo } else { 0.5 * (c.lo + c.hi) }).collect();
    let free: Vec<usize> = (0..coords.len()).filter(|&i| !independent[i]).collect();
    let eval_s = |s: &[f64]| spec.eval(&model.sample_point(s));
    if free.is_empty() {
        let v = eval_s(&base);
        return Extrema { min: v, max: v, min_lo: v, max_hi: v, argmin: base.clone(), argmax: base, grid_points: 1 };
    }
    let d = free.len();
    let mut per = grid;
    while per > 4 && per.pow(d as u32) > MAX_GRID_POINTS {
        per -= 1;
    }
    let axes: Vec<Vec<f64>> = free
        .iter()
        .map(|&i| {
            let c = &coords[i];
            if c.periodic {
                (0..per).map(|k| c.lo + (c.hi - c.lo) * k as f64 / per as f64).collect()
            } else {
                (0..per).map(|k| c.lo + (c.hi - c.lo) * k as f64 / (per - 1) as f64).collect()
            }
        })
        .collect();
    let spacing: Vec<f64> = axes.iter().map(|a| a[1] - a[0]).collect();
    let total = per.pow(d as u32);
    let point_of = |idx: usize| -> Vec<f64> {
        let mut s = base.clone();
        let mut r = idx;
        for (a, &i) in free.iter().enumerate() {
            s[i] = axes[a][r % per];
            r /= per;
        }
        s
    };
    let values: Vec<f64> = (0..total).into_par_iter().map(|idx| eval_s(&point_of(idx))).collect();
    let (mut imin, mut imax) = (0, 0);
    for (i, v) in values.iter().enumerate() {
        if *v < values[imin] {
            imin = i;
        }
        if *v > values[imax] {
            imax = i;
        }
    }
    // Largest second difference along any grid axis bounds the curvature
    // between nodes.
    let mut curv: f64 = 0.0;
    let stride: Vec<usize> = (0..d).map(|a| per.pow(a as u32)).collect();
    for idx in 0..total {
        for a in 0..d {
            let k = (idx / stride[a]) % per;
            let periodic = coords[free[a]].periodic;
            let (lo, hi) = if k == 0 {
                if !periodic {
                    continue;
                }
                (idx + (per - 1) * stride[a], idx + stride[a])
            } else if k == per - 1 {
                if !periodic {
                    continue;
                }
                (idx - stride[a], idx - (per - 1) * stride[a])
            } else {
                (idx - stride[a], idx + stride[a])
            };
            let second = (values[lo] - 2.0 * values[idx] + values[hi]).abs() / (spacing[a] * spacing[a]);
            curv = curv.max(second);
        }
    }
    let h_max = spacing.iter().cloned().fold(0.0, f64::max);
    let pad = 1.5 * d as f64 / 8.0 * curv * h_max * h_max;
    let grid_min = values[imin];
    let grid_max = values[imax];
    let (argmin, pmin) = polish(&eval_s, point_of(imin), &free, &coords, 1.0);
    let (argmax, pmax) = polish(&eval_s, point_of(imax), &free, &coords, -1.0);
    let min = pmin.min(grid_min);
    let max = pmax.max(grid_max);
    Extrema {
        min,
        max,
        min_lo: min.min(grid_min - pad),
        max_hi: max.max(grid_max + pad),
        argmin,
        argmax,
        grid_points: total,
    }
}

/// Newton polish of an extremum in the free sample coordinates; `sign` = 1
/// minimizes, −1 maximizes. Steps are only accepted when they improve.
fn polish(
    eval_s: &dyn Fn(&[f64]) -> f64,
    start: Vec<f64>,
    free: &[usize],
    coords: &[super::model::SampleCoord],
    sign: f64,
) -> (Vec<f64>, f64) {
    let d = free.len();
    let mut s = start;
    let mut best = sign * eval_s(&s);
    let h = 1e-4;
    let clamp = |s: &mut Vec<f64>| {
        for &i in free {
            let c = &coords[i];
            if !c.periodic {
                s[i] = s[i].clamp(c.lo, c.hi);
            }
        }
    };
    for _ in 0..30 {
        let g_at = |s: &Vec<f64>, a: usize, da: f64, b: usize, db: f64| {
            let mut t = s.clone();
            t[free[a]] += da;
            t[free[b]] += db;
            sign * eval_s(&t)
        };
        let mut grad = DVector::zeros(d);
        let mut hess = DMatrix::zeros(d, d);
        for a in 0..d {
            grad[a] = (g_at(&s, a, h, a, 0.0) - g_at(&s, a, -h, a, 0.0)) / (2.0 * h);
            hess[(a, a)] = (g_at(&s, a, h, a, 0.0) - 2.0 * best + g_at(&s, a, -h, a, 0.0)) / (h * h);
            for b in 0..a {
                let v = (g_at(&s, a, h, b, h) - g_at(&s, a, h, b, -h) - g_at(&s, a, -h, b, h) + g_at(&s, a, -h, b, -h))
                    / (4.0 * h * h);
                hess[(a, b)] = v;
                hess[(b, a)] = v;
            }
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => break,
        };
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        let mut trial = s.clone();
        for a in 0..d {
            trial[free[a]] -= step[a];
        }
        clamp(&mut trial);
        let v = sign * eval_s(&trial);
        if v < best {
            best = v;
            s = trial;
            if step.norm() < 1e-12 {
                break;
            }
        } else {
            break;
        }
    }
    (s, sign * best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ellipsoid_factor_extrema() {
        let m = ModelManifold::sphere(2);
        let f = ConformalFactor::new(&m, FactorSpec::Ellipsoid { weights: vec![1.0, 1.2] }).unwrap();
        assert_relative_eq!(f.min(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(f.max(), 1.44, epsilon = 1e-12);
        assert!(f.min_lo() <= f.min() && f.max_hi() >= f.max());
        assert!(f.max_hi() - f.max() < 1e-2);
        let d = conformal_distance(&f);
        assert_relative_eq!(d.value, 1.44f64.ln(), epsilon = 1e-12);
        assert_eq!(f.symmetric_coords(), vec![false, true, true]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = ModelManifold::sphere(2);
        let spec = FactorSpec::Terms {
            constant: 2.0,
            terms: vec![
                Term {
                    coef: 0.3,
                    monomials: vec![Monomial { coord: 0, power: 2 }, Monomial { coord: 3, power: 1 }],
                    trig: vec![TrigFactor { func: TrigFn::Sin, coord: 1, frequency: 2.0, phase: 0.1 }],
                },
                Term { coef: -0.2, monomials: vec![Monomial { coord: 2, power: 3 }], trig: vec![] },
            ],
        };
        let x = DVector::from_vec(vec![0.3, -0.5, 0.6, 0.2]);
        let (_, g) = spec.eval_with_gradient(&x);
        let h = 1e-6;
        for i in 0..4 {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (spec.eval(&a) - spec.eval(&b)) / (2.0 * h);
            assert_relative_eq!(g[i], fd, epsilon = 1e-8);
        }
        let f = ConformalFactor::new(&m, spec).unwrap();
        assert!(!f.is_constant());
    }

    #[test]
    fn scaling_and_reciprocal_preserve_distance() {
        let m = ModelManifold::torus3(2);
        let f = ConformalFactor::new(
            &m,
            FactorSpec::CosBump { amplitude: 0.2, coordinate: None, frequency: 1.0, phase: 0.0 },
        )
        .unwrap();
        assert_relative_eq!(f.min(), 0.8, epsilon = 1e-12);
        assert_relative_eq!(f.max(), 1.2, epsilon = 1e-12);
        let d = conformal_distance(&f).value;
        assert_eq!(conformal_distance(&f.scaled(3.7)).value, d);
        assert_relative_eq!(conformal_distance(&f.reciprocal()).value, d, epsilon = 1e-14);
        assert_eq!(f.symmetric_coords(), vec![true, true, false]);
    }

    #[test]
    fn rejects_bad_factors() {
        let m = ModelManifold::torus3(1);
        let bad_freq = FactorSpec::CosBump { amplitude: 0.1, coordinate: Some(0), frequency: 1.0, phase: 0.0 };
        assert!(ConformalFactor::new(&m, bad_freq).is_err());
        let neg = FactorSpec::CosBump { amplitude: 1.5, coordinate: None, frequency: 1.0, phase: 0.0 };
        assert!(matches!(ConformalFactor::new(&m, neg), Err(GeometryError::NonPositiveFactor { .. })));
        let mono = FactorSpec::Terms {
            constant: 1.0,
            terms: vec![Term { coef: 0.1, monomials: vec![Monomial { coord: 0, power: 1 }], trig: vec![] }],
        };
        assert!(ConformalFactor::new(&m, mono).is_err());
        assert!(ConformalFactor::new(&m, FactorSpec::Ellipsoid { weights: vec![1.0, 2.0] }).is_err());
    }
}
