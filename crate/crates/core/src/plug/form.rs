//! The plugged 1-form, its contact density and kernel, and grid checks.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::bumps::{Bumps, Jet};
use super::{PlugError, PlugSpec};
use crate::geometry::exterior_derivative;
use crate::numeric::{bisect_predicate, GaussLegendre};

/// A density at or below this value is not counted as positive.
pub const CONTACT_TOL: f64 = 1e-12;
/// Largest accepted |ι_K dλ| / |K| at the random kernel points.
pub const KERNEL_TOL: f64 = 1e-8;
pub const KERNEL_POINTS: usize = 1000;
/// Agreement required between the quadrature period and 2π(ε + ε²).
pub const QUADRATURE_TOL: f64 = 1e-10;
const KERNEL_SEED: u64 = 0xfa57;

/// Hatted bump data at one point: Â = cut·𝒜, B̂ = x + cut·(ℬ − x).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HatValues {
    pub a: f64,
    pub a_t: f64,
    pub a_x: f64,
    pub a_rho: f64,
    pub b: f64,
    pub b_t: f64,
    pub b_x: f64,
    pub b_rho: f64,
    /// B̂ − x.
    pub excess: f64,
    /// ∂ₓ(B̂ − x).
    pub excess_x: f64,
}

/// Per-t factors (φ, 𝒯) and per-x factors (ψ, 𝒳 − x).
#[derive(Clone, Copy)]
struct TFactors {
    phi: Jet,
    trans: Jet,
}

#[derive(Clone, Copy)]
struct XFactors {
    x: f64,
    psi: Jet,
    excess: Jet,
}

fn t_factors(b: &Bumps, t: f64) -> TFactors {
    TFactors { phi: b.phi(t), trans: b.trans(t) }
}

fn x_factors(b: &Bumps, x: f64) -> XFactors {
    XFactors { x, psi: b.psi(x), excess: b.excess(x) }
}

fn combine(tf: &TFactors, xf: &XFactors, cut: Jet) -> HatValues {
    let a = tf.phi.v * xf.psi.v;
    let e = tf.trans.v * xf.excess.v;
    let e_t = tf.trans.d * xf.excess.v;
    let e_x = tf.trans.v * xf.excess.d;
    HatValues {
        a: cut.v * a,
        a_t: cut.v * tf.phi.d * xf.psi.v,
        a_x: cut.v * tf.phi.v * xf.psi.d,
        a_rho: cut.d * a,
        b: xf.x + cut.v * e,
        b_t: cut.v * e_t,
        b_x: 1.0 + cut.v * e_x,
        b_rho: cut.d * e,
        excess: cut.v * e,
        excess_x: cut.v * e_x,
    }
}

/// Evaluation of λ = (1 − δÂ)dt + B̂ dθ + κ₀ with κ₀ = ½Σ(q dp − p dq).
#[derive(Debug, Clone)]
pub struct PlugForm {
    pub spec: PlugSpec,
    bumps: Bumps,
}

impl PlugForm {
    pub fn new(spec: &PlugSpec) -> Self {
        Self { spec: spec.clone(), bumps: spec.bumps() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.spec.dimension
    }

    fn cut(&self, rho: f64) -> Jet {
        if self.spec.has_cut() {
            self.bumps.cut(rho)
        } else {
            Jet::ONE
        }
    }

    pub fn hats(&self, t: f64, x: f64, rho: f64) -> HatValues {
        combine(&t_factors(&self.bumps, t), &x_factors(&self.bumps, x), self.cut(rho))
    }

    /// λ(K) = (1 − δÂ)B̂ₓ + δÂₓB̂ − ρδ(ÂₓB̂_ρ − Â_ρB̂ₓ); the contact condition is
    /// that this stays positive.
    pub fn density(&self, h: &HatValues, rho: f64) -> f64 {
        density_with(self.spec.delta, h, rho, -1.0)
    }

    /// The density with the coefficient (n − 2) on the ρ term in place of −1,
    /// kept for comparison; it is not λ(K).
    pub fn density_literal(&self, h: &HatValues, rho: f64) -> f64 {
        density_with(self.spec.delta, h, rho, self.spec.n() as f64 - 2.0)
    }

    fn rho_of(p: &DVector<f64>) -> f64 {
        0.5 * p.iter().skip(3).map(|v| v * v).sum::<f64>()
    }

    /// Coefficients of λ in (t, x, θ, q₁, p₁, …).
    pub fn coeffs(&self, p: &DVector<f64>) -> DVector<f64> {
        let h = self.hats(p[0], p[1], Self::rho_of(p));
        let mut c = DVector::zeros(p.len());
        c[0] = 1.0 - self.spec.delta * h.a;
        c[2] = h.b;
        for i in (3..p.len()).step_by(2) {
            c[i] = -0.5 * p[i + 1];
            c[i + 1] = 0.5 * p[i];
        }
        c
    }

    /// K = (B̂ₓ, −B̂_t, δÂₓ, μ(p_i, −q_i)) with μ = δ(ÂₓB̂_ρ − Â_ρB̂ₓ), which
    /// spans ker dλ.
    pub fn kernel(&self, p: &DVector<f64>) -> DVector<f64> {
        let d = self.spec.delta;
        let h = self.hats(p[0], p[1], Self::rho_of(p));
        let mu = d * (h.a_x * h.b_rho - h.a_rho * h.b_x);
        let mut k = DVector::zeros(p.len());
        k[0] = h.b_x;
        k[1] = -h.b_t;
        k[2] = d * h.a_x;
        for i in (3..p.len()).step_by(2) {
            k[i] = mu * p[i + 1];
            k[i + 1] = -mu * p[i];
        }
        k
    }

    pub fn density_at(&self, p: &DVector<f64>) -> f64 {
        let rho = Self::rho_of(p);
        self.density(&self.hats(p[0], p[1], rho), rho)
    }

    /// Point (t, x, θ, 0, …) of the chart.
    pub fn point(&self, t: f64, x: f64, theta: f64) -> DVector<f64> {
        let mut p = DVector::zeros(self.ambient_dim());
        p[0] = t;
        p[1] = x;
        p[2] = theta;
        p
    }
}

fn density_with(delta: f64, h: &HatValues, rho: f64, rho_coeff: f64) -> f64 {
    (1.0 - delta * h.a) * h.b_x + delta * h.a_x * h.b + rho_coeff * rho * delta * (h.a_x * h.b_rho - h.a_rho * h.b_x)
}

/// Grid over Q_ε = [−2ε, 2ε]² (tx intervals per side) and ρ ∈ [0, ε²/2]
/// (rho intervals; ignored in dimension 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlugGrid {
    pub tx: usize,
    pub rho: usize,
}

impl Default for PlugGrid {
    fn default() -> Self {
        Self { tx: 512, rho: 64 }
    }
}

impl PlugGrid {
    pub fn coarse() -> Self {
        Self { tx: 128, rho: 16 }
    }

    /// tx is rounded up to a multiple of 4 so that (0, ε) is a node.
    pub fn normalized(self) -> Self {
        Self { tx: self.tx.max(4).div_ceil(4) * 4, rho: self.rho.max(1) }
    }
}

/// Precomputed separable tables of a grid.
pub(crate) struct GridTables {
    pub ts: Vec<f64>,
    pub rhos: Vec<f64>,
    tf: Vec<TFactors>,
    xf: Vec<XFactors>,
    cuts: Vec<Jet>,
}

impl GridTables {
    pub fn new(form: &PlugForm, grid: PlugGrid) -> Self {
        let grid = grid.normalized();
        let e = form.spec.epsilon;
        let ts: Vec<f64> = (0..=grid.tx).map(|i| -2.0 * e + 4.0 * e * i as f64 / grid.tx as f64).collect();
        let rhos: Vec<f64> = if form.spec.has_cut() {
            (0..=grid.rho).map(|k| 0.5 * e * e * k as f64 / grid.rho as f64).collect()
        } else {
            vec![0.0]
        };
        let b = &form.bumps;
        Self {
            tf: ts.iter().map(|&t| t_factors(b, t)).collect(),
            xf: ts.iter().map(|&x| x_factors(b, x)).collect(),
            cuts: rhos.iter().map(|&r| form.cut(r)).collect(),
            ts,
            rhos,
        }
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn hats(&self, i: usize, j: usize, k: usize) -> HatValues {
        combine(&self.tf[i], &self.xf[j], self.cuts[k])
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec<f64> {
        vec![self.ts[i], self.ts[j], self.rhos[k]]
    }

    /// Index of the node (0, ε, 0).
    pub fn orbit_node(&self) -> (usize, usize, usize) {
        let n = self.len() - 1;
        (n / 2, 3 * n / 4, 0)
    }

    /// Minimum of `f` over all nodes with its first minimizing index in
    /// (i, j, k) order; deterministic under parallel reduction.
    pub fn min_by<F>(&self, f: F) -> (f64, (usize, usize, usize))
    where
        F: Fn(usize, usize, usize, &HatValues) -> f64 + Sync,
    {
        let m = self.len();
        let nr = self.rhos.len();
        (0..m)
            .into_par_iter()
            .map(|i| {
                let mut best = (f64::INFINITY, (i, 0, 0));
                for j in 0..m {
                    for k in 0..nr {
                        let v = f(i, j, k, &self.hats(i, j, k));
                        if v < best.0 {
                            best = (v, (i, j, k));
                        }
                    }
                }
                best
            })
            .reduce(|| (f64::INFINITY, (usize::MAX, 0, 0)), pick_min)
    }
}

pub(crate) fn pick_min(
    a: (f64, (usize, usize, usize)),
    b: (f64, (usize, usize, usize)),
) -> (f64, (usize, usize, usize)) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    pub grid: PlugGrid,
    pub min_density: f64,
    /// (t, x, ρ) of the minimum.
    pub argmin: Vec<f64>,
    /// Minimum over the inner rectangle [−ε, ε] × [ε/2, 3ε/2] at ρ = 0.
    pub inner_min: f64,
    /// δε/2, a lower bound for the density on the inner rectangle.
    pub inner_bound: f64,
    pub inner_ok: bool,
    /// Density at (0, ε, 0) and its closed form δ(ε + ε²).
    pub at_orbit: f64,
    pub at_orbit_formula: f64,
    /// Minimum of the density with (n − 2) in place of −1 on the ρ term
    /// (dimension > 3 only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal_min: Option<f64>,
    pub positive: bool,
}

/// Scan the contact density λ(K) over the grid. A minimum at or below
/// CONTACT_TOL is reported as NotContact.
pub fn verify_contact(spec: &PlugSpec, grid: &PlugGrid) -> Result<ContactReport, PlugError> {
    let form = PlugForm::new(spec);
    let grid = grid.normalized();
    let tables = GridTables::new(&form, grid);
    let (min, (i, j, k)) = tables.min_by(|_, _, k, h| form.density(h, tables.rhos[k]));
    let e = spec.epsilon;
    let (inner_min, _) = tables.min_by(|i, j, k, h| {
        let (t, x) = (tables.ts[i], tables.ts[j]);
        if k == 0 && t.abs() <= e && (0.5 * e..=1.5 * e).contains(&x) {
            form.density(h, 0.0)
        } else {
            f64::INFINITY
        }
    });
    let literal_min = spec.has_cut().then(|| tables.min_by(|_, _, k, h| form.density_literal(h, tables.rhos[k])).0);
    let (oi, oj, ok) = tables.orbit_node();
    let at_orbit = form.density(&tables.hats(oi, oj, ok), 0.0);
    let inner_bound = spec.delta * e / 2.0;
    let point = tables.point(i, j, k);
    if min.is_nan() || min <= CONTACT_TOL {
        return Err(PlugError::NotContact { min, point });
    }
    Ok(ContactReport {
        grid,
        min_density: min,
        argmin: point,
        inner_min,
        inner_bound,
        inner_ok: inner_min > inner_bound,
        at_orbit,
        at_orbit_formula: spec.delta * (e + e * e),
        literal_min,
        positive: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBound {
    /// min over (t, x) of x·∂ₓ𝒜.
    pub min_x_ax: f64,
    pub argmin_x: f64,
    /// 1/|min x∂ₓ𝒜|: below it the form is contact.
    pub analytic_cap: f64,
    /// Largest δ keeping the grid density positive (bisection on `grid`).
    pub grid_cap: f64,
    pub grid: PlugGrid,
}

const CAP_SAMPLES: usize = 100_000;

/// Contact cap on δ: closed-form sufficient bound and the bisected grid cap.
pub fn delta_bound(spec: &PlugSpec, grid: &PlugGrid) -> Result<DeltaBound, PlugError> {
    let e = spec.epsilon;
    let b = spec.bumps();
    // ∂ₓ𝒜 = φ(t)ψ′(x) with 0 ≤ φ ≤ 1, so the minimum is over x alone
    let (min_x_ax, argmin_x) = (0..=CAP_SAMPLES)
        .map(|i| {
            let x = -2.0 * e + 4.0 * e * i as f64 / CAP_SAMPLES as f64;
            ((x * b.psi(x).d).min(0.0), x)
        })
        .fold((0.0, 0.0), |acc, v| if v.0 < acc.0 { v } else { acc });
    let analytic_cap = if min_x_ax < 0.0 { 1.0 / min_x_ax.abs() } else { f64::INFINITY };

    let grid = grid.normalized();
    let form = PlugForm::new(&spec.with_delta(0.0));
    let tables = GridTables::new(&form, grid);
    let m = tables.len();
    let nr = tables.rhos.len();
    let hats: Vec<HatValues> =
        (0..m * m * nr).map(|idx| tables.hats(idx / (m * nr), (idx / nr) % m, idx % nr)).collect();
    let positive = |delta: f64| {
        hats.par_iter().enumerate().all(|(idx, h)| density_with(delta, h, tables.rhos[idx % nr], -1.0) > CONTACT_TOL)
    };
    let mut hi = if analytic_cap.is_finite() { 2.0 * analytic_cap } else { 1.0 };
    while positive(hi) && hi < 1e12 {
        hi *= 2.0;
    }
    let lo = 1e-6 * hi.min(1.0);
    let grid_cap = bisect_predicate(positive, lo, hi, 1e-7 * hi)
        .ok_or_else(|| PlugError::NotContact { min: f64::NAN, point: vec![] })?;
    Ok(DeltaBound { min_x_ax, argmin_x, analytic_cap, grid_cap, grid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    /// The orbit S_ε = {t = 0, x = ε, z = 0}, parametrized by θ.
    pub t: f64,
    pub x: f64,
    pub period: f64,
    /// 2π(ε + ε²).
    pub period_formula: f64,
    /// ∫₀^{2π} λ(∂_θ) dθ by Gauss–Legendre quadrature.
    pub period_quadrature: f64,
    /// 2π / R^θ with R the Reeb field at S_ε.
    pub period_reeb: f64,
    pub quadrature_ok: bool,
    /// K at (0, ε, 0): (K_t, K_x, K_θ, max |K_z|).
    pub kernel_at_orbit: Vec<f64>,
    pub reeb_theta: f64,
    /// Grid nodes other than (0, ε, 0) with K_t ≤ 0.
    pub other_zero_nodes: usize,
    pub min_kt_off_orbit: f64,
    pub unique_on_grid: bool,
    pub kernel_points: usize,
    /// max over random points of |ι_K dλ| / |K|.
    pub kernel_residual: f64,
    pub kernel_ok: bool,
}

/// Locate the inserted orbit, compute its period three ways, check on the
/// grid that K_t vanishes only there and verify ι_K dλ = 0 at random points.
pub fn locate_orbit(spec: &PlugSpec, grid: &PlugGrid) -> Result<OrbitReport, PlugError> {
    let form = PlugForm::new(spec);
    let e = spec.epsilon;
    let p0 = form.point(0.0, e, 0.0);
    let h0 = form.hats(0.0, e, 0.0);
    let period = TAU * h0.b;
    let period_formula = TAU * (e + e * e);
    let gl = GaussLegendre::new(8);
    let period_quadrature = gl.integrate_composite(|th| form.coeffs(&form.point(0.0, e, th))[2], 0.0, TAU, 4);
    let k0 = form.kernel(&p0);
    let lk = form.coeffs(&p0).dot(&k0);
    let reeb_theta = k0[2] / lk;
    let kz = k0.iter().skip(3).fold(0.0f64, |m, v| m.max(v.abs()));

    let tables = GridTables::new(&form, grid.normalized());
    let orbit = tables.orbit_node();
    let m = tables.len();
    let nr = tables.rhos.len();
    let counts: Vec<(usize, f64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut zeros = 0;
            let mut min = f64::INFINITY;
            for j in 0..m {
                for k in 0..nr {
                    if (i, j, k) == orbit {
                        continue;
                    }
                    let kt = tables.hats(i, j, k).b_x;
                    if kt <= 0.0 {
                        zeros += 1;
                    }
                    min = min.min(kt);
                }
            }
            (zeros, min)
        })
        .collect();
    let other_zero_nodes = counts.iter().map(|c| c.0).sum();
    let min_kt_off_orbit = counts.iter().fold(f64::INFINITY, |a, c| a.min(c.1));

    let (kernel_residual, worst) = kernel_residual(&form, KERNEL_POINTS);
    if kernel_residual > KERNEL_TOL {
        return Err(PlugError::KernelResidual { residual: kernel_residual, point: worst });
    }
    Ok(OrbitReport {
        t: 0.0,
        x: e,
        period,
        period_formula,
        period_quadrature,
        period_reeb: TAU / reeb_theta,
        quadrature_ok: (period_quadrature - period_formula).abs() < QUADRATURE_TOL,
        kernel_at_orbit: vec![k0[0], k0[1], k0[2], kz],
        reeb_theta,
        other_zero_nodes,
        min_kt_off_orbit,
        unique_on_grid: other_zero_nodes == 0,
        kernel_points: KERNEL_POINTS,
        kernel_residual,
        kernel_ok: true,
    })
}

/// dλ as the exact differential of dt + x dθ + κ₀ plus the Richardson-
/// extrapolated central differences of the remainder −δÂ dt + (B̂ − x) dθ.
/// Differencing only the remainder keeps roundoff at the scale of δε
/// instead of 1; plain central differences lose accuracy on the 𝒳 spike of
/// width ~ε²/4, hence the extrapolation.
fn d_lambda(form: &PlugForm, p: &DVector<f64>) -> nalgebra::DMatrix<f64> {
    let delta = form.spec.delta;
    let c = |q: &DVector<f64>| {
        let h = form.hats(q[0], q[1], PlugForm::rho_of(q));
        let mut c = DVector::zeros(q.len());
        c[0] = -delta * h.a;
        c[2] = h.excess;
        c
    };
    let h = 2e-4 * form.spec.epsilon * form.spec.epsilon;
    let w1 = exterior_derivative(&c, p, h);
    let w2 = exterior_derivative(&c, p, 0.5 * h);
    let mut w = (w2 * 4.0 - w1) / 3.0;
    w[(1, 2)] += 1.0;
    w[(2, 1)] -= 1.0;
    for i in (3..p.len()).step_by(2) {
        w[(i, i + 1)] += 1.0;
        w[(i + 1, i)] -= 1.0;
    }
    w
}

/// max |ι_K dλ|∞ / |K|∞ over `count` seeded points of the plug region.
pub fn kernel_residual(form: &PlugForm, count: usize) -> (f64, Vec<f64>) {
    let e = form.spec.epsilon;
    let dim = form.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(KERNEL_SEED);
    let points: Vec<DVector<f64>> = (0..count)
        .map(|i| {
            let mut p = DVector::zeros(dim);
            if i % 2 == 0 {
                p[0] = rng.gen_range(-2.0 * e..2.0 * e);
                p[1] = rng.gen_range(-2.0 * e..2.0 * e);
            } else {
                // the inner rectangle, where all bumps are active
                p[0] = rng.gen_range(-e..e);
                p[1] = rng.gen_range(0.5 * e..1.5 * e);
            }
            p[2] = rng.gen_range(0.0..TAU);
            if dim > 3 {
                loop {
                    for v in p.iter_mut().skip(3) {
                        *v = rng.gen_range(-e..e);
                    }
                    if p.iter().skip(3).map(|v| v * v).sum::<f64>() < e * e {
                        break;
                    }
                }
            }
            p
        })
        .collect();
    points
        .par_iter()
        .map(|p| {
            let k = form.kernel(p);
            let w = d_lambda(form, p);
            let r = (w.transpose() * &k).amax() / k.amax();
            (r, p.iter().copied().collect::<Vec<_>>())
        })
        .reduce(|| (0.0, vec![]), |a, b| if b.0 > a.0 { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::super::make_spec;
    use super::*;

    #[test]
    fn density_equals_lambda_of_kernel() {
        for dim in [3, 5, 7] {
            let spec = make_spec(0.1, 0.05, dim).unwrap();
            let form = PlugForm::new(&spec);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..200 {
                let mut p = DVector::zeros(dim);
                for v in p.iter_mut() {
                    *v = rng.gen_range(-0.2..0.2);
                }
                for v in p.iter_mut().skip(3) {
                    *v *= 0.25;
                }
                let lk = form.coeffs(&p).dot(&form.kernel(&p));
                assert!((lk - form.density_at(&p)).abs() < 1e-14, "{lk} vs {}", form.density_at(&p));
            }
        }
    }

    #[test]
    fn contact_and_orbit_in_dimension_three() {
        let spec = make_spec(0.05, 0.01, 3).unwrap();
        let grid = PlugGrid { tx: 128, rho: 8 };
        let c = verify_contact(&spec, &grid).unwrap();
        assert!(c.inner_ok && c.min_density > 0.0);
        assert!((c.at_orbit - c.at_orbit_formula).abs() < 1e-12 * c.at_orbit_formula);
        let o = locate_orbit(&spec, &grid).unwrap();
        assert!((o.period - o.period_formula).abs() < 1e-15);
        assert!(o.quadrature_ok);
        assert!((o.period_reeb - o.period_formula).abs() < 1e-12);
        assert!(o.unique_on_grid);
        assert!(o.kernel_residual < KERNEL_TOL, "{}", o.kernel_residual);
        assert!(o.kernel_at_orbit[0].abs() < 1e-14 && o.kernel_at_orbit[1].abs() < 1e-14);
    }

    #[test]
    fn large_delta_breaks_contact() {
        let spec = make_spec(0.05, 0.01, 3).unwrap();
        let grid = PlugGrid { tx: 64, rho: 8 };
        let cap = delta_bound(&spec, &grid).unwrap();
        assert!(cap.grid_cap >= cap.analytic_cap * (1.0 - 1e-6), "{cap:?}");
        let bad = spec.with_delta(cap.grid_cap * 1.5);
        assert!(matches!(verify_contact(&bad, &grid), Err(PlugError::NotContact { .. })));
    }

    #[test]
    fn split_differential_matches_plain_differences() {
        let spec = make_spec(0.1, 0.02, 5).unwrap();
        let form = PlugForm::new(&spec);
        let c = |q: &DVector<f64>| form.coeffs(q);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut p = DVector::zeros(5);
            for v in p.iter_mut() {
                *v = rng.gen_range(-0.1..0.1);
            }
            p[3] *= 0.3;
            p[4] *= 0.3;
            let plain = exterior_derivative(&c, &p, 1e-6);
            assert!((d_lambda(&form, &p) - plain).amax() < 1e-6);
        }
    }

    #[test]
    fn zero_delta_is_only_weakly_contact() {
        let spec = make_spec(0.05, 0.0, 3).unwrap();
        match verify_contact(&spec, &PlugGrid { tx: 64, rho: 4 }) {
            Err(PlugError::NotContact { min, point }) => {
                assert!(min.abs() < 1e-15);
                assert!(point[0].abs() < 1e-15 && (point[1] - 0.05).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_three_density_is_the_rho_zero_slice() {
        let s3 = make_spec(0.1, 0.05, 3).unwrap();
        let s5 = s3.clone_with_dimension(5);
        let (f3, f5) = (PlugForm::new(&s3), PlugForm::new(&s5));
        let t3 = GridTables::new(&f3, PlugGrid { tx: 64, rho: 4 });
        let t5 = GridTables::new(&f5, PlugGrid { tx: 64, rho: 4 });
        for i in 0..t3.len() {
            for j in 0..t3.len() {
                let (a, b) = (t3.hats(i, j, 0), t5.hats(i, j, 0));
                assert_eq!(f3.density(&a, 0.0), f5.density(&b, 0.0));
                assert_eq!(f5.density(&b, 0.0), f5.density_literal(&b, 0.0));
            }
        }
    }

    #[test]
    fn z_components_of_the_kernel_vanish_on_the_orbit() {
        let spec = make_spec(0.05, 0.01, 5).unwrap();
        let o = locate_orbit(&spec, &PlugGrid { tx: 64, rho: 8 }).unwrap();
        assert_eq!(o.kernel_at_orbit[3], 0.0);
        assert!((o.period - 0.3298672286269283).abs() < 1e-15);
    }
}
