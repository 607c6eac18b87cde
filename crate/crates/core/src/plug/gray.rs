//! Gray-stability bounds for the two deformations λ₀ → λ_δ → λ_{δ,ε}.
//!
//! The first moves (1 − sδÂ)dt, the second x + s(B̂ − x) in the dθ
//! coefficient. Along each, the conformal factor grows by e^{∫ sup r ds}
//! with r = λ̇_s(R_s):
//! r̄_s = −δÂ / D̄_s with D̄_s = 1 − sδÂ + sδxÂₓ + sρδÂ_ρ, and
//! r̂_s = (B̂ − x)δÂₓ / D̂_s with D̂_s the contact density of B̂^s.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::form::{GridTables, HatValues, PlugForm, PlugGrid, CONTACT_TOL};
use super::{PlugError, PlugSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayGrid {
    /// Number of s-intervals on [0, 1].
    pub s: usize,
    pub space: PlugGrid,
}

impl GrayGrid {
    /// Full resolution in dimension 3, a reduced (t, x, ρ) grid above.
    pub fn default_for(dimension: usize) -> Self {
        if dimension <= 3 {
            Self { s: 32, space: PlugGrid::default() }
        } else {
            Self { s: 32, space: PlugGrid { tx: 256, rho: 32 } }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayReport {
    pub grid: GrayGrid,
    /// s-nodes and per-node extrema over the spatial grid.
    pub s: Vec<f64>,
    pub sup_rbar: Vec<f64>,
    pub sup_rhat: Vec<f64>,
    pub max_rbar: f64,
    pub min_rbar: f64,
    pub max_rhat: f64,
    pub min_rhat: f64,
    /// 2δ and 4ε.
    pub rbar_bound: f64,
    pub rhat_bound: f64,
    pub int_sup_rbar: f64,
    pub int_sup_rhat: f64,
    /// e^{∫ sup r̄ + ∫ sup r̂} from the grid.
    pub grid_factor_bound: f64,
    /// e^{2δ + 4ε}.
    pub factor_bound: f64,
}

#[derive(Clone)]
struct Extremes {
    sup_bar: Vec<(f64, [usize; 3])>,
    sup_hat: Vec<(f64, [usize; 3])>,
    min_bar: (f64, [usize; 4]),
    min_hat: (f64, [usize; 4]),
    min_den: (f64, [usize; 4]),
}

impl Extremes {
    fn new(ns: usize) -> Self {
        let far = [usize::MAX; 3];
        Self {
            sup_bar: vec![(f64::NEG_INFINITY, far); ns],
            sup_hat: vec![(f64::NEG_INFINITY, far); ns],
            min_bar: (f64::INFINITY, [usize::MAX; 4]),
            min_hat: (f64::INFINITY, [usize::MAX; 4]),
            min_den: (f64::INFINITY, [usize::MAX; 4]),
        }
    }

    fn merge(mut self, o: Self) -> Self {
        for (a, b) in self.sup_bar.iter_mut().zip(o.sup_bar).chain(self.sup_hat.iter_mut().zip(o.sup_hat)) {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                *a = b;
            }
        }
        for (a, b) in [(&mut self.min_bar, o.min_bar), (&mut self.min_hat, o.min_hat), (&mut self.min_den, o.min_den)] {
            if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                *a = b;
            }
        }
        self
    }
}

fn lower(slot: &mut (f64, [usize; 4]), v: f64, at: [usize; 4]) {
    if v < slot.0 {
        *slot = (v, at);
    }
}

/// r̄_s and r̂_s at one node, with their denominators.
fn ratios(delta: f64, h: &HatValues, x: f64, rho: f64, s: f64) -> (f64, f64, f64, f64) {
    let den_bar = 1.0 - s * delta * h.a + s * delta * x * h.a_x + s * rho * delta * h.a_rho;
    let bs = x + s * h.excess;
    let bs_x = 1.0 + s * h.excess_x;
    let bs_rho = s * h.b_rho;
    let den_hat = (1.0 - delta * h.a) * bs_x + delta * h.a_x * bs - rho * delta * (h.a_x * bs_rho - h.a_rho * bs_x);
    (-delta * h.a / den_bar, h.excess * delta * h.a_x / den_hat, den_bar, den_hat)
}

fn trapezoid(ys: &[f64]) -> f64 {
    let h = 1.0 / (ys.len() - 1) as f64;
    ys.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum()
}

/// Sup and inf of r̄_s, r̂_s over the spatial grid at each s-node. Errors
/// when a denominator is not positive or a bound r̄ ∈ [0, 2δ), r̂ ∈ [0, 4ε)
/// fails at a node.
pub fn gray_bounds(spec: &PlugSpec, grid: &GrayGrid) -> Result<GrayReport, PlugError> {
    let form = PlugForm::new(spec);
    let tables = GridTables::new(&form, grid.space);
    let ns = grid.s.max(1) + 1;
    let s: Vec<f64> = (0..ns).map(|k| k as f64 / (ns - 1) as f64).collect();
    let m = tables.len();
    let nr = tables.rhos.len();
    let delta = spec.delta;

    let ext = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut e = Extremes::new(ns);
            for j in 0..m {
                let x = tables.ts[j];
                for k in 0..nr {
                    let h = tables.hats(i, j, k);
                    let rho = tables.rhos[k];
                    for (q, &sv) in s.iter().enumerate() {
                        let (rb, rh, db, dh) = ratios(delta, &h, x, rho, sv);
                        let at = [q, i, j, k];
                        lower(&mut e.min_den, db.min(dh), at);
                        lower(&mut e.min_bar, rb, at);
                        lower(&mut e.min_hat, rh, at);
                        if rb > e.sup_bar[q].0 {
                            e.sup_bar[q] = (rb, [i, j, k]);
                        }
                        if rh > e.sup_hat[q].0 {
                            e.sup_hat[q] = (rh, [i, j, k]);
                        }
                    }
                }
            }
            e
        })
        .reduce(|| Extremes::new(ns), Extremes::merge);

    let locate = |at: [usize; 4]| {
        let mut p = vec![s[at[0]]];
        p.extend(tables.point(at[1], at[2], at[3]));
        p
    };
    if ext.min_den.0.is_nan() || ext.min_den.0 <= CONTACT_TOL {
        return Err(PlugError::NotContact { min: ext.min_den.0, point: locate(ext.min_den.1) });
    }
    let rbar_bound = 2.0 * delta;
    let rhat_bound = 4.0 * spec.epsilon;
    let (max_bar_q, max_bar) = argmax(&ext.sup_bar);
    let (max_hat_q, max_hat) = argmax(&ext.sup_hat);
    let checks = [
        ("min r̄", ext.min_bar.0, 0.0, ext.min_bar.0 >= 0.0, locate(ext.min_bar.1)),
        ("min r̂", ext.min_hat.0, 0.0, ext.min_hat.0 >= 0.0, locate(ext.min_hat.1)),
        ("sup r̄", max_bar.0, rbar_bound, max_bar.0 < rbar_bound, locate(with_s(max_bar_q, max_bar.1))),
        ("sup r̂", max_hat.0, rhat_bound, max_hat.0 < rhat_bound, locate(with_s(max_hat_q, max_hat.1))),
    ];
    for (which, value, bound, ok, point) in checks {
        if !ok {
            return Err(PlugError::BoundViolation { which: which.into(), value, bound, point });
        }
    }
    let sup_rbar: Vec<f64> = ext.sup_bar.iter().map(|v| v.0).collect();
    let sup_rhat: Vec<f64> = ext.sup_hat.iter().map(|v| v.0).collect();
    let int_sup_rbar = trapezoid(&sup_rbar);
    let int_sup_rhat = trapezoid(&sup_rhat);
    Ok(GrayReport {
        grid: GrayGrid { s: ns - 1, space: grid.space.normalized() },
        s,
        max_rbar: max_bar.0,
        min_rbar: ext.min_bar.0,
        max_rhat: max_hat.0,
        min_rhat: ext.min_hat.0,
        sup_rbar,
        sup_rhat,
        rbar_bound,
        rhat_bound,
        int_sup_rbar,
        int_sup_rhat,
        grid_factor_bound: (int_sup_rbar + int_sup_rhat).exp(),
        factor_bound: (rbar_bound + rhat_bound).exp(),
    })
}

fn argmax(v: &[(f64, [usize; 3])]) -> (usize, (f64, [usize; 3])) {
    let mut best = (0, v[0]);
    for (q, e) in v.iter().enumerate() {
        if e.0 > best.1 .0 {
            best = (q, *e);
        }
    }
    best
}

fn with_s(q: usize, at: [usize; 3]) -> [usize; 4] {
    [q, at[0], at[1], at[2]]
}

#[cfg(test)]
mod tests {
    use super::super::make_spec;
    use super::*;

    #[test]
    fn bounds_hold_for_the_worked_parameters() {
        let spec = make_spec(0.05, 0.01, 3).unwrap();
        let g = gray_bounds(&spec, &GrayGrid { s: 8, space: PlugGrid { tx: 128, rho: 8 } }).unwrap();
        assert!(g.max_rbar < g.rbar_bound && g.max_rhat < g.rhat_bound);
        assert!(g.min_rbar >= 0.0 && g.min_rhat >= 0.0);
        assert!(g.grid_factor_bound < g.factor_bound);
        assert!((g.factor_bound - 1.24608).abs() < 1e-5);
        // at s = 0 the first deformation has r̄ = −δÂ ≤ δ·max|𝒜| < δ·2ε
        assert!(g.sup_rbar[0] <= 0.01 * 0.1);
    }

    #[test]
    fn integrands_vanish_where_the_bumps_do() {
        let spec = make_spec(0.05, 0.01, 5).unwrap();
        let form = PlugForm::new(&spec);
        let tables = GridTables::new(&form, PlugGrid { tx: 64, rho: 8 });
        let e = spec.epsilon;
        for i in 0..tables.len() {
            for j in 0..tables.len() {
                for k in 0..tables.rhos.len() {
                    let (t, x, rho) = (tables.ts[i], tables.ts[j], tables.rhos[k]);
                    let h = tables.hats(i, j, k);
                    for s in [0.0, 0.5, 1.0] {
                        let (rb, rh, _, _) = ratios(spec.delta, &h, x, rho, s);
                        if h.a == 0.0 {
                            assert_eq!(rb, 0.0);
                        }
                        let inner = t.abs() < e && x > 0.5 * e && x < 1.5 * e;
                        if !inner {
                            assert_eq!(rh, 0.0, "({t}, {x}, {rho})");
                        }
                    }
                }
            }
        }
    }
}
