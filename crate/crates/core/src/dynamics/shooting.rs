use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::VectorField;
use super::floquet::{floquet_from_monodromy, FloquetData};
use super::flow::{flow_lifted, monodromy};
use super::integrator::Integrator;
use super::DynamicsError;
use crate::geometry::{ChartId, HomotopyClass, Point};

/// Default acceptance threshold for |Φ_T(x) − x|.
pub const ORBIT_TOLERANCE: f64 = 1e-9;
/// Return distance below which a divisor T/k counts as a return time.
pub const DIVISOR_RETURN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedOrbit {
    pub chart: ChartId,
    /// Base point with periodic coordinates wrapped to the fundamental domain.
    pub base: Vec<f64>,
    pub period: f64,
    pub class: HomotopyClass,
    pub residual: f64,
    pub floquet: FloquetData,
    pub simple: bool,
    /// Largest k ∈ {1,…,6} such that T/k is already a return time.
    pub cover: u32,
    pub family: Option<usize>,
}

impl ClosedOrbit {
    pub fn point(&self) -> Point {
        Point { chart: self.chart, coords: DVector::from_column_slice(&self.base) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub integrator: Integrator,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { max_iter: 40, residual_tol: ORBIT_TOLERANCE, integrator: Integrator::default() }
    }
}

struct Iterate {
    x: DVector<f64>,
    period: f64,
    end: DVector<f64>,
    m: DMatrix<f64>,
    res: DVector<f64>,
    phase: f64,
}

impl Iterate {
    fn norm(&self) -> f64 {
        self.res.norm().hypot(self.phase)
    }
}

/// Newton shooting on (x, T) for Φ_T(x) = x modulo the lattice translation
/// picked up by the guess, with the phase condition ⟨F(x_g), x − x_g⟩ = 0.
/// Least-squares steps through a truncated SVD so Morse–Bott families
/// (singular Jacobian) still converge to a nearby member.
pub fn shoot_closed_orbit(
    field: &dyn VectorField,
    x_guess: &Point,
    t_guess: f64,
    opts: &ShootingOptions,
) -> Result<ClosedOrbit, DynamicsError> {
    let model = field.model();
    if x_guess.chart != model.chart() {
        return Err(
            crate::geometry::GeometryError::ChartMismatch { expected: model.chart(), found: x_guess.chart }.into()
        );
    }
    if !(t_guess > 0.0 && t_guess.is_finite()) {
        return Err(DynamicsError::InvalidInput(format!("period guess {t_guess} must be positive")));
    }
    let integ = &opts.integrator;
    let mut xg = x_guess.coords.clone();
    model.project(&mut xg);
    let fg = field.eval(&xg)?;
    let ng = fg.clone() / fg.norm();
    let end0 = flow_lifted(field, &xg, t_guess, integ)?;
    let (winding, _) = model.lattice_split(&(&end0 - &xg));
    let shift = lattice_shift(field, &winding);

    let evaluate = |x: DVector<f64>, period: f64| -> Result<Iterate, DynamicsError> {
        let (end, m) = monodromy(field, &x, period, integ)?;
        let res = &end - &x - &shift;
        let phase = ng.dot(&(&x - &xg));
        Ok(Iterate { x, period, end, m, res, phase })
    };

    let mut it = evaluate(xg.clone(), t_guess)?;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        if it.norm() < 1e-12 {
            break;
        }
        let e = model.tangent_frame(&it.x);
        let nn = it.x.len();
        let mm = e.ncols();
        let mut j = DMatrix::zeros(nn + 1, mm + 1);
        let a = (&it.m - DMatrix::identity(nn, nn)) * &e;
        j.view_mut((0, 0), (nn, mm)).copy_from(&a);
        let fend = field.eval(&it.end)?;
        j.view_mut((0, mm), (nn, 1)).copy_from(&fend);
        let top = ng.transpose() * &e;
        j.view_mut((nn, 0), (1, mm)).copy_from(&top);
        let mut rhs = DVector::zeros(nn + 1);
        rhs.rows_mut(0, nn).copy_from(&(-&it.res));
        rhs[nn] = -it.phase;
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        let delta = svd
            .solve(&rhs, 1e-9 * smax)
            .map_err(|e| DynamicsError::InvalidInput(format!("shooting least squares failed: {e}")))?;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..8 {
            let mut x = &it.x + &e * delta.rows(0, mm) * step;
            model.project(&mut x);
            let period = it.period + step * delta[mm];
            if period > 0.0 {
                if let Ok(trial) = evaluate(x, period) {
                    if trial.norm() < it.norm() || it.norm() < 1e-10 {
                        accepted = Some(trial);
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let Some(next) = accepted else { break };
        let small_step = (delta.norm() * step) < 1e-13;
        it = next;
        if small_step {
            break;
        }
    }
    let residual = it.res.norm();
    if !(residual < opts.residual_tol) {
        return Err(DynamicsError::NoConvergence { iterations, residual });
    }
    let floquet = floquet_from_monodromy(field, &it.x, &it.m)?;
    let mut cover = 1;
    for k in 2..=6u32 {
        let y = flow_lifted(field, &it.x, it.period / k as f64, integ)?;
        if model.distance(&y, &it.x) < DIVISOR_RETURN_TOL {
            cover = k;
        }
    }
    let mut base = it.x.clone();
    model.wrap_periodic(&mut base);
    Ok(ClosedOrbit {
        chart: model.chart(),
        base: base.iter().copied().collect(),
        period: it.period,
        class: model.class_of_winding(&winding),
        residual,
        floquet,
        simple: cover == 1,
        cover,
        family: None,
    })
}

/// Residual of a stored orbit re-integrated with the given integrator.
pub fn reintegrate_residual(
    field: &dyn VectorField,
    orbit: &ClosedOrbit,
    integ: &Integrator,
) -> Result<f64, DynamicsError> {
    let x = DVector::from_column_slice(&orbit.base);
    let y = flow_lifted(field, &x, orbit.period, integ)?;
    Ok(field.model().distance(&y, &x))
}

fn lattice_shift(field: &dyn VectorField, winding: &[i64]) -> DVector<f64> {
    let periods = field.model().coordinate_periods();
    let mut s = DVector::zeros(periods.len());
    let mut w = winding.iter();
    for (i, p) in periods.iter().enumerate() {
        if let Some(p) = p {
            s[i] = *w.next().expect("winding per periodic coordinate") as f64 * p;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ReebField;
    use crate::geometry::ModelManifold;
    use std::f64::consts::PI;

    #[test]
    fn ellipsoid_planes() {
        let m = ModelManifold::ellipsoid(&[1.0, 1.2]).unwrap();
        let f = ReebField::reference(&m);
        let g = m.point(DVector::from_vec(vec![0.999, 0.0, 0.03, 0.03]).normalize().as_slice()).unwrap();
        let o = shoot_closed_orbit(&f, &g, 3.1, &ShootingOptions::default()).unwrap();
        assert!((o.period - PI).abs() < 1e-8, "{}", o.period);
        assert!(o.simple);
        assert_eq!(o.floquet.nullity, 0);
        let g = m.point(DVector::from_vec(vec![0.03, 0.0, 0.999, 0.0]).normalize().as_slice()).unwrap();
        let o = shoot_closed_orbit(&f, &g, 4.4, &ShootingOptions::default()).unwrap();
        assert!((o.period - 1.44 * PI).abs() < 1e-8);
    }

    #[test]
    fn torus_class_and_period() {
        let m = ModelManifold::torus3(2);
        let f = ReebField::reference(&m);
        let g = m.point(&[0.0, 0.0, 0.02]).unwrap();
        let o = shoot_closed_orbit(&f, &g, 1.05, &ShootingOptions::default()).unwrap();
        assert!((o.period - 1.0).abs() < 1e-9);
        assert_eq!(o.class, HomotopyClass::winding(vec![1, 0, 0]));
        assert_eq!(o.floquet.nullity, 1);
    }

    #[test]
    fn double_cover_is_flagged() {
        let m = ModelManifold::sphere(2);
        let f = ReebField::reference(&m);
        let g = m.point(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let o = shoot_closed_orbit(&f, &g, 2.0 * PI + 0.01, &ShootingOptions::default()).unwrap();
        assert!(!o.simple);
        assert_eq!(o.cover, 2);
        assert_eq!(o.floquet.nullity, 2);
    }
}
