use nalgebra::{DMatrix, DVector};

use super::field::VectorField;
use super::integrator::Integrator;
use super::DynamicsError;
use crate::geometry::{GeometryError, Point};

fn projector<'a>(field: &'a dyn VectorField, n: usize) -> impl FnMut(&mut DVector<f64>) -> bool + 'a {
    let model = field.model();
    let active = matches!(model.chart(), crate::geometry::ChartId::Complex | crate::geometry::ChartId::Cosphere);
    move |y: &mut DVector<f64>| {
        if !active {
            return false;
        }
        let mut x = y.rows(0, n).into_owned();
        model.project(&mut x);
        y.rows_mut(0, n).copy_from(&x);
        true
    }
}

/// Time-t flow of a chart point, with periodic coordinates renormalized.
pub fn integrate(field: &dyn VectorField, x0: &Point, t: f64, tol: f64) -> Result<Point, DynamicsError> {
    let model = field.model();
    if x0.chart != model.chart() {
        return Err(GeometryError::ChartMismatch { expected: model.chart(), found: x0.chart }.into());
    }
    let mut y = flow_lifted(field, &x0.coords, t, &Integrator::with_tol(tol))?;
    model.wrap_periodic(&mut y);
    Ok(Point { chart: x0.chart, coords: y })
}

/// Time-t flow without wrapping periodic coordinates.
pub fn flow_lifted(
    field: &dyn VectorField,
    x0: &DVector<f64>,
    t: f64,
    integ: &Integrator,
) -> Result<DVector<f64>, DynamicsError> {
    let n = x0.len();
    integ.solve(|y| field.eval(y), x0, t, projector(field, n), |_| true)
}

/// Lifted states at the given nondecreasing times in [0, t_end].
pub fn flow_samples(
    field: &dyn VectorField,
    x0: &DVector<f64>,
    times: &[f64],
    integ: &Integrator,
) -> Result<Vec<DVector<f64>>, DynamicsError> {
    let mut out = Vec::with_capacity(times.len());
    let Some(&t_end) = times.last() else { return Ok(out) };
    let mut idx = 0;
    while idx < times.len() && times[idx] <= 0.0 {
        out.push(x0.clone());
        idx += 1;
    }
    let n = x0.len();
    integ.solve(
        |y| field.eval(y),
        x0,
        t_end,
        projector(field, n),
        |s| {
            while idx < times.len() && times[idx] <= s.t1() {
                out.push(s.at(times[idx]));
                idx += 1;
            }
            true
        },
    )?;
    while out.len() < times.len() {
        let last = out.last().cloned().unwrap_or_else(|| x0.clone());
        out.push(last);
    }
    Ok(out)
}

/// Endpoint and monodromy matrix DΦ_t(x0), from the variational equation
/// with a central-difference Jacobian of the field.
pub fn monodromy(
    field: &dyn VectorField,
    x0: &DVector<f64>,
    t: f64,
    integ: &Integrator,
) -> Result<(DVector<f64>, DMatrix<f64>), DynamicsError> {
    let n = x0.len();
    let mut y0 = DVector::zeros(n + n * n);
    y0.rows_mut(0, n).copy_from(x0);
    for i in 0..n {
        y0[n + i * n + i] = 1.0;
    }
    let rhs = |y: &DVector<f64>| -> Result<DVector<f64>, DynamicsError> {
        let x = y.rows(0, n).into_owned();
        let fx = field.eval(&x)?;
        let j = field.jacobian(&x)?;
        let m = DMatrix::from_column_slice(n, n, &y.as_slice()[n..]);
        let dm = j * m;
        let mut out = DVector::zeros(n + n * n);
        out.rows_mut(0, n).copy_from(&fx);
        out.rows_mut(n, n * n).copy_from_slice(dm.as_slice());
        Ok(out)
    };
    let y = integ.solve(rhs, &y0, t, projector(field, n), |_| true)?;
    let x = y.rows(0, n).into_owned();
    let m = DMatrix::from_column_slice(n, n, &y.as_slice()[n..]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::MonodromyConditioning("non-finite monodromy entries".into()));
    }
    Ok((x, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ReebField;
    use crate::geometry::ModelManifold;
    use std::f64::consts::PI;

    #[test]
    fn sphere_full_period() {
        let m = ModelManifold::sphere(2);
        let f = ReebField::reference(&m);
        let p = m.point(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let q = integrate(&f, &p, PI, 1e-10).unwrap();
        assert!((q.coords - p.coords).norm() < 1e-8);
    }

    #[test]
    fn torus_unit_time_wraps() {
        let m = ModelManifold::torus3(1);
        let f = ReebField::reference(&m);
        let p = m.point(&[0.0, 0.0, 0.0]).unwrap();
        let q = integrate(&f, &p, 1.0, 1e-10).unwrap();
        assert!(m.distance(&q.coords, &p.coords) < 1e-8);
        let z = integrate(&f, &p, 0.0, 1e-10).unwrap();
        assert_eq!(z, p);
    }

    #[test]
    fn sphere_monodromy_is_rotation() {
        let m = ModelManifold::sphere(2);
        let f = ReebField::reference(&m);
        let x = DVector::from_vec(vec![0.6, 0.0, 0.8, 0.0]);
        let (y, mm) = monodromy(&f, &x, PI, &Integrator::default()).unwrap();
        assert!((y - &x).norm() < 1e-9);
        assert!((mm - DMatrix::identity(4, 4)).norm() < 1e-7);
    }

    #[test]
    fn samples_hit_requested_times() {
        let m = ModelManifold::sphere(1);
        let f = ReebField::reference(&m);
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let ts = [0.0, 0.25, 0.5, 1.0];
        let s = flow_samples(&f, &x, &ts, &Integrator::default()).unwrap();
        for (t, y) in ts.iter().zip(&s) {
            assert!((y[0] - (2.0 * t).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn cut_model_leaving_chart_is_an_error() {
        let m = ModelManifold::cut_s3(1);
        let f = ReebField::reference(&m);
        let x = DVector::from_vec(vec![0.0, 0.0, 0.0]);
        assert!(matches!(flow_lifted(&f, &x, 1.0, &Integrator::default()), Err(DynamicsError::LeftChart(_))));
    }
}
