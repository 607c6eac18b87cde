//! Model contact manifolds, their reference forms and Reeb fields, conformal
//! factors and the conformal pseudo-distance.

mod class;
mod factor;
mod model;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use class::{ClassOrder, ClassParseError, HomotopyClass};
pub use factor::{
    conformal_distance, ConformalDistance, ConformalFactor, Extrema, FactorSpec, Monomial, Term, TrigFactor, TrigFn,
    DEFAULT_FACTOR_GRID,
};
pub use model::{
    orthonormal_complement, ChartAtlas, ChartId, CoordinateInfo, ModelKind, ModelManifold, Point, PoleOrbit,
    SampleCoord,
};

/// Central-difference step used to assemble d(fλ₀).
pub const FORM_FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("point outside chart: {0}")]
    OutsideChart(String),
    #[error("query on a pole locus without an analytic branch: {0}")]
    PoleLocus(String),
    #[error("chart mismatch: expected {expected:?}, found {found:?}")]
    ChartMismatch { expected: ChartId, found: ChartId },
    #[error("class {class} does not belong to {model}")]
    ClassMismatch { model: String, class: String },
    #[error("invalid conformal factor: {0}")]
    InvalidFactor(String),
    #[error("conformal factor is not positive (enclosure lower end {min})")]
    NonPositiveFactor { min: f64 },
    #[error("singular Reeb system (smallest singular value {sigma_min:e}); form may not be contact here")]
    SingularSystem { sigma_min: f64 },
}

/// Exterior derivative of a 1-form given by its coefficient function, as
/// the antisymmetric matrix W_ij = ∂_i c_j − ∂_j c_i (central differences).
pub fn exterior_derivative(coeffs: &dyn Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n); // jac[(j, i)] = ∂_i c_j
    for i in 0..n {
        let mut a = x.clone();
        let mut b = x.clone();
        a[i] += h;
        b[i] -= h;
        let d = (coeffs(&a) - coeffs(&b)) / (2.0 * h);
        jac.set_column(i, &d);
    }
    &jac.transpose() - &jac
}

/// Solve λ(R) = 1, dλ(R, e_i) = 0 in the tangent frame `frame` for the
/// 1-form with coefficients `coeffs`, differentiated numerically with step
/// `h`. Returns R in chart coordinates.
pub fn solve_reeb(
    coeffs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    frame: &DMatrix<f64>,
    h: f64,
) -> Result<DVector<f64>, GeometryError> {
    let w = exterior_derivative(coeffs, x, h);
    solve_reeb_system(&coeffs(x), &w, frame)
}

/// As [`solve_reeb`] with the form's coefficients `c` and differential `w`
/// given directly.
pub fn solve_reeb_system(
    c: &DVector<f64>,
    w: &DMatrix<f64>,
    frame: &DMatrix<f64>,
) -> Result<DVector<f64>, GeometryError> {
    let m = frame.ncols();
    let mut a = DMatrix::zeros(m + 1, m);
    let top = frame.transpose() * c;
    a.row_mut(0).copy_from(&top.transpose());
    let wf = frame.transpose() * w * frame;
    a.rows_mut(1, m).copy_from(&wf);
    let qr = a.qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..m).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin > 1e-10 * dmax.max(1.0)) {
        return Err(GeometryError::SingularSystem { sigma_min: dmin });
    }
    // Q e₀ is the first row of Q written as a column.
    let qt_rhs = qr.q().row(0).transpose();
    let xi = r.solve_upper_triangular(&qt_rhs).ok_or(GeometryError::SingularSystem { sigma_min: dmin })?;
    Ok(frame * xi)
}

/// Reeb field of f·λ₀ at a chart point.
pub fn reeb_of_conformal(model: &ModelManifold, f: &ConformalFactor, p: &Point) -> Result<DVector<f64>, GeometryError> {
    if p.chart != model.chart() {
        return Err(GeometryError::ChartMismatch { expected: model.chart(), found: p.chart });
    }
    model.point(p.coords.as_slice())?;
    conformal_reeb_ambient(model, f, &p.coords)
}

/// As [`reeb_of_conformal`] but without domain validation. Uses the exact
/// differential d(fλ₀) = df∧λ₀ + f dλ₀; on spheres the factor is evaluated
/// at the radial projection so the field is tangent to every sphere |x| = r.
pub fn conformal_reeb_ambient(
    model: &ModelManifold,
    f: &ConformalFactor,
    x: &DVector<f64>,
) -> Result<DVector<f64>, GeometryError> {
    if model.is_cut() && !(x[2] > 0.0 && x[2] < std::f64::consts::TAU) {
        return Err(GeometryError::PoleLocus(format!("t = {} lies on a collapsed fibre", x[2])));
    }
    if f.is_constant() {
        return Ok(model.reeb_ambient(x) / f.value(x));
    }
    let mut y = x.clone();
    model.project(&mut y);
    let (fv, g) = f.value_with_gradient(&y);
    let c = model.contact_coeffs(&y);
    let w = model.contact_differential(&y) * fv + &g * c.transpose() - &c * g.transpose();
    let frame = model.tangent_frame(&y);
    solve_reeb_system(&(c * fv), &w, &frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conformal_reeb_matches_ellipsoid_flow() {
        let m = ModelManifold::sphere(2);
        let f = ConformalFactor::new(&m, FactorSpec::Ellipsoid { weights: vec![1.0, 1.2] }).unwrap();
        let x = m.sample_point(&[0.7, 0.3, 1.9]);
        let p = m.point(x.as_slice()).unwrap();
        let r = reeb_of_conformal(&m, &f, &p).unwrap();
        for (j, rj) in [1.0f64, 1.2].iter().enumerate() {
            let s = 2.0 / (rj * rj);
            assert_relative_eq!(r[2 * j], -s * x[2 * j + 1], epsilon = 1e-7);
            assert_relative_eq!(r[2 * j + 1], s * x[2 * j], epsilon = 1e-7);
        }
    }

    #[test]
    fn constant_factor_rescales() {
        let m = ModelManifold::cut_s2xs1(2);
        let f = ConformalFactor::constant(&m, 2.5).unwrap();
        let p = m.point(&[0.1, 0.2, 1.3]).unwrap();
        let r = reeb_of_conformal(&m, &f, &p).unwrap();
        let r0 = m.reeb_field(&p).unwrap();
        assert!((r - r0 / 2.5).norm() < 1e-12);
        let pole = m.point(&[0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(reeb_of_conformal(&m, &f, &pole), Err(GeometryError::PoleLocus(_))));
    }

    #[test]
    fn analytic_differential_matches_differences() {
        let models = [
            ModelManifold::sphere(2),
            ModelManifold::ellipsoid(&[1.0, 1.3]).unwrap(),
            ModelManifold::torus3(2),
            ModelManifold::cut_s3(1),
            ModelManifold::flat_torus_cosphere(3),
        ];
        for m in &models {
            let s: Vec<f64> = m.sample_coords().iter().map(|c| c.lo + 0.37 * (c.hi - c.lo)).collect();
            let x = m.sample_point(&s);
            let coeffs = |z: &DVector<f64>| m.contact_coeffs(z);
            let fd = exterior_derivative(&coeffs, &x, 1e-5);
            assert!((fd - m.contact_differential(&x)).amax() < 1e-8, "{}", m.name());
        }
    }

    #[test]
    fn degenerate_form_is_reported_singular() {
        let x = DVector::from_vec(vec![0.0, 0.0, 0.0]);
        let coeffs = |_: &DVector<f64>| DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let frame = DMatrix::identity(3, 3);
        assert!(matches!(solve_reeb(&coeffs, &x, &frame, 1e-5), Err(GeometryError::SingularSystem { .. })));
    }
}
