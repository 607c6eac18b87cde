use nalgebra::{DMatrix, DVector};

use super::DynamicsError;
use crate::geometry::{conformal_reeb_ambient, ConformalFactor, ModelManifold};

/// An autonomous vector field in the chart of a model manifold.
pub trait VectorField: Sync {
    fn model(&self) -> &ModelManifold;

    /// Field value at a chart point; lifted periodic coordinates are allowed.
    fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>, DynamicsError>;

    /// Step for the central-difference Jacobian used by the variational
    /// equation.
    fn jacobian_step(&self) -> f64 {
        1e-5
    }

    /// Sample coordinates along which the field is translation invariant.
    fn symmetric_coords(&self) -> Vec<bool> {
        self.model().sample_coords().iter().map(|c| c.field_symmetry).collect()
    }

    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, DynamicsError> {
        let n = x.len();
        let h = self.jacobian_step();
        let mut j = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let d = (self.eval(&a)? - self.eval(&b)?) / (2.0 * h);
            j.set_column(i, &d);
        }
        Ok(j)
    }
}

/// Reeb field of λ₀ or of f·λ₀ on a model manifold.
#[derive(Debug, Clone)]
pub struct ReebField {
    model: ModelManifold,
    factor: Option<ConformalFactor>,
}

impl ReebField {
    pub fn reference(model: &ModelManifold) -> Self {
        Self { model: model.clone(), factor: None }
    }

    /// Reeb field of f·λ₀. A constant factor keeps the analytic field.
    pub fn conformal(factor: &ConformalFactor) -> Self {
        Self { model: factor.model().clone(), factor: Some(factor.clone()) }
    }

    pub fn factor(&self) -> Option<&ConformalFactor> {
        self.factor.as_ref()
    }

    fn check_chart(&self, x: &DVector<f64>) -> Result<(), DynamicsError> {
        if x.len() != self.model.ambient_dim() {
            return Err(DynamicsError::InvalidInput(format!(
                "state has {} coordinates, chart needs {}",
                x.len(),
                self.model.ambient_dim()
            )));
        }
        if self.model.is_cut() && !(x[2] > 0.0 && x[2] < std::f64::consts::TAU) {
            return Err(DynamicsError::LeftChart(format!("t = {} outside the open chart (0, 2π)", x[2])));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::InvalidInput("non-finite state".into()));
        }
        Ok(())
    }
}

impl VectorField for ReebField {
    fn model(&self) -> &ModelManifold {
        &self.model
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>, DynamicsError> {
        self.check_chart(x)?;
        match &self.factor {
            None => Ok(self.model.reeb_ambient(x)),
            Some(f) => Ok(conformal_reeb_ambient(&self.model, f, x)?),
        }
    }

    fn symmetric_coords(&self) -> Vec<bool> {
        match &self.factor {
            Some(f) => f.symmetric_coords(),
            None => self.model.sample_coords().iter().map(|c| c.field_symmetry).collect(),
        }
    }
}
