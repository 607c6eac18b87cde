use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::VectorField;
use super::flow::monodromy;
use super::integrator::Integrator;
use super::{ClosedOrbit, DynamicsError};
use crate::geometry::orthonormal_complement;

/// Singular-value cutoff separating unit multipliers from the rest.
pub const NULLITY_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub re: f64,
    pub im: f64,
}

impl Multiplier {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn arg(&self) -> f64 {
        self.im.atan2(self.re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Nondegeneracy {
    /// No transverse multiplier equals 1.
    Nondegenerate,
    /// Nullity equals the dimension of the surrounding orbit family.
    MorseBott {
        dimension: usize,
    },
    Degenerate {
        nullity: usize,
    },
}

impl Nondegeneracy {
    pub fn classify(nullity: usize, family_dim: Option<usize>) -> Self {
        match (nullity, family_dim) {
            (0, _) => Nondegeneracy::Nondegenerate,
            (k, Some(d)) if k == d => Nondegeneracy::MorseBott { dimension: d },
            (k, _) => Nondegeneracy::Degenerate { nullity: k },
        }
    }

    pub fn is_transversally_nondegenerate(&self) -> bool {
        !matches!(self, Nondegeneracy::Degenerate { .. })
    }
}

/// Linearized return map data of a closed orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetData {
    /// Eigenvalues of the monodromy on the complement of the flow direction.
    pub multipliers: Vec<Multiplier>,
    /// Number of singular values of (M_⊥ − I) below [`NULLITY_CUTOFF`].
    pub nullity: usize,
    pub singular_values: Vec<f64>,
    /// Determinant of the full tangent monodromy (flow direction included).
    pub full_determinant: f64,
    pub classification: Nondegeneracy,
}

impl FloquetData {
    /// Product of all multipliers including the removed unit one.
    pub fn multiplier_product_modulus(&self) -> f64 {
        self.full_determinant.abs()
    }

    /// Re-classify relative to a known family dimension.
    pub fn with_family_dimension(mut self, d: usize) -> Self {
        self.classification = Nondegeneracy::classify(self.nullity, Some(d));
        self
    }
}

/// Floquet data from an already computed monodromy matrix at a periodic
/// point `x`.
pub fn floquet_from_monodromy(
    field: &dyn VectorField,
    x: &DVector<f64>,
    m: &DMatrix<f64>,
) -> Result<FloquetData, DynamicsError> {
    let model = field.model();
    let mut xp = x.clone();
    model.project(&mut xp);
    let e = model.tangent_frame(&xp);
    let f = field.eval(&xp)?;
    let ft = e.transpose() * &f;
    if ft.norm() == 0.0 {
        return Err(DynamicsError::MonodromyConditioning("field vanishes on the orbit".into()));
    }
    let tangent = e.transpose() * m * &e;
    let full_determinant = tangent.determinant();
    let c = orthonormal_complement(&(ft.clone() / ft.norm()));
    let q = &e * c;
    let mt = q.transpose() * m * &q;
    if mt.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::MonodromyConditioning("non-finite transverse block".into()));
    }
    let k = mt.nrows();
    let svd = (&mt - DMatrix::identity(k, k)).svd(false, false);
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| a.total_cmp(b));
    let nullity = singular_values.iter().filter(|s| **s < NULLITY_CUTOFF).count();
    let mut multipliers: Vec<Multiplier> =
        mt.complex_eigenvalues().iter().map(|z| Multiplier { re: z.re, im: z.im }).collect();
    multipliers.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.modulus().total_cmp(&b.modulus())));
    Ok(FloquetData {
        multipliers,
        nullity,
        singular_values,
        full_determinant,
        classification: Nondegeneracy::classify(nullity, None),
    })
}

/// Floquet multipliers of a converged orbit, from a fresh monodromy.
pub fn floquet(orbit: &ClosedOrbit, field: &dyn VectorField, integ: &Integrator) -> Result<FloquetData, DynamicsError> {
    let x = DVector::from_column_slice(&orbit.base);
    let (_, m) = monodromy(field, &x, orbit.period, integ)?;
    floquet_from_monodromy(field, &x, &m)
}
