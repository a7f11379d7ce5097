//! Linear elastic isotropic shell material.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use super::ElementError;

pub const SHEAR_CORRECTION: f64 = 5.0 / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellMaterial {
    pub young: f64,
    pub poisson: f64,
    pub thickness: f64,
    #[serde(default = "default_shear")]
    pub shear_factor: f64,
}

fn default_shear() -> f64 {
    SHEAR_CORRECTION
}

impl ShellMaterial {
    pub fn new(young: f64, poisson: f64, thickness: f64) -> Result<Self, ElementError> {
        let m = Self {
            young,
            poisson,
            thickness,
            shear_factor: SHEAR_CORRECTION,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ElementError> {
        if !(self.young > 0.0) {
            return Err(ElementError::InvalidMaterial(format!("E = {}", self.young)));
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return Err(ElementError::InvalidMaterial(format!("nu = {}", self.poisson)));
        }
        if !(self.thickness > 0.0) {
            return Err(ElementError::InvalidMaterial(format!("h = {}", self.thickness)));
        }
        if !(self.shear_factor > 0.0) {
            return Err(ElementError::InvalidMaterial(format!("k_s = {}", self.shear_factor)));
        }
        Ok(())
    }

    /// Block-diagonal 8x8 matrix mapping
    /// `[e11, e22, 2e12, k11, k22, 2k12, g1, g2]` to `[n11, n22, n12, m11, m22, m12, q1, q2]`.
    pub fn constitutive(&self) -> SMatrix<f64, 8, 8> {
        let (e, nu, h) = (self.young, self.poisson, self.thickness);
        let f = e / (1.0 - nu * nu);
        let cp = [[f, f * nu, 0.0], [f * nu, f, 0.0], [0.0, 0.0, f * 0.5 * (1.0 - nu)]];
        let bend = h * h * h / 12.0;
        let shear = self.shear_factor * e * h / (2.0 * (1.0 + nu));
        let mut c = SMatrix::<f64, 8, 8>::zeros();
        for i in 0..3 {
            for j in 0..3 {
                c[(i, j)] = h * cp[i][j];
                c[(i + 3, j + 3)] = bend * cp[i][j];
            }
        }
        c[(6, 6)] = shear;
        c[(7, 7)] = shear;
        c
    }
}
