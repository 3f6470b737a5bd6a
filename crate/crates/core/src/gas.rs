//! Polytropic ideal gas: state conversions, Euler flux, Jacobian and eigenvectors.

use nalgebra::{Matrix3, Vector2, Vector3, Vector4};

use crate::error::{Error, Result};

/// Conserved variables `(rho, rho u, rho E)` of the 1D Euler system.
pub type Conserved = Vector3<f64>;
/// Conserved variables `(rho, rho u, rho v, rho E)` of the 2D Euler system.
pub type Conserved2 = Vector4<f64>;

pub const RHO_FLOOR: f64 = 1e-12;
pub const P_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel { gamma: 1.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive2 {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

impl Primitive {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Primitive { rho, u, p }
    }
}

impl Primitive2 {
    pub fn new(rho: f64, u: f64, v: f64, p: f64) -> Self {
        Primitive2 { rho, u, v, p }
    }

    pub fn velocity(&self) -> Vector2<f64> {
        Vector2::new(self.u, self.v)
    }
}

/// Wave speeds and unnormalized right eigenvectors (columns of `r`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenStructure {
    pub lambdas: [f64; 3],
    pub r: Matrix3<f64>,
}

impl EigenStructure {
    pub fn vector(&self, j: usize) -> Vector3<f64> {
        self.r.column(j).into_owned()
    }
}

pub(crate) fn check_density(rho: f64) -> Result<()> {
    // written so that NaN fails as well
    if rho > RHO_FLOOR {
        Ok(())
    } else {
        Err(Error::NonPositiveDensity { rho })
    }
}

pub(crate) fn check_pressure(p: f64) -> Result<()> {
    if p > P_FLOOR {
        Ok(())
    } else {
        Err(Error::NonPositivePressure { pressure: p })
    }
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 1.0 && gamma.is_finite() {
            Ok(GasModel { gamma })
        } else {
            Err(Error::InvalidGamma { gamma })
        }
    }

    pub fn primitive(&self, w: &Conserved) -> Result<Primitive> {
        check_density(w[0])?;
        let u = w[1] / w[0];
        let p = (self.gamma - 1.0) * (w[2] - 0.5 * w[0] * u * u);
        check_pressure(p)?;
        Ok(Primitive { rho: w[0], u, p })
    }

    pub fn conserved(&self, prim: &Primitive) -> Conserved {
        let Primitive { rho, u, p } = *prim;
        Vector3::new(rho, rho * u, p / (self.gamma - 1.0) + 0.5 * rho * u * u)
    }

    /// Validates a primitive state before converting it.
    pub fn try_conserved(&self, prim: &Primitive) -> Result<Conserved> {
        check_density(prim.rho)?;
        check_pressure(prim.p)?;
        Ok(self.conserved(prim))
    }

    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }

    pub fn total_enthalpy(&self, w: &Conserved) -> Result<f64> {
        let prim = self.primitive(w)?;
        Ok((w[2] + prim.p) / w[0])
    }

    pub fn flux(&self, w: &Conserved) -> Result<Vector3<f64>> {
        let prim = self.primitive(w)?;
        Ok(self.flux_unchecked(w, prim.p))
    }

    pub(crate) fn flux_unchecked(&self, w: &Conserved, p: f64) -> Vector3<f64> {
        let u = w[1] / w[0];
        Vector3::new(w[1], w[1] * u + p, u * (w[2] + p))
    }

    /// Flux Jacobian written with `u` and `H` only.
    pub fn jacobian_uh(&self, u: f64, h: f64) -> Matrix3<f64> {
        let g = self.gamma;
        Matrix3::new(
            0.0,
            1.0,
            0.0,
            0.5 * (g - 3.0) * u * u,
            (3.0 - g) * u,
            g - 1.0,
            0.5 * (g - 1.0) * u * u * u - u * h,
            h - (g - 1.0) * u * u,
            g * u,
        )
    }

    pub fn jacobian(&self, w: &Conserved) -> Result<Matrix3<f64>> {
        let h = self.total_enthalpy(w)?;
        Ok(self.jacobian_uh(w[1] / w[0], h))
    }

    pub fn eigenstructure(&self, u: f64, c: f64, h: f64) -> EigenStructure {
        EigenStructure {
            lambdas: [u - c, u, u + c],
            r: Matrix3::new(
                1.0,
                1.0,
                1.0,
                u - c,
                u,
                u + c,
                h - u * c,
                0.5 * u * u,
                h + u * c,
            ),
        }
    }

    /// Eigenvalues `(u - c, u, u + c)` of the flux Jacobian at `w`.
    pub fn wave_speeds(&self, w: &Conserved) -> Result<[f64; 3]> {
        let prim = self.primitive(w)?;
        let c = self.sound_speed(prim.rho, prim.p);
        Ok([prim.u - c, prim.u, prim.u + c])
    }

    pub fn primitive2(&self, w: &Conserved2) -> Result<Primitive2> {
        check_density(w[0])?;
        let u = w[1] / w[0];
        let v = w[2] / w[0];
        let p = (self.gamma - 1.0) * (w[3] - 0.5 * w[0] * (u * u + v * v));
        check_pressure(p)?;
        Ok(Primitive2 { rho: w[0], u, v, p })
    }

    pub fn conserved2(&self, prim: &Primitive2) -> Conserved2 {
        let Primitive2 { rho, u, v, p } = *prim;
        Vector4::new(
            rho,
            rho * u,
            rho * v,
            p / (self.gamma - 1.0) + 0.5 * rho * (u * u + v * v),
        )
    }

    pub fn try_conserved2(&self, prim: &Primitive2) -> Result<Conserved2> {
        check_density(prim.rho)?;
        check_pressure(prim.p)?;
        Ok(self.conserved2(prim))
    }

    /// Flux through a face of unit normal `n`: `F(W)·n`.
    pub fn flux2(&self, w: &Conserved2, n: &Vector2<f64>) -> Result<Vector4<f64>> {
        let prim = self.primitive2(w)?;
        let un = prim.u * n.x + prim.v * n.y;
        Ok(Vector4::new(
            w[0] * un,
            w[1] * un + prim.p * n.x,
            w[2] * un + prim.p * n.y,
            (w[3] + prim.p) * un,
        ))
    }
}

/// Express a 2D state in the frame whose first axis is `n` (second axis `n` rotated by +90°).
pub fn rotate_to_normal(w: &Conserved2, n: &Vector2<f64>) -> Conserved2 {
    Vector4::new(
        w[0],
        w[1] * n.x + w[2] * n.y,
        -w[1] * n.y + w[2] * n.x,
        w[3],
    )
}

pub fn rotate_from_normal(w: &Conserved2, n: &Vector2<f64>) -> Conserved2 {
    Vector4::new(w[0], w[1] * n.x - w[2] * n.y, w[1] * n.y + w[2] * n.x, w[3])
}
