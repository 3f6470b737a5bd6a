//! Linear hyperbolic systems: exact characteristic solutions, upwind fluxes and
//! reflection-type boundary fluxes.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector2};

use crate::error::{Error, Result};

const MAX_CONDITION: f64 = 1e12;

/// Exact solution of `u_t + a u_x = 0` on `[0, L]` fed by `bc` on the inflow side.
pub fn advect_exact(
    u0: impl Fn(f64) -> f64,
    bc: impl Fn(f64) -> f64,
    a: f64,
    length: f64,
    x: f64,
    t: f64,
) -> f64 {
    let foot = x - a * t;
    if a > 0.0 {
        if foot >= 0.0 {
            u0(foot)
        } else {
            bc(t - x / a)
        }
    } else if foot <= length {
        u0(foot)
    } else {
        bc(t + (length - x) / a)
    }
}

pub fn upwind_flux_scalar(a: f64, wl: f64, wr: f64) -> f64 {
    if a >= 0.0 {
        a * wl
    } else {
        a * wr
    }
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `dW/dt + A dW/dx = 0` with `A = R Λ R⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    lambdas: DVector<f64>,
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    a: DMatrix<f64>,
}

impl LinearSystem {
    pub fn new(lambdas: DVector<f64>, r: DMatrix<f64>) -> Result<Self> {
        let m = lambdas.len();
        if r.nrows() != m || r.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues but a {}x{} eigenvector matrix",
                m,
                r.nrows(),
                r.ncols()
            )));
        }
        let r_inv = r
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::SingularEigenbasis {
                condition: f64::INFINITY,
            })?;
        let condition = norm1(&r) * norm1(&r_inv);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularEigenbasis { condition });
        }
        let a = &r * DMatrix::from_diagonal(&lambdas) * &r_inv;
        Ok(LinearSystem {
            lambdas,
            r,
            r_inv,
            a,
        })
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &DVector<f64> {
        &self.lambdas
    }

    pub fn right_vectors(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn check_len(&self, w: &DVector<f64>) -> Result<()> {
        if w.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "state of length {} for a system of dimension {}",
                w.len(),
                self.dim()
            )))
        }
    }

    /// Characteristic amplitudes `φ = R⁻¹ W`.
    pub fn decompose(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(w)?;
        Ok(&self.r_inv * w)
    }

    pub fn reconstruct(&self, phi: &DVector<f64>) -> DVector<f64> {
        &self.r * phi
    }

    pub fn flux(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.a * w
    }

    /// `|A| = R |Λ| R⁻¹`.
    pub fn matrix_abs(&self) -> DMatrix<f64> {
        let abs = self.lambdas.map(f64::abs);
        &self.r * DMatrix::from_diagonal(&abs) * &self.r_inv
    }

    /// Upwind flux in half-sum form `(F(Wl) + F(Wr))/2 - |A|(Wr - Wl)/2`.
    pub fn upwind_flux(&self, wl: &DVector<f64>, wr: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(wl)?;
        self.check_len(wr)?;
        Ok(0.5 * (self.flux(wl) + self.flux(wr)) - 0.5 * self.matrix_abs() * (wr - wl))
    }

    /// `F(Wl) + Σ λ⁻ (φ_r - φ_l) r`.
    pub fn upwind_flux_left(&self, wl: &DVector<f64>, wr: &DVector<f64>) -> Result<DVector<f64>> {
        let dphi = self.decompose(wr)? - self.decompose(wl)?;
        let mut f = self.flux(wl);
        for j in 0..self.dim() {
            f += self.lambdas[j].min(0.0) * dphi[j] * self.r.column(j);
        }
        Ok(f)
    }

    /// `F(Wr) - Σ λ⁺ (φ_r - φ_l) r`.
    pub fn upwind_flux_right(&self, wl: &DVector<f64>, wr: &DVector<f64>) -> Result<DVector<f64>> {
        let dphi = self.decompose(wr)? - self.decompose(wl)?;
        let mut f = self.flux(wr);
        for j in 0..self.dim() {
            f -= self.lambdas[j].max(0.0) * dphi[j] * self.r.column(j);
        }
        Ok(f)
    }

    /// Characteristic form: each amplitude taken from its upwind side.
    pub fn upwind_flux_characteristic(
        &self,
        wl: &DVector<f64>,
        wr: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let phil = self.decompose(wl)?;
        let phir = self.decompose(wr)?;
        let mut f = DVector::zeros(self.dim());
        for j in 0..self.dim() {
            let lam = self.lambdas[j];
            let psi = lam.max(0.0) * phil[j] + lam.min(0.0) * phir[j];
            f += psi * self.r.column(j);
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Ingoing characteristics at a boundary as an affine function of the outgoing ones:
/// `φ_in = g(t) + S φ_out`.
#[derive(Clone)]
pub struct ReflectionBoundary {
    pub side: Side,
    pub g: Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>,
    pub s: DMatrix<f64>,
}

impl fmt::Debug for ReflectionBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReflectionBoundary")
            .field("side", &self.side)
            .field("s", &self.s)
            .finish_non_exhaustive()
    }
}

impl ReflectionBoundary {
    /// Indices of ingoing and outgoing waves at this side. A zero speed counts as outgoing.
    pub fn split(&self, sys: &LinearSystem) -> (Vec<usize>, Vec<usize>) {
        (0..sys.dim()).partition(|&j| {
            let lam = sys.lambdas()[j];
            match self.side {
                Side::Left => lam > 0.0,
                Side::Right => lam < 0.0,
            }
        })
    }

    pub fn flux(
        &self,
        sys: &LinearSystem,
        w_interior: &DVector<f64>,
        t: f64,
    ) -> Result<DVector<f64>> {
        let (ingoing, outgoing) = self.split(sys);
        if self.s.nrows() != ingoing.len() || self.s.ncols() != outgoing.len() {
            return Err(Error::DimensionMismatch(format!(
                "reflection matrix is {}x{} but the boundary has {} ingoing and {} outgoing waves",
                self.s.nrows(),
                self.s.ncols(),
                ingoing.len(),
                outgoing.len()
            )));
        }
        let g = (self.g)(t);
        if g.len() != ingoing.len() {
            return Err(Error::DimensionMismatch(format!(
                "boundary datum has length {} for {} ingoing waves",
                g.len(),
                ingoing.len()
            )));
        }
        let phi = sys.decompose(w_interior)?;
        let phi_out = DVector::from_iterator(outgoing.len(), outgoing.iter().map(|&j| phi[j]));
        let phi_in = g + &self.s * &phi_out;

        let mut f = DVector::zeros(sys.dim());
        for (k, &j) in outgoing.iter().enumerate() {
            f += sys.lambdas()[j] * phi_out[k] * sys.right_vectors().column(j);
        }
        for (k, &j) in ingoing.iter().enumerate() {
            f += sys.lambdas()[j] * phi_in[k] * sys.right_vectors().column(j);
        }
        Ok(f)
    }
}

/// Linear acoustics in the variables `W = (p, u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticsModel {
    pub rho0: f64,
    pub c0: f64,
}

impl AcousticsModel {
    pub fn new(rho0: f64, c0: f64) -> Result<Self> {
        if rho0 > 0.0 && c0 > 0.0 {
            Ok(AcousticsModel { rho0, c0 })
        } else {
            Err(Error::Config(format!(
                "acoustics needs rho0 > 0 and c0 > 0, got rho0 = {rho0}, c0 = {c0}"
            )))
        }
    }

    pub fn impedance(&self) -> f64 {
        self.rho0 * self.c0
    }

    /// Waves ordered `(-c0, +c0)` with amplitudes `φ∓ = p ∓ ρ0 c0 u`.
    pub fn system(&self) -> LinearSystem {
        let z = self.impedance();
        let r = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, -0.5 / z, 0.5 / z]);
        LinearSystem::new(DVector::from_vec(vec![-self.c0, self.c0]), r)
            .expect("acoustic eigenbasis is well conditioned for positive impedance")
    }

    pub fn flux(&self, w: &Vector2<f64>) -> Vector2<f64> {
        Vector2::new(self.rho0 * self.c0 * self.c0 * w[1], w[0] / self.rho0)
    }

    /// Interior upwind flux between `(p, u)` states.
    pub fn interior_flux(&self, wl: &Vector2<f64>, wr: &Vector2<f64>) -> Vector2<f64> {
        let (r0, c0) = (self.rho0, self.c0);
        Vector2::new(
            0.5 * r0 * c0 * c0 * (wl[1] + wr[1]) - 0.5 * c0 * (wr[0] - wl[0]),
            0.5 / r0 * (wl[0] + wr[0]) - 0.5 * c0 * (wr[1] - wl[1]),
        )
    }

    /// Flux at `x = 0` where the pressure `pi_half` is imposed.
    pub fn left_pressure_flux(&self, pi_half: f64, w_first: &Vector2<f64>) -> Vector2<f64> {
        Vector2::new(
            self.rho0 * self.c0 * self.c0 * w_first[1] + self.c0 * (pi_half - w_first[0]),
            pi_half / self.rho0,
        )
    }

    /// Flux at `x = L` where the ingoing characteristic is frozen to its initial value.
    pub fn right_frozen_flux(
        &self,
        w_last: &Vector2<f64>,
        w_init_last: &Vector2<f64>,
    ) -> Vector2<f64> {
        self.interior_flux(w_last, w_init_last)
    }

    pub fn boundary_fluxes(
        &self,
        pi_half: f64,
        w_first: &Vector2<f64>,
        w_last: &Vector2<f64>,
        w_init_last: &Vector2<f64>,
    ) -> (Vector2<f64>, Vector2<f64>) {
        (
            self.left_pressure_flux(pi_half, w_first),
            self.right_frozen_flux(w_last, w_init_last),
        )
    }

    /// Closed-form pressure and velocity once the inflow has swept the domain.
    pub fn exact(
        &self,
        p0: impl Fn(f64) -> f64,
        u0: impl Fn(f64) -> f64,
        pi: impl Fn(f64) -> f64,
        length: f64,
        x: f64,
        t: f64,
    ) -> Result<(f64, f64)> {
        let min_time = length / self.c0;
        if t < min_time {
            return Err(Error::RegimeNotReached { time: t, min_time });
        }
        let p = pi(t - x / self.c0);
        let u = u0(length) + (p - p0(length)) / self.impedance();
        Ok((p, u))
    }
}
