//! Finite-volume discretizations on a uniform 1D grid.

use nalgebra::{DVector, SVector, Vector1, Vector2, Vector3};
use rayon::prelude::*;

use crate::boundary::{nonreflecting_flux, pressure_boundary_flux, PressureBoundarySpec};
use crate::error::{Error, Result};
use crate::gas::{GasModel, Primitive};
use crate::integrator::{Problem, Residual};
use crate::linear::{upwind_flux_scalar, AcousticsModel, ReflectionBoundary, Side};
use crate::profile::Profile;
use crate::reconstruction::{muscl_extrapolate, Limiter};
use crate::roe::entropy_fixed_flux;

/// Physics of a 1D system: interior flux, boundary fluxes and the variables that are
/// reconstructed at second order.
pub trait Model1D<const M: usize>: Sync {
    fn flux(&self, wl: &SVector<f64, M>, wr: &SVector<f64, M>) -> Result<SVector<f64, M>>;

    fn boundary_flux(
        &self,
        side: Side,
        w_adjacent: &SVector<f64, M>,
        t: f64,
    ) -> Result<SVector<f64, M>>;

    fn max_speed(&self, w: &SVector<f64, M>) -> Result<f64>;

    fn check(&self, _w: &SVector<f64, M>) -> Result<()> {
        Ok(())
    }

    fn to_recon(&self, w: &SVector<f64, M>) -> Result<SVector<f64, M>> {
        Ok(*w)
    }

    fn to_state(&self, z: &SVector<f64, M>) -> Result<SVector<f64, M>> {
        Ok(*z)
    }
}

/// `w_t + a w_x = 0` fed on the upstream side by `inflow`.
#[derive(Debug, Clone, PartialEq)]
pub struct Advection {
    pub a: f64,
    pub inflow: Profile,
}

impl Model1D<1> for Advection {
    fn flux(&self, wl: &Vector1<f64>, wr: &Vector1<f64>) -> Result<Vector1<f64>> {
        Ok(Vector1::new(upwind_flux_scalar(self.a, wl[0], wr[0])))
    }

    fn boundary_flux(&self, side: Side, w: &Vector1<f64>, t: f64) -> Result<Vector1<f64>> {
        let upstream = match side {
            Side::Left => self.a > 0.0,
            Side::Right => self.a < 0.0,
        };
        let v = if upstream { self.inflow.eval(t) } else { w[0] };
        Ok(Vector1::new(self.a * v))
    }

    fn max_speed(&self, _w: &Vector1<f64>) -> Result<f64> {
        Ok(self.a.abs())
    }
}

#[derive(Debug, Clone)]
pub enum AcousticBc {
    /// Imposed pressure.
    Pressure(Profile),
    /// Ingoing characteristic frozen to the one of this initial boundary-cell state.
    Frozen(Vector2<f64>),
    Reflection(ReflectionBoundary),
}

/// Linear acoustics in `(p, u)`.
#[derive(Debug, Clone)]
pub struct Acoustics {
    pub model: AcousticsModel,
    pub left: AcousticBc,
    pub right: AcousticBc,
}

impl Model1D<2> for Acoustics {
    fn flux(&self, wl: &Vector2<f64>, wr: &Vector2<f64>) -> Result<Vector2<f64>> {
        Ok(self.model.interior_flux(wl, wr))
    }

    fn boundary_flux(&self, side: Side, w: &Vector2<f64>, t: f64) -> Result<Vector2<f64>> {
        let bc = match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        };
        let m = &self.model;
        Ok(match (bc, side) {
            (AcousticBc::Pressure(pi), Side::Left) => m.left_pressure_flux(pi.eval(t), w),
            (AcousticBc::Pressure(pi), Side::Right) => {
                let pi = pi.eval(t);
                Vector2::new(
                    m.rho0 * m.c0 * m.c0 * w[1] + m.c0 * (w[0] - pi),
                    pi / m.rho0,
                )
            }
            (AcousticBc::Frozen(w0), Side::Left) => m.interior_flux(w0, w),
            (AcousticBc::Frozen(w0), Side::Right) => m.right_frozen_flux(w, w0),
            (AcousticBc::Reflection(rb), _) => {
                let f = rb.flux(&m.system(), &DVector::from_column_slice(w.as_slice()), t)?;
                Vector2::new(f[0], f[1])
            }
        })
    }

    fn max_speed(&self, _w: &Vector2<f64>) -> Result<f64> {
        Ok(self.model.c0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EulerBc {
    Pressure(Profile),
    Nonreflecting,
}

/// 1D Euler with the entropy-corrected Roe flux; reconstruction in `(ρ, u, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Euler1D {
    pub gas: GasModel,
    pub left: EulerBc,
    pub right: EulerBc,
}

impl Model1D<3> for Euler1D {
    fn flux(&self, wl: &Vector3<f64>, wr: &Vector3<f64>) -> Result<Vector3<f64>> {
        entropy_fixed_flux(&self.gas, wl, wr)
    }

    fn boundary_flux(&self, side: Side, w: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        let bc = match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        };
        match bc {
            EulerBc::Pressure(pi) => pressure_boundary_flux(
                &self.gas,
                &PressureBoundarySpec {
                    pi: pi.clone(),
                    side,
                },
                w,
                t,
            ),
            EulerBc::Nonreflecting => nonreflecting_flux(&self.gas, w),
        }
    }

    fn max_speed(&self, w: &Vector3<f64>) -> Result<f64> {
        let p = self.gas.primitive(w)?;
        Ok(p.u.abs() + self.gas.sound_speed(p.rho, p.p))
    }

    fn check(&self, w: &Vector3<f64>) -> Result<()> {
        self.gas.primitive(w).map(|_| ())
    }

    fn to_recon(&self, w: &Vector3<f64>) -> Result<Vector3<f64>> {
        let p = self.gas.primitive(w)?;
        Ok(Vector3::new(p.rho, p.u, p.p))
    }

    fn to_state(&self, z: &Vector3<f64>) -> Result<Vector3<f64>> {
        self.gas.try_conserved(&Primitive::new(z[0], z[1], z[2]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    First,
    Second(Limiter),
}

/// Uniform grid of `J` cells on `[0, L]`. Boundary faces use the adjacent cell values;
/// second-order interior faces next to the boundary see linearly extrapolated ghosts.
#[derive(Debug, Clone)]
pub struct Grid1D<Mo> {
    pub model: Mo,
    pub length: f64,
    pub order: Order,
    pub periodic: bool,
    dx: f64,
    volumes: Vec<f64>,
}

impl<Mo> Grid1D<Mo> {
    pub fn new(model: Mo, length: f64, cells: usize, order: Order, periodic: bool) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Config(format!(
                "domain length must be positive, got {length}"
            )));
        }
        let min = if matches!(order, Order::Second(_)) {
            3
        } else {
            1
        };
        if cells < min {
            return Err(Error::Config(format!(
                "need at least {min} cells, got {cells}"
            )));
        }
        let dx = length / cells as f64;
        Ok(Grid1D {
            model,
            length,
            order,
            periodic,
            dx,
            volumes: vec![dx; cells],
        })
    }

    pub fn cells(&self) -> usize {
        self.volumes.len()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells())
            .map(|j| (j as f64 + 0.5) * self.dx)
            .collect()
    }

    /// Cell averages approximated by midpoint values of `f`.
    pub fn sample<const M: usize>(
        &self,
        f: impl Fn(f64) -> SVector<f64, M>,
    ) -> Vec<SVector<f64, M>> {
        self.centers().into_iter().map(f).collect()
    }
}

fn face_states<const M: usize, Mo: Model1D<M>>(
    grid: &Grid1D<Mo>,
    z: &[SVector<f64, M>],
    r: &[SVector<f64, M>],
    a: usize,
    b: usize,
    lim: Limiter,
) -> Result<(SVector<f64, M>, SVector<f64, M>)> {
    let n = z.len() as isize;
    let get = |j: isize| -> SVector<f64, M> {
        if grid.periodic {
            r[j.rem_euclid(n) as usize]
        } else if j < 0 {
            2.0 * r[0] - r[1]
        } else if j >= n {
            2.0 * r[(n - 1) as usize] - r[(n - 2) as usize]
        } else {
            r[j as usize]
        }
    };
    let (ai, bi) = (a as isize, b as isize);
    // on a periodic grid the neighbours of the wrap-around face are a-1 and b+1 as well
    let (zmm, zm, zp, zpp) = (get(ai - 1), r[a], r[b], get(bi + 1));
    let mut left = SVector::<f64, M>::zeros();
    let mut right = SVector::<f64, M>::zeros();
    for c in 0..M {
        let (l, rr) = muscl_extrapolate(zmm[c], zm[c], zp[c], zpp[c], lim);
        left[c] = l;
        right[c] = rr;
    }
    if left == zm && right == zp {
        return Ok((z[a], z[b]));
    }
    Ok((grid.model.to_state(&left)?, grid.model.to_state(&right)?))
}

impl<const M: usize, Mo: Model1D<M>> Problem<M> for Grid1D<Mo> {
    fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    fn assemble_rhs(&self, z: &[SVector<f64, M>], t: f64) -> Result<Residual<M>> {
        let n = z.len();
        if n != self.cells() {
            return Err(Error::DimensionMismatch(format!(
                "state has {n} cells, grid has {}",
                self.cells()
            )));
        }
        let recon = match self.order {
            Order::Second(lim) if lim != Limiter::FirstOrder => Some((
                z.iter()
                    .enumerate()
                    .map(|(j, w)| self.model.to_recon(w).map_err(|e| e.at_cell(j, t)))
                    .collect::<Result<Vec<_>>>()?,
                lim,
            )),
            _ => None,
        };
        // face j is the left face of cell j; face n closes the grid when not periodic
        let nfaces = if self.periodic { n } else { n + 1 };
        let fluxes: Vec<SVector<f64, M>> = (0..nfaces)
            .into_par_iter()
            .map(|j| {
                if !self.periodic && j == 0 {
                    return self
                        .model
                        .boundary_flux(Side::Left, &z[0], t)
                        .map_err(|e| e.at_cell(0, t));
                }
                if !self.periodic && j == n {
                    return self
                        .model
                        .boundary_flux(Side::Right, &z[n - 1], t)
                        .map_err(|e| e.at_cell(n - 1, t));
                }
                let a = (j + n - 1) % n;
                let b = j;
                let (wl, wr) = match &recon {
                    Some((r, lim)) => {
                        face_states(self, z, r, a, b, *lim).map_err(|e| e.at_cell(a, t))?
                    }
                    None => (z[a], z[b]),
                };
                self.model.flux(&wl, &wr).map_err(|e| e.at_cell(a, t))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = (0..n)
            .map(|j| -(fluxes[(j + 1) % nfaces] - fluxes[j]) / self.dx)
            .collect();
        let boundary_outflow = if self.periodic {
            SVector::zeros()
        } else {
            fluxes[n] - fluxes[0]
        };
        Ok(Residual {
            values,
            boundary_outflow,
        })
    }

    fn stable_dt(&self, z: &[SVector<f64, M>], cfl: f64) -> Result<f64> {
        let mut smax: f64 = 0.0;
        for (j, w) in z.iter().enumerate() {
            smax = smax.max(
                self.model
                    .max_speed(w)
                    .map_err(|e| e.at_cell(j, f64::NAN))?,
            );
        }
        Ok(if smax > 0.0 {
            cfl * self.dx / smax
        } else {
            f64::INFINITY
        })
    }

    fn check_cell(&self, w: &SVector<f64, M>) -> Result<()> {
        self.model.check(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{balance_defect, euler_step, heun_step, DynamicState};

    fn advection(a: f64, j: usize, order: Order, periodic: bool) -> Grid1D<Advection> {
        Grid1D::new(
            Advection {
                a,
                inflow: Profile::Constant(0.0),
            },
            1.0,
            j,
            order,
            periodic,
        )
        .unwrap()
    }

    fn state1(v: &[f64]) -> DynamicState<1> {
        DynamicState {
            values: v.iter().map(|x| Vector1::new(*x)).collect(),
            time: 0.0,
        }
    }

    #[test]
    fn five_cell_hand_update() {
        let g = advection(2.0, 5, Order::First, false);
        let dx = 0.2;
        let dt = 0.05;
        let w = [1.0, 3.0, -2.0, 0.5, 4.0];
        let (next, _) = euler_step(&g, &state1(&w), dt).unwrap();
        let sigma = 2.0 * dt / dx;
        // upstream value 0 from the inflow profile
        let expect = [
            w[0] - sigma * (w[0] - 0.0),
            w[1] - sigma * (w[1] - w[0]),
            w[2] - sigma * (w[2] - w[1]),
            w[3] - sigma * (w[3] - w[2]),
            w[4] - sigma * (w[4] - w[3]),
        ];
        for (a, b) in next.values.iter().zip(expect) {
            assert!((a[0] - b).abs() < 1e-14);
        }
        let g = advection(-2.0, 5, Order::First, false);
        let (next, _) = euler_step(&g, &state1(&w), dt).unwrap();
        assert!((next.values[0][0] - (w[0] + sigma * (w[1] - w[0]))).abs() < 1e-14);
        assert!((next.values[4][0] - (w[4] + sigma * (0.0 - w[4]))).abs() < 1e-14);
    }

    #[test]
    fn unit_courant_shift() {
        let g = advection(1.0, 8, Order::First, true);
        let w = [0.1, 0.7, 0.3, -0.4, 0.9, 0.2, 0.6, -0.8];
        let mut s = state1(&w);
        for step in 1..=8 {
            s = euler_step(&g, &s, g.dx()).unwrap().0;
            for j in 0..8 {
                assert!((s.values[j][0] - w[(j + 8 - step % 8) % 8]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stable_dt_examples() {
        let g = advection(-1.0, 100, Order::First, false);
        assert!((g.stable_dt(&[Vector1::new(0.0)], 0.5).unwrap() - 0.005).abs() < 1e-15);
        let gas = GasModel::default();
        let e = Grid1D::new(
            Euler1D {
                gas,
                left: EulerBc::Nonreflecting,
                right: EulerBc::Nonreflecting,
            },
            1.0,
            10,
            Order::First,
            false,
        )
        .unwrap();
        let w = gas.conserved(&Primitive::new(1.4, 0.0, 1.0));
        assert!((e.stable_dt(&[w], 1.0).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn uniform_state_zero_residual() {
        let gas = GasModel::default();
        let w = gas.conserved(&Primitive::new(1.0, 0.3, 1.0));
        for order in [Order::First, Order::Second(Limiter::sts())] {
            let e = Grid1D::new(
                Euler1D {
                    gas,
                    left: EulerBc::Pressure(Profile::Constant(1.0)),
                    right: EulerBc::Nonreflecting,
                },
                1.0,
                20,
                order,
                false,
            )
            .unwrap();
            let r = e.assemble_rhs(&vec![w; 20], 0.0).unwrap();
            assert!(r.values.iter().all(|g| g.amax() <= 1e-13));
        }
    }

    #[test]
    fn max_norm_nonincreasing() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = advection(1.0, 40, Order::First, true);
        for _ in 0..20 {
            let w: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
            let cfl = rng.random_range(0.05..=1.0);
            let mut s = state1(&w);
            let mut norm = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for _ in 0..30 {
                s = euler_step(&g, &s, cfl * g.dx()).unwrap().0;
                let n2 = s.values.iter().fold(0.0f64, |m, x| m.max(x[0].abs()));
                assert!(n2 <= norm + 1e-15);
                norm = n2;
            }
        }
    }

    #[test]
    fn conservation_with_boundaries() {
        let gas = GasModel::default();
        let e = Grid1D::new(
            Euler1D {
                gas,
                left: EulerBc::Pressure(Profile::Sine {
                    p0: 1.0,
                    amplitude: 0.1,
                    frequency: 2.0,
                }),
                right: EulerBc::Pressure(Profile::Constant(0.9)),
            },
            1.0,
            30,
            Order::Second(Limiter::sts()),
            false,
        )
        .unwrap();
        let mut s = DynamicState {
            values: e.sample(|x| gas.conserved(&Primitive::new(1.0 + 0.2 * x, 0.1, 1.0))),
            time: 0.0,
        };
        for _ in 0..50 {
            let dt = e.stable_dt(&s.values, 0.45).unwrap();
            let (next, rep) = heun_step(&e, &s, dt).unwrap();
            assert!(balance_defect(e.volumes(), &s.values, &next.values, &rep) < 1e-13);
            s = next;
        }
    }

    #[test]
    fn acoustic_bc_variants() {
        let model = AcousticsModel::new(1.2, 340.0).unwrap();
        let z = model.impedance();
        let w = Vector2::new(1.0, 0.002);
        let ac = |left, right| Acoustics { model, left, right };
        // right pressure is the mirror of the left one
        let a = ac(
            AcousticBc::Pressure(Profile::Constant(1.5)),
            AcousticBc::Pressure(Profile::Constant(1.5)),
        );
        let fr = a.boundary_flux(Side::Right, &w, 0.0).unwrap();
        assert!((fr[1] - 1.5 / 1.2).abs() < 1e-15);
        // pressure condition is a reflection with g = 2Π and S = -1 on either side
        for side in [Side::Left, Side::Right] {
            let rb = ReflectionBoundary {
                side,
                g: std::sync::Arc::new(|_| DVector::from_element(1, 3.0)),
                s: nalgebra::DMatrix::from_element(1, 1, -1.0),
            };
            let r = ac(
                AcousticBc::Reflection(rb.clone()),
                AcousticBc::Reflection(rb),
            );
            let f1 = a.boundary_flux(side, &w, 0.0).unwrap();
            let f2 = r.boundary_flux(side, &w, 0.0).unwrap();
            assert!((f1 - f2).amax() <= 1e-12 * f1.amax(), "{side:?}");
        }
        // frozen state equal to the cell state is transparent
        let f = ac(AcousticBc::Frozen(w), AcousticBc::Frozen(w));
        assert!(
            (f.boundary_flux(Side::Left, &w, 0.0).unwrap() - model.flux(&w)).amax() < 1e-12 * z
        );
    }
}
