//! Cell-centered 2D Euler on unstructured meshes.

use std::sync::Mutex;

use nalgebra::{Vector2, Vector4};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gas::{Conserved2, GasModel, Primitive2, P_FLOOR, RHO_FLOOR};
use crate::gradient::{constraint_violation, reconstruct_all, Fields};
use crate::integrator::{Problem, Residual};
use crate::mesh2d::{BoundaryKind, FaceNeighbor, UnstructuredMesh};
use crate::roe::entropy_fixed_flux_2d;

#[derive(Debug)]
pub struct Euler2D {
    pub gas: GasModel,
    pub mesh: UnstructuredMesh,
    pub second_order: bool,
    /// Limiting strength `k`.
    pub limiter_k: f64,
    /// Far-field state used on inflow faces.
    pub inflow: Primitive2,
    /// Check the limiter constraints on every reconstruction.
    pub verify_limiter: bool,
    volumes: Vec<f64>,
    /// Position of each face in the face lists of its left and right cells.
    slots: Vec<(usize, Option<usize>)>,
    worst_violation: Mutex<f64>,
}

/// `W` with the normal velocity reversed across a face of normal `n`.
pub fn mirror_state(w: &Conserved2, n: &Vector2<f64>) -> Conserved2 {
    let q = Vector2::new(w[1], w[2]);
    let qm = q - 2.0 * q.dot(n) * n;
    Vector4::new(w[0], qm.x, qm.y, w[3])
}

impl Euler2D {
    pub fn new(
        gas: GasModel,
        mesh: UnstructuredMesh,
        second_order: bool,
        limiter_k: f64,
        inflow: Primitive2,
    ) -> Result<Self> {
        if !(0.5..=1.0).contains(&limiter_k) {
            return Err(Error::Config(format!(
                "limiter_k must lie in [0.5, 1], got {limiter_k}"
            )));
        }
        let volumes = mesh.cells.iter().map(|c| c.area).collect();
        let slot = |k: usize, f: usize| {
            mesh.cells[k]
                .faces
                .iter()
                .position(|&g| g == f)
                .expect("face of cell")
        };
        let slots = mesh
            .faces
            .iter()
            .enumerate()
            .map(|(fi, face)| (slot(face.left, fi), face.right_cell().map(|r| slot(r, fi))))
            .collect();
        Ok(Euler2D {
            gas,
            mesh,
            second_order,
            limiter_k,
            inflow,
            verify_limiter: false,
            volumes,
            slots,
            worst_violation: Mutex::new(0.0),
        })
    }

    /// Largest limiter constraint violation seen since construction.
    pub fn worst_violation(&self) -> f64 {
        *self.worst_violation.lock().expect("violation lock")
    }

    fn fields(&self, w: &Conserved2) -> Result<Fields> {
        let p = self.gas.primitive2(w)?;
        Ok([w[0], w[1], w[2], p.p])
    }

    fn to_conserved(&self, z: &Fields) -> Result<Conserved2> {
        let (rho, p) = (z[0], z[3]);
        if !(rho > RHO_FLOOR) {
            return Err(Error::NonPositiveDensity { rho });
        }
        if !(p > P_FLOOR) {
            return Err(Error::NonPositivePressure { pressure: p });
        }
        let e = p / (self.gas.gamma - 1.0) + 0.5 * (z[1] * z[1] + z[2] * z[2]) / rho;
        Ok(Vector4::new(rho, z[1], z[2], e))
    }

    /// Face states `(left, right)` per face; right is `None` on the boundary.
    fn face_states(
        &self,
        z: &[Conserved2],
        t: f64,
    ) -> Result<Vec<(Conserved2, Option<Conserved2>)>> {
        let mesh = &self.mesh;
        if !self.second_order {
            return Ok(mesh
                .faces
                .iter()
                .map(|f| (z[f.left], f.right_cell().map(|r| z[r])))
                .collect());
        }
        let fields = z
            .iter()
            .enumerate()
            .map(|(k, w)| self.fields(w).map_err(|e| e.at_cell(k, t)))
            .collect::<Result<Vec<_>>>()?;
        let recs = reconstruct_all(mesh, &fields, self.limiter_k);
        if self.verify_limiter {
            let worst = (0..mesh.n_cells())
                .into_par_iter()
                .map(|k| constraint_violation(mesh, k, &fields[k], &recs[k], self.limiter_k))
                .reduce(|| 0.0, f64::max);
            let mut w = self.worst_violation.lock().expect("violation lock");
            *w = w.max(worst);
        }
        let state = |k: usize, slot: usize| -> Result<Conserved2> {
            let zf = &recs[k].face_values[slot];
            if *zf == fields[k] {
                return Ok(z[k]);
            }
            self.to_conserved(zf).map_err(|e| e.at_cell(k, t))
        };
        mesh.faces
            .iter()
            .zip(&self.slots)
            .map(|(f, &(sl, sr))| {
                let left = state(f.left, sl)?;
                let right = match (f.right_cell(), sr) {
                    (Some(r), Some(s)) => Some(state(r, s)?),
                    _ => None,
                };
                Ok((left, right))
            })
            .collect()
    }

    fn boundary_flux(
        &self,
        kind: BoundaryKind,
        w: &Conserved2,
        n: &Vector2<f64>,
    ) -> Result<Vector4<f64>> {
        match kind {
            BoundaryKind::Wall => entropy_fixed_flux_2d(&self.gas, w, &mirror_state(w, n), n),
            BoundaryKind::Fluid | BoundaryKind::Outflow => self.gas.flux2(w, n),
            BoundaryKind::Inflow => {
                let w_in = self.gas.conserved2(&self.inflow);
                entropy_fixed_flux_2d(&self.gas, w, &w_in, n)
            }
        }
    }
}

impl Problem<4> for Euler2D {
    fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    fn assemble_rhs(&self, z: &[Conserved2], t: f64) -> Result<Residual<4>> {
        let mesh = &self.mesh;
        if z.len() != mesh.n_cells() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} cells, mesh has {}",
                z.len(),
                mesh.n_cells()
            )));
        }
        let states = self.face_states(z, t)?;
        let fluxes = mesh
            .faces
            .par_iter()
            .zip(&states)
            .map(|(f, (wl, wr))| {
                let phi = match (f.right, wr) {
                    (FaceNeighbor::Cell(_), Some(wr)) => {
                        entropy_fixed_flux_2d(&self.gas, wl, wr, &f.normal)
                    }
                    (FaceNeighbor::Boundary(kind), _) => self.boundary_flux(kind, wl, &f.normal),
                    (FaceNeighbor::Cell(_), None) => {
                        unreachable!("internal face without a right state")
                    }
                };
                phi.map(|p| f.length * p).map_err(|e| e.at_cell(f.left, t))
            })
            .collect::<Result<Vec<_>>>()?;
        // fixed face order keeps the sums independent of the thread count
        let mut net = vec![Vector4::zeros(); mesh.n_cells()];
        let mut boundary_outflow = Vector4::zeros();
        for (f, phi) in mesh.faces.iter().zip(&fluxes) {
            net[f.left] += phi;
            match f.right {
                FaceNeighbor::Cell(r) => net[r] -= phi,
                FaceNeighbor::Boundary(_) => boundary_outflow += phi,
            }
        }
        let values = net
            .iter()
            .zip(&self.volumes)
            .map(|(s, v)| -s / *v)
            .collect();
        Ok(Residual {
            values,
            boundary_outflow,
        })
    }

    fn stable_dt(&self, z: &[Conserved2], cfl: f64) -> Result<f64> {
        let mut dt = f64::INFINITY;
        for (k, cell) in self.mesh.cells.iter().enumerate() {
            let p = self
                .gas
                .primitive2(&z[k])
                .map_err(|e| e.at_cell(k, f64::NAN))?;
            let c = self.gas.sound_speed(p.rho, p.p);
            let u = p.velocity();
            let s: f64 = cell
                .faces
                .iter()
                .map(|&f| self.mesh.faces[f].length * (u.dot(&self.mesh.faces[f].normal).abs() + c))
                .sum();
            if s > 0.0 {
                dt = dt.min(cfl * cell.area / s);
            }
        }
        Ok(dt)
    }

    fn check_cell(&self, w: &Conserved2) -> Result<()> {
        self.gas.primitive2(w).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{balance_defect, heun_step, DynamicState};

    fn channel(nx: usize, ny: usize) -> UnstructuredMesh {
        let h = 1.0 / ny as f64;
        let mut s = format!("vertices {}\n", (nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                s += &format!("{} {}\n", i as f64 * h, j as f64 * h);
            }
        }
        let v = |i: usize, j: usize| j * (nx + 1) + i;
        s += &format!("cells {}\n", nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                s += &format!(
                    "4 {} {} {} {}\n",
                    v(i, j),
                    v(i + 1, j),
                    v(i + 1, j + 1),
                    v(i, j + 1)
                );
            }
        }
        s += &format!("boundary {}\n", 2 * (nx + ny));
        for i in 0..nx {
            s += &format!("{} {} wall\n", v(i, 0), v(i + 1, 0));
            s += &format!("{} {} wall\n", v(i, ny), v(i + 1, ny));
        }
        for j in 0..ny {
            s += &format!("{} {} inflow\n", v(0, j), v(0, j + 1));
            s += &format!("{} {} outflow\n", v(nx, j), v(nx, j + 1));
        }
        UnstructuredMesh::parse(&s).unwrap()
    }

    #[test]
    fn stagnant_cartesian_dt() {
        let gas = GasModel::default();
        let mesh = channel(4, 4);
        let still = Primitive2::new(1.4, 0.0, 0.0, 1.0);
        let e = Euler2D::new(gas, mesh, false, 0.75, still).unwrap();
        let z = vec![gas.conserved2(&still); 16];
        let h = 0.25;
        assert!((e.stable_dt(&z, 0.8).unwrap() - 0.8 * h / 4.0).abs() < 1e-15);
    }

    #[test]
    fn wall_flux_has_no_mass() {
        let gas = GasModel::default();
        let n = Vector2::new(0.6, -0.8);
        let w = gas.conserved2(&Primitive2::new(1.1, 0.4, 0.9, 1.3));
        let f = entropy_fixed_flux_2d(&gas, &w, &mirror_state(&w, &n), &n).unwrap();
        assert!(f[0].abs() < 1e-14 && f[3].abs() < 1e-14);
    }

    #[test]
    fn channel_flow_conserves() {
        let gas = GasModel::default();
        let inflow = Primitive2::new(1.0, 0.5, 0.0, 1.0);
        let mut e = Euler2D::new(gas, channel(8, 4), true, 0.75, inflow).unwrap();
        e.verify_limiter = true;
        let mut s = DynamicState {
            values: e
                .mesh
                .cells
                .iter()
                .map(|c| {
                    gas.conserved2(&Primitive2::new(
                        1.0 + 0.3 * (c.centroid.x * 3.0).sin(),
                        0.2,
                        0.1,
                        1.0,
                    ))
                })
                .collect(),
            time: 0.0,
        };
        for _ in 0..20 {
            let dt = e.stable_dt(&s.values, 0.45).unwrap();
            let (next, rep) = heun_step(&e, &s, dt).unwrap();
            assert!(balance_defect(e.volumes(), &s.values, &next.values, &rep) < 1e-13);
            s = next;
        }
        assert!(e.worst_violation() <= 1e-13);
    }

    #[test]
    fn uniform_channel_flow_is_steady() {
        let gas = GasModel::default();
        let inflow = Primitive2::new(1.0, 0.5, 0.0, 1.0);
        let e = Euler2D::new(gas, channel(6, 3), true, 0.75, inflow).unwrap();
        let z = vec![gas.conserved2(&inflow); e.mesh.n_cells()];
        let r = e.assemble_rhs(&z, 0.0).unwrap();
        assert!(r.values.iter().all(|g| g.amax() < 1e-13));
    }
}
