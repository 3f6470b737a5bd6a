//! Boundary fluxes for the 1D Euler system: imposed pressure and free outflow.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::gas::{check_density, check_pressure, Conserved, GasModel, Primitive};
use crate::linear::Side;
use crate::profile::Profile;
use crate::roe::entropy_fixed_flux;

#[derive(Debug, Clone, PartialEq)]
pub struct PressureBoundarySpec {
    pub pi: Profile,
    pub side: Side,
}

/// Boundary state at `x = 0` with pressure `pi`, joined to `wr` by a single 3-wave.
pub fn pressure_boundary_state(gas: &GasModel, pi: f64, wr: &Conserved) -> Result<Conserved> {
    check_pressure(pi)?;
    let pr = gas.primitive(wr)?;
    if pi == pr.p {
        return Ok(*wr);
    }
    let g = gas.gamma;
    let denom = (g - 1.0) * pi + (g + 1.0) * pr.p;
    let rho = pr.rho * ((g + 1.0) * pi + (g - 1.0) * pr.p) / denom;
    // ρ* c* = sqrt(ρl denom / 2), so the boundary density goes under the root
    let u = pr.u + (pi - pr.p) * (2.0 / (rho * denom)).sqrt();
    check_density(rho)?;
    Ok(gas.conserved(&Primitive::new(rho, u, pi)))
}

fn mirror(w: &Conserved) -> Conserved {
    Vector3::new(w[0], -w[1], w[2])
}

/// Boundary state on the given side; the right side is the mirror image of the left.
pub fn pressure_boundary_state_on(
    gas: &GasModel,
    pi: f64,
    w_adjacent: &Conserved,
    side: Side,
) -> Result<Conserved> {
    match side {
        Side::Left => pressure_boundary_state(gas, pi, w_adjacent),
        Side::Right => Ok(mirror(&pressure_boundary_state(
            gas,
            pi,
            &mirror(w_adjacent),
        )?)),
    }
}

/// Flux through the boundary face with the pressure `Π(t_half)` imposed.
pub fn pressure_boundary_flux(
    gas: &GasModel,
    spec: &PressureBoundarySpec,
    w_adjacent: &Conserved,
    t_half: f64,
) -> Result<Vector3<f64>> {
    let pi = spec.pi.eval(t_half);
    match spec.side {
        Side::Left => {
            let wl = pressure_boundary_state(gas, pi, w_adjacent)?;
            entropy_fixed_flux(gas, &wl, w_adjacent)
        }
        Side::Right => {
            // Φ(Wa, Wb) = M Φ(mirror Wb, mirror Wa) with M = diag(-1, 1, -1)
            let wa = mirror(w_adjacent);
            let wb = pressure_boundary_state(gas, pi, &wa)?;
            let f = entropy_fixed_flux(gas, &wb, &wa)?;
            Ok(Vector3::new(-f[0], f[1], -f[2]))
        }
    }
}

pub fn nonreflecting_flux(gas: &GasModel, w_adjacent: &Conserved) -> Result<Vector3<f64>> {
    gas.flux(w_adjacent)
}

pub(crate) fn check_profile_positive(pi: &Profile) -> Result<()> {
    if pi.lower_bound() > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "imposed pressure must stay positive, profile reaches {}",
            pi.lower_bound()
        )))
    }
}
