//! Roe flux across a face of a 2D mesh, computed in the frame of the face normal.

use nalgebra::{Vector2, Vector4};

use super::entropy::{note_fallback, sonic_coefficient};
use crate::error::{Error, Result};
use crate::gas::{rotate_from_normal, rotate_to_normal, Conserved2, GasModel, Primitive2};

struct Waves {
    flux: Vector4<f64>,
    // order: u - c, u (entropy), u (shear), u + c
    lambdas: [f64; 4],
    alphas: [f64; 4],
    r: [Vector4<f64>; 4],
}

fn normal_flux(w: &Conserved2, p: &Primitive2) -> Vector4<f64> {
    Vector4::new(w[1], w[1] * p.u + p.p, w[2] * p.u, p.u * (w[3] + p.p))
}

fn waves(
    gas: &GasModel,
    wl: &Conserved2,
    wr: &Conserved2,
) -> Result<(Waves, Primitive2, Primitive2)> {
    let pl = gas.primitive2(wl)?;
    let pr = gas.primitive2(wr)?;
    let sl = pl.rho.sqrt();
    let sr = pr.rho.sqrt();
    let hl = (wl[3] + pl.p) / pl.rho;
    let hr = (wr[3] + pr.p) / pr.rho;
    let u = (sl * pl.u + sr * pr.u) / (sl + sr);
    let v = (sl * pl.v + sr * pr.v) / (sl + sr);
    let h = (sl * hl + sr * hr) / (sl + sr);
    let c2 = (gas.gamma - 1.0) * (h - 0.5 * (u * u + v * v));
    if !(c2 > 0.0) {
        return Err(Error::InadmissibleState {
            cell: 0,
            time: 0.0,
            reason: format!("Roe average has non-positive squared celerity {c2}"),
        });
    }
    let c = c2.sqrt();
    let rho = sl * sr;
    let dp = pr.p - pl.p;
    let du = pr.u - pl.u;
    let alphas = [
        (dp - rho * c * du) / (2.0 * c2),
        (pr.rho - pl.rho) - dp / c2,
        rho * (pr.v - pl.v),
        (dp + rho * c * du) / (2.0 * c2),
    ];
    let r = [
        Vector4::new(1.0, u - c, v, h - u * c),
        Vector4::new(1.0, u, v, 0.5 * (u * u + v * v)),
        Vector4::new(0.0, 0.0, 1.0, v),
        Vector4::new(1.0, u + c, v, h + u * c),
    ];
    let lambdas = [u - c, u, u, u + c];
    let fl = normal_flux(wl, &pl);
    let fr = normal_flux(wr, &pr);
    let flux = if lambdas[0] > 0.0 {
        fl
    } else if lambdas[3] < 0.0 {
        fr
    } else {
        let mut f = 0.5 * (fl + fr);
        for j in 0..4 {
            f -= 0.5 * lambdas[j].abs() * alphas[j] * r[j];
        }
        f
    };
    Ok((
        Waves {
            flux,
            lambdas,
            alphas,
            r,
        },
        pl,
        pr,
    ))
}

/// Plain Roe flux `Φ(Wl, Wr)·n` for 2D conserved states.
pub fn roe_flux_2d(
    gas: &GasModel,
    wl: &Conserved2,
    wr: &Conserved2,
    n: &Vector2<f64>,
) -> Result<Vector4<f64>> {
    let (w, _, _) = waves(gas, &rotate_to_normal(wl, n), &rotate_to_normal(wr, n))?;
    Ok(rotate_from_normal(&w.flux, n))
}

fn speeds(gas: &GasModel, p: &Primitive2) -> [f64; 3] {
    let c = gas.sound_speed(p.rho, p.p);
    [p.u - c, p.u, p.u + c]
}

/// Roe flux with the sonic-point correction, applied to the acoustic waves and the
/// entropy wave in the normal direction.
pub fn entropy_fixed_flux_2d(
    gas: &GasModel,
    wl: &Conserved2,
    wr: &Conserved2,
    n: &Vector2<f64>,
) -> Result<Vector4<f64>> {
    let ql = rotate_to_normal(wl, n);
    let qr = rotate_to_normal(wr, n);
    let (w, pl, pr) = waves(gas, &ql, &qr)?;
    let mut flux = w.flux;

    let w1 = ql + w.alphas[0] * w.r[0];
    let w2 = qr - w.alphas[3] * w.r[3];
    let s1 = match gas.primitive2(&w1) {
        Ok(p) => speeds(gas, &p),
        Err(_) => {
            note_fallback(1);
            return Ok(rotate_from_normal(&flux, n));
        }
    };
    let s2 = match gas.primitive2(&w2) {
        Ok(p) => speeds(gas, &p),
        Err(_) => {
            note_fallback(2);
            return Ok(rotate_from_normal(&flux, n));
        }
    };
    let s = [speeds(gas, &pl), s1, s2, speeds(gas, &pr)];
    // family j of the 1D decomposition maps to wave index k here
    for (j, k) in [(0usize, 0usize), (1, 1), (2, 3)] {
        if let Some(coef) = sonic_coefficient(s[j][j], s[j + 1][j], w.lambdas[k], w.alphas[k]) {
            flux += coef * w.alphas[k] * w.r[k];
        }
    }
    Ok(rotate_from_normal(&flux, n))
}
