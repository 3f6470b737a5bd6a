//! Roe approximate Riemann solver for the Euler equations.

mod entropy;
mod rotated;

pub use entropy::{
    entropy_fallback_count, entropy_fixed_flux, sonic_indices, HermiteCubic, SonicData,
};
pub use rotated::{entropy_fixed_flux_2d, roe_flux_2d};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::gas::{Conserved, EigenStructure, GasModel, Primitive};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoeAverage {
    pub rho: f64,
    pub u: f64,
    pub h: f64,
    pub c: f64,
    pub eigen: EigenStructure,
}

impl RoeAverage {
    pub fn lambdas(&self) -> [f64; 3] {
        self.eigen.lambdas
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveDecomposition {
    pub alphas: [f64; 3],
    pub lambdas: [f64; 3],
    pub r: Matrix3<f64>,
}

impl WaveDecomposition {
    pub fn vector(&self, j: usize) -> Vector3<f64> {
        self.r.column(j).into_owned()
    }

    /// `Σ α_j r_j`, which reproduces `Wr - Wl`.
    pub fn jump(&self) -> Vector3<f64> {
        self.r * Vector3::from(self.alphas)
    }
}

/// Both states with their primitive forms, validated once.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pair {
    pub wl: Conserved,
    pub wr: Conserved,
    pub pl: Primitive,
    pub pr: Primitive,
}

impl Pair {
    pub fn new(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<Pair> {
        Ok(Pair {
            wl: *wl,
            wr: *wr,
            pl: gas.primitive(wl)?,
            pr: gas.primitive(wr)?,
        })
    }

    fn flux_l(&self, gas: &GasModel) -> Vector3<f64> {
        gas.flux_unchecked(&self.wl, self.pl.p)
    }

    fn flux_r(&self, gas: &GasModel) -> Vector3<f64> {
        gas.flux_unchecked(&self.wr, self.pr.p)
    }
}

fn average(gas: &GasModel, pair: &Pair) -> Result<RoeAverage> {
    let (pl, pr) = (pair.pl, pair.pr);
    let sl = pl.rho.sqrt();
    let sr = pr.rho.sqrt();
    let hl = (pair.wl[2] + pl.p) / pl.rho;
    let hr = (pair.wr[2] + pr.p) / pr.rho;
    let u = (sl * pl.u + sr * pr.u) / (sl + sr);
    let h = (sl * hl + sr * hr) / (sl + sr);
    let c2 = (gas.gamma - 1.0) * (h - 0.5 * u * u);
    if !(c2 > 0.0) {
        return Err(Error::InadmissibleState {
            cell: 0,
            time: 0.0,
            reason: format!("Roe average has non-positive squared celerity {c2}"),
        });
    }
    let c = c2.sqrt();
    Ok(RoeAverage {
        rho: sl * sr,
        u,
        h,
        c,
        eigen: gas.eigenstructure(u, c, h),
    })
}

pub fn roe_average(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<RoeAverage> {
    average(gas, &Pair::new(gas, wl, wr)?)
}

/// Roe celerity written directly from the two states; always has a positive radicand.
pub fn roe_celerity_explicit(gas: &GasModel, pl: &Primitive, pr: &Primitive) -> f64 {
    let rho_star = (pl.rho * pr.rho).sqrt();
    let cl2 = gas.gamma * pl.p / pl.rho;
    let cr2 = gas.gamma * pr.p / pr.rho;
    let du = pr.u - pl.u;
    let num = 0.5 * (gas.gamma - 1.0) * rho_star * du * du
        + (pl.rho + rho_star) * cl2
        + (rho_star + pr.rho) * cr2;
    num.sqrt() / (pl.rho.sqrt() + pr.rho.sqrt())
}

pub fn roe_matrix(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<Matrix3<f64>> {
    let avg = roe_average(gas, wl, wr)?;
    Ok(gas.jacobian_uh(avg.u, avg.h))
}

fn strengths(pair: &Pair, avg: &RoeAverage) -> WaveDecomposition {
    let (pl, pr) = (pair.pl, pair.pr);
    let (rho, c) = (avg.rho, avg.c);
    let c2 = c * c;
    let a1 = ((pr.p - rho * c * pr.u) - (pl.p - rho * c * pl.u)) / (2.0 * c2);
    let a2 = -((pr.p - c2 * pr.rho) - (pl.p - c2 * pl.rho)) / c2;
    let a3 = ((pr.p + rho * c * pr.u) - (pl.p + rho * c * pl.u)) / (2.0 * c2);
    WaveDecomposition {
        alphas: [a1, a2, a3],
        lambdas: avg.eigen.lambdas,
        r: avg.eigen.r,
    }
}

pub fn wave_strengths(
    gas: &GasModel,
    wl: &Conserved,
    wr: &Conserved,
    avg: &RoeAverage,
) -> Result<WaveDecomposition> {
    Ok(strengths(&Pair::new(gas, wl, wr)?, avg))
}

/// Roe average and wave decomposition of a pair in one pass.
pub fn decompose(
    gas: &GasModel,
    wl: &Conserved,
    wr: &Conserved,
) -> Result<(RoeAverage, WaveDecomposition)> {
    let pair = Pair::new(gas, wl, wr)?;
    let avg = average(gas, &pair)?;
    Ok((avg, strengths(&pair, &avg)))
}

fn half_sum(gas: &GasModel, pair: &Pair, waves: &WaveDecomposition) -> Vector3<f64> {
    let mut f = 0.5 * (pair.flux_l(gas) + pair.flux_r(gas));
    for j in 0..3 {
        f -= 0.5 * waves.lambdas[j].abs() * waves.alphas[j] * waves.r.column(j);
    }
    f
}

pub(crate) fn roe_flux_pair(
    gas: &GasModel,
    pair: &Pair,
) -> Result<(Vector3<f64>, WaveDecomposition)> {
    let avg = average(gas, pair)?;
    let waves = strengths(pair, &avg);
    let [l1, l2, l3] = waves.lambdas;
    let f = if l1 > 0.0 {
        pair.flux_l(gas)
    } else if l1 < 0.0 && l2 > 0.0 {
        pair.flux_l(gas) + l1 * waves.alphas[0] * waves.vector(0)
    } else if l2 < 0.0 && l3 > 0.0 {
        pair.flux_r(gas) - l3 * waves.alphas[2] * waves.vector(2)
    } else if l3 < 0.0 {
        pair.flux_r(gas)
    } else {
        half_sum(gas, pair, &waves)
    };
    Ok((f, waves))
}

/// Roe flux by the case algorithm; ties at exact zeros go through the half-sum form.
pub fn roe_flux(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<Vector3<f64>> {
    Ok(roe_flux_pair(gas, &Pair::new(gas, wl, wr)?)?.0)
}

/// `F(Wl) + Σ λ⁻ α r`.
pub fn roe_flux_left_form(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<Vector3<f64>> {
    let pair = Pair::new(gas, wl, wr)?;
    let waves = strengths(&pair, &average(gas, &pair)?);
    let mut f = pair.flux_l(gas);
    for j in 0..3 {
        f += waves.lambdas[j].min(0.0) * waves.alphas[j] * waves.r.column(j);
    }
    Ok(f)
}

/// `F(Wr) - Σ λ⁺ α r`.
pub fn roe_flux_right_form(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<Vector3<f64>> {
    let pair = Pair::new(gas, wl, wr)?;
    let waves = strengths(&pair, &average(gas, &pair)?);
    let mut f = pair.flux_r(gas);
    for j in 0..3 {
        f -= waves.lambdas[j].max(0.0) * waves.alphas[j] * waves.r.column(j);
    }
    Ok(f)
}

/// `(F(Wl) + F(Wr))/2 - Σ |λ| α r / 2`.
pub fn roe_flux_half_sum(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<Vector3<f64>> {
    let pair = Pair::new(gas, wl, wr)?;
    let waves = strengths(&pair, &average(gas, &pair)?);
    Ok(half_sum(gas, &pair, &waves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(gas: &GasModel, rng: &mut ChaCha8Rng) -> Conserved {
        gas.conserved(&Primitive::new(
            rng.random_range(0.1..10.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(0.1..10.0),
        ))
    }

    fn rel(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        (a - b).amax() / a.amax().max(b.amax()).max(1.0)
    }

    #[test]
    fn average_of_equal_states() {
        let gas = GasModel::default();
        let w = gas.conserved(&Primitive::new(1.3, -0.7, 2.1));
        let avg = roe_average(&gas, &w, &w).unwrap();
        let p = gas.primitive(&w).unwrap();
        assert!((avg.rho - p.rho).abs() < 1e-15);
        assert!((avg.u - p.u).abs() < 1e-15);
        assert!((avg.h - gas.total_enthalpy(&w).unwrap()).abs() < 1e-14);
        let m = roe_matrix(&gas, &w, &w).unwrap();
        assert!((m - gas.jacobian(&w).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn average_hand_example() {
        // ρl = 1, ul = 0 and ρr = 4, ur = 3 give weights 1 and 2
        let gas = GasModel::default();
        let wl = gas.conserved(&Primitive::new(1.0, 0.0, 1.0));
        let wr = gas.conserved(&Primitive::new(4.0, 3.0, 2.0));
        let avg = roe_average(&gas, &wl, &wr).unwrap();
        assert!((avg.rho - 2.0).abs() < 1e-15);
        assert!((avg.u - 2.0).abs() < 1e-15);
        let hl = gas.total_enthalpy(&wl).unwrap();
        let hr = gas.total_enthalpy(&wr).unwrap();
        let h = (hl + 2.0 * hr) / 3.0;
        assert!((avg.h - h).abs() < 1e-14);
        assert!((avg.c - (0.4 * (h - 2.0)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn celerity_two_forms() {
        let gas = GasModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..1000 {
            let wl = random_state(&gas, &mut rng);
            let wr = random_state(&gas, &mut rng);
            let avg = roe_average(&gas, &wl, &wr).unwrap();
            let c = roe_celerity_explicit(
                &gas,
                &gas.primitive(&wl).unwrap(),
                &gas.primitive(&wr).unwrap(),
            );
            assert!((avg.c - c).abs() <= 1e-12 * c, "{} vs {}", avg.c, c);
            assert!(avg.lambdas()[0] < avg.lambdas()[1] && avg.lambdas()[1] < avg.lambdas()[2]);
        }
    }

    #[test]
    fn roe_property() {
        let gas = GasModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let wl = random_state(&gas, &mut rng);
            let wr = random_state(&gas, &mut rng);
            let a = roe_matrix(&gas, &wl, &wr).unwrap();
            let fl = gas.flux(&wl).unwrap();
            let fr = gas.flux(&wr).unwrap();
            let resid = (fr - fl - a * (wr - wl)).amax();
            assert!(
                resid <= 1e-11 * fl.amax().max(fr.amax()).max(1.0),
                "{resid}"
            );
        }
    }

    #[test]
    fn roe_matrix_eigenvalues() {
        let gas = GasModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let wl = random_state(&gas, &mut rng);
            let wr = random_state(&gas, &mut rng);
            let a = roe_matrix(&gas, &wl, &wr).unwrap();
            let avg = roe_average(&gas, &wl, &wr).unwrap();
            // characteristic polynomial det(A - λI) vanishes at each λ*
            for lam in avg.lambdas() {
                let d = (a - Matrix3::identity() * lam).determinant();
                let scale = a.norm().powi(3).max(1.0);
                assert!(d.abs() <= 1e-12 * scale, "{d}");
            }
        }
    }

    #[test]
    fn strengths_properties() {
        let gas = GasModel::default();
        let w = gas.conserved(&Primitive::new(1.0, 0.5, 1.0));
        let avg = roe_average(&gas, &w, &w).unwrap();
        assert_eq!(wave_strengths(&gas, &w, &w, &avg).unwrap().alphas, [0.0; 3]);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let wl = random_state(&gas, &mut rng);
            let wr = random_state(&gas, &mut rng);
            let (_, waves) = decompose(&gas, &wl, &wr).unwrap();
            let jump = wr - wl;
            assert!((waves.jump() - jump).amax() <= 1e-12 * jump.amax().max(wl.amax()));
            let s: f64 = waves.alphas.iter().sum();
            assert!((s - jump[0]).abs() <= 1e-12 * wl[0].max(wr[0]));
        }
    }

    #[test]
    fn flux_forms_agree() {
        let gas = GasModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..1000 {
            let wl = random_state(&gas, &mut rng);
            let wr = random_state(&gas, &mut rng);
            let f = roe_flux(&gas, &wl, &wr).unwrap();
            assert!(rel(&f, &roe_flux_left_form(&gas, &wl, &wr).unwrap()) <= 1e-12);
            assert!(rel(&f, &roe_flux_right_form(&gas, &wl, &wr).unwrap()) <= 1e-12);
            assert!(rel(&f, &roe_flux_half_sum(&gas, &wl, &wr).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn consistency_and_supersonic() {
        let gas = GasModel::default();
        let w = gas.conserved(&Primitive::new(1.0, 3.0, 1.0));
        assert_eq!(roe_flux(&gas, &w, &w).unwrap(), gas.flux(&w).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let mut seen = 0;
        while seen < 100 {
            let wl = random_state(&gas, &mut rng);
            let wr = random_state(&gas, &mut rng);
            let avg = roe_average(&gas, &wl, &wr).unwrap();
            let f = roe_flux(&gas, &wl, &wr).unwrap();
            if avg.lambdas()[0] > 0.0 {
                assert_eq!(f, gas.flux(&wl).unwrap());
                seen += 1;
            } else if avg.lambdas()[2] < 0.0 {
                assert_eq!(f, gas.flux(&wr).unwrap());
                seen += 1;
            }
            let w = random_state(&gas, &mut rng);
            assert!(rel(&roe_flux(&gas, &w, &w).unwrap(), &gas.flux(&w).unwrap()) <= 1e-15);
        }
    }

    #[test]
    fn inadmissible_input_rejected() {
        let gas = GasModel::default();
        let good = gas.conserved(&Primitive::new(1.0, 0.0, 1.0));
        let bad = Vector3::new(-1.0, 0.0, 1.0);
        assert!(roe_flux(&gas, &good, &bad).is_err());
    }
}
