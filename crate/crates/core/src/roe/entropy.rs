//! Entropy correction of the Roe flux at sonic points, without a tuning parameter.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::Vector3;

use super::{roe_flux_pair, Pair};
use crate::error::{Error, Result};
use crate::gas::{Conserved, GasModel};

static FALLBACKS: AtomicU64 = AtomicU64::new(0);

/// Number of interfaces where an intermediate state was inadmissible and the plain
/// Roe flux was used instead.
pub fn entropy_fallback_count() -> u64 {
    FALLBACKS.load(Ordering::Relaxed)
}

pub(crate) fn note_fallback(index: usize) {
    FALLBACKS.fetch_add(1, Ordering::Relaxed);
    log::debug!("intermediate state W{index} inadmissible, entropy correction skipped");
}

/// Cubic `p` on `[0, α]` with `p(0) = 0`, `p'(0) = λ0`, `p(α) = λ* α`, `p'(α) = λ1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteCubic {
    pub lam0: f64,
    pub lam1: f64,
    pub lam_star: f64,
    pub alpha: f64,
}

impl HermiteCubic {
    fn coeffs(&self) -> (f64, f64, f64) {
        let a = self.alpha;
        (
            (self.lam1 + self.lam0 - 2.0 * self.lam_star) / (a * a),
            (3.0 * self.lam_star - 2.0 * self.lam0 - self.lam1) / a,
            self.lam0,
        )
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let (c3, c2, c1) = self.coeffs();
        ((c3 * xi + c2) * xi + c1) * xi
    }

    pub fn derivative(&self, xi: f64) -> f64 {
        let (c3, c2, c1) = self.coeffs();
        (3.0 * c3 * xi + 2.0 * c2) * xi + c1
    }

    /// Interior critical point. The closed form is the root of `p' = 0` with the
    /// cancellation-free sign, so it stays accurate when the cubic term vanishes.
    pub fn argmin(&self) -> f64 {
        let b = 3.0 * self.lam_star - 2.0 * self.lam0 - self.lam1;
        let c = 3.0 * self.lam_star - self.lam1 - self.lam0;
        let disc = c * c - self.lam0 * self.lam1;
        -self.lam0 * self.alpha / (b + disc.sqrt())
    }

    /// Same critical point from the textbook quadratic formula, for cross-checking.
    pub fn argmin_quadratic(&self) -> f64 {
        let (c3, c2, c1) = self.coeffs();
        let (qa, qb, qc) = (3.0 * c3, 2.0 * c2, c1);
        if qa == 0.0 {
            return -qc / qb;
        }
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let r1 = (-qb + disc) / (2.0 * qa);
        let r2 = (-qb - disc) / (2.0 * qa);
        let inside = |r: f64| r / self.alpha > 0.0 && r / self.alpha < 1.0;
        if inside(r1) {
            r1
        } else {
            r2
        }
    }

    /// `max(p(ξ*)/α, p(ξ*)/α - λ*)`, the (non-positive) multiplier of `α r*`.
    pub fn coefficient(&self) -> f64 {
        let m = self.eval(self.argmin()) / self.alpha;
        m.max(m - self.lam_star)
    }
}

/// Correction multiplier for a wave whose speed goes from `lam0` to `lam1`, if sonic.
pub(crate) fn sonic_coefficient(lam0: f64, lam1: f64, lam_star: f64, alpha: f64) -> Option<f64> {
    if lam0 < 0.0 && 0.0 < lam1 && alpha != 0.0 {
        Some(
            HermiteCubic {
                lam0,
                lam1,
                lam_star,
                alpha,
            }
            .coefficient(),
        )
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SonicData {
    /// `W⁰ = Wl`, `W¹`, `W²`, `W³ = Wr`.
    pub states: [Conserved; 4],
    /// `speeds[k][j]` is the `j`-th eigenvalue at `W^k`.
    pub speeds: [[f64; 3]; 4],
    /// Zero-based indices of the sonic waves.
    pub sonic: Vec<usize>,
    pub alphas: [f64; 3],
    pub lambdas_star: [f64; 3],
}

impl SonicData {
    pub fn cubic(&self, j: usize) -> HermiteCubic {
        HermiteCubic {
            lam0: self.speeds[j][j],
            lam1: self.speeds[j + 1][j],
            lam_star: self.lambdas_star[j],
            alpha: self.alphas[j],
        }
    }
}

fn sonic_from_pair(
    gas: &GasModel,
    pair: &Pair,
    waves: &super::WaveDecomposition,
) -> Result<SonicData> {
    let w1 = pair.wl + waves.alphas[0] * waves.vector(0);
    let w2 = pair.wr - waves.alphas[2] * waves.vector(2);
    let s1 = gas
        .wave_speeds(&w1)
        .map_err(|_| Error::IntermediateStateInadmissible { index: 1 })?;
    let s2 = gas
        .wave_speeds(&w2)
        .map_err(|_| Error::IntermediateStateInadmissible { index: 2 })?;
    let c = |rho: f64, p: f64| gas.sound_speed(rho, p);
    let s0 = {
        let cl = c(pair.pl.rho, pair.pl.p);
        [pair.pl.u - cl, pair.pl.u, pair.pl.u + cl]
    };
    let s3 = {
        let cr = c(pair.pr.rho, pair.pr.p);
        [pair.pr.u - cr, pair.pr.u, pair.pr.u + cr]
    };
    let speeds = [s0, s1, s2, s3];
    let sonic = (0..3)
        .filter(|&j| speeds[j][j] < 0.0 && 0.0 < speeds[j + 1][j] && waves.alphas[j] != 0.0)
        .collect();
    Ok(SonicData {
        states: [pair.wl, w1, w2, pair.wr],
        speeds,
        sonic,
        alphas: waves.alphas,
        lambdas_star: waves.lambdas,
    })
}

pub fn sonic_indices(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<SonicData> {
    let pair = Pair::new(gas, wl, wr)?;
    let (_, waves) = roe_flux_pair(gas, &pair)?;
    sonic_from_pair(gas, &pair, &waves)
}

/// Roe flux with added viscosity on the sonic waves.
pub fn entropy_fixed_flux(gas: &GasModel, wl: &Conserved, wr: &Conserved) -> Result<Vector3<f64>> {
    let pair = Pair::new(gas, wl, wr)?;
    let (mut flux, waves) = roe_flux_pair(gas, &pair)?;
    let data = match sonic_from_pair(gas, &pair, &waves) {
        Ok(d) => d,
        Err(Error::IntermediateStateInadmissible { index }) => {
            note_fallback(index);
            return Ok(flux);
        }
        Err(e) => return Err(e),
    };
    for &j in &data.sonic {
        let coef = data.cubic(j).coefficient();
        flux += coef * waves.alphas[j] * waves.vector(j);
    }
    Ok(flux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::Primitive;
    use crate::roe::roe_flux;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Right state on the 1-rarefaction curve through `left` with pressure `p`.
    fn rarefaction_state(gas: &GasModel, left: &Primitive, p: f64) -> Primitive {
        let g = gas.gamma;
        let cl = gas.sound_speed(left.rho, left.p);
        let rho = left.rho * (p / left.p).powf(1.0 / g);
        let c = gas.sound_speed(rho, p);
        Primitive::new(rho, left.u + 2.0 / (g - 1.0) * (cl - c), p)
    }

    fn transonic_pair(gas: &GasModel) -> (Conserved, Conserved) {
        let left = Primitive::new(1.0, 0.5, 1.0);
        let right = rarefaction_state(gas, &left, 0.3);
        (gas.conserved(&left), gas.conserved(&right))
    }

    #[test]
    fn cubic_hermite_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..1000 {
            let cubic = HermiteCubic {
                lam0: rng.random_range(-3.0..-0.01),
                lam1: rng.random_range(0.01..3.0),
                lam_star: rng.random_range(-3.0..3.0),
                alpha: rng.random_range(-2.0..2.0),
            };
            let a = cubic.alpha;
            let s = 1e-12 * (1.0 + cubic.lam0.abs() + cubic.lam1.abs() + cubic.lam_star.abs());
            assert_eq!(cubic.eval(0.0), 0.0);
            assert!((cubic.eval(a) - cubic.lam_star * a).abs() <= s * a.abs().max(1.0));
            assert!((cubic.derivative(0.0) - cubic.lam0).abs() <= s);
            assert!((cubic.derivative(a) - cubic.lam1).abs() <= s);
        }
    }

    #[test]
    fn argmin_in_interval_and_matches_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let lam0 = rng.random_range(-3.0..-0.01);
            let lam1 = rng.random_range(0.01..3.0);
            let cubic = HermiteCubic {
                lam0,
                lam1,
                lam_star: rng.random_range(lam0..lam1),
                alpha: rng.random_range(0.1..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            };
            let xi = cubic.argmin();
            let t = xi / cubic.alpha;
            assert!(t > 0.0 && t < 1.0, "{t}");
            assert!(cubic.derivative(xi).abs() <= 1e-12 * (lam0.abs() + lam1.abs()));
            let q = cubic.argmin_quadratic();
            assert!((q - xi).abs() <= 1e-9 * cubic.alpha.abs());
            assert!(cubic.coefficient() <= 0.0);
        }
    }

    #[test]
    fn argmin_against_dense_sampling() {
        let cubic = HermiteCubic {
            lam0: -0.4,
            lam1: 0.7,
            lam_star: 0.1,
            alpha: 0.8,
        };
        let n = 1_000_000;
        let mut best = (0.0, f64::INFINITY);
        for i in 1..n {
            let xi = cubic.alpha * i as f64 / n as f64;
            let v = cubic.eval(xi);
            if v < best.1 {
                best = (xi, v);
            }
        }
        assert!((best.0 - cubic.argmin()).abs() <= 2.0 * cubic.alpha / n as f64);
    }

    #[test]
    fn equal_states_have_no_sonic_wave() {
        let gas = GasModel::default();
        let w = gas.conserved(&Primitive::new(1.0, 0.2, 1.0));
        assert!(sonic_indices(&gas, &w, &w).unwrap().sonic.is_empty());
        assert_eq!(
            entropy_fixed_flux(&gas, &w, &w).unwrap(),
            gas.flux(&w).unwrap()
        );
    }

    #[test]
    fn supersonic_pair_unchanged() {
        let gas = GasModel::default();
        let wl = gas.conserved(&Primitive::new(1.0, 4.0, 1.0));
        let wr = gas.conserved(&Primitive::new(0.5, 5.0, 0.6));
        let data = sonic_indices(&gas, &wl, &wr).unwrap();
        assert!(data.speeds.iter().flatten().all(|&s| s > 0.0));
        assert!(data.sonic.is_empty());
        assert_eq!(
            entropy_fixed_flux(&gas, &wl, &wr).unwrap(),
            roe_flux(&gas, &wl, &wr).unwrap()
        );
    }

    #[test]
    fn transonic_rarefaction_is_corrected() {
        let gas = GasModel::default();
        let (wl, wr) = transonic_pair(&gas);
        let data = sonic_indices(&gas, &wl, &wr).unwrap();
        assert_eq!(data.sonic, vec![0]);
        let cubic = data.cubic(0);
        assert!(cubic.coefficient() < 0.0);
        let roe = roe_flux(&gas, &wl, &wr).unwrap();
        let fixed = entropy_fixed_flux(&gas, &wl, &wr).unwrap();
        let delta = fixed - roe;
        // the change is along r1 only
        let r1 = crate::roe::decompose(&gas, &wl, &wr).unwrap().1.vector(0);
        let k = delta[0] / r1[0];
        assert!((delta - k * r1).norm() <= 1e-14 * roe.norm());
    }

    #[test]
    fn entropy_fix_is_consistent() {
        let gas = GasModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let w = gas.conserved(&Primitive::new(
                rng.random_range(0.1..10.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(0.1..10.0),
            ));
            let f = entropy_fixed_flux(&gas, &w, &w).unwrap();
            assert_eq!(f, roe_flux(&gas, &w, &w).unwrap());
        }
    }

    #[test]
    fn strong_wave_falls_back_to_roe() {
        let gas = GasModel::default();
        // strong expansion: W¹ gets a negative pressure
        let wl = gas.conserved(&Primitive::new(1.0, -8.0, 1.0));
        let wr = gas.conserved(&Primitive::new(1.0, 8.0, 1.0));
        if let Err(Error::IntermediateStateInadmissible { .. }) = sonic_indices(&gas, &wl, &wr) {
            let before = entropy_fallback_count();
            let f = entropy_fixed_flux(&gas, &wl, &wr).unwrap();
            assert_eq!(f, roe_flux(&gas, &wl, &wr).unwrap());
            assert!(entropy_fallback_count() > before);
        } else {
            panic!("expected an inadmissible intermediate state");
        }
    }
}
