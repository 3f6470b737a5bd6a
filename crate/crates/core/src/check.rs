//! Seeded property suite behind the `check` command.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::pressure_boundary_state;
use crate::error::Result;
use crate::gas::{Conserved, GasModel, Primitive, Primitive2};
use crate::integrator::{balance_defect, heun_step, DynamicState, Problem};
use crate::linear::LinearSystem;
use crate::mesh2d::UnstructuredMesh;
use crate::profile::Profile;
use crate::reconstruction::Limiter;
use crate::roe::{
    decompose, entropy_fixed_flux, roe_flux, roe_flux_half_sum, roe_flux_left_form,
    roe_flux_right_form, roe_matrix, sonic_indices,
};
use crate::scheme1d::{Euler1D, EulerBc, Grid1D, Order};
use crate::scheme2d::Euler2D;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        for r in &self.results {
            let status = if r.passed() { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "{status} {:<28} max residual {:.3e} (tolerance {:.1e})",
                r.name, r.max_residual, r.tolerance
            )?;
        }
        Ok(())
    }
}

/// `ρ ∈ [0.1, 10]`, `u ∈ [−5, 5]`, `p ∈ [0.1, 10]`.
pub fn random_state(gas: &GasModel, rng: &mut impl Rng) -> Conserved {
    gas.conserved(&Primitive::new(
        rng.random_range(0.1..=10.0),
        rng.random_range(-5.0..=5.0),
        rng.random_range(0.1..=10.0),
    ))
}

pub fn random_pairs(gas: &GasModel, seed: u64, n: usize) -> Vec<(Conserved, Conserved)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (random_state(gas, &mut rng), random_state(gas, &mut rng)))
        .collect()
}

/// Worst `‖F(Wr) − F(Wl) − A(Wr − Wl)‖∞ / max(1, ‖F‖∞)` for the matrix built by `matrix`.
pub fn roe_property_residual(
    gas: &GasModel,
    pairs: &[(Conserved, Conserved)],
    matrix: impl Fn(&GasModel, &Conserved, &Conserved) -> Result<Matrix3<f64>>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (wl, wr) in pairs {
        let (fl, fr) = (gas.flux(wl)?, gas.flux(wr)?);
        let a = matrix(gas, wl, wr)?;
        let res = (fr - fl - a * (wr - wl)).amax();
        worst = worst.max(res / fl.amax().max(fr.amax()).max(1.0));
    }
    Ok(worst)
}

fn rel(a: &nalgebra::Vector3<f64>, b: &nalgebra::Vector3<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1.0)
}

fn random_linear_system(rng: &mut ChaCha8Rng, m: usize) -> LinearSystem {
    loop {
        let lambdas = DVector::from_fn(m, |_, _| rng.random_range(-3.0..3.0));
        let r = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                1.0 + rng.random_range(0.0..1.0)
            } else {
                rng.random_range(-0.5..0.5)
            }
        });
        if let Ok(sys) = LinearSystem::new(lambdas, r) {
            return sys;
        }
    }
}

/// Small mixed mesh of a `[0, 2] × [0, 1]` channel: quads on the left half, triangles on the right.
fn demo_mesh() -> UnstructuredMesh {
    let (nx, ny) = (8, 4);
    let h = 1.0 / ny as f64;
    let mut s = format!("vertices {}\n", (nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            s += &format!("{} {}\n", i as f64 * h, j as f64 * h);
        }
    }
    let v = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if i < nx / 2 {
                cells.push(format!(
                    "4 {} {} {} {}",
                    v(i, j),
                    v(i + 1, j),
                    v(i + 1, j + 1),
                    v(i, j + 1)
                ));
            } else {
                cells.push(format!("3 {} {} {}", v(i, j), v(i + 1, j), v(i + 1, j + 1)));
                cells.push(format!("3 {} {} {}", v(i, j), v(i + 1, j + 1), v(i, j + 1)));
            }
        }
    }
    s += &format!("cells {}\n{}\n", cells.len(), cells.join("\n"));
    s += &format!("boundary {}\n", 2 * (nx + ny));
    for i in 0..nx {
        s += &format!("{} {} wall\n", v(i, 0), v(i + 1, 0));
        s += &format!("{} {} wall\n", v(i, ny), v(i + 1, ny));
    }
    for j in 0..ny {
        s += &format!("{} {} inflow\n", v(0, j), v(0, j + 1));
        s += &format!("{} {} fluid\n", v(nx, j), v(nx, j + 1));
    }
    UnstructuredMesh::parse(&s).expect("demo mesh is valid")
}

fn conservation_residual() -> Result<f64> {
    let gas = GasModel::default();
    let mut worst: f64 = 0.0;

    let grid = Grid1D::new(
        Euler1D {
            gas,
            left: EulerBc::Pressure(Profile::Sine {
                p0: 1.0,
                amplitude: 0.2,
                frequency: 2.0,
            }),
            right: EulerBc::Nonreflecting,
        },
        1.0,
        40,
        Order::Second(Limiter::sts()),
        false,
    )?;
    let mut s = DynamicState {
        values: grid.sample(|x| gas.conserved(&Primitive::new(1.0 + 0.5 * x, 0.1, 1.0))),
        time: 0.0,
    };
    for _ in 0..40 {
        let dt = grid.stable_dt(&s.values, 0.45)?;
        let (next, rep) = heun_step(&grid, &s, dt)?;
        worst = worst.max(balance_defect(
            grid.volumes(),
            &s.values,
            &next.values,
            &rep,
        ));
        s = next;
    }

    let e = Euler2D::new(
        gas,
        demo_mesh(),
        true,
        Limiter::STS_K,
        Primitive2::new(1.0, 0.6, 0.0, 1.0),
    )?;
    let mut s = DynamicState {
        values: e
            .mesh
            .cells
            .iter()
            .map(|c| gas.conserved2(&Primitive2::new(1.0 + 0.2 * c.centroid.x, 0.3, 0.05, 1.0)))
            .collect(),
        time: 0.0,
    };
    for _ in 0..20 {
        let dt = e.stable_dt(&s.values, 0.45)?;
        let (next, rep) = heun_step(&e, &s, dt)?;
        worst = worst.max(balance_defect(e.volumes(), &s.values, &next.values, &rep));
        s = next;
    }
    Ok(worst)
}

fn suite(seed: u64) -> Result<Vec<PropertyResult>> {
    let gas = GasModel::default();
    let pairs = random_pairs(&gas, seed, 1000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = Vec::new();
    let mut push = |name, max_residual, tolerance| {
        out.push(PropertyResult {
            name,
            max_residual,
            tolerance,
        })
    };

    let mut rt: f64 = 0.0;
    let mut eig: f64 = 0.0;
    for (w, _) in &pairs {
        let back = gas.conserved(&gas.primitive(w)?);
        rt = rt.max((back - w).amax() / w.amax());
        let p = gas.primitive(w)?;
        let c = gas.sound_speed(p.rho, p.p);
        let h = gas.total_enthalpy(w)?;
        let a = gas.jacobian(w)?;
        let es = gas.eigenstructure(p.u, c, h);
        for j in 0..3 {
            let r = es.vector(j);
            eig = eig.max((a * r - es.lambdas[j] * r).amax() / (a.amax() * r.amax()));
        }
    }
    push("primitive round trip", rt, 1e-14);
    push("eigenpairs", eig, 1e-12);

    push(
        "roe property",
        roe_property_residual(&gas, &pairs, roe_matrix)?,
        1e-11,
    );

    let mut forms: f64 = 0.0;
    let mut consistency: f64 = 0.0;
    let mut fix_identity: f64 = 0.0;
    for (wl, wr) in &pairs {
        let f = roe_flux(&gas, wl, wr)?;
        for g in [
            roe_flux_left_form(&gas, wl, wr)?,
            roe_flux_right_form(&gas, wl, wr)?,
            roe_flux_half_sum(&gas, wl, wr)?,
        ] {
            forms = forms.max(rel(&f, &g));
        }
        let fw = gas.flux(wl)?;
        consistency = consistency
            .max(rel(&roe_flux(&gas, wl, wl)?, &fw))
            .max(rel(&entropy_fixed_flux(&gas, wl, wl)?, &fw));
        if let Ok(data) = sonic_indices(&gas, wl, wr) {
            if data.sonic.is_empty() {
                fix_identity = fix_identity.max((entropy_fixed_flux(&gas, wl, wr)? - f).amax());
            }
        }
    }
    push("roe flux forms", forms, 1e-12);

    let mut lin_forms: f64 = 0.0;
    for _ in 0..1000 {
        let sys = random_linear_system(&mut rng, 3);
        let wl = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let wr = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let f = sys.upwind_flux(&wl, &wr)?;
        let scale = f.amax().max(1.0);
        for g in [
            sys.upwind_flux_left(&wl, &wr)?,
            sys.upwind_flux_right(&wl, &wr)?,
            sys.upwind_flux_characteristic(&wl, &wr)?,
        ] {
            lin_forms = lin_forms.max((&f - g).amax() / scale);
        }
        let aw = sys.flux(&wl);
        consistency =
            consistency.max((sys.upwind_flux(&wl, &wl)? - &aw).amax() / aw.amax().max(1.0));
    }
    push("linear upwind forms", lin_forms, 1e-12);
    push("flux consistency", consistency, 1e-14);
    push("entropy fix off when S empty", fix_identity, 0.0);

    let mut p_err: f64 = 0.0;
    let mut wave_err: f64 = 0.0;
    for (_, wr) in &pairs {
        let pi = rng.random_range(0.1..=10.0);
        let wl = pressure_boundary_state(&gas, pi, wr)?;
        p_err = p_err.max((gas.primitive(&wl)?.p - pi).abs() / pi);
        let (_, waves) = decompose(&gas, &wl, wr)?;
        let [a1, a2, a3] = waves.alphas;
        wave_err = wave_err.max(a1.abs().max(a2.abs()) / (a3.abs() + 1.0));
    }
    push("pressure boundary value", p_err, 1e-13);
    push("pressure boundary one wave", wave_err, 1e-10);

    let mut lim: f64 = 0.0;
    for k in [Limiter::MINMOD_K, Limiter::STS_K, Limiter::TOWARDS4_K] {
        let l = Limiter::Family(k);
        lim = lim.max((l.value(1.0) - 1.0).abs());
        for _ in 0..1000 {
            let r: f64 = rng.random_range(-20.0..20.0);
            let v = l.value(r);
            lim = lim.max((-v).max(0.0));
            if r <= 0.0 {
                lim = lim.max(v.abs());
            } else {
                lim = lim.max((v - r * l.value(1.0 / r)).abs() / (1.0 + v));
                lim = lim.max((v - 2.0 * r.min(1.0)).max(0.0));
            }
        }
    }
    push("limiter axioms", lim, 1e-12);
    push("discrete conservation", conservation_residual()?, 1e-12);
    Ok(out)
}

/// Runs every property; numerical errors inside a property are reported as its failure.
pub fn run_checks(seed: u64) -> Report {
    let results = suite(seed).unwrap_or_else(|e| {
        vec![PropertyResult {
            name: "suite aborted",
            max_residual: f64::INFINITY,
            tolerance: 0.0,
        }]
        .into_iter()
        .inspect(|_| log::error!("property suite aborted: {e}"))
        .collect()
    });
    Report { seed, results }
}
