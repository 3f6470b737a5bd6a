//! Scenario setup, the run loop, CSV snapshots and convergence studies.

use std::fmt::Write as _;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector, SVector, Vector1, Vector2, Vector3, Vector4};

use crate::config::{BcSpec, ProblemKind, SolverConfig};
use crate::error::{Error, Result};
use crate::gas::{GasModel, Primitive, Primitive2};
use crate::integrator::{advance, balance_defect, DynamicState, Problem, StepControl};
use crate::linear::{advect_exact, AcousticsModel, ReflectionBoundary, Side};
use crate::mesh2d::UnstructuredMesh;
use crate::profile::Profile;
use crate::reconstruction::Limiter;
use crate::scheme1d::{AcousticBc, Acoustics, Advection, Euler1D, EulerBc, Grid1D, Order};
use crate::scheme2d::Euler2D;

/// A built problem with its initial state.
pub enum Scenario {
    Advection(Grid1D<Advection>, DynamicState<1>),
    Acoustics(Grid1D<Acoustics>, DynamicState<2>),
    Euler1D(Grid1D<Euler1D>, DynamicState<3>),
    Euler2D(Box<Euler2D>, DynamicState<4>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub time: f64,
    /// Worst relative defect of the per-step global balance.
    pub max_balance_defect: f64,
    pub files: Vec<PathBuf>,
}

/// Final-time rows of a run: cell coordinates and output fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub header: &'static str,
    pub rows: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.rows.len() * 64);
        s.push_str(self.header);
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{v:e}").expect("write to string");
            }
            s.push('\n');
        }
        s
    }
}

fn order_of(config: &SolverConfig) -> Order {
    if config.order == 2 {
        Order::Second(config.limiter)
    } else {
        Order::First
    }
}

fn initial_1d<const M: usize>(config: &SolverConfig, centers: &[f64]) -> Vec<SVector<f64, M>> {
    centers
        .iter()
        .map(|&x| SVector::<f64, M>::from_column_slice(&config.initial.eval(x, config.length)))
        .collect()
}

fn periodic(config: &SolverConfig) -> bool {
    config.bc_left == BcSpec::Periodic
}

fn unsupported(bc: &BcSpec) -> Error {
    Error::Config(format!(
        "boundary condition {bc:?} is not available for this problem"
    ))
}

fn acoustic_bc(bc: &BcSpec, side: Side, w_edge: Vector2<f64>) -> Result<AcousticBc> {
    Ok(match bc {
        BcSpec::Pressure(p) => AcousticBc::Pressure(p.clone()),
        BcSpec::Nonreflecting | BcSpec::Periodic => AcousticBc::Frozen(w_edge),
        BcSpec::Reflection { s, g } => {
            let g = g.clone();
            AcousticBc::Reflection(ReflectionBoundary {
                side,
                g: std::sync::Arc::new(move |t| DVector::from_element(1, g.eval(t))),
                s: DMatrix::from_element(1, 1, *s),
            })
        }
        other => return Err(unsupported(other)),
    })
}

fn euler_bc(bc: &BcSpec) -> Result<EulerBc> {
    match bc {
        BcSpec::Pressure(p) => Ok(EulerBc::Pressure(p.clone())),
        BcSpec::Nonreflecting => Ok(EulerBc::Nonreflecting),
        other => Err(unsupported(other)),
    }
}

impl Scenario {
    pub fn build(config: &SolverConfig) -> Result<Scenario> {
        let order = order_of(config);
        let gas = GasModel::new(config.gamma)?;
        match config.problem {
            ProblemKind::Advection => {
                if config.speed == 0.0 {
                    return Err(Error::Config("advection speed must be nonzero".into()));
                }
                let upstream = if config.speed > 0.0 {
                    &config.bc_left
                } else {
                    &config.bc_right
                };
                let inflow = match upstream {
                    BcSpec::Inflow(p) => p.clone(),
                    BcSpec::Periodic => Profile::Constant(0.0),
                    other => {
                        return Err(Error::Config(format!(
                            "the upstream side of advection needs inflow:<profile> or periodic, got {other:?}"
                        )))
                    }
                };
                let model = Advection {
                    a: config.speed,
                    inflow,
                };
                let grid =
                    Grid1D::new(model, config.length, config.cells, order, periodic(config))?;
                let z = initial_1d(config, &grid.centers());
                Ok(Scenario::Advection(grid, start(z)))
            }
            ProblemKind::Acoustics => {
                let model = AcousticsModel::new(config.rho0, config.c0)?;
                let probe = Grid1D::new((), config.length, config.cells, order, false)?;
                let z: Vec<Vector2<f64>> = initial_1d(config, &probe.centers());
                let acoustics = Acoustics {
                    model,
                    left: acoustic_bc(&config.bc_left, Side::Left, z[0])?,
                    right: acoustic_bc(&config.bc_right, Side::Right, z[z.len() - 1])?,
                };
                let grid = Grid1D::new(
                    acoustics,
                    config.length,
                    config.cells,
                    order,
                    periodic(config),
                )?;
                Ok(Scenario::Acoustics(grid, start(z)))
            }
            ProblemKind::Euler1D => {
                let model = Euler1D {
                    gas,
                    left: euler_bc(&config.bc_left)?,
                    right: euler_bc(&config.bc_right)?,
                };
                let grid = Grid1D::new(model, config.length, config.cells, order, false)?;
                let z = grid
                    .centers()
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let v = config.initial.eval(x, config.length);
                        gas.try_conserved(&Primitive::new(v[0], v[1], v[2]))
                            .map_err(|e| Error::Config(format!("initial state in cell {j}: {e}")))
                    })
                    .collect::<Result<Vec<Vector3<f64>>>>()?;
                Ok(Scenario::Euler1D(grid, start(z)))
            }
            ProblemKind::Euler2D => {
                let path = config.mesh.as_ref().expect("validated mesh path");
                let mesh = UnstructuredMesh::from_file(path)?;
                let k = config.limiter.k().unwrap_or(Limiter::STS_K);
                let extent = mesh
                    .vertices
                    .iter()
                    .map(|p| p.x)
                    .fold(f64::NEG_INFINITY, f64::max);
                let z = mesh
                    .cells
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let v = config.initial.eval(c.centroid.x, extent);
                        gas.try_conserved2(&Primitive2::new(v[0], v[1], v[2], v[3]))
                            .map_err(|e| Error::Config(format!("initial state in cell {j}: {e}")))
                    })
                    .collect::<Result<Vec<Vector4<f64>>>>()?;
                let inflow = match &config.inflow {
                    Some(v) => Primitive2::new(v[0], v[1], v[2], v[3]),
                    None => gas.primitive2(&z[0])?,
                };
                let scheme = Euler2D::new(gas, mesh, config.order == 2, k, inflow)?;
                Ok(Scenario::Euler2D(Box::new(scheme), start(z)))
            }
        }
    }
}

fn start<const M: usize>(values: Vec<SVector<f64, M>>) -> DynamicState<M> {
    DynamicState { values, time: 0.0 }
}

fn rows_1d<const M: usize, Mo>(
    grid: &Grid1D<Mo>,
    z: &[SVector<f64, M>],
    f: impl Fn(&SVector<f64, M>) -> Result<Vec<f64>>,
) -> Result<Vec<Vec<f64>>> {
    grid.centers()
        .iter()
        .zip(z)
        .map(|(x, w)| {
            let mut row = vec![*x];
            row.extend(f(w)?);
            Ok(row)
        })
        .collect()
}

impl Scenario {
    pub fn snapshot_of(&self, values: &Cells, time: f64) -> Result<Snapshot> {
        let (header, rows) = match (self, values) {
            (Scenario::Advection(g, _), Cells::One(z)) => {
                ("x,w", rows_1d(g, z, |w| Ok(vec![w[0]]))?)
            }
            (Scenario::Acoustics(g, _), Cells::Two(z)) => {
                ("x,p,u", rows_1d(g, z, |w| Ok(vec![w[0], w[1]]))?)
            }
            (Scenario::Euler1D(g, _), Cells::Three(z)) => {
                let gas = g.model.gas;
                (
                    "x,rho,u,p",
                    rows_1d(g, z, |w| {
                        let p = gas.primitive(w)?;
                        Ok(vec![p.rho, p.u, p.p])
                    })?,
                )
            }
            (Scenario::Euler2D(e, _), Cells::Four(z)) => (
                "x,y,rho,u,v,p",
                e.mesh
                    .cells
                    .iter()
                    .zip(z)
                    .map(|(c, w)| {
                        let p = e.gas.primitive2(w)?;
                        Ok(vec![c.centroid.x, c.centroid.y, p.rho, p.u, p.v, p.p])
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => {
                return Err(Error::DimensionMismatch(
                    "state does not match the scenario".into(),
                ))
            }
        };
        Ok(Snapshot { time, header, rows })
    }
}

/// Cell values of any of the supported problems.
#[derive(Debug, Clone, PartialEq)]
pub enum Cells {
    One(Vec<Vector1<f64>>),
    Two(Vec<Vector2<f64>>),
    Three(Vec<Vector3<f64>>),
    Four(Vec<Vector4<f64>>),
}

fn drive<const M: usize, P: Problem<M>>(
    problem: &P,
    control: &StepControl,
    init: &DynamicState<M>,
    targets: &[f64],
    wrap: impl Fn(Vec<SVector<f64, M>>) -> Cells,
    mut emit: impl FnMut(Cells, f64) -> Result<()>,
) -> Result<(DynamicState<M>, usize, f64)> {
    let mut state = init.clone();
    let mut steps = 0;
    let mut worst: f64 = 0.0;
    for &t in targets {
        state = advance(problem, control, state, t, |a, b, r| {
            steps += 1;
            worst = worst.max(balance_defect(problem.volumes(), &a.values, &b.values, r));
            Ok(())
        })?;
        emit(wrap(state.values.clone()), state.time)?;
    }
    Ok((state, steps, worst))
}

fn control(config: &SolverConfig) -> StepControl {
    StepControl {
        scheme: config.time,
        cfl: config.cfl,
        fixed_dt: config.fixed_dt,
    }
}

/// Runs the scenario to every target time and hands out each snapshot.
pub fn simulate(
    config: &SolverConfig,
    mut emit: impl FnMut(&Scenario, Cells, f64) -> Result<()> + Send,
) -> Result<(Scenario, Cells, usize, f64)> {
    let scenario = Scenario::build(config)?;
    let targets = config.targets();
    let ctl = control(config);
    let mut work = || -> Result<(Cells, usize, f64)> {
        let s = &scenario;
        Ok(match s {
            Scenario::Advection(g, init) => {
                let (st, n, d) = drive(g, &ctl, init, &targets, Cells::One, |c, t| emit(s, c, t))?;
                (Cells::One(st.values), n, d)
            }
            Scenario::Acoustics(g, init) => {
                let (st, n, d) = drive(g, &ctl, init, &targets, Cells::Two, |c, t| emit(s, c, t))?;
                (Cells::Two(st.values), n, d)
            }
            Scenario::Euler1D(g, init) => {
                let (st, n, d) =
                    drive(g, &ctl, init, &targets, Cells::Three, |c, t| emit(s, c, t))?;
                (Cells::Three(st.values), n, d)
            }
            Scenario::Euler2D(e, init) => {
                let (st, n, d) = drive(e.as_ref(), &ctl, init, &targets, Cells::Four, |c, t| {
                    emit(s, c, t)
                })?;
                (Cells::Four(st.values), n, d)
            }
        })
    };
    let (cells, steps, defect) = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok((scenario, cells, steps, defect))
}

pub fn snapshot_path(output: &std::path::Path, time: f64) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(format!("_t{time:.6}.csv"));
    PathBuf::from(name)
}

/// Runs the configuration, writing one CSV per snapshot when an output prefix is set.
pub fn run(config: &SolverConfig) -> Result<RunSummary> {
    let mut files = Vec::new();
    let (_, _, steps, defect) = simulate(config, |scenario, cells, t| {
        let snap = scenario.snapshot_of(&cells, t)?;
        if let Some(out) = &config.output {
            let path = snapshot_path(out, t);
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, snap.to_csv())?;
            files.push(path);
        }
        log::info!("snapshot t = {t:.6}");
        Ok(())
    })?;
    Ok(RunSummary {
        steps,
        time: config.t_end,
        max_balance_defect: defect,
        files,
    })
}

/// Discrete L1 error of the final state against the exact solution, when one exists.
pub fn l1_error(config: &SolverConfig) -> Result<f64> {
    let (scenario, cells, _, _) = simulate(config, |_, _, _| Ok(()))?;
    let t = config.t_end;
    match (&scenario, &cells) {
        (Scenario::Advection(g, _), Cells::One(z)) => {
            let a = g.model.a;
            let length = g.length;
            let u0 = |x: f64| config.initial.eval(x, length)[0];
            let err: f64 = g
                .centers()
                .iter()
                .zip(z)
                .map(|(&x, w)| {
                    let exact = if g.periodic {
                        u0((x - a * t).rem_euclid(length))
                    } else {
                        advect_exact(u0, |s| g.model.inflow.eval(s), a, length, x, t)
                    };
                    (w[0] - exact).abs()
                })
                .sum();
            Ok(err * g.dx())
        }
        (Scenario::Acoustics(g, _), Cells::Two(z)) => {
            let pi = match (&config.bc_left, &config.bc_right) {
                (BcSpec::Pressure(p), BcSpec::Nonreflecting) => p.clone(),
                _ => return Err(Error::Config(
                    "the acoustic exact solution needs a pressure inlet and a nonreflecting outlet"
                        .into(),
                )),
            };
            let m = g.model.model;
            let length = g.length;
            let init = |x: f64| config.initial.eval(x, length);
            let mut err = 0.0;
            for (&x, w) in g.centers().iter().zip(z) {
                let (p, u) =
                    m.exact(|x| init(x)[0], |x| init(x)[1], |s| pi.eval(s), length, x, t)?;
                err += (w[0] - p).abs() + m.impedance() * (w[1] - u).abs();
            }
            Ok(err * g.dx())
        }
        _ => Err(Error::Config("no exact solution for this problem".into())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub dx: f64,
    pub error: f64,
    /// `log2(e_prev / e)` against the previous row.
    pub order: Option<f64>,
}

pub fn convergence(config: &SolverConfig, grids: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(grids.len());
    for &j in grids {
        let mut c = config.clone();
        c.cells = j;
        c.output = None;
        c.snapshots.clear();
        let error = l1_error(&c)?;
        let order = rows.last().map(|prev: &ConvergenceRow| {
            (prev.error / error).ln() / (prev.dx / (c.length / j as f64)).ln()
        });
        rows.push(ConvergenceRow {
            cells: j,
            dx: c.length / j as f64,
            error,
            order,
        });
    }
    Ok(rows)
}

pub fn format_convergence(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("cells,dx,l1_error,order\n");
    for r in rows {
        let order = r.order.map(|o| format!("{o:.4}")).unwrap_or_default();
        writeln!(s, "{},{:e},{:e},{}", r.cells, r.dx, r.error, order).expect("write to string");
    }
    s
}
