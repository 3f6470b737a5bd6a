//! Method of lines: residual assembly interface and explicit time stepping.

use nalgebra::SVector;

use crate::error::{Error, Result};

pub type Cells<const M: usize> = Vec<SVector<f64, M>>;

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicState<const M: usize> {
    pub values: Cells<M>,
    pub time: f64,
}

/// `G(Z)` together with the net flux leaving through the boundary, `Σ_boundary |f| Φ_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual<const M: usize> {
    pub values: Cells<M>,
    pub boundary_outflow: SVector<f64, M>,
}

/// A semi-discrete problem `|K| dW_K/dt = −Σ |f| Φ_f`.
pub trait Problem<const M: usize>: Sync {
    fn volumes(&self) -> &[f64];

    /// Residual at state `z`, with boundary data sampled at `t_data`.
    fn assemble_rhs(&self, z: &[SVector<f64, M>], t_data: f64) -> Result<Residual<M>>;

    /// Largest stable step for the given Courant number; infinite when nothing moves.
    fn stable_dt(&self, z: &[SVector<f64, M>], cfl: f64) -> Result<f64>;

    fn check_cell(&self, w: &SVector<f64, M>) -> Result<()>;

    fn check_state(&self, z: &[SVector<f64, M>], time: f64) -> Result<()> {
        for (i, w) in z.iter().enumerate() {
            if !w.iter().all(|x| x.is_finite()) {
                return Err(Error::InadmissibleState {
                    cell: i,
                    time,
                    reason: "non-finite value".into(),
                });
            }
            self.check_cell(w).map_err(|e| e.at_cell(i, time))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    Euler,
    Heun,
}

impl TimeScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "euler" => Ok(TimeScheme::Euler),
            "heun" => Ok(TimeScheme::Heun),
            other => Err(Error::Config(format!("unknown time scheme '{other}'"))),
        }
    }
}

/// What one step did: its size and the boundary outflow it used.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<const M: usize> {
    pub dt: f64,
    pub boundary_outflow: SVector<f64, M>,
}

fn axpy<const M: usize>(z: &[SVector<f64, M>], dt: f64, g: &[SVector<f64, M>]) -> Cells<M> {
    z.iter().zip(g).map(|(w, d)| w + dt * d).collect()
}

/// `Z^{n+1} = Z^n + Δt G(Z^n)`, boundary data taken at mid-step.
pub fn euler_step<const M: usize, P: Problem<M>>(
    problem: &P,
    state: &DynamicState<M>,
    dt: f64,
) -> Result<(DynamicState<M>, StepReport<M>)> {
    let g = problem.assemble_rhs(&state.values, state.time + 0.5 * dt)?;
    let time = state.time + dt;
    let values = axpy(&state.values, dt, &g.values);
    problem.check_state(&values, time)?;
    Ok((
        DynamicState { values, time },
        StepReport {
            dt,
            boundary_outflow: g.boundary_outflow,
        },
    ))
}

/// Heun: predictor with data at `t^n`, corrector with data at `t^{n+1}`, then the average.
pub fn heun_step<const M: usize, P: Problem<M>>(
    problem: &P,
    state: &DynamicState<M>,
    dt: f64,
) -> Result<(DynamicState<M>, StepReport<M>)> {
    let time = state.time + dt;
    let g1 = problem.assemble_rhs(&state.values, state.time)?;
    let pred = axpy(&state.values, dt, &g1.values);
    problem.check_state(&pred, time)?;
    let g2 = problem.assemble_rhs(&pred, time)?;
    let corr = axpy(&pred, dt, &g2.values);
    let values: Cells<M> = corr
        .iter()
        .zip(&state.values)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    problem.check_state(&values, time)?;
    Ok((
        DynamicState { values, time },
        StepReport {
            dt,
            boundary_outflow: 0.5 * (g1.boundary_outflow + g2.boundary_outflow),
        },
    ))
}

pub fn step<const M: usize, P: Problem<M>>(
    problem: &P,
    scheme: TimeScheme,
    state: &DynamicState<M>,
    dt: f64,
) -> Result<(DynamicState<M>, StepReport<M>)> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    match scheme {
        TimeScheme::Euler => euler_step(problem, state, dt),
        TimeScheme::Heun => heun_step(problem, state, dt),
    }
}

/// `Σ_K |K| W_K`.
pub fn total<const M: usize>(volumes: &[f64], z: &[SVector<f64, M>]) -> SVector<f64, M> {
    z.iter().zip(volumes).map(|(w, v)| *v * w).sum()
}

/// Relative residual of `Σ|K|(W^{n+1} − W^n) + Δt · outflow = 0`.
pub fn balance_defect<const M: usize>(
    volumes: &[f64],
    before: &[SVector<f64, M>],
    after: &[SVector<f64, M>],
    report: &StepReport<M>,
) -> f64 {
    let mut change = SVector::<f64, M>::zeros();
    let mut scale = SVector::<f64, M>::zeros();
    for ((a, b), v) in after.iter().zip(before).zip(volumes) {
        change += *v * (a - b);
        scale += (*v * a).abs() + (*v * b).abs();
    }
    let flux = report.dt * report.boundary_outflow;
    let scale = scale + flux.abs();
    (0..M)
        .map(|i| (change[i] + flux[i]).abs() / scale[i].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub scheme: TimeScheme,
    pub cfl: f64,
    pub fixed_dt: Option<f64>,
}

/// Steps until `t_end`, clipping the last step so time lands on it exactly.
/// `observe` sees the state before and after every step.
pub fn advance<const M: usize, P: Problem<M>>(
    problem: &P,
    control: &StepControl,
    mut state: DynamicState<M>,
    t_end: f64,
    mut observe: impl FnMut(&DynamicState<M>, &DynamicState<M>, &StepReport<M>) -> Result<()>,
) -> Result<DynamicState<M>> {
    while state.time < t_end {
        let mut dt = match control.fixed_dt {
            Some(dt) => dt,
            None => problem.stable_dt(&state.values, control.cfl)?,
        };
        // a remainder below round-off of the accumulated time is folded into this step
        let last = state.time + dt >= t_end - 1e-9 * dt;
        if last {
            dt = t_end - state.time;
        }
        let (mut next, report) = step(problem, control.scheme, &state, dt)?;
        if last {
            next.time = t_end;
        }
        observe(&state, &next, &report)?;
        state = next;
    }
    Ok(state)
}
