//! `key=value` solver configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrator::TimeScheme;
use crate::profile::{parse_f64, parse_list, Profile};
use crate::reconstruction::Limiter;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Advection,
    Acoustics,
    Euler1D,
    Euler2D,
}

impl ProblemKind {
    /// Number of state components.
    pub fn components(&self) -> usize {
        match self {
            ProblemKind::Advection => 1,
            ProblemKind::Acoustics => 2,
            ProblemKind::Euler1D => 3,
            ProblemKind::Euler2D => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BcSpec {
    /// Upstream data for advection.
    Inflow(Profile),
    Pressure(Profile),
    Nonreflecting,
    /// Acoustics: `φ_in = g(t) + s φ_out`.
    Reflection {
        s: f64,
        g: Profile,
    },
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Constant(Vec<f64>),
    /// `mean + amplitude sin(2π periods x / L)` componentwise.
    Sine {
        mean: Vec<f64>,
        amplitude: Vec<f64>,
        periods: f64,
    },
    /// `left` for `x < x0`, `right` otherwise.
    Step {
        x0: f64,
        left: Vec<f64>,
        right: Vec<f64>,
    },
}

impl InitialCondition {
    /// Values at `x` in the problem's natural variables.
    pub fn eval(&self, x: f64, length: f64) -> Vec<f64> {
        match self {
            InitialCondition::Constant(v) => v.clone(),
            InitialCondition::Sine {
                mean,
                amplitude,
                periods,
            } => {
                let s = (std::f64::consts::TAU * periods * x / length).sin();
                mean.iter().zip(amplitude).map(|(m, a)| m + a * s).collect()
            }
            InitialCondition::Step { x0, left, right } => {
                if x < *x0 {
                    left.clone()
                } else {
                    right.clone()
                }
            }
        }
    }

    fn width(&self) -> usize {
        match self {
            InitialCondition::Constant(v) => v.len(),
            InitialCondition::Sine { mean, .. } => mean.len(),
            InitialCondition::Step { left, .. } => left.len(),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("initial condition '{s}' has no kind prefix")))?;
        let parts: Vec<&str> = args.split(':').collect();
        let ic = match (kind.trim(), parts.as_slice()) {
            ("constant", [v]) => InitialCondition::Constant(parse_list(v)?),
            ("sine", [m, a, p]) => InitialCondition::Sine {
                mean: parse_list(m)?,
                amplitude: parse_list(a)?,
                periods: parse_f64(p)?,
            },
            ("step", [x0, l, r]) => InitialCondition::Step {
                x0: parse_f64(x0)?,
                left: parse_list(l)?,
                right: parse_list(r)?,
            },
            _ => {
                return Err(Error::Config(format!(
                    "initial condition '{s}' must be constant:<v>, sine:<mean>:<amp>:<periods> or step:<x0>:<left>:<right>"
                )))
            }
        };
        let consistent = match &ic {
            InitialCondition::Constant(_) => true,
            InitialCondition::Sine {
                mean, amplitude, ..
            } => mean.len() == amplitude.len(),
            InitialCondition::Step { left, right, .. } => left.len() == right.len(),
        };
        if !consistent {
            return Err(Error::Config(format!(
                "initial condition '{s}' mixes vector lengths"
            )));
        }
        Ok(ic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub problem: ProblemKind,
    pub gamma: f64,
    pub length: f64,
    pub cells: usize,
    pub mesh: Option<PathBuf>,
    pub cfl: f64,
    pub t_end: f64,
    pub fixed_dt: Option<f64>,
    pub order: u8,
    pub limiter: Limiter,
    pub time: TimeScheme,
    pub bc_left: BcSpec,
    pub bc_right: BcSpec,
    pub initial: InitialCondition,
    /// Advection speed `a`.
    pub speed: f64,
    pub rho0: f64,
    pub c0: f64,
    /// 2D inflow state `(ρ, u, v, p)`.
    pub inflow: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub snapshots: Vec<f64>,
    pub threads: Option<usize>,
}

const KEYS: &[&str] = &[
    "problem",
    "gamma",
    "length",
    "cells",
    "mesh",
    "cfl",
    "t_end",
    "fixed_dt",
    "order",
    "reconstruction",
    "limiter",
    "limiter_k",
    "time",
    "bc_left",
    "bc_right",
    "initial",
    "speed",
    "rho0",
    "c0",
    "inflow",
    "output",
    "snapshots",
    "threads",
];

fn parse_bc(s: &str, problem: ProblemKind, base: Option<&Path>) -> Result<BcSpec> {
    let (kind, args) = match s.split_once(':') {
        Some((k, a)) => (k.trim(), Some(a)),
        None => (s.trim(), None),
    };
    let bc = match (kind, args) {
        ("nonreflecting", None) => BcSpec::Nonreflecting,
        ("periodic", None) => BcSpec::Periodic,
        ("inflow", Some(a)) => BcSpec::Inflow(Profile::parse(a, base)?),
        ("pressure", Some(a)) => BcSpec::Pressure(Profile::parse(a, base)?),
        ("reflection", Some(a)) => {
            let (s, g) = a.split_once(':').ok_or_else(|| {
                Error::Config(format!("reflection needs '<s>:<profile>', got '{a}'"))
            })?;
            BcSpec::Reflection {
                s: parse_f64(s)?,
                g: Profile::parse(g, base)?,
            }
        }
        _ => {
            return Err(Error::Config(format!(
                "cannot parse boundary condition '{s}'"
            )))
        }
    };
    let allowed = match (&bc, problem) {
        (BcSpec::Nonreflecting, ProblemKind::Euler2D) => false,
        (BcSpec::Nonreflecting, _) => true,
        (BcSpec::Periodic, p) => p != ProblemKind::Euler2D,
        (BcSpec::Inflow(_), p) => p == ProblemKind::Advection,
        (BcSpec::Pressure(_), p) => matches!(p, ProblemKind::Acoustics | ProblemKind::Euler1D),
        (BcSpec::Reflection { .. }, p) => p == ProblemKind::Acoustics,
    };
    if !allowed {
        return Err(Error::Config(format!(
            "boundary condition '{s}' does not apply to this problem"
        )));
    }
    Ok(bc)
}

impl SolverConfig {
    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", no + 1)))?;
            let k = k.trim().to_string();
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key '{k}'", no + 1)));
            }
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{k}'",
                    no + 1
                )));
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let num = |k: &str| get(k).map(parse_f64).transpose();
        let require = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing key '{k}'")));
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        };

        let problem = match require("problem")? {
            "advection" => ProblemKind::Advection,
            "acoustics" => ProblemKind::Acoustics,
            "euler1d" => ProblemKind::Euler1D,
            "euler2d" => ProblemKind::Euler2D,
            other => return Err(Error::Config(format!("unknown problem '{other}'"))),
        };
        let order = match (get("order"), get("reconstruction")) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either order or reconstruction, not both".into(),
                ))
            }
            (Some("1"), None) | (None, Some("first")) | (None, None) => 1,
            (Some("2"), None) | (None, Some("second")) => 2,
            (Some(o), None) => {
                return Err(Error::Config(format!("order must be 1 or 2, got '{o}'")))
            }
            (None, Some(r)) => {
                return Err(Error::Config(format!(
                    "reconstruction must be first or second, got '{r}'"
                )))
            }
        };
        let limiter = match (get("limiter"), num("limiter_k")?) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either limiter or limiter_k, not both".into(),
                ))
            }
            (Some(l), None) => Limiter::parse(l)?,
            (None, Some(k)) if (0.5..=1.0).contains(&k) => Limiter::Family(k),
            (None, Some(k)) => {
                return Err(Error::Config(format!(
                    "limiter_k must lie in [0.5, 1], got {k}"
                )))
            }
            (None, None) => Limiter::sts(),
        };
        if problem == ProblemKind::Euler2D && order == 2 && limiter.k().is_none() {
            return Err(Error::Config(
                "2D reconstruction needs a limiter of the k family".into(),
            ));
        }
        let time = match get("time") {
            Some(t) => TimeScheme::parse(t)?,
            None if order == 2 => TimeScheme::Heun,
            None => TimeScheme::Euler,
        };
        let cfl = num("cfl")?.unwrap_or(if order == 2 { 0.45 } else { 0.9 });
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        let t_end = parse_f64(require("t_end")?)?;
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        let fixed_dt = num("fixed_dt")?;
        if let Some(dt) = fixed_dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!(
                    "fixed_dt must be positive, got {dt}"
                )));
            }
        }
        let gamma = num("gamma")?.unwrap_or(1.4);
        if !(gamma > 1.0) {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }

        let two_d = problem == ProblemKind::Euler2D;
        let (length, cells, mesh) = if two_d {
            if get("length").is_some() || get("cells").is_some() {
                return Err(Error::Config(
                    "euler2d takes a mesh, not length/cells".into(),
                ));
            }
            let mesh = resolve(require("mesh")?);
            if !mesh.is_file() {
                return Err(Error::Config(format!(
                    "mesh file {} does not exist",
                    mesh.display()
                )));
            }
            (0.0, 0, Some(mesh))
        } else {
            if get("mesh").is_some() {
                return Err(Error::Config("mesh applies to euler2d only".into()));
            }
            let length = num("length")?.unwrap_or(1.0);
            if !(length > 0.0) {
                return Err(Error::Config(format!(
                    "length must be positive, got {length}"
                )));
            }
            let cells: usize = require("cells")?
                .parse()
                .map_err(|_| Error::Config("cells must be a positive integer".into()))?;
            if cells < if order == 2 { 3 } else { 1 } {
                return Err(Error::Config(format!("too few cells: {cells}")));
            }
            (length, cells, None)
        };

        let (bc_left, bc_right) = if two_d {
            if get("bc_left").is_some() || get("bc_right").is_some() {
                return Err(Error::Config(
                    "euler2d boundaries come from the mesh markers".into(),
                ));
            }
            (BcSpec::Nonreflecting, BcSpec::Nonreflecting)
        } else {
            let l = parse_bc(require("bc_left")?, problem, base)?;
            let r = parse_bc(require("bc_right")?, problem, base)?;
            if (l == BcSpec::Periodic) != (r == BcSpec::Periodic) {
                return Err(Error::Config("periodic must be set on both sides".into()));
            }
            (l, r)
        };
        let check_positive = |bc: &BcSpec| match bc {
            BcSpec::Pressure(p) if problem == ProblemKind::Euler1D => {
                crate::boundary::check_profile_positive(p)
            }
            _ => Ok(()),
        };
        check_positive(&bc_left)?;
        check_positive(&bc_right)?;

        let initial = InitialCondition::parse(require("initial")?)?;
        if initial.width() != problem.components() {
            return Err(Error::Config(format!(
                "initial condition has {} components, the problem needs {}",
                initial.width(),
                problem.components()
            )));
        }
        let inflow = match get("inflow") {
            Some(s) if two_d => {
                let v = parse_list(s)?;
                if v.len() != 4 {
                    return Err(Error::Config("inflow needs rho,u,v,p".into()));
                }
                Some(v)
            }
            Some(_) => {
                return Err(Error::Config(
                    "inflow applies to euler2d only; use bc_left=inflow:<profile>".into(),
                ))
            }
            None => None,
        };
        let snapshots = match get("snapshots") {
            Some(s) if !s.is_empty() => {
                let mut v = parse_list(s)?;
                if v.iter().any(|t| !(*t > 0.0 && *t <= t_end)) {
                    return Err(Error::Config(
                        "snapshot times must lie in (0, t_end]".into(),
                    ));
                }
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
            _ => Vec::new(),
        };
        let threads = match get("threads") {
            Some(s) => Some(s.parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| {
                Error::Config(format!("threads must be a positive integer, got '{s}'"))
            })?),
            None => None,
        };
        Ok(SolverConfig {
            problem,
            gamma,
            length,
            cells,
            mesh,
            cfl,
            t_end,
            fixed_dt,
            order,
            limiter,
            time,
            bc_left,
            bc_right,
            initial,
            speed: num("speed")?.unwrap_or(1.0),
            rho0: num("rho0")?.unwrap_or(1.0),
            c0: num("c0")?.unwrap_or(1.0),
            inflow,
            output: get("output").map(resolve),
            snapshots,
            threads,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Snapshot times including `t_end`.
    pub fn targets(&self) -> Vec<f64> {
        let mut t = self.snapshots.clone();
        if t.last() != Some(&self.t_end) {
            t.push(self.t_end);
        }
        t
    }
}
