//! Time-dependent scalar data: imposed pressures and inflow traces.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `p0 + amplitude * sin(2π frequency t)`.
    Sine {
        p0: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Piecewise linear through `(t, value)` samples, held constant outside.
    Table(Vec<(f64, f64)>),
}

impl Profile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Sine {
                p0,
                amplitude,
                frequency,
            } => p0 + amplitude * (std::f64::consts::TAU * frequency * t).sin(),
            Profile::Table(rows) => interpolate(rows, t),
        }
    }

    /// Parses `constant:<v>`, `sine:<p0>,<amp>,<freq>` or `table:<path>`.
    /// Relative table paths are resolved against `base`.
    pub fn parse(spec: &str, base: Option<&Path>) -> Result<Profile> {
        let (kind, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("profile '{spec}' has no kind prefix")))?;
        match kind.trim() {
            "constant" => Ok(Profile::Constant(parse_f64(args)?)),
            "sine" => {
                let v = parse_list(args)?;
                if v.len() != 3 {
                    return Err(Error::Config(format!(
                        "sine profile needs p0,amplitude,frequency, got '{args}'"
                    )));
                }
                Ok(Profile::Sine {
                    p0: v[0],
                    amplitude: v[1],
                    frequency: v[2],
                })
            }
            "table" => {
                let path = Path::new(args.trim());
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.to_path_buf(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::Config(format!("cannot read table {}: {e}", path.display()))
                })?;
                Profile::table_from_str(&text)
            }
            other => Err(Error::Config(format!("unknown profile kind '{other}'"))),
        }
    }

    pub fn table_from_str(text: &str) -> Result<Profile> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Config(format!(
                    "table row '{line}' needs two columns"
                )));
            }
            rows.push((parse_f64(cols[0])?, parse_f64(cols[1])?));
        }
        if rows.is_empty() {
            return Err(Error::Config("empty profile table".into()));
        }
        if rows.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Config("profile table times must increase".into()));
        }
        Ok(Profile::Table(rows))
    }

    /// Smallest value the profile can take, used to validate imposed pressures.
    pub fn lower_bound(&self) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Sine { p0, amplitude, .. } => p0 - amplitude.abs(),
            Profile::Table(rows) => rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        }
    }
}

fn interpolate(rows: &[(f64, f64)], t: f64) -> f64 {
    let i = rows.partition_point(|r| r.0 <= t);
    if i == 0 {
        rows[0].1
    } else if i == rows.len() {
        rows[rows.len() - 1].1
    } else {
        let (t0, v0) = rows[i - 1];
        let (t1, v1) = rows[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("'{}' is not a number", s.trim())))
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        assert_eq!(Profile::parse("constant:2.5", None).unwrap().eval(9.0), 2.5);
        let s = Profile::parse("sine:1,0.1,0.25", None).unwrap();
        assert!((s.eval(1.0) - 1.1).abs() < 1e-15);
        assert!((s.lower_bound() - 0.9).abs() < 1e-15);
        assert!(Profile::parse("cosine:1", None).is_err());
        assert!(Profile::parse("sine:1,2", None).is_err());
        assert!(Profile::parse("constant:x", None).is_err());
    }

    #[test]
    fn table_interpolation() {
        let p = Profile::table_from_str("# t p\n0 1\n1 3\n2, 2\n").unwrap();
        assert_eq!(p.eval(-1.0), 1.0);
        assert_eq!(p.eval(0.5), 2.0);
        assert_eq!(p.eval(1.0), 3.0);
        assert_eq!(p.eval(1.5), 2.5);
        assert_eq!(p.eval(5.0), 2.0);
        assert_eq!(p.lower_bound(), 1.0);
        assert!(Profile::table_from_str("0 1\n0 2").is_err());
        assert!(Profile::table_from_str("").is_err());
    }

    #[test]
    fn table_from_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("pi.txt"), "0 1\n10 2\n").unwrap();
        let p = Profile::parse("table:pi.txt", Some(dir.path())).unwrap();
        assert_eq!(p.eval(5.0), 1.5);
        assert!(Profile::parse("table:missing.txt", Some(dir.path())).is_err());
    }
}
