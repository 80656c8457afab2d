use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use tpoly_core::lattice::{Point, Triangle};

use crate::error::CliError;

/// Environment variable that sets the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "TPOLY_WORKERS";

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct CommonArgs {
    /// Side of the isosceles triangle with vertices (d,0), (0,d).
    #[arg(long, conflicts_with_all = ["p1", "p2"])]
    pub d: Option<i64>,
    /// First vertex of a general triangle, as `a,b`.
    #[arg(long, value_parser = parse_point, requires = "p2")]
    pub p1: Option<Point>,
    /// Second vertex of a general triangle, as `a,b`.
    #[arg(long, value_parser = parse_point, requires = "p1")]
    pub p2: Option<Point>,
    /// Prime p, not dividing the triangle's determinant
    #[arg(long)]
    pub p: i64,
    /// T-adic precision N: series are kept modulo T^N.
    #[arg(long, default_value_t = 30)]
    pub tprec: usize,
    /// p-adic precision M: coefficients are kept modulo p^M.
    #[arg(long = "ring-m", default_value_t = 2)]
    pub ring_m: u32,
    /// Degree n of F_q over F_p for the polynomial coefficients.
    #[arg(long = "ext-n", default_value_t = 1)]
    pub ext_n: usize,
    /// Largest polygon abscissa to compute.
    #[arg(long)]
    pub lmax: Option<usize>,
    /// Largest level k for T_k based checks.
    #[arg(long, default_value_t = 3)]
    pub kmax: i64,
    /// Number of random polynomials or multisets per randomized check.
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// Seed for every randomized choice; equal seeds give identical output
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Refuse special-bijection enumeration above this permanent bound.
    #[arg(long, default_value_t = 1 << 20)]
    pub budget: u64,
    /// Worker threads; falls back to TPOLY_WORKERS, then to the core count.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write the JSON (or SVG) result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(Point::new(parse(a)?, parse(b)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Isosceles { d: i64 },
    General { p1: Point, p2: Point },
}

/// A validated run configuration.  The worker count and output path are
/// left out of the serialized form, since neither may change a result.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub shape: Shape,
    pub p: i64,
    pub tprec: usize,
    pub ring_m: u32,
    pub ext_n: usize,
    pub lmax: Option<usize>,
    pub kmax: i64,
    pub trials: usize,
    pub seed: u64,
    pub budget: u64,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Validate `args`; `env_workers` is the raw value of `TPOLY_WORKERS`.
    pub fn from_args(args: &CommonArgs, env_workers: Option<&str>) -> Result<Self, CliError> {
        let shape = match (args.d, args.p1, args.p2) {
            (Some(d), None, None) => Shape::Isosceles { d },
            (None, Some(p1), Some(p2)) => Shape::General { p1, p2 },
            _ => return Err(CliError::Config("give either --d or both --p1 and --p2".into())),
        };
        let workers = match (args.workers, env_workers) {
            (Some(w), _) => w,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{WORKERS_ENV}={s} is not a positive integer")))?,
            (None, None) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        if workers == 0 {
            return Err(CliError::Config("worker count must be positive".into()));
        }
        if args.ext_n == 0 || args.ring_m == 0 || args.tprec == 0 {
            return Err(CliError::Config("--ext-n, --ring-m and --tprec must be positive".into()));
        }
        if args.kmax < 1 {
            return Err(CliError::Config("--kmax must be at least 1".into()));
        }
        let cfg = RunConfig {
            shape,
            p: args.p,
            tprec: args.tprec,
            ring_m: args.ring_m,
            ext_n: args.ext_n,
            lmax: args.lmax,
            kmax: args.kmax,
            trials: args.trials,
            seed: args.seed,
            budget: args.budget,
            workers,
            out: args.out.clone(),
        };
        cfg.triangle()?.check_prime(cfg.p)?;
        Ok(cfg)
    }

    /// A configuration with defaults for the isosceles triangle of side `d`.
    pub fn isosceles(d: i64, p: i64) -> Result<Self, CliError> {
        let cfg = RunConfig {
            shape: Shape::Isosceles { d },
            p,
            tprec: 30,
            ring_m: 2,
            ext_n: 1,
            lmax: None,
            kmax: 3,
            trials: 3,
            seed: 1,
            budget: 1 << 20,
            workers: 1,
            out: None,
        };
        cfg.triangle()?.check_prime(p)?;
        Ok(cfg)
    }

    pub fn triangle(&self) -> Result<Triangle, CliError> {
        Ok(match self.shape {
            Shape::Isosceles { d } => Triangle::isosceles(d)?,
            Shape::General { p1, p2 } => Triangle::new(p1, p2)?,
        })
    }

    pub fn side(&self) -> Option<i64> {
        match self.shape {
            Shape::Isosceles { d } => Some(d),
            Shape::General { .. } => None,
        }
    }

    pub fn require_side(&self) -> Result<i64, CliError> {
        self.side().ok_or_else(|| CliError::Config("this command needs the isosceles triangle (--d)".into()))
    }

    /// Run `f` on a dedicated pool with `workers` threads.
    pub fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(self.workers).build()?;
        Ok(pool.install(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Parser)]
    struct Wrap {
        #[command(flatten)]
        common: CommonArgs,
    }

    fn parse(args: &[&str]) -> CommonArgs {
        Wrap::try_parse_from(std::iter::once("t").chain(args.iter().copied())).unwrap().common
    }

    #[test]
    fn workers_precedence() {
        let a = parse(&["--d", "7", "--p", "17"]);
        assert_eq!(RunConfig::from_args(&a, Some("8")).unwrap().workers, 8);
        let a = parse(&["--d", "7", "--p", "17", "--workers", "2"]);
        assert_eq!(RunConfig::from_args(&a, Some("8")).unwrap().workers, 2);
        assert!(RunConfig::from_args(&parse(&["--d", "7", "--p", "17"]), Some("x")).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(RunConfig::from_args(&parse(&["--d", "7", "--p", "15"]), None).is_err());
        assert!(RunConfig::from_args(&parse(&["--d", "7", "--p", "7"]), None).is_err());
        assert!(RunConfig::from_args(&parse(&["--p", "7"]), None).is_err());
        let g = parse(&["--p1", "1,3", "--p2", "2,1", "--p", "7"]);
        let cfg = RunConfig::from_args(&g, None).unwrap();
        assert_eq!(cfg.shape, Shape::General { p1: Point::new(1, 3), p2: Point::new(2, 1) });
        assert!(Wrap::try_parse_from(["t", "--d", "3", "--p1", "1,3", "--p2", "2,1", "--p", "7"]).is_err());
    }

    #[test]
    fn serialized_config_omits_workers() {
        let mut cfg = RunConfig::isosceles(7, 17).unwrap();
        let a = serde_json::to_string(&cfg).unwrap();
        cfg.workers = 8;
        assert_eq!(a, serde_json::to_string(&cfg).unwrap());
        assert!(!a.contains("workers"));
    }
}
