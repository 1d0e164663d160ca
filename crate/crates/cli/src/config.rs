use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use dispersio::par::Execution;

use crate::error::{CliError, CliResult};
use crate::potfile::PotentialSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Associativity, metric and quasi-homogeneity of a potential.
    Wdvv,
    /// Densities h_{a,p} of the principal hierarchy.
    Hierarchy,
    /// Pairwise commutativity of the Hamiltonians.
    Commute,
    /// Second bracket and flatness of the pencil.
    Pencil,
    /// Bihamiltonian recursion for the KdV Riccati Casimirs.
    Magri,
    /// Riccati expansion of the dispersive KdV pencil.
    Riccati,
    /// Normal coordinates and Casimirs of the Toda brackets.
    TodaNormal,
    /// The KdV quasi-Miura transformation.
    Quasimiura,
    /// Delta-function bracket against the Fourier mode bracket.
    FourierCrosscheck,
    /// Lifts of hierarchy densities to the mode algebra.
    SftLift,
    /// Hodograph solution of one flow.
    Hodograph,
    /// Tau-function identities on the topological solution.
    Tau,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Wdvv => "wdvv",
            Command::Hierarchy => "hierarchy",
            Command::Commute => "commute",
            Command::Pencil => "pencil",
            Command::Magri => "magri",
            Command::Riccati => "riccati",
            Command::TodaNormal => "toda-normal",
            Command::Quasimiura => "quasimiura",
            Command::FourierCrosscheck => "fourier-crosscheck",
            Command::SftLift => "sft-lift",
            Command::Hodograph => "hodograph",
            Command::Tau => "tau",
        }
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct RunConfig {
    /// Potential file.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    pub potential: Option<PathBuf>,
    /// Built-in potential: point or p1.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Report path (default: <command>.json); artifacts are written next to it.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Format of grid artifacts.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, value_name = "N", allow_negative_numbers = true)]
    pub pmax: Option<i64>,
    #[arg(long = "eps-order", visible_alias = "order", global = true, value_name = "N")]
    pub eps_order: Option<u32>,
    #[arg(long = "lambda-order", global = true, value_name = "N")]
    pub lambda_order: Option<usize>,
    /// Mode cutoff K.
    #[arg(long, global = true, value_name = "K")]
    pub modes: Option<u32>,
    /// Degree cutoff D.
    #[arg(long, global = true, value_name = "D")]
    pub degree: Option<u32>,
    /// Grid "x0:x1:nx,t0:t1:nt".
    #[arg(long, global = true, value_name = "SPEC", allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol: Option<f64>,
    /// Expected densities to compare against.
    #[arg(long, global = true, value_name = "PATH")]
    pub golden: Option<PathBuf>,
    /// Active time "a,p" (1-based a).
    #[arg(long, global = true, value_name = "A,P")]
    pub time: Option<String>,
    /// Add the cube of the last coordinate to h_{a,p} ("a,p", 1-based a).
    #[arg(long, global = true, value_name = "A,P")]
    pub corrupt: Option<String>,
    /// Run the library on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

impl RunConfig {
    pub fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("--eps-order", self.eps_order.map(|v| v as i64)),
            ("--lambda-order", self.lambda_order.map(|v| v as i64)),
            ("--modes", self.modes.map(i64::from)),
            ("--degree", self.degree.map(i64::from)),
        ];
        for (flag, v) in positive {
            if v.is_some_and(|v| v < 1) {
                return Err(CliError::Input(format!("{flag} must be at least 1")));
            }
        }
        if self.pmax.is_some_and(|p| p < 0) {
            return Err(CliError::Input("--pmax must be nonnegative".into()));
        }
        if self.tol.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(CliError::Input("--tol must be a positive number".into()));
        }
        Ok(())
    }

    pub fn spec(&self, default_preset: &str) -> CliResult<PotentialSpec> {
        match (&self.potential, &self.preset) {
            (Some(p), _) => PotentialSpec::load(p),
            (None, Some(name)) => PotentialSpec::preset(name),
            (None, None) => PotentialSpec::preset(default_preset),
        }
    }
}

/// `"a,p"` with 1-based `a`, returned zero-based.
pub fn parse_time(s: &str, n: usize) -> CliResult<(usize, i64)> {
    let bad = || CliError::Input(format!("expected \"a,p\" with 1 <= a <= {n} and p >= 0, got '{s}'"));
    let (a, p) = s.split_once(',').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let p: i64 = p.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > n || p < 0 {
        return Err(bad());
    }
    Ok((a - 1, p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub x: (f64, f64, usize),
    pub t: (f64, f64, usize),
}

pub fn parse_grid(s: &str) -> CliResult<GridSpec> {
    let bad = |why: &str| CliError::Input(format!("grid '{s}': {why}"));
    let axis = |part: &str| -> CliResult<(f64, f64, usize)> {
        let f: Vec<&str> = part.split(':').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad("expected x0:x1:nx,t0:t1:nt"));
        }
        let a: f64 = f[0].parse().map_err(|_| bad("bad bound"))?;
        let b: f64 = f[1].parse().map_err(|_| bad("bad bound"))?;
        let k: usize = f[2].parse().map_err(|_| bad("bad sample count"))?;
        if !(a.is_finite() && b.is_finite()) || k < 1 || (k > 1 && !(b > a)) {
            return Err(bad("need finite bounds with x0 < x1 and at least one sample"));
        }
        Ok((a, b, k))
    };
    let (xs, ts) = s.split_once(',').ok_or_else(|| bad("expected two axes"))?;
    Ok(GridSpec { x: axis(xs)?, t: axis(ts)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_time() {
        let g = parse_grid("-1:1:101,0:0.3:7").unwrap();
        assert_eq!(g.x, (-1.0, 1.0, 101));
        assert_eq!(g.t, (0.0, 0.3, 7));
        assert!(parse_grid("1:0:5,0:1:3").is_err());
        assert!(parse_grid("0:1:5").is_err());
        assert_eq!(parse_time("1,1", 1).unwrap(), (0, 1));
        assert!(parse_time("2,1", 1).is_err());
        assert!(parse_time("1,-1", 1).is_err());
    }
}
