//! Run configuration shared by the surface subcommands.

use std::fs;

use anyhow::{bail, Context, Result};
use clap::Args;

use lsl::families::{build_family, FamilySpec, FamilyTag, LambdaSpec};
use lsl::space_form::SpaceForm;
use lsl::surface::{Grid, Immersion, LatticeChart, DEFAULT_FD_STEP, DEFAULT_TOL};

/// Smallest grid resolution accepted per axis.
pub const MIN_RESOLUTION: usize = 4;

#[derive(Args, Clone, Debug, Default)]
pub struct SurfaceArgs {
    /// r41, s41 or h41.
    #[arg(long)]
    pub space: Option<String>,
    /// i_lambda, j_lambda, i_c_lambda or j_c_lambda.
    #[arg(long)]
    pub family: Option<String>,
    /// zero, const:a, harmonic:NAME, fn:NAME, quad:c0,..,c5, sin:amp,freq, y:a1,a2,a3.
    #[arg(long, default_value = "zero", allow_hyphen_values = true)]
    pub lambda: String,
    /// Radius offset of `j_lambda` (default 1).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Height of the `i_c_lambda` and `j_c_lambda` spheres.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// `n`, `a,b,n` or `a1,b1,a2,b2,n1,n2`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Finite-difference step (default 1e-3).
    #[arg(long = "fd-step")]
    pub fd_step: Option<f64>,
    /// Flag tolerance (default 1e-5).
    #[arg(long)]
    pub tol: Option<f64>,
    /// JSON family spec, instead of the family flags.
    #[arg(long, conflicts_with_all = ["family", "chart"])]
    pub spec: Option<String>,
    /// JSON lattice chart, instead of a family.
    #[arg(long, conflicts_with = "family")]
    pub chart: Option<String>,
    /// Output file; meshes go to CSV when it ends in `.csv`.
    #[arg(long)]
    pub out: Option<String>,
}

/// A validated run: either a family member or a lattice chart.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub family: Option<FamilySpec>,
    pub chart: Option<LatticeChart>,
    pub grid: Option<Grid>,
    pub tol: f64,
    pub out: Option<String>,
}

pub fn check_fd_step(h: f64) -> Result<()> {
    if !(h > 1e-8 && h < 1e-1) {
        bail!("--fd-step {h:e} outside (1e-8, 1e-1)");
    }
    Ok(())
}

fn parse_grid(s: &str, default: Option<Grid>) -> Result<Grid> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad grid entry {t:?}")))
        .collect::<Result<_>>()?;
    let count = |x: f64| -> Result<usize> {
        if x.fract() != 0.0 || x < MIN_RESOLUTION as f64 {
            bail!("grid resolution {x} must be an integer of at least {MIN_RESOLUTION}");
        }
        Ok(x as usize)
    };
    let g = match v.as_slice() {
        [n] => {
            let n = count(*n)?;
            match default {
                Some(d) => Grid::new(d.x1, d.x2, [n, n])?,
                None => bail!("a bare resolution needs a family with a default domain"),
            }
        }
        [a, b, n] => Grid::square(*a, *b, count(*n)?)?,
        [a1, b1, a2, b2, n1, n2] => Grid::new([*a1, *b1], [*a2, *b2], [count(*n1)?, count(*n2)?])?,
        _ => bail!("grid must be `n`, `a,b,n` or `a1,b1,a2,b2,n1,n2`"),
    };
    Ok(g)
}

impl RunConfig {
    pub fn from_args(a: &SurfaceArgs) -> Result<Self> {
        let fd_step = a.fd_step.unwrap_or(DEFAULT_FD_STEP);
        check_fd_step(fd_step)?;
        let tol = a.tol.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0) {
            bail!("--tol {tol:e} must be positive");
        }
        let mut family = None;
        let mut chart = None;
        if let Some(path) = &a.spec {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let spec: FamilySpec = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
            family = Some(spec);
        } else if let Some(path) = &a.chart {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let lat: LatticeChart = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
            lat.validate()?;
            chart = Some(lat);
        } else {
            let Some(space) = &a.space else { bail!("--space is required") };
            let Some(fam) = &a.family else { bail!("--family, --spec or --chart is required") };
            let space: SpaceForm = space.parse()?;
            let tag: FamilyTag = fam.parse()?;
            let lambda: LambdaSpec = a.lambda.parse()?;
            let mut spec = FamilySpec::new(space, tag, lambda);
            if let Some(t) = a.theta {
                spec = spec.with_theta(t);
            }
            if let Some(c) = a.c {
                spec = spec.with_c(c);
            }
            family = Some(spec);
        }
        if let Some(spec) = &mut family {
            if a.space.as_deref().is_some_and(|s| s != spec.space.tag()) {
                bail!("--space disagrees with the family spec");
            }
            spec.validate()?;
            if a.fd_step.is_some() || spec.fd_step.is_none() {
                *spec = spec.clone().with_fd_step(fd_step);
            }
        }
        let default = match (&family, &chart) {
            (Some(s), _) => Some(s.grid()?),
            (_, Some(l)) => Some(l.interior_grid()?),
            _ => None,
        };
        let grid = a.grid.as_deref().map(|g| parse_grid(g, default)).transpose()?;
        if let Some(g) = grid {
            if g.n[0] < MIN_RESOLUTION || g.n[1] < MIN_RESOLUTION {
                bail!("grid resolution {:?} below {MIN_RESOLUTION}", g.n);
            }
        }
        if let (Some(spec), Some(g)) = (&mut family, grid) {
            *spec = spec.clone().with_grid(g);
        }
        Ok(RunConfig { family, chart, grid, tol, out: a.out.clone() })
    }

    pub fn immersion(&self) -> Result<Immersion> {
        let imm = match (&self.family, &self.chart) {
            (Some(spec), _) => build_family(spec)?,
            (_, Some(lat)) => {
                let imm = Immersion::from_lattice(lat.clone())?;
                match self.grid {
                    Some(g) => imm.with_grid(g)?,
                    None => imm,
                }
            }
            _ => bail!("no surface source"),
        };
        Ok(imm)
    }
}

/// Caps the worker pool at `LSL_THREADS` when set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("LSL_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().with_context(|| format!("LSL_THREADS={v:?} is not a thread count"))?;
    if n == 0 {
        bail!("LSL_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(space: &str, family: &str) -> SurfaceArgs {
        SurfaceArgs { space: Some(space.into()), family: Some(family.into()), lambda: "zero".into(), ..Default::default() }
    }

    #[test]
    fn grid_forms() {
        let d = Grid::square(-1.0, 1.0, 64).unwrap();
        assert_eq!(parse_grid("8", Some(d)).unwrap().n, [8, 8]);
        assert_eq!(parse_grid("0,1,5", None).unwrap().x1, [0.0, 1.0]);
        assert_eq!(parse_grid("0,1,-1,1,4,6", None).unwrap().n, [4, 6]);
        assert!(parse_grid("3", Some(d)).is_err());
        assert!(parse_grid("0,1", None).is_err());
        assert!(parse_grid("4.5", Some(d)).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::from_args(&args("r41", "i_lambda")).is_ok());
        assert!(RunConfig::from_args(&args("s41", "j?")).is_err());
        assert!(RunConfig::from_args(&args("x41", "i_lambda")).is_err());
        let mut a = args("r41", "i_lambda");
        a.fd_step = Some(0.5);
        assert!(RunConfig::from_args(&a).is_err());
        let mut a = args("r41", "i_lambda");
        a.tol = Some(0.0);
        assert!(RunConfig::from_args(&a).is_err());
    }
}
