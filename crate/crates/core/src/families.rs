//! Explicit semi-umbilic surface families in the three space forms and the
//! deformation of umbilic surfaces along their positive null normals.
//!
//! | space | tag | domain | chart |
//! |---|---|---|---|
//! | `r41` | `i_lambda` | plane | `(λ, λ, z₁, z₂)` |
//! | `r41` | `j_lambda` | sphere | `(λ, (λ+θ)y)` |
//! | `s41` | `i_lambda`, `i_c_lambda` | sphere | `(λ, λ√(1-c²)+c, (√(1-c²)-λc)y)` |
//! | `h41` | `i_lambda` | disk | `(y₁, λ, λ, y₂, y₃)` |
//! | `h41` | `j_c_lambda` | sphere | `(λ, λ√(c²-1)+c, (√(c²-1)+λc)y)` |
//!
//! `i_lambda` in `s41` is the `c = 0` member of `i_c_lambda`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{MVec, NullDir};
use crate::space_form::{stereographic_inverse, SpaceForm};
use crate::surface::{bochner_laplace, classify, Chart, Grid, Immersion, LatticeChart, DEFAULT_FD_STEP};

/// Default resolution of family grids.
pub const DEFAULT_RESOLUTION: usize = 64;

/// Conformal charts of the model surfaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSurface {
    /// `y = (z₁, z₂, 0)`, `F = 1`.
    Plane,
    /// `y = (2z₁, 2z₂, 1-|z|²)/(1+|z|²)`, `F = 4/(1+|z|²)²`.
    SphereOut,
    /// `y = (|z|²-1, 2z₁, 2z₂)/(1+|z|²)`, `F = 4/(1+|z|²)²`; the chart of
    /// inverse stereographic projection.
    SphereIn,
    /// `y = (1+|z|², 2z₁, 2z₂)/(1-|z|²)` on the unit disk, `F = 4/(1-|z|²)²`.
    HyperbolicDisk,
}

impl ModelSurface {
    pub fn point(&self, z: [f64; 2]) -> [f64; 3] {
        let r2 = z[0] * z[0] + z[1] * z[1];
        match self {
            ModelSurface::Plane => [z[0], z[1], 0.0],
            ModelSurface::SphereOut => {
                let d = 1.0 + r2;
                [2.0 * z[0] / d, 2.0 * z[1] / d, (1.0 - r2) / d]
            }
            ModelSurface::SphereIn => {
                let d = 1.0 + r2;
                [(r2 - 1.0) / d, 2.0 * z[0] / d, 2.0 * z[1] / d]
            }
            ModelSurface::HyperbolicDisk => {
                let d = 1.0 - r2;
                [(1.0 + r2) / d, 2.0 * z[0] / d, 2.0 * z[1] / d]
            }
        }
    }

    /// Conformal factor `F` of the round metric in the chart.
    pub fn factor(&self, z: [f64; 2]) -> f64 {
        let r2 = z[0] * z[0] + z[1] * z[1];
        match self {
            ModelSurface::Plane => 1.0,
            ModelSurface::SphereOut | ModelSurface::SphereIn => 4.0 / ((1.0 + r2) * (1.0 + r2)),
            ModelSurface::HyperbolicDisk if r2 < 1.0 => 4.0 / ((1.0 - r2) * (1.0 - r2)),
            ModelSurface::HyperbolicDisk => f64::NAN,
        }
    }

    pub fn default_grid(&self, n: usize) -> Result<Grid> {
        match self {
            ModelSurface::HyperbolicDisk => Grid::square(-0.4, 0.4, n),
            _ => Grid::square(-1.0, 1.0, n),
        }
    }
}

/// The harmonic built-ins, in `z`.
const HARMONIC: [&str; 4] = ["z1^2-z2^2", "z1*z2", "z1^3-3z1z2^2", "exp(z1)cos(z2)"];
/// Other named built-ins, in `z`.
const POLY: [&str; 4] = ["z1^2", "z1^2+z2^2", "z1", "sin(z1)"];

fn named(name: &str, z: [f64; 2]) -> f64 {
    let [a, b] = z;
    match name {
        "z1^2-z2^2" => a * a - b * b,
        "z1*z2" => a * b,
        "z1^3-3z1z2^2" => a * a * a - 3.0 * a * b * b,
        "exp(z1)cos(z2)" => a.exp() * b.cos(),
        "z1^2" => a * a,
        "z1^2+z2^2" => a * a + b * b,
        "z1" => a,
        "sin(z1)" => a.sin(),
        _ => f64::NAN,
    }
}

/// A scalar function `λ` on a model surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSpec {
    Zero,
    Const {
        value: f64,
    },
    /// One of the named built-ins, a function of the chart coordinates.
    Named {
        name: String,
    },
    /// `c₀ + c₁z₁ + c₂z₂ + c₃z₁² + c₄z₁z₂ + c₅z₂²`.
    Quad {
        c: [f64; 6],
    },
    /// `amp·sin(freq·z₁)`.
    Sine {
        amp: f64,
        freq: f64,
    },
    /// `a·y`, a linear function of the model point. On the sphere these are
    /// the eigenfunctions of eigenvalue `-2`, on the hyperboloid those of
    /// eigenvalue `2`.
    Linear {
        a: [f64; 3],
    },
    /// `c₀ + lin·y + Σ quad·yy + amp·sin(freq·y + phase)` with `quad` over
    /// `(y₁², y₂², y₃², y₁y₂, y₁y₃, y₂y₃)`.
    Smooth {
        c0: f64,
        lin: [f64; 3],
        quad: [f64; 6],
        amp: f64,
        freq: [f64; 3],
        phase: f64,
    },
    /// Values on a lattice of chart coordinates, second index fastest.
    Lattice {
        origin: [f64; 2],
        spacing: [f64; 2],
        shape: [usize; 2],
        values: Vec<f64>,
    },
}

impl LambdaSpec {
    /// `λ` at chart point `z` whose model point is `y`. Lattices are only
    /// defined on their nodes and give NaN elsewhere.
    pub fn eval(&self, z: [f64; 2], y: [f64; 3]) -> f64 {
        match self {
            LambdaSpec::Zero => 0.0,
            LambdaSpec::Const { value } => *value,
            LambdaSpec::Named { name } => named(name, z),
            LambdaSpec::Quad { c } => {
                c[0] + c[1] * z[0] + c[2] * z[1] + c[3] * z[0] * z[0] + c[4] * z[0] * z[1] + c[5] * z[1] * z[1]
            }
            LambdaSpec::Sine { amp, freq } => amp * (freq * z[0]).sin(),
            LambdaSpec::Linear { a } => a[0] * y[0] + a[1] * y[1] + a[2] * y[2],
            LambdaSpec::Smooth { c0, lin, quad, amp, freq, phase } => {
                let q = [y[0] * y[0], y[1] * y[1], y[2] * y[2], y[0] * y[1], y[0] * y[2], y[1] * y[2]];
                let dot3 = |u: &[f64; 3]| u[0] * y[0] + u[1] * y[1] + u[2] * y[2];
                c0 + dot3(lin) + quad.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() + amp * (dot3(freq) + phase).sin()
            }
            LambdaSpec::Lattice { origin, spacing, shape, values } => {
                let mut idx = [0usize; 2];
                for a in 0..2 {
                    let t = (z[a] - origin[a]) / spacing[a];
                    let r = t.round();
                    if (t - r).abs() > 1e-6 || r < 0.0 || r >= shape[a] as f64 {
                        return f64::NAN;
                    }
                    idx[a] = r as usize;
                }
                values[idx[0] * shape[1] + idx[1]]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match self {
            LambdaSpec::Zero => true,
            LambdaSpec::Const { value } => value.is_finite(),
            LambdaSpec::Named { name } => {
                if !HARMONIC.contains(&name.as_str()) && !POLY.contains(&name.as_str()) {
                    return Err(Error::Config(format!("unknown built-in function {name:?}")));
                }
                true
            }
            LambdaSpec::Quad { c } => finite(c),
            LambdaSpec::Sine { amp, freq } => finite(&[*amp, *freq]),
            LambdaSpec::Linear { a } => finite(a),
            LambdaSpec::Smooth { c0, lin, quad, amp, freq, phase } => {
                finite(&[*c0, *amp, *phase]) && finite(lin) && finite(quad) && finite(freq)
            }
            LambdaSpec::Lattice { origin, spacing, shape, values } => {
                if shape[0] < 3 || shape[1] < 3 || values.len() != shape[0] * shape[1] {
                    return Err(Error::Config(format!(
                        "lattice of shape {shape:?} needs at least 3 nodes per axis and {} values, got {}",
                        shape[0] * shape[1],
                        values.len()
                    )));
                }
                if !(spacing[0] > 0.0 && (spacing[0] - spacing[1]).abs() <= 1e-12 * spacing[0]) {
                    return Err(Error::Config("lattice spacing must be positive and equal on both axes".into()));
                }
                finite(origin) && finite(values)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("function parameters must be finite".into()))
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, LambdaSpec::Lattice { .. })
    }

    /// A random smooth function of moderate size.
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut u = |a: f64| rng.gen_range(-a..=a);
        LambdaSpec::Smooth {
            c0: u(0.1),
            lin: [u(0.15), u(0.15), u(0.15)],
            quad: [u(0.1), u(0.1), u(0.1), u(0.1), u(0.1), u(0.1)],
            amp: u(0.1),
            freq: [u(1.0), u(1.0), u(1.0)],
            phase: u(PI),
        }
    }
}

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    v.try_into().map_err(|v: Vec<f64>| Error::Config(format!("expected {N} numbers, got {}", v.len())))
}

impl FromStr for LambdaSpec {
    type Err = Error;

    /// Forms: `zero`, `const:a`, `harmonic:<name>`, `fn:<name>`,
    /// `quad:c0,c1,c2,c3,c4,c5`, `sin:amp,freq`, `y:a1,a2,a3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let spec = match head {
            "zero" if rest.is_empty() => LambdaSpec::Zero,
            "const" => LambdaSpec::Const { value: parse_list::<1>(rest)?[0] },
            "harmonic" => {
                if !HARMONIC.contains(&rest) {
                    return Err(Error::Config(format!("{rest:?} is not a harmonic built-in; known: {HARMONIC:?}")));
                }
                LambdaSpec::Named { name: rest.into() }
            }
            "fn" | "poly" => {
                if !POLY.contains(&rest) && !HARMONIC.contains(&rest) {
                    return Err(Error::Config(format!("unknown built-in {rest:?}; known: {POLY:?} {HARMONIC:?}")));
                }
                LambdaSpec::Named { name: rest.into() }
            }
            "quad" => LambdaSpec::Quad { c: parse_list(rest)? },
            "sin" => {
                let [amp, freq] = parse_list(rest)?;
                LambdaSpec::Sine { amp, freq }
            }
            "y" => LambdaSpec::Linear { a: parse_list(rest)? },
            _ => return Err(Error::Config(format!("cannot parse function {s:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSpec::Zero => write!(f, "zero"),
            LambdaSpec::Const { value } => write!(f, "const:{value}"),
            LambdaSpec::Named { name } if HARMONIC.contains(&name.as_str()) => write!(f, "harmonic:{name}"),
            LambdaSpec::Named { name } => write!(f, "fn:{name}"),
            LambdaSpec::Quad { c } => {
                write!(f, "quad:{},{},{},{},{},{}", c[0], c[1], c[2], c[3], c[4], c[5])
            }
            LambdaSpec::Sine { amp, freq } => write!(f, "sin:{amp},{freq}"),
            LambdaSpec::Linear { a } => write!(f, "y:{},{},{}", a[0], a[1], a[2]),
            LambdaSpec::Smooth { .. } => write!(f, "smooth"),
            LambdaSpec::Lattice { shape, .. } => write!(f, "lattice:{}x{}", shape[0], shape[1]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    ILambda,
    JLambda,
    ICLambda,
    JCLambda,
}

impl FamilyTag {
    pub fn tag(&self) -> &'static str {
        match self {
            FamilyTag::ILambda => "i_lambda",
            FamilyTag::JLambda => "j_lambda",
            FamilyTag::ICLambda => "i_c_lambda",
            FamilyTag::JCLambda => "j_c_lambda",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i_lambda" => Ok(FamilyTag::ILambda),
            "j_lambda" => Ok(FamilyTag::JLambda),
            "i_c_lambda" => Ok(FamilyTag::ICLambda),
            "j_c_lambda" => Ok(FamilyTag::JCLambda),
            _ => Err(Error::Config(format!("unknown family {s:?}"))),
        }
    }
}

/// A member of one of the families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub space: SpaceForm,
    pub family: FamilyTag,
    pub lambda: LambdaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Defaults to the model surface grid at resolution 64.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

/// Fully resolved family data.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    PlaneGraph,
    ConeSphere { theta: f64 },
    DeSitterSphere { c: f64 },
    AdsDisk,
    AdsSphere { c: f64 },
}

impl FamilySpec {
    pub fn new(space: SpaceForm, family: FamilyTag, lambda: LambdaSpec) -> Self {
        FamilySpec { space, family, lambda, theta: None, c: None, grid: None, fd_step: None }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = Some(h);
        self
    }

    fn kind(&self) -> Result<Kind> {
        use FamilyTag::*;
        use SpaceForm::*;
        let unused = |name: &str, v: Option<f64>| match v {
            Some(_) => Err(Error::Config(format!("{} in {} takes no {name} parameter", self.family, self.space))),
            None => Ok(()),
        };
        match (self.space, self.family) {
            (Minkowski, ILambda) => {
                unused("theta", self.theta)?;
                unused("c", self.c)?;
                Ok(Kind::PlaneGraph)
            }
            (Minkowski, JLambda) => {
                unused("c", self.c)?;
                let theta = self.theta.unwrap_or(1.0);
                if !(theta > 0.0 && theta.is_finite()) {
                    return Err(Error::Config(format!("theta = {theta} must be positive")));
                }
                Ok(Kind::ConeSphere { theta })
            }
            (PseudoSphere, ILambda) | (PseudoSphere, ICLambda) => {
                unused("theta", self.theta)?;
                let c = self.c.unwrap_or(0.0);
                if self.family == ILambda && c != 0.0 {
                    return Err(Error::Config("i_lambda in s41 is the c = 0 member; use i_c_lambda".into()));
                }
                if !(c.abs() <= 1.0) {
                    return Err(Error::Config(format!("c = {c} must satisfy |c| <= 1")));
                }
                Ok(Kind::DeSitterSphere { c })
            }
            (PseudoHyperbolic, ILambda) => {
                unused("theta", self.theta)?;
                unused("c", self.c)?;
                Ok(Kind::AdsDisk)
            }
            (PseudoHyperbolic, JCLambda) => {
                unused("theta", self.theta)?;
                let c = self.c.unwrap_or(2.0);
                if !(c >= 1.0 && c.is_finite()) {
                    return Err(Error::Config(format!("c = {c} must satisfy c >= 1")));
                }
                Ok(Kind::AdsSphere { c })
            }
            (s, f) => Err(Error::Config(format!("family {f} does not exist in {s}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind()?;
        self.lambda.validate()?;
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        if let Some(h) = self.fd_step {
            if !(h > 1e-8 && h < 1e-1) {
                return Err(Error::Config(format!("fd_step {h:e} outside (1e-8, 1e-1)")));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ModelSurface> {
        Ok(match self.kind()? {
            Kind::PlaneGraph => ModelSurface::Plane,
            Kind::ConeSphere { .. } => ModelSurface::SphereOut,
            Kind::DeSitterSphere { .. } | Kind::AdsSphere { .. } => ModelSurface::SphereIn,
            Kind::AdsDisk => ModelSurface::HyperbolicDisk,
        })
    }

    /// Whether the family is `+`isotropic with a closed-form mean curvature.
    pub fn is_isotropic_type(&self) -> Result<bool> {
        Ok(match self.kind()? {
            Kind::PlaneGraph | Kind::AdsDisk => true,
            Kind::DeSitterSphere { c } => c == 0.0,
            _ => false,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        match (&self.grid, &self.lambda) {
            (Some(g), _) => Ok(*g),
            (None, LambdaSpec::Lattice { origin, spacing, shape, .. }) => Grid::new(
                [origin[0] + spacing[0], origin[0] + (shape[0] - 2) as f64 * spacing[0]],
                [origin[1] + spacing[1], origin[1] + (shape[1] - 2) as f64 * spacing[1]],
                [shape[0] - 2, shape[1] - 2],
            ),
            (None, _) => self.model()?.default_grid(DEFAULT_RESOLUTION),
        }
    }

    /// The family chart evaluated at `z` for the value `lambda`.
    pub fn point_with(&self, z: [f64; 2], lambda: f64) -> Result<MVec> {
        let y = self.model()?.point(z);
        let s = self.space.ambient();
        let c = match self.kind()? {
            Kind::PlaneGraph => vec![lambda, lambda, z[0], z[1]],
            Kind::ConeSphere { theta } => {
                let r = lambda + theta;
                vec![lambda, r * y[0], r * y[1], r * y[2]]
            }
            Kind::DeSitterSphere { c } => {
                let s = (1.0 - c * c).sqrt();
                let r = s - lambda * c;
                vec![lambda, lambda * s + c, r * y[0], r * y[1], r * y[2]]
            }
            Kind::AdsDisk => vec![y[0], lambda, lambda, y[1], y[2]],
            Kind::AdsSphere { c } => {
                let s = (c * c - 1.0).sqrt();
                let r = s + lambda * c;
                vec![lambda, lambda * s + c, r * y[0], r * y[1], r * y[2]]
            }
        };
        MVec::new(s, &c)
    }

    pub fn lambda_at(&self, z: [f64; 2]) -> Result<f64> {
        Ok(self.lambda.eval(z, self.model()?.point(z)))
    }

    pub fn point(&self, z: [f64; 2]) -> Result<MVec> {
        self.point_with(z, self.lambda_at(z)?)
    }

    /// The same family member with `λ ≡ 0`.
    pub fn base(&self) -> FamilySpec {
        FamilySpec { lambda: LambdaSpec::Zero, ..self.clone() }
    }
}

/// The immersion of a family member.
pub fn build_family(spec: &FamilySpec) -> Result<Immersion> {
    spec.validate()?;
    let grid = spec.grid()?;
    let fd = spec.fd_step.unwrap_or(DEFAULT_FD_STEP);
    let check = |x: &MVec| -> Result<()> {
        let r = spec.space.quadric_residual(x);
        if r > 1e-10 * (1.0 + x.euclid() * x.euclid()) {
            return Err(Error::OffQuadric { residual: r });
        }
        Ok(())
    };
    if let LambdaSpec::Lattice { origin, spacing, shape, .. } = &spec.lambda {
        let s = spec.clone();
        let lat = LatticeChart::from_fn(spec.space, *origin, *spacing, *shape, move |z| {
            s.point(z).expect("validated family")
        });
        for p in &lat.points {
            check(&MVec::new(spec.space.ambient(), p)?)?;
        }
        let imm = Immersion::from_lattice(lat)?;
        return match spec.grid {
            Some(g) => imm.with_grid(g),
            None => Ok(imm),
        };
    }
    for p in grid.points() {
        check(&spec.point(p)?)?;
    }
    let s = spec.clone();
    Immersion::new(spec.space, Chart::analytic(move |z| s.point(z).expect("validated family")), grid, fd)
}

/// `Δλ`, `Δλ + 2λ` or `Δλ - 2λ` at `p` for `+`isotropic family members.
pub fn isotropy_coefficient(spec: &FamilySpec, p: [f64; 2]) -> Result<f64> {
    spec.validate()?;
    if !spec.is_isotropic_type()? {
        return Err(Error::Domain(format!(
            "{} in {} has no closed-form isotropy coefficient",
            spec.family, spec.space
        )));
    }
    let model = spec.model()?;
    let lam = |z: [f64; 2]| spec.lambda.eval(z, model.point(z));
    let factor = |z: [f64; 2]| model.factor(z);
    let lap = match &spec.lambda {
        LambdaSpec::Lattice { spacing, .. } => bochner_laplace(&lam, &factor, p, spacing[0])?,
        _ => {
            // Richardson extrapolation of the five-point stencil
            let h = spec.fd_step.unwrap_or(DEFAULT_FD_STEP);
            let (a, b) = (bochner_laplace(&lam, &factor, p, h)?, bochner_laplace(&lam, &factor, p, 2.0 * h)?);
            (4.0 * a - b) / 3.0
        }
    };
    let shift = -2.0 * spec.space.curvature();
    let v = lap - shift * lam(p);
    if !v.is_finite() {
        return Err(Error::Domain(format!("λ is not defined around ({:.6}, {:.6})", p[0], p[1])));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub tolerance: f64,
    /// Sup of `|isotropy_coefficient|` over the grid.
    pub coefficient_sup: f64,
    pub verdict: bool,
    /// `stationary` flag of the numerical classification.
    pub classified: bool,
    pub agree: bool,
}

/// Stationarity from the closed-form coefficient, compared with the
/// classification of the immersion.
pub fn stationary_check(spec: &FamilySpec, tol: f64) -> Result<StationaryReport> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance {tol:e} must be positive")));
    }
    let grid = spec.grid()?;
    let sup = grid
        .points()
        .into_par_iter()
        .map(|p| isotropy_coefficient(spec, p).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let classified = classify(&build_family(spec)?, tol)?.flags.stationary;
    let verdict = sup < tol;
    Ok(StationaryReport { tolerance: tol, coefficient_sup: sup, verdict, classified, agree: verdict == classified })
}

/// The normalized positive null normal `e₁+e₂` of the immersion at `p`.
pub fn positive_null_normal(imm: &Immersion, p: [f64; 2]) -> Result<MVec> {
    let sd = imm.sample(p)?;
    Ok(sd.frame[0] + sd.frame[1])
}

/// Moves each point of a totally umbilic `base` by `λ` along its positive
/// null normal geodesic.
pub fn deform_null(base: &Immersion, lambda: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Result<Immersion> {
    let report = classify(base, crate::surface::DEFAULT_TOL)?;
    if !report.flags.totally_umbilic {
        return Err(Error::Domain(format!(
            "base is not totally umbilic (|L| up to {:.3e})",
            report.residuals.totally_umbilic
        )));
    }
    deform_null_unchecked(base, lambda)
}

/// [`deform_null`] without the umbilicity check on the base.
pub fn deform_null_unchecked(
    base: &Immersion,
    lambda: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
) -> Result<Immersion> {
    let m = base.space_form;
    let b = base.clone();
    let lambda = Arc::new(lambda);
    let at = move |z: [f64; 2]| -> Result<MVec> {
        let sd = b.sample(z)?;
        let k = NullDir::new(sd.frame[0] + sd.frame[1])?;
        m.null_geodesic(&sd.point, &k, lambda(z))
    };
    match &base.chart {
        Chart::Analytic(_) => {
            // fail early on samples where the base has no frame
            for p in base.grid.points() {
                if let Err(e) = at(p) {
                    if !matches!(e, Error::Degenerate { .. } | Error::Signature { .. }) {
                        return Err(e);
                    }
                }
            }
            let chart = Chart::analytic(move |z| at(z).unwrap_or_else(|_| MVec::zero(m.ambient()) * f64::NAN));
            Immersion::new(m, chart, base.grid, base.fd_step)
        }
        Chart::Lattice(l) => {
            let mut lat = (**l).clone();
            let g = l.interior_grid()?;
            // boundary nodes keep their base position, so the deformed lattice
            // shrinks by one node on each side
            for (k, p) in lat.points.iter_mut().enumerate() {
                let (i, j) = (k / l.shape[1], k % l.shape[1]);
                let z = [l.origin[0] + i as f64 * l.spacing[0], l.origin[1] + j as f64 * l.spacing[1]];
                if i >= 1 && j >= 1 && i + 1 < l.shape[0] && j + 1 < l.shape[1] {
                    *p = at(z)?.to_vec();
                }
            }
            let inner = Grid::new(
                [g.x1[0] + l.spacing[0], g.x1[1] - l.spacing[0]],
                [g.x2[0] + l.spacing[1], g.x2[1] - l.spacing[1]],
                [g.n[0].saturating_sub(2).max(2), g.n[1].saturating_sub(2).max(2)],
            )?;
            Immersion::from_lattice(lat)?.with_grid(inner)
        }
    }
}

/// Deforms the `λ ≡ 0` member of `spec` by `spec.lambda`.
pub fn deform_family_base(spec: &FamilySpec) -> Result<Immersion> {
    let base = build_family(&spec.base())?;
    let model = spec.model()?;
    let lam = spec.lambda.clone();
    deform_null(&base, move |z| lam.eval(z, model.point(z)))
}

/// The totally umbilic `λ ≡ 0` members, one list entry per base surface.
pub fn catalog_bases() -> Vec<(&'static str, FamilySpec)> {
    use FamilyTag::*;
    use SpaceForm::*;
    vec![
        ("plane", FamilySpec::new(Minkowski, ILambda, LambdaSpec::Zero)),
        ("sphere_theta_1", FamilySpec::new(Minkowski, JLambda, LambdaSpec::Zero).with_theta(1.0)),
        ("great_sphere", FamilySpec::new(PseudoSphere, ILambda, LambdaSpec::Zero)),
        ("small_sphere_c_0.5", FamilySpec::new(PseudoSphere, ICLambda, LambdaSpec::Zero).with_c(0.5)),
        ("hyperbolic_plane", FamilySpec::new(PseudoHyperbolic, ILambda, LambdaSpec::Zero)),
        ("sphere_c_2", FamilySpec::new(PseudoHyperbolic, JCLambda, LambdaSpec::Zero).with_c(2.0)),
    ]
}

/// `Ξ⁻¹(λ̃, λ̃, z₁, z₂)` with `λ̃ = (1+|z|²)/2·λ(y(z))`: the Minkowski
/// family carried to `S⁴₁` by inverse stereographic projection.
pub fn stereographic_transport(lambda: &LambdaSpec, z: [f64; 2]) -> Result<MVec> {
    let y = ModelSurface::SphereIn.point(z);
    let lt = (1.0 + z[0] * z[0] + z[1] * z[1]) / 2.0 * lambda.eval(z, y);
    stereographic_inverse(&MVec::new(crate::lorentz::Signature::R41, &[lt, lt, z[0], z[1]])?)
}
