//! Minkowski space, de Sitter space S⁴₁ ⊂ ℝ⁵₁ and anti-de Sitter space
//! H⁴₁ ⊂ ℝ⁵₂ as embedded quadrics.
//!
//! Orientation and time orientation are fixed here once and for all, since
//! they decide which normal null direction of a surface is called positive:
//!
//! * Minkowski: future is `x₁` increasing, a frame is positive when
//!   `det(e₁,e₂,e₃,e₄) > 0`.
//! * S⁴₁: future is the tangential part of `∂/∂x₁`; positive frames satisfy
//!   `det(e₁,e₂,e₃,e₄,-x) > 0`, which makes stereographic projection
//!   orientation preserving.
//! * H⁴₁: future is the rotation field `(-x₂, x₁, 0, 0, 0)` of the timelike
//!   coordinate plane; positive frames satisfy `det(e₁,e₂,e₃,e₄,x) > 0`.
//!
//! Both quadric conventions read `det(e₁,e₂,e₃,e₄,-⟨x,x⟩x) > 0`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{det, MVec, NullDir, Signature, FRAME_EPS};

/// Tolerance for the quadric constraint on input points.
pub const QUADRIC_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceForm {
    /// ℝ⁴₁
    #[serde(rename = "r41")]
    Minkowski,
    /// S⁴₁
    #[serde(rename = "s41")]
    PseudoSphere,
    /// H⁴₁
    #[serde(rename = "h41")]
    PseudoHyperbolic,
}

impl fmt::Display for SpaceForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for SpaceForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r41" => Ok(SpaceForm::Minkowski),
            "s41" => Ok(SpaceForm::PseudoSphere),
            "h41" => Ok(SpaceForm::PseudoHyperbolic),
            _ => Err(Error::Config(format!("unknown space form `{s}` (expected r41, s41 or h41)"))),
        }
    }
}

impl SpaceForm {
    pub const ALL: [SpaceForm; 3] = [SpaceForm::Minkowski, SpaceForm::PseudoSphere, SpaceForm::PseudoHyperbolic];

    pub fn tag(&self) -> &'static str {
        match self {
            SpaceForm::Minkowski => "r41",
            SpaceForm::PseudoSphere => "s41",
            SpaceForm::PseudoHyperbolic => "h41",
        }
    }

    /// Sectional curvature.
    pub fn curvature(&self) -> f64 {
        match self {
            SpaceForm::Minkowski => 0.0,
            SpaceForm::PseudoSphere => 1.0,
            SpaceForm::PseudoHyperbolic => -1.0,
        }
    }

    pub fn ambient(&self) -> Signature {
        match self {
            SpaceForm::Minkowski => Signature::R41,
            SpaceForm::PseudoSphere => Signature::R51,
            SpaceForm::PseudoHyperbolic => Signature::R52,
        }
    }

    /// The value of `⟨x,x⟩` on the quadric, `None` for Minkowski space.
    pub fn quadric_sign(&self) -> Option<f64> {
        match self {
            SpaceForm::Minkowski => None,
            SpaceForm::PseudoSphere => Some(1.0),
            SpaceForm::PseudoHyperbolic => Some(-1.0),
        }
    }

    pub fn point(&self, comps: &[f64]) -> Result<MVec> {
        let x = MVec::new(self.ambient(), comps)?;
        self.check(&x)?;
        Ok(x)
    }

    pub fn quadric_residual(&self, x: &MVec) -> f64 {
        match self.quadric_sign() {
            None => 0.0,
            Some(s) => (x.norm_sq() - s).abs(),
        }
    }

    /// Verifies that `x` lies in the model.
    pub fn check(&self, x: &MVec) -> Result<()> {
        if x.signature() != self.ambient() {
            return Err(Error::Dimension { expected: self.ambient().dims(), got: x.dims() });
        }
        let r = self.quadric_residual(x);
        if r > QUADRIC_TOL * (1.0 + x.euclid().powi(2)) {
            return Err(Error::OffQuadric { residual: r });
        }
        Ok(())
    }

    /// Orthogonal projection onto `T_xM`.
    pub fn project_tangent(&self, x: &MVec, v: &MVec) -> Result<MVec> {
        self.check(x)?;
        if v.signature() != self.ambient() {
            return Err(Error::Dimension { expected: self.ambient().dims(), got: v.dims() });
        }
        Ok(self.project_unchecked(x, v))
    }

    fn project_unchecked(&self, x: &MVec, v: &MVec) -> MVec {
        match self.quadric_sign() {
            None => *v,
            Some(_) => *v - *x * (v.dot(x) / x.norm_sq()),
        }
    }

    /// Levi-Civita derivative of a vector field `y(t)` along a curve `c(t)` at
    /// `t`, from a central difference of the flat ambient derivative.
    pub fn covariant_derivative(
        &self,
        curve: &dyn Fn(f64) -> MVec,
        field: &dyn Fn(f64) -> MVec,
        t: f64,
        h: f64,
    ) -> Result<MVec> {
        if !(h >= 1e-12) {
            return Err(Error::Config(format!("finite-difference step {h:e} is below 1e-12")));
        }
        let d = (field(t + h) - field(t - h)) / (2.0 * h);
        self.project_tangent(&curve(t), &d)
    }

    /// The null geodesic `p + t k`.
    pub fn null_geodesic(&self, p: &MVec, k: &NullDir, t: f64) -> Result<MVec> {
        self.check(p)?;
        let k = *k.rep();
        if k.signature() != self.ambient() {
            return Err(Error::Dimension { expected: self.ambient().dims(), got: k.dims() });
        }
        if self.quadric_sign().is_some() && k.dot(p).abs() > 1e-10 * k.euclid() * (1.0 + p.euclid()) {
            return Err(Error::Domain("null direction is not tangent to the model".into()));
        }
        Ok(*p + k * t)
    }

    /// The constant-curvature tensor `S(⟨X,Z⟩⟨Y,W⟩ - ⟨X,W⟩⟨Y,Z⟩)`.
    pub fn riemann(&self, x: &MVec, y: &MVec, z: &MVec, w: &MVec) -> f64 {
        self.curvature() * (x.dot(z) * y.dot(w) - x.dot(w) * y.dot(z))
    }

    /// All components of the curvature tensor in an orthonormal frame,
    /// evaluated from the closed formula.
    pub fn frame_curvature(&self) -> FrameCurvature {
        constant_curvature_tensor(self.curvature())
    }

    /// A future timelike vector tangent at `x`.
    pub fn time_reference(&self, x: &MVec) -> MVec {
        let s = self.ambient();
        match self {
            SpaceForm::Minkowski => MVec::basis(s, 0),
            SpaceForm::PseudoSphere => self.project_unchecked(x, &MVec::basis(s, 0)),
            SpaceForm::PseudoHyperbolic => {
                MVec::new(s, &[-x[1], x[0], 0.0, 0.0, 0.0]).expect("five components")
            }
        }
    }

    /// The constant ambient vector that fixes the boost gauge of Darboux
    /// frames: positive null normals are scaled to pair to `∓1` with it.
    pub fn null_gauge(&self) -> MVec {
        match self {
            SpaceForm::PseudoHyperbolic => MVec::basis(self.ambient(), 1),
            _ => MVec::basis(self.ambient(), 0),
        }
    }

    /// Sign of the orientation of a tangent frame at `x`.
    pub fn orientation(&self, x: &MVec, e: &[MVec; 4]) -> f64 {
        match self.quadric_sign() {
            None => det(e).signum(),
            Some(q) => det(&[e[0], e[1], e[2], e[3], *x * -q]).signum(),
        }
    }

    /// Totally umbilic spacelike hypersurfaces with explicit charts.
    pub fn umbilic_catalog(&self) -> Vec<Hypersurface> {
        match self {
            SpaceForm::Minkowski => vec![Hypersurface::new(
                *self,
                "EuclideanR3",
                [[-2.0, 2.0]; 3],
                |u| MVec::new(Signature::R41, &[0.0, u[0], u[1], u[2]]).expect("4"),
            )],
            SpaceForm::PseudoSphere => vec![Hypersurface::new(*self, "Sphere_S3", [[-1.5, 1.5]; 3], |u| {
                // stereographic parametrization of the unit 3-sphere
                let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
                let d = 1.0 + r2;
                MVec::new(
                    Signature::R51,
                    &[0.0, 2.0 * u[0] / d, 2.0 * u[1] / d, 2.0 * u[2] / d, (1.0 - r2) / d],
                )
                .expect("5")
            })],
            SpaceForm::PseudoHyperbolic => vec![Hypersurface::new(*self, "Hyperbolic_H3", [[-1.5, 1.5]; 3], |u| {
                let t = (1.0 + u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                MVec::new(Signature::R52, &[t, 0.0, u[0], u[1], u[2]]).expect("5")
            })],
        }
    }
}

/// Curvature components `R[i][j][k][l] = R(e_i,e_j,e_k,e_l)` in an
/// orthonormal frame.
pub type FrameCurvature = [[[[f64; 4]; 4]; 4]; 4];

/// `S(η_ik η_jl - η_il η_jk)` with `η = diag(-1,1,1,1)`.
pub fn constant_curvature_tensor(s: f64) -> FrameCurvature {
    let eta = |a: usize, b: usize| if a == b { FRAME_EPS[a] } else { 0.0 };
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    r[i][j][k][l] = s * (eta(i, k) * eta(j, l) - eta(i, l) * eta(j, k));
                }
            }
        }
    }
    r
}

/// Stereographic projection Ξ: S⁴₁ minus `{x₃ = 1}` → ℝ⁴₁.
pub fn stereographic(x: &MVec) -> Result<MVec> {
    SpaceForm::PseudoSphere.check(x)?;
    let d = 1.0 - x[2];
    if d.abs() < 1e-12 {
        return Err(Error::Pole);
    }
    Ok(MVec::new(Signature::R41, &[x[0] / d, x[1] / d, x[3] / d, x[4] / d]).expect("4"))
}

/// Inverse of [`stereographic`].
pub fn stereographic_inverse(y: &MVec) -> Result<MVec> {
    if y.signature() != Signature::R41 {
        return Err(Error::Dimension { expected: 4, got: y.dims() });
    }
    let q = y.norm_sq();
    let d = 1.0 + q;
    if d.abs() < 1e-12 {
        return Err(Error::Pole);
    }
    let s = 2.0 / d;
    Ok(MVec::new(Signature::R51, &[s * y[0], s * y[1], (q - 1.0) / d, s * y[2], s * y[3]]).expect("5"))
}

/// Factor `e^{2ρ} = 4/(1+⟨y,y⟩)²` by which the inverse projection scales the metric.
pub fn stereographic_conformal_factor(y: &MVec) -> f64 {
    let d = 1.0 + y.norm_sq();
    4.0 / (d * d)
}

/// A spacelike hypersurface given by a chart on a box in ℝ³.
#[derive(Clone)]
pub struct Hypersurface {
    pub space_form: SpaceForm,
    pub name: String,
    pub domain: [[f64; 2]; 3],
    chart: Arc<dyn Fn([f64; 3]) -> MVec + Send + Sync>,
}

impl fmt::Debug for Hypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypersurface")
            .field("space_form", &self.space_form)
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Unit normal and shape data of a hypersurface at one point.
#[derive(Clone, Copy, Debug)]
pub struct HypersurfacePoint {
    pub point: MVec,
    /// Future unit normal.
    pub normal: MVec,
    /// Orthonormal tangent basis from Gram–Schmidt on the chart derivatives.
    pub tangent: [MVec; 3],
    /// `B(X,Y) = ⟨s₁, ∇_X Y⟩` in the tangent basis, so `⟨∇_X s₁, Y⟩ = -B(X,Y)`.
    pub shape: [[f64; 3]; 3],
}

impl Hypersurface {
    pub fn new(
        space_form: SpaceForm,
        name: &str,
        domain: [[f64; 2]; 3],
        chart: impl Fn([f64; 3]) -> MVec + Send + Sync + 'static,
    ) -> Self {
        Hypersurface { space_form, name: name.to_string(), domain, chart: Arc::new(chart) }
    }

    /// The graph `x₁ = a(x₂² - x₃²)` in Minkowski space.
    pub fn quadratic_graph(a: f64) -> Self {
        Hypersurface::new(SpaceForm::Minkowski, "QuadraticGraph", [[-1.0, 1.0]; 3], move |u| {
            MVec::new(Signature::R41, &[a * (u[0] * u[0] - u[1] * u[1]), u[0], u[1], u[2]]).expect("4")
        })
    }

    pub fn eval(&self, u: [f64; 3]) -> MVec {
        (self.chart)(u)
    }

    /// Frame and shape form at `u`, using central differences of step `h`.
    pub fn at(&self, u: [f64; 3], h: f64) -> Result<HypersurfacePoint> {
        let m = self.space_form;
        let x = self.eval(u);
        m.check(&x)?;
        let shift = |a: usize, da: f64, b: usize, db: f64| {
            let mut v = u;
            v[a] += da;
            v[b] += db;
            self.eval(v)
        };
        let mut d1 = [x; 3];
        for (a, d) in d1.iter_mut().enumerate() {
            *d = (shift(a, h, a, 0.0) - shift(a, -h, a, 0.0)) / (2.0 * h);
        }
        let mut d2 = [[x; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                d2[a][b] = if a == b {
                    (shift(a, h, a, 0.0) - x * 2.0 + shift(a, -h, a, 0.0)) / (h * h)
                } else {
                    (shift(a, h, b, h) - shift(a, h, b, -h) - shift(a, -h, b, h) + shift(a, -h, b, -h))
                        / (4.0 * h * h)
                };
            }
        }
        // Gram–Schmidt with the change of basis c: tangent[i] = Σ_a c[i][a] d1[a]
        let mut tangent = [x; 3];
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            let mut v = d1[i];
            let mut ci = [0.0; 3];
            ci[i] = 1.0;
            for j in 0..i {
                let p = v.dot(&tangent[j]);
                v -= tangent[j] * p;
                for a in 0..3 {
                    ci[a] -= p * c[j][a];
                }
            }
            let n2 = v.norm_sq();
            if !(n2 > 1e-14) {
                return Err(Error::Signature { u: u[0], v: u[1] });
            }
            let n = n2.sqrt();
            tangent[i] = v / n;
            for a in 0..3 {
                c[i][a] = ci[a] / n;
            }
        }
        let normal = unit_future_normal(m, &x, &tangent)?;
        let mut shape = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        s += c[i][a] * c[j][b] * normal.dot(&d2[a][b]);
                    }
                }
                shape[i][j] = s;
            }
        }
        Ok(HypersurfacePoint { point: x, normal, tangent, shape })
    }

    /// Largest deviation of the shape form from a multiple of the metric.
    pub fn umbilicity_defect(&self, u: [f64; 3], h: f64) -> Result<f64> {
        let p = self.at(u, h)?;
        let tr = (p.shape[0][0] + p.shape[1][1] + p.shape[2][2]) / 3.0;
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { tr } else { 0.0 };
                r = r.max((p.shape[i][j] - want).abs());
            }
        }
        Ok(r)
    }
}

/// The future unit normal of a spacelike hyperplane of `T_xM`.
fn unit_future_normal(m: SpaceForm, x: &MVec, tangent: &[MVec; 3]) -> Result<MVec> {
    let t = m.time_reference(x);
    let mut n = t;
    for e in tangent {
        n -= *e * n.dot(e);
    }
    let q = n.norm_sq();
    if !(q < -1e-14) {
        return Err(Error::Domain("hypersurface is not spacelike".into()));
    }
    Ok(n / (-q).sqrt())
}
