//! Conformally immersed spacelike surfaces: Darboux frames, the second
//! fundamental form, its null decomposition and the resulting
//! classification.
//!
//! Frames are written `(e₁,e₂,e₃,e₄)` with `e₁` timelike normal, `e₂`
//! spacelike normal and `(e₃,e₄)` tangent. Arrays index them from zero, so
//! `h[α][i][j]` holds `h_{i+3, j+3}^{α+1}`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::{Ambient, RescaledMinkowski};
use crate::error::{Error, Result};
use crate::lorentz::{MVec, FRAME_EPS};
use crate::space_form::SpaceForm;

/// Default finite-difference step for surface charts.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
/// Default classification tolerance, about `10·fd_step²`.
pub const DEFAULT_TOL: f64 = 1e-5;

/// A rectangular sampling lattice in the chart domain, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub n: [usize; 2],
}

impl Grid {
    pub fn new(x1: [f64; 2], x2: [f64; 2], n: [usize; 2]) -> Result<Self> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(x1) || !ok(x2) {
            return Err(Error::Config(format!("grid ranges {x1:?} x {x2:?} must be finite and increasing")));
        }
        if n[0] < 2 || n[1] < 2 {
            return Err(Error::Config(format!("grid resolution {n:?} must be at least 2 per axis")));
        }
        Ok(Grid { x1, x2, n })
    }

    /// `[a,b]²` with `n` points per axis.
    pub fn square(a: f64, b: f64, n: usize) -> Result<Self> {
        Grid::new([a, b], [a, b], [n, n])
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 2] {
        [
            (self.x1[1] - self.x1[0]) / (self.n[0] - 1) as f64,
            (self.x2[1] - self.x2[0]) / (self.n[1] - 1) as f64,
        ]
    }

    /// Sample `k`, with the second coordinate varying fastest.
    pub fn point(&self, k: usize) -> [f64; 2] {
        let (i, j) = (k / self.n[1], k % self.n[1]);
        let s = self.spacing();
        [self.x1[0] + i as f64 * s[0], self.x2[0] + j as f64 * s[1]]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// The image of the grid under `z ↦ s·z`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let sc = |r: [f64; 2]| if s > 0.0 { [s * r[0], s * r[1]] } else { [s * r[1], s * r[0]] };
        Grid::new(sc(self.x1), sc(self.x2), self.n)
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.x1, self.x2, self.n).map(|_| ())
    }
}

/// A chart given by ambient coordinates on a regular lattice of domain
/// points. Derivatives are taken on the lattice, so only interior nodes can
/// be sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeChart {
    pub space: SpaceForm,
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    /// Nodes per axis.
    pub shape: [usize; 2],
    /// Ambient coordinates per node, second index fastest.
    pub points: Vec<Vec<f64>>,
}

impl LatticeChart {
    /// Tabulates `f` on the lattice.
    pub fn from_fn(
        space: SpaceForm,
        origin: [f64; 2],
        spacing: [f64; 2],
        shape: [usize; 2],
        f: impl Fn([f64; 2]) -> MVec + Sync,
    ) -> Self {
        let points = (0..shape[0] * shape[1])
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / shape[1], k % shape[1]);
                f([origin[0] + i as f64 * spacing[0], origin[1] + j as f64 * spacing[1]]).to_vec()
            })
            .collect();
        LatticeChart { space, origin, spacing, shape, points }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape[0] < 3 || self.shape[1] < 3 {
            return Err(Error::Config(format!("lattice shape {:?} needs at least 3 nodes per axis", self.shape)));
        }
        if !(self.spacing[0] > 0.0 && self.spacing[1] > 0.0) {
            return Err(Error::Config("lattice spacing must be positive".into()));
        }
        if self.points.len() != self.shape[0] * self.shape[1] {
            return Err(Error::Config(format!(
                "lattice has {} nodes, shape {:?} needs {}",
                self.points.len(),
                self.shape,
                self.shape[0] * self.shape[1]
            )));
        }
        let dims = self.space.ambient().dims();
        for p in &self.points {
            if p.len() != dims {
                return Err(Error::Dimension { expected: dims, got: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Config("lattice contains non-finite coordinates".into()));
            }
        }
        Ok(())
    }

    fn node(&self, i: usize, j: usize) -> MVec {
        MVec::new(self.space.ambient(), &self.points[i * self.shape[1] + j]).expect("validated lattice")
    }

    fn locate(&self, p: [f64; 2]) -> Result<(usize, usize)> {
        let mut idx = [0usize; 2];
        for a in 0..2 {
            let t = (p[a] - self.origin[a]) / self.spacing[a];
            let r = t.round();
            if (t - r).abs() > 1e-6 || r < 1.0 || r > (self.shape[a] - 2) as f64 {
                return Err(Error::Domain(format!("({:.6}, {:.6}) is not an interior lattice node", p[0], p[1])));
            }
            idx[a] = r as usize;
        }
        Ok((idx[0], idx[1]))
    }

    /// Grid of all interior nodes.
    pub fn interior_grid(&self) -> Result<Grid> {
        let (o, s, n) = (self.origin, self.spacing, self.shape);
        Grid::new(
            [o[0] + s[0], o[0] + (n[0] - 2) as f64 * s[0]],
            [o[1] + s[1], o[1] + (n[1] - 2) as f64 * s[1]],
            [n[0] - 2, n[1] - 2],
        )
    }

    fn jet(&self, p: [f64; 2]) -> Result<Jet> {
        let (i, j) = self.locate(p)?;
        let [h1, h2] = self.spacing;
        let c = self.node(i, j);
        let (e, w, n, s) = (self.node(i + 1, j), self.node(i - 1, j), self.node(i, j + 1), self.node(i, j - 1));
        let mixed = (self.node(i + 1, j + 1) - self.node(i + 1, j - 1) - self.node(i - 1, j + 1)
            + self.node(i - 1, j - 1))
            / (4.0 * h1 * h2);
        Ok(Jet {
            point: c,
            d: [(e - w) / (2.0 * h1), (n - s) / (2.0 * h2)],
            dd: [[(e - c * 2.0 + w) / (h1 * h1), mixed], [mixed, (n - c * 2.0 + s) / (h2 * h2)]],
        })
    }
}

/// A point with first and second chart derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub point: MVec,
    pub d: [MVec; 2],
    pub dd: [[MVec; 2]; 2],
}

type ChartFn = dyn Fn([f64; 2]) -> MVec + Send + Sync;

/// Where the ambient coordinates of a surface come from.
#[derive(Clone)]
pub enum Chart {
    Analytic(Arc<ChartFn>),
    Lattice(Arc<LatticeChart>),
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::Analytic(_) => f.write_str("Chart::Analytic(..)"),
            Chart::Lattice(l) => f.debug_tuple("Chart::Lattice").field(&l.shape).finish(),
        }
    }
}

impl Chart {
    pub fn analytic(f: impl Fn([f64; 2]) -> MVec + Send + Sync + 'static) -> Self {
        Chart::Analytic(Arc::new(f))
    }

    pub fn eval(&self, p: [f64; 2]) -> Result<MVec> {
        match self {
            Chart::Analytic(f) => Ok(f(p)),
            Chart::Lattice(l) => {
                let (i, j) = l.locate(p)?;
                Ok(l.node(i, j))
            }
        }
    }

    /// Central differences of step `h`; lattices use their own spacing.
    pub fn jet(&self, p: [f64; 2], h: f64) -> Result<Jet> {
        let f = match self {
            Chart::Analytic(f) => f,
            Chart::Lattice(l) => return l.jet(p),
        };
        let at = |a: f64, b: f64| f([p[0] + a, p[1] + b]);
        let c = f(p);
        let (e, w, n, s) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        let mixed = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
        Ok(Jet {
            point: c,
            d: [(e - w) / (2.0 * h), (n - s) / (2.0 * h)],
            dd: [[(e - c * 2.0 + w) / (h * h), mixed], [mixed, (n - c * 2.0 + s) / (h * h)]],
        })
    }
}

/// A sampled surface chart in one of the space forms.
#[derive(Clone, Debug)]
pub struct Immersion {
    pub space_form: SpaceForm,
    pub chart: Chart,
    pub grid: Grid,
    pub fd_step: f64,
}

impl Immersion {
    pub fn new(space_form: SpaceForm, chart: Chart, grid: Grid, fd_step: f64) -> Result<Self> {
        if !(fd_step > 1e-8 && fd_step < 1e-1) {
            return Err(Error::Config(format!("fd_step {fd_step:e} outside (1e-8, 1e-1)")));
        }
        grid.validate()?;
        if let Chart::Lattice(l) = &chart {
            l.validate()?;
            if l.space != space_form {
                return Err(Error::Config(format!("lattice is in {}, immersion in {}", l.space, space_form)));
            }
        }
        Ok(Immersion { space_form, chart, grid, fd_step })
    }

    pub fn from_fn(
        space_form: SpaceForm,
        grid: Grid,
        f: impl Fn([f64; 2]) -> MVec + Send + Sync + 'static,
    ) -> Result<Self> {
        Immersion::new(space_form, Chart::analytic(f), grid, DEFAULT_FD_STEP)
    }

    /// Samples every interior node of the lattice.
    pub fn from_lattice(lattice: LatticeChart) -> Result<Self> {
        lattice.validate()?;
        let grid = lattice.interior_grid()?;
        let space = lattice.space;
        let h = lattice.spacing[0].min(lattice.spacing[1]).clamp(2e-8, 9e-2);
        Immersion::new(space, Chart::Lattice(Arc::new(lattice)), grid, h)
    }

    pub fn with_grid(mut self, grid: Grid) -> Result<Self> {
        grid.validate()?;
        self.grid = grid;
        Ok(self)
    }

    pub fn with_fd_step(self, fd_step: f64) -> Result<Self> {
        Immersion::new(self.space_form, self.chart, self.grid, fd_step)
    }

    /// The same surface in the coordinate `w = s·z`.
    pub fn rescaled_domain(&self, s: f64) -> Result<Self> {
        let Chart::Analytic(f) = &self.chart else {
            return Err(Error::Config("only analytic charts can be reparametrized".into()));
        };
        if !(s.is_finite() && s != 0.0) {
            return Err(Error::Config(format!("scale {s} must be finite and nonzero")));
        }
        let f = f.clone();
        let chart = Chart::analytic(move |w| f([w[0] / s, w[1] / s]));
        Immersion::new(self.space_form, chart, self.grid.scaled(s)?, self.fd_step)
    }

    pub fn eval(&self, p: [f64; 2]) -> Result<MVec> {
        self.chart.eval(p)
    }

    pub fn jet(&self, p: [f64; 2]) -> Result<Jet> {
        self.chart.jet(p, self.fd_step)
    }

    /// Frame and second fundamental form at `p`.
    pub fn sample(&self, p: [f64; 2]) -> Result<SurfaceData> {
        self.sample_in(&self.space_form, p)
    }

    /// Same as [`Immersion::sample`] with the chart read in another ambient.
    pub fn sample_in(&self, amb: &dyn Ambient, p: [f64; 2]) -> Result<SurfaceData> {
        surface_data(amb, &self.jet(p)?, p)
    }

    /// All grid samples in grid order.
    pub fn samples_in(&self, amb: &dyn Ambient) -> Vec<([f64; 2], Result<SurfaceData>)> {
        self.grid.points().into_par_iter().map(|p| (p, self.sample_in(amb, p))).collect()
    }

    pub fn samples(&self) -> Vec<([f64; 2], Result<SurfaceData>)> {
        self.samples_in(&self.space_form)
    }
}

/// Darboux frame and second fundamental form at one surface point.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceData {
    pub param: [f64; 2],
    pub point: MVec,
    /// `(e₁,e₂,e₃,e₄)`, orthonormal for the ambient metric.
    pub frame: [MVec; 4],
    /// Conformal factor `⟨f_{x₁},f_{x₁}⟩`.
    pub f: f64,
    /// `|⟨f₁,f₁⟩ - ⟨f₂,f₂⟩| + |⟨f₁,f₂⟩|`.
    pub conformality: f64,
    /// `h[α][i][j] = ε_α ⟨∇_{e_i} e_j, e_α⟩` for normals `α` and tangents `i, j`.
    pub h: [[[f64; 2]; 2]; 2],
    /// `|h₃₄^α - h₄₃^α|`.
    pub symmetry: f64,
    /// Chart derivatives `f_{x₁}, f_{x₂}`.
    pub d: [MVec; 2],
    /// `e₃ = c₀₀ f₁` and `e₄ = c₁₀ f₁ + c₁₁ f₂`.
    pub change: [[f64; 2]; 2],
    /// `⟨f_a, e₃⟩, ⟨f_a, e₄⟩` for each chart direction `a`.
    pub screen: [[f64; 2]; 2],
    /// Normal parts of the coordinate second derivatives, as vectors.
    pub second: [[MVec; 2]; 2],
}

fn degenerate(p: [f64; 2], reason: &str) -> Error {
    Error::Degenerate { u: p[0], v: p[1], reason: reason.into() }
}

/// Builds the Darboux frame and second fundamental form from a chart jet.
pub fn surface_data(amb: &dyn Ambient, jet: &Jet, p: [f64; 2]) -> Result<SurfaceData> {
    let x = jet.point;
    amb.check(&x)?;
    let ip = |u: &MVec, v: &MVec| amb.inner(&x, u, v);
    let radial = amb.radial(&x);
    let strip_radial = |v: MVec| match &radial {
        Some(r) => v - *r * (v.dot(r) / r.dot(r)),
        None => v,
    };
    // difference quotients leave the tangent space of a quadric at O(h²)
    let [f1, f2] = jet.d.map(strip_radial);
    let (g11, g12, g22) = (ip(&f1, &f1), ip(&f1, &f2), ip(&f2, &f2));
    let size = amb.scale(&x) * (f1.euclid().powi(2) + f2.euclid().powi(2));
    let gram = g11 * g22 - g12 * g12;
    if !(size > 1e-300) || gram.abs().sqrt() < 1e-8 * size {
        return Err(degenerate(p, "tangent plane has rank below 2"));
    }
    if g11 <= 0.0 || gram < 0.0 {
        return Err(Error::Signature { u: p[0], v: p[1] });
    }
    let s1 = g11.sqrt();
    let e3 = f1 / s1;
    let w = f2 - e3 * ip(&f2, &e3);
    let s4 = ip(&w, &w).sqrt();
    let e4 = w / s4;
    let change = [[1.0 / s1, 0.0], [-ip(&f2, &e3) / (s1 * s4), 1.0 / s4]];

    let strip_tangent = |v: MVec| v - e3 * ip(&v, &e3) - e4 * ip(&v, &e4);
    let tn = strip_tangent(strip_radial(amb.time_reference(&x)));
    let q = ip(&tn, &tn);
    if !(q < 0.0) {
        return Err(Error::Signature { u: p[0], v: p[1] });
    }
    let n1 = tn / (-q).sqrt();
    let dims = x.dims();
    let mut best = (f64::NEG_INFINITY, x);
    for k in 0..dims {
        let mut v = strip_radial(MVec::basis(x.signature(), k));
        v += n1 * ip(&v, &n1);
        let v = strip_tangent(v);
        let nv = ip(&v, &v);
        if nv > best.0 {
            best = (nv, v);
        }
    }
    if !(best.0 > 0.0) {
        return Err(degenerate(p, "normal plane has no spacelike direction"));
    }
    let mut n2 = best.1 / best.0.sqrt();
    if amb.orientation(&x, &[n1, n2, e3, e4]) < 0.0 {
        n2 = -n2;
    }
    // boost within the normal plane so that e₁+e₂ pairs to ∓1 with the gauge vector
    let kp = n1 + n2;
    let km = n1 - n2;
    let pair = ip(&kp, &amb.null_gauge()).abs();
    let a = if pair > 1e-12 { 1.0 / pair } else { 1.0 };
    let e1 = (kp * a + km / a) * 0.5;
    let e2 = (kp * a - km / a) * 0.5;
    let frame = [e1, e2, e3, e4];

    let d = [f1, f2];
    let mut h = [[[0.0; 2]; 2]; 2];
    let mut second = [[x; 2]; 2];
    let mut normal = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let v = jet.dd[a][b] + amb.connection(&x, &d[a], &d[b]);
            let mut s = MVec::zero(x.signature());
            for al in 0..2 {
                normal[al][a][b] = ip(&v, &frame[al]);
                s += frame[al] * (FRAME_EPS[al] * normal[al][a][b]);
            }
            second[a][b] = s;
        }
    }
    let mut symmetry: f64 = 0.0;
    for al in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s += change[i][a] * change[j][b] * normal[al][a][b];
                    }
                }
                h[al][i][j] = FRAME_EPS[al] * s;
            }
        }
        symmetry = symmetry.max((h[al][0][1] - h[al][1][0]).abs());
    }
    let screen = [[ip(&f1, &e3), ip(&f1, &e4)], [ip(&f2, &e3), ip(&f2, &e4)]];
    Ok(SurfaceData {
        param: p,
        point: x,
        frame,
        f: g11,
        conformality: (g11 - g22).abs() + g12.abs(),
        h,
        symmetry,
        d,
        change,
        screen,
        second,
    })
}

impl SurfaceData {
    /// Largest deviation of the frame Gram matrix from `diag(-1,1,1,1)` in
    /// the flat pairing; only meaningful for space forms.
    pub fn gram_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { FRAME_EPS[i] } else { 0.0 };
                r = r.max((self.frame[i].dot(&self.frame[j]) - want).abs());
            }
        }
        r
    }

    pub fn decompose(&self) -> Decomposition {
        Decomposition::from_h(&self.h)
    }

    /// Normal coefficients `(h₃₃^α + h₄₄^α)/2` of the mean curvature vector.
    pub fn mean_curvature(&self) -> [f64; 2] {
        [0, 1].map(|al| 0.5 * (self.h[al][0][0] + self.h[al][1][1]))
    }

    /// `e_i = Σ_a m[i][a] ∂_a` for the tangent frame vectors.
    pub fn tangent_in_chart(&self) -> [[f64; 2]; 2] {
        self.change
    }
}

/// The mean-curvature and trace-free parts of II along the two null normals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Coefficient of `e₁+e₂`.
    pub h_plus: f64,
    /// Coefficient of `e₂-e₁`.
    pub h_minus: f64,
    /// Complex coefficient of `t∘t` along `e₁+e₂`.
    pub l_plus: Complex64,
    /// Complex coefficient of `t∘t` along `e₂-e₁`.
    pub l_minus: Complex64,
}

impl Decomposition {
    pub fn from_h(h: &[[[f64; 2]; 2]; 2]) -> Self {
        let [a, b] = *h;
        let (a33, a44, a34) = (a[0][0], a[1][1], 0.5 * (a[0][1] + a[1][0]));
        let (b33, b44, b34) = (b[0][0], b[1][1], 0.5 * (b[0][1] + b[1][0]));
        Decomposition {
            h_plus: (a33 + a44 + b33 + b44) / 4.0,
            h_minus: (-a33 - a44 + b33 + b44) / 4.0,
            l_plus: Complex64::new(0.5 * (-a33 + a44 - b33 + b44), a34 + b34),
            l_minus: Complex64::new(0.5 * (a33 - a44 - b33 + b44), -a34 + b34),
        }
    }

    /// Reassembles `h[α][i][j]`.
    pub fn reconstruct(&self) -> [[[f64; 2]; 2]; 2] {
        let mean = [self.h_plus - self.h_minus, self.h_plus + self.h_minus];
        let (lp, lm) = (self.l_plus, self.l_minus);
        let diag = [(lm.re - lp.re) / 2.0, -(lp.re + lm.re) / 2.0];
        let off = [(lp.im - lm.im) / 2.0, (lp.im + lm.im) / 2.0];
        [0, 1].map(|al| [[mean[al] + diag[al], off[al]], [off[al], mean[al] - diag[al]]])
    }
}

/// Classification flags of a surface.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub pos_semi_stationary: bool,
    pub neg_semi_stationary: bool,
    pub pos_semi_umbilic: bool,
    pub neg_semi_umbilic: bool,
    pub plus_isotropic: bool,
    pub minus_isotropic: bool,
    pub stationary: bool,
    pub totally_umbilic: bool,
}

/// The sup-residual behind each flag.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlagResiduals {
    pub pos_semi_stationary: f64,
    pub neg_semi_stationary: f64,
    pub pos_semi_umbilic: f64,
    pub neg_semi_umbilic: f64,
    pub plus_isotropic: f64,
    pub minus_isotropic: f64,
    pub stationary: f64,
    pub totally_umbilic: f64,
}

impl FlagResiduals {
    /// From sup-norms of `|H₊|, |H₋|, |L₊|, |L₋|`.
    pub fn from_parts(hp: f64, hm: f64, lp: f64, lm: f64) -> Self {
        FlagResiduals {
            pos_semi_stationary: hm,
            neg_semi_stationary: hp,
            pos_semi_umbilic: lm,
            neg_semi_umbilic: lp,
            plus_isotropic: hm.max(lm),
            minus_isotropic: hp.max(lp),
            stationary: hp.max(hm),
            totally_umbilic: lp.max(lm),
        }
    }

    pub fn flags(&self, tol: f64) -> Flags {
        Flags {
            pos_semi_stationary: self.pos_semi_stationary < tol,
            neg_semi_stationary: self.neg_semi_stationary < tol,
            pos_semi_umbilic: self.pos_semi_umbilic < tol,
            neg_semi_umbilic: self.neg_semi_umbilic < tol,
            plus_isotropic: self.plus_isotropic < tol,
            minus_isotropic: self.minus_isotropic < tol,
            stationary: self.stationary < tol,
            totally_umbilic: self.totally_umbilic < tol,
        }
    }
}

/// A grid sample that was skipped, with the reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedSample {
    pub x1: f64,
    pub x2: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub space: SpaceForm,
    pub tolerance: f64,
    pub fd_step: f64,
    pub grid: Grid,
    /// Number of samples that entered the residuals.
    pub samples: usize,
    pub flags: Flags,
    pub residuals: FlagResiduals,
    pub max_conformality: f64,
    pub max_symmetry: f64,
    pub rejected: Vec<RejectedSample>,
}

/// Splits sample results into usable data and rejected samples. Errors other
/// than rank or signature loss are returned.
pub fn partition_samples(
    samples: Vec<([f64; 2], Result<SurfaceData>)>,
) -> Result<(Vec<SurfaceData>, Vec<RejectedSample>)> {
    let mut ok = Vec::with_capacity(samples.len());
    let mut rejected = Vec::new();
    for (p, r) in samples {
        match r {
            Ok(sd) => ok.push(sd),
            Err(e @ (Error::Degenerate { .. } | Error::Signature { .. })) => {
                rejected.push(RejectedSample { x1: p[0], x2: p[1], reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    Ok((ok, rejected))
}

/// Sup-norms of the four decomposition parts over a set of samples.
pub fn sup_parts(data: &[SurfaceData]) -> [f64; 4] {
    data.iter().fold([0.0f64; 4], |acc, sd| {
        let d = sd.decompose();
        [
            acc[0].max(d.h_plus.abs()),
            acc[1].max(d.h_minus.abs()),
            acc[2].max(d.l_plus.norm()),
            acc[3].max(d.l_minus.norm()),
        ]
    })
}

/// Classifies the immersion over its grid.
pub fn classify(imm: &Immersion, tol: f64) -> Result<ClassificationReport> {
    classify_in(imm, &imm.space_form, tol)
}

/// [`classify`] with the chart read in another ambient metric.
pub fn classify_in(imm: &Immersion, amb: &dyn Ambient, tol: f64) -> Result<ClassificationReport> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance {tol:e} must be positive")));
    }
    if imm.grid.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let (data, rejected) = partition_samples(imm.samples_in(amb))?;
    if data.is_empty() {
        return Err(Error::Config("no grid sample yields a spacelike immersion".into()));
    }
    let [hp, hm, lp, lm] = sup_parts(&data);
    let residuals = FlagResiduals::from_parts(hp, hm, lp, lm);
    let (max_conformality, max_symmetry) =
        data.iter().fold((0.0f64, 0.0f64), |(c, s), sd| (c.max(sd.conformality), s.max(sd.symmetry)));
    Ok(ClassificationReport {
        space: imm.space_form,
        tolerance: tol,
        fd_step: imm.fd_step,
        grid: imm.grid,
        samples: data.len(),
        flags: residuals.flags(tol),
        residuals,
        max_conformality,
        max_symmetry,
        rejected,
    })
}

/// `(λ₁₁ + λ₂₂)/F` by central differences of step `h`.
pub fn bochner_laplace(
    lambda: &dyn Fn([f64; 2]) -> f64,
    factor: &dyn Fn([f64; 2]) -> f64,
    p: [f64; 2],
    h: f64,
) -> Result<f64> {
    let f = factor(p);
    if !(f > 0.0) {
        return Err(Error::Domain(format!("conformal factor {f:e} is not positive")));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!("step {h:e} must be positive")));
    }
    let c = lambda(p);
    let at = |a: f64, b: f64| lambda([p[0] + a, p[1] + b]);
    let lap = (at(h, 0.0) + at(-h, 0.0) + at(0.0, h) + at(0.0, -h) - 4.0 * c) / (h * h);
    Ok(lap / f)
}

/// Outcome of comparing a Minkowski surface with the same surface under
/// the rescaled metric `e^{2ρ}η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    /// Sup of `|ĨI - II + ⟨,⟩·𝒩 grad ρ|` over samples and chart directions.
    pub identity_residual: f64,
    pub flat: ClassificationReport,
    pub rescaled: ClassificationReport,
    /// Both `L₊` and `L₋` vanishing flags coincide.
    pub l_flags_agree: bool,
}

/// Checks the transformation law of II under `η ↦ e^{2ρ}η`.
pub fn conformal_change_check(imm: &Immersion, amb: &RescaledMinkowski, tol: f64) -> Result<ConformalReport> {
    if imm.space_form != SpaceForm::Minkowski {
        return Err(Error::Config("conformal change is defined on Minkowski charts".into()));
    }
    let flat = classify(imm, tol)?;
    let rescaled = classify_in(imm, amb, tol)?;
    let residual = imm
        .grid
        .points()
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let (a, b) = match (imm.sample(p), imm.sample_in(amb, p)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(Error::Degenerate { .. } | Error::Signature { .. }), _)
                | (_, Err(Error::Degenerate { .. } | Error::Signature { .. })) => return Ok(0.0),
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            let x = a.point;
            let grad = amb.grad_rho([x[0], x[1], x[2], x[3]]);
            let mut ngrad = MVec::zero(x.signature());
            for al in 0..2 {
                ngrad += a.frame[al] * (FRAME_EPS[al] * grad.dot(&a.frame[al]));
            }
            let mut r: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let v = b.second[i][j] - a.second[i][j] + ngrad * a.d[i].dot(&a.d[j]);
                    r = r.max(v.euclid());
                }
            }
            Ok(r)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let l_flags_agree = flat.flags.pos_semi_umbilic == rescaled.flags.pos_semi_umbilic
        && flat.flags.neg_semi_umbilic == rescaled.flags.neg_semi_umbilic;
    Ok(ConformalReport { identity_residual: residual, flat, rescaled, l_flags_agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::Signature;

    fn plane() -> Immersion {
        Immersion::from_fn(SpaceForm::Minkowski, Grid::square(-1.0, 1.0, 9).unwrap(), |z| {
            MVec::new(Signature::R41, &[0.0, 0.0, z[0], z[1]]).unwrap()
        })
        .unwrap()
    }

    fn sphere(theta: f64) -> Immersion {
        Immersion::from_fn(SpaceForm::Minkowski, Grid::square(-0.8, 0.8, 9).unwrap(), move |z| {
            let r2 = z[0] * z[0] + z[1] * z[1];
            let d = 1.0 + r2;
            MVec::new(Signature::R41, &[0.0, theta * 2.0 * z[0] / d, theta * 2.0 * z[1] / d, theta * (1.0 - r2) / d])
                .unwrap()
        })
        .unwrap()
    }

    #[test]
    fn plane_has_standard_frame() {
        let sd = plane().sample([0.3, -0.2]).unwrap();
        for i in 0..4 {
            let want = MVec::basis(Signature::R41, i);
            assert!((sd.frame[i] - want).euclid() < 1e-12, "e{} = {:?}", i + 1, sd.frame[i]);
        }
        assert!((sd.f - 1.0).abs() < 1e-12);
        assert!(sd.h.iter().flatten().flatten().all(|v| v.abs() < 1e-9));
        assert!(sd.gram_residual() < 1e-10);
    }

    #[test]
    fn unit_sphere_has_unit_curvature() {
        let sd = sphere(1.0).sample([0.2, 0.1]).unwrap();
        let r2: f64 = 0.05;
        assert!((sd.f - 4.0 / (1.0 + r2).powi(2)).abs() < 1e-5, "F = {}", sd.f);
        // the boosted frame keeps e₂ within the radial line up to the time part
        let mut mean = [0.0; 2];
        for (al, m) in mean.iter_mut().enumerate() {
            *m = 0.5 * (sd.h[al][0][0] + sd.h[al][1][1]);
            assert!((sd.h[al][0][0] - sd.h[al][1][1]).abs() < 1e-6);
            assert!(sd.h[al][0][1].abs() < 1e-6);
        }
        // e₂ is the outward radial field, so h_ij² = -δ_ij
        assert!(mean[0].abs() < 1e-5 && (mean[1] + 1.0).abs() < 1e-5, "{mean:?}");
        assert!(sd.gram_residual() < 1e-10);
    }

    #[test]
    fn decomposition_of_a_timelike_umbilic_part() {
        let mut h = [[[0.0; 2]; 2]; 2];
        h[0][0][0] = 1.0;
        h[0][1][1] = 1.0;
        let d = Decomposition::from_h(&h);
        assert_eq!(d.h_plus, 0.5);
        assert_eq!(d.h_minus, -0.5);
        assert_eq!(d.l_plus, Complex64::new(0.0, 0.0));
        assert_eq!(d.l_minus, Complex64::new(0.0, 0.0));
        assert_eq!(d.reconstruct(), h);
    }

    #[test]
    fn plane_is_everything() {
        let r = classify(&plane(), DEFAULT_TOL).unwrap();
        assert_eq!(r.samples, 81);
        assert!(r.flags.totally_umbilic && r.flags.stationary && r.flags.plus_isotropic && r.flags.minus_isotropic);
    }

    #[test]
    fn degenerate_samples_are_recorded() {
        let imm = Immersion::from_fn(SpaceForm::Minkowski, Grid::square(-1.0, 1.0, 5).unwrap(), |z| {
            MVec::new(Signature::R41, &[0.0, 0.0, z[0] * z[1], z[1]]).unwrap()
        })
        .unwrap();
        let r = classify(&imm, DEFAULT_TOL).unwrap();
        assert_eq!(r.rejected.len(), 5);
        assert_eq!(r.samples, 20);
    }

    #[test]
    fn timelike_charts_are_rejected() {
        let imm = Immersion::from_fn(SpaceForm::Minkowski, Grid::square(-1.0, 1.0, 3).unwrap(), |z| {
            MVec::new(Signature::R41, &[z[0], 0.0, 0.0, z[1]]).unwrap()
        })
        .unwrap();
        assert!(matches!(imm.sample([0.0, 0.0]), Err(Error::Signature { .. })));
        assert!(classify(&imm, 1e-5).is_err());
    }

    #[test]
    fn bad_configuration_is_rejected() {
        assert!(classify(&plane(), 0.0).is_err());
        assert!(Grid::square(1.0, -1.0, 4).is_err());
        assert!(plane().with_fd_step(0.5).is_err());
        assert!(bochner_laplace(&|_| 1.0, &|_| 0.0, [0.0, 0.0], 1e-3).is_err());
    }

    #[test]
    fn flat_laplacian() {
        let one = |_: [f64; 2]| 1.0;
        let p = [0.3, -0.4];
        let l1 = bochner_laplace(&|z| z[0] * z[0], &one, p, 1e-3).unwrap();
        let l2 = bochner_laplace(&|z| z[0] * z[0] + z[1] * z[1], &one, p, 1e-3).unwrap();
        assert!((l1 - 2.0).abs() < 1e-6 && (l2 - 4.0).abs() < 1e-6);
    }

    #[test]
    fn lattice_chart_matches_analytic_chart() {
        let f = |z: [f64; 2]| {
            MVec::new(Signature::R41, &[z[0] * z[0] + z[1] * z[1], z[0] * z[0] + z[1] * z[1], z[0], z[1]]).unwrap()
        };
        let lat = LatticeChart::from_fn(SpaceForm::Minkowski, [-1.0, -1.0], [0.05, 0.05], [41, 41], f);
        let imm = Immersion::from_lattice(lat).unwrap();
        let a = imm.sample([0.25, -0.5]).unwrap();
        let b = Immersion::from_fn(SpaceForm::Minkowski, imm.grid, f).unwrap().sample([0.25, -0.5]).unwrap();
        for al in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a.h[al][i][j] - b.h[al][i][j]).abs() < 1e-8);
                }
            }
        }
        assert!(imm.sample([0.26, 0.0]).is_err());
        assert!(imm.sample([-1.0, 0.0]).is_err());
    }

    #[test]
    fn rescaling_by_constant_rho_leaves_no_residual() {
        let amb = RescaledMinkowski::new(|_| 0.0, 1e-4).unwrap();
        let r = conformal_change_check(&sphere(1.0), &amb, DEFAULT_TOL).unwrap();
        assert!(r.identity_residual < 1e-12);
        assert!(r.l_flags_agree);
    }
}
