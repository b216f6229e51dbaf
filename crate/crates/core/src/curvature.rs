//! Curvature of metrics given in a coordinate chart on an open set of ℝ⁴,
//! by finite differences of the metric components.
//!
//! Components follow the convention `R(X,Y,Z,W) = g(R(X,Y)W, Z)` with
//! `R(X,Y) = [∇_X,∇_Y] - ∇_[X,Y]`, under which a space of constant curvature
//! `S` has `R(X,Y,Z,W) = S(⟨X,Z⟩⟨Y,W⟩ - ⟨X,W⟩⟨Y,Z⟩)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{lie_basis, Signature, FRAME_EPS};
use crate::space_form::FrameCurvature;

pub type Metric4 = [[f64; 4]; 4];
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;

const ETA: Metric4 = [[-1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

/// A Lorentzian metric in a chart, `∂₁` timelike.
pub trait MetricChart: Send + Sync {
    fn metric(&self, x: [f64; 4]) -> Metric4;

    /// Metric with first and second coordinate derivatives at `x`.
    fn jet(&self, x: [f64; 4], h: f64) -> Result<MetricJet> {
        if !(h >= 1e-12) {
            return Err(Error::Config(format!("finite-difference step {h:e} is below 1e-12")));
        }
        let at = |a: usize, da: f64, b: usize, db: f64| {
            let mut y = x;
            y[a] += da;
            y[b] += db;
            self.metric(y)
        };
        let g = self.metric(x);
        let mut dg = [[[0.0; 4]; 4]; 4];
        let mut ddg = [[[[0.0; 4]; 4]; 4]; 4];
        for c in 0..4 {
            let p = at(c, h, c, 0.0);
            let m = at(c, -h, c, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    dg[c][i][j] = (p[i][j] - m[i][j]) / (2.0 * h);
                    ddg[c][c][i][j] = (p[i][j] - 2.0 * g[i][j] + m[i][j]) / (h * h);
                }
            }
            for d in c + 1..4 {
                let pp = at(c, h, d, h);
                let pm = at(c, h, d, -h);
                let mp = at(c, -h, d, h);
                let mm = at(c, -h, d, -h);
                for i in 0..4 {
                    for j in 0..4 {
                        let v = (pp[i][j] - pm[i][j] - mp[i][j] + mm[i][j]) / (4.0 * h * h);
                        ddg[c][d][i][j] = v;
                        ddg[d][c][i][j] = v;
                    }
                }
            }
        }
        Ok(MetricJet { g, dg, ddg })
    }
}

impl<F: Fn([f64; 4]) -> Metric4 + Send + Sync> MetricChart for F {
    fn metric(&self, x: [f64; 4]) -> Metric4 {
        self(x)
    }
}

/// `g_ij`, `∂_c g_ij` (as `dg[c][i][j]`) and `∂_c∂_d g_ij` at a point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: Metric4,
    pub dg: [Metric4; 4],
    pub ddg: [[Metric4; 4]; 4],
}

fn inverse(g: &Metric4) -> Result<Metric4> {
    let m = Matrix4::from_fn(|i, j| g[i][j]);
    let scale = m.amax().max(1.0);
    if m.determinant().abs() < 1e-12 * scale.powi(4) {
        return Err(Error::Domain("metric is degenerate".into()));
    }
    let inv = m.try_inverse().ok_or_else(|| Error::Domain("metric is degenerate".into()))?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])))
}

/// Christoffel symbols `Γ^a_bc` as `gamma[a][b][c]`.
pub fn christoffel(g: &Metric4, dg: &[Metric4; 4]) -> Result<[Metric4; 4]> {
    let gi = inverse(g)?;
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for e in 0..4 {
                    s += gi[a][e] * (dg[b][e][c] + dg[c][e][b] - dg[e][b][c]);
                }
                gamma[a][b][c] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

/// Coordinate curvature data at one point.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub g: Metric4,
    pub g_inv: Metric4,
    /// `R(∂_a,∂_b,∂_c,∂_d)`.
    pub riemann: Tensor4,
}

impl MetricJet {
    pub fn curvature(&self) -> Result<Curvature> {
        let g = &self.g;
        let gi = inverse(g)?;
        let gamma = christoffel(g, &self.dg)?;
        // ∂_d g^{ae} = -g^{ap} ∂_d g_pq g^{qe}
        let mut dgi = [[[0.0; 4]; 4]; 4];
        for d in 0..4 {
            for a in 0..4 {
                for e in 0..4 {
                    let mut s = 0.0;
                    for p in 0..4 {
                        for q in 0..4 {
                            s += gi[a][p] * self.dg[d][p][q] * gi[q][e];
                        }
                    }
                    dgi[d][a][e] = -s;
                }
            }
        }
        // dgamma[d][a][b][c] = ∂_d Γ^a_bc
        let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
        for d in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let mut s = 0.0;
                        for e in 0..4 {
                            let lower = self.dg[b][e][c] + self.dg[c][e][b] - self.dg[e][b][c];
                            let dlower = self.ddg[d][b][e][c] + self.ddg[d][c][e][b] - self.ddg[d][e][b][c];
                            s += dgi[d][a][e] * lower + gi[a][e] * dlower;
                        }
                        dgamma[d][a][b][c] = 0.5 * s;
                    }
                }
            }
        }
        // R(∂_c,∂_d)∂_b = R^a_bcd ∂_a
        let mut up = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut s = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                        for e in 0..4 {
                            s += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                        }
                        up[a][b][c][d] = s;
                    }
                }
            }
        }
        let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut s = 0.0;
                        for e in 0..4 {
                            s += g[c][e] * up[e][d][a][b];
                        }
                        riemann[a][b][c][d] = s;
                    }
                }
            }
        }
        Ok(Curvature { g: *g, g_inv: gi, riemann })
    }
}

/// Coordinate components of the curvature tensor of `chart` at `x`.
/// The jets at steps `h` and `2h` are combined by Richardson extrapolation.
pub fn riemann_numeric(chart: &dyn MetricChart, x: [f64; 4], h: f64) -> Result<Curvature> {
    chart.jet(x, h)?.extrapolate(&chart.jet(x, 2.0 * h)?).curvature()
}

impl MetricJet {
    /// `(4·self - coarse)/3` on the derivatives, for `coarse` taken at twice
    /// the step of `self`.
    pub fn extrapolate(&self, coarse: &MetricJet) -> MetricJet {
        let mut out = self.clone();
        for c in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    out.dg[c][i][j] = (4.0 * self.dg[c][i][j] - coarse.dg[c][i][j]) / 3.0;
                    for d in 0..4 {
                        out.ddg[c][d][i][j] = (4.0 * self.ddg[c][d][i][j] - coarse.ddg[c][d][i][j]) / 3.0;
                    }
                }
            }
        }
        out
    }
}

impl Curvature {
    pub fn ricci(&self) -> Metric4 {
        let mut ric = [[0.0; 4]; 4];
        for b in 0..4 {
            for d in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    for c in 0..4 {
                        s += self.g_inv[a][c] * self.riemann[a][b][c][d];
                    }
                }
                ric[b][d] = s;
            }
        }
        ric
    }

    pub fn scalar(&self) -> f64 {
        let ric = self.ricci();
        let mut s = 0.0;
        for b in 0..4 {
            for d in 0..4 {
                s += self.g_inv[b][d] * ric[b][d];
            }
        }
        s
    }

    /// The curvature tensor minus its Ricci part.
    pub fn weyl(&self) -> Tensor4 {
        let ric = self.ricci();
        let scal = self.scalar();
        let g = &self.g;
        let p: Metric4 = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (ric[i][j] - scal / 6.0 * g[i][j])));
        let mut w = self.riemann;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        w[a][b][c][d] -=
                            p[a][c] * g[b][d] + p[b][d] * g[a][c] - p[a][d] * g[b][c] - p[b][c] * g[a][d];
                    }
                }
            }
        }
        w
    }

    /// An orthonormal frame (as coordinate components `frame[i][a]`) obtained
    /// by Gram–Schmidt from the coordinate basis.
    pub fn coordinate_frame(&self) -> Result<[[f64; 4]; 4]> {
        let g = &self.g;
        let ip = |u: &[f64; 4], v: &[f64; 4]| {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += g[a][b] * u[a] * v[b];
                }
            }
            s
        };
        let mut f = [[0.0; 4]; 4];
        for i in 0..4 {
            let mut v = [0.0; 4];
            v[i] = 1.0;
            for j in 0..i {
                let p = FRAME_EPS[j] * ip(&v, &f[j]);
                for a in 0..4 {
                    v[a] -= p * f[j][a];
                }
            }
            let n = ip(&v, &v);
            if !(n * FRAME_EPS[i] > 1e-12) {
                return Err(Error::Domain("coordinate vectors do not have signature (-,+,+,+)".into()));
            }
            let s = n.abs().sqrt();
            for a in 0..4 {
                f[i][a] = v[a] / s;
            }
        }
        Ok(f)
    }

    /// Components in a frame given by coordinate components `frame[i][a]`.
    pub fn in_frame(&self, frame: &[[f64; 4]; 4]) -> FrameCurvature {
        contract(&self.riemann, frame)
    }
}

/// `T(s_i, s_j, s_k, s_l)` for a tensor given in coordinates.
pub fn contract(t: &Tensor4, s: &[[f64; 4]; 4]) -> Tensor4 {
    // contract one slot at a time
    let mut a1 = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    a1[i][b][c][d] = (0..4).map(|a| s[i][a] * t[a][b][c][d]).sum();
                }
            }
        }
    }
    let mut a2 = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    a2[i][j][c][d] = (0..4).map(|b| s[j][b] * a1[i][b][c][d]).sum();
                }
            }
        }
    }
    let mut a3 = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for d in 0..4 {
                    a3[i][j][k][d] = (0..4).map(|c| s[k][c] * a2[i][j][c][d]).sum();
                }
            }
        }
    }
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    out[i][j][k][l] = (0..4).map(|d| s[l][d] * a3[i][j][k][d]).sum();
                }
            }
        }
    }
    out
}

pub fn max_abs(t: &Tensor4) -> f64 {
    t.iter().flatten().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

/// A random element of the identity component of the Lorentz group, as a
/// product of six one-parameter subgroups.
pub fn random_lorentz(rng: &mut impl Rng) -> [[f64; 4]; 4] {
    let mut a = nalgebra::DMatrix::<f64>::identity(4, 4);
    for i in 0..4 {
        for j in i + 1..4 {
            let t = if i == 0 { rng.gen_range(-1.5..1.5) } else { rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI) };
            let e = lie_basis(i, j, Signature::R41).expect("valid generator").scale(t).exp();
            a *= e;
        }
    }
    std::array::from_fn(|i| std::array::from_fn(|j| a[(i, j)]))
}

/// Frame `s'_j = Σ_i s_i A_ij` in coordinate components.
pub fn transform_frame(frame: &[[f64; 4]; 4], a: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    std::array::from_fn(|j| std::array::from_fn(|c| (0..4).map(|i| frame[i][c] * a[i][j]).sum()))
}

/// Seed for the frames sampled at the `index`-th audited point.
pub fn frame_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// The two combinations whose vanishing for every adapted frame is the
/// integrability condition of the plus-plus optical structure on the
/// twistor space. They only see the Weyl tensor.
pub fn integrability_oplus(r: &FrameCurvature) -> [f64; 2] {
    let c = |i: usize, j: usize, k: usize, l: usize| r[i - 1][j - 1][k - 1][l - 1];
    [
        (c(1, 4, 1, 3) + c(2, 4, 1, 3) + c(1, 4, 2, 3) + c(2, 4, 2, 3)).abs(),
        (c(1, 4, 1, 4) + c(2, 4, 1, 4) + c(1, 4, 2, 4) + c(2, 4, 2, 4)
            - c(1, 3, 1, 3)
            - c(2, 3, 1, 3)
            - c(1, 3, 2, 3)
            - c(2, 3, 2, 3))
            .abs(),
    ]
}

/// The four combinations whose vanishing for every adapted frame is the
/// integrability condition of the plus optical structure on the
/// Grassmannian bundle.
pub fn integrability_og(r: &FrameCurvature) -> [f64; 4] {
    let c = |i: usize, j: usize, k: usize, l: usize| r[i - 1][j - 1][k - 1][l - 1];
    [
        (c(1, 4, 1, 4) + c(2, 4, 1, 4) - c(1, 3, 1, 3) - c(2, 3, 1, 3)).abs(),
        (c(1, 4, 2, 4) + c(2, 4, 2, 4) - c(1, 3, 2, 3) - c(2, 3, 2, 3)).abs(),
        (2.0 * c(1, 3, 1, 4) + c(2, 3, 1, 4) + c(2, 4, 1, 3)).abs(),
        (2.0 * c(2, 3, 2, 4) + c(1, 4, 2, 3) + c(1, 3, 2, 4)).abs(),
    ]
}

/// Sup of the integrability residuals over sampled frames at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    pub x: [f64; 4],
    pub oplus: [f64; 2],
    pub og: [f64; 4],
}

impl AuditPoint {
    pub fn oplus_max(&self) -> f64 {
        self.oplus[0].max(self.oplus[1])
    }
    pub fn og_max(&self) -> f64 {
        self.og.iter().fold(0.0, |m, x| m.max(*x))
    }
}

/// Evaluates both sets of conditions on `frames` random adapted frames at `x`.
pub fn audit_point(chart: &dyn MetricChart, x: [f64; 4], h: f64, frames: usize, seed: u64) -> Result<AuditPoint> {
    audit_curvature(&riemann_numeric(chart, x, h)?, x, frames, seed)
}

/// Named metric charts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "snake_case")]
pub enum BuiltinChart {
    /// The Minkowski metric.
    Flat,
    /// S⁴₁ as the graph `x₃ = √(1 + x₁² - x₂² - x₄² - x₅²)` over `(x₁,x₂,x₄,x₅)`.
    DeSitterGraph,
    /// H⁴₁ as the graph `x₁ = √(1 - x₂² + x₃² + x₄² + x₅²)` over `(x₂,x₃,x₄,x₅)`.
    AntiDeSitterGraph,
    /// `e^{2ρ}η` with `ρ = a·x₃²`.
    Conformal { a: f64 },
    /// `-dx₁² + dx₂² + e^{2σ}(dx₃² + dx₄²)` with `σ = a(x₃² + x₄²)`: flat
    /// Lorentzian plane times a surface of nonconstant curvature.
    Product { a: f64 },
}

impl BuiltinChart {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "flat" => BuiltinChart::Flat,
            "s41" | "de-sitter" => BuiltinChart::DeSitterGraph,
            "h41" | "anti-de-sitter" => BuiltinChart::AntiDeSitterGraph,
            "conformal" => BuiltinChart::Conformal { a: 0.1 },
            "product" | "nonconformal" => BuiltinChart::Product { a: 0.2 },
            _ => {
                return Err(Error::Config(format!(
                    "unknown metric chart `{name}` (expected flat, s41, h41, conformal or product)"
                )))
            }
        })
    }

    /// Points where the chart is evaluated by the audits.
    pub fn sample_points(&self) -> Vec<[f64; 4]> {
        let r = match self {
            BuiltinChart::DeSitterGraph | BuiltinChart::AntiDeSitterGraph => 0.3,
            _ => 0.8,
        };
        vec![
            [0.0, 0.0, 0.0, 0.0],
            [0.5 * r, -0.2 * r, 0.7 * r, 0.1 * r],
            [-0.3 * r, 0.6 * r, -0.4 * r, 0.9 * r],
            [0.2 * r, 0.3 * r, r, -0.5 * r],
            [-r, 0.1 * r, 0.3 * r, 0.6 * r],
        ]
    }
}

impl MetricChart for BuiltinChart {
    fn metric(&self, x: [f64; 4]) -> Metric4 {
        match *self {
            BuiltinChart::Flat => ETA,
            BuiltinChart::DeSitterGraph => {
                let phi = (1.0 + x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3]).sqrt();
                let d = [x[0] / phi, -x[1] / phi, -x[2] / phi, -x[3] / phi];
                std::array::from_fn(|i| std::array::from_fn(|j| ETA[i][j] + d[i] * d[j]))
            }
            BuiltinChart::AntiDeSitterGraph => {
                let psi = (1.0 - x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
                let d = [-x[0] / psi, x[1] / psi, x[2] / psi, x[3] / psi];
                std::array::from_fn(|i| std::array::from_fn(|j| ETA[i][j] - d[i] * d[j]))
            }
            BuiltinChart::Conformal { a } => {
                let w = (2.0 * a * x[2] * x[2]).exp();
                std::array::from_fn(|i| std::array::from_fn(|j| w * ETA[i][j]))
            }
            BuiltinChart::Product { a } => {
                let w = (2.0 * a * (x[2] * x[2] + x[3] * x[3])).exp();
                let mut g = ETA;
                g[2][2] = w;
                g[3][3] = w;
                g
            }
        }
    }
}

/// Metric components sampled on a regular lattice in ℝ⁴.
///
/// `g` lists the 4×4 matrices node by node with the last coordinate index
/// varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricLattice {
    pub origin: [f64; 4],
    pub spacing: [f64; 4],
    pub shape: [usize; 4],
    pub g: Vec<Metric4>,
}

impl MetricLattice {
    pub fn validate(&self) -> Result<()> {
        let n: usize = self.shape.iter().product();
        if self.g.len() != n {
            return Err(Error::Config(format!("metric lattice has {} nodes, shape needs {n}", self.g.len())));
        }
        if self.shape.iter().any(|&s| s < 3) || self.spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config("metric lattice needs at least 3 nodes and positive spacing per axis".into()));
        }
        Ok(())
    }

    /// Samples a chart on a lattice.
    pub fn sample(chart: &dyn MetricChart, origin: [f64; 4], spacing: [f64; 4], shape: [usize; 4]) -> Self {
        let mut g = Vec::with_capacity(shape.iter().product());
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                for k in 0..shape[2] {
                    for l in 0..shape[3] {
                        let idx = [i, j, k, l];
                        g.push(chart.metric(std::array::from_fn(|a| origin[a] + spacing[a] * idx[a] as f64)));
                    }
                }
            }
        }
        MetricLattice { origin, spacing, shape, g }
    }

    fn node(&self, idx: [usize; 4]) -> &Metric4 {
        let s = self.shape;
        &self.g[((idx[0] * s[1] + idx[1]) * s[2] + idx[2]) * s[3] + idx[3]]
    }

    pub fn position(&self, idx: [usize; 4]) -> [f64; 4] {
        std::array::from_fn(|a| self.origin[a] + self.spacing[a] * idx[a] as f64)
    }

    /// Interior node indices.
    pub fn interior(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        let s = self.shape;
        for i in 1..s[0] - 1 {
            for j in 1..s[1] - 1 {
                for k in 1..s[2] - 1 {
                    for l in 1..s[3] - 1 {
                        out.push([i, j, k, l]);
                    }
                }
            }
        }
        out
    }

    /// Metric jet at an interior node from lattice differences.
    pub fn jet_at(&self, idx: [usize; 4]) -> Result<MetricJet> {
        self.validate()?;
        if (0..4).any(|a| idx[a] == 0 || idx[a] + 1 >= self.shape[a]) {
            return Err(Error::Config(format!("lattice node {idx:?} is not interior")));
        }
        let at = |a: usize, da: isize, b: usize, db: isize| {
            let mut j = idx;
            j[a] = (j[a] as isize + da) as usize;
            j[b] = (j[b] as isize + db) as usize;
            *self.node(j)
        };
        let h = self.spacing;
        let g = *self.node(idx);
        let mut dg = [[[0.0; 4]; 4]; 4];
        let mut ddg = [[[[0.0; 4]; 4]; 4]; 4];
        for c in 0..4 {
            let p = at(c, 1, c, 0);
            let m = at(c, -1, c, 0);
            for i in 0..4 {
                for j in 0..4 {
                    dg[c][i][j] = (p[i][j] - m[i][j]) / (2.0 * h[c]);
                    ddg[c][c][i][j] = (p[i][j] - 2.0 * g[i][j] + m[i][j]) / (h[c] * h[c]);
                }
            }
            for d in c + 1..4 {
                let (pp, pm, mp, mm) = (at(c, 1, d, 1), at(c, 1, d, -1), at(c, -1, d, 1), at(c, -1, d, -1));
                for i in 0..4 {
                    for j in 0..4 {
                        let v = (pp[i][j] - pm[i][j] - mp[i][j] + mm[i][j]) / (4.0 * h[c] * h[d]);
                        ddg[c][d][i][j] = v;
                        ddg[d][c][i][j] = v;
                    }
                }
            }
        }
        Ok(MetricJet { g, dg, ddg })
    }
}

/// A metric source accepted by the audit front end.
#[derive(Clone)]
pub enum MetricSource {
    Builtin(BuiltinChart),
    Lattice(Arc<MetricLattice>),
}

impl fmt::Debug for MetricSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSource::Builtin(b) => write!(f, "Builtin({b:?})"),
            MetricSource::Lattice(l) => write!(f, "Lattice(shape {:?})", l.shape),
        }
    }
}

impl MetricSource {
    /// Audits every sample point (builtin) or interior node (lattice).
    pub fn audit(&self, h: f64, frames: usize, seed: u64) -> Result<Vec<AuditPoint>> {
        use rayon::prelude::*;
        match self {
            MetricSource::Builtin(chart) => chart
                .sample_points()
                .par_iter()
                .enumerate()
                .map(|(i, x)| audit_point(chart, *x, h, frames, frame_seed(seed, i as u64)))
                .collect(),
            MetricSource::Lattice(lat) => {
                lat.validate()?;
                lat.interior()
                    .par_iter()
                    .enumerate()
                    .map(|(i, idx)| {
                        let curv = lat.jet_at(*idx)?.curvature()?;
                        audit_curvature(&curv, lat.position(*idx), frames, frame_seed(seed, i as u64))
                    })
                    .collect()
            }
        }
    }
}

/// [`audit_point`] for precomputed curvature.
pub fn audit_curvature(curv: &Curvature, x: [f64; 4], frames: usize, seed: u64) -> Result<AuditPoint> {
    let base = curv.coordinate_frame()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = AuditPoint { x, oplus: [0.0; 2], og: [0.0; 4] };
    for n in 0..frames {
        let frame = if n == 0 { base } else { transform_frame(&base, &random_lorentz(&mut rng)) };
        let r = curv.in_frame(&frame);
        for (o, v) in out.oplus.iter_mut().zip(integrability_oplus(&r)) {
            *o = o.max(v);
        }
        for (o, v) in out.og.iter_mut().zip(integrability_og(&r)) {
            *o = o.max(v);
        }
    }
    Ok(out)
}
