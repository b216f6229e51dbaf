//! Gauss lifts of a spacelike surface into the bundle of null directions
//! and the bundle of oriented spacelike 2-planes, the six almost optical
//! structures evaluated on them, the CR comparison on hypersurfaces and the
//! tension of the Grassmannian lift.
//!
//! Lift differentials are written in Darboux-frame components: a horizontal
//! part `(⟨df,e₃⟩, ⟨df,e₄⟩)` and a vertical part in the fibre basis
//! `(E₁₃∓E₂₃, E₁₄∓E₂₄)` for null directions or `(E₁₃,E₂₃,E₁₄,E₂₄)` for
//! planes. On `e_i` the vertical parts are
//!
//! * `γ₊`: `((h²ᵢ₃-h¹ᵢ₃)/2, (h²ᵢ₄-h¹ᵢ₄)/2)`,
//! * `γ₋`: `(-(h¹ᵢ₃+h²ᵢ₃)/2, -(h¹ᵢ₄+h²ᵢ₄)/2)`,
//! * `v`: `(-h¹ᵢ₃, -h²ᵢ₃, -h¹ᵢ₄, -h²ᵢ₄)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::curvature::{integrability_og, integrability_oplus};

use crate::ambient::Ambient;
use crate::error::{Error, Result};
use crate::lorentz::{MVec, NullDir, NullSign, FRAME_EPS};
use crate::space_form::Hypersurface;
use crate::surface::{classify_in, partition_samples, Chart, Immersion, SurfaceData};

/// Differential of `γ_{f±}` at one sample.
#[derive(Clone, Copy, Debug)]
pub struct TwistorLiftSample {
    pub base: MVec,
    pub sign: NullSign,
    pub direction: NullDir,
    /// `df(∂₁), df(∂₂)`.
    pub d_horizontal: [MVec; 2],
    /// Vertical part of `dγ(∂_a)` in `(E₁₃∓E₂₃, E₁₄∓E₂₄)`.
    pub d_vertical: [[f64; 2]; 2],
}

/// Differential of the Grassmannian lift `v_f` at one sample.
#[derive(Clone, Copy, Debug)]
pub struct GrassLiftSample {
    pub base: MVec,
    /// `(e₃, e₄)`.
    pub plane: [MVec; 2],
    pub d_horizontal: [MVec; 2],
    /// Vertical part of `dv(∂_a)` in `(E₁₃,E₂₃,E₁₄,E₂₄)`.
    pub d_vertical: [[f64; 4]; 2],
}

/// Vertical components of `dγ_±(e_i)`.
pub fn twistor_vertical_frame(sd: &SurfaceData, sign: NullSign) -> [[f64; 2]; 2] {
    let h = &sd.h;
    let s = sign.as_f64();
    [0, 1].map(|i| [0, 1].map(|j| s * 0.5 * (h[1][i][j] - s * h[0][i][j])))
}

/// Vertical components of `dv(e_i)`.
pub fn grass_vertical_frame(sd: &SurfaceData) -> [[f64; 4]; 2] {
    let h = &sd.h;
    [0, 1].map(|i| [-h[0][i][0], -h[1][i][0], -h[0][i][1], -h[1][i][1]])
}

fn to_chart<const N: usize>(sd: &SurfaceData, on_frame: [[f64; N]; 2]) -> [[f64; N]; 2] {
    [0, 1].map(|a| std::array::from_fn(|k| sd.screen[a][0] * on_frame[0][k] + sd.screen[a][1] * on_frame[1][k]))
}

impl TwistorLiftSample {
    pub fn from_surface(sd: &SurfaceData, sign: NullSign) -> Result<Self> {
        let k = match sign {
            NullSign::Plus => sd.frame[0] + sd.frame[1],
            NullSign::Minus => sd.frame[0] - sd.frame[1],
        };
        Ok(TwistorLiftSample {
            base: sd.point,
            sign,
            direction: NullDir::new(k)?,
            d_horizontal: sd.d,
            d_vertical: to_chart(sd, twistor_vertical_frame(sd, sign)),
        })
    }
}

impl GrassLiftSample {
    pub fn from_surface(sd: &SurfaceData) -> Self {
        GrassLiftSample {
            base: sd.point,
            plane: [sd.frame[2], sd.frame[3]],
            d_horizontal: sd.d,
            d_vertical: to_chart(sd, grass_vertical_frame(sd)),
        }
    }

    /// The null directions `α₊(v)` and `α₋(v)` of the normal plane.
    pub fn null_directions(&self, amb: &dyn Ambient) -> Result<(NullDir, NullDir)> {
        let x = self.base;
        let [e3, e4] = self.plane;
        let t = amb.time_reference(&x);
        let strip = |v: MVec| {
            let v = match amb.radial(&x) {
                Some(r) => v - r * (v.dot(&r) / r.dot(&r)),
                None => v,
            };
            v - e3 * amb.inner(&x, &v, &e3) - e4 * amb.inner(&x, &v, &e4)
        };
        let tn = strip(t);
        let e1 = tn / (-amb.inner(&x, &tn, &tn)).sqrt();
        let mut best = (f64::NEG_INFINITY, x);
        for k in 0..x.dims() {
            let mut v = strip(MVec::basis(x.signature(), k));
            v += e1 * amb.inner(&x, &v, &e1);
            let n = amb.inner(&x, &v, &v);
            if n > best.0 {
                best = (n, v);
            }
        }
        let mut e2 = best.1 / best.0.sqrt();
        if amb.orientation(&x, &[e1, e2, e3, e4]) < 0.0 {
            e2 = -e2;
        }
        Ok((NullDir::new(e1 + e2)?, NullDir::new(e1 - e2)?))
    }

    /// `α±` applied to the vertical part: `((a∓b)/2, (c∓d)/2)`.
    pub fn project_vertical(&self, sign: NullSign) -> [[f64; 2]; 2] {
        let s = sign.as_f64();
        self.d_vertical.map(|[a, b, c, d]| [(a - s * b) / 2.0, (c - s * d) / 2.0])
    }
}

pub fn gauss_lift(imm: &Immersion, sign: NullSign, p: [f64; 2]) -> Result<TwistorLiftSample> {
    TwistorLiftSample::from_surface(&imm.sample(p)?, sign)
}

pub fn grass_lift(imm: &Immersion, p: [f64; 2]) -> Result<GrassLiftSample> {
    Ok(GrassLiftSample::from_surface(&imm.sample(p)?))
}

/// The six almost optical structures on the lift targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Structure {
    #[serde(rename = "O++")]
    PlusPlus,
    #[serde(rename = "O+-")]
    PlusMinus,
    #[serde(rename = "O-+")]
    MinusPlus,
    #[serde(rename = "O--")]
    MinusMinus,
    #[serde(rename = "OG+")]
    GrassPlus,
    #[serde(rename = "OG-")]
    GrassMinus,
}

impl Structure {
    pub const ALL: [Structure; 6] = [
        Structure::PlusPlus,
        Structure::PlusMinus,
        Structure::MinusPlus,
        Structure::MinusMinus,
        Structure::GrassPlus,
        Structure::GrassMinus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Structure::PlusPlus => "O++",
            Structure::PlusMinus => "O+-",
            Structure::MinusPlus => "O-+",
            Structure::MinusMinus => "O--",
            Structure::GrassPlus => "OG+",
            Structure::GrassMinus => "OG-",
        }
    }

    /// Null line of the twistor lift, or `None` for the Grassmannian lift.
    pub fn lift(&self) -> Option<NullSign> {
        match self {
            Structure::PlusPlus | Structure::PlusMinus => Some(NullSign::Plus),
            Structure::MinusPlus | Structure::MinusMinus => Some(NullSign::Minus),
            Structure::GrassPlus | Structure::GrassMinus => None,
        }
    }

    /// Sign of the fibre complex structure relative to the reference one.
    fn fibre_sign(&self) -> f64 {
        match self {
            Structure::PlusPlus | Structure::MinusPlus | Structure::GrassMinus => -1.0,
            Structure::PlusMinus | Structure::MinusMinus | Structure::GrassPlus => 1.0,
        }
    }

    /// Classification flag that is equivalent to holomorphy of the lift.
    pub fn equivalent_flag(&self) -> &'static str {
        match self {
            Structure::PlusPlus => "pos_semi_umbilic",
            Structure::PlusMinus => "pos_semi_stationary",
            Structure::MinusPlus => "neg_semi_umbilic",
            Structure::MinusMinus => "neg_semi_stationary",
            Structure::GrassPlus => "totally_umbilic",
            Structure::GrassMinus => "stationary",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Structure::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown structure {s:?}")))
    }
}

/// The three defining conditions of holomorphy at one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolomorphyResiduals {
    /// Pairing of the image with the null line, per unit length.
    pub l: f64,
    /// Smallest singular value of the screen projection, per unit length.
    pub k: f64,
    /// `|π̂ dγ(J∂₁) - J π̂ dγ(∂₁)|` per unit length.
    pub j: f64,
}

/// Evaluates one structure on the lift of one surface sample.
pub fn holomorphy_residuals(sd: &SurfaceData, amb: &dyn Ambient, s: Structure) -> HolomorphyResiduals {
    let sigma = s.fibre_sign();
    let (vert, k): (Vec<[f64; 4]>, MVec) = match s.lift() {
        Some(sign) => {
            let v = to_chart(sd, twistor_vertical_frame(sd, sign));
            let k = match sign {
                NullSign::Plus => sd.frame[0] + sd.frame[1],
                NullSign::Minus => sd.frame[0] - sd.frame[1],
            };
            (v.iter().map(|c| [c[0], c[1], 0.0, 0.0]).collect(), k)
        }
        None => (to_chart(sd, grass_vertical_frame(sd)).to_vec(), sd.frame[0] + sd.frame[1]),
    };
    let n = if s.lift().is_some() { 2 } else { 4 };
    let screen = |a: usize| -> Vec<f64> {
        let mut v = vec![sd.screen[a][0], sd.screen[a][1]];
        v.extend_from_slice(&vert[a][..n]);
        v
    };
    let j_of = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![-v[1], v[0]];
        let f = &v[2..];
        if n == 2 {
            out.extend([sigma * f[1], -sigma * f[0]]);
        } else {
            out.extend([-sigma * f[2], -sigma * f[3], sigma * f[0], sigma * f[1]]);
        }
        out
    };
    let (s1, s2) = (screen(0), screen(1));
    let unit = sd.f.sqrt();
    let j = s2.iter().zip(j_of(&s1)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / unit;
    let x = sd.point;
    let l = sd.d.iter().map(|d| amb.inner(&x, d, &k).abs()).fold(0.0, f64::max) / (unit * k.euclid().max(1e-300));
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let (g11, g12, g22) = (dot(&s1, &s1), dot(&s1, &s2), dot(&s2, &s2));
    let tr = g11 + g22;
    let disc = ((g11 - g22) * (g11 - g22) + 4.0 * g12 * g12).sqrt();
    let k = (0.5 * (tr - disc)).max(0.0).sqrt() / unit;
    HolomorphyResiduals { l, k, j }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyReport {
    pub structure: Structure,
    /// Sup over samples.
    pub residual_l: f64,
    /// Min over samples.
    pub residual_k: f64,
    /// Sup over samples.
    pub residual_j: f64,
    pub tolerance: f64,
    pub verdict: bool,
    pub samples: usize,
}

impl HolomorphyReport {
    fn from_residuals(structure: Structure, tol: f64, r: &[HolomorphyResiduals]) -> Self {
        let residual_l = r.iter().map(|x| x.l).fold(0.0, f64::max);
        let residual_k = r.iter().map(|x| x.k).fold(f64::INFINITY, f64::min);
        let residual_j = r.iter().map(|x| x.j).fold(0.0, f64::max);
        HolomorphyReport {
            structure,
            residual_l,
            residual_k,
            residual_j,
            tolerance: tol,
            verdict: residual_l < tol && residual_k > tol && residual_j < tol,
            samples: r.len(),
        }
    }
}

fn usable_samples(imm: &Immersion, amb: &dyn Ambient) -> Result<Vec<SurfaceData>> {
    let (data, _) = partition_samples(imm.samples_in(amb))?;
    if data.is_empty() {
        return Err(Error::Config("no grid sample yields a spacelike immersion".into()));
    }
    Ok(data)
}

/// Holomorphy of the relevant Gauss lift of `imm` for one structure.
pub fn holomorphy_check(imm: &Immersion, s: Structure, tol: f64) -> Result<HolomorphyReport> {
    holomorphy_check_in(imm, &imm.space_form, s, tol)
}

pub fn holomorphy_check_in(imm: &Immersion, amb: &dyn Ambient, s: Structure, tol: f64) -> Result<HolomorphyReport> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance {tol:e} must be positive")));
    }
    let data = usable_samples(imm, amb)?;
    let r: Vec<_> = data.iter().map(|sd| holomorphy_residuals(sd, amb, s)).collect();
    Ok(HolomorphyReport::from_residuals(s, tol, &r))
}

/// Sup over samples of the vertical part of `dγ±` per unit length.
pub fn horizontality(imm: &Immersion, sign: NullSign) -> Result<f64> {
    let data = usable_samples(imm, &imm.space_form)?;
    Ok(data
        .iter()
        .map(|sd| {
            let v = to_chart(sd, twistor_vertical_frame(sd, sign));
            v.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs())) / sd.f.sqrt()
        })
        .fold(0.0, f64::max))
}

/// Vertical part of `dγ±(∂_a)` from differencing the null normal field:
/// `c_j = -⟨D_a k, e_j⟩/2` with `k = e₁±e₂` on neighbouring samples.
pub fn vertical_by_differencing(imm: &Immersion, sign: NullSign, p: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    let h = neighbour_step(imm);
    let sd = imm.sample(p)?;
    let k = |q: [f64; 2]| -> Result<MVec> {
        let s = imm.sample(q)?;
        Ok(match sign {
            NullSign::Plus => s.frame[0] + s.frame[1],
            NullSign::Minus => s.frame[0] - s.frame[1],
        })
    };
    let mut out = [[0.0; 2]; 2];
    for a in 0..2 {
        let mut qp = p;
        let mut qm = p;
        qp[a] += h[a];
        qm[a] -= h[a];
        let dk = (k(qp)? - k(qm)?) / (2.0 * h[a]);
        for j in 0..2 {
            out[a][j] = -dk.dot(&sd.frame[2 + j]) / 2.0;
        }
    }
    Ok(out)
}

/// Vertical part of `dv(∂_a)` from differencing the frame:
/// `(-⟨De₁,e₃⟩, ⟨De₂,e₃⟩, -⟨De₁,e₄⟩, ⟨De₂,e₄⟩)`.
pub fn grass_vertical_by_differencing(imm: &Immersion, p: [f64; 2]) -> Result<[[f64; 4]; 2]> {
    let h = neighbour_step(imm);
    let sd = imm.sample(p)?;
    let mut out = [[0.0; 4]; 2];
    for a in 0..2 {
        let mut qp = p;
        let mut qm = p;
        qp[a] += h[a];
        qm[a] -= h[a];
        let (fp, fm) = (imm.sample(qp)?.frame, imm.sample(qm)?.frame);
        let d1 = (fp[0] - fm[0]) / (2.0 * h[a]);
        let d2 = (fp[1] - fm[1]) / (2.0 * h[a]);
        let (e3, e4) = (sd.frame[2], sd.frame[3]);
        out[a] = [-d1.dot(&e3), d2.dot(&e3), -d1.dot(&e4), d2.dot(&e4)];
    }
    Ok(out)
}

fn neighbour_step(imm: &Immersion) -> [f64; 2] {
    match &imm.chart {
        Chart::Analytic(_) => [imm.fd_step; 2],
        Chart::Lattice(l) => l.spacing,
    }
}

/// One line of the classification/holomorphy comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    /// Structure name, or `+horizontal` / `-horizontal`.
    pub lift_property: String,
    pub flag: String,
    pub flag_value: bool,
    pub lift_value: bool,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceTable {
    pub tolerance: f64,
    pub rows: Vec<EquivalenceRow>,
    pub holomorphy: Vec<HolomorphyReport>,
    pub all_agree: bool,
}

/// Compares each classification flag with holomorphy of the matching lift,
/// and `±`isotropy with `±`horizontality.
pub fn prop31_crosscheck(imm: &Immersion, tol: f64) -> Result<EquivalenceTable> {
    prop31_crosscheck_in(imm, &imm.space_form, tol)
}

pub fn prop31_crosscheck_in(imm: &Immersion, amb: &dyn Ambient, tol: f64) -> Result<EquivalenceTable> {
    let class = classify_in(imm, amb, tol)?;
    let data = usable_samples(imm, amb)?;
    let flags = serde_json::to_value(class.flags)?;
    let flag = |name: &str| flags[name].as_bool().expect("flag field");
    let mut rows = Vec::new();
    let mut holomorphy = Vec::new();
    for s in Structure::ALL {
        let r: Vec<_> = data.iter().map(|sd| holomorphy_residuals(sd, amb, s)).collect();
        let rep = HolomorphyReport::from_residuals(s, tol, &r);
        let f = flag(s.equivalent_flag());
        rows.push(EquivalenceRow {
            lift_property: s.name().into(),
            flag: s.equivalent_flag().into(),
            flag_value: f,
            lift_value: rep.verdict,
            agree: f == rep.verdict,
        });
        holomorphy.push(rep);
    }
    for (sign, name, fname) in
        [(NullSign::Plus, "+horizontal", "plus_isotropic"), (NullSign::Minus, "-horizontal", "minus_isotropic")]
    {
        let v = data
            .iter()
            .map(|sd| {
                let v = to_chart(sd, twistor_vertical_frame(sd, sign));
                v.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs())) / sd.f.sqrt()
            })
            .fold(0.0, f64::max);
        let f = flag(fname);
        rows.push(EquivalenceRow {
            lift_property: name.into(),
            flag: fname.into(),
            flag_value: f,
            lift_value: v < tol,
            agree: f == (v < tol),
        });
    }
    let all_agree = rows.iter().all(|r| r.agree);
    Ok(EquivalenceTable { tolerance: tol, rows, holomorphy, all_agree })
}

/// Defect of the CR structure on the restricted bundle at `(u, l)`:
/// `hypot(B(s₄,s₄) - B(s₃,s₃), 2B(s₃,s₄))` for the shape form `B` in an
/// adapted frame `(s₁, l, s₃, s₄)`.
pub fn cr_compare(hyp: &Hypersurface, u: [f64; 3], l: &MVec, h: f64) -> Result<f64> {
    let hp = hyp.at(u, h)?;
    let m = hyp.space_form;
    let coords = hp.tangent.map(|t| t.dot(l));
    let off = *l - (hp.tangent[0] * coords[0] + hp.tangent[1] * coords[1] + hp.tangent[2] * coords[2]);
    let resid = (l.norm_sq() - 1.0).abs().max(off.euclid());
    if resid > 1e-8 {
        return Err(Error::Domain(format!("l is not a unit tangent vector (residual {resid:.2e})")));
    }
    // complete (l) to an orthonormal tangent basis
    let mut basis: Vec<[f64; 3]> = vec![coords];
    for k in 0..3 {
        let mut v = [0.0; 3];
        v[k] = 1.0;
        for b in &basis {
            let p: f64 = (0..3).map(|i| v[i] * b[i]).sum();
            for i in 0..3 {
                v[i] -= p * b[i];
            }
        }
        let n = (0..3).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if n > 1e-6 && basis.len() < 3 {
            basis.push(v.map(|c| c / n));
        }
    }
    let vec_of = |c: &[f64; 3]| hp.tangent[0] * c[0] + hp.tangent[1] * c[1] + hp.tangent[2] * c[2];
    let (s3, mut s4) = (basis[1], basis[2]);
    if m.orientation(&hp.point, &[hp.normal, *l, vec_of(&s3), vec_of(&s4)]) < 0.0 {
        s4 = s4.map(|c| -c);
    }
    let b = |x: &[f64; 3], y: &[f64; 3]| -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += x[i] * y[j] * hp.shape[i][j];
            }
        }
        s
    };
    let a = b(&s4, &s4) - b(&s3, &s3);
    let c = b(&s3, &s4);
    Ok(a.hypot(2.0 * c))
}

/// Tension of the Grassmannian lift, split into the horizontal term
/// `(1 - λS/12)|H|` and the covariant derivatives `e_i(h₃₃^α + h₄₄^α)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensionReport {
    pub lambda_g: f64,
    pub curvature: f64,
    pub tolerance: f64,
    pub horizontal_sup: f64,
    pub vertical_sup: f64,
    /// Sup of `|H|` in frame components.
    pub mean_curvature_sup: f64,
    pub harmonic: bool,
    /// The verdict expected from `H` alone, or from `∇H` when `λS = 12`.
    pub predicted: bool,
    pub consistent: bool,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// The normal-bundle threshold `λS = 12` for the Killing form `-¼ tr(ad ad)`.
pub const TENSION_THRESHOLD: f64 = 12.0;

pub fn gauss_tension(imm: &Immersion, lambda_g: f64, tol: f64) -> Result<TensionReport> {
    if !(tol > 0.0) || !lambda_g.is_finite() {
        return Err(Error::Config("tension needs a positive tolerance and a finite metric parameter".into()));
    }
    let s = imm.space_form.curvature();
    let factor = 1.0 - lambda_g * s / TENSION_THRESHOLD;
    let h = neighbour_step(imm);
    let two_h = |sd: &SurfaceData| -> MVec {
        let mut v = MVec::zero(sd.point.signature());
        for al in 0..2 {
            v += sd.frame[al] * (sd.h[al][0][0] + sd.h[al][1][1]);
        }
        v
    };
    let rows = imm
        .grid
        .points()
        .into_par_iter()
        .map(|p| -> Result<Option<(f64, f64, f64)>> {
            let sample = |q: [f64; 2]| match imm.sample(q) {
                Ok(sd) => Ok(Some(sd)),
                Err(Error::Degenerate { .. } | Error::Signature { .. }) => Ok(None),
                Err(e) => Err(e),
            };
            let Some(sd) = sample(p)? else { return Ok(None) };
            let mut n = [[0.0; 2]; 2];
            for a in 0..2 {
                let mut qp = p;
                let mut qm = p;
                qp[a] += h[a];
                qm[a] -= h[a];
                let (Some(sp), Some(sm)) = (sample(qp)?, sample(qm)?) else { return Ok(None) };
                let d = (two_h(&sp) - two_h(&sm)) / (2.0 * h[a]);
                for al in 0..2 {
                    n[a][al] = FRAME_EPS[al] * d.dot(&sd.frame[al]);
                }
            }
            let mut vert: f64 = 0.0;
            for i in 0..2 {
                for al in 0..2 {
                    let v = sd.change[i][0] * n[0][al] + sd.change[i][1] * n[1][al];
                    vert = vert.max(v.abs());
                }
            }
            let [h1, h2] = sd.mean_curvature();
            let hn = h1.hypot(h2);
            Ok(Some((factor.abs() * hn, vert, hn)))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<_> = rows.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::Config("no grid sample has a full neighbourhood".into()));
    }
    let (hs, vs, ms) = rows.iter().fold((0.0f64, 0.0f64, 0.0f64), |a, r| (a.0.max(r.0), a.1.max(r.1), a.2.max(r.2)));
    let harmonic = hs < tol && vs < tol;
    let predicted = if (lambda_g * s - TENSION_THRESHOLD).abs() > 1e-12 { ms < tol } else { vs < tol };
    let conf = imm
        .grid
        .points()
        .iter()
        .filter_map(|&p| imm.sample(p).ok())
        .map(|sd| sd.conformality / sd.f)
        .fold(0.0, f64::max);
    let warning = (conf > 1e-4).then(|| format!("chart is not conformal (relative defect {conf:.2e})"));
    Ok(TensionReport {
        lambda_g,
        curvature: s,
        tolerance: tol,
        horizontal_sup: hs,
        vertical_sup: vs,
        mean_curvature_sup: ms,
        harmonic,
        predicted,
        consistent: harmonic == predicted,
        samples: rows.len(),
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_family, FamilySpec, FamilyTag, LambdaSpec};
    use crate::space_form::SpaceForm;
    use crate::surface::Grid;

    fn small(spec: FamilySpec) -> Immersion {
        let g = Grid::square(-0.5, 0.5, 9).unwrap();
        build_family(&spec.with_grid(g)).unwrap()
    }

    fn flat(l: &str) -> Immersion {
        small(FamilySpec::new(SpaceForm::Minkowski, FamilyTag::ILambda, l.parse().unwrap()))
    }

    #[test]
    fn fibre_parts_are_projections_of_the_plane_lift() {
        let imm = small(FamilySpec::new(SpaceForm::Minkowski, FamilyTag::JLambda, "y:0.1,0.2,0".parse().unwrap()));
        let sd = imm.sample([0.1, 0.2]).unwrap();
        let g = GrassLiftSample::from_surface(&sd);
        for sign in [NullSign::Plus, NullSign::Minus] {
            let t = TwistorLiftSample::from_surface(&sd, sign).unwrap();
            let p = g.project_vertical(sign);
            for a in 0..2 {
                for j in 0..2 {
                    assert!((p[a][j] - t.d_vertical[a][j]).abs() < 1e-12);
                }
            }
        }
        let (kp, km) = g.null_directions(&SpaceForm::Minkowski).unwrap();
        let t = sd.frame[0];
        let plus = TwistorLiftSample::from_surface(&sd, NullSign::Plus).unwrap().direction;
        let minus = TwistorLiftSample::from_surface(&sd, NullSign::Minus).unwrap().direction;
        assert!(kp.approx_eq(&plus, &t) && km.approx_eq(&minus, &t));
    }

    #[test]
    fn vertical_parts_match_differenced_frames() {
        let imm = small(FamilySpec::new(SpaceForm::Minkowski, FamilyTag::JLambda, "y:0.1,0.2,0".parse().unwrap()));
        let p = [0.2, -0.1];
        for sign in [NullSign::Plus, NullSign::Minus] {
            let a = gauss_lift(&imm, sign, p).unwrap().d_vertical;
            let b = vertical_by_differencing(&imm, sign, p).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a[i][j] - b[i][j]).abs() < 1e-4, "{sign:?} {a:?} {b:?}");
                }
            }
        }
        let a = grass_lift(&imm, p).unwrap().d_vertical;
        let b = grass_vertical_by_differencing(&imm, p).unwrap();
        for i in 0..2 {
            for j in 0..4 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-4, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn plane_lifts_are_horizontal_and_holomorphic() {
        let imm = flat("zero");
        assert!(horizontality(&imm, NullSign::Plus).unwrap() < 1e-12);
        assert!(holomorphy_check(&imm, Structure::GrassPlus, 1e-5).unwrap().verdict);
        let v = grass_lift(&imm, [0.0, 0.0]).unwrap().d_vertical;
        assert!(v.iter().flatten().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn equivalences_on_a_quadratic_graph() {
        let t = prop31_crosscheck(&flat("fn:z1^2"), 1e-5).unwrap();
        assert!(t.all_agree, "{t:#?}");
        let get = |n: &str| t.rows.iter().find(|r| r.lift_property == n).unwrap().lift_value;
        assert!(get("O+-") && get("O++") && !get("O--") && !get("OG-"));
    }

    #[test]
    fn structure_names_round_trip() {
        for s in Structure::ALL {
            assert_eq!(s.name().parse::<Structure>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
    }

    #[test]
    fn tension_of_a_harmonic_graph_vanishes() {
        let imm = flat("harmonic:z1^2-z2^2");
        for lg in [1.0, 12.0] {
            let r = gauss_tension(&imm, lg, 1e-5).unwrap();
            assert!(r.harmonic && r.consistent, "{r:?}");
        }
        let r = gauss_tension(&flat("fn:z1^2"), 1.0, 1e-5).unwrap();
        assert!(r.horizontal_sup > 0.5 && !r.harmonic && r.consistent);
    }

    #[test]
    fn cr_defect_of_totally_geodesic_slice_vanishes() {
        let hyp = &SpaceForm::Minkowski.umbilic_catalog()[0];
        let l = MVec::new(crate::lorentz::Signature::R41, &[0.0, 0.6, 0.8, 0.0]).unwrap();
        assert!(cr_compare(hyp, [0.1, 0.2, 0.3], &l, 1e-3).unwrap() < 1e-12);
        let bad = MVec::new(crate::lorentz::Signature::R41, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(cr_compare(hyp, [0.1, 0.2, 0.3], &bad, 1e-3).is_err());
    }

    #[test]
    fn non_unit_tolerance_is_rejected() {
        assert!(holomorphy_check(&flat("zero"), Structure::PlusPlus, -1.0).is_err());
        let _ = LambdaSpec::Zero;
    }

    fn spec(space: SpaceForm, tag: FamilyTag, l: &str) -> FamilySpec {
        FamilySpec::new(space, tag, l.parse().unwrap())
    }

    #[test]
    fn null_direction_is_normal() {
        let imm = small(spec(SpaceForm::PseudoSphere, FamilyTag::ICLambda, "y:0.1,0,0.2").with_c(0.5));
        for p in imm.grid.points() {
            let sd = imm.sample(p).unwrap();
            for sign in [NullSign::Plus, NullSign::Minus] {
                let k = *TwistorLiftSample::from_surface(&sd, sign).unwrap().direction.rep();
                assert!(k.dot(&sd.frame[2]).abs() < 1e-10 && k.dot(&sd.frame[3]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn horizontality_examples() {
        assert!(horizontality(&flat("poly:z1^2+z2^2"), NullSign::Plus).unwrap() < 1e-5);
        let sphere = small(spec(SpaceForm::Minkowski, FamilyTag::JLambda, "zero"));
        assert!(horizontality(&sphere, NullSign::Plus).unwrap() > 1e-3);
    }

    #[test]
    fn great_sphere_grass_lift_is_flat_in_the_normal_directions() {
        let imm = small(spec(SpaceForm::PseudoSphere, FamilyTag::ICLambda, "zero").with_c(0.0));
        for p in imm.grid.points() {
            let v = grass_lift(&imm, p).unwrap().d_vertical;
            assert!(v.iter().flatten().all(|c| c.abs() < 1e-8), "{v:?}");
        }
    }

    #[test]
    fn equivalence_examples() {
        let t = prop31_crosscheck(&flat("harmonic:z1^2-z2^2"), 1e-5).unwrap();
        let row = |t: &EquivalenceTable, n: &str| t.rows.iter().find(|r| r.lift_property == n).unwrap().clone();
        assert!(t.all_agree && row(&t, "OG-").flag_value && row(&t, "OG-").lift_value);
        let sphere = small(spec(SpaceForm::Minkowski, FamilyTag::JLambda, "zero"));
        let t = prop31_crosscheck(&sphere, 1e-5).unwrap();
        assert!(t.all_agree && row(&t, "OG+").flag_value && row(&t, "OG+").lift_value, "{t:#?}");
    }

    #[test]
    fn cr_defect_on_catalog_and_graph() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s3 = &SpaceForm::PseudoSphere.umbilic_catalog()[0];
        for _ in 0..50 {
            let u: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let hp = s3.at(u, 1e-3).unwrap();
            let w: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let l = hp.tangent[0] * w[0] + hp.tangent[1] * w[1] + hp.tangent[2] * w[2];
            let l = l / l.norm();
            assert!(cr_compare(s3, u, &l, 1e-3).unwrap() < 1e-6);
        }
        let graph = Hypersurface::quadratic_graph(0.1);
        let hp = graph.at([0.2, 0.1, 0.3], 1e-3).unwrap();
        assert!(cr_compare(&graph, [0.2, 0.1, 0.3], &hp.tangent[2], 1e-3).unwrap() > 1e-3);
    }

    #[test]
    fn umbilic_sphere_is_harmonic_at_the_threshold() {
        let imm = small(spec(SpaceForm::PseudoSphere, FamilyTag::ICLambda, "zero").with_c(0.5));
        let r = gauss_tension(&imm, 12.0, 1e-5).unwrap();
        assert!(r.harmonic && r.consistent && r.mean_curvature_sup > 0.1, "{r:?}");
        let r = gauss_tension(&imm, 1.0, 1e-5).unwrap();
        assert!(!r.harmonic && r.consistent, "{r:?}");
    }
}
