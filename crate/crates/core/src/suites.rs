//! Named verification batteries over the built-in families, catalogs and
//! metric charts. Each returns a list of bounded checks.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ambient::RescaledMinkowski;
use crate::curvature::{integrability_og, integrability_oplus, BuiltinChart, MetricSource, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::families::{
    build_family, catalog_bases, deform_family_base, isotropy_coefficient, stationary_check, stereographic_transport,
    FamilySpec, FamilyTag, LambdaSpec, DEFAULT_RESOLUTION,
};
use crate::lorentz::{MVec, Signature};
use crate::space_form::{constant_curvature_tensor, stereographic, stereographic_inverse, Hypersurface, SpaceForm};
use crate::surface::{classify, conformal_change_check, partition_samples, Immersion, DEFAULT_FD_STEP, DEFAULT_TOL};
use crate::twistor::{cr_compare, gauss_tension, holomorphy_check, holomorphy_check_in, prop31_crosscheck, Structure};

/// Threshold for claims that a quantity is nonzero.
pub const NONZERO: f64 = 1e-3;
/// Number of random frames per point in the curvature audits.
pub const AUDIT_FRAMES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Prop31,
    Deformation,
    Coefficients,
    Integrability,
    CrCompare,
    Conformal,
    Tension,
    Stereographic,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Prop31,
        Suite::Deformation,
        Suite::Coefficients,
        Suite::Integrability,
        Suite::CrCompare,
        Suite::Conformal,
        Suite::Tension,
        Suite::Stereographic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Prop31 => "prop31",
            Suite::Deformation => "deformation",
            Suite::Coefficients => "coefficients",
            Suite::Integrability => "integrability",
            Suite::CrCompare => "cr-compare",
            Suite::Conformal => "conformal",
            Suite::Tension => "tension",
            Suite::Stereographic => "stereographic",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            Error::Config(format!("unknown suite {s:?} (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    Above,
    Holds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), relation: Relation::Below, value, bound, pass: value < bound }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), relation: Relation::Above, value, bound, pass: value > bound }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Check { name: name.into(), relation: Relation::Holds, value: v, bound: 1.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Restricts the suite to one space form.
    pub space: Option<SpaceForm>,
    /// Replaces the default metric parameters of the tension suite.
    pub lambda_g: Option<f64>,
    pub seed: u64,
    pub resolution: usize,
    pub fd_step: f64,
    pub tol: f64,
    /// Random `λ` per family.
    pub draws: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            space: None,
            lambda_g: None,
            seed: 0,
            resolution: DEFAULT_RESOLUTION,
            fd_step: DEFAULT_FD_STEP,
            tol: DEFAULT_TOL,
            draws: 3,
        }
    }
}

impl SuiteOptions {
    fn wants(&self, s: SpaceForm) -> bool {
        self.space.map_or(true, |x| x == s)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    fn prepare(&self, spec: FamilySpec) -> Result<FamilySpec> {
        let grid = spec.model()?.default_grid(self.resolution)?;
        Ok(spec.with_grid(grid).with_fd_step(self.fd_step))
    }
}

/// The built-in families with their default parameters.
pub fn builtin_families() -> Vec<(SpaceForm, FamilyTag, Option<f64>)> {
    use FamilyTag::*;
    use SpaceForm::*;
    vec![
        (Minkowski, ILambda, None),
        (Minkowski, JLambda, Some(1.0)),
        (PseudoSphere, ILambda, None),
        (PseudoSphere, ICLambda, Some(0.5)),
        (PseudoHyperbolic, ILambda, None),
        (PseudoHyperbolic, JCLambda, Some(2.0)),
    ]
}

fn family(space: SpaceForm, tag: FamilyTag, param: Option<f64>, lambda: LambdaSpec) -> FamilySpec {
    let s = FamilySpec::new(space, tag, lambda);
    match (tag, param) {
        (FamilyTag::JLambda, Some(t)) => s.with_theta(t),
        (FamilyTag::ICLambda | FamilyTag::JCLambda, Some(c)) => s.with_c(c),
        _ => s,
    }
}

fn label(spec: &FamilySpec) -> String {
    format!("{} {} {}", spec.space.tag(), spec.family, spec.lambda)
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("tolerance {:e} must be positive", opts.tol)));
    }
    if opts.resolution < 4 {
        return Err(Error::Config(format!("resolution {} below 4", opts.resolution)));
    }
    let checks = match suite {
        Suite::Prop31 => prop31(opts)?,
        Suite::Deformation => deformation(opts)?,
        Suite::Coefficients => coefficients(opts)?,
        Suite::Integrability => integrability(opts)?,
        Suite::CrCompare => cr(opts)?,
        Suite::Conformal => conformal(opts)?,
        Suite::Tension => tension(opts)?,
        Suite::Stereographic => stereo(opts)?,
    };
    if checks.is_empty() {
        return Err(Error::Config(format!("suite {suite} has no checks for the selected space form")));
    }
    Ok(SuiteReport { suite, seed: opts.seed, pass: checks.iter().all(|c| c.pass), checks })
}

fn prop31(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (k, (space, tag, param)) in builtin_families().into_iter().enumerate() {
        if !opts.wants(space) {
            continue;
        }
        let mut rng = opts.rng(k as u64);
        for draw in 0..opts.draws {
            let spec = opts.prepare(family(space, tag, param, LambdaSpec::random(&mut rng)))?;
            let t = prop31_crosscheck(&build_family(&spec)?, opts.tol)?;
            for r in t.rows {
                let l = format!("{} #{draw}", label(&spec));
                out.push(Check::holds(format!("{l}: {} <=> {}", r.lift_property, r.flag), r.agree));
            }
        }
    }
    Ok(out)
}

fn deformation(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (k, (name, base)) in catalog_bases().into_iter().enumerate() {
        if !opts.wants(base.space) {
            continue;
        }
        let mut rng = opts.rng(100 + k as u64);
        for draw in 0..opts.draws.max(5) {
            let spec = opts.prepare(FamilySpec { lambda: LambdaSpec::random(&mut rng), ..base.clone() })?;
            let r = classify(&deform_family_base(&spec)?, opts.tol)?;
            out.push(Check::below(format!("{name} by {} #{draw}: |L-|", spec.lambda), r.residuals.pos_semi_umbilic, opts.tol));
        }
        // the zero deformation is the identity
        let spec = opts.prepare(FamilySpec { lambda: LambdaSpec::Zero, ..base.clone() })?;
        let (a, b) = (build_family(&spec)?, deform_family_base(&spec)?);
        out.push(Check::below(format!("{name} by zero: displacement"), max_distance(&a, &b)?, 1e-12));
    }
    // deformations of the plane and of the unit sphere are the Minkowski
    // families
    if opts.wants(SpaceForm::Minkowski) {
        let mut rng = opts.rng(200);
        for (tag, param, bound) in [(FamilyTag::ILambda, None, 1e-12), (FamilyTag::JLambda, Some(1.0), 1e-6)] {
            let spec = opts.prepare(family(SpaceForm::Minkowski, tag, param, LambdaSpec::random(&mut rng)))?;
            let d = max_distance(&build_family(&spec)?, &deform_family_base(&spec)?)?;
            out.push(Check::below(format!("{}: deformation equals family", label(&spec)), d, bound));
        }
    }
    Ok(out)
}

fn max_distance(a: &Immersion, b: &Immersion) -> Result<f64> {
    let mut m: f64 = 0.0;
    for p in a.grid.points() {
        m = m.max((a.eval(p)? - b.eval(p)?).euclid());
    }
    Ok(m)
}

/// The `j`-type member paired with each space form for the
/// semi-umbilic-but-not-isotropic checks.
pub fn non_isotropic_members() -> Vec<FamilySpec> {
    let l = LambdaSpec::Linear { a: [0.1, 0.0, 0.0] };
    vec![
        FamilySpec::new(SpaceForm::Minkowski, FamilyTag::JLambda, l.clone()).with_theta(1.0),
        FamilySpec::new(SpaceForm::PseudoSphere, FamilyTag::ICLambda, l.clone()).with_c(0.5),
        FamilySpec::new(SpaceForm::PseudoHyperbolic, FamilyTag::JCLambda, l).with_c(2.0),
    ]
}

/// Sup of `|H₋|`, `|L₋|` and `|H₊ - coefficient/2|` over the grid of an
/// `i`-type family.
pub fn isotropy_residuals(spec: &FamilySpec) -> Result<[f64; 3]> {
    let imm = build_family(spec)?;
    let (data, _) = partition_samples(imm.samples())?;
    let mut r = [0.0f64; 3];
    for sd in &data {
        let d = sd.decompose();
        let c = isotropy_coefficient(spec, sd.param)?;
        r[0] = r[0].max(d.h_minus.abs());
        r[1] = r[1].max(d.l_minus.norm());
        r[2] = r[2].max((d.h_plus - 0.5 * c).abs());
    }
    Ok(r)
}

fn coefficients(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (k, space) in SpaceForm::ALL.into_iter().enumerate() {
        if !opts.wants(space) {
            continue;
        }
        let mut rng = opts.rng(300 + k as u64);
        for draw in 0..opts.draws.max(5) {
            let spec = opts.prepare(FamilySpec::new(space, FamilyTag::ILambda, LambdaSpec::random(&mut rng)))?;
            let [hm, lm, hp] = isotropy_residuals(&spec)?;
            let l = format!("{} #{draw}", label(&spec));
            out.push(Check::below(format!("{l}: |H-|"), hm, opts.tol));
            out.push(Check::below(format!("{l}: |L-|"), lm, opts.tol));
            out.push(Check::below(format!("{l}: |H+ - coefficient/2|"), hp, 1e-4));
        }
    }
    for spec in non_isotropic_members() {
        if !opts.wants(spec.space) {
            continue;
        }
        let spec = opts.prepare(spec)?;
        let r = classify(&build_family(&spec)?, opts.tol)?;
        let l = label(&spec);
        out.push(Check::below(format!("{l}: |L-|"), r.residuals.pos_semi_umbilic, opts.tol));
        out.push(Check::above(format!("{l}: |H-|"), r.residuals.pos_semi_stationary, NONZERO));
    }
    let stationary = [
        (SpaceForm::Minkowski, "harmonic:z1^3-3z1z2^2", true),
        (SpaceForm::Minkowski, "poly:z1^2", false),
        (SpaceForm::PseudoSphere, "y:0,0,1", true),
    ];
    for (space, l, want) in stationary {
        if !opts.wants(space) {
            continue;
        }
        let spec = opts.prepare(FamilySpec::new(space, FamilyTag::ILambda, l.parse()?))?;
        let r = stationary_check(&spec, opts.tol)?;
        out.push(Check::holds(format!("{}: stationary is {want}", label(&spec)), r.verdict == want && r.agree));
    }
    Ok(out)
}

fn integrability(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let charts = [
        (SpaceForm::Minkowski, BuiltinChart::Flat),
        (SpaceForm::PseudoSphere, BuiltinChart::DeSitterGraph),
        (SpaceForm::PseudoHyperbolic, BuiltinChart::AntiDeSitterGraph),
    ];
    for (space, chart) in charts {
        if !opts.wants(space) {
            continue;
        }
        let r = constant_curvature_tensor(space.curvature());
        let exact = integrability_oplus(&r).into_iter().chain(integrability_og(&r)).fold(0.0, f64::max);
        out.push(Check::below(format!("{}: constant-curvature substitution", space.tag()), exact, 1e-8));
        let (op, og) = audit_sup(chart, opts.seed)?;
        out.push(Check::below(format!("{}: O++ conditions", space.tag()), op, 1e-4));
        out.push(Check::below(format!("{}: OG+ conditions", space.tag()), og, 1e-4));
    }
    if opts.space.is_none() {
        let (op, og) = audit_sup(BuiltinChart::Conformal { a: 0.1 }, opts.seed)?;
        out.push(Check::below("conformal chart: O++ conditions", op, 1e-4));
        out.push(Check::above("conformal chart: OG+ conditions", og, NONZERO));
        let (op, _) = audit_sup(BuiltinChart::Product { a: 0.2 }, opts.seed)?;
        out.push(Check::above("product chart: O++ conditions", op, NONZERO));
    }
    Ok(out)
}

/// Sup of the O++ and OG+ residuals over the chart's sample points.
pub fn audit_sup(chart: BuiltinChart, seed: u64) -> Result<(f64, f64)> {
    let pts = MetricSource::Builtin(chart).audit(DEFAULT_STEP, AUDIT_FRAMES, seed)?;
    Ok(pts.iter().fold((0.0f64, 0.0f64), |a, p| (a.0.max(p.oplus_max()), a.1.max(p.og_max()))))
}

/// Sup of the CR defect at `n` random points and unit tangents.
pub fn cr_sup(hyp: &Hypersurface, n: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m: f64 = 0.0;
    for _ in 0..n {
        let u: [f64; 3] = std::array::from_fn(|i| rng.gen_range(hyp.domain[i][0]..hyp.domain[i][1]));
        let hp = hyp.at(u, DEFAULT_STEP)?;
        let w: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let l = hp.tangent[0] * w[0] + hp.tangent[1] * w[1] + hp.tangent[2] * w[2];
        m = m.max(cr_compare(hyp, u, &(l / l.norm()), DEFAULT_STEP)?);
    }
    Ok(m)
}

fn cr(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for space in SpaceForm::ALL {
        if !opts.wants(space) {
            continue;
        }
        for hyp in space.umbilic_catalog() {
            out.push(Check::below(format!("{}: {}", space.tag(), hyp.name), cr_sup(&hyp, 50, opts.seed)?, 1e-6));
        }
    }
    if opts.wants(SpaceForm::Minkowski) {
        let g = Hypersurface::quadratic_graph(0.1);
        out.push(Check::above("r41: quadratic graph", cr_sup(&g, 50, opts.seed)?, NONZERO));
    }
    Ok(out)
}

/// `ρ = 0.1·x₃²` on Minkowski coordinates.
pub fn standard_rescaling() -> Result<RescaledMinkowski> {
    RescaledMinkowski::new(|x| 0.1 * x[2] * x[2], 1e-4)
}

/// Minkowski families used to test conformal invariance.
pub fn conformal_families() -> Vec<FamilySpec> {
    vec![
        FamilySpec::new(SpaceForm::Minkowski, FamilyTag::ILambda, LambdaSpec::Named { name: "z1^2".into() }),
        FamilySpec::new(SpaceForm::Minkowski, FamilyTag::ILambda, LambdaSpec::Sine { amp: 0.3, freq: 1.0 }),
        FamilySpec::new(SpaceForm::Minkowski, FamilyTag::JLambda, LambdaSpec::Linear { a: [0.1, 0.0, 0.0] })
            .with_theta(1.0),
    ]
}

fn conformal(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if !opts.wants(SpaceForm::Minkowski) {
        return Ok(out);
    }
    let amb = standard_rescaling()?;
    for spec in conformal_families() {
        let spec = opts.prepare(spec)?;
        let imm = build_family(&spec)?;
        let l = label(&spec);
        let r = conformal_change_check(&imm, &amb, opts.tol)?;
        out.push(Check::below(format!("{l}: transformation law"), r.identity_residual, 1e-5));
        out.push(Check::holds(format!("{l}: L flags unchanged"), r.l_flags_agree));
        let a = holomorphy_check(&imm, Structure::PlusPlus, opts.tol)?;
        let b = holomorphy_check_in(&imm, &amb, Structure::PlusPlus, opts.tol)?;
        out.push(Check::holds(format!("{l}: O++ verdict unchanged"), a.verdict == b.verdict));
    }
    Ok(out)
}

fn tension(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let lambdas = opts.lambda_g.map_or(vec![1.0, 12.0], |l| vec![l]);
    if opts.wants(SpaceForm::Minkowski) {
        let stat = opts.prepare(FamilySpec::new(
            SpaceForm::Minkowski,
            FamilyTag::ILambda,
            LambdaSpec::Named { name: "z1^2-z2^2".into() },
        ))?;
        let non = opts.prepare(FamilySpec::new(
            SpaceForm::Minkowski,
            FamilyTag::ILambda,
            LambdaSpec::Named { name: "z1^2".into() },
        ))?;
        for &lg in &lambdas {
            let r = gauss_tension(&build_family(&stat)?, lg, opts.tol)?;
            out.push(Check::below(
                format!("{} at {lg}: tension terms", label(&stat)),
                r.horizontal_sup.max(r.vertical_sup),
                opts.tol,
            ));
            let r = gauss_tension(&build_family(&non)?, lg, opts.tol)?;
            out.push(Check::above(format!("{} at {lg}: horizontal term", label(&non)), r.horizontal_sup, NONZERO));
        }
    }
    if opts.wants(SpaceForm::PseudoSphere) {
        let sphere = opts.prepare(FamilySpec::new(SpaceForm::PseudoSphere, FamilyTag::ICLambda, LambdaSpec::Zero).with_c(0.5))?;
        let imm = build_family(&sphere)?;
        for &lg in &lambdas {
            let r = gauss_tension(&imm, lg, opts.tol)?;
            let l = label(&sphere);
            out.push(Check::holds(format!("{l} at {lg}: verdict matches prediction"), r.consistent));
            if (lg - 12.0).abs() < 1e-12 {
                out.push(Check::holds(format!("{l} at {lg}: harmonic"), r.harmonic));
                out.push(Check::below(format!("{l} at {lg}: covariant derivative of H"), r.vertical_sup, opts.tol));
            }
        }
    }
    Ok(out)
}

fn stereo(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if !opts.wants(SpaceForm::PseudoSphere) {
        return Ok(out);
    }
    let mut rng = opts.rng(400);
    for draw in 0..opts.draws.max(5) {
        let spec = opts.prepare(FamilySpec::new(SpaceForm::PseudoSphere, FamilyTag::ILambda, LambdaSpec::random(&mut rng)))?;
        let mut m: f64 = 0.0;
        for z in spec.grid()?.points() {
            m = m.max((stereographic_transport(&spec.lambda, z)? - spec.point(z)?).euclid());
        }
        out.push(Check::below(format!("{} #{draw}: transported family", label(&spec)), m, 1e-10));
    }
    let mut m: f64 = 0.0;
    for _ in 0..200 {
        let y: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let y = MVec::new(Signature::R41, &y)?;
        m = m.max((stereographic(&stereographic_inverse(&y)?)? - y).euclid());
    }
    out.push(Check::below("round trip", m, 1e-12));
    Ok(out)
}
