//! Acceptance criteria at their pinned tolerances, one line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use lsl::curvature::{integrability_og, integrability_oplus, BuiltinChart};
use lsl::families::{build_family, catalog_bases, deform_null, deform_null_unchecked, FamilySpec, FamilyTag, LambdaSpec};
use lsl::lorentz::{MVec, Signature};
use lsl::space_form::{constant_curvature_tensor, stereographic, stereographic_inverse, Hypersurface, SpaceForm};
use lsl::suites::{audit_sup, conformal_families, cr_sup, non_isotropic_members, standard_rescaling};
use lsl::surface::{classify, conformal_change_check, partition_samples, Immersion};
use lsl::twistor::{gauss_tension, holomorphy_check, holomorphy_check_in, prop31_crosscheck, Structure};
use lsl::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-5;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20_261_016);
    r.set_stream(stream);
    r
}

/// Gradient and Hessian of a `Smooth` function of the model point.
fn smooth_jet(l: &LambdaSpec, y: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
    let LambdaSpec::Smooth { lin, quad, amp, freq, phase, .. } = l else { panic!("smooth λ expected") };
    let u = freq[0] * y[0] + freq[1] * y[1] + freq[2] * y[2] + phase;
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        h[i][i] = 2.0 * quad[i];
    }
    for (k, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        h[i][j] = quad[3 + k];
        h[j][i] = quad[3 + k];
    }
    let mut g = *lin;
    for i in 0..3 {
        for j in 0..3 {
            g[i] += h[i][j] * y[j];
            h[i][j] -= amp * u.sin() * freq[i] * freq[j];
        }
        g[i] += amp * u.cos() * freq[i];
    }
    let v = l.eval([0.0; 2], y);
    (v, g, h)
}

/// `Δλ + 2κλ`, with the Laplacian of the model surface obtained from the
/// ambient jet: trace of the Hessian minus its normal part plus the mean
/// curvature term.
fn coefficient_oracle(space: SpaceForm, l: &LambdaSpec, y: [f64; 3]) -> f64 {
    let (v, g, h) = smooth_jet(l, y);
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let hyy = (0..3).map(|i| (0..3).map(|j| y[i] * h[i][j] * y[j]).sum::<f64>()).sum::<f64>();
    match space {
        SpaceForm::Minkowski => h[0][0] + h[1][1],
        SpaceForm::PseudoSphere => h[0][0] + h[1][1] + h[2][2] - hyy - 2.0 * dot(y, g) + 2.0 * v,
        SpaceForm::PseudoHyperbolic => -h[0][0] + h[1][1] + h[2][2] + hyy + 2.0 * dot(y, g) - 2.0 * v,
    }
}

fn c1_isotropy() -> Result<Outcome> {
    let mut worst = [0.0f64; 3];
    for (k, space) in SpaceForm::ALL.into_iter().enumerate() {
        let mut r = rng(k as u64);
        for _ in 0..5 {
            let spec = FamilySpec::new(space, FamilyTag::ILambda, LambdaSpec::random(&mut r));
            let model = spec.model()?;
            let (data, _) = partition_samples(build_family(&spec)?.samples())?;
            for sd in &data {
                let d = sd.decompose();
                let c = coefficient_oracle(space, &spec.lambda, model.point(sd.param));
                worst[0] = worst[0].max(d.h_minus.abs());
                worst[1] = worst[1].max(d.l_minus.norm());
                worst[2] = worst[2].max((d.h_plus - 0.5 * c).abs());
            }
        }
    }
    outcome(
        worst[0] < TOL && worst[1] < TOL && worst[2] < 1e-4,
        format!("|H-| {:.2e}, |L-| {:.2e}, |H+ - c/2| {:.2e}", worst[0], worst[1], worst[2]),
    )
}

fn c2_semi_umbilic() -> Result<Outcome> {
    let mut lm = 0.0f64;
    let mut hm = f64::INFINITY;
    for spec in non_isotropic_members() {
        let (data, _) = partition_samples(build_family(&spec)?.samples())?;
        lm = lm.max(data.iter().map(|sd| sd.decompose().l_minus.norm()).fold(0.0, f64::max));
        hm = hm.min(data.iter().map(|sd| sd.decompose().h_minus.abs()).fold(0.0, f64::max));
    }
    outcome(lm < TOL && hm > 1e-3, format!("sup |L-| {lm:.2e}, smallest max |H-| {hm:.2e}"))
}

fn c3_equivalences() -> Result<Outcome> {
    let mut r = rng(10);
    let members = [
        FamilySpec::new(SpaceForm::Minkowski, FamilyTag::JLambda, LambdaSpec::Zero).with_theta(1.0),
        FamilySpec::new(SpaceForm::PseudoSphere, FamilyTag::ICLambda, LambdaSpec::Zero).with_c(0.5),
        FamilySpec::new(SpaceForm::PseudoHyperbolic, FamilyTag::JCLambda, LambdaSpec::Zero).with_c(2.0),
    ];
    let (mut count, mut mismatches, mut trues, mut falses) = (0, 0, 0, 0);
    for base in members {
        for l in [LambdaSpec::Zero, LambdaSpec::Linear { a: [0.1, -0.05, 0.0] }, LambdaSpec::random(&mut r)] {
            let spec = FamilySpec { lambda: l, ..base.clone() };
            let t = prop31_crosscheck(&build_family(&spec)?, TOL)?;
            count += 1;
            for row in t.rows.iter().take(6) {
                mismatches += usize::from(!row.agree);
                if row.flag_value {
                    trues += 1;
                } else {
                    falses += 1;
                }
            }
        }
    }
    outcome(
        count >= 9 && mismatches == 0 && trues > 0 && falses > 0,
        format!("{count} immersions, {mismatches} mismatches ({trues} true, {falses} false rows)"),
    )
}

fn c4_deformation() -> Result<Outcome> {
    let mut r = rng(20);
    let (mut worst, mut flags) = (0.0f64, true);
    for (_, spec) in catalog_bases() {
        let base = build_family(&spec)?;
        let model = spec.model()?;
        for _ in 0..5 {
            let l = LambdaSpec::random(&mut r);
            let moved = deform_null(&base, move |z| l.eval(z, model.point(z)))?;
            let c = classify(&moved, TOL)?;
            flags &= c.flags.pos_semi_umbilic;
            worst = worst.max(c.residuals.pos_semi_umbilic);
        }
    }
    outcome(flags && worst < TOL, format!("6 bases x 5 draws, sup |L-| {worst:.2e}"))
}

fn c5_integrability() -> Result<Outcome> {
    let mut exact = 0.0f64;
    let mut numeric = 0.0f64;
    for (space, chart) in [
        (SpaceForm::Minkowski, BuiltinChart::Flat),
        (SpaceForm::PseudoSphere, BuiltinChart::DeSitterGraph),
        (SpaceForm::PseudoHyperbolic, BuiltinChart::AntiDeSitterGraph),
    ] {
        let r = constant_curvature_tensor(space.curvature());
        exact = integrability_oplus(&r).into_iter().chain(integrability_og(&r)).fold(exact, f64::max);
        let (op, og) = audit_sup(chart, 7)?;
        numeric = numeric.max(op).max(og);
    }
    let (cop, cog) = audit_sup(BuiltinChart::Conformal { a: 0.1 }, 7)?;
    let (pop, _) = audit_sup(BuiltinChart::Product { a: 0.2 }, 7)?;
    outcome(
        exact < 1e-8 && numeric < 1e-4 && cop < 1e-4 && cog > 1e-3 && pop > 1e-3,
        format!(
            "space forms {exact:.1e} exact / {numeric:.2e} numeric; conformal O++ {cop:.2e}, OG+ {cog:.2e}; product O++ {pop:.2e}"
        ),
    )
}

fn c6_cr() -> Result<Outcome> {
    let mut geo = 0.0f64;
    for space in SpaceForm::ALL {
        for hyp in space.umbilic_catalog() {
            geo = geo.max(cr_sup(&hyp, 50, 11)?);
        }
    }
    let graph = cr_sup(&Hypersurface::quadratic_graph(0.1), 50, 11)?;
    outcome(geo < 1e-6 && graph > 1e-3, format!("totally geodesic {geo:.2e}, quadratic graph {graph:.2e}"))
}

fn c7_conformal() -> Result<Outcome> {
    let amb = standard_rescaling()?;
    let (mut id, mut flags, mut verdicts) = (0.0f64, true, true);
    for spec in conformal_families() {
        let imm = build_family(&spec)?;
        let r = conformal_change_check(&imm, &amb, TOL)?;
        id = id.max(r.identity_residual);
        flags &= r.l_flags_agree;
        let a = holomorphy_check(&imm, Structure::PlusPlus, TOL)?;
        let b = holomorphy_check_in(&imm, &amb, Structure::PlusPlus, TOL)?;
        verdicts &= a.verdict == b.verdict;
    }
    outcome(id < 1e-5 && flags && verdicts, format!("identity {id:.2e}, L flags kept {flags}, O++ verdicts kept {verdicts}"))
}

fn c8_tension() -> Result<Outcome> {
    let plane = |name: &str| FamilySpec::new(SpaceForm::Minkowski, FamilyTag::ILambda, LambdaSpec::Named { name: name.into() });
    let stat = build_family(&plane("z1^2-z2^2"))?;
    let non = build_family(&plane("z1^2"))?;
    let (mut terms, mut horiz) = (0.0f64, f64::INFINITY);
    for lg in [1.0, 12.0] {
        let r = gauss_tension(&stat, lg, TOL)?;
        terms = terms.max(r.horizontal_sup).max(r.vertical_sup);
        horiz = horiz.min(gauss_tension(&non, lg, TOL)?.horizontal_sup);
    }
    let sphere = FamilySpec::new(SpaceForm::PseudoSphere, FamilyTag::ICLambda, LambdaSpec::Zero).with_c(0.5);
    let r = gauss_tension(&build_family(&sphere)?, 12.0, TOL)?;
    outcome(
        terms < TOL && horiz > 1e-3 && r.harmonic && r.vertical_sup < TOL,
        format!(
            "stationary terms {terms:.2e}, non-stationary horizontal {horiz:.2e}, sphere harmonic {} with |∇H| {:.2e}",
            r.harmonic, r.vertical_sup
        ),
    )
}

fn c9_stereographic() -> Result<Outcome> {
    let mut r = rng(30);
    let mut family = 0.0f64;
    for _ in 0..5 {
        let spec = FamilySpec::new(SpaceForm::PseudoSphere, FamilyTag::ILambda, LambdaSpec::random(&mut r));
        let model = spec.model()?;
        for z in spec.grid()?.points() {
            // Ξ⁻¹(t, t, z₁, z₂) with ⟨y, y⟩ = |z|²
            let q = z[0] * z[0] + z[1] * z[1];
            let t = (1.0 + q) / 2.0 * spec.lambda.eval(z, model.point(z));
            let d = 1.0 + q;
            let x = [2.0 * t / d, 2.0 * t / d, (q - 1.0) / d, 2.0 * z[0] / d, 2.0 * z[1] / d];
            let x = MVec::new(Signature::R51, &x)?;
            family = family.max((x - spec.point(z)?).euclid());
        }
    }
    let mut trip = 0.0f64;
    for _ in 0..200 {
        let y: [f64; 4] = std::array::from_fn(|_| r.gen_range(-2.0..2.0));
        let y = MVec::new(Signature::R41, &y)?;
        trip = trip.max((stereographic(&stereographic_inverse(&y)?)? - y).euclid());
    }
    outcome(family < 1e-10 && trip < 1e-12, format!("family {family:.2e}, round trip {trip:.2e}"))
}

fn sup_l_minus(imm: &Immersion) -> Result<f64> {
    let (data, _) = partition_samples(imm.samples())?;
    Ok(data.iter().map(|sd| sd.decompose().l_minus.norm()).fold(0.0, f64::max))
}

/// Sup `|L₋|` at steps `h` and `h/2` for members whose `L₋` vanishes
/// identically but carries truncation error.
fn halving(h: f64) -> Result<Vec<(String, f64, f64)>> {
    let y1 = LambdaSpec::Linear { a: [0.1, 0.0, 0.0] };
    let mut out = Vec::new();
    for spec in [
        FamilySpec::new(SpaceForm::Minkowski, FamilyTag::JLambda, y1.clone()).with_theta(1.0),
        FamilySpec::new(SpaceForm::PseudoHyperbolic, FamilyTag::JCLambda, y1).with_c(2.0),
    ] {
        let name = format!("{} {} |L-|", spec.space.tag(), spec.family);
        let a = sup_l_minus(&build_family(&spec.clone().with_fd_step(h))?)?;
        let b = sup_l_minus(&build_family(&spec.with_fd_step(h / 2.0))?)?;
        out.push((name, a, b));
    }
    let base = FamilySpec::new(SpaceForm::PseudoSphere, FamilyTag::ICLambda, LambdaSpec::Zero).with_c(0.5);
    let mut sup = [0.0; 2];
    for (k, step) in [h, h / 2.0].into_iter().enumerate() {
        let moved = deform_null_unchecked(&build_family(&base.clone().with_fd_step(step))?, |z| 0.3 * (2.0 * z[0]).sin())?;
        sup[k] = sup_l_minus(&moved)?;
    }
    out.push(("deformed s41 sphere |L-|".into(), sup[0], sup[1]));
    Ok(out)
}

fn c10_convergence() -> Result<Outcome> {
    let rows = halving(0.02)?;
    let pass = rows.iter().all(|(_, a, b)| (3.0..=5.0).contains(&(a / b)));
    let detail = rows.iter().map(|(n, a, b)| format!("{n} {a:.2e} -> {b:.2e} (x{:.3})", a / b)).collect::<Vec<_>>();
    outcome(pass, detail.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("isotropy of i-families", c1_isotropy),
        ("semi-umbilic j-families", c2_semi_umbilic),
        ("flag and lift equivalences", c3_equivalences),
        ("null deformation", c4_deformation),
        ("integrability audits", c5_integrability),
        ("CR comparison", c6_cr),
        ("conformal invariance", c7_conformal),
        ("tension of the Gauss lift", c8_tension),
        ("stereographic transport", c9_stereographic),
        ("convergence order", c10_convergence),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name}: {detail} [{:.1}s]", k + 1, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of 10 passed in {:.1}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
