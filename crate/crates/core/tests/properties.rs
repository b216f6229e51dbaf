use lsl::curvature::{contract, random_lorentz, riemann_numeric, transform_frame, BuiltinChart, DEFAULT_STEP};
use lsl::families::{build_family, FamilySpec, FamilyTag, LambdaSpec};
use lsl::lorentz::{
    fibre_complex_structure, fibre_tangent_basis, lie_basis, null_split, Frame, LieElem, MVec, NullDir, NullSign,
    Signature, FRAME_EPS,
};
use lsl::space_form::{constant_curvature_tensor, stereographic, stereographic_inverse, SpaceForm};
use lsl::surface::{classify, Decomposition, Grid, Immersion};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lorentz_frame(seed: u64) -> Frame {
    let a = random_lorentz(&mut ChaCha8Rng::seed_from_u64(seed));
    let e = [0, 1, 2, 3].map(|j| MVec::new(Signature::R41, &[a[0][j], a[1][j], a[2][j], a[3][j]]).unwrap());
    Frame::new(e).unwrap()
}

fn family(space: SpaceForm, tag: FamilyTag, seed: u64) -> FamilySpec {
    let l = LambdaSpec::random(&mut ChaCha8Rng::seed_from_u64(seed));
    let s = FamilySpec::new(space, tag, l);
    match tag {
        FamilyTag::JLambda => s.with_theta(1.0),
        FamilyTag::ICLambda => s.with_c(0.5),
        FamilyTag::JCLambda => s.with_c(2.0),
        FamilyTag::ILambda => s,
    }
}

fn any_family() -> impl Strategy<Value = (SpaceForm, FamilyTag)> {
    prop::sample::select(vec![
        (SpaceForm::Minkowski, FamilyTag::ILambda),
        (SpaceForm::Minkowski, FamilyTag::JLambda),
        (SpaceForm::PseudoSphere, FamilyTag::ILambda),
        (SpaceForm::PseudoSphere, FamilyTag::ICLambda),
        (SpaceForm::PseudoHyperbolic, FamilyTag::ILambda),
        (SpaceForm::PseudoHyperbolic, FamilyTag::JCLambda),
    ])
}

fn rotate(h: &[[[f64; 2]; 2]; 2], phi: f64) -> [[[f64; 2]; 2]; 2] {
    let (c, s) = (phi.cos(), phi.sin());
    let r = [[c, s], [-s, c]];
    let mut out = [[[0.0; 2]; 2]; 2];
    for al in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[al][i][j] += r[i][k] * r[j][l] * h[al][k][l];
                    }
                }
            }
        }
    }
    out
}

#[test]
fn generators_close_under_brackets() {
    for sig in [Signature::R41, Signature::R51, Signature::R52] {
        let n = sig.dims();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        for &(i, j) in &pairs {
            for &(k, l) in &pairs {
                let b = lie_basis(i, j, sig).unwrap().bracket(&lie_basis(k, l, sig).unwrap());
                assert!(b.skew_residual() < 1e-15);
                let coeffs = b.coefficients();
                let mut rebuilt = LieElem::zero(sig);
                for (c, &(p, q)) in coeffs.iter().zip(&pairs) {
                    assert!([0.0, 1.0, -1.0].contains(c), "[E{i}{j}, E{k}{l}] has coefficient {c}");
                    rebuilt = rebuilt + lie_basis(p, q, sig).unwrap().scale(*c);
                }
                assert!((&rebuilt.m - &b.m).amax() < 1e-15);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lorentz_frames_are_orthonormal(seed in any::<u64>()) {
        prop_assert!(lorentz_frame(seed).gram_residual() < 1e-10);
    }

    #[test]
    fn null_split_is_normal_to_the_screen(seed in any::<u64>()) {
        let f = lorentz_frame(seed);
        let (kp, km) = null_split(&f);
        for k in [kp, km] {
            prop_assert!(k.rep().dot(&f.e[2]).abs() < 1e-12);
            prop_assert!(k.rep().dot(&f.e[3]).abs() < 1e-12);
        }
    }

    #[test]
    fn fibre_complex_structure_squares_to_minus_one(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let [m1, m2] = fibre_tangent_basis(NullSign::Plus);
        let x = m1.scale(a) + m2.scale(b);
        let jj = fibre_complex_structure(&fibre_complex_structure(&x).unwrap()).unwrap();
        prop_assert!((&jj.m + &x.m).amax() < 1e-12);
    }

    #[test]
    fn null_geodesics_stay_on_the_quadric(
        (space, tag) in any_family(),
        seed in 0u64..1000,
        z in prop::array::uniform2(-0.3f64..0.3),
        t in -5.0f64..5.0,
    ) {
        let imm = build_family(&family(space, tag, seed)).unwrap();
        let sd = imm.sample(z).unwrap();
        let p = space.point(&sd.point.to_vec()).unwrap();
        let k = NullDir::new(sd.frame[0] + sd.frame[1]).unwrap();
        let q = space.null_geodesic(&p, &k, t).unwrap();
        prop_assert!(space.quadric_residual(&q) < 1e-12);
    }

    #[test]
    fn covariant_derivative_is_metric(seed in 0u64..1000, t in -0.5f64..0.5) {
        // a curve on S⁴₁ with two tangent fields along it
        let m = SpaceForm::PseudoSphere;
        let imm = build_family(&family(m, FamilyTag::ICLambda, seed)).unwrap();
        let curve = |s: f64| imm.eval([s, 0.3 * s]).unwrap();
        let x = |s: f64| imm.sample([s, 0.3 * s]).unwrap().frame[2];
        let y = |s: f64| imm.sample([s, 0.3 * s]).unwrap().frame[1] * (1.0 + s * s);
        let h = 1e-3;
        let lhs = (x(t + h).dot(&y(t + h)) - x(t - h).dot(&y(t - h))) / (2.0 * h);
        let dx = m.covariant_derivative(&curve, &x, t, h).unwrap();
        let dy = m.covariant_derivative(&curve, &y, t, h).unwrap();
        prop_assert!((lhs - dx.dot(&y(t)) - x(t).dot(&dy)).abs() < 1e-5);
    }

    #[test]
    fn stereographic_round_trip(y in prop::array::uniform4(-3.0f64..3.0)) {
        let y = MVec::new(Signature::R41, &y).unwrap();
        let x = stereographic_inverse(&y).unwrap();
        prop_assert!(SpaceForm::PseudoSphere.quadric_residual(&x) < 1e-12);
        prop_assert!((stereographic(&x).unwrap() - y).euclid() < 1e-12 * (1.0 + y.euclid()));
    }

    #[test]
    fn decomposition_reconstructs(h in prop::array::uniform8(-5.0f64..5.0)) {
        let h = [[[h[0], h[1]], [h[1], h[2]]], [[h[3], h[4]], [h[4], h[5]]]];
        let back = Decomposition::from_h(&h).reconstruct();
        for al in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((back[al][i][j] - h[al][i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn screen_rotation_acts_by_twice_the_angle(h in prop::array::uniform6(-5.0f64..5.0), phi in -4.0f64..4.0) {
        let h = [[[h[0], h[1]], [h[1], h[2]]], [[h[3], h[4]], [h[4], h[5]]]];
        let a = Decomposition::from_h(&h);
        let b = Decomposition::from_h(&rotate(&h, phi));
        let w = Complex64::from_polar(1.0, 2.0 * phi);
        prop_assert!((a.h_plus - b.h_plus).abs() < 1e-8 && (a.h_minus - b.h_minus).abs() < 1e-8);
        prop_assert!((a.l_plus * w - b.l_plus).norm() < 1e-8);
        prop_assert!((a.l_minus * w - b.l_minus).norm() < 1e-8);
    }

    #[test]
    fn rotated_chart_rotates_the_trace_free_parts(
        c in prop::array::uniform6(-0.5f64..0.5),
        phi in -3.0f64..3.0,
        p in prop::array::uniform2(-0.5f64..0.5),
    ) {
        // quadratic charts are differenced exactly
        let spec = FamilySpec::new(SpaceForm::Minkowski, FamilyTag::ILambda, LambdaSpec::Quad { c });
        let f = build_family(&spec).unwrap();
        let (co, si) = (phi.cos(), phi.sin());
        let g = Immersion::from_fn(SpaceForm::Minkowski, f.grid, move |w| {
            spec.point([co * w[0] - si * w[1], si * w[0] + co * w[1]]).unwrap()
        })
        .unwrap();
        let a = f.sample([co * p[0] - si * p[1], si * p[0] + co * p[1]]).unwrap().decompose();
        let b = g.sample(p).unwrap().decompose();
        let w = Complex64::from_polar(1.0, 2.0 * phi);
        prop_assert!((a.h_plus - b.h_plus).abs() < 1e-8 && (a.h_minus - b.h_minus).abs() < 1e-8);
        prop_assert!((a.l_plus * w - b.l_plus).norm() < 1e-8, "{:?} {:?}", a.l_plus * w, b.l_plus);
        prop_assert!((a.l_minus * w - b.l_minus).norm() < 1e-8);
    }

    #[test]
    fn surface_frames_are_orthonormal((space, tag) in any_family(), seed in 0u64..1000, z in prop::array::uniform2(-0.4f64..0.4)) {
        let sd = build_family(&family(space, tag, seed)).unwrap().sample(z).unwrap();
        prop_assert!(sd.gram_residual() < 1e-10);
    }

    #[test]
    fn riemann_numeric_matches_constant_curvature(
        which in 0usize..2,
        x in prop::array::uniform4(-0.3f64..0.3),
        seed in any::<u64>(),
    ) {
        let (chart, s) = [(BuiltinChart::DeSitterGraph, 1.0), (BuiltinChart::AntiDeSitterGraph, -1.0)][which];
        let curv = riemann_numeric(&chart, x, DEFAULT_STEP).unwrap();
        let frame = transform_frame(&curv.coordinate_frame().unwrap(), &random_lorentz(&mut ChaCha8Rng::seed_from_u64(seed)));
        let got = contract(&curv.riemann, &frame);
        let want = constant_curvature_tensor(s);
        let err = (0..256).map(|n| (got[n / 64][n / 16 % 4][n / 4 % 4][n % 4] - want[n / 64][n / 16 % 4][n / 4 % 4][n % 4]).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-4, "{err:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn doubling_the_domain_keeps_the_flags((space, tag) in any_family(), seed in 0u64..1000) {
        let spec = family(space, tag, seed);
        let grid = spec.model().unwrap().default_grid(16).unwrap();
        let imm = build_family(&spec.with_grid(grid)).unwrap();
        let a = classify(&imm, 1e-5).unwrap();
        let b = classify(&imm.rescaled_domain(2.0).unwrap(), 1e-5).unwrap();
        prop_assert_eq!(a.flags, b.flags);
        prop_assert_eq!(a.samples, b.samples);
    }
}

#[test]
fn frame_signs_match_the_model() {
    assert_eq!(FRAME_EPS, [-1.0, 1.0, 1.0, 1.0]);
    let _ = Grid::square(0.0, 1.0, 2).unwrap();
}
