use approx::assert_relative_eq;
use ifdist::{IfParams, IfParams32};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn p_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        Just(f64::INFINITY),
        (-3.0f64..3.0).prop_map(|e| 10f64.powf(e)),
    ]
}

fn b_strategy() -> impl Strategy<Value = f64> {
    (0.3f64..3.0, any::<bool>()).prop_map(|(b, neg)| if neg { -b } else { b })
}

prop_compose! {
    fn params()(
        p in p_strategy(),
        b in b_strategy(),
        c in 0.1f64..50.0,
        q in 0.3f64..5.0,
        x0 in prop_oneof![Just(0.0), 0.0f64..20.0],
    ) -> IfParams<f64> {
        IfParams::new(p, b, c, q, x0).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn quantile_roundtrip_in_offset(params in params(), y in 1e-6f64..(1.0 - 1e-6)) {
        let offset = params.quantile_offset(y).unwrap();
        prop_assume!(offset > 0.0 && offset.is_finite());
        let back = params.cdf_offset(offset).unwrap();
        prop_assert!((back - y).abs() < 1e-10, "{params}: y = {y}, got {back}");
    }

    #[test]
    fn reciprocal_duality(params in params(), ln_y in -6.0f64..6.0) {
        let (c, x0) = (params.c(), params.x0());
        let y = ln_y.exp();
        let lhs = params.cdf_offset(c * y).unwrap();
        let rhs = 1.0 - params.mirrored().cdf_offset(c / y).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12, "{params} at {}: {lhs} vs {rhs}", x0 + c * y);
    }

    #[test]
    fn cdf_is_monotone_and_bounded(params in params(), a in 0.0f64..1.0, d in 0.0f64..1.0) {
        let xa = params.quantile(a.clamp(1e-9, 1.0 - 1e-9)).unwrap();
        let xb = xa + d * params.c();
        let (fa, fb) = (params.cdf(xa).unwrap(), params.cdf(xb).unwrap());
        prop_assert!((0.0..=1.0).contains(&fa) && (0.0..=1.0).contains(&fb));
        prop_assert!(fa <= fb);
        let s = params.survival(xb).unwrap();
        prop_assert!((fb + s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pdf_is_cdf_derivative(params in params(), y in 0.02f64..0.98) {
        let x = params.quantile(y).unwrap();
        let offset = x - params.x0();
        let h = 1e-5 * offset;
        prop_assume!(h > 1e-9 * params.c());
        let slope = (params.cdf(x + h).unwrap() - params.cdf(x - h).unwrap()) / (2.0 * h);
        let pdf = params.pdf(x).unwrap();
        prop_assert!((slope - pdf).abs() <= 1e-5 * pdf, "{params} at {x}: {slope} vs {pdf}");
    }

    #[test]
    fn hazard_matches_ratio(params in params(), y in 0.01f64..0.99) {
        let x = params.quantile(y).unwrap();
        prop_assume!(x > params.x0());
        let want = params.pdf(x).unwrap() / params.survival(x).unwrap();
        let got = params.hazard(x).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1e-300));
    }

    #[test]
    fn samples_stay_in_support(params in params(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in params.sample(&mut rng, 64) {
            prop_assert!(x >= params.x0() && x.is_finite());
        }
    }
}

#[test]
fn zero_below_location() {
    let p = IfParams::new(1.0, 2.0, 1.0, 1.5, 3.0).unwrap();
    assert_eq!(p.pdf(2.0).unwrap(), 0.0);
    assert_eq!(p.cdf(2.0).unwrap(), 0.0);
    assert_eq!(p.survival(2.0).unwrap(), 1.0);
    assert!(p.pdf(f64::NAN).is_err());
    assert!(p.quantile(1.5).is_err());
    assert_eq!(p.quantile(0.0).unwrap(), 3.0);
    assert_eq!(p.quantile(1.0).unwrap(), f64::INFINITY);
}

#[test]
fn invalid_parameters_rejected() {
    assert!(IfParams::new(-1.0, 1.0, 1.0, 1.0, 0.0).is_err());
    assert!(IfParams::new(1.0, 0.0, 1.0, 1.0, 0.0).is_err());
    assert!(IfParams::new(1.0, 1.0, 0.0, 1.0, 0.0).is_err());
    assert!(IfParams::new(1.0, 1.0, 1.0, -2.0, 0.0).is_err());
    assert!(IfParams::new(1.0, 1.0, 1.0, 1.0, f64::NAN).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let p = IfParams::new(2.0, -1.5, 3.0, 0.8, 1.0).unwrap();
    let a = p.sample(&mut ChaCha8Rng::seed_from_u64(11), 100);
    let b = p.sample(&mut ChaCha8Rng::seed_from_u64(11), 100);
    let c = p.sample(&mut ChaCha8Rng::seed_from_u64(12), 100);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn lomax_sample_passes_ks() {
    // Lomax(alpha = 2.5, lambda = 3): S(x) = (1 + x / lambda)^(-alpha)
    let (alpha, lambda) = (2.5, 3.0);
    let p = IfParams::new(0.0, 1.0, lambda, alpha, 0.0).unwrap();
    let n = 100_000;
    let mut xs = p.sample(&mut ChaCha8Rng::seed_from_u64(2024), n);
    xs.sort_by(f64::total_cmp);
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (1.0 + x / lambda).powf(-alpha);
            (f - i as f64 / n as f64)
                .abs()
                .max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov distribution
    assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
}

#[test]
fn interpolation_converges_in_p() {
    let limit = IfParams::new(f64::INFINITY, -1.2, 1.0, 1.0, 0.0).unwrap();
    let xs: Vec<f64> = (1..200).map(|i| i as f64 * 0.025).collect();
    let sup = |p: f64| {
        let near = IfParams::new(p, -1.2, 1.0, 1.0, 0.0).unwrap();
        xs.iter()
            .map(|&x| (near.pdf(x).unwrap() - limit.pdf(x).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [1e2, 1e4, 1e6].into_iter().map(sup).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] < 1e-4);

    let origin = IfParams::new(0.0, 0.7, 2.0, 1.3, 0.0).unwrap();
    let near = IfParams::new(1e-8, 0.7, 2.0, 1.3, 0.0).unwrap();
    for &x in &xs {
        assert!((near.pdf(x).unwrap() - origin.pdf(x).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn single_precision_tracks_double() {
    let p64 = IfParams::new(1.5, -0.8, 2.0, 1.7, 0.5).unwrap();
    let p32 = IfParams32::new(1.5, -0.8, 2.0, 1.7, 0.5).unwrap();
    for x in [0.6f32, 1.0, 2.5, 7.0, 30.0] {
        let want = p64.cdf(x as f64).unwrap();
        assert_relative_eq!(p32.cdf(x).unwrap() as f64, want, max_relative = 1e-4);
        let want = p64.pdf(x as f64).unwrap();
        assert_relative_eq!(p32.pdf(x).unwrap() as f64, want, max_relative = 1e-4);
    }
}
