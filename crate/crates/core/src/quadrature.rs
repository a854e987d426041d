//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature on finite intervals.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

// Kronrod abscissae on [0, 1); odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-13),
            rel_tol: T::lit(1e-11),
            max_subdivisions: 2_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub abs_error: T,
    pub evaluations: usize,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk21<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<Segment<T>> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(non_finite(center, fc));
    }
    let mut kronrod = fc * T::lit(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = half_len * T::lit(XGK[j]);
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(non_finite(x1, f1));
        }
        if !f2.is_finite() {
            return Err(non_finite(x2, f2));
        }
        let pair = f1 + f2;
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    let value = kronrod * half_len;
    let error = ((kronrod - gauss) * half_len).abs();
    Ok(Segment { a, b, value, error })
}

fn non_finite<T: Scalar>(x: T, fx: T) -> Error {
    Error::Numeric(format!("integrand is not finite at {x}: {fx}"))
}

/// Integrates `f` over `[a, b]`, repeatedly bisecting the segment with the
/// largest error estimate until the total estimate meets
/// `max(abs_tol, rel_tol · |value|)`.
pub fn integrate<T, F>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<Integral<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric(format!(
            "integration bounds must be finite: [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            abs_error: T::zero(),
            evaluations: 0,
            subdivisions: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, opts)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }
    let mut segments = vec![gk21(&mut f, a, b)?];
    let mut evaluations = 21;
    loop {
        let value = segments.iter().fold(T::zero(), |s, g| s + g.value);
        let error = segments.iter().fold(T::zero(), |s, g| s + g.error);
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(Integral {
                value,
                abs_error: error,
                evaluations,
                subdivisions: segments.len(),
            });
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(Error::Numeric(format!(
                "quadrature did not converge on [{a}, {b}]: value {value}, error estimate {error} \
                 after {} subdivisions and {evaluations} evaluations",
                segments.len()
            )));
        }
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                    if s.error > be {
                        (i, s.error)
                    } else {
                        (bi, be)
                    }
                });
        let seg = segments.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Numeric(format!(
                "quadrature segment [{}, {}] cannot be bisected further",
                seg.a, seg.b
            )));
        }
        segments.push(gk21(&mut f, seg.a, mid)?);
        segments.push(gk21(&mut f, mid, seg.b)?);
        evaluations += 42;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_high_degree_polynomials() {
        // degree 31 is within reach of the 21-point Kronrod rule
        let r = integrate(
            |x: f64| x.powi(30) + 3.0 * x.powi(7),
            -1.0,
            1.0,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_and_peaked_integrands() {
        let opts = QuadOptions::default();
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, &opts).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, &opts).unwrap();
        let want = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((r.value - want).abs() / want < 1e-11);
    }

    #[test]
    fn reversed_bounds_and_errors() {
        let opts = QuadOptions::default();
        let r = integrate(|x: f64| x, 1.0, 0.0, &opts).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
        assert!(integrate(|_x: f64| f64::NAN, 0.0, 1.0, &opts).is_err());
        assert!(integrate(|x: f64| x, 0.0, f64::INFINITY, &opts).is_err());
    }
}
