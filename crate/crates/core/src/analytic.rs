//! Moments and modes.
//!
//! Closed forms exist for the three subfamilies IF1 (`p = 0`), IF2
//! (`p = ∞`) and IF3 (`0 < p < ∞`, `b = 1`). For everything else the
//! numeric routines integrate the density or solve the stationarity
//! equation of the density directly.

use std::fmt;

use crate::dist::{BoundaryDensity, IfParams, Subfamily};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Scalar;
use crate::special::{log1p_exp, log_beta, log_gamma};

/// Mean and variance with their existence flags.
///
/// When a moment does not exist the matching `*_violation` field names the
/// condition that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentResult<T> {
    pub mean: Option<T>,
    pub variance: Option<T>,
    pub mean_exists: bool,
    pub variance_exists: bool,
    pub mean_violation: Option<String>,
    pub variance_violation: Option<String>,
}

impl<T> MomentResult<T> {
    fn new(mean: std::result::Result<T, String>, variance: std::result::Result<T, String>) -> Self {
        // a variance is only reported alongside a mean
        let (variance, variance_violation) = match (&mean, variance) {
            (Err(m), _) => (None, Some(format!("mean does not exist ({m})"))),
            (Ok(_), Ok(v)) => (Some(v), None),
            (Ok(_), Err(e)) => (None, Some(e)),
        };
        let (mean, mean_violation) = match mean {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e)),
        };
        Self {
            mean_exists: mean.is_some(),
            variance_exists: variance.is_some(),
            mean,
            variance,
            mean_violation,
            variance_violation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    /// The density is maximal (and finite) at `x0`.
    Boundary,
    /// The density has an interior maximum.
    Interior,
    /// The density diverges as `x ↓ x0`.
    AsymptoteAtX0,
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeKind::Boundary => "boundary",
            ModeKind::Interior => "interior",
            ModeKind::AsymptoteAtX0 => "asymptote_at_x0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeResult<T> {
    pub location: T,
    pub kind: ModeKind,
}

// Tolerance for the equality cases b = 1 and b = -1/q.
const EQ_TOL: f64 = 1e-12;

fn unsupported<T: Scalar>(params: &IfParams<T>, fallback: &str) -> Error {
    Error::UnsupportedRegime(format!(
        "{params} is not in a closed-form subfamily (IF1, IF2 or IF3); use {fallback}"
    ))
}

/// Closed-form mean and variance for IF1, IF2 and IF3.
pub fn moments<T: Scalar>(params: &IfParams<T>) -> Result<MomentResult<T>> {
    let sub = params
        .subfamily()
        .ok_or_else(|| unsupported(params, "moments_numeric"))?;
    let (b, c, q, x0) = (params.b(), params.c(), params.q(), params.x0());
    let one = T::one();
    let two = T::lit(2.0);
    let bq = b * q;
    Ok(match sub {
        Subfamily::If1 => {
            // E[Y^k] = c^k q B(q - k/b, 1 + k/b)
            let raw =
                |k: T| -> Result<T> { Ok(c.powf(k) * q * log_beta(q - k / b, one + k / b)?.exp()) };
            let cond = |k: T| {
                if b > T::zero() {
                    bq > k
                } else {
                    -b > k
                }
            };
            let describe = |k: f64| {
                if b > T::zero() {
                    format!("b > 0 requires b*q > {k}, got b*q = {bq}")
                } else {
                    format!("b < 0 requires -b > {k}, got b = {b}")
                }
            };
            let m1 = if cond(one) {
                Ok(raw(one)?)
            } else {
                Err(describe(1.0))
            };
            let var = if cond(two) {
                let r1 = raw(one)?;
                Ok(raw(two)? - r1 * r1)
            } else {
                Err(describe(2.0))
            };
            MomentResult::new(m1.map(|m| x0 + m), var)
        }
        Subfamily::If2 => {
            // E[Y^k] = c^k Γ(1 - k/(b q))
            let raw = |k: T| -> Result<T> { Ok(c.powf(k) * log_gamma(one - k / bq)?.exp()) };
            let cond = |k: T| b < T::zero() || bq > k;
            let describe = |k: f64| format!("b > 0 requires b*q > {k}, got b*q = {bq}");
            let m1 = if cond(one) {
                Ok(raw(one)?)
            } else {
                Err(describe(1.0))
            };
            let var = if cond(two) {
                let r1 = raw(one)?;
                Ok(raw(two)? - r1 * r1)
            } else {
                Err(describe(2.0))
            };
            MomentResult::new(m1.map(|m| x0 + m), var)
        }
        Subfamily::If3 => {
            // with G = k + Y/c: E[G^j] = (p+1)^(1 - j/q) B(1 - j/q, p + 1)
            let p = params.p();
            let p1 = p + one;
            let g_moment = |j: T| -> Result<T> {
                Ok((p1.ln() * (one - j / q) + log_beta(one - j / q, p1)?).exp())
            };
            let m1 = if q > one {
                let eg = g_moment(one)?;
                Ok(c * (eg - p1.powf(-one / q)))
            } else {
                Err(format!("IF3 requires q > 1, got q = {q}"))
            };
            let var = if q > two {
                let eg = g_moment(one)?;
                Ok(c * c * (g_moment(two)? - eg * eg))
            } else {
                Err(format!("IF3 requires q > 2, got q = {q}"))
            };
            MomentResult::new(m1.map(|m| x0 + m), var)
        }
    })
}

/// Mean and variance by adaptive quadrature, for any parameters.
///
/// The integrals run over the log-offset `ln((x - x0) / c)`, first up to the
/// `1 - 1e-10` quantile and then over successively doubled (in log space)
/// extensions. Past the last extension the integrand is extrapolated as a
/// power law with its locally measured exponent; when that exponent is no
/// steeper than `-1 - 1e-3` the moment is declared divergent.
pub fn moments_numeric<T: Scalar>(params: &IfParams<T>) -> Result<MomentResult<T>> {
    let x0 = params.x0();
    let m1 = match central_moment(params, 1, T::zero())? {
        Some(m) => Ok(m),
        None => Err("integrand x*f(x) decays no faster than 1/x".to_string()),
    };
    let var = match &m1 {
        Ok(m) => match central_moment(params, 2, *m)? {
            Some(v) => Ok(v),
            None => Err("integrand x^2*f(x) decays no faster than 1/x".to_string()),
        },
        Err(_) => Err(String::new()),
    };
    Ok(MomentResult::new(m1.map(|m| x0 + m), var))
}

const DIVERGENCE_SLACK: f64 = 1e-3;
const TAIL_LEVEL: f64 = 1e-10;
const MAX_EXTENSIONS: usize = 12;

/// `∫ (y - center)^k f(x0 + y) dy` over `y > 0`, `None` when divergent.
fn central_moment<T: Scalar>(params: &IfParams<T>, k: i32, center: T) -> Result<Option<T>> {
    let c = params.c();
    let ln_c = c.ln();
    // log of the integrand in y (without the ds Jacobian), at ln_y = ln(y/c)
    let ln_integrand = |s: T| -> T {
        let y = c * s.exp();
        let d = (y - center).abs();
        params.log_pdf_ln_y(s) + T::lit(k as f64) * d.ln()
    };
    let integrand = |s: T| -> T {
        let y = c * s.exp();
        let w = y - center;
        let v = (params.log_pdf_ln_y(s) + s + ln_c).exp();
        if v == T::zero() {
            return T::zero();
        }
        v * w.powi(k)
    };

    let lower = params.quantile_offset(T::lit(1e-16))?;
    let floor = c * T::lit(1e-250);
    let s_lo = lower.max(floor).ln() - ln_c;
    let upper = params.quantile_offset(T::one() - T::lit(TAIL_LEVEL))?;
    if !upper.is_finite() || upper <= T::zero() {
        return Err(Error::Numeric(format!(
            "tail cutoff quantile is not usable for {params}: {upper}"
        )));
    }
    let mut s_hi = upper.ln() - ln_c;
    let opts = QuadOptions {
        abs_tol: T::lit(1e-300),
        rel_tol: T::lit(1e-11),
        max_subdivisions: 4_000,
    };
    let mut acc = integrate(integrand, s_lo, s_hi, &opts)?.value;
    let ln2 = T::LN_2();
    let mut prev_estimate: Option<T> = None;
    let max_s = T::lit(600.0) - ln_c.max(T::zero());
    for ext in 0..MAX_EXTENSIONS {
        // local power-law exponent of the integrand at the current cutoff
        let slope = (ln_integrand(s_hi + ln2) - ln_integrand(s_hi)) / ln2;
        if slope.is_nan() {
            return Err(Error::Numeric(format!(
                "cannot measure tail decay of moment {k} for {params}"
            )));
        }
        if slope >= -T::one() - T::lit(DIVERGENCE_SLACK) {
            return Ok(None);
        }
        let y_hi = c * s_hi.exp();
        let tail = if slope == T::neg_infinity() {
            T::zero()
        } else {
            let g = ln_integrand(s_hi).exp();
            let sign = if k % 2 == 1 && y_hi < center {
                -T::one()
            } else {
                T::one()
            };
            sign * g * y_hi / (-slope - T::one())
        };
        let estimate = acc + tail;
        let tol = T::lit(1e-10) * estimate.abs();
        if tail.abs() <= tol {
            return Ok(Some(estimate));
        }
        if let Some(prev) = prev_estimate {
            if (estimate - prev).abs() <= tol {
                return Ok(Some(estimate));
            }
        }
        prev_estimate = Some(estimate);
        let step = ln2 * T::lit((1u64 << ext.min(10)) as f64) * T::lit(4.0);
        let next = (s_hi + step).min(max_s);
        if next <= s_hi {
            break;
        }
        acc = acc + integrate(integrand, s_hi, next, &opts)?.value;
        s_hi = next;
    }
    match prev_estimate {
        Some(e) => Err(Error::Numeric(format!(
            "moment {k} tail did not settle for {params}; last estimate {e}"
        ))),
        None => Err(Error::Numeric(format!(
            "moment {k} quadrature failed for {params}"
        ))),
    }
}

/// Closed-form mode of IF1, IF2 and IF3.
pub fn mode<T: Scalar>(params: &IfParams<T>) -> Result<ModeResult<T>> {
    let sub = params
        .subfamily()
        .ok_or_else(|| unsupported(params, "mode_numeric"))?;
    let (b, c, q, x0) = (params.b(), params.c(), params.q(), params.x0());
    let one = T::one();
    let tol = T::lit(EQ_TOL);
    let bq = b * q;
    let boundary = ModeResult {
        location: x0,
        kind: ModeKind::Boundary,
    };
    let asymptote = ModeResult {
        location: x0,
        kind: ModeKind::AsymptoteAtX0,
    };
    let interior = |location: T| ModeResult {
        location,
        kind: ModeKind::Interior,
    };
    Ok(match sub {
        Subfamily::If1 => {
            if (b - one).abs() <= tol || (bq + one).abs() <= tol {
                boundary
            } else if b > one || bq < -one {
                interior(x0 + c * ((b - one) / (bq + one)).powf(one / b))
            } else {
                asymptote
            }
        }
        Subfamily::If2 => {
            if (bq + one).abs() <= tol {
                boundary
            } else if b > T::zero() || bq < -one {
                interior(x0 + c * (bq / (bq + one)).powf(one / bq))
            } else {
                asymptote
            }
        }
        Subfamily::If3 => {
            let p = params.p();
            // ((q+1)/((p+1)q+1))^(-1/q) - 1 = expm1(ln1p(p q / (q + 1)) / q)
            let bracket = ((p * q / (q + one)).ln_1p() / q).exp_m1();
            interior(x0 + c * (-p.ln_1p() / q).exp() * bracket)
        }
    })
}

/// Left-hand side of the stationarity equation of the density in the
/// variable `t = G^{-q} / (p + 1) ∈ (0, 1)`:
///
/// ```text
/// (b-1) t^(-1/q) (1-t) - b(q+1) (t^(-1/q) - 1)(1-t) + p b q (t^(-1/q) - 1) t
/// ```
pub fn mode_equation<T: Scalar>(p: T, b: T, q: T, t: T) -> T {
    let one = T::one();
    let s = t.powf(-one / q);
    (b - one) * s * (one - t) - b * (q + one) * (s - one) * (one - t) + p * b * q * (s - one) * t
}

/// `x` corresponding to a root `t` of [`mode_equation`]:
/// `x0 + c (p+1)^(-1/(bq)) (t^(-1/q) - 1)^(1/b)`.
pub fn mode_location_from_t<T: Scalar>(params: &IfParams<T>, t: T) -> T {
    location_from_ln_t(params, t.ln())
}

fn location_from_ln_t<T: Scalar>(params: &IfParams<T>, ln_t: T) -> T {
    let (b, q) = (params.b(), params.q());
    let v = (-ln_t / q).exp_m1();
    params.x0() + params.c() * ((params.ln_k() + v.ln()) / b).exp()
}

// The stationarity equation divided by t^(-1/q) > 0, evaluated at
// t = logistic(s) so that both t and 1 - t keep full precision.
fn scaled_mode_equation<T: Scalar>(p: T, b: T, q: T, s: T) -> T {
    let one = T::one();
    let ln_t = -log1p_exp(-s);
    let one_minus_t = (-log1p_exp(s)).exp();
    let t = ln_t.exp();
    let r = -(ln_t / q).exp_m1(); // 1 - t^(1/q)
    (b - one) * one_minus_t - b * (q + one) * r * one_minus_t + p * b * q * r * t
}

const SCAN_LO: f64 = -300.0;
const SCAN_HI: f64 = 36.0;
const SCAN_POINTS: usize = 6_000;

/// Mode for general finite `p` by root-finding on [`mode_equation`].
///
/// Every sign change on a logit grid over `t ∈ (0, 1)` is refined by
/// bisection and mapped back to `x`; the candidate with the largest density
/// is compared with the behaviour of the density at `x0`. Without any sign
/// change the density is maximized directly by golden-section search.
pub fn mode_numeric<T: Scalar>(params: &IfParams<T>) -> Result<ModeResult<T>> {
    if params.regime().is_infinite() {
        return Err(Error::UnsupportedRegime(format!(
            "{params}: the stationarity equation needs finite p; use mode"
        )));
    }
    let (p, b, q) = (params.p(), params.b(), params.q());
    let h = |s: T| scaled_mode_equation(p, b, q, s);

    let mut best: Option<(T, T)> = None; // (location, log density)
    let lo = T::lit(SCAN_LO);
    let step = (T::lit(SCAN_HI) - lo) / T::lit(SCAN_POINTS as f64);
    let mut s_prev = lo;
    let mut h_prev = h(s_prev);
    for i in 1..=SCAN_POINTS {
        let s = lo + step * T::lit(i as f64);
        let hs = h(s);
        if h_prev != T::zero() && hs != T::zero() && (h_prev < T::zero()) != (hs < T::zero()) {
            let root = bisect(&h, s_prev, s);
            let ln_t = -log1p_exp(-root);
            let x = location_from_ln_t(params, ln_t);
            if x.is_finite() && x > params.x0() {
                let lp = params.log_pdf_offset(x - params.x0());
                if best.is_none_or(|(_, bl)| lp > bl) {
                    best = Some((x, lp));
                }
            }
        }
        s_prev = s;
        h_prev = hs;
    }

    let x0 = params.x0();
    match params.boundary_density() {
        BoundaryDensity::Infinite => Ok(ModeResult {
            location: x0,
            kind: ModeKind::AsymptoteAtX0,
        }),
        boundary => match best {
            Some((x, lp)) => {
                let interior = ModeResult {
                    location: x,
                    kind: ModeKind::Interior,
                };
                match boundary {
                    BoundaryDensity::Finite(v) if v.ln() > lp + T::lit(EQ_TOL) => Ok(ModeResult {
                        location: x0,
                        kind: ModeKind::Boundary,
                    }),
                    _ => Ok(interior),
                }
            }
            None => golden_section_mode(params),
        },
    }
}

fn bisect<T: Scalar, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T) -> T {
    let fa_neg = f(a) < T::zero();
    for _ in 0..200 {
        let m = (a + b) * T::lit(0.5);
        if m <= a || m >= b {
            break;
        }
        if (f(m) < T::zero()) == fa_neg {
            a = m;
        } else {
            b = m;
        }
    }
    (a + b) * T::lit(0.5)
}

/// Maximizes `f` on `[a, b]` by golden-section search; returns the argmax.
pub(crate) fn golden_section_max<T: Scalar, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, tol: T) -> T {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    (a + b) * T::lit(0.5)
}

fn golden_section_mode<T: Scalar>(params: &IfParams<T>) -> Result<ModeResult<T>> {
    let c = params.c();
    let hi = params.quantile_offset(T::one() - T::lit(1e-6))?;
    let lo = params
        .quantile_offset(T::lit(1e-12))?
        .max(c * T::lit(1e-200));
    if !(hi.is_finite() && hi > lo) {
        return Err(Error::Numeric(format!(
            "no search interval for the mode of {params}"
        )));
    }
    let (s_lo, s_hi) = (lo.ln(), hi.ln());
    let s = golden_section_max(
        |s: T| params.log_pdf_offset(s.exp()),
        s_lo,
        s_hi,
        T::lit(1e-10),
    );
    let near_lower = s - s_lo < T::lit(1e-6) * (s_hi - s_lo).max(T::one());
    let x0 = params.x0();
    Ok(if near_lower {
        let kind = match params.boundary_density() {
            BoundaryDensity::Infinite => ModeKind::AsymptoteAtX0,
            _ => ModeKind::Boundary,
        };
        ModeResult { location: x0, kind }
    } else {
        ModeResult {
            location: x0 + s.exp(),
            kind: ModeKind::Interior,
        }
    })
}
