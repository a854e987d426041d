//! Likelihood, maximum-likelihood fitting and submodel tests.

mod mle;

pub use mle::{fit_mle, standard_errors, FitConfig, FitResult, Parameterization};

use crate::dist::IfParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::{chi2_quantile, chi2_sf, log1m_exp};

/// One (possibly censored) observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation<T: Scalar = f64> {
    /// The event was observed at `x`.
    Exact(T),
    /// The event happened at or before `x`.
    LeftCensored(T),
    /// The event happens after `x`.
    RightCensored(T),
    /// The event happened in `(left, right]`.
    IntervalCensored(T, T),
}

impl<T: Scalar> Observation<T> {
    /// Interval observation, checking `left < right`.
    pub fn interval(left: T, right: T) -> Result<Self> {
        let obs = Observation::IntervalCensored(left, right);
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.values().iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain(format!(
                "observation values must be finite: {self:?}"
            )));
        }
        if let Observation::IntervalCensored(l, r) = *self {
            if l >= r {
                return Err(Error::Domain(format!(
                    "interval observation needs left < right, got ({l}, {r})"
                )));
            }
        }
        Ok(())
    }

    /// The finite values carried by the observation.
    pub fn values(&self) -> Vec<T> {
        match *self {
            Observation::Exact(x)
            | Observation::LeftCensored(x)
            | Observation::RightCensored(x) => vec![x],
            Observation::IntervalCensored(l, r) => vec![l, r],
        }
    }

    /// Log-likelihood contribution.
    pub fn log_contribution(&self, params: &IfParams<T>) -> Result<T> {
        match *self {
            Observation::Exact(x) => params.log_pdf(x),
            Observation::LeftCensored(x) => params.log_cdf(x),
            Observation::RightCensored(x) => params.log_survival(x),
            Observation::IntervalCensored(l, r) => log_interval_prob(params, l, r),
        }
    }
}

/// `ln(F(r) - F(l))`, from the cdf when `F(r) < 1/2` and from the survival
/// function otherwise.
fn log_interval_prob<T: Scalar>(params: &IfParams<T>, l: T, r: T) -> Result<T> {
    let lf_r = params.log_cdf(r)?;
    if lf_r < -T::LN_2() {
        let lf_l = params.log_cdf(l)?;
        Ok(lf_r + log1m_exp(lf_l - lf_r))
    } else {
        let ls_l = params.log_survival(l)?;
        let ls_r = params.log_survival(r)?;
        if ls_l == T::neg_infinity() {
            return Ok(T::neg_infinity());
        }
        Ok(ls_l + log1m_exp(ls_r - ls_l))
    }
}

/// Log-likelihood of possibly censored data.
///
/// Exact points contribute `ln f`, left-censored ones `ln F`, right-censored
/// ones `ln S` and intervals `ln(F(r) - F(l))`. A point below `x0` yields
/// `-∞` rather than an error.
pub fn log_likelihood<T: Scalar>(params: &IfParams<T>, data: &[Observation<T>]) -> Result<T> {
    if data.is_empty() {
        return Err(Error::Domain("log-likelihood of an empty data set".into()));
    }
    let mut total = T::zero();
    for obs in data {
        let term = obs.log_contribution(params)?;
        if term == T::neg_infinity() {
            return Ok(T::neg_infinity());
        }
        total = total + term;
    }
    Ok(total)
}

/// `(AIC, BIC) = (2k - 2 mll, k ln n - 2 mll)`.
pub fn information_criteria(mll: f64, k: usize, n: usize) -> (f64, f64) {
    let k = k as f64;
    (2.0 * k - 2.0 * mll, k * (n as f64).ln() - 2.0 * mll)
}

/// Outcome of a likelihood-ratio test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrtResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

impl LrtResult {
    /// The `1 - alpha` quantile of the chi-squared reference distribution.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        chi2_quantile(1.0 - alpha, self.df)
    }

    /// Whether the restricted model is rejected at level `alpha`.
    pub fn rejects(&self, alpha: f64) -> Result<bool> {
        Ok(self.statistic > self.critical_value(alpha)?)
    }
}

const LRT_SLACK: f64 = 1e-8;

/// Likelihood-ratio test from two maximized log-likelihoods.
///
/// `T = -2 (restricted - full)`; values in `[-1e-8, 0)` are clamped to 0.
pub fn lrt_from_mll(restricted_mll: f64, full_mll: f64, df: u32) -> Result<LrtResult> {
    if df == 0 {
        return Err(Error::Domain("likelihood-ratio test needs df >= 1".into()));
    }
    if !(restricted_mll.is_finite() && full_mll.is_finite()) {
        return Err(Error::Domain(format!(
            "log-likelihoods must be finite, got {restricted_mll} and {full_mll}"
        )));
    }
    let t = -2.0 * (restricted_mll - full_mll);
    if t < -LRT_SLACK {
        return Err(Error::Domain(format!(
            "restricted log-likelihood {restricted_mll} exceeds the full one {full_mll}"
        )));
    }
    let statistic = t.max(0.0);
    Ok(LrtResult {
        statistic,
        df,
        p_value: chi2_sf(statistic, df)?,
    })
}

/// Likelihood-ratio test of a fitted submodel against a fitted larger model.
///
/// `df` must equal the difference in free parameters and the restricted
/// model must be nested in the full one. A restricted fit that beats the
/// full fit by more than `1e-8` means the full fit did not converge.
pub fn lrt(restricted: &FitResult, full: &FitResult, df: u32) -> Result<LrtResult> {
    let (rc, fc) = (restricted.model.constraint(), full.model.constraint());
    if !rc.is_nested_in(&fc) {
        return Err(Error::NotNested(format!(
            "{} is not a submodel of {}",
            restricted.model, full.model
        )));
    }
    let want = full.k.saturating_sub(restricted.k);
    if df as usize != want || want == 0 {
        return Err(Error::NotNested(format!(
            "{} within {} has {want} constrained coordinates, got df = {df}",
            restricted.model, full.model
        )));
    }
    if restricted.mll > full.mll + LRT_SLACK {
        return Err(Error::NonConvergence {
            message: format!(
                "{} fit ({}) exceeds the {} fit ({}); refit the larger model from the \
                 restricted optimum",
                restricted.model, restricted.mll, full.model, full.mll
            ),
            trace: full.best_objective_trace.clone(),
        });
    }
    lrt_from_mll(restricted.mll, full.mll, df)
}

/// `P(X ≤ t2 | X > t1) = (F(t2) - F(t1)) / (1 - F(t1))`.
pub fn conditional_decease_prob<T: Scalar>(params: &IfParams<T>, t1: T, t2: T) -> Result<T> {
    if !(t1.is_finite() && t2.is_finite()) || t2 <= t1 {
        return Err(Error::Domain(format!(
            "need finite t1 < t2, got ({t1}, {t2})"
        )));
    }
    let ls1 = params.log_survival(t1)?;
    if ls1 == T::neg_infinity() {
        return Err(Error::Domain(format!("survival vanishes at t1 = {t1}")));
    }
    let ls2 = params.log_survival(t2)?;
    Ok(-(ls2 - ls1).exp_m1())
}
