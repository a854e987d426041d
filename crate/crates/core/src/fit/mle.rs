use log::{debug, warn};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{information_criteria, log_likelihood, Observation};
use crate::dist::{IfParams, PRegime};
use crate::error::{Error, Result};
use crate::family::{ModelKind, PConstraint, Sign, X0Constraint};
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Optimizer settings for [`fit_mle`].
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Random restarts per regime.
    pub restarts: usize,
    pub seed: u64,
    /// Simplex diameter (in transformed coordinates) at which a local search
    /// stops.
    pub diameter_tol: f64,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    /// Fixes `x0` for models where it is otherwise free.
    pub fixed_x0: Option<f64>,
    /// Extra starting points, used on top of the random restarts by every
    /// regime and sign that can represent them.
    pub extra_starts: Vec<IfParams<f64>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0x1f_d157,
            diameter_tol: 1e-9,
            max_evals: 100_000,
            fixed_x0: None,
            extra_starts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Fixed(f64),
    Free,
}

/// Map from an unconstrained vector `θ` to IF parameters for one model,
/// `p` regime and sign of `b`.
///
/// Coordinates, in order, for those that are free: `ln p` (interior `p`),
/// `ln |b|`, `ln c`, `ln q`, and `x0 = hi · logistic(θ)`. When `x0` is tied
/// to `c` the logistic coordinate carries `x0` and `c` is derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameterization {
    regime: PConstraint,
    b_sign: f64,
    b: Slot,
    c: Slot,
    q: Slot,
    x0: Slot,
    tie: X0Constraint,
    x0_upper: f64,
}

const BOUND_LOGIT: f64 = 18.0;

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn logit(u: f64) -> f64 {
    (u / (1.0 - u)).ln()
}

impl Parameterization {
    pub fn dim(&self) -> usize {
        let free = |s: Slot| (s == Slot::Free) as usize;
        (self.regime == PConstraint::Interior) as usize
            + free(self.b)
            + free(self.c)
            + free(self.q)
            + free(self.x0)
    }

    /// Upper bound placed on `x0`.
    pub fn x0_upper(&self) -> f64 {
        self.x0_upper
    }

    /// Names of the free coordinates, in `θ` order.
    pub fn coordinates(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        if self.regime == PConstraint::Interior {
            names.push("p");
        }
        for (slot, name) in [(self.b, "b"), (self.c, "c"), (self.q, "q"), (self.x0, "x0")] {
            if slot == Slot::Free {
                names.push(name);
            }
        }
        names
    }

    fn p_regime(&self, p: f64) -> PRegime<f64> {
        match self.regime {
            PConstraint::Zero => PRegime::Zero,
            PConstraint::Infinite => PRegime::Infinite,
            _ => PRegime::Finite(p),
        }
    }

    /// Assembles parameters from natural coordinates; `c` is ignored when
    /// tied to `x0`.
    fn assemble(&self, p: f64, b: f64, c: f64, q: f64, x0: f64) -> Option<IfParams<f64>> {
        let regime = self.p_regime(p);
        let c = match self.tie {
            X0Constraint::EqualsC => x0,
            X0Constraint::Stoppa => x0 * (regime.value().ln_1p() / q).exp(),
            _ => c,
        };
        IfParams::with_regime(regime, b, c, q, x0).ok()
    }

    /// Natural free coordinates (`p`, `b`, `c`, `q`, `x0` as applicable)
    /// corresponding to `θ`.
    pub fn natural(&self, theta: &[f64]) -> Vec<f64> {
        let mut it = theta.iter().copied();
        let mut out = Vec::with_capacity(theta.len());
        if self.regime == PConstraint::Interior {
            out.push(it.next().unwrap_or(0.0).exp());
        }
        if self.b == Slot::Free {
            out.push(self.b_sign * it.next().unwrap_or(0.0).exp());
        }
        if self.c == Slot::Free {
            out.push(it.next().unwrap_or(0.0).exp());
        }
        if self.q == Slot::Free {
            out.push(it.next().unwrap_or(0.0).exp());
        }
        if self.x0 == Slot::Free {
            out.push(self.x0_upper * logistic(it.next().unwrap_or(0.0)));
        }
        out
    }

    /// Parameters from natural free coordinates, or `None` outside the
    /// parameter space.
    pub fn params_from_natural(&self, natural: &[f64]) -> Option<IfParams<f64>> {
        if natural.len() != self.dim() {
            return None;
        }
        let mut it = natural.iter().copied();
        let p = if self.regime == PConstraint::Interior {
            it.next()?
        } else {
            0.0
        };
        let mut take = |slot: Slot| match slot {
            Slot::Fixed(v) => Some(v),
            Slot::Free => it.next(),
        };
        let b = take(self.b)?;
        let c = take(self.c).unwrap_or(1.0);
        let q = take(self.q)?;
        let x0 = take(self.x0)?;
        if (self.b == Slot::Free && b * self.b_sign <= 0.0) || x0 > self.x0_upper {
            return None;
        }
        self.assemble(p, b, c, q, x0)
    }

    /// Parameters at `θ`, or `None` outside the parameter space.
    pub fn params(&self, theta: &[f64]) -> Option<IfParams<f64>> {
        if theta.len() != self.dim() || theta.iter().any(|t| !t.is_finite()) {
            return None;
        }
        self.params_from_natural(&self.natural(theta))
    }

    /// `θ` representing `params`, when this parameterization can.
    ///
    /// Fixed coordinates must match; for `p = ∞` with a canonical `|b| = 1`
    /// the product `b q` is carried over.
    pub fn theta_of(&self, params: &IfParams<f64>) -> Option<Vec<f64>> {
        let regime_ok = matches!(
            (self.regime, params.regime()),
            (PConstraint::Zero, PRegime::Zero)
                | (PConstraint::Infinite, PRegime::Infinite)
                | (PConstraint::Interior, PRegime::Finite(_))
        );
        if !regime_ok || params.b() * self.b_sign <= 0.0 {
            return None;
        }
        let mut q = params.q();
        let mut b = params.b();
        if self.regime == PConstraint::Infinite && self.b == Slot::Fixed(self.b_sign) {
            q *= b.abs();
            b = self.b_sign;
        }
        let mut theta = Vec::new();
        if self.regime == PConstraint::Interior {
            theta.push(params.p().ln());
        }
        let mut put = |slot: Slot, value: f64, transform: &dyn Fn(f64) -> f64| -> Option<()> {
            match slot {
                Slot::Fixed(v) => ((value - v).abs() <= 1e-12 * v.abs().max(1.0)).then_some(()),
                Slot::Free => {
                    theta.push(transform(value));
                    Some(())
                }
            }
        };
        put(self.b, b, &|v: f64| v.abs().ln())?;
        if matches!(self.tie, X0Constraint::Free | X0Constraint::Fixed(_)) {
            put(self.c, params.c(), &f64::ln)?;
        }
        put(self.q, q, &f64::ln)?;
        let x0 = params.x0();
        if self.x0 == Slot::Free && !(x0 > 0.0 && x0 < self.x0_upper) {
            return None;
        }
        put(self.x0, x0, &|v: f64| logit(v / self.x0_upper))?;
        let theta: Vec<f64> = theta.into_iter().map(|t| t.clamp(-700.0, 700.0)).collect();
        self.params(&theta).map(|_| theta)
    }

    /// Whether `θ` sits at (numerically) a bound of the parameter space,
    /// where the likelihood need not be stationary.
    pub fn on_bound(&self, theta: &[f64]) -> bool {
        self.x0 == Slot::Free && theta.last().is_some_and(|t| t.abs() > BOUND_LOGIT)
    }
}

/// Result of [`fit_mle`].
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: ModelKind,
    pub params: IfParams<f64>,
    pub mll: f64,
    /// Free parameters of the model class.
    pub k: usize,
    pub n: usize,
    pub aic: f64,
    pub bic: f64,
    /// Whether the winning local search met the diameter tolerance.
    pub converged: bool,
    /// Local searches that started from a finite objective.
    pub restarts_used: usize,
    /// Best negative log-likelihood after each simplex iteration of the
    /// winning local search.
    pub best_objective_trace: Vec<f64>,
    /// Parameterization of the winning local search and its optimum.
    pub parameterization: Parameterization,
    pub theta: Vec<f64>,
}

struct Problem<'a> {
    data: &'a [Observation<f64>],
    scale: f64,
}

impl Problem<'_> {
    fn objective(&self, space: &Parameterization, theta: &[f64]) -> f64 {
        match space.params(theta) {
            Some(params) => match log_likelihood(&params, self.data) {
                Ok(ll) if ll.is_finite() => -ll,
                _ => f64::INFINITY,
            },
            None => f64::INFINITY,
        }
    }
}

fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let h = level * (sorted.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Upper bound on `x0`: the smallest data value less a margin of `1e-6`
/// times the interquartile range (at least `1e-9`).
fn x0_upper(data: &[Observation<f64>]) -> (f64, f64) {
    let mut values: Vec<f64> = data.iter().flat_map(|o| o.values()).collect();
    values.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&values, 0.75) - quantile_sorted(&values, 0.25);
    let eps = 1e-6 * iqr.max(1e-9);
    (values[0] - eps, quantile_sorted(&values, 0.5))
}

fn spaces(model: ModelKind, config: &FitConfig, x0_upper: f64) -> Result<Vec<Parameterization>> {
    let cons = model.constraint();
    let regimes: Vec<PConstraint> = match cons.p {
        PConstraint::Free => vec![
            PConstraint::Interior,
            PConstraint::Zero,
            PConstraint::Infinite,
        ],
        other => vec![other],
    };
    let signs: Vec<f64> = match (cons.b, cons.b_sign) {
        (Some(b), _) => vec![b.signum()],
        (None, Some(Sign::Positive)) => vec![1.0],
        (None, Some(Sign::Negative)) => vec![-1.0],
        (None, None) => vec![1.0, -1.0],
    };
    let (x0, tie) = match (cons.x0, config.fixed_x0) {
        (X0Constraint::Free, Some(v)) => (Slot::Fixed(v), X0Constraint::Free),
        (X0Constraint::Free, None) if x0_upper > 0.0 => (Slot::Free, X0Constraint::Free),
        (X0Constraint::Free, None) => (Slot::Fixed(0.0), X0Constraint::Free),
        (X0Constraint::Fixed(v), None) => (Slot::Fixed(v), X0Constraint::Free),
        (_, Some(_)) => {
            return Err(Error::Domain(format!(
                "{model} does not have a free x0 to fix"
            )));
        }
        (tie, None) => {
            if x0_upper <= 0.0 {
                return Err(Error::Domain(format!(
                    "{model} needs positive data: its location is tied to the scale"
                )));
            }
            (Slot::Free, tie)
        }
    };
    let c = match (cons.c, tie) {
        (Some(v), _) => Slot::Fixed(v),
        (None, X0Constraint::EqualsC | X0Constraint::Stoppa) => Slot::Fixed(f64::NAN),
        (None, _) => Slot::Free,
    };
    let q = cons.q.map_or(Slot::Free, Slot::Fixed);
    let mut out = Vec::new();
    for &regime in &regimes {
        for &sign in &signs {
            let b = match cons.b {
                Some(v) => Slot::Fixed(v),
                // only b q is identified at p = ∞
                None if regime == PConstraint::Infinite => Slot::Fixed(sign),
                None => Slot::Free,
            };
            out.push(Parameterization {
                regime,
                b_sign: sign,
                b,
                c,
                q,
                x0,
                tie,
                x0_upper,
            });
        }
    }
    Ok(out)
}

fn random_start(
    space: &Parameterization,
    rng: &mut ChaCha8Rng,
    first: bool,
    median: f64,
) -> Vec<f64> {
    let mut theta = Vec::with_capacity(space.dim());
    let mut jitter = |width: f64| {
        if first {
            0.0
        } else {
            rng.gen_range(-width..width)
        }
    };
    if space.regime == PConstraint::Interior {
        theta.push(jitter(3.0));
    }
    if space.b == Slot::Free {
        theta.push(jitter(1.0));
    }
    let u = if first {
        0.01
    } else {
        rng.gen_range(0.0..0.9f64).max(1e-6)
    };
    let x0_guess = if space.x0 == Slot::Free {
        u * space.x0_upper
    } else {
        0.0
    };
    if space.c == Slot::Free {
        let spread = (median - x0_guess)
            .abs()
            .max(median.abs() * 1e-3)
            .max(1e-300);
        theta.push(spread.ln() + if first { 0.0 } else { rng.gen_range(-1.5..1.5) });
    }
    if space.q == Slot::Free {
        theta.push(if first { 0.0 } else { rng.gen_range(-1.5..1.5) });
    }
    if space.x0 == Slot::Free {
        theta.push(logit(u));
    }
    theta
}

struct LocalFit {
    space_index: usize,
    theta: Vec<f64>,
    value: f64,
    converged: bool,
    trace: Vec<f64>,
}

const START_ATTEMPTS: usize = 50;

/// Maximum-likelihood fit of `model` to `data`.
///
/// Each `p` regime and admissible sign of `b` gets `config.restarts` local
/// Nelder–Mead searches from deterministic pseudo-random starts (plus any
/// `config.extra_starts` it can represent); the best local optimum wins.
/// For the full IF this covers `p = 0`, `0 < p < ∞` and `p = ∞`, and `k`
/// stays 5 whichever regime wins. At `p = ∞` only `b q` is identified, so
/// `|b|` is held at 1 there unless the model fixes `b`.
pub fn fit_mle(
    data: &[Observation<f64>],
    model: ModelKind,
    config: &FitConfig,
) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::Domain("cannot fit an empty data set".into()));
    }
    for obs in data {
        obs.validate()?;
    }
    if !data
        .iter()
        .any(|o| matches!(o, Observation::Exact(_) | Observation::IntervalCensored(..)))
    {
        return Err(Error::Domain(
            "data need at least one exact or interval-censored observation".into(),
        ));
    }
    let k = model.constraint().free_count();
    let n = data.len();
    if n < k + 1 {
        warn!("fitting {model} ({k} parameters) to only {n} observations");
    }
    let (upper, median) = x0_upper(data);
    let spaces = spaces(model, config, upper)?;
    let problem = Problem {
        data,
        scale: median,
    };
    let nm = NelderMeadOptions {
        diameter_tol: config.diameter_tol,
        max_evals: config.max_evals,
        initial_step: 0.5,
    };

    let mut jobs: Vec<(usize, Option<Vec<f64>>, u64)> = Vec::new();
    for (si, space) in spaces.iter().enumerate() {
        for r in 0..config.restarts {
            let seed = config
                .seed
                .wrapping_add((si as u64) << 32)
                .wrapping_add(r as u64)
                .wrapping_mul(0x9e37_79b9_7f4a_7c15);
            jobs.push((si, None, seed ^ r as u64));
        }
        for start in &config.extra_starts {
            if let Some(theta) = space.theta_of(start) {
                jobs.push((si, Some(theta), 0));
            }
        }
    }

    let results: Vec<Option<LocalFit>> = jobs
        .par_iter()
        .enumerate()
        .map(|(job, (si, given, seed))| {
            let space = &spaces[*si];
            let f = |theta: &[f64]| problem.objective(space, theta);
            let start = match given {
                Some(theta) => Some(theta.clone()),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    let first = job % (config.restarts.max(1)) == 0 && given.is_none();
                    (0..START_ATTEMPTS)
                        .map(|attempt| {
                            random_start(space, &mut rng, first && attempt == 0, problem.scale)
                        })
                        .find(|theta| f(theta).is_finite())
                }
            }?;
            if !f(&start).is_finite() {
                return None;
            }
            let m = nelder_mead(f, &start, &nm);
            debug!(
                "{model} local fit {job}: -ll = {} after {} evaluations (converged: {})",
                m.value, m.evals, m.converged
            );
            Some(LocalFit {
                space_index: *si,
                theta: m.x,
                value: m.value,
                converged: m.converged,
                trace: m.trace,
            })
        })
        .collect();

    let restarts_used = results.iter().flatten().count();
    let best = results
        .into_iter()
        .flatten()
        .filter(|r| r.value.is_finite())
        .reduce(|a, b| if b.value < a.value { b } else { a });
    let Some(best) = best else {
        return Err(Error::NonConvergence {
            message: format!("no restart of the {model} fit reached a finite log-likelihood"),
            trace: Vec::new(),
        });
    };
    let space = spaces[best.space_index].clone();
    let params = space
        .params(&best.theta)
        .ok_or_else(|| Error::NonConvergence {
            message: "optimum left the parameter space".into(),
            trace: best.trace.clone(),
        })?;
    let mll = -best.value;
    let (aic, bic) = information_criteria(mll, k, n);
    Ok(FitResult {
        model,
        params,
        mll,
        k,
        n,
        aic,
        bic,
        converged: best.converged,
        restarts_used,
        best_objective_trace: best.trace,
        parameterization: space,
        theta: best.theta,
    })
}

/// Standard errors of the free natural coordinates of a fit, from the
/// inverse of the observed information (a central-difference Hessian of the
/// log-likelihood). Returned in [`Parameterization::coordinates`] order.
pub fn standard_errors(
    data: &[Observation<f64>],
    fit: &FitResult,
) -> Result<Vec<(&'static str, f64)>> {
    let space = &fit.parameterization;
    let x = space.natural(&fit.theta);
    let d = x.len();
    let ll = |v: &[f64]| -> f64 {
        space
            .params_from_natural(v)
            .and_then(|p| log_likelihood(&p, data).ok())
            .unwrap_or(f64::NAN)
    };
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1e-3)).collect();
    let shifted = |moves: &[(usize, f64)]| {
        let mut v = x.clone();
        for &(i, s) in moves {
            v[i] += s * h[i];
        }
        ll(&v)
    };
    let f0 = ll(&x);
    let mut hess = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let diag = (shifted(&[(i, 1.0)]) - 2.0 * f0 + shifted(&[(i, -1.0)])) / (h[i] * h[i]);
        hess[(i, i)] = diag;
        for j in 0..i {
            let v = (shifted(&[(i, 1.0), (j, 1.0)])
                - shifted(&[(i, 1.0), (j, -1.0)])
                - shifted(&[(i, -1.0), (j, 1.0)])
                + shifted(&[(i, -1.0), (j, -1.0)]))
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "log-likelihood is not finite around the optimum; the fit may sit on a bound".into(),
        ));
    }
    let cov = (-hess)
        .try_inverse()
        .ok_or_else(|| Error::Numeric("observed information is singular".into()))?;
    let names = space.coordinates();
    (0..d)
        .map(|i| {
            let v = cov[(i, i)];
            if v > 0.0 {
                Ok((names[i], v.sqrt()))
            } else {
                Err(Error::Numeric(format!(
                    "observed information is not positive definite (variance of {} = {v})",
                    names[i]
                )))
            }
        })
        .collect()
}
