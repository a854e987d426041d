//! Command-line front end for `ifdist`: dataset ingestion, fitting,
//! simulation, evaluation and likelihood-ratio tests.

pub mod dataset;
pub mod error;
pub mod json;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ifdist::analytic::{mode, mode_numeric, moments, moments_numeric};
use ifdist::fit::{conditional_decease_prob, fit_mle, lrt, standard_errors, FitConfig, FitResult};
use ifdist::{IfParams, ModelKind};
use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::value::RawValue;

pub use dataset::{parse_dataset, read_dataset, Dataset, Source, StatusCounts};
pub use error::{CliError, Result};
use json::{format_sig, num, read_params, ParamsJson};

/// Significant digits of plain-text numeric output.
const TEXT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "ifdist",
    version,
    about = "Interpolating Family size distributions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum-likelihood fit of a model to a CSV dataset.
    Fit {
        /// Catalog name (e.g. Weibull, "Burr XII") or IF, IF1, IF2, IF3.
        #[arg(long)]
        model: String,
        /// CSV file, or `-` for stdin.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = FitConfig::default().seed)]
        seed: u64,
        /// Random restarts per p regime and sign of b.
        #[arg(long, default_value_t = FitConfig::default().restarts)]
        restarts: usize,
        /// Hold x0 at this value.
        #[arg(long)]
        fixed_x0: Option<f64>,
        /// Add standard errors from the observed information.
        #[arg(long)]
        se: bool,
        /// JSON report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a function of the distribution at given points.
    Eval {
        #[arg(long)]
        params: PathBuf,
        /// Comma-separated points (probabilities for `quantile`).
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            required = true
        )]
        at: Vec<f64>,
        #[arg(long, value_enum)]
        what: What,
    },
    /// Inverse-transform samples as a one-column CSV.
    Simulate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Likelihood-ratio test of a submodel against a larger model.
    Lrt {
        #[arg(long)]
        restricted: String,
        #[arg(long, default_value = "IF")]
        full: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = FitConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = FitConfig::default().restarts)]
        restarts: usize,
    },
    /// Mode of the distribution.
    Mode {
        #[arg(long)]
        params: PathBuf,
    },
    /// Mean and variance with existence flags.
    Moments {
        #[arg(long)]
        params: PathBuf,
    },
    /// Survival probabilities, or conditional decease probabilities over
    /// consecutive intervals starting at 0.
    Survprob {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long)]
        conditional: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    Pdf,
    Cdf,
    Survival,
    Hazard,
    Quantile,
}

#[derive(Serialize)]
struct FitReport<'a> {
    model: &'a str,
    params: ParamsJson,
    mll: Box<RawValue>,
    k: usize,
    n: usize,
    n_by_status: StatusCounts,
    aic: Box<RawValue>,
    bic: Box<RawValue>,
    converged: bool,
    restarts_used: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    standard_errors: Option<Vec<(&'static str, Box<RawValue>)>>,
}

#[derive(Serialize)]
struct ModeReport {
    location: Box<RawValue>,
    kind: String,
    method: &'static str,
}

#[derive(Serialize)]
struct MomentReport {
    mean: Option<Box<RawValue>>,
    variance: Option<Box<RawValue>>,
    mean_exists: bool,
    variance_exists: bool,
    mean_violation: Option<String>,
    variance_violation: Option<String>,
    method: &'static str,
}

/// Runs one command, writing its primary output to `out` (or to the file
/// named by `--out`).
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Fit {
            model,
            data,
            seed,
            restarts,
            fixed_x0,
            se,
            out: path,
        } => {
            let kind = ModelKind::lookup(&model)?;
            let data = read_dataset(&data)?;
            let config = FitConfig {
                seed,
                restarts,
                fixed_x0,
                ..FitConfig::default()
            };
            let fit = fit_mle(&data.observations, kind, &config)?;
            if !fit.converged {
                warn!("the best {kind} restart stopped at the evaluation budget");
            }
            let errors = if se {
                let list = standard_errors(&data.observations, &fit)?;
                Some(list.into_iter().map(|(n, v)| (n, num(v))).collect())
            } else {
                None
            };
            let text = fit_report(&fit, &data, seed, errors)?;
            emit(path.as_deref(), out, &text)
        }
        Command::Eval { params, at, what } => {
            let params = read_params(&params)?;
            let mut text = String::new();
            for x in at {
                let v = match what {
                    What::Pdf => params.pdf(x),
                    What::Cdf => params.cdf(x),
                    What::Survival => params.survival(x),
                    What::Hazard => params.hazard(x),
                    What::Quantile => params.quantile(x),
                }?;
                text.push_str(&format_sig(v, TEXT_DIGITS));
                text.push('\n');
            }
            emit(None, out, &text)
        }
        Command::Simulate {
            params,
            n,
            seed,
            out: path,
        } => {
            let params = read_params(&params)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut text = String::from("value\n");
            for x in params.sample(&mut rng, n) {
                text.push_str(&format!("{x:.16e}\n"));
            }
            emit(path.as_deref(), out, &text)
        }
        Command::Lrt {
            restricted,
            full,
            data,
            seed,
            restarts,
        } => {
            let (rk, fk) = (ModelKind::lookup(&restricted)?, ModelKind::lookup(&full)?);
            if rk.constraint().free_count() >= fk.constraint().free_count() {
                return Err(CliError::Invalid(format!(
                    "{rk} has no fewer free parameters than {fk}"
                )));
            }
            let data = read_dataset(&data)?;
            let config = FitConfig {
                seed,
                restarts,
                ..FitConfig::default()
            };
            let small = fit_mle(&data.observations, rk, &config)?;
            let config = FitConfig {
                extra_starts: vec![small.params],
                ..config
            };
            let large = fit_mle(&data.observations, fk, &config)?;
            let df = (large.k - small.k) as u32;
            let test = lrt(&small, &large, df)?;
            let f = |v: f64| format_sig(v, TEXT_DIGITS);
            let text = format!(
                "restricted\t{rk}\tmll\t{}\nfull\t{fk}\tmll\t{}\nT\t{}\ndf\t{}\np_value\t{}\n",
                f(small.mll),
                f(large.mll),
                f(test.statistic),
                test.df,
                f(test.p_value),
            );
            emit(None, out, &text)
        }
        Command::Mode { params } => {
            let params = read_params(&params)?;
            let (m, method) = match params.subfamily() {
                Some(_) => (mode(&params)?, "closed_form"),
                None => (mode_numeric(&params)?, "numeric"),
            };
            let report = ModeReport {
                location: num(m.location),
                kind: m.kind.to_string(),
                method,
            };
            emit(None, out, &to_json(&report)?)
        }
        Command::Moments { params } => {
            let params = read_params(&params)?;
            let (m, method) = match params.subfamily() {
                Some(_) => (moments(&params)?, "closed_form"),
                None => (moments_numeric(&params)?, "numeric"),
            };
            let report = MomentReport {
                mean: m.mean.map(num),
                variance: m.variance.map(num),
                mean_exists: m.mean_exists,
                variance_exists: m.variance_exists,
                mean_violation: m.mean_violation,
                variance_violation: m.variance_violation,
                method,
            };
            emit(None, out, &to_json(&report)?)
        }
        Command::Survprob {
            params,
            times,
            conditional,
        } => {
            let params = read_params(&params)?;
            emit(None, out, &survival_table(&params, &times, conditional)?)
        }
    }
}

fn fit_report(
    fit: &FitResult,
    data: &Dataset,
    seed: u64,
    standard_errors: Option<Vec<(&'static str, Box<RawValue>)>>,
) -> Result<String> {
    let report = FitReport {
        model: fit.model.name(),
        params: ParamsJson::from(&fit.params),
        mll: num(fit.mll),
        k: fit.k,
        n: fit.n,
        n_by_status: data.n_by_status,
        aic: num(fit.aic),
        bic: num(fit.bic),
        converged: fit.converged,
        restarts_used: fit.restarts_used,
        seed,
        standard_errors,
    };
    to_json(&report)
}

/// `time,survival` rows, or `from,to,probability` rows of conditional
/// decease probabilities over `(0, t1], (t1, t2], ...`.
pub fn survival_table(params: &IfParams<f64>, times: &[f64], conditional: bool) -> Result<String> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Invalid(
            "times must be strictly increasing".into(),
        ));
    }
    let f = |v: f64| format_sig(v, TEXT_DIGITS);
    let mut text = String::new();
    if conditional {
        text.push_str("from,to,probability\n");
        let mut from = 0.0;
        for &to in times {
            let v = conditional_decease_prob(params, from, to)?;
            text.push_str(&format!("{},{},{}\n", f(from), f(to), f(v)));
            from = to;
        }
    } else {
        text.push_str("time,survival\n");
        for &t in times {
            text.push_str(&format!("{},{}\n", f(t), f(params.survival(t)?)));
        }
    }
    Ok(text)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn emit(path: Option<&Path>, out: &mut dyn Write, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        _ => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}
