//! CSV ingestion of (possibly censored) observations.
//!
//! The header names the columns. A `value` column carries exact, left- and
//! right-censored points; `left` and `right` columns carry interval bounds.
//! An optional `status` column holds one of `obs`, `left`, `right` or
//! `interval`. Without it every row is exact, or an interval when the file
//! has `left`/`right` columns but no `value` column.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use ifdist::Observation;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Path(PathBuf),
    Stdin,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Path(p) => write!(f, "{}", p.display()),
            Source::Stdin => f.write_str("<stdin>"),
        }
    }
}

/// Observation counts per censoring class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct StatusCounts {
    pub exact: usize,
    pub left: usize,
    pub right: usize,
    pub interval: usize,
}

impl StatusCounts {
    pub fn total(&self) -> usize {
        self.exact + self.left + self.right + self.interval
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub observations: Vec<Observation<f64>>,
    pub source: Source,
    pub n_by_status: StatusCounts,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Obs,
    Left,
    Right,
    Interval,
}

impl Status {
    fn parse(s: &str) -> Option<Status> {
        match s.to_ascii_lowercase().as_str() {
            "obs" => Some(Status::Obs),
            "left" => Some(Status::Left),
            "right" => Some(Status::Right),
            "interval" => Some(Status::Interval),
            _ => None,
        }
    }
}

struct Columns {
    value: Option<usize>,
    left: Option<usize>,
    right: Option<usize>,
    status: Option<usize>,
}

/// Reads a dataset from a file, or from stdin when `path` is `-`.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        return parse_dataset(text.as_bytes(), Source::Stdin);
    }
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(file, Source::Path(path.to_path_buf()))
}

/// Parses CSV text into a dataset. Errors carry the 1-based line number.
pub fn parse_dataset<R: Read>(input: R, source: Source) -> Result<Dataset> {
    let name = source.to_string();
    let parse_err = |line: u64, message: String| CliError::Parse {
        source_name: name.clone(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let cols = Columns {
        value: find("value"),
        left: find("left"),
        right: find("right"),
        status: find("status"),
    };
    if cols.value.is_none() && (cols.left.is_none() || cols.right.is_none()) {
        return Err(parse_err(
            1,
            "header needs a `value` column or both `left` and `right` columns".into(),
        ));
    }

    let mut observations = Vec::new();
    let mut counts = StatusCounts::default();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let field = |col: Option<usize>| col.and_then(|i| record.get(i)).filter(|s| !s.is_empty());
        let number = |col: Option<usize>, what: &str| -> Result<Option<f64>> {
            field(col)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| parse_err(line, format!("`{s}` is not a number ({what})")))
                })
                .transpose()
        };
        let value = number(cols.value, "value")?;
        let left = number(cols.left, "left")?;
        let right = number(cols.right, "right")?;
        let status = match field(cols.status) {
            Some(s) => Status::parse(s).ok_or_else(|| {
                parse_err(
                    line,
                    format!("unknown status `{s}` (expected obs, left, right or interval)"),
                )
            })?,
            None if cols.status.is_some() => {
                return Err(parse_err(line, "missing status".into()));
            }
            None if value.is_none() && cols.value.is_none() => Status::Interval,
            None => Status::Obs,
        };
        let need = |v: Option<f64>, what: &str| {
            v.ok_or_else(|| parse_err(line, format!("missing {what} for status {status:?}")))
        };
        let obs = match status {
            Status::Obs => Observation::Exact(need(value.or(left), "value")?),
            Status::Right => Observation::RightCensored(need(value.or(left), "value")?),
            Status::Left => Observation::LeftCensored(need(value.or(right), "value")?),
            Status::Interval => {
                let (l, r) = (need(left, "left bound")?, need(right, "right bound")?);
                if l >= r {
                    return Err(CliError::Invalid(format!(
                        "{name}, line {line}: interval needs left < right, got ({l}, {r})"
                    )));
                }
                Observation::IntervalCensored(l, r)
            }
        };
        obs.validate()
            .map_err(|e| CliError::Invalid(format!("{name}, line {line}: {e}")))?;
        match status {
            Status::Obs => counts.exact += 1,
            Status::Left => counts.left += 1,
            Status::Right => counts.right += 1,
            Status::Interval => counts.interval += 1,
        }
        observations.push(obs);
    }
    if observations.is_empty() {
        return Err(CliError::Invalid(format!("{name}: no observations")));
    }
    Ok(Dataset {
        observations,
        source,
        n_by_status: counts,
    })
}
