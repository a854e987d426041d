//! Named special cases of the Interpolating Family.
//!
//! Each [`ModelKind`] knows its native parameterization, the map from native
//! parameters into [`IfParams`], and the coordinates of `(p, b, c, q, x0)`
//! it fixes. Fitting and likelihood-ratio tests work from the
//! [`Constraint`] alone.

use std::fmt;

use crate::dist::{IfParams, PRegime};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Every model in the distribution tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    If,
    If1,
    If2,
    If3,
    ParetoI,
    ParetoII,
    ParetoIII,
    ParetoIV,
    Lomax,
    GeneralizedLomax,
    Stoppa,
    BurrXII,
    TadikamallaBurrXII,
    LindsayBurrIII,
    Dagum,
    Fisk,
    Weibull,
    Frechet,
    GumbelII,
    Rayleigh,
    InverseRayleigh,
    Exponential,
    InverseExponential,
}

/// How `p` is restricted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PConstraint {
    /// `p ∈ [0, ∞]`, fitted as three regimes.
    Free,
    /// `0 < p < ∞`.
    Interior,
    Zero,
    Infinite,
}

/// How `x0` is restricted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum X0Constraint {
    Free,
    Fixed(f64),
    /// `x0 = c` (Pareto I).
    EqualsC,
    /// `x0 = c (p + 1)^(-1/q)` (Stoppa), which puts the support's lower end
    /// where `G_p = 1`.
    Stoppa,
}

/// Sign restriction on `b` that does not fix its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

/// The coordinates of `(p, b, c, q, x0)` that a model fixes or ties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub p: PConstraint,
    pub b: Option<f64>,
    pub b_sign: Option<Sign>,
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub x0: X0Constraint,
}

impl Constraint {
    const FREE: Constraint = Constraint {
        p: PConstraint::Free,
        b: None,
        b_sign: None,
        c: None,
        q: None,
        x0: X0Constraint::Free,
    };

    /// Number of constrained coordinates (the degrees of freedom of a
    /// likelihood-ratio test against the full IF).
    pub fn df(&self) -> usize {
        let p = matches!(self.p, PConstraint::Zero | PConstraint::Infinite) as usize;
        let x0 = !matches!(self.x0, X0Constraint::Free) as usize;
        p + self.b.is_some() as usize + self.c.is_some() as usize + self.q.is_some() as usize + x0
    }

    /// Number of free coordinates, `5 - df`.
    pub fn free_count(&self) -> usize {
        5 - self.df()
    }

    /// Whether every member of `self` is a member, or a limit of members,
    /// of `other` (the `p → 0` and `p → ∞` limits close an interior `p`).
    pub fn is_nested_in(&self, other: &Constraint) -> bool {
        let p_ok = match (self.p, other.p) {
            (_, PConstraint::Free) => true,
            (PConstraint::Free, _) => false,
            (_, PConstraint::Interior) => true,
            (a, b) => a == b,
        };
        let fixed_ok = |mine: Option<f64>, theirs: Option<f64>| match theirs {
            None => true,
            Some(v) => mine == Some(v),
        };
        let sign_ok = match other.b_sign {
            None => true,
            Some(s) => {
                self.b_sign == Some(s) || self.b.is_some_and(|b| (b > 0.0) == (s == Sign::Positive))
            }
        };
        let x0_ok = match other.x0 {
            X0Constraint::Free => true,
            theirs => self.x0 == theirs,
        };
        p_ok && fixed_ok(self.b, other.b)
            && sign_ok
            && fixed_ok(self.c, other.c)
            && fixed_ok(self.q, other.q)
            && x0_ok
    }
}

const ALL: [ModelKind; 23] = [
    ModelKind::If,
    ModelKind::If1,
    ModelKind::If2,
    ModelKind::If3,
    ModelKind::ParetoI,
    ModelKind::ParetoII,
    ModelKind::ParetoIII,
    ModelKind::ParetoIV,
    ModelKind::Lomax,
    ModelKind::GeneralizedLomax,
    ModelKind::Stoppa,
    ModelKind::BurrXII,
    ModelKind::TadikamallaBurrXII,
    ModelKind::LindsayBurrIII,
    ModelKind::Dagum,
    ModelKind::Fisk,
    ModelKind::Weibull,
    ModelKind::Frechet,
    ModelKind::GumbelII,
    ModelKind::Rayleigh,
    ModelKind::InverseRayleigh,
    ModelKind::Exponential,
    ModelKind::InverseExponential,
];

impl ModelKind {
    pub fn all() -> &'static [ModelKind] {
        &ALL
    }

    /// Display name, also accepted by [`ModelKind::lookup`].
    pub fn name(self) -> &'static str {
        use ModelKind::*;
        match self {
            If => "IF",
            If1 => "IF1",
            If2 => "IF2",
            If3 => "IF3",
            ParetoI => "Pareto I",
            ParetoII => "Pareto II",
            ParetoIII => "Pareto III",
            ParetoIV => "Pareto IV",
            Lomax => "Lomax",
            GeneralizedLomax => "Generalized Lomax",
            Stoppa => "Stoppa",
            BurrXII => "Burr XII",
            TadikamallaBurrXII => "Tadikamalla-Burr XII",
            LindsayBurrIII => "Lindsay-Burr III",
            Dagum => "Dagum",
            Fisk => "Fisk",
            Weibull => "Weibull",
            Frechet => "Frechet",
            GumbelII => "Gumbel II",
            Rayleigh => "Rayleigh",
            InverseRayleigh => "Inverse Rayleigh",
            Exponential => "Exponential",
            InverseExponential => "Inverse Exponential",
        }
    }

    /// Finds a model by name. Matching ignores case, spaces, hyphens,
    /// underscores and en-dashes, and accepts `é` for `e` and arabic type
    /// numerals (`pareto2`, `burr12`).
    pub fn lookup(name: &str) -> Result<ModelKind> {
        let key = normalize(name);
        ALL.iter()
            .copied()
            .find(|m| normalize(m.name()) == key || m.aliases().iter().any(|a| *a == key))
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    fn aliases(self) -> &'static [&'static str] {
        use ModelKind::*;
        match self {
            ParetoI => &["pareto1", "pareto"],
            ParetoII => &["pareto2"],
            ParetoIII => &["pareto3"],
            ParetoIV => &["pareto4"],
            BurrXII => &["burr12", "burr"],
            TadikamallaBurrXII => &["tadikamallaburr12"],
            LindsayBurrIII => &["lindsayburr3", "burriii", "burr3"],
            GumbelII => &["gumbel2"],
            Fisk => &["loglogistic"],
            _ => &[],
        }
    }

    /// Native parameter names, in the order [`NamedModel::new`] expects.
    pub fn native_names(self) -> &'static [&'static str] {
        use ModelKind::*;
        match self {
            If => &["p", "b", "c", "q", "x0"],
            If1 | If2 => &["b", "c", "q", "x0"],
            If3 => &["p", "c", "q", "x0"],
            ParetoI => &["alpha", "x0"],
            ParetoII => &["alpha", "sigma", "mu"],
            ParetoIII => &["gamma", "sigma", "mu"],
            ParetoIV => &["alpha", "gamma", "sigma", "mu"],
            Lomax => &["alpha", "sigma"],
            GeneralizedLomax | Stoppa => &["p", "q", "c"],
            BurrXII => &["c", "k"],
            TadikamallaBurrXII => &["c", "k", "sigma"],
            LindsayBurrIII => &["c", "k", "sigma", "mu"],
            Dagum => &["a", "b", "p"],
            Fisk => &["alpha", "beta"],
            Weibull | GumbelII => &["alpha", "sigma"],
            Frechet => &["alpha", "sigma", "x0"],
            Rayleigh | InverseRayleigh | Exponential | InverseExponential => &["sigma"],
        }
    }

    pub fn constraint(self) -> Constraint {
        use ModelKind::*;
        use PConstraint::{Infinite, Interior, Zero};
        let base = Constraint::FREE;
        let x0_zero = X0Constraint::Fixed(0.0);
        match self {
            If => base,
            If1 => Constraint { p: Zero, ..base },
            If2 => Constraint {
                p: Infinite,
                ..base
            },
            If3 => Constraint {
                p: Interior,
                b: Some(1.0),
                ..base
            },
            ParetoI => Constraint {
                p: Zero,
                b: Some(1.0),
                x0: X0Constraint::EqualsC,
                ..base
            },
            ParetoII => Constraint {
                p: Zero,
                b: Some(1.0),
                ..base
            },
            ParetoIII => Constraint {
                p: Zero,
                b_sign: Some(Sign::Positive),
                q: Some(1.0),
                ..base
            },
            ParetoIV => Constraint {
                p: Zero,
                b_sign: Some(Sign::Positive),
                ..base
            },
            Lomax => Constraint {
                p: Zero,
                b: Some(1.0),
                x0: x0_zero,
                ..base
            },
            GeneralizedLomax => Constraint {
                p: Interior,
                b: Some(1.0),
                x0: x0_zero,
                ..base
            },
            Stoppa => Constraint {
                p: Interior,
                b: Some(1.0),
                x0: X0Constraint::Stoppa,
                ..base
            },
            BurrXII => Constraint {
                p: Zero,
                b_sign: Some(Sign::Positive),
                c: Some(1.0),
                x0: x0_zero,
                ..base
            },
            TadikamallaBurrXII => Constraint {
                p: Zero,
                b_sign: Some(Sign::Positive),
                x0: x0_zero,
                ..base
            },
            LindsayBurrIII => Constraint {
                p: Zero,
                b_sign: Some(Sign::Negative),
                ..base
            },
            Dagum => Constraint {
                p: Zero,
                b_sign: Some(Sign::Negative),
                x0: x0_zero,
                ..base
            },
            Fisk => Constraint {
                p: Zero,
                b_sign: Some(Sign::Positive),
                q: Some(1.0),
                x0: x0_zero,
                ..base
            },
            Weibull => Constraint {
                p: Infinite,
                b: Some(-1.0),
                x0: x0_zero,
                ..base
            },
            Frechet => Constraint {
                p: Infinite,
                b: Some(1.0),
                ..base
            },
            GumbelII => Constraint {
                p: Infinite,
                b: Some(1.0),
                x0: x0_zero,
                ..base
            },
            Rayleigh => Constraint {
                p: Infinite,
                b: Some(-1.0),
                q: Some(2.0),
                x0: x0_zero,
                ..base
            },
            InverseRayleigh => Constraint {
                p: Infinite,
                b: Some(1.0),
                q: Some(2.0),
                x0: x0_zero,
                ..base
            },
            Exponential => Constraint {
                p: Infinite,
                b: Some(-1.0),
                q: Some(1.0),
                x0: x0_zero,
                ..base
            },
            InverseExponential => Constraint {
                p: Infinite,
                b: Some(1.0),
                q: Some(1.0),
                x0: x0_zero,
                ..base
            },
        }
    }

    /// Maps native parameters (in [`ModelKind::native_names`] order) to IF
    /// coordinates.
    ///
    /// | model | native | IF embedding |
    /// |---|---|---|
    /// | Pareto I | α, x0 | (0, 1, x0, α, x0) |
    /// | Pareto II | α, σ, μ | (0, 1, σ, α, μ) |
    /// | Pareto III | γ, σ, μ | (0, 1/γ, σ, 1, μ) |
    /// | Pareto IV | α, γ, σ, μ | (0, 1/γ, σ, α, μ) |
    /// | Lomax | α, σ | (0, 1, σ, α, 0) |
    /// | Generalized Lomax | p, q, c | (p, 1, c, q, 0) |
    /// | Stoppa | p, q, c | (p, 1, c, q, c (p+1)^(-1/q)) |
    /// | Burr XII | c, k | (0, c, 1, k, 0) |
    /// | Tadikamalla-Burr XII | c, k, σ | (0, c, σ, k, 0) |
    /// | Lindsay-Burr III | c, k, σ, μ | (0, -c, σ, k, μ) |
    /// | Dagum | a, b, p | (0, -a, b, p, 0) |
    /// | Fisk | α (scale), β (shape) | (0, β, α, 1, 0) |
    /// | Weibull | α, σ | (∞, -1, σ, α, 0) |
    /// | Fréchet | α, σ, x0 | (∞, 1, σ, α, x0) |
    /// | Gumbel II | α, σ | (∞, 1, σ, α, 0) |
    /// | Rayleigh | σ | (∞, -1, √2 σ, 2, 0) |
    /// | Inverse Rayleigh | σ | (∞, 1, √2 σ, 2, 0) |
    /// | Exponential | σ (scale) | (∞, -1, σ, 1, 0) |
    /// | Inverse Exponential | σ | (∞, 1, σ, 1, 0) |
    ///
    /// The Inverse Rayleigh density is `4σ²/x³ exp(-2σ²/x²)`, the law of
    /// `1/X` for `X` Rayleigh with scale `1/(2σ)`; it shares `c` with the
    /// Rayleigh so the pair differ only in the sign of `b`.
    fn embed<T: Scalar>(self, v: &[T]) -> Result<IfParams<T>> {
        use ModelKind::*;
        let zero = T::zero();
        let one = T::one();
        let inf = T::infinity();
        let mk = IfParams::new;
        match self {
            If => mk(v[0], v[1], v[2], v[3], v[4]),
            If1 => IfParams::if1(v[0], v[1], v[2], v[3]),
            If2 => IfParams::if2(v[0], v[1], v[2], v[3]),
            If3 => IfParams::if3(v[0], v[1], v[2], v[3]),
            ParetoI => {
                positive(self, "x0", v[1])?;
                mk(zero, one, v[1], v[0], v[1])
            }
            ParetoII => mk(zero, one, v[1], v[0], v[2]),
            ParetoIII => {
                positive(self, "gamma", v[0])?;
                mk(zero, one / v[0], v[1], one, v[2])
            }
            ParetoIV => {
                positive(self, "gamma", v[1])?;
                mk(zero, one / v[1], v[2], v[0], v[3])
            }
            Lomax => mk(zero, one, v[1], v[0], zero),
            GeneralizedLomax => IfParams::if3(v[0], v[2], v[1], zero),
            Stoppa => {
                positive(self, "c", v[2])?;
                positive(self, "q", v[1])?;
                let x0 = v[2] * (-v[0].ln_1p() / v[1]).exp();
                IfParams::if3(v[0], v[2], v[1], x0)
            }
            BurrXII => {
                positive(self, "c", v[0])?;
                mk(zero, v[0], one, v[1], zero)
            }
            TadikamallaBurrXII => {
                positive(self, "c", v[0])?;
                mk(zero, v[0], v[2], v[1], zero)
            }
            LindsayBurrIII => {
                positive(self, "c", v[0])?;
                mk(zero, -v[0], v[2], v[1], v[3])
            }
            Dagum => {
                positive(self, "a", v[0])?;
                mk(zero, -v[0], v[1], v[2], zero)
            }
            Fisk => {
                positive(self, "beta", v[1])?;
                mk(zero, v[1], v[0], one, zero)
            }
            Weibull => mk(inf, -one, v[1], v[0], zero),
            Frechet => mk(inf, one, v[1], v[0], v[2]),
            GumbelII => mk(inf, one, v[1], v[0], zero),
            Rayleigh => mk(inf, -one, T::SQRT_2() * v[0], T::lit(2.0), zero),
            InverseRayleigh => mk(inf, one, T::SQRT_2() * v[0], T::lit(2.0), zero),
            Exponential => mk(inf, -one, v[0], one, zero),
            InverseExponential => mk(inf, one, v[0], one, zero),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::lookup(s)
    }
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|ch| !matches!(ch, ' ' | '-' | '_' | '\u{2013}'))
        .map(|ch| match ch {
            'é' | 'É' => 'e',
            other => other.to_ascii_lowercase(),
        })
        .collect()
}

fn positive<T: Scalar>(model: ModelKind, name: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{model}: native parameter `{name}` must be finite and positive, got {v}"
        )))
    }
}

/// A named law with concrete native parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedModel<T: Scalar = f64> {
    kind: ModelKind,
    native: Vec<T>,
}

impl<T: Scalar> NamedModel<T> {
    /// `native` follows [`ModelKind::native_names`]; values are validated
    /// by resolving them.
    pub fn new(kind: ModelKind, native: &[T]) -> Result<Self> {
        let want = kind.native_names().len();
        if native.len() != want {
            return Err(Error::Domain(format!(
                "{kind} takes {want} native parameters ({}), got {}",
                kind.native_names().join(", "),
                native.len()
            )));
        }
        let model = Self {
            kind,
            native: native.to_vec(),
        };
        model.resolve()?;
        Ok(model)
    }

    /// Builds a model from `(name, value)` pairs in any order.
    pub fn from_pairs<'a, I>(kind: ModelKind, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, T)>,
    {
        let names = kind.native_names();
        let mut values: Vec<Option<T>> = vec![None; names.len()];
        for (name, value) in pairs {
            let i = names
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Domain(format!("{kind} has no native parameter `{name}`")))?;
            values[i] = Some(value);
        }
        let native = values
            .iter()
            .zip(names)
            .map(|(v, n)| v.ok_or_else(|| Error::Domain(format!("{kind}: missing `{n}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, &native)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// `(name, value)` pairs of the native parameterization.
    pub fn native_params(&self) -> impl Iterator<Item = (&'static str, T)> + '_ {
        self.kind
            .native_names()
            .iter()
            .copied()
            .zip(self.native.iter().copied())
    }

    pub fn constraint(&self) -> Constraint {
        self.kind.constraint()
    }

    pub fn free_count(&self) -> usize {
        self.constraint().free_count()
    }

    /// The IF embedding of this law.
    pub fn resolve(&self) -> Result<IfParams<T>> {
        self.kind.embed(&self.native)
    }
}

/// Constraint of a model nested in the full IF, by name.
pub fn constraint_of(name: &str) -> Result<Constraint> {
    Ok(ModelKind::lookup(name)?.constraint())
}

/// Whether concrete parameters satisfy a constraint.
pub fn satisfies<T: Scalar>(params: &IfParams<T>, constraint: &Constraint) -> bool {
    let tol = 1e-12;
    let close = |a: T, b: f64| (a.to_f64_lossy() - b).abs() <= tol * b.abs().max(1.0);
    let p_ok = matches!(
        (constraint.p, params.regime()),
        (PConstraint::Free, _)
            | (PConstraint::Interior, PRegime::Finite(_))
            | (PConstraint::Zero, PRegime::Zero)
            | (PConstraint::Infinite, PRegime::Infinite)
    );
    let b = params.b();
    let sign_ok = match constraint.b_sign {
        None => true,
        Some(Sign::Positive) => b > T::zero(),
        Some(Sign::Negative) => b < T::zero(),
    };
    let x0_ok = match constraint.x0 {
        X0Constraint::Free => true,
        X0Constraint::Fixed(v) => close(params.x0(), v),
        X0Constraint::EqualsC => close(params.x0(), params.c().to_f64_lossy()),
        X0Constraint::Stoppa => close(
            params.x0(),
            (params.c() * params.ln_k().exp()).to_f64_lossy(),
        ),
    };
    p_ok && sign_ok
        && x0_ok
        && constraint.b.is_none_or(|v| close(b, v))
        && constraint.c.is_none_or(|v| close(params.c(), v))
        && constraint.q.is_none_or(|v| close(params.q(), v))
}
