//! The scalar function `f`: a small built-in catalog plus user expressions.

pub mod expr;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use expr::{parse_bytes, parse_expression, Expr, Params};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Unbounded,
    Closed(f64),
    Open(f64),
}

/// Interval on which a function is defined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Bound,
    pub hi: Bound,
}

impl Domain {
    pub const REAL_LINE: Domain = Domain {
        lo: Bound::Unbounded,
        hi: Bound::Unbounded,
    };
    pub const POSITIVE: Domain = Domain {
        lo: Bound::Open(0.0),
        hi: Bound::Unbounded,
    };
    pub const NONNEGATIVE: Domain = Domain {
        lo: Bound::Closed(0.0),
        hi: Bound::Unbounded,
    };

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Parameter(format!("domain needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Domain {
            lo: Bound::Closed(lo),
            hi: Bound::Closed(hi),
        })
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let lo_ok = match self.lo {
            Bound::Unbounded => true,
            Bound::Closed(a) => x >= a,
            Bound::Open(a) => x > a,
        };
        let hi_ok = match self.hi {
            Bound::Unbounded => true,
            Bound::Closed(b) => x <= b,
            Bound::Open(b) => x < b,
        };
        lo_ok && hi_ok
    }

    /// True when `[a, b]` lies inside the domain.
    pub fn contains_interval(&self, a: f64, b: f64) -> bool {
        self.contains(a) && self.contains(b)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Bound::Unbounded => f.write_str("(-inf")?,
            Bound::Closed(a) => write!(f, "[{a}")?,
            Bound::Open(a) => write!(f, "({a}")?,
        }
        match self.hi {
            Bound::Unbounded => f.write_str(", +inf)"),
            Bound::Closed(b) => write!(f, ", {b}]"),
            Bound::Open(b) => write!(f, ", {b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CatalogFunction {
    Identity,
    Exp,
    Log,
    Sqrt,
    Abs,
    Constant(f64),
    /// `x^p`.
    Power(f64),
    /// q-logarithm `(x^(1-q) - 1) / (1 - q)`; `q = 1` is rejected.
    QLog(f64),
    /// `(x^q - 1) / q`; `q = 0` is rejected.
    TsallisDev(f64),
}

impl CatalogFunction {
    fn natural_domain(self) -> Domain {
        match self {
            CatalogFunction::Identity
            | CatalogFunction::Exp
            | CatalogFunction::Abs
            | CatalogFunction::Constant(_) => Domain::REAL_LINE,
            CatalogFunction::Log | CatalogFunction::QLog(_) | CatalogFunction::TsallisDev(_) => {
                Domain::POSITIVE
            }
            CatalogFunction::Sqrt => Domain::NONNEGATIVE,
            CatalogFunction::Power(p) => {
                if p.fract() == 0.0 && p >= 0.0 {
                    Domain::REAL_LINE
                } else if p > 0.0 {
                    Domain::NONNEGATIVE
                } else {
                    Domain::POSITIVE
                }
            }
        }
    }

    fn validate(self) -> Result<()> {
        let bad = |v: f64| !v.is_finite();
        match self {
            CatalogFunction::QLog(q) if q == 1.0 || bad(q) => Err(Error::Parameter(format!(
                "q_log needs finite q != 1 (the q -> 1 limit is not taken), got {q}"
            ))),
            CatalogFunction::TsallisDev(q) if q == 0.0 || bad(q) => Err(Error::Parameter(
                format!("tsallis_dev needs finite q != 0, got {q}"),
            )),
            CatalogFunction::Power(p) | CatalogFunction::Constant(p) if bad(p) => {
                Err(Error::Parameter(format!("non-finite parameter {p}")))
            }
            _ => Ok(()),
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            CatalogFunction::Identity => x,
            CatalogFunction::Exp => x.exp(),
            CatalogFunction::Log => x.ln(),
            CatalogFunction::Sqrt => x.sqrt(),
            CatalogFunction::Abs => x.abs(),
            CatalogFunction::Constant(c) => c,
            CatalogFunction::Power(p) => {
                if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                    x.powi(p as i32)
                } else {
                    x.powf(p)
                }
            }
            CatalogFunction::QLog(q) => (x.powf(1.0 - q) - 1.0) / (1.0 - q),
            CatalogFunction::TsallisDev(q) => (x.powf(q) - 1.0) / q,
        }
    }

    fn name(self) -> String {
        match self {
            CatalogFunction::Identity => "identity".into(),
            CatalogFunction::Exp => "exp".into(),
            CatalogFunction::Log => "log".into(),
            CatalogFunction::Sqrt => "sqrt".into(),
            CatalogFunction::Abs => "abs".into(),
            CatalogFunction::Constant(c) => format!("constant({c})"),
            CatalogFunction::Power(p) => format!("power({p})"),
            CatalogFunction::QLog(q) => format!("q_log({q})"),
            CatalogFunction::TsallisDev(q) => format!("tsallis_dev({q})"),
        }
    }

    /// Parses `exp`, `power(2)`, `q_log(0.5)`, ... ; `None` if `text` is not a
    /// catalog entry.
    pub fn parse(text: &str) -> Option<Result<Self>> {
        let t = text.trim();
        let simple = match t {
            "identity" => Some(CatalogFunction::Identity),
            "exp" => Some(CatalogFunction::Exp),
            "log" => Some(CatalogFunction::Log),
            "sqrt" => Some(CatalogFunction::Sqrt),
            "abs" => Some(CatalogFunction::Abs),
            "square" => Some(CatalogFunction::Power(2.0)),
            "inverse" => Some(CatalogFunction::Power(-1.0)),
            _ => None,
        };
        if let Some(s) = simple {
            return Some(Ok(s));
        }
        let open = t.find('(')?;
        let name = &t[..open];
        let ctor: fn(f64) -> CatalogFunction = match name {
            "power" => CatalogFunction::Power,
            "q_log" => CatalogFunction::QLog,
            "tsallis_dev" => CatalogFunction::TsallisDev,
            "constant" => CatalogFunction::Constant,
            _ => return None,
        };
        let inner = t[open + 1..].strip_suffix(')')?;
        Some(
            inner
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad numeric argument in `{t}`")))
                .map(ctor),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSource {
    Catalog(CatalogFunction),
    Expression { text: String, ast: Expr },
}

/// A real function of one real variable together with its domain.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFunction {
    source: FunctionSource,
    domain: Domain,
    params: Params,
}

impl ScalarFunction {
    /// Catalog entry with its natural domain. Panics on invalid catalog
    /// parameters; see [`ScalarFunction::try_catalog`].
    pub fn catalog(f: CatalogFunction) -> Self {
        Self::try_catalog(f).expect("invalid catalog parameters")
    }

    pub fn try_catalog(f: CatalogFunction) -> Result<Self> {
        f.validate()?;
        Ok(Self {
            source: FunctionSource::Catalog(f),
            domain: f.natural_domain(),
            params: Params::new(),
        })
    }

    /// Parses `text` as an expression and binds `params`; every parameter the
    /// expression references must be present.
    pub fn expression(text: &str, params: Params) -> Result<Self> {
        let ast = parse_expression(text)?;
        ast.check_params(&params)?;
        Ok(Self {
            source: FunctionSource::Expression {
                text: text.to_string(),
                ast,
            },
            domain: Domain::REAL_LINE,
            params,
        })
    }

    /// Catalog name (`exp`, `q_log(0.5)`, ...) or else an expression.
    pub fn from_spec(text: &str, params: Params) -> Result<Self> {
        match CatalogFunction::parse(text) {
            Some(c) => Self::try_catalog(c?),
            None => Self::expression(text, params),
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn source(&self) -> &FunctionSource {
        &self.source
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn describe(&self) -> String {
        match &self.source {
            FunctionSource::Catalog(c) => c.name(),
            FunctionSource::Expression { text, .. } => text.clone(),
        }
    }

    /// Evaluates at `x` with the bound parameters.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.eval_with(x, None)
    }

    fn eval_with(&self, x: f64, overrides: Option<&Params>) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!(
                "x = {x} outside the domain {} of {}",
                self.domain,
                self.describe()
            )));
        }
        let value = match &self.source {
            FunctionSource::Catalog(c) => c.eval(x),
            FunctionSource::Expression { ast, .. } => match overrides {
                None => ast.eval(x, &self.params)?,
                Some(extra) => {
                    let mut merged = self.params.clone();
                    merged.extend(extra.iter().map(|(k, v)| (k.clone(), *v)));
                    ast.eval(x, &merged)?
                }
            },
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite { x, value })
        }
    }
}

/// Evaluates `f` at `x`; `params` override the bound parameter table.
pub fn eval_function(f: &ScalarFunction, x: f64, params: &Params) -> Result<f64> {
    f.eval_with(x, Some(params))
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}
