//! Money/time dimensions and a checker for relations between model quantities.
//!
//! Every quantity in the growth models is either a stock measured in money
//! (`$`), a flow measured in money per unit time (`$·s^-1`), a time, or a pure
//! number. A relation such as `K = nu*Y` can be audited by assigning a
//! [`Dimension`] to each symbol and evaluating both sides with the rules
//!
//! - products add exponents and quotients subtract them,
//! - sums and differences require identical operands,
//! - integrating over time multiplies by `s`, differentiating divides by `s`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimError {
    #[error("malformed expression: {0}")]
    Malformed(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("no dimension given for symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid dimension `{0}`")]
    BadDimension(String),
}

/// Exponents over the two base dimensions, money and time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dimension {
    pub money: i32,
    pub time: i32,
}

impl Dimension {
    pub const DIMENSIONLESS: Dimension = Dimension::new(0, 0);
    pub const MONEY: Dimension = Dimension::new(1, 0);
    pub const TIME: Dimension = Dimension::new(0, 1);
    pub const FLOW: Dimension = Dimension::new(1, -1);

    pub const fn new(money: i32, time: i32) -> Self {
        Dimension { money, time }
    }

    pub fn is_dimensionless(self) -> bool {
        self == Self::DIMENSIONLESS
    }

    pub fn powi(self, n: i32) -> Self {
        Dimension::new(self.money * n, self.time * n)
    }
}

impl Mul for Dimension {
    type Output = Dimension;
    fn mul(self, rhs: Dimension) -> Dimension {
        Dimension::new(self.money + rhs.money, self.time + rhs.time)
    }
}

impl Div for Dimension {
    type Output = Dimension;
    fn div(self, rhs: Dimension) -> Dimension {
        Dimension::new(self.money - rhs.money, self.time - rhs.time)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return f.write_str("1");
        }
        let mut parts = Vec::with_capacity(2);
        for (sym, exp) in [("$", self.money), ("s", self.time)] {
            match exp {
                0 => {}
                1 => parts.push(sym.to_string()),
                e => parts.push(format!("{sym}^{e}")),
            }
        }
        f.write_str(&parts.join("·"))
    }
}

impl FromStr for Dimension {
    type Err = DimError;

    /// Accepts `1`, `$`, `s`, powers such as `s^-1`, and products or
    /// quotients joined by `*`, `·` or `/` (`$/s`, `$·s^-1`).
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || DimError::BadDimension(text.to_string());
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut dim = Dimension::DIMENSIONLESS;
        let mut divide = false;
        let mut rest = compact.as_str();
        loop {
            let end = rest.find(['*', '·', '/']).unwrap_or(rest.len());
            let (factor, tail) = rest.split_at(end);
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, e.parse::<i32>().map_err(|_| bad())?),
                None => (factor, 1),
            };
            let unit = match base {
                "$" => Dimension::MONEY,
                "s" => Dimension::TIME,
                "1" => Dimension::DIMENSIONLESS,
                _ => return Err(bad()),
            }
            .powi(exp);
            dim = if divide { dim / unit } else { dim * unit };
            let mut chars = tail.chars();
            match chars.next() {
                None => break,
                Some(sep) => {
                    divide = sep == '/';
                    rest = chars.as_str();
                    if rest.is_empty() {
                        return Err(bad());
                    }
                }
            }
        }
        Ok(dim)
    }
}

/// Parses bindings of the form `K:$, Y:$/s, nu:1`.
pub fn parse_bindings(text: &str) -> Result<HashMap<String, Dimension>, DimError> {
    let mut out = HashMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, dim) = item
            .split_once(':')
            .ok_or_else(|| DimError::BadDimension(item.to_string()))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(DimError::Malformed(format!("binding `{item}` has no symbol")));
        }
        out.insert(name.to_string(), dim.trim().parse()?);
    }
    Ok(out)
}

/// Expression tree over dimension-tagged leaves.
#[derive(Debug, Clone, PartialEq)]
pub enum DimExpr {
    Leaf { name: String, dim: Dimension },
    Add(Box<DimExpr>, Box<DimExpr>),
    Sub(Box<DimExpr>, Box<DimExpr>),
    Mul(Box<DimExpr>, Box<DimExpr>),
    Div(Box<DimExpr>, Box<DimExpr>),
    IntegrateDt(Box<DimExpr>),
    DifferentiateDt(Box<DimExpr>),
}

pub fn leaf(name: &str, dim: Dimension) -> DimExpr {
    DimExpr::Leaf { name: name.to_string(), dim }
}

impl DimExpr {
    pub fn integrate_dt(self) -> DimExpr {
        DimExpr::IntegrateDt(Box::new(self))
    }

    pub fn differentiate_dt(self) -> DimExpr {
        DimExpr::DifferentiateDt(Box::new(self))
    }

    /// Dimension of the expression, or the first inhomogeneous sum found.
    pub fn dimension(&self) -> Result<Dimension, DimError> {
        let mut violation = None;
        let dim = self.eval("", &mut violation)?;
        match violation {
            None => Ok(dim),
            Some(v) => Err(DimError::Malformed(v.to_string())),
        }
    }

    fn eval(&self, path: &str, violation: &mut Option<Violation>) -> Result<Dimension, DimError> {
        let child = |tag: &str| -> String {
            if path.is_empty() {
                tag.to_string()
            } else {
                format!("{path}/{tag}")
            }
        };
        Ok(match self {
            DimExpr::Leaf { name, dim } => {
                if name.trim().is_empty() {
                    return Err(DimError::Malformed(format!("unnamed leaf at `{path}`")));
                }
                *dim
            }
            DimExpr::Add(a, b) | DimExpr::Sub(a, b) => {
                let op = if matches!(self, DimExpr::Add(..)) { "+" } else { "-" };
                let here = child(op);
                let da = a.eval(&format!("{here}[0]"), violation)?;
                let db = b.eval(&format!("{here}[1]"), violation)?;
                if da != db && violation.is_none() {
                    *violation = Some(Violation {
                        path: here,
                        detail: format!("cannot combine {da} with {db}"),
                    });
                }
                da
            }
            DimExpr::Mul(a, b) => {
                let here = child("*");
                a.eval(&format!("{here}[0]"), violation)? * b.eval(&format!("{here}[1]"), violation)?
            }
            DimExpr::Div(a, b) => {
                let here = child("/");
                a.eval(&format!("{here}[0]"), violation)? / b.eval(&format!("{here}[1]"), violation)?
            }
            DimExpr::IntegrateDt(a) => a.eval(&child("int"), violation)? * Dimension::TIME,
            DimExpr::DifferentiateDt(a) => a.eval(&child("d/dt"), violation)? / Dimension::TIME,
        })
    }
}

impl Add for DimExpr {
    type Output = DimExpr;
    fn add(self, rhs: DimExpr) -> DimExpr {
        DimExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl Sub for DimExpr {
    type Output = DimExpr;
    fn sub(self, rhs: DimExpr) -> DimExpr {
        DimExpr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl Mul for DimExpr {
    type Output = DimExpr;
    fn mul(self, rhs: DimExpr) -> DimExpr {
        DimExpr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl Div for DimExpr {
    type Output = DimExpr;
    fn div(self, rhs: DimExpr) -> DimExpr {
        DimExpr::Div(Box::new(self), Box::new(rhs))
    }
}

/// Location and description of the first dimensional inconsistency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Slash-separated node path, e.g. `rhs/+`; `=` for the relation itself.
    pub path: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub lhs_dim: Dimension,
    pub rhs_dim: Dimension,
    pub first_violation: Option<Violation>,
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.consistent { "consistent" } else { "inconsistent" };
        write!(f, "{verdict} ({} = {})", self.lhs_dim, self.rhs_dim)?;
        if let Some(v) = &self.first_violation {
            write!(f, "; {v}")?;
        }
        Ok(())
    }
}

/// Audits `lhs = rhs`. Sums inside either side are checked before the
/// two sides are compared, so the reported violation is the innermost one
/// encountered first (left side before right side).
pub fn check_relation(lhs: &DimExpr, rhs: &DimExpr) -> Result<ConsistencyReport, DimError> {
    let mut violation = None;
    let lhs_dim = lhs.eval("lhs", &mut violation)?;
    let rhs_dim = rhs.eval("rhs", &mut violation)?;
    if violation.is_none() && lhs_dim != rhs_dim {
        violation = Some(Violation {
            path: "=".to_string(),
            detail: format!("left side is {lhs_dim}, right side is {rhs_dim}"),
        });
    }
    Ok(ConsistencyReport {
        consistent: violation.is_none(),
        lhs_dim,
        rhs_dim,
        first_violation: violation,
    })
}

/// Parses `lhs = rhs` with symbols resolved through `bindings`.
///
/// Grammar: `+ - * /`, parentheses, numeric literals (dimensionless),
/// `int(e)` for the time integral and `d(e)` for the time derivative.
/// The symbol `t` is a time unless bound otherwise.
pub fn parse_relation(
    text: &str,
    bindings: &HashMap<String, Dimension>,
) -> Result<(DimExpr, DimExpr), DimError> {
    let mut parser = Parser { src: text, pos: 0, bindings };
    let lhs = parser.expr()?;
    parser.expect('=')?;
    let rhs = parser.expr()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(parser.error("trailing input"));
    }
    Ok((lhs, rhs))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    bindings: &'a HashMap<String, Dimension>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> DimError {
        DimError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), DimError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<DimExpr, DimError> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DimExpr, DimError> {
        let mut acc = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == '*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<DimExpr, DimError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<DimExpr, DimError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let rest = &self.src[self.pos..];
                let len = rest
                    .find(|ch: char| !(ch.is_ascii_digit() || ch == '.'))
                    .unwrap_or(rest.len());
                let literal = &rest[..len];
                literal
                    .parse::<f64>()
                    .map_err(|_| self.error("bad numeric literal"))?;
                self.pos += len;
                Ok(leaf(literal, Dimension::DIMENSIONLESS))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let rest = &self.src[self.pos..];
                let len = rest
                    .find(|ch: char| !(ch.is_alphanumeric() || ch == '_' || ch == '\''))
                    .unwrap_or(rest.len());
                let name = &rest[..len];
                self.pos += len;
                if self.peek() == Some('(') && (name == "int" || name == "d") {
                    self.pos += 1;
                    let inner = self.expr()?;
                    self.expect(')')?;
                    return Ok(if name == "int" {
                        inner.integrate_dt()
                    } else {
                        inner.differentiate_dt()
                    });
                }
                let dim = match self.bindings.get(name) {
                    Some(d) => *d,
                    None if name == "t" => Dimension::TIME,
                    None => return Err(DimError::UnknownSymbol(name.to_string())),
                };
                Ok(leaf(name, dim))
            }
            _ => Err(self.error("expected operand")),
        }
    }
}

/// Relations from the classical growth literature, written with explicit
/// stock/flow tags: capital `K` and its increments are money, income `Y`,
/// investment `I` and the demand intercept are flows.
pub mod relations {
    use super::{leaf, DimExpr, Dimension};

    const M: Dimension = Dimension::MONEY;
    const F: Dimension = Dimension::FLOW;
    const ONE: Dimension = Dimension::DIMENSIONLESS;

    pub type Relation = (DimExpr, DimExpr);

    /// `dK/dt = I`.
    pub fn capital_growth_equals_investment() -> Relation {
        (leaf("K", M).differentiate_dt(), leaf("I", F))
    }

    /// `K = nu*Y` with a caller-chosen dimension for the capital/income ratio.
    pub fn capital_proportional_to_income(nu: Dimension) -> Relation {
        (leaf("K", M), leaf("nu", nu) * leaf("Y", F))
    }

    /// `K = nu*int(Y)`: capital tied to the income accumulated over time.
    pub fn capital_proportional_to_accumulated_income(nu: Dimension) -> Relation {
        (leaf("K", M), leaf("nu", nu) * leaf("Y", F).integrate_dt())
    }

    /// `K1 = (nu/k2)*t0*Y1`: capital increment against the income increment
    /// times the scale `t0`.
    pub fn capital_increment_times_scale() -> Relation {
        (
            leaf("K1", M),
            leaf("nu", ONE) / leaf("k2", ONE) * leaf("t0", Dimension::TIME) * leaf("Y1", F),
        )
    }

    /// `K = nu*Y + a*t`: capital as income plus a linear time trend.
    pub fn capital_income_plus_trend() -> Relation {
        (
            leaf("K", M),
            leaf("nu", ONE) * leaf("Y", F) + leaf("a", ONE) * leaf("t", Dimension::TIME),
        )
    }

    /// `dK/dt = gamma*(nu*Y - K)`: capital adjusting towards a multiple of income.
    pub fn capital_adjustment_to_income() -> Relation {
        (
            leaf("K", M).differentiate_dt(),
            leaf("gamma", Dimension::TIME.powi(-1)) * (leaf("nu", ONE) * leaf("Y", F) - leaf("K", M)),
        )
    }

    /// `I = a*(1-c)*Y - k*K + eps`: investment against income and capital.
    pub fn investment_from_income_and_capital() -> Relation {
        (
            leaf("I", F),
            leaf("a", ONE) * (leaf("1", ONE) - leaf("c", ONE)) * leaf("Y", F) - leaf("k", ONE) * leaf("K", M)
                + leaf("eps", F),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::relations::*;
    use super::*;

    fn verdict(rel: (DimExpr, DimExpr)) -> ConsistencyReport {
        check_relation(&rel.0, &rel.1).unwrap()
    }

    #[test]
    fn algebra_and_rendering() {
        assert_eq!(Dimension::MONEY / Dimension::TIME, Dimension::FLOW);
        assert_eq!(Dimension::FLOW * Dimension::TIME, Dimension::MONEY);
        assert_eq!(Dimension::FLOW.to_string(), "$·s^-1");
        assert_eq!(Dimension::DIMENSIONLESS.to_string(), "1");
        assert_eq!(Dimension::new(2, 0).to_string(), "$^2");
        for text in ["$/s", "$·s^-1", "$ * s^-1", "$*1/s"] {
            assert_eq!(text.parse::<Dimension>().unwrap(), Dimension::FLOW, "{text}");
        }
        assert_eq!("s^-1".parse::<Dimension>().unwrap(), Dimension::new(0, -1));
        assert!("kg".parse::<Dimension>().is_err());
        assert!("$/".parse::<Dimension>().is_err());
    }

    #[test]
    fn investment_is_capital_rate() {
        assert!(verdict(capital_growth_equals_investment()).consistent);
    }

    #[test]
    fn capital_output_ratio_depends_on_nu_tag() {
        let r = verdict(capital_proportional_to_income(Dimension::DIMENSIONLESS));
        assert!(!r.consistent);
        assert_eq!(r.lhs_dim, Dimension::MONEY);
        assert_eq!(r.rhs_dim, Dimension::FLOW);
        assert_eq!(r.first_violation.unwrap().path, "=");
        assert!(verdict(capital_proportional_to_income(Dimension::TIME)).consistent);
    }

    #[test]
    fn accumulated_income_fixes_the_relation() {
        assert!(verdict(capital_proportional_to_accumulated_income(Dimension::DIMENSIONLESS)).consistent);
    }

    #[test]
    fn stock_flow_mixing_examples() {
        let r = verdict(capital_income_plus_trend());
        assert!(!r.consistent);
        assert_eq!(r.first_violation.unwrap().path, "rhs/+");
        assert!(!verdict(capital_adjustment_to_income()).consistent);
        assert!(!verdict(investment_from_income_and_capital()).consistent);
        assert!(verdict(capital_increment_times_scale()).consistent);
    }

    #[test]
    fn integrate_then_differentiate_restores_dimension() {
        let e = leaf("Y", Dimension::FLOW);
        let back = e.clone().integrate_dt().differentiate_dt();
        assert_eq!(back.dimension().unwrap(), e.dimension().unwrap());
    }

    #[test]
    fn empty_leaf_is_structural_error() {
        let bad = leaf(" ", Dimension::MONEY);
        assert!(matches!(check_relation(&bad, &leaf("K", Dimension::MONEY)), Err(DimError::Malformed(_))));
    }

    #[test]
    fn parses_relations() {
        let b = parse_bindings("K:$, Y:$/s, nu:1").unwrap();
        let (l, r) = parse_relation("K = nu*Y", &b).unwrap();
        assert!(!check_relation(&l, &r).unwrap().consistent);
        let (l, r) = parse_relation("K = nu * int(Y)", &b).unwrap();
        assert!(check_relation(&l, &r).unwrap().consistent);
        let (l, r) = parse_relation("d(K) = 0.5*(Y - K/t)", &b).unwrap();
        assert!(check_relation(&l, &r).unwrap().consistent);
        assert!(matches!(parse_relation("K = Q", &b), Err(DimError::UnknownSymbol(s)) if s == "Q"));
        assert!(matches!(parse_relation("K = (Y", &b), Err(DimError::Parse { .. })));
        assert!(matches!(parse_relation("K Y", &b), Err(DimError::Parse { .. })));
    }

    #[test]
    fn verdict_is_symmetric() {
        let b = parse_bindings("K:$, Y:$/s, nu:1, a:1, I:$/s").unwrap();
        for rel in ["K = nu*Y", "K = nu*int(Y)", "K = nu*Y + a*t", "d(K) = I", "Y = K"] {
            let (l, r) = parse_relation(rel, &b).unwrap();
            assert_eq!(
                check_relation(&l, &r).unwrap().consistent,
                check_relation(&r, &l).unwrap().consistent,
                "{rel}"
            );
        }
    }
}
