//! Truncated Laurent series in `z` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Pole depth `P` and regular depth `Q`: coefficients live on `z^-P ..= z^Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub pole: u32,
    pub regular: u32,
}

impl Truncation {
    /// `P = L`, `Q = 2L`.
    pub fn for_loops(max_loops: u32) -> Self {
        Truncation {
            pole: max_loops,
            regular: 2 * max_loops,
        }
    }
}

/// A finite Laurent series. `precision` is the highest power whose
/// coefficient is known; `None` means the series is exact.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LaurentSeries {
    terms: BTreeMap<i32, Rational>,
    precision: Option<i32>,
}

impl LaurentSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    /// `c·z^n`.
    pub fn monomial(n: i32, c: Rational) -> Self {
        let mut s = Self::zero();
        s.add_term(n, c);
        s
    }

    pub fn add_term(&mut self, n: i32, c: Rational) {
        if self.precision.is_some_and(|p| n > p) || c.is_zero() {
            return;
        }
        let e = self.terms.entry(n).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&n);
        }
    }

    pub fn coefficient(&self, n: i32) -> Rational {
        self.terms.get(&n).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.terms.iter().map(|(&n, c)| (n, c))
    }

    pub fn precision(&self) -> Option<i32> {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lowest(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn highest(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    fn limit(mut self, p: Option<i32>) -> Self {
        if let Some(p) = p {
            self.terms.retain(|&n, _| n <= p);
            self.precision = Some(self.precision.map_or(p, |q| q.min(p)));
        }
        self
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = LaurentSeries {
            terms: BTreeMap::new(),
            precision: self.precision,
        };
        for (&n, x) in &self.terms {
            out.add_term(n, x * c);
        }
        out
    }

    /// Product under a truncation policy: poles deeper than `P` are an
    /// error, powers above `Q` are dropped and lower the precision.
    pub fn mul(&self, other: &Self, policy: Truncation) -> Result<Self> {
        let prec = match (self.precision, other.precision) {
            (None, None) => None,
            (a, b) => {
                let from_a = a.map(|p| p + other.lowest().unwrap_or(0));
                let from_b = b.map(|p| p + self.lowest().unwrap_or(0));
                [from_a, from_b].into_iter().flatten().min()
            }
        };
        let mut out = Self::zero();
        for (&n, x) in &self.terms {
            for (&m, y) in &other.terms {
                out.add_term(n + m, x * y);
            }
        }
        out = out.limit(prec);
        out.apply(policy)
    }

    /// Enforces the truncation policy.
    pub fn apply(self, policy: Truncation) -> Result<Self> {
        if let Some(n) = self.lowest() {
            if n < -(policy.pole as i32) {
                return Err(Error::Truncation(format!(
                    "pole of order {} exceeds the configured depth {}",
                    -n, policy.pole
                )));
            }
        }
        if self.highest().is_some_and(|n| n > policy.regular as i32) {
            return Ok(self.limit(Some(policy.regular as i32)));
        }
        Ok(self)
    }

    /// `T`: the strictly negative powers.
    pub fn pole_part(&self) -> Self {
        let mut out = Self::zero();
        for (&n, c) in self.terms.range(..0) {
            out.add_term(n, c.clone());
        }
        out.precision = self.precision.filter(|&p| p < -1);
        out
    }

    pub fn regular_part(&self) -> Self {
        let mut out = Self::zero();
        for (&n, c) in self.terms.range(0..) {
            out.add_term(n, c.clone());
        }
        out.precision = self.precision;
        out
    }

    pub fn has_poles(&self) -> bool {
        self.lowest().is_some_and(|n| n < 0)
    }

    pub fn is_pure_pole(&self) -> bool {
        self.highest().is_none_or(|n| n < 0)
    }

    /// Equal on every coefficient both sides know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let p = match (self.precision, other.precision) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        (self - other).limit(p).is_zero()
    }
}

impl std::ops::Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, other: &LaurentSeries) -> LaurentSeries {
        let prec = match (self.precision, other.precision) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let mut out = self.clone();
        out.precision = None;
        for (&n, c) in &other.terms {
            out.add_term(n, c.clone());
        }
        out.limit(prec)
    }
}

impl std::ops::Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scale(&-Rational::one())
    }
}

impl std::ops::Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, other: &LaurentSeries) -> LaurentSeries {
        self + &-other
    }
}

impl fmt::Display for LaurentSeries {
    /// `3 z^-2 - 1/2 z^-1 + 1 + z`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (&n, c)) in self.terms.iter().enumerate() {
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            match n {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a} ")?;
                    }
                    if n == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{n}")?;
                    }
                }
            }
        }
        if let Some(p) = self.precision {
            write!(f, " + O(z^{})", p + 1)?;
        }
        Ok(())
    }
}

/// Parses `3 z^-2 - 1/2*z^-1 + 1 + z`.
pub fn parse_laurent(text: &str) -> Result<LaurentSeries> {
    let bad = |msg: &str| Error::invalid("Laurent expression", format!("{msg} in `{text}`"));
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad("empty expression"));
    }
    let mut out = LaurentSeries::zero();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = Rational::one();
        if bytes[i] == b'+' || bytes[i] == b'-' {
            if bytes[i] == b'-' {
                sign = -sign;
            }
            i += 1;
        } else if i > 0 {
            return Err(bad("expected `+` or `-`"));
        }
        let start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'/') {
            i += 1;
        }
        let coef = if i > start {
            s[start..i].parse::<Rational>().map_err(|_| bad("bad coefficient"))?
        } else {
            Rational::one()
        };
        let mut power = 0;
        let has_coef = i > start;
        if i < bytes.len() && bytes[i] == b'*' {
            if !has_coef {
                return Err(bad("`*` without a coefficient"));
            }
            i += 1;
            if i >= bytes.len() || bytes[i] != b'z' {
                return Err(bad("expected `z` after `*`"));
            }
        }
        if i < bytes.len() && bytes[i] == b'z' {
            i += 1;
            power = 1;
            if i < bytes.len() && bytes[i] == b'^' {
                i += 1;
                let st = i;
                if i < bytes.len() && bytes[i] == b'-' {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                power = s[st..i].parse::<i32>().map_err(|_| bad("bad exponent"))?;
            }
        } else if !has_coef {
            return Err(bad("expected a coefficient or `z`"));
        }
        out.add_term(power, sign * coef);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::rat;

    #[test]
    fn parse_and_print() {
        let s = parse_laurent("3 z^-2 - 1/2*z^-1 + 1 + z").unwrap();
        assert_eq!(s.coefficient(-2), rat(3, 1));
        assert_eq!(s.coefficient(-1), rat(-1, 2));
        assert_eq!(s.to_string(), "3 z^-2 - 1/2 z^-1 + 1 + z");
        assert_eq!(parse_laurent(&s.to_string()).unwrap(), s);
        assert!(parse_laurent("3 +").is_err());
        assert!(parse_laurent("z^").is_err());
    }

    #[test]
    fn pole_part() {
        let s = parse_laurent("3z^-2 + 1 + z").unwrap();
        assert_eq!(s.pole_part(), parse_laurent("3z^-2").unwrap());
        assert!(parse_laurent("1 + z").unwrap().pole_part().is_zero());
    }

    #[test]
    fn truncation_policy() {
        let pol = Truncation { pole: 3, regular: 1 };
        let a = parse_laurent("z^-1 + z").unwrap();
        let sq = a.mul(&a, pol).unwrap();
        assert_eq!(sq.precision(), Some(1));
        assert_eq!(sq.coefficient(0), rat(2, 1));
        let b = sq.mul(&parse_laurent("z^-1").unwrap(), pol).unwrap();
        assert_eq!(b.precision(), Some(0));
        assert!(b.mul(&parse_laurent("z^-2").unwrap(), pol).is_err());
    }
}
