//! Loop-graded formal series in the algebra, truncated at a fixed degree.

use num_traits::{One, Zero};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::Rational;

fn augmentation(s: &AlgebraElement, max: u32) -> Result<AlgebraElement> {
    if s.counit() != Rational::one() {
        return Err(Error::Precondition(format!(
            "series needs constant term 1, has {}",
            s.counit()
        )));
    }
    Ok(&s.truncate(max) - &AlgebraElement::one())
}

/// `s^{-1}` as a geometric series up to degree `max`.
pub fn series_inverse(s: &AlgebraElement, max: u32) -> Result<AlgebraElement> {
    series_pow(s, &-Rational::one(), max)
}

/// `s^q = Σ_k C(q, k) u^k` with `u = s − 1`, up to degree `max`.
pub fn series_pow(s: &AlgebraElement, q: &Rational, max: u32) -> Result<AlgebraElement> {
    let u = augmentation(s, max)?;
    let mut out = AlgebraElement::one();
    let mut power = AlgebraElement::one();
    let mut binom = Rational::one();
    for k in 1..=max {
        power = power.multiply_truncated(&u, max);
        if power.is_zero() {
            break;
        }
        binom = binom * (q - Rational::from_integer((k - 1).into())) / Rational::from_integer(k.into());
        if !binom.is_zero() {
            out = &out + &power.scale(&binom);
        }
    }
    Ok(out)
}

/// `s^n` for an integer exponent, negative allowed.
pub fn series_powi(s: &AlgebraElement, n: i64, max: u32) -> Result<AlgebraElement> {
    series_pow(s, &Rational::from_integer(n.into()), max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CanonicalForm;
    use crate::hopf::rat;

    fn x() -> AlgebraElement {
        AlgebraElement::generator(CanonicalForm::from_bytes(&[1, 7]))
    }

    fn y() -> AlgebraElement {
        AlgebraElement::generator(CanonicalForm::from_bytes(&[2, 9]))
    }

    #[test]
    fn geometric_series() {
        let s = &AlgebraElement::one() + &x();
        let inv = series_inverse(&s, 2).unwrap();
        let expected = &(&AlgebraElement::one() - &x()) + &(&x() * &x());
        assert_eq!(inv, expected);
    }

    #[test]
    fn square_root_squares_back() {
        let s = &(&AlgebraElement::one() + &x().scale(&rat(-1, 2))) + &y().scale(&rat(3, 1));
        let r = series_pow(&s, &rat(1, 2), 3).unwrap();
        assert_eq!(r.multiply_truncated(&r, 3), s);
    }

    #[test]
    fn exponents_add() {
        let s = &(&AlgebraElement::one() + &x()) + &y().scale(&rat(-2, 3));
        let a = series_pow(&s, &rat(3, 2), 3).unwrap();
        let b = series_pow(&s, &rat(-1, 2), 3).unwrap();
        assert_eq!(a.multiply_truncated(&b, 3), series_pow(&s, &rat(1, 1), 3).unwrap());
        assert_eq!(series_pow(&s, &rat(1, 1), 3).unwrap(), s);
    }

    #[test]
    fn non_unit_rejected() {
        assert!(series_inverse(&x(), 2).is_err());
    }
}
