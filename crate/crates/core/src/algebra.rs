//! Exact linear combinations of graph monomials and of tensor pairs.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::graph::GraphKey;
use crate::Rational;

/// A commutative product of generators; the empty product is the unit.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<GraphKey>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn generator(key: GraphKey) -> Self {
        Monomial(vec![key])
    }

    pub fn from_keys(mut keys: Vec<GraphKey>) -> Self {
        keys.sort();
        Monomial(keys)
    }

    pub fn keys(&self) -> &[GraphKey] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn grade(&self) -> u32 {
        self.0.iter().map(|k| k.loops()).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                out.push(self.0[i].clone());
                i += 1;
            } else {
                out.push(other.0[j].clone());
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Generators with their multiplicities.
    pub fn powers(&self) -> Vec<(&GraphKey, u32)> {
        let mut out: Vec<(&GraphKey, u32)> = Vec::new();
        for k in &self.0 {
            match out.last_mut() {
                Some((last, n)) if *last == k => *n += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }
}

/// Finite rational combination of monomials, zero coefficients never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlgebraElement {
    terms: BTreeMap<Monomial, Rational>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Monomial::one(), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut a = Self::zero();
        a.add_term(m, c);
        a
    }

    pub fn generator(key: GraphKey) -> Self {
        Self::monomial(Monomial::generator(key), Rational::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        if c.is_zero() {
            return out;
        }
        for (m, x) in &self.terms {
            out.terms.insert(m.clone(), x * c);
        }
        out
    }

    /// Coefficient of the unit.
    pub fn counit(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    /// The part of loop degree exactly `n`.
    pub fn grade(&self, n: u32) -> Self {
        self.filter(|m| m.grade() == n)
    }

    /// Drops every term of degree above `n`.
    pub fn truncate(&self, n: u32) -> Self {
        self.filter(|m| m.grade() <= n)
    }

    pub fn max_grade(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::grade).max()
    }

    fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        AlgebraElement {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        self.multiply_truncated(other, u32::MAX)
    }

    /// Product keeping only degrees up to `max`.
    pub fn multiply_truncated(&self, other: &Self, max: u32) -> Self {
        let mut out = Self::zero();
        for (a, x) in &self.terms {
            let ga = a.grade();
            for (b, y) in &other.terms {
                if ga + b.grade() <= max {
                    out.add_term(a.mul(b), x * y);
                }
            }
        }
        out
    }

    /// Applies a linear map given on monomials.
    pub fn map_linear(&self, mut f: impl FnMut(&Monomial) -> AlgebraElement) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (n, d) in f(m).terms {
                out.add_term(n, d * c);
            }
        }
        out
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale(&-Rational::one())
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.multiply(rhs)
    }
}

/// Element of `H ⊗ H`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TensorElement {
    terms: BTreeMap<(Monomial, Monomial), Rational>,
}

impl TensorElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut t = Self::zero();
        t.add_term(Monomial::one(), Monomial::one(), Rational::one());
        t
    }

    pub fn add_term(&mut self, l: Monomial, r: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((l, r)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `a ⊗ b`.
    pub fn tensor(a: &AlgebraElement, b: &AlgebraElement) -> Self {
        let mut t = Self::zero();
        for (l, x) in a.terms() {
            for (r, y) in b.terms() {
                t.add_term(l.clone(), r.clone(), x * y);
            }
        }
        t
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Monomial, &Rational)> {
        self.terms.iter().map(|((l, r), c)| (l, r, c))
    }

    pub fn coefficient(&self, l: &Monomial, r: &Monomial) -> Rational {
        self.terms
            .get(&(l.clone(), r.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for ((l, r), x) in &self.terms {
            out.add_term(l.clone(), r.clone(), x * c);
        }
        out
    }

    /// Keeps terms whose total degree is at most `n`.
    pub fn truncate(&self, n: u32) -> Self {
        TensorElement {
            terms: self
                .terms
                .iter()
                .filter(|((l, r), _)| l.grade() + r.grade() <= n)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Terms of bidegree `(k, m)`.
    pub fn bigrade(&self, k: u32, m: u32) -> Self {
        TensorElement {
            terms: self
                .terms
                .iter()
                .filter(|((l, r), _)| l.grade() == k && r.grade() == m)
                .map(|(key, c)| (key.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        self.multiply_truncated(other, u32::MAX)
    }

    /// Componentwise product, keeping total degree up to `max`.
    pub fn multiply_truncated(&self, other: &Self, max: u32) -> Self {
        let mut out = Self::zero();
        for ((a, b), x) in &self.terms {
            let g = a.grade() + b.grade();
            for ((c, d), y) in &other.terms {
                if g + c.grade() + d.grade() <= max {
                    out.add_term(a.mul(c), b.mul(d), x * y);
                }
            }
        }
        out
    }

    /// `(f ⊗ g)` for linear maps given on monomials.
    pub fn map_each(
        &self,
        mut f: impl FnMut(&Monomial) -> AlgebraElement,
        mut g: impl FnMut(&Monomial) -> AlgebraElement,
    ) -> Self {
        let mut out = Self::zero();
        for ((l, r), c) in &self.terms {
            let fl = f(l);
            let gr = g(r);
            for (a, x) in fl.terms() {
                for (b, y) in gr.terms() {
                    out.add_term(a.clone(), b.clone(), x * y * c);
                }
            }
        }
        out
    }

    /// Multiplies the two factors together.
    pub fn contract(&self) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for ((l, r), c) in &self.terms {
            out.add_term(l.mul(r), c.clone());
        }
        out
    }
}

impl Add for &TensorElement {
    type Output = TensorElement;
    fn add(self, rhs: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for ((l, r), c) in &rhs.terms {
            out.add_term(l.clone(), r.clone(), c.clone());
        }
        out
    }
}

impl Sub for &TensorElement {
    type Output = TensorElement;
    fn sub(self, rhs: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for ((l, r), c) in &rhs.terms {
            out.add_term(l.clone(), r.clone(), -c);
        }
        out
    }
}

/// Element of `H ⊗ H ⊗ H`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tensor3 {
    terms: BTreeMap<(Monomial, Monomial, Monomial), Rational>,
}

impl Tensor3 {
    pub fn add_term(&mut self, a: Monomial, b: Monomial, c: Monomial, x: Rational) {
        if x.is_zero() {
            return;
        }
        match self.terms.entry((a, b, c)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(x);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += x;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CanonicalForm;

    fn key(loops: u8, tag: u8) -> GraphKey {
        CanonicalForm::from_bytes(&[loops, tag])
    }

    #[test]
    fn unit_and_counit() {
        let g = AlgebraElement::generator(key(1, 0));
        assert_eq!(&g * &AlgebraElement::one(), g);
        let a = &AlgebraElement::one() + &g.scale(&Rational::from_integer(3.into()));
        assert_eq!(a.counit(), Rational::one());
    }

    #[test]
    fn grading() {
        let x = AlgebraElement::generator(key(1, 0));
        let y = AlgebraElement::generator(key(2, 1));
        let p = &(&x * &x) + &y;
        assert_eq!(p.grade(2).len(), 2);
        assert!(p.grade(1).is_zero());
        assert_eq!((&x * &y).max_grade(), Some(3));
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = AlgebraElement::generator(key(1, 0));
        assert!((&x - &x).is_zero());
        let t = TensorElement::tensor(&x, &AlgebraElement::one());
        assert!((&t - &t).is_zero());
    }

    #[test]
    fn monomial_product_is_sorted() {
        let a = Monomial::generator(key(2, 0));
        let b = Monomial::from_keys(vec![key(1, 5), key(3, 0)]);
        let p = a.mul(&b);
        assert_eq!(p.keys(), &[key(1, 5), key(2, 0), key(3, 0)]);
        assert_eq!(p.grade(), 6);
        assert_eq!(p, b.mul(&a));
    }
}
