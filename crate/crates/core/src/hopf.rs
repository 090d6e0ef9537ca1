//! The graph Hopf algebra: coproduct, antipode and axiom checks.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_traits::{One, Signed};

use crate::algebra::{AlgebraElement, Monomial, Tensor3, TensorElement};
use crate::error::{Error, Result};
use crate::graph::{class_key, FeynmanGraph, GraphKey};
use crate::subgraph::{contract, enumerate_subgraphs};
use crate::theory::Theory;
use crate::Rational;

/// Registry of generators with memoized coproducts and antipodes.
pub struct Hopf {
    theory: Arc<Theory>,
    reps: RwLock<HashMap<GraphKey, Arc<FeynmanGraph>>>,
    names: RwLock<HashMap<GraphKey, String>>,
    coproducts: RwLock<HashMap<GraphKey, Arc<TensorElement>>>,
    antipodes: RwLock<HashMap<GraphKey, Arc<AlgebraElement>>>,
}

impl Hopf {
    pub fn new(theory: Arc<Theory>) -> Self {
        Hopf {
            theory,
            reps: RwLock::default(),
            names: RwLock::default(),
            coproducts: RwLock::default(),
            antipodes: RwLock::default(),
        }
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    /// Registers a connected 1PI graph as a generator and returns its key.
    pub fn register(&self, g: &FeynmanGraph) -> Result<GraphKey> {
        if !g.is_1pi() {
            return Err(Error::Precondition("generators must be connected 1PI graphs".into()));
        }
        g.residue()?;
        let key = class_key(g);
        self.reps
            .write()
            .unwrap()
            .entry(key.clone())
            .or_insert_with(|| Arc::new(g.clone()));
        Ok(key)
    }

    /// Registers `g` and remembers `name` for display.
    pub fn register_named(&self, g: &FeynmanGraph, name: &str) -> Result<GraphKey> {
        let key = self.register(g)?;
        self.names.write().unwrap().entry(key.clone()).or_insert_with(|| name.to_string());
        Ok(key)
    }

    pub fn representative(&self, key: &GraphKey) -> Option<Arc<FeynmanGraph>> {
        self.reps.read().unwrap().get(key).cloned()
    }

    pub fn name_of(&self, key: &GraphKey) -> String {
        self.names
            .read()
            .unwrap()
            .get(key)
            .cloned()
            .unwrap_or_else(|| key.short_id())
    }

    pub fn key_by_name(&self, name: &str) -> Option<GraphKey> {
        let names = self.names.read().unwrap();
        names
            .iter()
            .find(|(_, n)| n.as_str() == name)
            .map(|(k, _)| k.clone())
            .or_else(|| {
                self.reps
                    .read()
                    .unwrap()
                    .keys()
                    .find(|k| k.short_id() == name || k.to_hex() == name)
                    .cloned()
            })
    }

    /// Loop number of a registered generator.
    pub fn loops(&self, key: &GraphKey) -> Result<u32> {
        Ok(self
            .representative(key)
            .ok_or_else(|| Error::Unknown {
                what: "generator",
                name: key.short_id(),
            })?
            .loop_number())
    }

    /// `keys` together with every generator reachable through coproducts,
    /// sorted by loop number.
    pub fn closure(&self, keys: &[GraphKey]) -> Result<Vec<GraphKey>> {
        let mut seen: std::collections::BTreeSet<GraphKey> = keys.iter().cloned().collect();
        let mut stack: Vec<GraphKey> = keys.to_vec();
        while let Some(k) = stack.pop() {
            for (l, r, _) in self.coproduct_generator(&k)?.terms() {
                for x in l.keys().iter().chain(r.keys()) {
                    if seen.insert(x.clone()) {
                        stack.push(x.clone());
                    }
                }
            }
        }
        let mut out = Vec::new();
        for k in seen {
            out.push((self.loops(&k)?, k));
        }
        out.sort();
        Ok(out.into_iter().map(|(_, k)| k).collect())
    }

    /// The algebra element of a graph: 1 for the empty graph, the product of
    /// its components otherwise.
    pub fn element(&self, g: &FeynmanGraph) -> Result<AlgebraElement> {
        if g.is_empty() {
            return Ok(AlgebraElement::one());
        }
        let mut keys = Vec::new();
        for c in g.split_components() {
            keys.push(self.register(&c)?);
        }
        Ok(AlgebraElement::monomial(Monomial::from_keys(keys), Rational::one()))
    }

    fn compute_coproduct(&self, key: &GraphKey) -> Result<TensorElement> {
        let g = self
            .representative(key)
            .ok_or_else(|| Error::Unknown {
                what: "generator",
                name: key.short_id(),
            })?;
        let mut t = TensorElement::zero();
        let gen = Monomial::generator(key.clone());
        t.add_term(gen.clone(), Monomial::one(), Rational::one());
        t.add_term(Monomial::one(), gen, Rational::one());
        for occ in enumerate_subgraphs(&g)? {
            let mut left = Vec::new();
            for c in &occ.components {
                left.push(self.register(&c.graph)?);
            }
            let quotient = contract(&g, &occ)?;
            let right = self.register(&quotient)?;
            t.add_term(Monomial::from_keys(left), Monomial::generator(right), Rational::one());
        }
        Ok(t)
    }

    /// `Δ` of a generator.
    pub fn coproduct_generator(&self, key: &GraphKey) -> Result<Arc<TensorElement>> {
        if let Some(t) = self.coproducts.read().unwrap().get(key) {
            return Ok(t.clone());
        }
        let t = Arc::new(self.compute_coproduct(key)?);
        Ok(self
            .coproducts
            .write()
            .unwrap()
            .entry(key.clone())
            .or_insert(t)
            .clone())
    }

    /// Replaces the stored coproduct of a generator. Meant for negative
    /// controls in tests.
    pub fn override_coproduct(&self, key: &GraphKey, t: TensorElement) {
        self.coproducts.write().unwrap().insert(key.clone(), Arc::new(t));
    }

    pub fn coproduct_monomial(&self, m: &Monomial) -> Result<TensorElement> {
        let mut t = TensorElement::one();
        for k in m.keys() {
            t = t.multiply(&*self.coproduct_generator(k)?);
        }
        Ok(t)
    }

    pub fn coproduct(&self, a: &AlgebraElement) -> Result<TensorElement> {
        let mut out = TensorElement::zero();
        for (m, c) in a.terms() {
            let t = self.coproduct_monomial(m)?;
            out = &out + &t.scale(c);
        }
        Ok(out)
    }

    /// Reduced coproduct terms `γ ⊗ Γ/γ` of a generator.
    pub fn middle_terms(&self, key: &GraphKey) -> Result<Vec<(Monomial, Monomial, Rational)>> {
        Ok(self
            .coproduct_generator(key)?
            .terms()
            .filter(|(l, r, _)| !l.is_one() && !r.is_one())
            .map(|(l, r, c)| (l.clone(), r.clone(), c.clone()))
            .collect())
    }

    /// `S` of a generator by `S(Γ) = −Γ − Σ S(γ)·Γ/γ`.
    pub fn antipode_generator(&self, key: &GraphKey) -> Result<Arc<AlgebraElement>> {
        if let Some(s) = self.antipodes.read().unwrap().get(key) {
            return Ok(s.clone());
        }
        let mut s = -&AlgebraElement::generator(key.clone());
        for (l, r, c) in self.middle_terms(key)? {
            let sl = self.antipode_monomial(&l)?;
            let prod = sl.multiply(&AlgebraElement::monomial(r, c));
            s = &s - &prod;
        }
        let s = Arc::new(s);
        Ok(self
            .antipodes
            .write()
            .unwrap()
            .entry(key.clone())
            .or_insert(s)
            .clone())
    }

    pub fn antipode_monomial(&self, m: &Monomial) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::one();
        for k in m.keys() {
            out = out.multiply(&*self.antipode_generator(k)?);
        }
        Ok(out)
    }

    pub fn antipode(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::zero();
        for (m, c) in a.terms() {
            out = &out + &self.antipode_monomial(m)?.scale(c);
        }
        Ok(out)
    }

    /// `(Δ⊗id)Δ = (id⊗Δ)Δ`.
    pub fn check_coassociativity(&self, a: &AlgebraElement) -> Result<bool> {
        let d = self.coproduct(a)?;
        let mut lhs = Tensor3::default();
        let mut rhs = Tensor3::default();
        for (l, r, c) in d.terms() {
            for (l1, l2, x) in self.coproduct_monomial(l)?.terms() {
                lhs.add_term(l1.clone(), l2.clone(), r.clone(), x * c);
            }
            for (r1, r2, x) in self.coproduct_monomial(r)?.terms() {
                rhs.add_term(l.clone(), r1.clone(), r2.clone(), x * c);
            }
        }
        Ok(lhs == rhs)
    }

    /// `(id⊗ε)Δ = id = (ε⊗id)Δ`.
    pub fn check_counit(&self, a: &AlgebraElement) -> Result<bool> {
        let d = self.coproduct(a)?;
        let mut left = AlgebraElement::zero();
        let mut right = AlgebraElement::zero();
        for (l, r, c) in d.terms() {
            if r.is_one() {
                left.add_term(l.clone(), c.clone());
            }
            if l.is_one() {
                right.add_term(r.clone(), c.clone());
            }
        }
        Ok(left == *a && right == *a)
    }

    /// `m(S⊗id)Δ = 1·ε = m(id⊗S)Δ`.
    pub fn check_antipode(&self, a: &AlgebraElement) -> Result<bool> {
        let d = self.coproduct(a)?;
        let expected = AlgebraElement::one().scale(&a.counit());
        let mut left = AlgebraElement::zero();
        let mut right = AlgebraElement::zero();
        for (l, r, c) in d.terms() {
            let rm = AlgebraElement::monomial(r.clone(), c.clone());
            left = &left + &self.antipode_monomial(l)?.multiply(&rm);
            let lm = AlgebraElement::monomial(l.clone(), c.clone());
            right = &right + &lm.multiply(&self.antipode_monomial(r)?);
        }
        Ok(left == expected && right == expected)
    }

    /// `Δ(H^n) ⊆ Σ H^k ⊗ H^{n−k}` for a homogeneous element.
    pub fn check_grading(&self, a: &AlgebraElement) -> Result<bool> {
        let Some(n) = a.max_grade() else {
            return Ok(true);
        };
        if a.grade(n) != *a {
            return Err(Error::Precondition("element is not homogeneous".into()));
        }
        Ok(self.coproduct(a)?.terms().all(|(l, r, _)| l.grade() + r.grade() == n))
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        let names: Vec<String> = m.keys().iter().map(|k| self.name_of(k)).collect();
        format!("[{}]", names.join(" "))
    }

    /// `c1 * [g1 g2] + c2 * [g3] ...`
    pub fn format_element(&self, a: &AlgebraElement) -> String {
        join_terms(a.terms().map(|(m, c)| (c.clone(), self.format_monomial(m))))
    }

    /// `c1 * [g1 g2] (x) [g3] + ...`
    pub fn format_tensor(&self, t: &TensorElement) -> String {
        join_terms(t.terms().map(|(l, r, c)| {
            (
                c.clone(),
                format!("{} (x) {}", self.format_monomial(l), self.format_monomial(r)),
            )
        }))
    }
}

fn join_terms(terms: impl Iterator<Item = (Rational, String)>) -> String {
    let mut out = String::new();
    for (c, body) in terms {
        if out.is_empty() {
            if c.is_negative() {
                out.push_str("- ");
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&format!("{} * {}", c.abs(), body));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Convenience: `Rational` from a ratio of machine integers.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

impl std::fmt::Debug for Hopf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hopf")
            .field("theory", &self.theory.name)
            .field("generators", &self.reps.read().unwrap().len())
            .finish()
    }
}
