//! Characters with values in Laurent series: Feynman rules, convolution,
//! counterterms and renormalized values, and Dyson's formula.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_traits::One;
use rayon::prelude::*;

use crate::algebra::{AlgebraElement, Monomial};
use crate::error::{Error, Result};
use crate::graph::GraphKey;
use crate::greens::Greens;
use crate::hopf::Hopf;
use crate::laurent::{parse_laurent, LaurentSeries, Truncation};
use crate::report::{CheckRecord, Report};
use crate::subgraph::{contract, enumerate_subgraphs};
use crate::theory::Residue;
use crate::Rational;

/// An algebra map from the graph algebra to Laurent series, tabulated on a
/// set of generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    pub policy: Truncation,
    values: BTreeMap<GraphKey, LaurentSeries>,
}

impl Character {
    pub fn new(policy: Truncation) -> Self {
        Character {
            policy,
            values: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: GraphKey, value: LaurentSeries) {
        self.values.insert(key, value);
    }

    pub fn keys(&self) -> impl Iterator<Item = &GraphKey> {
        self.values.keys()
    }

    pub fn get(&self, key: &GraphKey) -> Result<&LaurentSeries> {
        self.values.get(key).ok_or_else(|| Error::Unknown {
            what: "generator for character",
            name: key.short_id(),
        })
    }

    pub fn eval_monomial(&self, m: &Monomial) -> Result<LaurentSeries> {
        let mut out = LaurentSeries::one();
        for k in m.keys() {
            out = out.mul(self.get(k)?, self.policy)?;
        }
        Ok(out)
    }

    pub fn eval(&self, a: &AlgebraElement) -> Result<LaurentSeries> {
        let mut out = LaurentSeries::zero();
        for (m, c) in a.terms() {
            out = &out + &self.eval_monomial(m)?.scale(c);
        }
        Ok(out)
    }

    /// Same generators, values compared on the coefficients both know.
    pub fn agrees_with(&self, other: &Character) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .all(|(k, v)| other.values.get(k).is_some_and(|w| v.agrees_with(w)))
    }
}

/// The counit `e`: 1 on the unit, 0 on every generator.
pub fn counit_character(keys: &[GraphKey], policy: Truncation) -> Character {
    let mut c = Character::new(policy);
    for k in keys {
        c.insert(k.clone(), LaurentSeries::zero());
    }
    c
}

/// Default value `z^{-L}` on every generator, with per-generator overrides.
#[derive(Debug, Clone, Default)]
pub struct FeynmanRules {
    pub overrides: BTreeMap<GraphKey, LaurentSeries>,
}

impl FeynmanRules {
    pub fn value(&self, key: &GraphKey, loops: u32) -> LaurentSeries {
        self.overrides
            .get(key)
            .cloned()
            .unwrap_or_else(|| LaurentSeries::monomial(-(loops as i32), Rational::one()))
    }

    /// The character `U` on `keys`.
    pub fn character(&self, hopf: &Hopf, keys: &[GraphKey], policy: Truncation) -> Result<Character> {
        let mut c = Character::new(policy);
        for k in keys {
            c.insert(k.clone(), self.value(k, hopf.loops(k)?).apply(policy)?);
        }
        Ok(c)
    }
}

/// Reads `<name-or-key> = <laurent-expr>` lines; `#` starts a comment.
/// Names resolve against the generators registered in `hopf`.
pub fn parse_rules(text: &str, hopf: &Hopf) -> Result<FeynmanRules> {
    let mut rules = FeynmanRules::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, expr)) = line.split_once('=') else {
            return Err(Error::syntax(i + 1, 1, "expected `<graph> = <laurent series>`"));
        };
        let name = name.trim();
        let key = hopf.key_by_name(name).ok_or_else(|| Error::Unknown {
            what: "graph",
            name: name.to_string(),
        })?;
        let value = parse_laurent(expr).map_err(|e| Error::syntax(i + 1, raw.find('=').unwrap_or(0) + 2, e.to_string()))?;
        rules.overrides.insert(key, value);
    }
    Ok(rules)
}

/// `(φ⊗ψ)Δ(a)`.
pub fn convolve(hopf: &Hopf, phi: &Character, psi: &Character, a: &AlgebraElement) -> Result<LaurentSeries> {
    let mut out = LaurentSeries::zero();
    for (l, r, c) in hopf.coproduct(a)?.terms() {
        let v = phi.eval_monomial(l)?.mul(&psi.eval_monomial(r)?, phi.policy)?;
        out = &out + &v.scale(c);
    }
    Ok(out)
}

/// `φ ∗ ψ` tabulated on the generators of `phi`.
pub fn convolution(hopf: &Hopf, phi: &Character, psi: &Character) -> Result<Character> {
    let mut out = Character::new(phi.policy);
    for k in phi.keys() {
        out.insert(k.clone(), convolve(hopf, phi, psi, &AlgebraElement::generator(k.clone()))?);
    }
    Ok(out)
}

/// `φ∘S`, the convolution inverse.
pub fn inverse(hopf: &Hopf, phi: &Character) -> Result<Character> {
    let mut out = Character::new(phi.policy);
    for k in phi.keys() {
        out.insert(k.clone(), phi.eval(&hopf.antipode(&AlgebraElement::generator(k.clone()))?)?);
    }
    Ok(out)
}

/// `C(X) = ε(X) − T[Σ C(X')U(X'')]` over the coproduct terms with `X'' ≠ 1`.
/// `c` must already hold every generator of lower loop order.
fn counterterm_of(hopf: &Hopf, u: &Character, c: &Character, x: &Monomial) -> Result<LaurentSeries> {
    let mut sum = LaurentSeries::zero();
    for (l, r, k) in hopf.coproduct_monomial(x)?.terms() {
        if r.is_one() {
            continue;
        }
        let v = c.eval_monomial(l)?.mul(&u.eval_monomial(r)?, u.policy)?;
        sum = &sum + &v.scale(k);
    }
    Ok(-&sum.pole_part())
}

/// Counterterm character through the coproduct, one loop order at a time.
pub fn counterterm(hopf: &Hopf, u: &Character) -> Result<Character> {
    let mut by_loops: BTreeMap<u32, Vec<GraphKey>> = BTreeMap::new();
    for k in u.keys() {
        by_loops.entry(hopf.loops(k)?).or_default().push(k.clone());
    }
    let mut c = Character::new(u.policy);
    for keys in by_loops.values() {
        let vals = keys
            .par_iter()
            .map(|k| counterterm_of(hopf, u, &c, &Monomial::generator(k.clone())))
            .collect::<Result<Vec<_>>>()?;
        for (k, v) in keys.iter().zip(vals) {
            c.insert(k.clone(), v);
        }
    }
    Ok(c)
}

/// `R = C ∗ U`.
pub fn renormalized(hopf: &Hopf, u: &Character, c: &Character) -> Result<Character> {
    convolution(hopf, c, u)
}

/// The forest recursion on graphs directly: `R̄(Γ) = U(Γ) + Σ C(γ)U(Γ/γ)`
/// over subgraph occurrences, `C = −T R̄`, `R = R̄ + C`.
pub struct Bphz<'a> {
    hopf: &'a Hopf,
    u: &'a Character,
    memo: RwLock<HashMap<GraphKey, (LaurentSeries, LaurentSeries)>>,
}

impl<'a> Bphz<'a> {
    pub fn new(hopf: &'a Hopf, u: &'a Character) -> Self {
        Bphz {
            hopf,
            u,
            memo: RwLock::default(),
        }
    }

    /// `(C(Γ), R(Γ))` for a generator.
    pub fn values(&self, key: &GraphKey) -> Result<(LaurentSeries, LaurentSeries)> {
        if let Some(v) = self.memo.read().unwrap().get(key) {
            return Ok(v.clone());
        }
        let g = self.hopf.representative(key).ok_or_else(|| Error::Unknown {
            what: "generator",
            name: key.short_id(),
        })?;
        let policy = self.u.policy;
        let mut rbar = self.u.get(key)?.clone();
        for occ in enumerate_subgraphs(&g)? {
            let mut cg = LaurentSeries::one();
            for comp in &occ.components {
                let (c, _) = self.values(&self.hopf.register(&comp.graph)?)?;
                cg = cg.mul(&c, policy)?;
            }
            let q = self.hopf.register(&contract(&g, &occ)?)?;
            rbar = &rbar + &cg.mul(self.u.get(&q)?, policy)?;
        }
        let c = -&rbar.pole_part();
        let r = &rbar + &c;
        self.memo.write().unwrap().insert(key.clone(), (c.clone(), r.clone()));
        Ok((c, r))
    }

    /// `C` and `R` tabulated on the generators of `U`.
    pub fn characters(&self) -> Result<(Character, Character)> {
        let keys: Vec<GraphKey> = self.u.keys().cloned().collect();
        let vals = keys.par_iter().map(|k| self.values(k)).collect::<Result<Vec<_>>>()?;
        let mut c = Character::new(self.u.policy);
        let mut r = Character::new(self.u.policy);
        for (k, (cv, rv)) in keys.into_iter().zip(vals) {
            c.insert(k.clone(), cv);
            r.insert(k, rv);
        }
        Ok((c, r))
    }
}

/// `C` and `R` evaluated on a monomial from the recursion itself rather than
/// by multiplicative extension.
pub fn direct_on_monomial(hopf: &Hopf, u: &Character, c: &Character, m: &Monomial) -> Result<(LaurentSeries, LaurentSeries)> {
    let cm = counterterm_of(hopf, u, c, m)?;
    let mut r = LaurentSeries::zero();
    for (l, rr, k) in hopf.coproduct_monomial(m)?.terms() {
        let cl = if l == m { cm.clone() } else { c.eval_monomial(l)? };
        r = &r + &cl.mul(&u.eval_monomial(rr)?, u.policy)?.scale(k);
    }
    Ok((cm, r))
}

/// The full set of renormalization checks on the closure of `keys`.
pub fn check_renormalization(hopf: &Hopf, keys: &[GraphKey], rules: &FeynmanRules, policy: Truncation) -> Result<Report> {
    let theory = hopf.theory().name.clone();
    let keys = hopf.closure(keys)?;
    let u = rules.character(hopf, &keys, policy)?;
    let c = counterterm(hopf, &u)?;
    let r = renormalized(hopf, &u, &c)?;
    let (bc, br) = Bphz::new(hopf, &u).characters()?;
    let mut report = Report::new();

    let bad_c: Vec<&GraphKey> = keys.iter().filter(|k| !c.get(k).unwrap().is_pure_pole()).collect();
    report.push(CheckRecord::new("counterterm-pure-pole", &theory, bad_c.is_empty()).residual(bad_c.len()));
    let bad_r: Vec<&GraphKey> = keys.iter().filter(|k| r.get(k).unwrap().has_poles()).collect();
    report.push(CheckRecord::new("renormalized-regular", &theory, bad_r.is_empty()).residual(bad_r.len()));

    let back = convolution(hopf, &inverse(hopf, &c)?, &r)?;
    let bad_u = keys.iter().filter(|k| !back.get(k).unwrap().agrees_with(u.get(k).unwrap())).count();
    report.push(CheckRecord::new("inverse-counterterm-times-renormalized", &theory, bad_u == 0).residual(bad_u));

    let same = c.agrees_with(&bc) && r.agrees_with(&br);
    let diff = keys
        .iter()
        .filter(|k| !c.get(k).unwrap().agrees_with(bc.get(k).unwrap()) || !r.get(k).unwrap().agrees_with(br.get(k).unwrap()))
        .count();
    report.push(CheckRecord::new("bphz-equals-birkhoff", &theory, same).residual(diff));

    let e = counit_character(&keys, policy);
    let mut bad_group = 0;
    let inv = inverse(hopf, &u)?;
    let left_unit = convolution(hopf, &e, &u)?;
    let right_unit = convolution(hopf, &u, &e)?;
    let left_inv = convolution(hopf, &u, &inv)?;
    let right_inv = convolution(hopf, &inv, &u)?;
    for k in &keys {
        let uk = u.get(k)?;
        if !left_unit.get(k)?.agrees_with(uk) || !right_unit.get(k)?.agrees_with(uk) {
            bad_group += 1;
        }
        if !left_inv.get(k)?.is_zero() || !right_inv.get(k)?.is_zero() {
            bad_group += 1;
        }
    }
    report.push(CheckRecord::new("character-group-laws", &theory, bad_group == 0).residual(bad_group));

    let mut bad_mult = 0;
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i..] {
            if hopf.loops(a)? + hopf.loops(b)? > policy.pole {
                continue;
            }
            let m = Monomial::from_keys(vec![a.clone(), b.clone()]);
            let (cm, rm) = direct_on_monomial(hopf, &u, &c, &m)?;
            if !cm.agrees_with(&c.eval_monomial(&m)?) || !rm.agrees_with(&r.eval_monomial(&m)?) {
                bad_mult += 1;
            }
        }
    }
    report.push(CheckRecord::new("multiplicativity", &theory, bad_mult == 0).residual(bad_mult));
    Ok(report)
}

/// A power series in `h = g²` with Laurent-series coefficients, truncated
/// at degree `max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSeries {
    pub coefficients: Vec<LaurentSeries>,
    policy: Truncation,
}

impl CouplingSeries {
    pub fn one(max: u32, policy: Truncation) -> Self {
        let mut coefficients = vec![LaurentSeries::zero(); max as usize + 1];
        coefficients[0] = LaurentSeries::one();
        CouplingSeries { coefficients, policy }
    }

    /// `Σ_n h^n χ(a_n)` over the homogeneous parts of `a`.
    pub fn evaluate(chi: &Character, a: &AlgebraElement, max: u32) -> Result<Self> {
        let coefficients = (0..=max).map(|n| chi.eval(&a.grade(n))).collect::<Result<_>>()?;
        Ok(CouplingSeries {
            coefficients,
            policy: chi.policy,
        })
    }

    fn max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let n = self.max();
        let mut out = vec![LaurentSeries::zero(); n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                let v = self.coefficients[i].mul(&other.coefficients[j], self.policy)?;
                out[i + j] = &out[i + j] + &v;
            }
        }
        Ok(CouplingSeries {
            coefficients: out,
            policy: self.policy,
        })
    }

    /// `h^k · self`.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.max();
        let mut out = vec![LaurentSeries::zero(); n + 1];
        for i in 0..=n.saturating_sub(k) {
            if i + k <= n {
                out[i + k] = self.coefficients[i].clone();
            }
        }
        CouplingSeries {
            coefficients: out,
            policy: self.policy,
        }
    }

    /// Binomial series `(1+u)^q`; the constant coefficient must be 1.
    pub fn pow(&self, q: &Rational) -> Result<Self> {
        if !self.coefficients[0].agrees_with(&LaurentSeries::one()) {
            return Err(Error::Precondition("coupling series needs constant term 1".into()));
        }
        let n = self.max();
        let mut u = self.clone();
        u.coefficients[0] = LaurentSeries::zero();
        let mut out = Self::one(n as u32, self.policy);
        let mut power = Self::one(n as u32, self.policy);
        let mut binom = Rational::one();
        for k in 1..=n {
            power = power.mul(&u)?;
            binom = binom * (q - Rational::from_integer((k as i64 - 1).into())) / Rational::from_integer((k as i64).into());
            for i in 0..=n {
                out.coefficients[i] = &out.coefficients[i] + &power.coefficients[i].scale(&binom);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a + b)
            .collect();
        CouplingSeries {
            coefficients,
            policy: self.policy,
        }
    }
}

/// `R(G^r)(g) = Π_e (Z^e)^{N_e(r)/2} U(G^r)(g₀)` with `g₀ = C(X_v)·g` and
/// `Z^e = C(G^e)`, compared coefficient by coefficient up to `g^{g_order}`.
/// Both sides carry an overall `g^{N(r)−2}` which is divided out, so the
/// comparison runs in `h = g²`.
pub fn dyson_check(greens: &Greens, r: Residue, rules: &FeynmanRules, g_order: u32) -> Result<Report> {
    let t = greens.theory().clone();
    let vs: Vec<_> = t.vertex_ids().collect();
    if vs.len() != 1 {
        return Err(Error::Precondition(format!(
            "Dyson's formula is checked only for a single vertex kind, theory `{}` has {}",
            t.name,
            vs.len()
        )));
    }
    let v = vs[0];
    let nr = t.residue_valence(r);
    let max = greens.max_loops();
    if g_order > 2 * max + nr - 2 {
        return Err(Error::Precondition(format!(
            "coupling order {g_order} exceeds 2·{max} + {nr} − 2"
        )));
    }
    let hmax = g_order.saturating_sub(nr - 2) / 2;
    let policy = Truncation::for_loops(max);
    let hopf = &greens.hopf;
    let keys: Vec<GraphKey> = greens.catalog.iter().map(|(_, _, e)| e.class.clone()).collect();
    let keys = hopf.closure(&keys)?;
    let u = rules.character(hopf, &keys, policy)?;
    let c = counterterm(hopf, &u)?;
    let (_, rchar) = Bphz::new(hopf, &u).characters()?;

    let green_r = greens.green(r).total();
    let lhs = CouplingSeries::evaluate(&rchar, &green_r, hmax)?;

    let half = Rational::new(1.into(), 2.into());
    let mut z = CouplingSeries::one(hmax, policy);
    let mut gauge = CouplingSeries::evaluate(&c, &greens.green(Residue::Vertex(v)).total(), hmax)?;
    for e in t.edge_ids() {
        let ze = CouplingSeries::evaluate(&c, &greens.green(Residue::Edge(e)).total(), hmax)?;
        let ne = Rational::from_integer(t.leg_count(r, e).into());
        z = z.mul(&ze.pow(&(&ne * &half))?)?;
        let nv = Rational::from_integer(t.leg_count(Residue::Vertex(v), e).into());
        gauge = gauge.mul(&ze.pow(&-(&nv * &half))?)?;
    }
    let cx = gauge.pow(&Rational::new(1.into(), (t.total_valence(v) as i64 - 2).into()))?;

    let mut sum = CouplingSeries {
        coefficients: vec![LaurentSeries::zero(); hmax as usize + 1],
        policy,
    };
    for l in 0..=hmax {
        let exp = 2 * l as i64 + nr as i64 - 2;
        let ul = u.eval(&greens.green(r).component(l))?;
        let term = cx.pow(&Rational::from_integer(exp.into()))?;
        let mut scaled = CouplingSeries::one(hmax, policy);
        for i in 0..=hmax - l {
            scaled.coefficients[i as usize] = term.coefficients[i as usize].mul(&ul, policy)?;
        }
        sum = sum.add(&scaled.shift(l as usize));
    }
    let rhs = z.mul(&sum)?;

    let rname = t.residue_name(r).to_string();
    let mut report = Report::new();
    for n in 0..=hmax {
        let ok = lhs.coefficients[n as usize].agrees_with(&rhs.coefficients[n as usize]);
        let diff = &lhs.coefficients[n as usize] - &rhs.coefficients[n as usize];
        report.push(
            CheckRecord::new("dyson", &t.name, ok)
                .residue(&rname)
                .degree(2 * n + nr - 2)
                .subject(format!("R = {}", lhs.coefficients[n as usize]))
                .residual(diff.terms().count()),
        );
    }
    Ok(report)
}
