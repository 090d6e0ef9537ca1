//! Green's functions, the coproduct formulas for them, the elements `X_v`
//! and the ideal they generate.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebra::{AlgebraElement, Monomial, TensorElement};
use crate::error::{Error, Result};
use crate::generate::{CatalogEntry, GraphCatalog};
use crate::graph::GraphKey;
use crate::hopf::Hopf;
use crate::linalg::{Reducer, SparseVec};
use crate::report::{CheckRecord, Report};
use crate::series::series_pow;
use crate::subgraph::{component_counts, insertion_places, ResidueCounts};
use crate::theory::{Residue, Theory, VertexKindId};
use crate::Rational;

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// `G^r` split by loop order; component 0 is 1 and higher components carry
/// the sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreenSeries {
    pub residue: Residue,
    pub max_loops: u32,
    pub components: Vec<AlgebraElement>,
}

impl GreenSeries {
    pub fn total(&self) -> AlgebraElement {
        self.components
            .iter()
            .fold(AlgebraElement::zero(), |acc, c| &acc + c)
    }

    pub fn component(&self, n: u32) -> AlgebraElement {
        self.components
            .get(n as usize)
            .cloned()
            .unwrap_or_else(AlgebraElement::zero)
    }
}

/// Which generators of the ideal to build spanning sets from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorStyle {
    /// Homogeneous parts of `X_v − X_{v'}`.
    Difference,
    /// Homogeneous parts of `(G^v)^a Π_e (G^e)^{b N_e(v')/2} − (G^{v'})^b Π_e (G^e)^{a N_e(v)/2}`
    /// with `a = N(v')−2`, `b = N(v)−2`.
    Polynomial,
}

#[derive(Debug, Clone)]
pub struct IdealGenerator {
    pub description: String,
    /// Component `k` is the degree-`k` part; component 0 is always zero.
    pub components: Vec<AlgebraElement>,
}

/// Spanning data for the ideal up to a fixed degree.
#[derive(Debug, Clone)]
pub struct IdealBasis {
    pub style: GeneratorStyle,
    pub max_loops: u32,
    pub generators: Vec<IdealGenerator>,
    /// Spanning elements of each degree `0..=max_loops`.
    pub spanning: Vec<Vec<AlgebraElement>>,
    reducer: Reducer<Monomial>,
}

fn to_sparse(a: &AlgebraElement) -> SparseVec<Monomial> {
    a.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
}

fn from_sparse(v: SparseVec<Monomial>) -> AlgebraElement {
    let mut a = AlgebraElement::zero();
    for (m, c) in v {
        a.add_term(m, c);
    }
    a
}

impl IdealBasis {
    pub fn dimension(&self, n: u32) -> usize {
        let mut r = Reducer::new();
        for a in self.spanning.get(n as usize).into_iter().flatten() {
            r.insert(to_sparse(a));
        }
        r.rank()
    }

    fn check_degree(&self, a: &AlgebraElement) -> Result<()> {
        match a.max_grade() {
            Some(d) if d > self.max_loops => Err(Error::Truncation(format!(
                "degree {d} exceeds the ideal's range {}",
                self.max_loops
            ))),
            _ => Ok(()),
        }
    }

    /// Representative of `a` modulo the ideal; zero exactly on the ideal.
    pub fn normal_form(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_degree(a)?;
        Ok(from_sparse(self.reducer.reduce(to_sparse(a))))
    }

    pub fn membership(&self, a: &AlgebraElement) -> Result<bool> {
        Ok(self.normal_form(a)?.is_zero())
    }

    fn nf_monomial(&self, m: &Monomial, cache: &mut HashMap<Monomial, AlgebraElement>) -> Result<AlgebraElement> {
        if let Some(x) = cache.get(m) {
            return Ok(x.clone());
        }
        let x = self.normal_form(&AlgebraElement::monomial(m.clone(), Rational::one()))?;
        cache.insert(m.clone(), x.clone());
        Ok(x)
    }

    fn reduce_tensor(&self, t: &TensorElement, left: bool, right: bool) -> Result<TensorElement> {
        let mut cache = HashMap::new();
        let mut out = TensorElement::zero();
        for (l, r, c) in t.terms() {
            let a = if left {
                self.nf_monomial(l, &mut cache)?
            } else {
                AlgebraElement::monomial(l.clone(), Rational::one())
            };
            let b = if right {
                self.nf_monomial(r, &mut cache)?
            } else {
                AlgebraElement::monomial(r.clone(), Rational::one())
            };
            out = &out + &TensorElement::tensor(&a, &b).scale(c);
        }
        Ok(out)
    }

    /// `(NF ⊗ NF)(t)`; zero exactly on `I⊗H + H⊗I`.
    pub fn tensor_normal_form(&self, t: &TensorElement) -> Result<TensorElement> {
        self.reduce_tensor(t, true, true)
    }

    /// `t ∈ I⊗H + H⊗I`.
    pub fn tensor_membership(&self, t: &TensorElement) -> Result<bool> {
        Ok(self.tensor_normal_form(t)?.is_zero())
    }

    /// `(NF ⊗ id)(t)`; zero exactly on `I⊗H`.
    pub fn left_normal_form(&self, t: &TensorElement) -> Result<TensorElement> {
        self.reduce_tensor(t, true, false)
    }

    /// `t ∈ I⊗H`.
    pub fn left_membership(&self, t: &TensorElement) -> Result<bool> {
        Ok(self.left_normal_form(t)?.is_zero())
    }

    /// Whether every spanning element of `other` lies in this ideal.
    pub fn contains_basis(&self, other: &IdealBasis) -> Result<bool> {
        for a in other.spanning.iter().flatten() {
            if !self.membership(a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A catalog with its Hopf algebra and the series built from it.
pub struct Greens {
    pub catalog: GraphCatalog,
    pub hopf: Hopf,
}

impl std::fmt::Debug for Greens {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Greens")
            .field("theory", &self.catalog.theory.name)
            .field("max_loops", &self.catalog.max_loops)
            .finish()
    }
}

enum Right<'a> {
    Tree,
    Graph(&'a CatalogEntry, u32),
}

impl Greens {
    /// Registers every catalog entry under its name and precomputes the
    /// coproducts of all generators.
    pub fn new(catalog: GraphCatalog) -> Result<Self> {
        let hopf = Hopf::new(catalog.theory.clone());
        for (_, _, e) in catalog.iter() {
            hopf.register_named(&e.graph, &e.name)?;
        }
        let keys: Vec<GraphKey> = catalog.iter().map(|(_, _, e)| e.class.clone()).collect();
        keys.par_iter()
            .map(|k| hopf.coproduct_generator(k).map(|_| ()))
            .collect::<Result<()>>()?;
        Ok(Greens { catalog, hopf })
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.catalog.theory
    }

    pub fn max_loops(&self) -> u32 {
        self.catalog.max_loops
    }

    /// `+1` for a vertex residue, `−1` for an edge residue.
    pub fn sign(r: Residue) -> Rational {
        if r.is_vertex() {
            Rational::one()
        } else {
            -Rational::one()
        }
    }

    fn entry_term(e: &CatalogEntry) -> AlgebraElement {
        AlgebraElement::generator(e.class.clone()).scale(&(Rational::one() / int(e.sym as i64)))
    }

    /// `G^r = 1 ± Σ Γ/Sym(Γ)` up to the catalog's loop order.
    pub fn green(&self, r: Residue) -> GreenSeries {
        let mut components = vec![AlgebraElement::one()];
        for l in 1..=self.max_loops() {
            let mut c = AlgebraElement::zero();
            for e in self.catalog.get(r, l) {
                c = &c + &Self::entry_term(e);
            }
            components.push(c.scale(&Self::sign(r)));
        }
        GreenSeries {
            residue: r,
            max_loops: self.max_loops(),
            components,
        }
    }

    /// `Δ(G^r)` by applying the coproduct termwise.
    pub fn coproduct_green_direct(&self, r: Residue) -> Result<TensorElement> {
        self.hopf.coproduct(&self.green(r).total())
    }

    fn right_factors(&self, r: Residue) -> Vec<Right<'_>> {
        let mut out = vec![Right::Tree];
        for l in 1..=self.max_loops() {
            for e in self.catalog.get(r, l) {
                out.push(Right::Graph(e, l));
            }
        }
        out
    }

    /// `m_{Γ,r}` with the residue itself as the tree graph: one vertex, or
    /// minus one edge.
    fn counts(&self, r: Residue, right: &Right) -> ResidueCounts {
        match right {
            Right::Graph(e, _) => component_counts(&e.graph),
            Right::Tree => {
                let mut m: ResidueCounts = self.theory().residues().into_iter().map(|x| (x, 0)).collect();
                m.insert(r, if r.is_vertex() { 1 } else { -1 });
                m
            }
        }
    }

    fn right_element(&self, r: Residue, right: &Right) -> (AlgebraElement, u32) {
        match right {
            Right::Tree => (AlgebraElement::one(), 0),
            Right::Graph(e, l) => (Self::entry_term(e).scale(&Self::sign(r)), *l),
        }
    }

    /// `Δ(G^r) = Σ_Γ Σ_γ Γ|γ / (Sym γ Sym Γ) γ ⊗ Γ`, with γ running over
    /// multisets of catalog graphs.
    pub fn coproduct_green_prop(&self, r: Residue) -> Result<TensorElement> {
        let max = self.max_loops();
        let parts: Vec<(Residue, u32, &CatalogEntry)> = self.catalog.iter().collect();
        let mut out = TensorElement::zero();
        for right in self.right_factors(r) {
            let m = self.counts(r, &right);
            let (rel, rl) = self.right_element(r, &right);
            let budget = max - rl;
            let mut chosen: Vec<usize> = Vec::new();
            let mut left = AlgebraElement::zero();
            collect_multisets(&parts, 0, budget, &mut chosen, &mut |pick| {
                let mut n: ResidueCounts = m.keys().map(|&x| (x, 0)).collect();
                let mut sym = Rational::one();
                let mut keys = Vec::new();
                let mut run = 0u64;
                for (i, &p) in pick.iter().enumerate() {
                    let (pr, _, e) = parts[p];
                    *n.get_mut(&pr).unwrap() += 1;
                    sym *= int(e.sym as i64);
                    keys.push(e.class.clone());
                    run = if i > 0 && pick[i - 1] == p { run + 1 } else { 1 };
                    sym *= int(run as i64);
                }
                let ins = insertion_places(&m, &n);
                if !ins.is_zero() {
                    left.add_term(Monomial::from_keys(keys), Rational::from_integer(ins) / sym);
                }
            });
            out = &out + &TensorElement::tensor(&left, &rel);
        }
        Ok(out)
    }

    /// `Σ_Γ Π_v (G^v)^{m_v} Π_e (G^e)^{−m_e} ⊗ ±Γ/Sym Γ`.
    pub fn coproduct_green_enhanced(&self, r: Residue) -> Result<TensorElement> {
        let max = self.max_loops();
        let mut powers: HashMap<(Residue, i64, u32), AlgebraElement> = HashMap::new();
        let mut out = TensorElement::zero();
        for right in self.right_factors(r) {
            let m = self.counts(r, &right);
            let (rel, rl) = self.right_element(r, &right);
            let budget = max - rl;
            let mut left = AlgebraElement::one();
            for (&x, &k) in &m {
                let exp = if x.is_vertex() { k } else { -k };
                if exp == 0 {
                    continue;
                }
                let p = match powers.get(&(x, exp, budget)) {
                    Some(p) => p.clone(),
                    None => {
                        let p = series_pow(&self.green(x).total(), &int(exp), budget)?;
                        powers.insert((x, exp, budget), p.clone());
                        p
                    }
                };
                left = left.multiply_truncated(&p, budget);
            }
            out = &out + &TensorElement::tensor(&left, &rel);
        }
        Ok(out)
    }

    /// `Π_e (G^e)^{q·N_e(r)}` for a rational `q`, truncated.
    fn edge_factor(&self, r: Residue, q: &Rational, max: u32) -> Result<AlgebraElement> {
        let t = self.theory();
        let mut out = AlgebraElement::one();
        for e in t.edge_ids() {
            let n = t.leg_count(r, e);
            if n == 0 {
                continue;
            }
            let p = series_pow(&self.green(Residue::Edge(e)).total(), &(q * int(n as i64)), max)?;
            out = out.multiply_truncated(&p, max);
        }
        Ok(out)
    }

    /// `X_v = (G^v / Π_e (G^e)^{N_e(v)/2})^{1/(N(v)−2)}`.
    pub fn x_element(&self, v: VertexKindId) -> Result<AlgebraElement> {
        let max = self.max_loops();
        let t = self.theory();
        let r = Residue::Vertex(v);
        let inner = self
            .green(r)
            .total()
            .multiply_truncated(&self.edge_factor(r, &Rational::new((-1).into(), 2.into()), max)?, max);
        series_pow(&inner, &Rational::new(1.into(), (t.total_valence(v) as i64 - 2).into()), max)
    }

    fn generator_series(&self, style: GeneratorStyle, v: VertexKindId, w: VertexKindId) -> Result<AlgebraElement> {
        let max = self.max_loops();
        match style {
            GeneratorStyle::Difference => Ok(&self.x_element(v)? - &self.x_element(w)?),
            GeneratorStyle::Polynomial => {
                let t = self.theory();
                let a = t.total_valence(w) as i64 - 2;
                let b = t.total_valence(v) as i64 - 2;
                let half = |k: i64| Rational::new(k.into(), 2.into());
                let lhs = series_pow(&self.green(Residue::Vertex(v)).total(), &int(a), max)?
                    .multiply_truncated(&self.edge_factor(Residue::Vertex(w), &half(b), max)?, max);
                let rhs = series_pow(&self.green(Residue::Vertex(w)).total(), &int(b), max)?
                    .multiply_truncated(&self.edge_factor(Residue::Vertex(v), &half(a), max)?, max);
                Ok(&lhs - &rhs)
            }
        }
    }

    /// Distinct generators of the catalog with their loop numbers.
    pub fn generators(&self) -> Vec<(GraphKey, u32)> {
        let mut seen: BTreeMap<GraphKey, u32> = BTreeMap::new();
        for (_, l, e) in self.catalog.iter() {
            seen.insert(e.class.clone(), l);
        }
        seen.into_iter().collect()
    }

    /// All monomials of degree exactly `d` in the catalog's generators.
    pub fn monomials(&self, d: u32) -> Vec<Monomial> {
        let gens = self.generators();
        let mut out = Vec::new();
        fn rec(gens: &[(GraphKey, u32)], from: usize, left: u32, cur: &mut Vec<GraphKey>, out: &mut Vec<Monomial>) {
            if left == 0 {
                out.push(Monomial::from_keys(cur.clone()));
                return;
            }
            for i in from..gens.len() {
                if gens[i].1 <= left {
                    cur.push(gens[i].0.clone());
                    rec(gens, i, left - gens[i].1, cur, out);
                    cur.pop();
                }
            }
        }
        rec(&gens, 0, d, &mut Vec::new(), &mut out);
        out
    }

    /// Spanning sets of the ideal generated by `X_v − X_{v'}` in every
    /// degree up to the catalog's loop order. Empty for a single vertex kind.
    pub fn ideal_basis(&self, style: GeneratorStyle) -> Result<IdealBasis> {
        let max = self.max_loops();
        let t = self.theory();
        let vs: Vec<VertexKindId> = t.vertex_ids().collect();
        let mut generators = Vec::new();
        for (i, &v) in vs.iter().enumerate() {
            for &w in &vs[i + 1..] {
                let s = self.generator_series(style, v, w)?;
                let name = match style {
                    GeneratorStyle::Difference => format!("X_{} - X_{}", t.vertex(v).name, t.vertex(w).name),
                    GeneratorStyle::Polynomial => format!("P({}, {})", t.vertex(v).name, t.vertex(w).name),
                };
                generators.push(IdealGenerator {
                    description: name,
                    components: (0..=max).map(|k| s.grade(k)).collect(),
                });
            }
        }
        let mut spanning = vec![Vec::new(); max as usize + 1];
        let mut reducer = Reducer::new();
        for n in 1..=max {
            for g in &generators {
                for k in 1..=n {
                    let gk = &g.components[k as usize];
                    if gk.is_zero() {
                        continue;
                    }
                    for m in self.monomials(n - k) {
                        let row = AlgebraElement::monomial(m, Rational::one()).multiply(gk);
                        reducer.insert(to_sparse(&row));
                        spanning[n as usize].push(row);
                    }
                }
            }
        }
        Ok(IdealBasis {
            style,
            max_loops: max,
            generators,
            spanning,
            reducer,
        })
    }

    /// `Δ(I) ⊆ I⊗H + H⊗I`, `ε(I) = 0` and `S(I) ⊆ I` on every homogeneous
    /// generator component.
    pub fn check_hopf_ideal(&self, basis: &IdealBasis) -> Result<Report> {
        let theory = &self.theory().name;
        let mut report = Report::new();
        for g in &basis.generators {
            for (k, gk) in g.components.iter().enumerate().skip(1) {
                let k = k as u32;
                let delta = self.hopf.coproduct(gk)?;
                let nf = basis.tensor_normal_form(&delta)?;
                report.push(
                    CheckRecord::new("coproduct-in-ideal", theory, nf.is_zero())
                        .degree(k)
                        .subject(&g.description)
                        .residual(nf.len()),
                );
                let eps = gk.counit();
                report.push(
                    CheckRecord::new("counit-vanishes", theory, eps.is_zero())
                        .degree(k)
                        .subject(&g.description),
                );
                let s = basis.normal_form(&self.hopf.antipode(gk)?)?;
                report.push(
                    CheckRecord::new("antipode-in-ideal", theory, s.is_zero())
                        .degree(k)
                        .subject(&g.description)
                        .residual(s.len()),
                );
            }
        }
        Ok(report)
    }

    /// `Δ(G^r) − Π_e (G^e)^{N_e(r)/2} Σ_L X_v^{2L+N(r)−2} ⊗ G^r_L` for the
    /// reference vertex `v`.
    pub fn closed_coproduct_residual(&self, r: Residue, v: VertexKindId) -> Result<TensorElement> {
        let max = self.max_loops();
        let t = self.theory();
        let green = self.green(r);
        let x = self.x_element(v)?;
        let mut rhs = TensorElement::zero();
        for l in 0..=max {
            let budget = max - l;
            let exp = 2 * l as i64 + t.residue_valence(r) as i64 - 2;
            let left = self
                .edge_factor(r, &Rational::new(1.into(), 2.into()), budget)?
                .multiply_truncated(&series_pow(&x, &int(exp), budget)?, budget);
            rhs = &rhs + &TensorElement::tensor(&left, &green.component(l));
        }
        Ok(&self.coproduct_green_direct(r)? - &rhs)
    }

    /// The residual above lies in `I⊗H` for every reference vertex; with a
    /// single vertex kind it must vanish outright.
    pub fn check_closed_coproduct(&self, r: Residue, basis: &IdealBasis) -> Result<Report> {
        let t = self.theory();
        let rname = t.residue_name(r).to_string();
        let mut report = Report::new();
        let mut residuals = Vec::new();
        for v in t.vertex_ids() {
            let res = self.closed_coproduct_residual(r, v)?;
            let nf = basis.left_normal_form(&res)?;
            report.push(
                CheckRecord::new("closed-coproduct", &t.name, nf.is_zero())
                    .residue(&rname)
                    .subject(format!("reference={}", t.vertex(v).name))
                    .residual(nf.len()),
            );
            residuals.push((v, res));
        }
        for w in residuals.windows(2) {
            let diff = &w[0].1 - &w[1].1;
            let nf = basis.left_normal_form(&diff)?;
            report.push(
                CheckRecord::new("reference-independence", &t.name, nf.is_zero())
                    .residue(&rname)
                    .subject(format!(
                        "{} vs {} (difference has {} terms)",
                        t.vertex(w[0].0).name,
                        t.vertex(w[1].0).name,
                        diff.len()
                    ))
                    .residual(nf.len()),
            );
        }
        Ok(report)
    }

    /// Direct, insertion-count and enhanced forms of `Δ(G^r)` compared
    /// exactly.
    pub fn check_proposition(&self, r: Residue) -> Result<Report> {
        let t = self.theory();
        let rname = t.residue_name(r).to_string();
        let direct = self.coproduct_green_direct(r)?;
        let prop = self.coproduct_green_prop(r)?;
        let enh = self.coproduct_green_enhanced(r)?;
        let mut report = Report::new();
        let d1 = &direct - &prop;
        report.push(
            CheckRecord::new("proposition", &t.name, d1.is_zero())
                .residue(&rname)
                .subject(format!("direct vs insertion formula ({} terms)", direct.len()))
                .residual(d1.len()),
        );
        let d2 = &direct - &enh;
        report.push(
            CheckRecord::new("enhanced", &t.name, d2.is_zero())
                .residue(&rname)
                .subject(format!("direct vs Green's-function powers ({} terms)", direct.len()))
                .residual(d2.len()),
        );
        Ok(report)
    }
}

fn collect_multisets(
    parts: &[(Residue, u32, &CatalogEntry)],
    from: usize,
    budget: u32,
    chosen: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    f(chosen);
    for i in from..parts.len() {
        let l = parts[i].1;
        if l <= budget {
            chosen.push(i);
            collect_multisets(parts, i, budget - l, chosen, f);
            chosen.pop();
        }
    }
}
