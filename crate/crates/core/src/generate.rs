//! Exhaustive generation of connected 1PI graphs by residue and loop order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::{CheckRecord, Report};
use crate::graph::{canonical_form, class_key, serialize_graph, sym, CanonicalForm, FeynmanGraph, GraphBuilder, GraphKey};
use crate::theory::{Leg, Residue, Role, Theory, VertexKindId};

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// Maximum number of complete matchings examined per call.
    pub cap: u64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { cap: DEFAULT_CAP }
    }
}

/// External labels used for generated graphs: `1..N` in residue-leg order.
pub fn external_labels(t: &Theory, r: Residue) -> Vec<(String, Leg)> {
    t.residue_legs(r)
        .into_iter()
        .enumerate()
        .map(|(i, l)| ((i + 1).to_string(), l))
        .collect()
}

/// Vertex-kind multisets with `Σ (N(v)−2) m_v = 2L + N(r) − 2` whose
/// half-edges can be paired.
pub fn vertex_multisets(t: &Theory, r: Residue, loops: u32) -> Vec<Vec<u32>> {
    let target = 2 * loops as i64 + t.residue_valence(r) as i64 - 2;
    let weights: Vec<i64> = t.vertex_ids().map(|v| t.total_valence(v) as i64 - 2).collect();
    let mut out = Vec::new();
    let mut cur = vec![0u32; weights.len()];
    fn rec(i: usize, left: i64, w: &[i64], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == w.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut k = 0;
        while k as i64 * w[i] <= left {
            cur[i] = k;
            rec(i + 1, left - k as i64 * w[i], w, cur, out);
            k += 1;
        }
        cur[i] = 0;
    }
    rec(0, target, &weights, &mut cur, &mut out);
    out.retain(|m| balanced(t, r, m));
    out
}

fn balanced(t: &Theory, r: Residue, m: &[u32]) -> bool {
    let ext = t.residue_legs(r);
    t.edge_ids().all(|e| {
        let count = |role: Role| -> i64 {
            let at_vertices: i64 = t
                .vertex_ids()
                .map(|v| {
                    t.vertex(v).legs.iter().filter(|l| l.edge == e && l.role == role).count() as i64
                        * m[v.0 as usize] as i64
                })
                .sum();
            at_vertices - ext.iter().filter(|l| l.edge == e && l.role == role).count() as i64
        };
        let (p, i, o) = (count(Role::Plain), count(Role::In), count(Role::Out));
        p >= 0 && i >= 0 && o >= 0 && p % 2 == 0 && i == o
    })
}

struct Slots {
    kinds: Vec<VertexKindId>,
    /// Legs of each vertex, sorted.
    legs: Vec<Vec<Leg>>,
}

struct State<'a> {
    slots: &'a Slots,
    free: Vec<Vec<bool>>,
    touched: Vec<bool>,
    edges: Vec<(usize, usize, Leg)>,
    externals: Vec<(usize, Leg)>,
}

impl State<'_> {
    fn first_free(&self, v: usize, leg: Leg) -> Option<usize> {
        (0..self.slots.legs[v].len()).find(|&i| self.free[v][i] && self.slots.legs[v][i] == leg)
    }

    /// Vertices that may receive a new half-edge of `leg`: touched ones, and
    /// the lowest untouched one of each kind.
    fn targets(&self, leg: Leg, from: usize) -> Vec<usize> {
        let mut seen_kind: Vec<VertexKindId> = Vec::new();
        let mut out = Vec::new();
        for v in from..self.slots.kinds.len() {
            if !self.touched[v] {
                let k = self.slots.kinds[v];
                if seen_kind.contains(&k) {
                    continue;
                }
                seen_kind.push(k);
            }
            if self.first_free(v, leg).is_some() {
                out.push(v);
            }
        }
        out
    }
}

fn build_graph(t: &Arc<Theory>, st: &State, labels: &[(String, Leg)]) -> Result<FeynmanGraph> {
    let mut b = GraphBuilder::new(t.clone());
    for (i, k) in st.slots.kinds.iter().enumerate() {
        b.vertex(format!("v{i}"), *k);
    }
    for (i, &(a, c, leg)) in st.edges.iter().enumerate() {
        // `a` holds `leg`; an In role there means the line points into `a`.
        if leg.role == Role::In {
            b.edge(format!("e{i}"), leg.edge, c, a);
        } else {
            b.edge(format!("e{i}"), leg.edge, a, c);
        }
    }
    for ((label, _), &(v, leg)) in labels.iter().zip(&st.externals) {
        b.external(label.clone(), leg, v);
    }
    b.build()
}

struct Search<'a> {
    theory: &'a Arc<Theory>,
    labels: &'a [(String, Leg)],
    counter: &'a AtomicU64,
    cap: u64,
    found: BTreeMap<CanonicalForm, FeynmanGraph>,
}

impl Search<'_> {
    fn place_externals(&mut self, st: &mut State, i: usize) -> Result<()> {
        if i == self.labels.len() {
            return self.pair(st, None);
        }
        let leg = self.labels[i].1;
        for v in st.targets(leg, 0) {
            let s = st.first_free(v, leg).unwrap();
            let was = st.touched[v];
            st.free[v][s] = false;
            st.touched[v] = true;
            st.externals.push((v, leg));
            self.place_externals(st, i + 1)?;
            st.externals.pop();
            st.touched[v] = was;
            st.free[v][s] = true;
        }
        Ok(())
    }

    /// `last` is the previous pairing's (vertex, leg, partner vertex).
    fn pair(&mut self, st: &mut State, last: Option<(usize, Leg, usize)>) -> Result<()> {
        let n = st.slots.kinds.len();
        let Some((v, s)) = (0..n).find_map(|v| st.free[v].iter().position(|&f| f).map(|s| (v, s))) else {
            let seen = self.counter.fetch_add(1, Ordering::Relaxed) + 1;
            if seen > self.cap {
                return Err(Error::ResourceLimit { cap: self.cap });
            }
            let g = build_graph(self.theory, st, self.labels)?;
            if g.is_1pi() {
                self.found.entry(canonical_form(&g)).or_insert(g);
            }
            return Ok(());
        };
        let leg = st.slots.legs[v][s];
        let want = Leg {
            edge: leg.edge,
            role: leg.role.partner(),
        };
        let min_partner = match last {
            Some((lv, ll, lw)) if lv == v && ll == leg => lw,
            _ => v,
        };
        st.free[v][s] = false;
        let was_v = st.touched[v];
        st.touched[v] = true;
        for w in st.targets(want, min_partner) {
            let p = st.first_free(w, want).unwrap();
            let was_w = st.touched[w];
            st.free[w][p] = false;
            st.touched[w] = true;
            st.edges.push((v, w, leg));
            self.pair(st, Some((v, leg, w)))?;
            st.edges.pop();
            st.touched[w] = was_w;
            st.free[w][p] = true;
        }
        st.touched[v] = was_v;
        st.free[v][s] = true;
        Ok(())
    }
}

fn generate_for_multiset(
    t: &Arc<Theory>,
    labels: &[(String, Leg)],
    m: &[u32],
    counter: &AtomicU64,
    cap: u64,
) -> Result<BTreeMap<CanonicalForm, FeynmanGraph>> {
    let mut kinds = Vec::new();
    for v in t.vertex_ids() {
        for _ in 0..m[v.0 as usize] {
            kinds.push(v);
        }
    }
    let legs: Vec<Vec<Leg>> = kinds.iter().map(|&k| t.vertex(k).sorted_legs()).collect();
    let slots = Slots { kinds, legs };
    let mut st = State {
        free: slots.legs.iter().map(|l| vec![true; l.len()]).collect(),
        touched: vec![false; slots.kinds.len()],
        slots: &slots,
        edges: Vec::new(),
        externals: Vec::new(),
    };
    let mut search = Search {
        theory: t,
        labels,
        counter,
        cap,
        found: BTreeMap::new(),
    };
    search.place_externals(&mut st, 0)?;
    Ok(search.found)
}

/// All connected 1PI graphs of residue `r` with `loops` loops, one per
/// isomorphism class, sorted by canonical form, with their symmetry factors.
pub fn generate(t: &Arc<Theory>, r: Residue, loops: u32, opts: &GenerateOptions) -> Result<Vec<(FeynmanGraph, u64)>> {
    if loops == 0 {
        return Ok(Vec::new());
    }
    let labels = external_labels(t, r);
    let counter = AtomicU64::new(0);
    let parts: Vec<BTreeMap<CanonicalForm, FeynmanGraph>> = vertex_multisets(t, r, loops)
        .par_iter()
        .map(|m| generate_for_multiset(t, &labels, m, &counter, opts.cap))
        .collect::<Result<_>>()?;
    let mut all = BTreeMap::new();
    for p in parts {
        all.extend(p);
    }
    Ok(all
        .into_values()
        .map(|g| {
            let s = sym(&g);
            (g, s)
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    /// Display name `<residue>-<loops>-<index>`.
    pub name: String,
    pub graph: FeynmanGraph,
    pub sym: u64,
    pub form: CanonicalForm,
    pub class: GraphKey,
}

/// Generated graphs for every residue and loop order up to `max_loops`.
#[derive(Debug, Clone)]
pub struct GraphCatalog {
    pub theory: Arc<Theory>,
    pub max_loops: u32,
    pub entries: BTreeMap<(Residue, u32), Vec<CatalogEntry>>,
}

impl GraphCatalog {
    pub fn get(&self, r: Residue, loops: u32) -> &[CatalogEntry] {
        self.entries.get(&(r, loops)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Residue, u32, &CatalogEntry)> {
        self.entries
            .iter()
            .flat_map(|(&(r, l), es)| es.iter().map(move |e| (r, l, e)))
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn catalog(t: &Arc<Theory>, max_loops: u32, opts: &GenerateOptions) -> Result<GraphCatalog> {
    let mut entries = BTreeMap::new();
    for r in t.residues() {
        for l in 1..=max_loops {
            let list = generate(t, r, l, opts)?
                .into_iter()
                .enumerate()
                .map(|(i, (mut g, s))| {
                    let name = format!("{}-{}-{}", t.residue_name(r), l, i + 1);
                    g.set_name(Some(name.clone()));
                    CatalogEntry {
                        name,
                        form: canonical_form(&g),
                        class: class_key(&g),
                        graph: g,
                        sym: s,
                    }
                })
                .collect();
            entries.insert((r, l), list);
        }
    }
    Ok(GraphCatalog {
        theory: t.clone(),
        max_loops,
        entries,
    })
}

/// Checks both counting identities on every entry: half-lines per edge
/// kind, `2 m_e + N_e(r) = Σ N_e(v) m_v`, and the loop identity
/// `Σ (N(v)−2) m_v = 2L + N(r) − 2`.
pub fn check_counting(c: &GraphCatalog) -> Report {
    let t = &c.theory;
    let mut report = Report::new();
    for (r, l, e) in c.iter() {
        let g = &e.graph;
        let half_lines = t.edge_ids().all(|k| {
            let internal = g.edges().iter().filter(|x| x.kind == k).count() as i64;
            let at_vertices: i64 = g
                .vertices()
                .iter()
                .map(|v| t.leg_count(Residue::Vertex(v.kind), k) as i64)
                .sum();
            2 * internal + t.leg_count(r, k) as i64 == at_vertices
        });
        let weighted: i64 = g.vertices().iter().map(|v| t.total_valence(v.kind) as i64 - 2).sum();
        let loops = weighted == 2 * l as i64 + t.residue_valence(r) as i64 - 2 && g.loop_number() == l;
        let residue = t.residue_name(r);
        report.push(CheckRecord::new("half-lines", &t.name, half_lines).residue(residue).degree(l).subject(e.name.clone()));
        report.push(CheckRecord::new("loop-identity", &t.name, loops).residue(residue).degree(l).subject(e.name.clone()));
    }
    report
}

/// Writes one graph file per entry plus an `index` file with lines
/// `<file> <residue> <loops> <canonical key> <sym>`.
pub fn export(c: &GraphCatalog, dir: &Path) -> Result<()> {
    let io = |p: &Path, e: std::io::Error| Error::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut index = String::new();
    for (r, l, e) in c.iter() {
        let path = dir.join(&e.name);
        fs::write(&path, serialize_graph(&e.graph)).map_err(|err| io(&path, err))?;
        index.push_str(&format!(
            "{} {} {} {} {}\n",
            e.name,
            c.theory.residue_name(r),
            l,
            e.form.to_hex(),
            e.sym
        ));
    }
    let path = dir.join("index");
    fs::write(&path, index).map_err(|err| io(&path, err))
}
