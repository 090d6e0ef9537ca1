//! Canonical labelling by colour refinement and an exhaustive
//! individualisation search.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::FeynmanGraph;

/// Byte string identifying an isomorphism class. The first byte is the loop
/// number, so byte order sorts by grade first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(Arc<[u8]>);

/// Key of a generator of the algebra.
pub type GraphKey = CanonicalForm;

impl CanonicalForm {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        CanonicalForm(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn loops(&self) -> u32 {
        self.0.first().copied().unwrap_or(0) as u32
    }

    /// Short stable identifier for display.
    pub fn short_id(&self) -> String {
        let digest = Sha256::digest(&self.0);
        format!("g{}", hex::encode(&digest[..5]))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        hex::decode(s).ok().map(|b| CanonicalForm(b.into()))
    }
}

impl fmt::Debug for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.short_id())
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short_id())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Labeled,
    Ranked,
    Unlabeled,
}

/// Form fixing external labels pointwise.
pub fn canonical_form(g: &FeynmanGraph) -> CanonicalForm {
    Canon::new(g, Mode::Labeled).run().0
}

/// Form where each label is replaced by its rank among the labels of the same
/// kind and role. Two components compare equal here when they match up to an
/// order-preserving renaming of their legs.
pub fn ranked_key(g: &FeynmanGraph) -> CanonicalForm {
    Canon::new(g, Mode::Ranked).run().0
}

/// Form ignoring external labels entirely: the class of the graph as a
/// generator of the algebra.
pub fn class_key(g: &FeynmanGraph) -> CanonicalForm {
    Canon::new(g, Mode::Unlabeled).run().0
}

/// Order of the automorphism group fixing external legs. For a disconnected
/// graph this is the product over components times `k!` for each class of
/// `k` isomorphic components.
pub fn sym(g: &FeynmanGraph) -> u64 {
    let comps = g.components();
    if comps.len() <= 1 {
        return connected_sym(g);
    }
    let mut classes: BTreeMap<CanonicalForm, u64> = BTreeMap::new();
    let mut total = 1u64;
    for c in g.split_components() {
        total *= connected_sym(&c);
        *classes.entry(ranked_key(&c)).or_default() += 1;
    }
    for k in classes.values() {
        total *= (1..=*k).product::<u64>();
    }
    total
}

fn connected_sym(g: &FeynmanGraph) -> u64 {
    let (_, vertex_aut) = Canon::new(g, Mode::Labeled).run();
    let mut parallel: BTreeMap<(usize, usize, u16), u64> = BTreeMap::new();
    let mut flips = 0u32;
    for (i, e) in g.edges.iter().enumerate() {
        let (a, b) = g.edge_vertices(i);
        let oriented = g.theory.edge(e.kind).oriented;
        let key = if oriented { (a, b, e.kind.0) } else { (a.min(b), a.max(b), e.kind.0) };
        *parallel.entry(key).or_default() += 1;
        if a == b && !oriented {
            flips += 1;
        }
    }
    let mut s = vertex_aut << flips;
    for m in parallel.values() {
        s *= (1..=*m).product::<u64>();
    }
    s
}

struct Canon {
    n: usize,
    loops: u8,
    /// Per-vertex encoded kind and external-leg descriptor.
    label: Vec<Vec<u8>>,
    /// (neighbour, edge type) seen from each vertex.
    adj: Vec<Vec<(usize, u32)>>,
    /// (u, v, kind, oriented)
    edges: Vec<(usize, usize, u16, bool)>,
}

fn push_u16(out: &mut Vec<u8>, x: usize) {
    out.extend_from_slice(&(x as u16).to_be_bytes());
}

impl Canon {
    fn new(g: &FeynmanGraph, mode: Mode) -> Self {
        let n = g.vertices.len();
        let t = &g.theory;
        let mut ext_at: Vec<Vec<(u16, u8, Vec<u8>)>> = vec![Vec::new(); n];
        let mut rank: Vec<usize> = vec![0; g.externals.len()];
        if mode == Mode::Ranked {
            let mut groups: BTreeMap<(u16, u8), Vec<(&str, usize)>> = BTreeMap::new();
            for (i, x) in g.externals.iter().enumerate() {
                let leg = g.half_edges[x.half_edge].leg;
                groups
                    .entry((leg.edge.0, leg.role as u8))
                    .or_default()
                    .push((x.label.as_str(), i));
            }
            for members in groups.values_mut() {
                members.sort();
                for (r, (_, i)) in members.iter().enumerate() {
                    rank[*i] = r;
                }
            }
        }
        for (i, x) in g.externals.iter().enumerate() {
            let h = g.half_edges[x.half_edge];
            let token = match mode {
                Mode::Labeled => {
                    let mut b = Vec::new();
                    push_u16(&mut b, x.label.len());
                    b.extend_from_slice(x.label.as_bytes());
                    b
                }
                Mode::Ranked => {
                    let mut b = Vec::new();
                    push_u16(&mut b, rank[i]);
                    b
                }
                Mode::Unlabeled => Vec::new(),
            };
            ext_at[h.vertex].push((h.leg.edge.0, h.leg.role as u8, token));
        }
        let label = g
            .vertices
            .iter()
            .zip(ext_at)
            .map(|(v, mut ext)| {
                ext.sort();
                let mut b = Vec::new();
                push_u16(&mut b, v.kind.0 as usize);
                b.push(ext.len() as u8);
                for (k, r, tok) in ext {
                    push_u16(&mut b, k as usize);
                    b.push(r);
                    b.extend_from_slice(&tok);
                }
                b
            })
            .collect();
        let mut adj = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(g.edges.len());
        for (i, e) in g.edges.iter().enumerate() {
            let (a, b) = g.edge_vertices(i);
            let oriented = t.edge(e.kind).oriented;
            let k = e.kind.0 as u32 * 8;
            if a == b {
                adj[a].push((a, k + if oriented { 4 } else { 3 }));
            } else if oriented {
                adj[a].push((b, k + 1));
                adj[b].push((a, k + 2));
            } else {
                adj[a].push((b, k));
                adj[b].push((a, k));
            }
            edges.push((a, b, e.kind.0, oriented));
        }
        Canon {
            n,
            loops: g.loop_number().min(255) as u8,
            label,
            adj,
            edges,
        }
    }

    /// Returns the canonical form and the number of colour-preserving vertex
    /// permutations that are automorphisms.
    fn run(&self) -> (CanonicalForm, u64) {
        let mut distinct: Vec<&Vec<u8>> = self.label.iter().collect();
        distinct.sort();
        distinct.dedup();
        let colors: Vec<u32> = self
            .label
            .iter()
            .map(|l| distinct.binary_search(&l).unwrap() as u32)
            .collect();
        let mut best: Option<Vec<u8>> = None;
        let mut count = 0u64;
        self.search(colors, &mut best, &mut count);
        let bytes = best.unwrap_or_else(|| self.encode(&[]));
        (CanonicalForm(bytes.into()), count.max(1))
    }

    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let mut cells = count_distinct(&colors);
        loop {
            let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..self.n)
                .map(|v| {
                    let mut s: Vec<(u32, u32)> = self.adj[v].iter().map(|&(w, t)| (colors[w], t)).collect();
                    s.sort_unstable();
                    (colors[v], s)
                })
                .collect();
            let mut sorted: Vec<&(u32, Vec<(u32, u32)>)> = sigs.iter().collect();
            sorted.sort();
            sorted.dedup();
            colors = sigs
                .iter()
                .map(|s| sorted.binary_search(&s).unwrap() as u32)
                .collect();
            if sorted.len() == cells {
                return colors;
            }
            cells = sorted.len();
        }
    }

    fn search(&self, colors: Vec<u32>, best: &mut Option<Vec<u8>>, count: &mut u64) {
        let colors = self.refine(colors);
        let mut size = vec![0usize; self.n];
        for &c in &colors {
            size[c as usize] += 1;
        }
        match (0..self.n).find(|&c| size[c] > 1) {
            None => {
                let enc = self.encode(&colors);
                match best {
                    Some(b) if enc > *b => {}
                    Some(b) if enc == *b => *count += 1,
                    _ => {
                        *best = Some(enc);
                        *count = 1;
                    }
                }
            }
            Some(cell) => {
                for v in 0..self.n {
                    if colors[v] as usize != cell {
                        continue;
                    }
                    let mut next: Vec<u32> = colors.iter().map(|&c| 2 * c + 1).collect();
                    next[v] -= 1;
                    self.search(next, best, count);
                }
            }
        }
    }

    fn encode(&self, position: &[u32]) -> Vec<u8> {
        let mut out = vec![self.loops];
        push_u16(&mut out, self.n);
        push_u16(&mut out, self.edges.len());
        let mut order = vec![0usize; self.n];
        for (v, &p) in position.iter().enumerate() {
            order[p as usize] = v;
        }
        for &v in &order {
            out.extend_from_slice(&self.label[v]);
        }
        let mut es: Vec<(u32, u32, u16)> = self
            .edges
            .iter()
            .map(|&(a, b, k, oriented)| {
                let (pa, pb) = (position[a], position[b]);
                if oriented {
                    (pa, pb, k)
                } else {
                    (pa.min(pb), pa.max(pb), k)
                }
            })
            .collect();
        es.sort_unstable();
        for (a, b, k) in es {
            push_u16(&mut out, a as usize);
            push_u16(&mut out, b as usize);
            push_u16(&mut out, k as usize);
        }
        out
    }
}

fn count_distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}
