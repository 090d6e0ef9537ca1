//! Admissible subgraphs, their contraction, and insertion counting.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::{FeynmanGraph, GraphBuilder};
use crate::theory::{Residue, Role, Theory};

/// Largest number of internal edges the subset search accepts.
pub const MAX_EDGES: usize = 40;

/// One connected 1PI piece of an occurrence.
#[derive(Debug, Clone)]
pub struct Component {
    /// Sorted internal edge indices of the ambient graph.
    pub edges: Vec<usize>,
    /// Sorted vertex indices of the ambient graph.
    pub vertices: Vec<usize>,
    /// The induced graph; cut half-edges and ambient legs are its externals.
    pub graph: FeynmanGraph,
    pub residue: Residue,
}

/// A disjoint union of 1PI subgraphs with residues in the theory.
#[derive(Debug, Clone)]
pub struct SubgraphOccurrence {
    pub edges: Vec<usize>,
    pub components: Vec<Component>,
}

impl SubgraphOccurrence {
    pub fn loop_number(&self) -> u32 {
        self.components.iter().map(|c| c.graph.loop_number()).sum()
    }

    pub fn graphs(&self) -> Vec<FeynmanGraph> {
        self.components.iter().map(|c| c.graph.clone()).collect()
    }
}

struct Candidate {
    edge_mask: u64,
    vertex_mask: u64,
}

fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Connected, bridgeless, loopful edge subsets whose collapse is a residue.
fn candidates(g: &FeynmanGraph) -> Result<Vec<Candidate>> {
    let ne = g.edges().len();
    if ne > MAX_EDGES || g.vertices().len() > 64 {
        return Err(Error::Precondition(format!(
            "subgraph search supports at most {MAX_EDGES} internal edges"
        )));
    }
    let ends: Vec<(usize, usize)> = (0..ne).map(|e| g.edge_vertices(e)).collect();
    let inc = g.incidence();
    let owner = g.edge_of_half_edge();
    let t = g.theory();
    let full = if ne == 64 { u64::MAX } else { (1u64 << ne) - 1 };
    let mut out = Vec::new();
    for mask in 1..=full {
        let es = bits(mask);
        let mut vmask = 0u64;
        for &e in &es {
            vmask |= 1 << ends[e].0 | 1 << ends[e].1;
        }
        let nv = vmask.count_ones() as usize;
        if es.len() < nv || connected_count(&ends, &es, None, vmask) != 1 {
            continue;
        }
        if es
            .iter()
            .any(|&skip| connected_count(&ends, &es, Some(skip), vmask) != 1)
        {
            continue;
        }
        let mut legs = Vec::new();
        for v in bits(vmask) {
            for &h in &inc[v] {
                if !owner[h].is_some_and(|e| mask >> e & 1 == 1) {
                    legs.push(g.half_edges()[h].leg);
                }
            }
        }
        if t.residue_of_legs(&legs).is_some() {
            out.push(Candidate {
                edge_mask: mask,
                vertex_mask: vmask,
            });
        }
    }
    Ok(out)
}

fn connected_count(ends: &[(usize, usize)], es: &[usize], skip: Option<usize>, vmask: u64) -> usize {
    let mut parent: Vec<usize> = (0..64).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = vmask.count_ones() as usize;
    for &e in es {
        if Some(e) == skip {
            continue;
        }
        let (a, b) = (find(&mut parent, ends[e].0), find(&mut parent, ends[e].1));
        if a != b {
            parent[a] = b;
            comps -= 1;
        }
    }
    comps
}

/// All proper nonempty occurrences in `g`, sorted by edge subset.
pub fn enumerate_subgraphs(g: &FeynmanGraph) -> Result<Vec<SubgraphOccurrence>> {
    let cands = candidates(g)?;
    let ne = g.edges().len();
    let full = if ne == 64 { u64::MAX } else { (1u64 << ne) - 1 };
    let mut picks: Vec<Vec<usize>> = Vec::new();
    let mut stack = Vec::new();
    fn rec(cands: &[Candidate], from: usize, used: u64, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for i in from..cands.len() {
            if cands[i].vertex_mask & used != 0 {
                continue;
            }
            stack.push(i);
            out.push(stack.clone());
            rec(cands, i + 1, used | cands[i].vertex_mask, stack, out);
            stack.pop();
        }
    }
    rec(&cands, 0, 0, &mut stack, &mut picks);
    let mut occs: Vec<(u64, SubgraphOccurrence)> = picks
        .into_iter()
        .filter_map(|pick| {
            let mask = pick.iter().fold(0u64, |m, &i| m | cands[i].edge_mask);
            if mask == full {
                return None;
            }
            let mut components: Vec<Component> = pick
                .iter()
                .map(|&i| {
                    let c = &cands[i];
                    let edges = bits(c.edge_mask);
                    let vertices = bits(c.vertex_mask);
                    let graph = g.induced(&vertices, &edges);
                    let residue = graph.residue().expect("candidate has a residue");
                    Component {
                        edges,
                        vertices,
                        graph,
                        residue,
                    }
                })
                .collect();
            components.sort_by(|a, b| a.edges.cmp(&b.edges));
            Some((
                mask,
                SubgraphOccurrence {
                    edges: bits(mask),
                    components,
                },
            ))
        })
        .collect();
    occs.sort_by(|a, b| a.1.edges.cmp(&b.1.edges));
    Ok(occs.into_iter().map(|(_, o)| o).collect())
}

enum Far {
    Half(usize),
    External,
}

/// `Γ/γ`: each vertex-type component becomes one vertex, each edge-type
/// component is removed and the lines through it are joined into one edge.
pub fn contract(g: &FeynmanGraph, occ: &SubgraphOccurrence) -> Result<FeynmanGraph> {
    let nh = g.half_edges().len();
    let owner = g.edge_of_half_edge();
    let inc = g.incidence();
    let mut in_s = vec![false; g.edges().len()];
    for &e in &occ.edges {
        in_s[e] = true;
    }
    // comp_of_vertex: Some(component index)
    let mut comp_of = vec![None; g.vertices().len()];
    for (ci, c) in occ.components.iter().enumerate() {
        for &v in &c.vertices {
            comp_of[v] = Some(ci);
        }
    }
    // Stubs of edge-type components, pairwise linked.
    let mut other_stub = vec![usize::MAX; nh];
    for (ci, c) in occ.components.iter().enumerate() {
        if c.residue.is_vertex() {
            continue;
        }
        let stubs: Vec<usize> = c
            .vertices
            .iter()
            .flat_map(|&v| inc[v].iter().copied())
            .filter(|&h| !owner[h].is_some_and(|e| in_s[e]))
            .collect();
        if stubs.len() != 2 {
            return Err(Error::Precondition(format!(
                "edge-type component {ci} has {} external legs",
                stubs.len()
            )));
        }
        other_stub[stubs[0]] = stubs[1];
        other_stub[stubs[1]] = stubs[0];
    }
    let ext_label: BTreeMap<usize, &str> = g
        .externals()
        .iter()
        .map(|x| (x.half_edge, x.label.as_str()))
        .collect();
    let partner = |h: usize| -> Option<usize> {
        owner[h].map(|e| {
            let [a, b] = g.edges()[e].ends;
            if a == h {
                b
            } else {
                a
            }
        })
    };
    // Walks from a stub through its component and onward.
    let through = |mut stub: usize| -> Result<Far> {
        for _ in 0..=nh {
            let q = other_stub[stub];
            if ext_label.contains_key(&q) {
                return Ok(Far::External);
            }
            let p = partner(q).expect("internal stub");
            if other_stub[p] == usize::MAX {
                return Ok(Far::Half(p));
            }
            stub = p;
        }
        Err(Error::Precondition("edge-type components form a closed cycle".into()))
    };
    let is_stub = |h: usize| other_stub[h] != usize::MAX;

    let t = g.theory();
    let mut b = GraphBuilder::new(t.clone());
    if let Some(n) = g.name() {
        b.name(n);
    }
    let mut new_vertex = vec![usize::MAX; g.vertices().len()];
    let mut comp_vertex = vec![usize::MAX; occ.components.len()];
    for (v, vert) in g.vertices().iter().enumerate() {
        match comp_of[v] {
            None => new_vertex[v] = b.vertex(vert.name.clone(), vert.kind),
            Some(ci) => {
                let c = &occ.components[ci];
                if let Residue::Vertex(kind) = c.residue {
                    if comp_vertex[ci] == usize::MAX {
                        let names: Vec<&str> = c.vertices.iter().map(|&w| g.vertices()[w].name.as_str()).collect();
                        comp_vertex[ci] = b.vertex(names.join("+"), kind);
                    }
                    new_vertex[v] = comp_vertex[ci];
                }
            }
        }
    }
    let hv = |h: usize| new_vertex[g.half_edges()[h].vertex];
    for (ei, e) in g.edges().iter().enumerate() {
        if in_s[ei] {
            continue;
        }
        let [x, y] = e.ends;
        match (is_stub(x), is_stub(y)) {
            (false, false) => {
                b.edge(e.name.clone(), e.kind, hv(x), hv(y));
            }
            (true, true) => {}
            (sx, _) => {
                let (kept, stub) = if sx { (y, x) } else { (x, y) };
                if let Far::Half(p) = through(stub)? {
                    if kept <= p {
                        let other = owner[p].map(|f| g.edges()[f].name.as_str()).unwrap_or("");
                        let name = if kept == p { e.name.clone() } else { format!("{}~{}", e.name, other) };
                        let role = g.half_edges()[kept].leg.role;
                        let (tail, head) = if role == Role::In { (p, kept) } else { (kept, p) };
                        b.edge(name, e.kind, hv(tail), hv(head));
                    }
                }
            }
        }
    }
    for x in g.externals() {
        let h = x.half_edge;
        let k = if is_stub(h) {
            match through(h)? {
                Far::Half(p) => p,
                Far::External => {
                    return Err(Error::Precondition("contraction leaves no vertex".into()));
                }
            }
        } else {
            h
        };
        b.external(x.label.clone(), g.half_edges()[k].leg, hv(k));
    }
    b.build()
}

/// Residue → count, with every residue of the theory present.
pub type ResidueCounts = BTreeMap<Residue, i64>;

fn zero_counts(t: &Theory) -> ResidueCounts {
    t.residues().into_iter().map(|r| (r, 0)).collect()
}

/// `m_{Γ,r}`: vertices of each kind and internal edges of each kind.
pub fn component_counts(g: &FeynmanGraph) -> ResidueCounts {
    let mut m = zero_counts(g.theory());
    let (mv, me) = g.kind_counts();
    for v in g.theory().vertex_ids() {
        m.insert(Residue::Vertex(v), mv[v.0 as usize] as i64);
    }
    for e in g.theory().edge_ids() {
        m.insert(Residue::Edge(e), me[e.0 as usize] as i64);
    }
    m
}

/// `n_{γ,r}`: how many parts have residue `r`.
pub fn part_counts(t: &Theory, parts: &[FeynmanGraph]) -> Result<ResidueCounts> {
    let mut n = zero_counts(t);
    for p in parts {
        *n.entry(p.residue()?).or_default() += 1;
    }
    Ok(n)
}

/// `Π_v n_v!·C(m_v, n_v) · Π_e n_e!·C(m_e+n_e−1, n_e)` with generalized
/// binomials, so negative formal counts are allowed.
pub fn insertion_places(m: &ResidueCounts, n: &ResidueCounts) -> BigInt {
    let mut total = BigInt::one();
    for (r, &k) in n {
        let a = m.get(r).copied().unwrap_or(0);
        for i in 0..k {
            let f = if r.is_vertex() { a - i } else { a + i };
            total *= BigInt::from(f);
        }
    }
    total
}

/// `Γ|γ` for a multiset of connected 1PI parts.
pub fn count_insertion_places(big: &FeynmanGraph, parts: &[FeynmanGraph]) -> Result<BigInt> {
    let n = part_counts(big.theory(), parts)?;
    Ok(insertion_places(&component_counts(big), &n))
}
