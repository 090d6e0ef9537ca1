//! Feynman graphs as typed half-edge multigraphs with labelled external legs.
//!
//! Graph files are line oriented:
//!
//! ```text
//! theory qed
//! name se1                      # optional display name
//! vertex a qed
//! vertex b qed
//! edge e1 electron a b          # tail then head for oriented kinds
//! edge p1 photon a b
//! ext in electron.in a          # role is as seen from the vertex
//! ext out electron.out b
//! ```
//!
//! A file with only a `theory` line (or nothing at all) is the empty graph.

mod canon;

pub use canon::{canonical_form, class_key, ranked_key, sym, CanonicalForm, GraphKey};

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::theory::{EdgeKindId, Leg, Residue, Role, Theory, VertexKindId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub kind: VertexKindId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfEdge {
    pub vertex: usize,
    pub leg: Leg,
}

/// An internal edge. For oriented kinds `ends[0]` is the tail half-edge and
/// `ends[1]` the head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub kind: EdgeKindId,
    pub ends: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct External {
    pub label: String,
    pub half_edge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeynmanGraph {
    theory: Arc<Theory>,
    name: Option<String>,
    vertices: Vec<Vertex>,
    half_edges: Vec<HalfEdge>,
    edges: Vec<Edge>,
    externals: Vec<External>,
}

/// Incremental constructor; `build` checks every vertex against its kind.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    graph: FeynmanGraph,
}

impl GraphBuilder {
    pub fn new(theory: Arc<Theory>) -> Self {
        GraphBuilder {
            graph: FeynmanGraph {
                theory,
                name: None,
                vertices: Vec::new(),
                half_edges: Vec::new(),
                edges: Vec::new(),
                externals: Vec::new(),
            },
        }
    }

    pub fn name(&mut self, name: impl Into<String>) -> &mut Self {
        self.graph.name = Some(name.into());
        self
    }

    pub fn vertex(&mut self, name: impl Into<String>, kind: VertexKindId) -> usize {
        self.graph.vertices.push(Vertex {
            name: name.into(),
            kind,
        });
        self.graph.vertices.len() - 1
    }

    /// Adds an internal edge; for oriented kinds it runs `tail -> head`.
    pub fn edge(&mut self, name: impl Into<String>, kind: EdgeKindId, tail: usize, head: usize) -> usize {
        let (rt, rh) = if self.graph.theory.edge(kind).oriented {
            (Role::Out, Role::In)
        } else {
            (Role::Plain, Role::Plain)
        };
        let g = &mut self.graph;
        g.half_edges.push(HalfEdge {
            vertex: tail,
            leg: Leg { edge: kind, role: rt },
        });
        g.half_edges.push(HalfEdge {
            vertex: head,
            leg: Leg { edge: kind, role: rh },
        });
        let n = g.half_edges.len();
        g.edges.push(Edge {
            name: name.into(),
            kind,
            ends: [n - 2, n - 1],
        });
        g.edges.len() - 1
    }

    pub fn external(&mut self, label: impl Into<String>, leg: Leg, vertex: usize) -> usize {
        let g = &mut self.graph;
        g.half_edges.push(HalfEdge { vertex, leg });
        g.externals.push(External {
            label: label.into(),
            half_edge: g.half_edges.len() - 1,
        });
        g.externals.len() - 1
    }

    pub fn build(self) -> Result<FeynmanGraph> {
        let g = self.graph;
        let t = &g.theory;
        let n = g.vertices.len();
        let mut at: Vec<Vec<Leg>> = vec![Vec::new(); n];
        for h in &g.half_edges {
            if h.vertex >= n {
                return Err(Error::invalid("graph", "half-edge attached to a missing vertex"));
            }
            at[h.vertex].push(h.leg);
        }
        for (i, v) in g.vertices.iter().enumerate() {
            let mut legs = std::mem::take(&mut at[i]);
            legs.sort();
            if legs != t.vertex(v.kind).sorted_legs() {
                let found: Vec<String> = legs.iter().map(|&l| t.leg_name(l)).collect();
                return Err(Error::invalid(
                    "graph",
                    format!(
                        "valence mismatch at vertex `{}` of kind `{}`: has {{{}}}",
                        v.name,
                        t.vertex(v.kind).name,
                        found.join(", ")
                    ),
                ));
            }
        }
        for (i, x) in g.externals.iter().enumerate() {
            if g.externals[..i].iter().any(|y| y.label == x.label) {
                return Err(Error::invalid("graph", format!("duplicate external label `{}`", x.label)));
            }
        }
        Ok(g)
    }
}

impl FeynmanGraph {
    pub fn empty(theory: Arc<Theory>) -> Self {
        GraphBuilder::new(theory).graph
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn set_name(&mut self, name: Option<String>) {
        self.name = name;
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn half_edges(&self) -> &[HalfEdge] {
        &self.half_edges
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn externals(&self) -> &[External] {
        &self.externals
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Half-edges grouped by vertex.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for (i, h) in self.half_edges.iter().enumerate() {
            inc[h.vertex].push(i);
        }
        inc
    }

    /// For each half-edge, the edge index it belongs to (None for externals).
    pub fn edge_of_half_edge(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.half_edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            owner[e.ends[0]] = Some(i);
            owner[e.ends[1]] = Some(i);
        }
        owner
    }

    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        let [a, b] = self.edges[e].ends;
        (self.half_edges[a].vertex, self.half_edges[b].vertex)
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_without(None)
    }

    fn components_without(&self, skip_edge: Option<usize>) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for (i, _) in self.edges.iter().enumerate() {
            if Some(i) == skip_edge {
                continue;
            }
            let (a, b) = self.edge_vertices(i);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            let idx = *slot.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[idx].push(v);
        }
        groups
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// First Betti number: `|E| - |V| + #components`.
    pub fn loop_number(&self) -> u32 {
        (self.edges.len() + self.components().len() - self.vertices.len()) as u32
    }

    /// Connected, not a tree, and no internal edge is a bridge.
    pub fn is_1pi(&self) -> bool {
        if self.is_empty() || !self.is_connected() || self.loop_number() == 0 {
            return false;
        }
        (0..self.edges.len()).all(|e| self.components_without(Some(e)).len() == 1)
    }

    pub fn external_legs(&self) -> Vec<Leg> {
        self.externals
            .iter()
            .map(|x| self.half_edges[x.half_edge].leg)
            .collect()
    }

    /// The element of `R` the graph collapses to.
    pub fn residue(&self) -> Result<Residue> {
        if self.is_empty() {
            return Err(Error::Precondition("the empty graph has no residue".into()));
        }
        if !self.is_connected() {
            return Err(Error::Precondition("residue of a disconnected graph".into()));
        }
        let legs = self.external_legs();
        self.theory.residue_of_legs(&legs).ok_or_else(|| {
            let names: Vec<String> = legs.iter().map(|&l| self.theory.leg_name(l)).collect();
            Error::NoResidue(format!("external legs {{{}}}", names.join(", ")))
        })
    }

    /// `m_{Γ,r}`: vertices per vertex kind and internal edges per edge kind.
    pub fn kind_counts(&self) -> (Vec<u32>, Vec<u32>) {
        let mut mv = vec![0u32; self.theory.vertex_kinds.len()];
        let mut me = vec![0u32; self.theory.edge_kinds.len()];
        for v in &self.vertices {
            mv[v.kind.0 as usize] += 1;
        }
        for e in &self.edges {
            me[e.kind.0 as usize] += 1;
        }
        (mv, me)
    }

    /// The induced graph on a vertex subset, keeping only the listed internal
    /// edges. Every other half-edge at those vertices becomes an external leg;
    /// ambient external legs keep their label, cut edges get `~<edge>.<end>`.
    pub fn induced(&self, vertex_set: &[usize], edge_set: &[usize]) -> FeynmanGraph {
        let mut b = GraphBuilder::new(self.theory.clone());
        let mut map = vec![usize::MAX; self.vertices.len()];
        for &v in vertex_set {
            map[v] = b.vertex(self.vertices[v].name.clone(), self.vertices[v].kind);
        }
        let mut used = vec![false; self.half_edges.len()];
        for &e in edge_set {
            let edge = &self.edges[e];
            let (t, h) = self.edge_vertices(e);
            b.edge(edge.name.clone(), edge.kind, map[t], map[h]);
            used[edge.ends[0]] = true;
            used[edge.ends[1]] = true;
        }
        let owner = self.edge_of_half_edge();
        let ext_label: HashMap<usize, &str> = self
            .externals
            .iter()
            .map(|x| (x.half_edge, x.label.as_str()))
            .collect();
        for (i, h) in self.half_edges.iter().enumerate() {
            if used[i] || map[h.vertex] == usize::MAX {
                continue;
            }
            let label = match ext_label.get(&i) {
                Some(l) => l.to_string(),
                None => {
                    let e = owner[i].expect("half-edge is internal or external");
                    let end = if self.edges[e].ends[0] == i { 0 } else { 1 };
                    format!("~{}.{}", self.edges[e].name, end)
                }
            };
            b.external(label, h.leg, map[h.vertex]);
        }
        b.graph
    }

    /// Splits into connected components, each a graph on its own.
    pub fn split_components(&self) -> Vec<FeynmanGraph> {
        let comps = self.components();
        let mut comp_of = vec![0usize; self.vertices.len()];
        for (ci, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = ci;
            }
        }
        let mut edges_of = vec![Vec::new(); comps.len()];
        for e in 0..self.edges.len() {
            let (a, _) = self.edge_vertices(e);
            edges_of[comp_of[a]].push(e);
        }
        comps
            .iter()
            .zip(edges_of)
            .map(|(c, es)| self.induced(c, &es))
            .collect()
    }

    /// Disjoint union; external labels of `other` must not clash.
    pub fn disjoint_union(&self, other: &FeynmanGraph) -> Result<FeynmanGraph> {
        let mut b = GraphBuilder::new(self.theory.clone());
        for g in [self, other] {
            let offset = b.graph.vertices.len();
            for v in &g.vertices {
                b.vertex(v.name.clone(), v.kind);
            }
            for (i, e) in g.edges.iter().enumerate() {
                let (t, h) = g.edge_vertices(i);
                b.edge(e.name.clone(), e.kind, t + offset, h + offset);
            }
            for x in &g.externals {
                let h = g.half_edges[x.half_edge];
                b.external(x.label.clone(), h.leg, h.vertex + offset);
            }
        }
        b.build()
    }

    /// Renames external labels with `f`.
    pub fn relabel_externals(&self, f: impl Fn(&str) -> String) -> FeynmanGraph {
        let mut g = self.clone();
        for x in &mut g.externals {
            x.label = f(&x.label);
        }
        g
    }

    /// Applies a vertex permutation (`perm[old] = new`) and reverses the
    /// storage order of edges and externals; the result is isomorphic.
    pub fn permuted(&self, perm: &[usize], edge_order: &[usize]) -> FeynmanGraph {
        let mut b = GraphBuilder::new(self.theory.clone());
        let mut inv = vec![0; perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            inv[new] = old;
        }
        for &old in &inv {
            b.vertex(self.vertices[old].name.clone(), self.vertices[old].kind);
        }
        for &e in edge_order {
            let (t, h) = self.edge_vertices(e);
            b.edge(self.edges[e].name.clone(), self.edges[e].kind, perm[t], perm[h]);
        }
        for x in self.externals.iter().rev() {
            let h = self.half_edges[x.half_edge];
            b.external(x.label.clone(), h.leg, perm[h.vertex]);
        }
        b.graph.name = self.name.clone();
        b.graph
    }
}

/// The `theory` named in a graph file, if any.
pub fn graph_theory_name(text: &str) -> Option<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .find_map(|l| {
            let mut w = l.split_whitespace();
            (w.next() == Some("theory")).then(|| w.next().map(str::to_string)).flatten()
        })
}

pub fn parse_graph(text: &str, theory: &Arc<Theory>) -> Result<FeynmanGraph> {
    let mut b = GraphBuilder::new(theory.clone());
    let mut vertex_index: HashMap<String, usize> = HashMap::new();
    let mut edge_names: Vec<String> = Vec::new();
    // Edges and externals may reference vertices declared later.
    let mut pending_edges: Vec<(usize, usize, String, EdgeKindId, String, usize, String, usize)> = Vec::new();
    let mut pending_ext: Vec<(usize, String, Leg, String, usize)> = Vec::new();

    for (idx, full) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = full.split('#').next().unwrap_or("");
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some(&kw) = words.first() else {
            continue;
        };
        let col = |w: &str| w.as_ptr() as usize - full.as_ptr() as usize + 1;
        let want = |n: usize, usage: &str| -> Result<()> {
            if words.len() != n {
                let at = words.get(n).map(|w| col(w)).unwrap_or(full.trim_end().len() + 1);
                return Err(Error::syntax(lineno, at, format!("expected `{usage}`")));
            }
            Ok(())
        };
        match kw {
            "theory" => {
                want(2, "theory <name>")?;
                if words[1] != theory.name && !theory.name.is_empty() {
                    return Err(Error::syntax(
                        lineno,
                        col(words[1]),
                        format!("graph is for theory `{}`, not `{}`", words[1], theory.name),
                    ));
                }
            }
            "name" => {
                want(2, "name <name>")?;
                b.name(words[1]);
            }
            "vertex" => {
                want(3, "vertex <id> <kind>")?;
                let kind = theory.vertex_id(words[2]).ok_or_else(|| {
                    Error::syntax(lineno, col(words[2]), format!("unknown vertex kind `{}`", words[2]))
                })?;
                if vertex_index.contains_key(words[1]) {
                    return Err(Error::syntax(lineno, col(words[1]), format!("duplicate vertex id `{}`", words[1])));
                }
                let v = b.vertex(words[1], kind);
                vertex_index.insert(words[1].to_string(), v);
            }
            "edge" => {
                want(5, "edge <id> <kind> <tail> <head>")?;
                let kind = theory.edge_id(words[2]).ok_or_else(|| {
                    Error::syntax(lineno, col(words[2]), format!("unknown edge kind `{}`", words[2]))
                })?;
                if edge_names.iter().any(|n| n == words[1]) {
                    return Err(Error::syntax(lineno, col(words[1]), format!("duplicate edge id `{}`", words[1])));
                }
                edge_names.push(words[1].to_string());
                pending_edges.push((
                    lineno,
                    col(words[1]),
                    words[1].to_string(),
                    kind,
                    words[3].to_string(),
                    col(words[3]),
                    words[4].to_string(),
                    col(words[4]),
                ));
            }
            "ext" => {
                want(4, "ext <label> <kind>[.in|.out] <vertex>")?;
                let leg = theory.parse_leg(words[2]).ok_or_else(|| {
                    Error::syntax(lineno, col(words[2]), format!("bad external leg `{}`", words[2]))
                })?;
                pending_ext.push((lineno, words[1].to_string(), leg, words[3].to_string(), col(words[3])));
            }
            other => {
                return Err(Error::syntax(lineno, col(other), format!("unknown keyword `{other}`")));
            }
        }
    }
    let lookup = |name: &str, line: usize, c: usize| -> Result<usize> {
        vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::syntax(line, c, format!("dangling endpoint: no vertex `{name}`")))
    };
    for (line, _, name, kind, tail, ct, head, ch) in pending_edges {
        let t = lookup(&tail, line, ct)?;
        let h = lookup(&head, line, ch)?;
        b.edge(name, kind, t, h);
    }
    for (line, label, leg, vertex, c) in pending_ext {
        let v = lookup(&vertex, line, c)?;
        b.external(label, leg, v);
    }
    b.build()
}

pub fn serialize_graph(g: &FeynmanGraph) -> String {
    let t = &g.theory;
    let mut out = format!("theory {}\n", t.name);
    if let Some(n) = &g.name {
        out.push_str(&format!("name {n}\n"));
    }
    for v in &g.vertices {
        out.push_str(&format!("vertex {} {}\n", v.name, t.vertex(v.kind).name));
    }
    for (i, e) in g.edges.iter().enumerate() {
        let (a, b) = g.edge_vertices(i);
        out.push_str(&format!(
            "edge {} {} {} {}\n",
            e.name,
            t.edge(e.kind).name,
            g.vertices[a].name,
            g.vertices[b].name
        ));
    }
    for x in &g.externals {
        let h = g.half_edges[x.half_edge];
        out.push_str(&format!(
            "ext {} {} {}\n",
            x.label,
            t.leg_name(h.leg),
            g.vertices[h.vertex].name
        ));
    }
    out
}
