//! Slow reference implementations used as oracles.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use feynhopf::corpus::{load_dir, NamedGraph};
use feynhopf::generate::external_labels;
use feynhopf::graph::{canonical_form, CanonicalForm, FeynmanGraph, GraphBuilder};
use feynhopf::theory::{Leg, Residue, Role, Theory, VertexKindId};

pub fn graphs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../graphs")
}

pub fn corpus(theory: &str) -> (Arc<Theory>, Vec<NamedGraph>) {
    let t = Theory::builtin(theory).unwrap();
    let gs = load_dir(&graphs_dir(), &t).unwrap();
    (t, gs)
}

pub fn get<'a>(gs: &'a [NamedGraph], name: &str) -> &'a NamedGraph {
    gs.iter().find(|g| g.name == name).unwrap_or_else(|| panic!("no graph {name}"))
}

/// External labels compared up to a `_c<n>` suffix, so that components of
/// a disjoint union may be exchanged.
fn label_class(label: &str) -> &str {
    label.split("_c").next().unwrap_or(label)
}

/// Sym by counting half-edge permutations that respect vertices, kinds,
/// roles, the edge pairing and external labels.
pub fn brute_sym(g: &FeynmanGraph) -> u64 {
    let nh = g.half_edges().len();
    let mut partner: Vec<Option<usize>> = vec![None; nh];
    for e in g.edges() {
        partner[e.ends[0]] = Some(e.ends[1]);
        partner[e.ends[1]] = Some(e.ends[0]);
    }
    let mut ext: Vec<Option<String>> = vec![None; nh];
    for x in g.externals() {
        ext[x.half_edge] = Some(label_class(&x.label).to_string());
    }
    let nv = g.vertices().len();
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (i, h) in g.half_edges().iter().enumerate() {
        at[h.vertex].push(i);
    }
    // Visit vertices so that neighbours come early.
    let mut order = Vec::new();
    let mut seen = vec![false; nv];
    for s in 0..nv {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &h in &at[v] {
                if let Some(p) = partner[h] {
                    let w = g.half_edges()[p].vertex;
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    struct S<'a> {
        g: &'a FeynmanGraph,
        at: &'a [Vec<usize>],
        partner: &'a [Option<usize>],
        ext: &'a [Option<String>],
        order: &'a [usize],
        sigma: Vec<Option<usize>>,
        image_used: Vec<bool>,
        vertex_used: Vec<bool>,
        count: u64,
    }
    impl S<'_> {
        fn ok(&self, h: usize, k: usize) -> bool {
            if self.g.half_edges()[h].leg != self.g.half_edges()[k].leg {
                return false;
            }
            match (&self.ext[h], &self.ext[k]) {
                (Some(a), Some(b)) => a == b,
                (None, None) => match self.sigma[self.partner[h].unwrap()] {
                    Some(pk) => self.partner[k] == Some(pk),
                    None => true,
                },
                _ => false,
            }
        }
        fn halves(&mut self, vi: usize, w: usize, j: usize) {
            let v = self.order[vi];
            if j == self.at[v].len() {
                self.vertex(vi + 1);
                return;
            }
            let h = self.at[v][j];
            for idx in 0..self.at[w].len() {
                let k = self.at[w][idx];
                if self.image_used[k] || !self.ok(h, k) {
                    continue;
                }
                // A self-loop half assigned before its partner is checked when the partner arrives.
                self.sigma[h] = Some(k);
                self.image_used[k] = true;
                let fine = match self.partner[h] {
                    Some(p) if p != h => match self.sigma[p] {
                        Some(pk) => self.partner[k] == Some(pk),
                        None => true,
                    },
                    _ => true,
                };
                if fine {
                    self.halves(vi, w, j + 1);
                }
                self.image_used[k] = false;
                self.sigma[h] = None;
            }
        }
        fn vertex(&mut self, vi: usize) {
            if vi == self.order.len() {
                self.count += 1;
                return;
            }
            let v = self.order[vi];
            for w in 0..self.order.len() {
                if self.vertex_used[w] || self.g.vertices()[w].kind != self.g.vertices()[v].kind {
                    continue;
                }
                self.vertex_used[w] = true;
                self.halves(vi, w, 0);
                self.vertex_used[w] = false;
            }
        }
    }
    let mut s = S {
        g,
        at: &at,
        partner: &partner,
        ext: &ext,
        order: &order,
        sigma: vec![None; nh],
        image_used: vec![false; nh],
        vertex_used: vec![false; nv],
        count: 0,
    };
    s.vertex(0);
    s.count
}

/// Insertion places by enumerating labelled placements: vertex parts go to
/// distinct vertices of their kind, edge parts go into an edge at any
/// position of the chain already inserted there.
pub fn brute_insertions(big: &FeynmanGraph, parts: &[Residue]) -> u64 {
    let vkinds: Vec<VertexKindId> = big.vertices().iter().map(|v| v.kind).collect();
    let ekinds: Vec<_> = big.edges().iter().map(|e| e.kind).collect();
    fn rec(i: usize, parts: &[Residue], vk: &[VertexKindId], ek: &[feynhopf::theory::EdgeKindId], used: &mut Vec<bool>, chain: &mut Vec<u64>) -> u64 {
        if i == parts.len() {
            return 1;
        }
        let mut total = 0;
        match parts[i] {
            Residue::Vertex(k) => {
                for v in 0..vk.len() {
                    if vk[v] == k && !used[v] {
                        used[v] = true;
                        total += rec(i + 1, parts, vk, ek, used, chain);
                        used[v] = false;
                    }
                }
            }
            Residue::Edge(k) => {
                for e in 0..ek.len() {
                    if ek[e] != k {
                        continue;
                    }
                    for _position in 0..=chain[e] {
                        chain[e] += 1;
                        total += rec(i + 1, parts, vk, ek, used, chain);
                        chain[e] -= 1;
                    }
                }
            }
        }
        total
    }
    rec(0, parts, &vkinds, &ekinds, &mut vec![false; vkinds.len()], &mut vec![0; ekinds.len()])
}

/// Connected and still connected after deleting any one edge.
pub fn brute_one_pi(nv: usize, edges: &[(usize, usize)]) -> bool {
    let connected = |skip: Option<usize>| {
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut comps = nv;
        for (i, &(a, b)) in edges.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                comps -= 1;
            }
        }
        comps == 1
    };
    connected(None) && (0..edges.len()).all(|i| connected(Some(i)))
}

fn partner_legs(a: Leg, b: Leg) -> bool {
    a.edge == b.edge
        && match a.role {
            Role::Plain => b.role == Role::Plain,
            Role::In => b.role == Role::Out,
            Role::Out => b.role == Role::In,
        }
}

/// Reference generator: every pairing of labelled half-edges, no symmetry
/// breaking. Returns each class with the number of labelled structures
/// realising it and the order of the relabelling group.
pub struct Reference {
    pub classes: BTreeMap<CanonicalForm, (FeynmanGraph, u64)>,
    pub group_order: BTreeMap<CanonicalForm, u64>,
}

struct Pairing<'a> {
    t: &'a Arc<Theory>,
    kinds: Vec<VertexKindId>,
    half: Vec<(usize, Leg)>,
    labels: Vec<(String, Leg)>,
    weight: u64,
    found: BTreeMap<CanonicalForm, (FeynmanGraph, u64)>,
}

impl Pairing<'_> {
    fn externals(&mut self, i: usize, used: &mut Vec<bool>, ext: &mut Vec<usize>) {
        if i == self.labels.len() {
            self.pair(used, ext, &mut Vec::new());
            return;
        }
        for h in 0..self.half.len() {
            if !used[h] && self.half[h].1 == self.labels[i].1 {
                used[h] = true;
                ext.push(h);
                self.externals(i + 1, used, ext);
                ext.pop();
                used[h] = false;
            }
        }
    }

    fn pair(&mut self, used: &mut Vec<bool>, ext: &[usize], pairs: &mut Vec<(usize, usize)>) {
        let Some(h) = used.iter().position(|u| !u) else {
            let edges: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (self.half[a].0, self.half[b].0)).collect();
            if !brute_one_pi(self.kinds.len(), &edges) {
                return;
            }
            let mut b = GraphBuilder::new(self.t.clone());
            for (i, k) in self.kinds.iter().enumerate() {
                b.vertex(format!("v{i}"), *k);
            }
            for (i, &(x, y)) in pairs.iter().enumerate() {
                let (x, y) = if self.half[x].1.role == Role::In { (y, x) } else { (x, y) };
                b.edge(format!("e{i}"), self.half[x].1.edge, self.half[x].0, self.half[y].0);
            }
            for (l, &h) in self.labels.iter().zip(ext) {
                b.external(l.0.clone(), self.half[h].1, self.half[h].0);
            }
            let g = b.build().unwrap();
            let w = self.weight;
            self.found.entry(canonical_form(&g)).or_insert((g, 0)).1 += w;
            return;
        };
        used[h] = true;
        for k in h + 1..self.half.len() {
            if !used[k] && partner_legs(self.half[h].1, self.half[k].1) {
                used[k] = true;
                pairs.push((h, k));
                self.pair(used, ext, pairs);
                pairs.pop();
                used[k] = false;
            }
        }
        used[h] = false;
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

pub fn reference_generate(t: &Arc<Theory>, r: Residue, loops: u32) -> Reference {
    let target = 2 * loops as i64 + t.residue_valence(r) as i64 - 2;
    let kinds: Vec<VertexKindId> = t.vertex_ids().collect();
    let mut multisets = Vec::new();
    let mut cur = vec![0u64; kinds.len()];
    fn rec(i: usize, left: i64, t: &Theory, kinds: &[VertexKindId], cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == kinds.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let w = t.total_valence(kinds[i]) as i64 - 2;
        let mut k = 0;
        while k * w <= left {
            cur[i] = k as u64;
            rec(i + 1, left - k * w, t, kinds, cur, out);
            k += 1;
        }
        cur[i] = 0;
    }
    rec(0, target, t, &kinds, &mut cur, &mut multisets);

    let labels = external_labels(t, r);
    let mut classes: BTreeMap<CanonicalForm, (FeynmanGraph, u64)> = BTreeMap::new();
    let mut group_order = BTreeMap::new();
    for m in multisets {
        let mut vk = Vec::new();
        for (i, &k) in kinds.iter().enumerate() {
            for _ in 0..m[i] {
                vk.push(k);
            }
        }
        let mut half = Vec::new();
        let mut order = 1u64;
        for (i, &k) in kinds.iter().enumerate() {
            order *= factorial(m[i]);
            let legs = &t.vertex(k).legs;
            let mut mult: BTreeMap<Leg, u64> = BTreeMap::new();
            for l in legs {
                *mult.entry(*l).or_default() += 1;
            }
            for c in mult.values() {
                order *= factorial(*c).pow(m[i] as u32);
            }
        }
        for (v, &k) in vk.iter().enumerate() {
            for &l in &t.vertex(k).legs {
                half.push((v, l));
            }
        }
        let mut p = Pairing {
            t,
            kinds: vk.clone(),
            half: half.clone(),
            labels: labels.clone(),
            weight: 1,
            found: BTreeMap::new(),
        };
        if labels.is_empty() {
            p.externals(0, &mut vec![false; half.len()], &mut Vec::new());
        } else {
            // The relabelling group acts transitively on the half-edges of one
            // leg at vertices of one kind, so the first label is pinned to one
            // representative per orbit and weighted by the orbit size.
            let leg = labels[0].1;
            let mut orbits: BTreeMap<VertexKindId, Vec<usize>> = BTreeMap::new();
            for (h, &(v, l)) in half.iter().enumerate() {
                if l == leg {
                    orbits.entry(vk[v]).or_default().push(h);
                }
            }
            for hs in orbits.values() {
                p.weight = hs.len() as u64;
                let mut used = vec![false; half.len()];
                used[hs[0]] = true;
                let mut ext = vec![hs[0]];
                p.externals(1, &mut used, &mut ext);
            }
        }
        for (k, (g, n)) in p.found {
            group_order.insert(k.clone(), order);
            let e = classes.entry(k).or_insert((g, 0));
            e.1 += n;
        }
    }
    Reference { classes, group_order }
}
