//! Field-theory specifications: the typed vertices and edges graphs are built from.
//!
//! A theory file is line oriented:
//!
//! ```text
//! # comment
//! theory qed
//! edge photon
//! edge electron oriented
//! vertex qed = photon, electron.in, electron.out
//! ```
//!
//! `edge <name> [oriented]` declares an edge kind. `vertex <name> = <leg>, ...`
//! declares a vertex kind by its legs; a leg is `kind` for an unoriented kind
//! and `kind.in` / `kind.out` for an oriented one (`in` means the line points
//! into the vertex). The optional `theory <name>` line names the theory.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKindId(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexKindId(pub u16);

/// How a half-edge sits at its vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Plain,
    /// The oriented line points into the vertex.
    In,
    /// The oriented line points away from the vertex.
    Out,
}

impl Role {
    /// The role the other end of an internal edge must have.
    pub fn partner(self) -> Role {
        match self {
            Role::Plain => Role::Plain,
            Role::In => Role::Out,
            Role::Out => Role::In,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Role::Plain => "",
            Role::In => ".in",
            Role::Out => ".out",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Leg {
    pub edge: EdgeKindId,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeKind {
    pub name: String,
    pub oriented: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexKind {
    pub name: String,
    /// Legs in declaration order.
    pub legs: Vec<Leg>,
}

impl VertexKind {
    pub fn sorted_legs(&self) -> Vec<Leg> {
        let mut legs = self.legs.clone();
        legs.sort();
        legs
    }
}

/// An element of `R = R_V ∪ R_E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Residue {
    Vertex(VertexKindId),
    Edge(EdgeKindId),
}

impl Residue {
    pub fn is_vertex(self) -> bool {
        matches!(self, Residue::Vertex(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub name: String,
    pub edge_kinds: Vec<EdgeKind>,
    pub vertex_kinds: Vec<VertexKind>,
}

const BUILTIN: &[(&str, &str)] = &[
    ("qed", include_str!("../../../theories/qed")),
    ("qcd", include_str!("../../../theories/qcd")),
    ("phi3", include_str!("../../../theories/phi3")),
    ("phi34", include_str!("../../../theories/phi34")),
    (
        "qed-unoriented",
        include_str!("../../../theories/qed-unoriented"),
    ),
];

impl Theory {
    /// One of the theories shipped under `theories/`.
    pub fn builtin(name: &str) -> Result<Arc<Theory>> {
        BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| parse_theory_named(text, n).map(Arc::new))
            .unwrap_or_else(|| {
                Err(Error::Unknown {
                    what: "theory",
                    name: name.to_string(),
                })
            })
    }

    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(n, _)| *n)
    }

    pub fn edge(&self, id: EdgeKindId) -> &EdgeKind {
        &self.edge_kinds[id.0 as usize]
    }

    pub fn vertex(&self, id: VertexKindId) -> &VertexKind {
        &self.vertex_kinds[id.0 as usize]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeKindId> {
        (0..self.edge_kinds.len() as u16).map(EdgeKindId)
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexKindId> {
        (0..self.vertex_kinds.len() as u16).map(VertexKindId)
    }

    /// All residues, vertices first, in declaration order.
    pub fn residues(&self) -> Vec<Residue> {
        self.vertex_ids()
            .map(Residue::Vertex)
            .chain(self.edge_ids().map(Residue::Edge))
            .collect()
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeKindId> {
        self.edge_kinds
            .iter()
            .position(|e| e.name == name)
            .map(|i| EdgeKindId(i as u16))
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexKindId> {
        self.vertex_kinds
            .iter()
            .position(|v| v.name == name)
            .map(|i| VertexKindId(i as u16))
    }

    pub fn residue_by_name(&self, name: &str) -> Result<Residue> {
        if let Some(v) = self.vertex_id(name) {
            return Ok(Residue::Vertex(v));
        }
        if let Some(e) = self.edge_id(name) {
            return Ok(Residue::Edge(e));
        }
        Err(Error::Unknown {
            what: "residue",
            name: name.to_string(),
        })
    }

    pub fn residue_name(&self, r: Residue) -> &str {
        match r {
            Residue::Vertex(v) => &self.vertex(v).name,
            Residue::Edge(e) => &self.edge(e).name,
        }
    }

    /// The external legs of a residue, in a fixed order. For an edge these are
    /// the two ends as seen from the vertices they attach to.
    pub fn residue_legs(&self, r: Residue) -> Vec<Leg> {
        match r {
            Residue::Vertex(v) => self.vertex(v).legs.clone(),
            Residue::Edge(e) => {
                if self.edge(e).oriented {
                    vec![
                        Leg { edge: e, role: Role::In },
                        Leg { edge: e, role: Role::Out },
                    ]
                } else {
                    vec![Leg { edge: e, role: Role::Plain }; 2]
                }
            }
        }
    }

    /// Collapses a multiset of external legs to a residue, if one matches.
    pub fn residue_of_legs(&self, legs: &[Leg]) -> Option<Residue> {
        let mut sorted = legs.to_vec();
        sorted.sort();
        if sorted.len() == 2 && sorted[0].edge == sorted[1].edge {
            let e = sorted[0].edge;
            let ok = if self.edge(e).oriented {
                sorted[0].role == Role::In && sorted[1].role == Role::Out
            } else {
                sorted[0].role == Role::Plain && sorted[1].role == Role::Plain
            };
            return ok.then_some(Residue::Edge(e));
        }
        self.vertex_ids()
            .find(|&v| self.vertex(v).sorted_legs() == sorted)
            .map(Residue::Vertex)
    }

    /// `N_e(r)`: legs of kind `e` attached to `r` (an edge kind has two ends).
    pub fn leg_count(&self, r: Residue, e: EdgeKindId) -> u32 {
        match r {
            Residue::Vertex(v) => self.vertex(v).legs.iter().filter(|l| l.edge == e).count() as u32,
            Residue::Edge(f) => {
                if f == e {
                    2
                } else {
                    0
                }
            }
        }
    }

    /// `N(v)`: the total valence of a vertex kind.
    pub fn total_valence(&self, v: VertexKindId) -> u32 {
        self.vertex(v).legs.len() as u32
    }

    /// `N(r)` for any residue.
    pub fn residue_valence(&self, r: Residue) -> u32 {
        match r {
            Residue::Vertex(v) => self.total_valence(v),
            Residue::Edge(_) => 2,
        }
    }

    pub fn leg_name(&self, leg: Leg) -> String {
        format!("{}{}", self.edge(leg.edge).name, leg.role.suffix())
    }

    pub fn parse_leg(&self, text: &str) -> Option<Leg> {
        let (name, role) = match text.rsplit_once('.') {
            Some((n, "in")) => (n, Role::In),
            Some((n, "out")) => (n, Role::Out),
            _ => (text, Role::Plain),
        };
        let edge = self.edge_id(name)?;
        let oriented = self.edge(edge).oriented;
        match (oriented, role) {
            (true, Role::In | Role::Out) | (false, Role::Plain) => Some(Leg { edge, role }),
            _ => None,
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_theory(self))
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Column (1-based) of `needle` inside `line`, which must be a subslice.
fn column_of(line: &str, needle: &str) -> usize {
    needle.as_ptr() as usize - line.as_ptr() as usize + 1
}

pub fn parse_theory(text: &str) -> Result<Theory> {
    parse_theory_named(text, "")
}

/// Parses a theory file; `default_name` is used when the file has no
/// `theory` line.
pub fn parse_theory_named(text: &str, default_name: &str) -> Result<Theory> {
    let mut name: Option<String> = None;
    let mut edge_kinds: Vec<EdgeKind> = Vec::new();
    // (name, raw legs with their columns, line)
    let mut raw_vertices: Vec<(String, Vec<(String, usize)>, usize)> = Vec::new();

    for (idx, full_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = full_line.split('#').next().unwrap_or("");
        let mut words = line.split_whitespace();
        let Some(keyword) = words.next() else {
            continue;
        };
        match keyword {
            "theory" => {
                let n = words
                    .next()
                    .ok_or_else(|| Error::syntax(lineno, column_of(full_line, keyword), "missing theory name"))?;
                if !is_identifier(n) {
                    return Err(Error::syntax(lineno, column_of(full_line, n), format!("bad identifier `{n}`")));
                }
                if let Some(extra) = words.next() {
                    return Err(Error::syntax(lineno, column_of(full_line, extra), "unexpected token"));
                }
                name = Some(n.to_string());
            }
            "edge" => {
                let n = words
                    .next()
                    .ok_or_else(|| Error::syntax(lineno, column_of(full_line, keyword) + 4, "missing edge name"))?;
                if !is_identifier(n) {
                    return Err(Error::syntax(lineno, column_of(full_line, n), format!("bad identifier `{n}`")));
                }
                let oriented = match words.next() {
                    None => false,
                    Some("oriented") => true,
                    Some(tok) => {
                        return Err(Error::syntax(
                            lineno,
                            column_of(full_line, tok),
                            format!("expected `oriented`, found `{tok}`"),
                        ))
                    }
                };
                if let Some(extra) = words.next() {
                    return Err(Error::syntax(lineno, column_of(full_line, extra), "unexpected token"));
                }
                edge_kinds.push(EdgeKind {
                    name: n.to_string(),
                    oriented,
                });
            }
            "vertex" => {
                let rest = &line[column_of(line, keyword) - 1 + keyword.len()..];
                let Some((lhs, rhs)) = rest.split_once('=') else {
                    return Err(Error::syntax(lineno, column_of(full_line, keyword), "expected `vertex <name> = <legs>`"));
                };
                let n = lhs.trim();
                if !is_identifier(n) {
                    let col = if n.is_empty() {
                        column_of(full_line, keyword) + keyword.len()
                    } else {
                        column_of(full_line, n)
                    };
                    return Err(Error::syntax(lineno, col, format!("bad identifier `{n}`")));
                }
                let mut legs = Vec::new();
                for piece in rhs.split(',') {
                    let leg = piece.trim();
                    if leg.is_empty() {
                        return Err(Error::syntax(lineno, column_of(full_line, piece), "empty leg"));
                    }
                    legs.push((leg.to_string(), column_of(full_line, leg)));
                }
                raw_vertices.push((n.to_string(), legs, lineno));
            }
            other => {
                return Err(Error::syntax(
                    lineno,
                    column_of(full_line, other),
                    format!("unknown keyword `{other}`"),
                ))
            }
        }
    }

    let mut theory = Theory {
        name: name.unwrap_or_else(|| default_name.to_string()),
        edge_kinds,
        vertex_kinds: Vec::new(),
    };

    for (i, e) in theory.edge_kinds.iter().enumerate() {
        if theory.edge_kinds[..i].iter().any(|o| o.name == e.name) {
            return Err(Error::invalid("edge kind", format!("duplicate name `{}`", e.name)));
        }
    }
    for (vname, raw_legs, lineno) in raw_vertices {
        if theory.vertex_kinds.iter().any(|v| v.name == vname) {
            return Err(Error::invalid("vertex kind", format!("duplicate name `{vname}`")));
        }
        if theory.edge_id(&vname).is_some() {
            return Err(Error::invalid(
                "vertex kind",
                format!("`{vname}` is already an edge kind"),
            ));
        }
        let mut legs = Vec::with_capacity(raw_legs.len());
        for (text, col) in &raw_legs {
            let base = text.rsplit_once('.').map(|(b, _)| b).unwrap_or(text);
            if theory.edge_id(base).is_none() {
                return Err(Error::invalid(
                    "vertex kind",
                    format!("`{vname}` references unknown edge kind `{base}` (line {lineno}, column {col})"),
                ));
            }
            let leg = theory.parse_leg(text).ok_or_else(|| {
                Error::invalid(
                    "vertex kind",
                    format!("`{vname}`: leg `{text}` has the wrong orientation role (line {lineno}, column {col})"),
                )
            })?;
            legs.push(leg);
        }
        if legs.len() < 3 {
            return Err(Error::invalid(
                "vertex kind",
                format!("`{vname}` has valence {} (minimum is 3)", legs.len()),
            ));
        }
        theory.vertex_kinds.push(VertexKind { name: vname, legs });
    }
    if theory.edge_kinds.is_empty() {
        return Err(Error::invalid("theory", "no edge kinds"));
    }
    if theory.vertex_kinds.is_empty() {
        return Err(Error::invalid("theory", "no vertex kinds"));
    }
    Ok(theory)
}

pub fn serialize_theory(t: &Theory) -> String {
    let mut out = String::new();
    if !t.name.is_empty() {
        out.push_str(&format!("theory {}\n", t.name));
    }
    for e in &t.edge_kinds {
        if e.oriented {
            out.push_str(&format!("edge {} oriented\n", e.name));
        } else {
            out.push_str(&format!("edge {}\n", e.name));
        }
    }
    for v in &t.vertex_kinds {
        let legs: Vec<String> = v.legs.iter().map(|&l| t.leg_name(l)).collect();
        out.push_str(&format!("vertex {} = {}\n", v.name, legs.join(", ")));
    }
    out
}
