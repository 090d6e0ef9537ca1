mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use feynhopf::algebra::AlgebraElement;
use feynhopf::generate::{catalog, GenerateOptions, GraphCatalog};
use feynhopf::graph::{canonical_form, class_key, sym, FeynmanGraph, GraphKey};
use feynhopf::hopf::Hopf;
use feynhopf::subgraph::{contract, enumerate_subgraphs};
use feynhopf::theory::{
    parse_theory, serialize_theory, EdgeKind, EdgeKindId, Leg, Residue, Role, Theory, VertexKind,
};

use common::{brute_sym, corpus, get};

fn shared(theory: &'static str, loops: u32) -> &'static GraphCatalog {
    static CACHE: OnceLock<std::sync::Mutex<BTreeMap<(&'static str, u32), &'static GraphCatalog>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry((theory, loops)).or_insert_with(|| {
        let t = Theory::builtin(theory).unwrap();
        Box::leak(Box::new(catalog(&t, loops, &GenerateOptions::default()).unwrap()))
    })
}

fn test_graphs() -> Vec<FeynmanGraph> {
    let mut out = Vec::new();
    for (theory, loops) in [("phi3", 2), ("qed", 2), ("qcd", 1), ("phi34", 1)] {
        out.extend(shared(theory, loops).iter().map(|(_, _, e)| e.graph.clone()));
    }
    out
}

fn arb_theory() -> impl Strategy<Value = Theory> {
    prop::collection::vec(any::<bool>(), 1..4).prop_flat_map(|oriented| {
        let n = oriented.len();
        let leg = (0..n, 0..2usize);
        let vertex = prop::collection::vec(leg, 3..6);
        (Just(oriented), prop::collection::vec(vertex, 1..4))
    })
    .prop_map(|(oriented, vertices)| {
        let edge_kinds = oriented
            .iter()
            .enumerate()
            .map(|(i, &o)| EdgeKind { name: format!("e{i}"), oriented: o })
            .collect();
        let vertex_kinds = vertices
            .into_iter()
            .enumerate()
            .map(|(i, legs)| VertexKind {
                name: format!("v{i}"),
                legs: legs
                    .into_iter()
                    .map(|(e, r)| Leg {
                        edge: EdgeKindId(e as u16),
                        role: match (oriented[e], r) {
                            (false, _) => Role::Plain,
                            (true, 0) => Role::In,
                            (true, _) => Role::Out,
                        },
                    })
                    .collect(),
            })
            .collect();
        Theory { name: "random".into(), edge_kinds, vertex_kinds }
    })
}

proptest! {
    #[test]
    fn theory_round_trip(t in arb_theory()) {
        let text = serialize_theory(&t);
        let back = parse_theory(&text).unwrap();
        prop_assert_eq!(&back, &t);
        for v in t.vertex_ids() {
            let sum: u32 = t.edge_ids().map(|e| t.leg_count(Residue::Vertex(v), e)).sum();
            prop_assert_eq!(t.total_valence(v), sum);
        }
    }

    #[test]
    fn sym_of_unions(picks in prop::collection::vec(0usize..1000, 1..4), theory in prop::sample::select(vec!["phi3", "qed"])) {
        let c = shared(theory, 2);
        let entries: Vec<_> = c.iter().map(|(_, _, e)| e).collect();
        let idx: Vec<usize> = picks.iter().map(|p| p % entries.len()).collect();
        let part = |pos: usize| entries[idx[pos]].graph.relabel_externals(|l| format!("{l}_c{pos}"));
        let mut union = part(0);
        let mut expected = entries[idx[0]].sym;
        for pos in 1..idx.len() {
            union = union.disjoint_union(&part(pos)).unwrap();
            let n = idx[..pos].iter().filter(|&&i| i == idx[pos]).count() as u64;
            expected *= (n + 1) * entries[idx[pos]].sym;
        }
        prop_assert_eq!(sym(&union), expected);
        prop_assert_eq!(brute_sym(&union), expected);
    }

    #[test]
    fn coproduct_and_antipode_are_multiplicative(a in 0usize..1000, b in 0usize..1000) {
        let c = shared("qed", 2);
        let h = Hopf::new(c.theory.clone());
        let entries: Vec<_> = c.iter().map(|(_, _, e)| e).collect();
        let x = h.element(&entries[a % entries.len()].graph).unwrap();
        let y = h.element(&entries[b % entries.len()].graph).unwrap();
        let xy = &x * &y;
        prop_assert_eq!(h.coproduct(&xy).unwrap(), h.coproduct(&x).unwrap().multiply(&h.coproduct(&y).unwrap()));
        prop_assert_eq!(h.antipode(&xy).unwrap(), &h.antipode(&x).unwrap() * &h.antipode(&y).unwrap());
        prop_assert!(h.check_antipode(&xy).unwrap());
        prop_assert!(h.check_coassociativity(&xy).unwrap());
    }
}

#[test]
fn canonical_form_ignores_presentation() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let (_, q) = corpus("qed");
    let mut graphs = test_graphs();
    graphs.extend(q.into_iter().map(|g| g.graph));
    for g in graphs {
        let form = canonical_form(&g);
        let s = sym(&g);
        let mut perm: Vec<usize> = (0..g.vertices().len()).collect();
        let mut order: Vec<usize> = (0..g.edges().len()).collect();
        for _ in 0..1000 {
            perm.shuffle(&mut rng);
            order.shuffle(&mut rng);
            let p = g.permuted(&perm, &order);
            assert_eq!(canonical_form(&p), form);
            assert_eq!(sym(&p), s);
        }
    }
}

#[test]
fn oriented_loop_has_no_flip() {
    let (_, q) = corpus("qed");
    let (_, u) = corpus("qed-unoriented");
    assert_eq!(sym(&get(&q, "bubble").graph), 1);
    assert_eq!(brute_sym(&get(&q, "bubble").graph), 1);
    assert_eq!(brute_sym(&get(&u, "pse-unoriented").graph), 2);
}

#[test]
fn subgraphs_and_contraction() {
    for g in test_graphs() {
        let t = g.theory().clone();
        let residues: BTreeSet<Residue> = t.residues().into_iter().collect();
        let res = g.residue().unwrap();
        for occ in enumerate_subgraphs(&g).unwrap() {
            for c in &occ.components {
                assert!(c.graph.is_1pi());
                assert!(residues.contains(&c.residue));
                assert_eq!(c.graph.residue().unwrap(), c.residue);
            }
            let q = contract(&g, &occ).unwrap();
            assert_eq!(q.residue().unwrap(), res);
            assert_eq!(g.loop_number(), occ.loop_number() + q.loop_number());
        }
    }
}

#[test]
fn catalog_is_closed_under_the_coproduct() {
    for (theory, loops) in [("phi3", 2), ("qed", 2), ("phi34", 2), ("qcd", 1)] {
        let c = shared(theory, loops);
        let slots: BTreeMap<(Residue, u32), BTreeSet<GraphKey>> = c
            .entries
            .iter()
            .map(|(&k, es)| (k, es.iter().map(|e| e.class.clone()).collect()))
            .collect();
        let present = |g: &FeynmanGraph| {
            let l = g.loop_number();
            l == 0 || slots[&(g.residue().unwrap(), l)].contains(&class_key(g))
        };
        for (_, _, e) in c.iter() {
            for occ in enumerate_subgraphs(&e.graph).unwrap() {
                for comp in &occ.components {
                    assert!(present(&comp.graph), "{theory} {}", e.name);
                }
                assert!(present(&contract(&e.graph, &occ).unwrap()), "{theory} {}", e.name);
            }
        }
    }
}

#[test]
fn axioms_on_phi34() {
    let c = shared("phi34", 2);
    let h = Hopf::new(c.theory.clone());
    for (_, _, e) in c.iter() {
        let a = h.element(&e.graph).unwrap();
        assert!(h.check_coassociativity(&a).unwrap(), "{}", e.name);
        assert!(h.check_counit(&a).unwrap(), "{}", e.name);
        assert!(h.check_antipode(&a).unwrap(), "{}", e.name);
        assert!(h.check_grading(&a).unwrap(), "{}", e.name);
    }
    assert!(h.check_antipode(&AlgebraElement::one()).unwrap());
}

#[test]
fn shipped_theories_are_consistent() {
    for name in Theory::builtin_names() {
        let t: Arc<Theory> = Theory::builtin(name).unwrap();
        assert_eq!(parse_theory(&serialize_theory(&t)).unwrap(), *t);
    }
}

#[test]
fn counting_identities_catch_wrong_entries() {
    use feynhopf::generate::check_counting;
    for (theory, loops) in [("phi3", 3), ("phi34", 2), ("qed", 2), ("qcd", 1)] {
        let report = check_counting(shared(theory, loops));
        assert!(report.passed() && !report.records.is_empty(), "{}", report.to_text());
    }
    let mut c = shared("qed", 2).clone();
    let moved = c.entries.get_mut(&(c.theory.residues()[0], 1)).unwrap().remove(0);
    c.entries.get_mut(&(c.theory.residues()[0], 2)).unwrap().push(moved);
    assert_eq!(check_counting(&c).failures().count(), 1);
}

#[test]
fn catalogs_fill_every_slot() {
    for (theory, loops, residues) in [("qcd", 1, 7), ("phi3", 2, 2), ("qed", 1, 3)] {
        let c = shared(theory, loops);
        assert_eq!(c.theory.residues().len(), residues);
        for r in c.theory.residues() {
            for l in 1..=loops {
                assert!(!c.get(r, l).is_empty(), "{theory} {} {l}", c.theory.residue_name(r));
            }
        }
    }
    assert_eq!(shared("qed", 1).len(), 3);
}
