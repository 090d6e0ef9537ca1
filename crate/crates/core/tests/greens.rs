use std::sync::Arc;

use feynhopf::algebra::{AlgebraElement, TensorElement};
use feynhopf::generate::{catalog, GenerateOptions};
use feynhopf::greens::{GeneratorStyle, Greens};
use feynhopf::hopf::rat;
use feynhopf::series::{series_inverse, series_pow};
use feynhopf::theory::{Residue, Theory};
use feynhopf::Error;

fn greens(theory: &str, loops: u32) -> Greens {
    let t = Theory::builtin(theory).unwrap();
    Greens::new(catalog(&t, loops, &GenerateOptions::default()).unwrap()).unwrap()
}

fn residue(g: &Greens, name: &str) -> Residue {
    g.theory().residue_by_name(name).unwrap()
}

fn vertex(t: &Arc<Theory>, name: &str) -> feynhopf::theory::VertexKindId {
    t.vertex_id(name).unwrap()
}

#[test]
fn green_one_loop() {
    let g = greens("qed", 1);
    let s = g.green(residue(&g, "photon"));
    assert_eq!(s.components[0], AlgebraElement::one());
    let bubble = &g.catalog.get(residue(&g, "photon"), 1)[0];
    assert_eq!(bubble.sym, 1);
    assert_eq!(s.components[1], -&AlgebraElement::generator(bubble.class.clone()));

    let g = greens("phi3", 1);
    let s = g.green(residue(&g, "phi"));
    let bubble = &g.catalog.get(residue(&g, "phi"), 1)[0];
    assert_eq!(s.components[1], AlgebraElement::generator(bubble.class.clone()).scale(&rat(-1, 2)));
    let v = g.green(residue(&g, "phi3"));
    assert_eq!(v.total().counit(), rat(1, 1));
}

#[test]
fn empty_rows_give_constant_series() {
    let t = Theory::builtin("phi3").unwrap();
    let mut c = catalog(&t, 1, &GenerateOptions::default()).unwrap();
    c.entries.clear();
    let g = Greens::new(c).unwrap();
    for r in t.residues() {
        assert_eq!(g.green(r).total(), AlgebraElement::one());
    }
}

#[test]
fn series_pow_laws_on_green_functions() {
    let g = greens("qed", 2);
    let exps = [rat(3, 2), rat(-1, 2), rat(1, 3), rat(-2, 1)];
    for r in g.theory().residues() {
        let s = g.green(r).total();
        assert_eq!(series_pow(&s, &rat(1, 1), 2).unwrap(), s);
        assert_eq!(series_pow(&s, &rat(-1, 1), 2).unwrap(), series_inverse(&s, 2).unwrap());
        for a in &exps {
            for b in &exps {
                let sa = series_pow(&s, a, 2).unwrap();
                let sb = series_pow(&s, b, 2).unwrap();
                assert_eq!(sa.multiply_truncated(&sb, 2), series_pow(&s, &(a + b), 2).unwrap());
                assert_eq!(series_pow(&sa, b, 2).unwrap(), series_pow(&s, &(a * b), 2).unwrap());
            }
        }
    }
}

#[test]
fn non_unit_series_is_rejected() {
    let g = greens("phi3", 1);
    let s = g.green(residue(&g, "phi")).total().scale(&rat(2, 1));
    assert!(matches!(series_pow(&s, &rat(1, 2), 1), Err(Error::Precondition(_))));
}

#[test]
fn three_coproduct_forms_agree() {
    for (theory, loops) in [("phi3", 2), ("qed", 2), ("qcd", 1)] {
        let g = greens(theory, loops);
        for r in g.theory().residues() {
            let direct = g.coproduct_green_direct(r).unwrap();
            assert_eq!(direct, g.coproduct_green_prop(r).unwrap(), "{theory} {r:?}");
            assert_eq!(direct, g.coproduct_green_enhanced(r).unwrap(), "{theory} {r:?}");
            for n in 0..=loops {
                let expected = TensorElement::tensor(&AlgebraElement::one(), &g.green(r).component(n));
                assert_eq!(direct.bigrade(0, n), expected);
            }
        }
    }
}

#[test]
fn x_elements() {
    let g = greens("phi3", 2);
    let t = g.theory().clone();
    let x = g.x_element(vertex(&t, "phi3")).unwrap();
    let gv = g.green(residue(&g, "phi3")).total();
    let ge = g.green(residue(&g, "phi")).total();
    assert_eq!(x, gv.multiply_truncated(&series_pow(&ge, &rat(-3, 2), 2).unwrap(), 2));

    let g = greens("qcd", 1);
    let t = g.theory().clone();
    let glu = g.green(residue(&g, "gluon")).total();
    let g3 = g.green(residue(&g, "gluon3")).total();
    let g4 = g.green(residue(&g, "gluon4")).total();
    assert_eq!(
        g.x_element(vertex(&t, "gluon3")).unwrap(),
        g3.multiply_truncated(&series_pow(&glu, &rat(-3, 2), 1).unwrap(), 1)
    );
    assert_eq!(
        g.x_element(vertex(&t, "gluon4")).unwrap(),
        series_pow(&g4, &rat(1, 2), 1)
            .unwrap()
            .multiply_truncated(&series_inverse(&glu, 1).unwrap(), 1)
    );
}

#[test]
fn single_vertex_theory_has_zero_ideal() {
    let g = greens("phi3", 2);
    let b = g.ideal_basis(GeneratorStyle::Polynomial).unwrap();
    assert!(b.generators.is_empty());
    assert!(b.spanning.iter().all(Vec::is_empty));
}

#[test]
fn phi34_ideal_in_degree_one() {
    let g = greens("phi34", 2);
    let t = g.theory().clone();
    let x3 = g.x_element(vertex(&t, "phi3")).unwrap();
    let x4 = g.x_element(vertex(&t, "phi4")).unwrap();
    let d1 = (&x3 - &x4).grade(1);
    assert!(!d1.is_zero());
    let poly = g.ideal_basis(GeneratorStyle::Polynomial).unwrap();
    let diff = g.ideal_basis(GeneratorStyle::Difference).unwrap();
    assert_eq!(poly.dimension(1), 1);
    assert!(poly.membership(&d1).unwrap());
    assert!(poly.membership(&AlgebraElement::zero()).unwrap());
    for n in 1..=2 {
        assert_eq!(poly.dimension(n), diff.dimension(n));
    }
    assert!(poly.contains_basis(&diff).unwrap());
    assert!(diff.contains_basis(&poly).unwrap());

    let bubble = &g.catalog.get(residue(&g, "phi"), 1)[0];
    let lone = AlgebraElement::generator(bubble.class.clone());
    assert!(!poly.membership(&lone).unwrap());
}

#[test]
fn membership_rejects_degrees_beyond_truncation() {
    let g = greens("phi34", 1);
    let b = g.ideal_basis(GeneratorStyle::Polynomial).unwrap();
    let k = g.catalog.get(residue(&g, "phi"), 1)[0].class.clone();
    let sq = AlgebraElement::generator(k.clone()).multiply(&AlgebraElement::generator(k));
    assert!(matches!(b.membership(&sq), Err(Error::Truncation(_))));
}

#[test]
fn hopf_ideal_and_closed_coproduct() {
    for (theory, loops) in [("phi34", 2), ("qcd", 1)] {
        let g = greens(theory, loops);
        let b = g.ideal_basis(GeneratorStyle::Polynomial).unwrap();
        let report = g.check_hopf_ideal(&b).unwrap();
        assert!(!report.records.is_empty());
        assert!(report.passed(), "{}", report.to_text());
        for r in g.theory().residues() {
            let report = g.check_closed_coproduct(r, &b).unwrap();
            assert!(report.passed(), "{}", report.to_text());
        }
    }
}

#[test]
fn reference_vertices_differ_by_ideal_terms() {
    let g = greens("phi34", 2);
    let t = g.theory().clone();
    let b = g.ideal_basis(GeneratorStyle::Polynomial).unwrap();
    let r = residue(&g, "phi");
    let a = g.closed_coproduct_residual(r, vertex(&t, "phi3")).unwrap();
    let c = g.closed_coproduct_residual(r, vertex(&t, "phi4")).unwrap();
    let d = &a - &c;
    assert!(!d.is_zero());
    assert!(b.left_membership(&d).unwrap());
}

#[test]
fn phi3_closed_coproduct_is_exact() {
    let g = greens("phi3", 2);
    let v = vertex(g.theory(), "phi3");
    for r in g.theory().residues() {
        assert!(g.closed_coproduct_residual(r, v).unwrap().is_zero());
    }
}

#[test]
fn difference_generators_pass_too() {
    let g = greens("phi34", 2);
    let b = g.ideal_basis(GeneratorStyle::Difference).unwrap();
    let report = g.check_hopf_ideal(&b).unwrap();
    assert!(report.passed(), "{}", report.to_text());
}

#[test]
fn graphs_outside_the_ideal_fail_membership() {
    let g = greens("phi34", 2);
    let b = g.ideal_basis(GeneratorStyle::Polynomial).unwrap();
    let two_loop = &g.catalog.get(residue(&g, "phi3"), 2)[0];
    let delta = g.hopf.coproduct(&AlgebraElement::generator(two_loop.class.clone())).unwrap();
    assert!(!b.tensor_membership(&delta).unwrap());
    assert!(!b.left_membership(&delta).unwrap());
}
