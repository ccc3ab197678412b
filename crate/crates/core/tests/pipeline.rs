//! Integration tests through the public API: text → arithmetic → text, and
//! resolution → chart → serialisation → comparison.

use isoadams::chart::{from_csv, read_chart, to_csv, to_json};
use isoadams::homological::{compare_charts, compare_doubling, vanishing_check, CellKey, ChartOptions};
use isoadams::isotropic::IsotropicWindow;
use isoadams::jobs::{f2_chart, isotropic_chart, massey_by_name, multiply_text, Basis, ChartFlavor};
use isoadams::milnor::{monomials_of_degree, multiply, qepr_to_prqe, Element};
use isoadams::text::parse_element;
use isoadams::homological::AlgebraFlavor;

#[test]
fn printed_elements_parse_back() {
    for p in 0..=16 {
        let ms = monomials_of_degree(p);
        for a in &ms {
            for b in ms.iter().take(4) {
                let x = multiply(&Element::from(a.clone()), &Element::from(b.clone()));
                let printed = x.to_string();
                assert_eq!(parse_element(&printed).unwrap(), x, "{printed}");
                let prqe = qepr_to_prqe(&x).to_string();
                assert_eq!(parse_element(&prqe).unwrap(), x, "{prqe}");
            }
        }
    }
}

#[test]
fn text_multiplication_agrees_across_flavors() {
    // Sq^r ↦ Sq^{2r}: classical products double into G
    let classical = multiply_text("Sq2", "Sq2", ChartFlavor::Classical, Basis::Prqe).unwrap();
    assert_eq!(classical, "Sq3 Sq1");
    assert_eq!(multiply_text("P(1)", "P(1)", ChartFlavor::G, Basis::Prqe).unwrap(), "0");
    // Sq3 Sq1 = Sq(1,1) in the Milnor basis, doubled
    assert_eq!(multiply_text("P(2)", "P(2)", ChartFlavor::G, Basis::Prqe).unwrap(), "P(1,1)");
    let a0 = multiply_text("Sq4", "Sq4", ChartFlavor::A0, Basis::Qepr).unwrap();
    assert_eq!(a0, multiply_text("P(2)", "P(2)", ChartFlavor::A0, Basis::Qepr).unwrap());
}

#[test]
fn classical_chart_doubles_to_g_chart() {
    let classical = f2_chart(AlgebraFlavor::Classical, 5, 12, ChartOptions::default());
    let g = f2_chart(AlgebraFlavor::G, 5, 24, ChartOptions::default());
    let report = compare_doubling(&classical, &g, i64::MAX);
    assert!(report.passed(), "{:?}", report.mismatches);
    // after a CSV round trip too
    let g_back = from_csv(&to_csv(&g).unwrap()).unwrap();
    let c_back = from_csv(&to_csv(&classical).unwrap()).unwrap();
    assert!(compare_doubling(&c_back, &g_back, i64::MAX).passed());
    assert!(vanishing_check(&g).mismatches.is_empty());
}

#[test]
fn json_carries_names_products_and_brackets() {
    let chart = f2_chart(AlgebraFlavor::Classical, 4, 12, ChartOptions::all());
    let back = read_chart(&to_json(&chart).unwrap()).unwrap();
    assert_eq!(back, chart);
    assert!(back.class("h3").is_some());
    assert!(back
        .products
        .iter()
        .any(|p| p.left == "h0" && p.right == "h1" && p.result == "0"));
    assert!(back.brackets.iter().any(|b| b.classes == ["h0", "h1", "h0"] && b.representative == "h1^2"));
    assert!(compare_charts(&chart, &back).passed());
}

#[test]
fn isotropic_chart_agrees_with_g_chart() {
    let iso = isotropic_chart(&IsotropicWindow::for_depth(16), 4, 16).unwrap();
    let g = f2_chart(AlgebraFlavor::G, 4, 16, ChartOptions::default());
    for c in &g.cells {
        let key = CellKey { s: c.s, t: c.t, u: c.u };
        if !iso.is_truncated(key) {
            assert_eq!(iso.dim(key), c.dim, "{key}");
        }
    }
    for c in &iso.cells {
        assert_eq!(c.u.map(|u| 2 * u), Some(c.t), "off t = 2u: {}", c.key());
    }
}

#[test]
fn brackets_in_the_g_chart_are_doubled() {
    let b = massey_by_name(ChartFlavor::G, 4, 24, ["h0", "h1", "h0"]).unwrap();
    assert_eq!(b.to_string(), "h1^2, indeterminacy 0");
}
