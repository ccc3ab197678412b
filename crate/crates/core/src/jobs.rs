//! End-to-end jobs shared by the command line, the Python bindings and the
//! acceptance suite: resolve and chart a flavor, and compute the isotropic
//! chart together with its comparison against the classical chart.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::adem::WordFlavor;
use crate::homological::{
    compare_doubling, exact_depth, ext_chart, ext_chart_with_coefficients, massey_triple, vanishing_check,
    AlgebraFlavor, ChartOptions, ClassNames, ComparisonReport, ExtChart, FreeResolution, ProductError,
    WindowedAlgebra,
};
use crate::isotropic::{solve_action_table, IsotropicError, IsotropicWindow};
use crate::milnor;
use crate::text::{self, ParseError};

/// Failures of a job, grouped by how a caller should report them.
#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// The request itself is invalid (unknown class, unsupported flavor, …).
    #[error("{0}")]
    Usage(String),
    /// A mathematical precondition fails (e.g. a Massey product is undefined).
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// The answer needs more than the computed window.
    #[error("window too small: {0}")]
    Window(String),
}

/// How to print A₀ elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Basis {
    /// `P^R Q^E`, e.g. `P(1) Q0 + Q1`.
    #[default]
    Prqe,
    /// `Q^E P^R`, e.g. `Q0 P(1)`.
    Qepr,
}

impl FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "prqe" => Ok(Basis::Prqe),
            "qepr" => Ok(Basis::Qepr),
            other => Err(format!("unknown basis '{other}' (expected prqe or qepr)")),
        }
    }
}

/// Multiply two elements given as text and print the product canonically.
///
/// * `A0`: Milnor-basis elements (`Q0 P(1)`, `Sq3`, sums with `+`), printed in `basis`.
/// * `G`: as `A0` but both factors must lie in G (no `Q_i`).
/// * `classical`: words `Sq3 Sq1`, printed in admissible form.
pub fn multiply_text(lhs: &str, rhs: &str, flavor: ChartFlavor, basis: Basis) -> Result<String, JobError> {
    match flavor {
        ChartFlavor::Classical => {
            let a = text::parse_word_element(lhs, WordFlavor::Classical)?;
            let b = text::parse_word_element(rhs, WordFlavor::Classical)?;
            Ok(a.multiply(&b).map_err(|e| JobError::Usage(e.to_string()))?.to_string())
        }
        ChartFlavor::A0 | ChartFlavor::G => {
            let a = text::parse_element(lhs)?;
            let b = text::parse_element(rhs)?;
            if flavor == ChartFlavor::G {
                for (src, x) in [(lhs, &a), (rhs, &b)] {
                    if x.terms().any(|m| m.e_mask() != 0) {
                        return Err(JobError::Usage(format!("'{src}' does not lie in G (it involves some Q_i)")));
                    }
                }
            }
            let p = milnor::multiply(&a, &b);
            Ok(match basis {
                Basis::Prqe => milnor::qepr_to_prqe(&p).to_string(),
                Basis::Qepr => p.to_string(),
            })
        }
        ChartFlavor::Isotropic => Err(JobError::Usage(
            "mul supports the classical, G and A0 flavors".into(),
        )),
    }
}

/// A bracket expressed in named classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedBracket {
    pub representative: String,
    pub indeterminacy: Vec<String>,
}

impl fmt::Display for NamedBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.indeterminacy.is_empty() {
            write!(f, "{}, indeterminacy 0", self.representative)
        } else {
            write!(f, "{}, indeterminacy {{{}}}", self.representative, self.indeterminacy.join(", "))
        }
    }
}

/// `⟨a, b, c⟩` for named classes of the F₂ chart of `flavor` in the window.
pub fn massey_by_name(flavor: ChartFlavor, smax: usize, tmax: i64, names: [&str; 3]) -> Result<NamedBracket, JobError> {
    if flavor == ChartFlavor::Isotropic {
        return Err(JobError::Usage("brackets are computed in the classical, G or A0 charts".into()));
    }
    let res = resolve(flavor.algebra(), smax, tmax);
    let named = ClassNames::compute(&res, smax, tmax);
    let classes = names
        .iter()
        .map(|n| {
            named
                .class(n)
                .cloned()
                .ok_or_else(|| JobError::Usage(format!("class '{n}' is not in the {flavor} chart for s <= {smax}, t <= {tmax}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match massey_triple(&res, &classes[0], &classes[1], &classes[2]) {
        Ok(m) => Ok(NamedBracket {
            representative: named.express(&m.representative),
            indeterminacy: m.indeterminacy.iter().map(|z| named.express(z)).collect(),
        }),
        Err(ProductError::NonzeroProduct(which)) => {
            let pair = if which.starts_with("a") { (names[0], names[1]) } else { (names[1], names[2]) };
            Err(JobError::Precondition(format!("{}·{} ≠ 0, so ⟨{}, {}, {}⟩ is undefined", pair.0, pair.1, names[0], names[1], names[2])))
        }
        Err(e @ ProductError::WindowExceeded { .. }) => Err(JobError::Window(e.to_string())),
        Err(e) => Err(JobError::Usage(e.to_string())),
    }
}

/// The charts the tool can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChartFlavor {
    Classical,
    G,
    A0,
    /// Ext over A₀ with coefficients in a window of H.
    Isotropic,
}

impl FromStr for ChartFlavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classical" => Ok(ChartFlavor::Classical),
            "g" => Ok(ChartFlavor::G),
            "a0" => Ok(ChartFlavor::A0),
            "isotropic" => Ok(ChartFlavor::Isotropic),
            other => Err(format!("unknown flavor '{other}' (expected classical, G, A0 or isotropic)")),
        }
    }
}

impl fmt::Display for ChartFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChartFlavor::Classical => "classical",
            ChartFlavor::G => "G",
            ChartFlavor::A0 => "A0",
            ChartFlavor::Isotropic => "isotropic",
        })
    }
}

impl ChartFlavor {
    /// The algebra resolved for this chart.
    pub fn algebra(self) -> AlgebraFlavor {
        match self {
            ChartFlavor::Classical => AlgebraFlavor::Classical,
            ChartFlavor::G => AlgebraFlavor::G,
            ChartFlavor::A0 | ChartFlavor::Isotropic => AlgebraFlavor::A0,
        }
    }
}

/// Minimal resolution of F₂ over an algebra flavor.
pub fn resolve(flavor: AlgebraFlavor, smax: usize, tmax: i64) -> FreeResolution {
    FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(flavor)), smax, tmax)
}

/// `Ext_{flavor}(F₂, F₂)` for `s ≤ smax`, `t ≤ tmax`.
pub fn f2_chart(flavor: AlgebraFlavor, smax: usize, tmax: i64, options: ChartOptions) -> ExtChart {
    ext_chart(&resolve(flavor, smax, tmax), smax, tmax, options)
}

/// The isotropic chart: Ext over A₀ with coefficients in the solved window
/// of H. Cells beyond the window's exact depth are flagged as truncated.
pub fn isotropic_chart(window: &IsotropicWindow, smax: usize, tmax: i64) -> Result<ExtChart, IsotropicError> {
    let table = solve_action_table(window)?;
    let module = table.window_module(window)?;
    let res = resolve(AlgebraFlavor::A0, smax + 1, tmax);
    let mut chart = ext_chart_with_coefficients(&res, &module, "H", smax, tmax, exact_depth(window));
    chart.algebra = "isotropic".into();
    Ok(chart)
}

/// The outcome of the headline comparison.
#[derive(Debug, Clone, Serialize)]
pub struct IsotropicReport {
    pub smax: usize,
    pub tmax: i64,
    /// `None` when the action table was solved uniquely; otherwise why not,
    /// in which case `chart` is the G chart.
    pub ambiguity: Option<String>,
    pub chart: ExtChart,
    pub classical: ExtChart,
    pub doubling: ComparisonReport,
    pub vanishing: ComparisonReport,
}

impl IsotropicReport {
    pub fn matches(&self) -> bool {
        self.doubling.passed() && self.vanishing.mismatches.is_empty()
    }

    /// Cells inside the window that are not exact.
    pub fn truncated(&self) -> &[crate::homological::CellKey] {
        &self.chart.truncated
    }
}

/// Compute the isotropic chart over `window` and compare it with the
/// classical chart under `(s, t) ↦ (s, 2t, t)`.
pub fn isotropic_report(window: &IsotropicWindow, smax: usize, tmax: i64) -> IsotropicReport {
    let (chart, ambiguity) = match isotropic_chart(window, smax, tmax) {
        Ok(c) => (c, None),
        Err(e) => (f2_chart(AlgebraFlavor::G, smax, tmax, ChartOptions::default()), Some(e.to_string())),
    };
    let classical = f2_chart(AlgebraFlavor::Classical, smax, tmax / 2, ChartOptions::default());
    let doubling = compare_doubling(&classical, &chart, i64::MAX);
    let vanishing = vanishing_check(&chart);
    IsotropicReport {
        smax,
        tmax,
        ambiguity,
        chart,
        classical,
        doubling,
        vanishing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flavors_parse() {
        assert_eq!("G".parse::<ChartFlavor>().unwrap(), ChartFlavor::G);
        assert_eq!("a0".parse::<ChartFlavor>().unwrap(), ChartFlavor::A0);
        assert!("B".parse::<ChartFlavor>().is_err());
        assert_eq!(ChartFlavor::Isotropic.to_string(), "isotropic");
    }

    #[test]
    fn multiplication_examples() {
        let m = |a, b, f| multiply_text(a, b, f, Basis::Prqe).unwrap();
        assert_eq!(m("Q0", "P(1)", ChartFlavor::A0), "P(1) Q0 + Q1");
        assert_eq!(multiply_text("Q0", "P(1)", ChartFlavor::A0, Basis::Qepr).unwrap(), "Q0 P(1)");
        assert_eq!(m("Sq1", "Sq1", ChartFlavor::Classical), "0");
        assert_eq!(m("Sq2", "Sq2", ChartFlavor::Classical), "Sq3 Sq1");
        assert_eq!(m("P(1)", "P(2)", ChartFlavor::A0), "P(3)");
        assert_eq!(m("P(1)", "P(2)", ChartFlavor::G), "P(3)");
        assert!(matches!(multiply_text("Q0", "P(1)", ChartFlavor::G, Basis::Prqe), Err(JobError::Usage(_))));
        let e = multiply_text("Q0 +", "P(1)", ChartFlavor::A0, Basis::Prqe).unwrap_err();
        assert!(matches!(e, JobError::Parse(ParseError { position: 4, .. })));
    }

    #[test]
    fn brackets_by_name() {
        let b = massey_by_name(ChartFlavor::Classical, 4, 12, ["h0", "h1", "h0"]).unwrap();
        assert_eq!(b.to_string(), "h1^2, indeterminacy 0");
        let b = massey_by_name(ChartFlavor::Classical, 4, 12, ["h1", "h0", "h1"]).unwrap();
        assert_eq!(b.representative, "h0h2");
        assert!(matches!(
            massey_by_name(ChartFlavor::Classical, 4, 12, ["h0", "h0", "h1"]),
            Err(JobError::Precondition(_))
        ));
        assert!(matches!(
            massey_by_name(ChartFlavor::Classical, 4, 12, ["h0", "h9", "h1"]),
            Err(JobError::Usage(_))
        ));
    }

    #[test]
    fn small_isotropic_report_matches() {
        let r = isotropic_report(&IsotropicWindow::for_depth(16), 4, 16);
        assert!(r.ambiguity.is_none());
        assert!(r.matches(), "{:?} {:?}", r.doubling, r.vanishing);
        assert!(r.doubling.compared > 10);
    }

    #[test]
    fn tiny_window_matches_inside_safe_region() {
        let r = isotropic_report(&IsotropicWindow::full(0), 3, 12);
        assert!(r.matches(), "{:?}", r.doubling);
        assert!(!r.truncated().is_empty());
    }
}
