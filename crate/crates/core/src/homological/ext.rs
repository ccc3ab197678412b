//! Ext charts: dimensions per cell, truncation flags, named classes and
//! product / bracket tables, plus the chart comparisons used downstream.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gf2::{EchelonBasis, F2Vector, RowReduction};
use crate::isotropic::IsotropicWindow;
use crate::milnor::Bidegree;
use crate::module::FiniteModule;

use super::algebra::AlgebraFlavor;
use super::products::{massey_triple, yoneda_product, ExtClass, ProductError};
use super::resolution::FreeResolution;

/// A chart position. `u` is `None` for singly graded (classical) charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub s: usize,
    pub t: i64,
    pub u: Option<i64>,
}

impl CellKey {
    pub fn new(s: usize, d: Bidegree, bigraded: bool) -> Self {
        CellKey {
            s,
            t: d.p,
            u: bigraded.then_some(d.q),
        }
    }

    pub fn bidegree(&self) -> Bidegree {
        Bidegree::new(self.t, self.u.unwrap_or(0))
    }

    /// The stem `t − s`.
    pub fn stem(&self) -> i64 {
        self.t - self.s as i64
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.u {
            Some(u) => write!(f, "({}, {}, {})", self.s, self.t, u),
            None => write!(f, "({}, {})", self.s, self.t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartCell {
    pub s: usize,
    pub t: i64,
    pub u: Option<i64>,
    pub dim: usize,
}

impl ChartCell {
    pub fn key(&self) -> CellKey {
        CellKey {
            s: self.s,
            t: self.t,
            u: self.u,
        }
    }
}

/// A named basis class, in coordinates dual to the resolution's generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedClass {
    pub name: String,
    pub s: usize,
    pub t: i64,
    pub u: Option<i64>,
    pub coords: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub classes: [String; 3],
    pub representative: String,
    pub indeterminacy: Vec<String>,
}

/// An Ext chart over a window `s ≤ smax`, `t ≤ tmax`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtChart {
    pub algebra: String,
    pub coefficients: String,
    pub bigraded: bool,
    pub smax: usize,
    pub tmax: i64,
    /// Cells with `s ≤ exact_smax` and `t ≤ exact_tmax` are exact; the rest
    /// of the window is truncated.
    #[serde(default)]
    pub exact_smax: Option<usize>,
    #[serde(default)]
    pub exact_tmax: Option<i64>,
    /// Non-zero cells, sorted.
    pub cells: Vec<ChartCell>,
    /// Truncated cells where the computation found something to report
    /// (every cell outside the exact region is truncated, listed or not).
    pub truncated: Vec<CellKey>,
    pub classes: Vec<NamedClass>,
    pub products: Vec<ProductEntry>,
    pub brackets: Vec<BracketEntry>,
}

impl ExtChart {
    pub fn dim(&self, key: CellKey) -> usize {
        self.cells
            .binary_search_by(|c| c.key().cmp(&key))
            .map(|i| self.cells[i].dim)
            .unwrap_or(0)
    }

    /// `dim Ext^{s,d}`, reading `u` only for bigraded charts.
    pub fn dim_at(&self, s: usize, d: Bidegree) -> usize {
        self.dim(CellKey::new(s, d, self.bigraded))
    }

    pub fn is_truncated(&self, key: CellKey) -> bool {
        self.exact_smax.is_some_and(|s| key.s > s)
            || self.exact_tmax.is_some_and(|t| key.t > t)
            || self.truncated.binary_search(&key).is_ok()
    }

    /// Whether every cell of the window is exact.
    pub fn is_exact(&self) -> bool {
        self.exact_smax.is_none_or(|s| s >= self.smax)
            && self.exact_tmax.is_none_or(|t| t >= self.tmax)
            && self.truncated.is_empty()
    }

    pub fn in_window(&self, key: CellKey) -> bool {
        key.s <= self.smax && key.t <= self.tmax
    }

    pub fn class(&self, name: &str) -> Option<&NamedClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    fn from_dims(
        algebra: String,
        coefficients: String,
        bigraded: bool,
        smax: usize,
        tmax: i64,
        dims: BTreeMap<CellKey, usize>,
        truncated: BTreeSet<CellKey>,
    ) -> Self {
        ExtChart {
            algebra,
            coefficients,
            bigraded,
            smax,
            tmax,
            exact_smax: None,
            exact_tmax: None,
            cells: dims
                .into_iter()
                .filter(|(_, n)| *n > 0)
                .map(|(k, dim)| ChartCell {
                    s: k.s,
                    t: k.t,
                    u: k.u,
                    dim,
                })
                .collect(),
            truncated: truncated.into_iter().collect(),
            classes: Vec::new(),
            products: Vec::new(),
            brackets: Vec::new(),
        }
    }
}

/// What to attach to an F₂ chart besides the dimensions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChartOptions {
    pub names: bool,
    pub products: bool,
    pub brackets: bool,
}

impl ChartOptions {
    pub fn all() -> Self {
        ChartOptions {
            names: true,
            products: true,
            brackets: true,
        }
    }
}

/// `Ext_A(F₂, F₂)` read off a minimal resolution: the dimension of each cell
/// is the number of generators there.
pub fn ext_chart(res: &FreeResolution, smax: usize, tmax: i64, options: ChartOptions) -> ExtChart {
    let flavor = res.algebra().flavor();
    let bigraded = flavor.is_bigraded();
    let mut dims = BTreeMap::new();
    for s in 0..=smax {
        for &g in res.generators(s) {
            if g.p <= tmax {
                *dims.entry(CellKey::new(s, g, bigraded)).or_insert(0) += 1;
            }
        }
    }
    let mut chart = ExtChart::from_dims(flavor.to_string(), "F2".into(), bigraded, smax, tmax, dims, BTreeSet::new());
    chart.exact_smax = Some(smax.min(res.smax()));
    chart.exact_tmax = Some(tmax.min(res.pmax()));
    if options.names || options.products || options.brackets {
        let names = ClassNames::compute(res, smax.min(res.smax()), tmax.min(res.pmax()));
        chart.classes = names.named_classes(bigraded);
        if options.products {
            chart.products = names.product_table(res);
        }
        if options.brackets {
            chart.brackets = names.bracket_table(res);
        }
    }
    chart
}

// ---------------------------------------------------------------------------
// Names

/// Bidegree of `h_i` (the class dual to the `i`-th indecomposable) in each flavor.
pub fn h_bidegree(flavor: AlgebraFlavor, i: u32) -> Option<Bidegree> {
    match flavor {
        AlgebraFlavor::Classical => Some(Bidegree::new(1 << i, 0)),
        AlgebraFlavor::A0 => Some(if i == 0 {
            Bidegree::new(1, 0)
        } else {
            Bidegree::new(1 << i, 1 << (i - 1))
        }),
        AlgebraFlavor::G => Some(Bidegree::new(1 << (i + 1), 1 << i)),
        AlgebraFlavor::Exterior(n) if (i as usize) <= n => Some(crate::milnor::q_bidegree(i as usize)),
        _ => None,
    }
}

fn h_letter(flavor: AlgebraFlavor) -> &'static str {
    match flavor {
        AlgebraFlavor::Exterior(_) => "v",
        _ => "h",
    }
}

fn monomial_name(letter: &str, exps: &[(u32, usize)]) -> String {
    if exps.is_empty() {
        return "1".into();
    }
    exps.iter()
        .map(|&(i, e)| {
            if e == 1 {
                format!("{letter}{i}")
            } else {
                format!("{letter}{i}^{e}")
            }
        })
        .collect()
}

/// Named bases for every cell of an F₂ chart: monomials in the `h_i` where they
/// are independent, `x_…` placeholders for the rest.
pub struct ClassNames {
    flavor: AlgebraFlavor,
    /// The `h_i` present in the window, as `(i, class)`.
    pub generators: Vec<(u32, ExtClass)>,
    /// Per cell, `(name, class)` forming a basis.
    pub cells: BTreeMap<(usize, Bidegree), Vec<(String, ExtClass)>>,
}

impl ClassNames {
    pub fn compute(res: &FreeResolution, smax: usize, tmax: i64) -> Self {
        let flavor = res.algebra().flavor();
        let letter = h_letter(flavor);
        let mut generators = Vec::new();
        for i in 0..20u32 {
            let Some(d) = h_bidegree(flavor, i) else { break };
            if d.p > tmax {
                break;
            }
            if smax >= 1 && res.generators_in(1, d).len() == 1 {
                generators.push((i, ExtClass::basis(res, 1, d, 0)));
            }
        }
        let mut cells: BTreeMap<(usize, Bidegree), Vec<(String, ExtClass)>> = BTreeMap::new();
        let mut spans: HashMap<(usize, Bidegree), EchelonBasis> = HashMap::new();
        let mut offer = |cells: &mut BTreeMap<_, Vec<_>>, name: String, c: ExtClass| {
            let span = spans
                .entry((c.s, c.degree))
                .or_insert_with(|| EchelonBasis::new(c.coords.len()));
            if span.insert(&c.coords) {
                cells.entry((c.s, c.degree)).or_default().push((name, c));
            }
        };
        if res.generators_in(0, Bidegree::ZERO).len() == 1 {
            offer(&mut cells, "1".into(), ExtClass::unit(res));
        }
        // monomials h_{i1}…h_{is} with i1 ≤ … ≤ is, built by appending letters
        // (exponents, first usable letter, class)
        type Monomial = (Vec<(u32, usize)>, usize, ExtClass);
        let mut layer: Vec<Monomial> = vec![(Vec::new(), 0, ExtClass::unit(res))];
        for _s in 1..=smax {
            let mut next = Vec::new();
            for (exps, first, class) in &layer {
                for (k, (i, h)) in generators.iter().enumerate().skip(*first) {
                    let d = class.degree + h.degree;
                    if d.p > tmax {
                        continue;
                    }
                    let Ok(prod) = yoneda_product(res, class, h) else { continue };
                    if prod.is_zero() {
                        continue;
                    }
                    let mut e = exps.clone();
                    match e.last_mut() {
                        Some((j, n)) if j == i => *n += 1,
                        _ => e.push((*i, 1)),
                    }
                    offer(&mut cells, monomial_name(letter, &e), prod.clone());
                    next.push((e, k, prod));
                }
            }
            layer = next;
        }
        // complete every cell with placeholders
        for s in 0..=smax {
            let mut by_degree: BTreeMap<Bidegree, usize> = BTreeMap::new();
            for &g in res.generators(s) {
                if g.p <= tmax {
                    *by_degree.entry(g).or_insert(0) += 1;
                }
            }
            for (d, n) in by_degree {
                let entry = cells.entry((s, d)).or_default();
                let mut span = EchelonBasis::new(n);
                for (_, c) in entry.iter() {
                    span.insert(&c.coords);
                }
                let mut extra = 0;
                for k in 0..n {
                    let c = ExtClass::basis(res, s, d, k);
                    if span.insert(&c.coords) {
                        extra += 1;
                        let base = if flavor.is_bigraded() {
                            format!("x_{}_{}_{}", s, d.p, d.q)
                        } else {
                            format!("x_{}_{}", s, d.p)
                        };
                        entry.push((base, c));
                    }
                }
                if extra > 1 {
                    let mut idx = 0;
                    for (name, _) in entry.iter_mut() {
                        if name.starts_with("x_") {
                            *name = format!("{name}_{idx}");
                            idx += 1;
                        }
                    }
                }
            }
        }
        ClassNames {
            flavor,
            generators,
            cells,
        }
    }

    pub fn named_classes(&self, bigraded: bool) -> Vec<NamedClass> {
        self.cells
            .iter()
            .flat_map(|((s, d), v)| {
                v.iter().map(move |(name, c)| NamedClass {
                    name: name.clone(),
                    s: *s,
                    t: d.p,
                    u: bigraded.then_some(d.q),
                    coords: c.coords.to_bits().into_iter().map(u8::from).collect(),
                })
            })
            .collect()
    }

    pub fn class(&self, name: &str) -> Option<&ExtClass> {
        self.cells.values().flatten().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn h(&self, i: u32) -> Option<&ExtClass> {
        self.generators.iter().find(|(j, _)| *j == i).map(|(_, c)| c)
    }

    /// Express a class in the named basis of its cell: names joined by `+`,
    /// `0` for zero, `?` if the cell lies outside the named window.
    pub fn express(&self, c: &ExtClass) -> String {
        if c.is_zero() {
            return "0".into();
        }
        let Some(basis) = self.cells.get(&(c.s, c.degree)) else {
            return "?".into();
        };
        let rows: Vec<F2Vector> = basis.iter().map(|(_, b)| b.coords.clone()).collect();
        match RowReduction::new(&rows, c.coords.len()).preimage(&c.coords) {
            Some(x) => x.iter_ones().map(|i| basis[i].0.clone()).collect::<Vec<_>>().join(" + "),
            None => "?".into(),
        }
    }

    /// `h_i · x` for every generator `h_i` and named class `x` in the window.
    pub fn product_table(&self, res: &FreeResolution) -> Vec<ProductEntry> {
        let mut out = Vec::new();
        for (i, h) in &self.generators {
            for ((s, _), classes) in &self.cells {
                if *s == 0 {
                    continue;
                }
                for (name, x) in classes {
                    let Ok(p) = yoneda_product(res, h, x) else { continue };
                    if !self.cells.contains_key(&(p.s, p.degree)) && !p.is_zero() {
                        continue;
                    }
                    out.push(ProductEntry {
                        left: format!("{}{i}", h_letter(self.flavor)),
                        right: name.clone(),
                        result: self.express(&p),
                    });
                }
            }
        }
        out
    }

    /// `⟨h_i, h_j, h_k⟩` for every defined triple inside the window.
    pub fn bracket_table(&self, res: &FreeResolution) -> Vec<BracketEntry> {
        let letter = h_letter(self.flavor);
        let mut out = Vec::new();
        for (i, a) in &self.generators {
            for (j, b) in &self.generators {
                for (k, c) in &self.generators {
                    match massey_triple(res, a, b, c) {
                        Ok(m) => out.push(BracketEntry {
                            classes: [format!("{letter}{i}"), format!("{letter}{j}"), format!("{letter}{k}")],
                            representative: self.express(&m.representative),
                            indeterminacy: m.indeterminacy.iter().map(|z| self.express(z)).collect(),
                        }),
                        Err(ProductError::NonzeroProduct(_) | ProductError::WindowExceeded { .. }) => {}
                        Err(e) => panic!("unexpected bracket failure: {e}"),
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Coefficients in a finite module

/// `Ext_A^{s,(t,u)}(F₂, N)` from a minimal resolution `F → F₂` via the cochain
/// complex `C^s_{(t,u)} = ⊕_{g ∈ F_s} N_{|g| − (t,u)}`, with
/// `(δf)(g') = Σ a_k f(g_k)` for `d g' = Σ a_k g_k`.
pub struct CoefficientComplex<'a> {
    res: &'a FreeResolution,
    module: &'a FiniteModule,
    /// For each `s ≥ 1`, generator `j` of `F_{s−1}` ↦ `(g', a)` with `a·g_j` in `d g'`.
    incoming: Vec<HashMap<usize, Vec<(usize, crate::milnor::MilnorMonomial)>>>,
}

impl<'a> CoefficientComplex<'a> {
    pub fn new(res: &'a FreeResolution, module: &'a FiniteModule) -> Self {
        let mut incoming = vec![HashMap::new()];
        for s in 1..=res.smax() {
            let mut map: HashMap<usize, Vec<_>> = HashMap::new();
            for g in 0..res.generators(s).len() {
                for (j, a) in res.differential(s, g) {
                    map.entry(*j).or_default().push((g, a.clone()));
                }
            }
            incoming.push(map);
        }
        CoefficientComplex { res, module, incoming }
    }

    /// Cochain basis `(generator, module basis index)` in `C^s_{(t,u)}`.
    pub fn basis(&self, s: usize, d: Bidegree) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (j, &g) in self.res.generators(s).iter().enumerate() {
            for &b in self.module.basis_in(g - d) {
                out.push((j, b));
            }
        }
        out
    }

    /// Rank of `δ^s: C^s_d → C^{s+1}_d` (requires `s + 1 ≤ smax` of the resolution).
    pub fn rank_delta(&self, s: usize, d: Bidegree) -> usize {
        let source = self.basis(s, d);
        let target = self.basis(s + 1, d);
        if source.is_empty() || target.is_empty() {
            return 0;
        }
        let position: HashMap<(usize, usize), usize> = target.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let rows: Vec<F2Vector> = source
            .iter()
            .map(|&(j, b)| {
                let mut row = F2Vector::zeros(target.len());
                if let Some(list) = self.incoming[s + 1].get(&j) {
                    for (g, a) in list {
                        let v = self.module.act(a, b);
                        for b2 in v.iter_ones() {
                            if let Some(&pos) = position.get(&(*g, b2)) {
                                row.flip(pos);
                            }
                        }
                    }
                }
                row
            })
            .collect();
        RowReduction::new(&rows, target.len()).rank()
    }

    pub fn ext_dimension(&self, s: usize, d: Bidegree) -> usize {
        let c = self.basis(s, d).len();
        if c == 0 {
            return 0;
        }
        let out = self.rank_delta(s, d);
        let inc = if s == 0 { 0 } else { self.rank_delta(s - 1, d) };
        c - out - inc
    }

    /// All internal degrees `(t,u)` with `t ≤ tmax` where some `C^s` is non-zero.
    pub fn degrees(&self, s: usize, tmax: i64) -> BTreeSet<Bidegree> {
        let support: Vec<Bidegree> = self.module.support().collect();
        let mut out = BTreeSet::new();
        for &g in self.res.generators(s) {
            for &n in &support {
                let d = g - n;
                if d.p <= tmax {
                    out.insert(d);
                }
            }
        }
        out
    }
}

/// The largest depth `T` such that the window holds every monomial of H with
/// `p ≥ −T` (`None` if it misses even the unit).
pub fn exact_depth(window: &IsotropicWindow) -> Option<i64> {
    let mut best = None;
    let mut t = 0;
    while t <= -window.pmin {
        let complete = IsotropicWindow::for_depth(t)
            .basis()
            .into_iter()
            .all(|m| window.contains(m));
        if !complete {
            break;
        }
        best = Some(t);
        t += 1;
    }
    best
}

/// `Ext_A(F₂, N)` as a chart. Cells are exact when `t ≤ exact_through` (the
/// depth to which `N` agrees with the intended coefficients), `t ≤ pmax` of
/// the resolution and `s + 1 ≤ smax` of the resolution; the rest are flagged.
pub fn ext_chart_with_coefficients(
    res: &FreeResolution,
    module: &FiniteModule,
    coefficients: &str,
    smax: usize,
    tmax: i64,
    exact_through: Option<i64>,
) -> ExtChart {
    let cx = CoefficientComplex::new(res, module);
    let bigraded = res.algebra().flavor().is_bigraded();
    let mut dims = BTreeMap::new();
    let mut truncated = BTreeSet::new();
    let exact_tmax = exact_through.map_or(-1, |x| x.min(res.pmax())).min(tmax);
    let exact_smax = smax.min(res.smax().saturating_sub(1));
    for s in 0..=smax.min(res.smax()) {
        let degrees = cx.degrees(s, tmax);
        for d in degrees {
            let key = CellKey::new(s, d, bigraded);
            let exact = d.p <= exact_tmax && s <= exact_smax && res.smax() > 0;
            if !exact {
                truncated.insert(key);
            }
            if s < res.smax() {
                let n = cx.ext_dimension(s, d);
                if n > 0 {
                    dims.insert(key, n);
                }
            }
        }
    }
    let mut chart = ExtChart::from_dims(
        res.algebra().flavor().to_string(),
        coefficients.into(),
        bigraded,
        smax,
        tmax,
        dims,
        truncated,
    );
    chart.exact_smax = Some(exact_smax);
    chart.exact_tmax = Some(exact_tmax);
    chart
}

// ---------------------------------------------------------------------------
// Comparisons

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub compared: usize,
    pub mismatches: Vec<String>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.compared > 0
    }
}

/// Compare a classical chart with a bigraded one under `(s,t) ↦ (s, 2t, t)`
/// for classical stems `≤ stem_max`, and require the bigraded chart to vanish
/// off the line `t = 2u`. Only cells exact in both charts are compared.
pub fn compare_doubling(classical: &ExtChart, target: &ExtChart, stem_max: i64) -> ComparisonReport {
    let mut report = ComparisonReport::default();
    for s in 0..=classical.smax.min(target.smax) {
        for t in s as i64..=classical.tmax {
            if t - s as i64 > stem_max || 2 * t > target.tmax {
                continue;
            }
            let ck = CellKey { s, t, u: None };
            let tk = CellKey {
                s,
                t: 2 * t,
                u: Some(t),
            };
            if classical.is_truncated(ck) || target.is_truncated(tk) {
                continue;
            }
            report.compared += 1;
            let (a, b) = (classical.dim(ck), target.dim(tk));
            if a != b {
                report.mismatches.push(format!("classical {ck} has {a}, {} {tk} has {b}", target.coefficients));
            }
        }
    }
    for c in &target.cells {
        if c.u.is_some_and(|u| c.t != 2 * u) && !target.is_truncated(c.key()) {
            report.mismatches.push(format!("non-zero cell {} off the line t = 2u", c.key()));
        }
    }
    report
}

/// Compare two charts cell by cell over the cells exact in both.
pub fn compare_charts(a: &ExtChart, b: &ExtChart) -> ComparisonReport {
    let mut report = ComparisonReport::default();
    let keys: BTreeSet<CellKey> = a.cells.iter().chain(&b.cells).map(|c| c.key()).collect();
    for k in keys {
        if !a.in_window(k) || !b.in_window(k) || a.is_truncated(k) || b.is_truncated(k) {
            continue;
        }
        report.compared += 1;
        if a.dim(k) != b.dim(k) {
            report.mismatches.push(format!("{k}: {} vs {}", a.dim(k), b.dim(k)));
        }
    }
    report
}

/// Every non-zero exact cell must satisfy `q ≤ p ≤ 2q`, `q ≥ 0`, where
/// `(p, q) = (t − s, u)`.
pub fn vanishing_check(chart: &ExtChart) -> ComparisonReport {
    let mut report = ComparisonReport::default();
    for c in &chart.cells {
        if chart.is_truncated(c.key()) {
            continue;
        }
        report.compared += 1;
        let p = c.t - c.s as i64;
        let q = c.u.unwrap_or(0);
        if !(q >= 0 && q <= p && p <= 2 * q) {
            report
                .mismatches
                .push(format!("non-zero cell {} at (p, q) = ({p}, {q})", c.key()));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::algebra::WindowedAlgebra;
    use super::*;
    use crate::isotropic::solve_action_table;

    fn resolve(flavor: AlgebraFlavor, smax: usize, pmax: i64) -> FreeResolution {
        FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(flavor)), smax, pmax)
    }

    #[test]
    fn classical_chart_and_names() {
        let res = resolve(AlgebraFlavor::Classical, 4, 12);
        let chart = ext_chart(&res, 4, 12, ChartOptions::all());
        assert!(!chart.bigraded);
        assert_eq!(chart.dim(CellKey { s: 1, t: 8, u: None }), 1);
        assert_eq!(chart.dim(CellKey { s: 1, t: 3, u: None }), 0);
        let names: Vec<&str> = chart.classes.iter().map(|c| c.name.as_str()).collect();
        for n in ["1", "h0", "h1", "h2", "h3", "h0^2", "h1^2", "h0h2", "h0^2h2", "h0^3", "x_3_11"] {
            assert!(names.contains(&n), "missing {n} in {names:?}");
        }
        // h1^3 = h0^2 h2 so only one of them is a basis name
        assert!(!names.contains(&"h1^3"));
        let entry = chart
            .products
            .iter()
            .find(|p| p.left == "h0" && p.right == "h0h2")
            .unwrap();
        assert_eq!(entry.result, "h0^2h2");
        let entry = chart.products.iter().find(|p| p.left == "h1" && p.right == "h1^2").unwrap();
        assert_eq!(entry.result, "h0^2h2");
        let entry = chart.products.iter().find(|p| p.left == "h0" && p.right == "h1").unwrap();
        assert_eq!(entry.result, "0");
        let b = chart
            .brackets
            .iter()
            .find(|b| b.classes == ["h0", "h1", "h0"].map(String::from))
            .unwrap();
        assert_eq!(b.representative, "h1^2");
        assert!(b.indeterminacy.is_empty());
        assert!(chart.truncated.is_empty());
        let json = serde_json::to_string(&chart).unwrap();
        let back: ExtChart = serde_json::from_str(&json).unwrap();
        assert_eq!(back, chart);
    }

    #[test]
    fn g_chart_is_classical_doubled() {
        let cl = resolve(AlgebraFlavor::Classical, 5, 12);
        let g = resolve(AlgebraFlavor::G, 5, 24);
        let a = ext_chart(&cl, 5, 12, ChartOptions::default());
        let b = ext_chart(&g, 5, 24, ChartOptions::default());
        let r = compare_doubling(&a, &b, 14);
        assert!(r.passed(), "{r:?}");
        assert!(vanishing_check(&b).passed());
        let names = ClassNames::compute(&g, 3, 24);
        assert!(names.class("h0h2").is_some());
        assert!(names.class("h1^2").is_some());
    }

    #[test]
    fn isotropic_chart_small_window() {
        let depth = 16;
        let window = IsotropicWindow::for_depth(depth);
        let table = solve_action_table(&window).unwrap();
        let module = table.window_module(&window).unwrap();
        let a0 = resolve(AlgebraFlavor::A0, 5, depth);
        let chart = ext_chart_with_coefficients(&a0, &module, "H", 4, depth, exact_depth(&window));
        assert_eq!(chart.dim_at(0, Bidegree::ZERO), 1);
        let g = resolve(AlgebraFlavor::G, 4, depth);
        let gchart = ext_chart(&g, 4, depth, ChartOptions::default());
        let r = compare_charts(&chart, &gchart);
        assert!(r.passed(), "{r:?}");
        assert!(vanishing_check(&chart).passed());
        assert!(chart.truncated.iter().all(|k| k.s >= 4 || k.t > depth));
    }

    #[test]
    fn truncated_window_is_flagged() {
        let window = IsotropicWindow::with_nmax(1, -6, 0, -6, 0).unwrap();
        assert_eq!(exact_depth(&window), Some(6));
        let table = solve_action_table(&window).unwrap();
        let module = table.window_module(&window).unwrap();
        let a0 = resolve(AlgebraFlavor::A0, 3, 10);
        let chart = ext_chart_with_coefficients(&a0, &module, "H", 2, 10, exact_depth(&window));
        assert!(chart.truncated.iter().any(|k| k.s == 1 && k.t > 6));
        // cells beyond the exact depth are truncated even where nothing was computed
        assert!(chart.is_truncated(CellKey {
            s: 1,
            t: 16,
            u: Some(8)
        }));
        assert!(!chart.is_exact());
        assert!(!chart.is_truncated(CellKey {
            s: 1,
            t: 2,
            u: Some(1)
        }));
    }

    #[test]
    fn vanishing_detects_violations() {
        let mut chart = ext_chart(&resolve(AlgebraFlavor::G, 2, 8), 2, 8, ChartOptions::default());
        assert!(vanishing_check(&chart).passed());
        chart.cells.push(ChartCell {
            s: 1,
            t: 7,
            u: Some(0),
            dim: 1,
        });
        assert!(!vanishing_check(&chart).passed());
    }
}
