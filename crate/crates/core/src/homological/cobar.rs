//! Independent oracles: the reduced cobar complex of the dual coalgebra
//! (computing Ext, with products by concatenation and Massey products by
//! solving for null-cochains) and the reduced bar complex (computing Tor).
//!
//! Cochains are labelled by tuples of positive-degree basis monomials; a
//! monomial stands for the dual basis element of the dual coalgebra.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::gf2::{EchelonBasis, F2Matrix, F2Vector, RowReduction};
use crate::milnor::{self, Bidegree, MilnorMonomial};

use super::algebra::WindowedAlgebra;

/// Basis of `Ā^{⊗s}` (or its dual) in one total degree.
#[derive(Debug, Default)]
pub struct TensorBasis {
    pub tuples: Vec<Vec<MilnorMonomial>>,
    index: HashMap<Vec<MilnorMonomial>, usize>,
}

impl TensorBasis {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn index_of(&self, t: &[MilnorMonomial]) -> Option<usize> {
        self.index.get(t).copied()
    }
}

/// Tensor powers of the augmentation ideal, shared by the bar and cobar complexes.
struct TensorPowers {
    algebra: Arc<WindowedAlgebra>,
    positive: Vec<Bidegree>,
    bases: HashMap<(usize, Bidegree), Arc<TensorBasis>>,
}

impl TensorPowers {
    fn new(algebra: Arc<WindowedAlgebra>, pmax: i64) -> Self {
        let positive = algebra.positive_degrees(pmax);
        TensorPowers {
            algebra,
            positive,
            bases: HashMap::new(),
        }
    }

    fn basis(&mut self, s: usize, d: Bidegree) -> Arc<TensorBasis> {
        if let Some(b) = self.bases.get(&(s, d)) {
            return b.clone();
        }
        let tuples: Vec<Vec<MilnorMonomial>> = if s == 0 {
            if d == Bidegree::ZERO {
                vec![Vec::new()]
            } else {
                Vec::new()
            }
        } else if d.p < s as i64 {
            Vec::new()
        } else {
            let mut out = Vec::new();
            for first in self.positive.clone() {
                if first.p > d.p - (s as i64 - 1) {
                    break;
                }
                let rest = self.basis(s - 1, d - first);
                if rest.is_empty() {
                    continue;
                }
                let firsts = self.algebra.basis(first);
                for a in &firsts.monomials {
                    for t in &rest.tuples {
                        let mut v = Vec::with_capacity(s);
                        v.push(a.clone());
                        v.extend(t.iter().cloned());
                        out.push(v);
                    }
                }
            }
            out
        };
        let index = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let b = Arc::new(TensorBasis { tuples, index });
        self.bases.insert((s, d), b.clone());
        b
    }
}

/// Reduced coproduct of the dual of a basis monomial, restricted to the
/// algebra's own dual (pairs with both factors positive-degree basis monomials).
fn reduced_coproduct(algebra: &WindowedAlgebra, m: &MilnorMonomial) -> Vec<(MilnorMonomial, MilnorMonomial)> {
    milnor::dual_coproduct(&m.dual())
        .into_iter()
        .filter(|(a, b)| !a.is_one() && !b.is_one())
        .map(|(a, b)| (a.dual(), b.dual()))
        .filter(|(a, b)| algebra.contains(a) && algebra.contains(b))
        .collect()
}

/// The reduced cobar complex `C^s = (Ā_*)^{⊗s}` with
/// `d[x₁|…|x_s] = Σ_i Σ [x₁|…|x_i'|x_i''|…|x_s]`.
pub struct CobarComplex {
    powers: TensorPowers,
    pmax: i64,
    coproducts: HashMap<MilnorMonomial, Vec<(MilnorMonomial, MilnorMonomial)>>,
    reductions: HashMap<(usize, Bidegree), Arc<RowReduction>>,
}

impl CobarComplex {
    pub fn new(algebra: Arc<WindowedAlgebra>, pmax: i64) -> Self {
        CobarComplex {
            powers: TensorPowers::new(algebra, pmax),
            pmax,
            coproducts: HashMap::new(),
            reductions: HashMap::new(),
        }
    }

    pub fn pmax(&self) -> i64 {
        self.pmax
    }

    pub fn basis(&mut self, s: usize, d: Bidegree) -> Arc<TensorBasis> {
        self.powers.basis(s, d)
    }

    pub fn dimension(&mut self, s: usize, d: Bidegree) -> usize {
        self.basis(s, d).len()
    }

    fn coproduct(&mut self, m: &MilnorMonomial) -> Vec<(MilnorMonomial, MilnorMonomial)> {
        if let Some(c) = self.coproducts.get(m) {
            return c.clone();
        }
        let c = reduced_coproduct(&self.powers.algebra, m);
        self.coproducts.insert(m.clone(), c.clone());
        c
    }

    /// `d` on a single basis tuple, as a vector in `C^{s+1}_d`.
    fn d_tuple(&mut self, tuple: &[MilnorMonomial], target: &TensorBasis) -> F2Vector {
        let mut out = F2Vector::zeros(target.len());
        for i in 0..tuple.len() {
            for (a, b) in self.coproduct(&tuple[i]) {
                let mut t = Vec::with_capacity(tuple.len() + 1);
                t.extend_from_slice(&tuple[..i]);
                t.push(a);
                t.push(b);
                t.extend_from_slice(&tuple[i + 1..]);
                out.flip(target.index_of(&t).expect("coproduct terms stay in the complex"));
            }
        }
        out
    }

    /// Row reduction of `d^s: C^s_d → C^{s+1}_d` (rows indexed by `C^s_d`).
    fn reduction(&mut self, s: usize, d: Bidegree) -> Arc<RowReduction> {
        if let Some(r) = self.reductions.get(&(s, d)) {
            return r.clone();
        }
        let source = self.basis(s, d);
        let target = self.basis(s + 1, d);
        let rows: Vec<F2Vector> = source.tuples.iter().map(|t| self.d_tuple(t, &target)).collect();
        let r = Arc::new(RowReduction::new(&rows, target.len()));
        self.reductions.insert((s, d), r.clone());
        r
    }

    pub fn differential(&mut self, s: usize, d: Bidegree, v: &F2Vector) -> F2Vector {
        let source = self.basis(s, d);
        let target = self.basis(s + 1, d);
        let mut out = F2Vector::zeros(target.len());
        for i in v.iter_ones() {
            out.add_assign(&self.d_tuple(&source.tuples[i], &target));
        }
        out
    }

    pub fn rank_d(&mut self, s: usize, d: Bidegree) -> usize {
        self.reduction(s, d).rank()
    }

    /// `dim Ext^{s,d} = dim C^s − rank d^s − rank d^{s−1}`.
    pub fn ext_dimension(&mut self, s: usize, d: Bidegree) -> usize {
        let c = self.dimension(s, d);
        let out_rank = self.rank_d(s, d);
        let in_rank = if s == 0 { 0 } else { self.rank_d(s - 1, d) };
        c - out_rank - in_rank
    }

    /// All non-zero `Ext^{s,d}` with `s ≤ smax`, `p ≤ pmax`.
    pub fn ext_dimensions(&mut self, smax: usize) -> BTreeMap<(usize, Bidegree), usize> {
        let mut degrees = vec![Bidegree::ZERO];
        degrees.extend(self.powers.positive_degrees_up_to(self.pmax));
        let mut out = BTreeMap::new();
        for s in 0..=smax {
            for &d in &degrees {
                let n = self.ext_dimension(s, d);
                if n > 0 {
                    out.insert((s, d), n);
                }
            }
        }
        out
    }

    /// The single-letter cochain `[m]`.
    pub fn letter(&mut self, m: &MilnorMonomial) -> (usize, Bidegree, F2Vector) {
        let d = self.powers.algebra.bidegree_of(m);
        let b = self.basis(1, d);
        let mut v = F2Vector::zeros(b.len());
        v.flip(b.index_of(std::slice::from_ref(m)).expect("positive basis monomial"));
        (1, d, v)
    }

    /// Cobar product by concatenation, `[x]·[y] = [x|y]`.
    pub fn concat(&mut self, x: &(usize, Bidegree, F2Vector), y: &(usize, Bidegree, F2Vector)) -> (usize, Bidegree, F2Vector) {
        let (s, d) = (x.0 + y.0, x.1 + y.1);
        let bx = self.basis(x.0, x.1);
        let by = self.basis(y.0, y.1);
        let target = self.basis(s, d);
        let mut out = F2Vector::zeros(target.len());
        for i in x.2.iter_ones() {
            for j in y.2.iter_ones() {
                let mut t = bx.tuples[i].clone();
                t.extend(by.tuples[j].iter().cloned());
                out.flip(target.index_of(&t).expect("concatenation stays in the complex"));
            }
        }
        (s, d, out)
    }

    pub fn is_cocycle(&mut self, s: usize, d: Bidegree, v: &F2Vector) -> bool {
        self.differential(s, d, v).is_zero()
    }

    /// Some `u` with `d u = v`, if `v` is a coboundary.
    pub fn bounding_cochain(&mut self, s: usize, d: Bidegree, v: &F2Vector) -> Option<F2Vector> {
        if s == 0 {
            return if v.is_zero() { Some(F2Vector::zeros(0)) } else { None };
        }
        self.reduction(s - 1, d).preimage(v)
    }

    pub fn is_coboundary(&mut self, s: usize, d: Bidegree, v: &F2Vector) -> bool {
        self.bounding_cochain(s, d, v).is_some()
    }

    /// Rank of the span of cocycles `vs` in cohomology.
    pub fn cohomology_rank(&mut self, s: usize, d: Bidegree, vs: &[F2Vector]) -> usize {
        let n = self.dimension(s, d);
        let mut span = EchelonBasis::new(n);
        if s > 0 {
            let source = self.basis(s - 1, d);
            let target = self.basis(s, d);
            for t in &source.tuples {
                let row = self.d_tuple(t, &target);
                span.insert(&row);
            }
        }
        let base = span.dimension();
        for v in vs {
            span.insert(v);
        }
        span.dimension() - base
    }

    /// `⟨a, b, c⟩ = ū c + a v̄` where `d ū = a b`, `d v̄ = b c`, or `None` if a
    /// product fails to bound.
    pub fn massey(
        &mut self,
        a: &(usize, Bidegree, F2Vector),
        b: &(usize, Bidegree, F2Vector),
        c: &(usize, Bidegree, F2Vector),
    ) -> Option<(usize, Bidegree, F2Vector)> {
        let ab = self.concat(a, b);
        let bc = self.concat(b, c);
        let u = self.bounding_cochain(ab.0, ab.1, &ab.2)?;
        let v = self.bounding_cochain(bc.0, bc.1, &bc.2)?;
        let u = (ab.0 - 1, ab.1, u);
        let v = (bc.0 - 1, bc.1, v);
        let left = self.concat(&u, c);
        let right = self.concat(a, &v);
        let mut sum = left.2;
        sum.add_assign(&right.2);
        Some((left.0, left.1, sum))
    }
}

impl TensorPowers {
    fn positive_degrees_up_to(&self, pmax: i64) -> Vec<Bidegree> {
        // all total degrees of tuples: sums of positive degrees, bounded by pmax
        let mut all = std::collections::BTreeSet::new();
        let mut frontier = vec![Bidegree::ZERO];
        while let Some(x) = frontier.pop() {
            for &p in &self.positive {
                let y = x + p;
                if y.p <= pmax && all.insert(y) {
                    frontier.push(y);
                }
            }
        }
        all.into_iter().collect()
    }
}

/// The reduced bar complex `B_s = Ā^{⊗s}` with
/// `d[a₁|…|a_s] = Σ_i [a₁|…|a_i a_{i+1}|…|a_s]`, computing `Tor^A(F₂, F₂)`.
pub struct BarComplex {
    powers: TensorPowers,
    pmax: i64,
    ranks: HashMap<(usize, Bidegree), usize>,
}

impl BarComplex {
    pub fn new(algebra: Arc<WindowedAlgebra>, pmax: i64) -> Self {
        BarComplex {
            powers: TensorPowers::new(algebra, pmax),
            pmax,
            ranks: HashMap::new(),
        }
    }

    pub fn dimension(&mut self, s: usize, d: Bidegree) -> usize {
        self.powers.basis(s, d).len()
    }

    /// Rank of `d_s: B_s → B_{s−1}` in degree `d`.
    pub fn rank_d(&mut self, s: usize, d: Bidegree) -> usize {
        if s <= 1 {
            return 0;
        }
        if let Some(&r) = self.ranks.get(&(s, d)) {
            return r;
        }
        let source = self.powers.basis(s, d);
        let target = self.powers.basis(s - 1, d);
        let algebra = self.powers.algebra.clone();
        let rows: Vec<F2Vector> = source
            .tuples
            .iter()
            .map(|t| {
                let mut out = F2Vector::zeros(target.len());
                for i in 0..t.len() - 1 {
                    for prod in algebra.multiply(&t[i], &t[i + 1]).iter() {
                        let mut u = Vec::with_capacity(t.len() - 1);
                        u.extend_from_slice(&t[..i]);
                        u.push(prod.clone());
                        u.extend_from_slice(&t[i + 2..]);
                        out.flip(target.index_of(&u).expect("products stay in the complex"));
                    }
                }
                out
            })
            .collect();
        let r = crate::gf2::rank(&F2Matrix::from_rows(rows, target.len()));
        self.ranks.insert((s, d), r);
        r
    }

    pub fn tor_dimension(&mut self, s: usize, d: Bidegree) -> usize {
        self.dimension(s, d) - self.rank_d(s, d) - self.rank_d(s + 1, d)
    }

    /// `Σ_s (−1)^s dim B_s` in degree `d` (finite: `B_s` vanishes for `s > p`).
    pub fn euler_characteristic(&mut self, d: Bidegree) -> i64 {
        (0..=d.p.max(0) as usize)
            .map(|s| {
                let n = self.dimension(s, d) as i64;
                if s % 2 == 0 { n } else { -n }
            })
            .sum()
    }

    /// Total degrees reachable within the window.
    pub fn degrees(&self) -> Vec<Bidegree> {
        let mut v = vec![Bidegree::ZERO];
        v.extend(self.powers.positive_degrees_up_to(self.pmax));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::super::algebra::AlgebraFlavor;
    use super::super::resolution::FreeResolution;
    use super::*;

    fn algebra(f: AlgebraFlavor) -> Arc<WindowedAlgebra> {
        Arc::new(WindowedAlgebra::new(f))
    }

    #[test]
    fn classical_ext_one_is_the_hopf_classes() {
        let mut c = CobarComplex::new(algebra(AlgebraFlavor::Classical), 16);
        for t in 1..=16 {
            let d = Bidegree::new(t, 0);
            let expected = usize::from((t as u64).is_power_of_two());
            assert_eq!(c.ext_dimension(1, d), expected, "Ext^(1,{t})");
        }
        assert_eq!(c.ext_dimension(0, Bidegree::ZERO), 1);
    }

    #[test]
    fn classical_products() {
        let mut c = CobarComplex::new(algebra(AlgebraFlavor::Classical), 12);
        let h = |c: &mut CobarComplex, i: u32| c.letter(&MilnorMonomial::p(&[1 << i]));
        let h0 = h(&mut c, 0);
        let h1 = h(&mut c, 1);
        let h2 = h(&mut c, 2);
        for x in [&h0, &h1, &h2] {
            assert!(c.is_cocycle(x.0, x.1, &x.2));
        }
        let h0h1 = c.concat(&h0, &h1);
        assert!(c.is_coboundary(h0h1.0, h0h1.1, &h0h1.2));
        let h0h0 = c.concat(&h0, &h0);
        assert!(!c.is_coboundary(h0h0.0, h0h0.1, &h0h0.2));
        let m = c.massey(&h0, &h1, &h0).unwrap();
        let h1h1 = c.concat(&h1, &h1);
        let mut diff = m.2.clone();
        diff.add_assign(&h1h1.2);
        assert!(c.is_cocycle(m.0, m.1, &m.2));
        assert!(c.is_coboundary(m.0, m.1, &diff));
        let m = c.massey(&h1, &h0, &h1).unwrap();
        let h0h2 = c.concat(&h0, &h2);
        let mut diff = m.2.clone();
        diff.add_assign(&h0h2.2);
        assert!(c.is_coboundary(m.0, m.1, &diff));
    }

    #[test]
    fn cobar_matches_resolution_classical() {
        let mut c = CobarComplex::new(algebra(AlgebraFlavor::Classical), 10);
        let res = FreeResolution::of_ground_field(algebra(AlgebraFlavor::Classical), 5, 10);
        for s in 0..=4 {
            for t in 0..=10 {
                let d = Bidegree::new(t, 0);
                assert_eq!(c.ext_dimension(s, d), res.generators_in(s, d).len(), "s={s} t={t}");
            }
        }
    }

    #[test]
    fn cobar_matches_resolution_bigraded() {
        for flavor in [AlgebraFlavor::A0, AlgebraFlavor::G, AlgebraFlavor::Exterior(1)] {
            let mut c = CobarComplex::new(algebra(flavor), 8);
            let res = FreeResolution::of_ground_field(algebra(flavor), 5, 8);
            let dims = c.ext_dimensions(4);
            for s in 0..=4 {
                for p in 0..=8 {
                    for q in 0..=p {
                        let d = Bidegree::new(p, q);
                        let got = dims.get(&(s, d)).copied().unwrap_or(0);
                        assert_eq!(got, res.generators_in(s, d).len(), "{flavor} s={s} {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn bar_complex_tor() {
        let a = algebra(AlgebraFlavor::Classical);
        let mut b = BarComplex::new(a.clone(), 8);
        let res = FreeResolution::of_ground_field(a, 6, 8);
        for d in b.degrees() {
            let mut chi_tor = 0i64;
            for s in 0..=d.p as usize {
                let tor = b.tor_dimension(s, d);
                if s <= 5 {
                    assert_eq!(tor, res.generators_in(s, d).len(), "Tor_{s} at {d}");
                }
                chi_tor += if s % 2 == 0 { tor as i64 } else { -(tor as i64) };
            }
            assert_eq!(chi_tor, b.euler_characteristic(d));
        }
    }
}
