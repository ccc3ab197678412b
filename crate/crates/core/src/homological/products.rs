//! Yoneda products by chain-map lifting and triple Massey products by
//! null-homotopies, for Ext with F₂ coefficients over a minimal resolution of F₂.

use std::collections::HashMap;
use std::fmt;

use crate::gf2::{EchelonBasis, F2Vector};
use crate::milnor::Bidegree;

use super::resolution::FreeResolution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProductError {
    #[error("degree (s={s}, {degree}) lies outside the computed window")]
    WindowExceeded { s: usize, degree: Bidegree },
    #[error("Massey product precondition fails: {0} is non-zero")]
    NonzeroProduct(String),
    #[error("class has {got} coordinates but Ext^({s}, {degree}) has dimension {expected}")]
    BadClass {
        s: usize,
        degree: Bidegree,
        expected: usize,
        got: usize,
    },
    #[error("products need a resolution of F2 with F2 coefficients")]
    UnsupportedModule,
}

/// An element of `Ext^{s, degree}(F₂, F₂)`, in coordinates dual to the
/// generators of `F_s` in that degree (a minimal resolution has zero
/// differential on `Hom(F, F₂)`, so these are exactly the classes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtClass {
    pub s: usize,
    pub degree: Bidegree,
    pub coords: F2Vector,
}

impl ExtClass {
    pub fn new(res: &FreeResolution, s: usize, degree: Bidegree, coords: F2Vector) -> Result<Self, ProductError> {
        let expected = res.generators_in(s, degree).len();
        if coords.len() != expected {
            return Err(ProductError::BadClass {
                s,
                degree,
                expected,
                got: coords.len(),
            });
        }
        Ok(ExtClass { s, degree, coords })
    }

    /// The `k`-th basis class of `Ext^{s,degree}`.
    pub fn basis(res: &FreeResolution, s: usize, degree: Bidegree, k: usize) -> Self {
        let n = res.generators_in(s, degree).len();
        ExtClass {
            s,
            degree,
            coords: F2Vector::unit(n, k),
        }
    }

    pub fn zero(res: &FreeResolution, s: usize, degree: Bidegree) -> Self {
        let n = res.generators_in(s, degree).len();
        ExtClass {
            s,
            degree,
            coords: F2Vector::zeros(n),
        }
    }

    /// The unit of `Ext^{0,0}`.
    pub fn unit(res: &FreeResolution) -> Self {
        ExtClass::basis(res, 0, Bidegree::ZERO, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }

    pub fn add(&self, other: &ExtClass) -> ExtClass {
        assert_eq!((self.s, self.degree), (other.s, other.degree));
        let mut coords = self.coords.clone();
        coords.add_assign(&other.coords);
        ExtClass { coords, ..self.clone() }
    }
}

impl fmt::Display for ExtClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ext^({}, {}) {:?}", self.s, self.degree, self.coords)
    }
}

fn check_window(res: &FreeResolution, s: usize, degree: Bidegree) -> Result<(), ProductError> {
    if res.is_exact(s, degree) {
        Ok(())
    } else {
        Err(ProductError::WindowExceeded { s, degree })
    }
}

/// A chain map `f_k: F_{shift+k} → F_k` of internal degree `−degree`,
/// evaluated lazily on generators and memoised.
struct ChainMap<'a> {
    res: &'a FreeResolution,
    shift: usize,
    degree: Bidegree,
    memo: HashMap<(usize, usize), F2Vector>,
    /// Values of `f_0` on generators of `F_shift` in degree `self.degree`.
    base: F2Vector,
}

impl<'a> ChainMap<'a> {
    /// The lift of a class `y` (a cocycle `F_{s_y} → F₂`).
    fn lift(res: &'a FreeResolution, y: &ExtClass) -> Self {
        ChainMap {
            res,
            shift: y.s,
            degree: y.degree,
            memo: HashMap::new(),
            base: y.coords.clone(),
        }
    }

    /// `f_k(g_j)` for generator `j` of `F_{shift+k}`, an element of
    /// `(F_k)_{|g_j| − degree}`.
    fn on_generator(&mut self, k: usize, j: usize) -> F2Vector {
        if let Some(v) = self.memo.get(&(k, j)) {
            return v.clone();
        }
        let s = self.shift + k;
        let g = self.res.generators(s)[j];
        let target = g - self.degree;
        let len = self.res.free_dimension(k, target);
        let value = if k == 0 {
            let mut v = F2Vector::zeros(len);
            if g == self.degree {
                let local = self.res.generators_in(s, g).iter().position(|&x| x == j).unwrap();
                if self.base.get(local) {
                    v.flip(self.res.free_degree(0, target).generator_position(0).unwrap());
                }
            }
            v
        } else {
            let terms = self.res.differential(s, j).to_vec();
            let mut w = F2Vector::zeros(self.res.free_dimension(k - 1, target));
            for (jj, a) in &terms {
                let inner = self.on_generator(k - 1, *jj);
                let src_degree = self.res.generators(s - 1)[*jj] - self.degree;
                w.add_assign(&self.res.act_on_free(k - 1, a, &inner, src_degree));
            }
            self.res
                .preimage(k, target, &w)
                .expect("lifting obstruction vanishes for a cocycle")
        };
        self.memo.insert((k, j), value.clone());
        value
    }

    /// `f_k` applied to an arbitrary element `v ∈ (F_{shift+k})_D`.
    fn apply(&mut self, k: usize, v: &F2Vector, d: Bidegree) -> F2Vector {
        let src = self.res.free_degree(self.shift + k, d);
        let target = d - self.degree;
        let mut out = F2Vector::zeros(self.res.free_dimension(k, target));
        for i in v.iter_ones() {
            let (j, a) = src.decode(i);
            let a = a.clone();
            let inner = self.on_generator(k, j);
            let gd = self.res.generators(self.shift + k)[j] - self.degree;
            out.add_assign(&self.res.act_on_free(k, &a, &inner, gd));
        }
        out
    }
}

/// Evaluate the cochain `x` on an element `v ∈ (F_{s_x})_{|x|}`: the sum of
/// `x(g)` over the unit-coefficient components `1·g` of `v`.
fn evaluate(res: &FreeResolution, x: &ExtClass, v: &F2Vector) -> bool {
    let fd = res.free_degree(x.s, x.degree);
    let mut acc = false;
    for (local, j) in res.generators_in(x.s, x.degree).into_iter().enumerate() {
        if x.coords.get(local) {
            if let Some(pos) = fd.generator_position(j) {
                acc ^= v.get(pos);
            }
        }
    }
    acc
}

fn require_ground_field(res: &FreeResolution) -> Result<(), ProductError> {
    let m = res.module();
    if m.dimension() == 1 && m.degree(0) == Bidegree::ZERO {
        Ok(())
    } else {
        Err(ProductError::UnsupportedModule)
    }
}

/// `x · y`, computed as `x ∘ f_y` for the chain-map lift `f_y` of `y`.
pub fn yoneda_product(res: &FreeResolution, x: &ExtClass, y: &ExtClass) -> Result<ExtClass, ProductError> {
    require_ground_field(res)?;
    let s = x.s + y.s;
    let degree = x.degree + y.degree;
    check_window(res, s, degree)?;
    let mut f = ChainMap::lift(res, y);
    let gens = res.generators_in(s, degree);
    let mut coords = F2Vector::zeros(gens.len());
    for (local, j) in gens.into_iter().enumerate() {
        let v = f.on_generator(x.s, j);
        if evaluate(res, x, &v) {
            coords.flip(local);
        }
    }
    Ok(ExtClass { s, degree, coords })
}

/// A triple Massey product as a coset: representative plus indeterminacy basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasseyProduct {
    pub representative: ExtClass,
    pub indeterminacy: Vec<ExtClass>,
}

impl MasseyProduct {
    /// `true` if `z` lies in the coset.
    pub fn contains(&self, z: &ExtClass) -> bool {
        let diff = z.add(&self.representative);
        let mut span = EchelonBasis::new(diff.coords.len());
        for v in &self.indeterminacy {
            span.insert(&v.coords);
        }
        span.contains(&diff.coords)
    }
}

/// `⟨a, b, c⟩`.
///
/// `f_b ∘ f_c` is a chain map lifting `b·c = 0`; in a minimal resolution that
/// cochain vanishes identically, so a null-homotopy `H_m: F_{n+m−1} → F_m`
/// (`n = s_b + s_c`) exists with `H_0 = 0` and
/// `d H_{m+1}(x) = (f_b f_c)_m(x) + H_m(d x)`. The bracket is represented by
/// `a ∘ H_{s_a}`; the `u·c` term vanishes because `a·b = 0` at cochain level.
pub fn massey_triple(
    res: &FreeResolution,
    a: &ExtClass,
    b: &ExtClass,
    c: &ExtClass,
) -> Result<MasseyProduct, ProductError> {
    massey_with_shift(res, a, b, c, None)
}

/// As [`massey_triple`], but with the null-homotopy changed by the chain map
/// lifting `z ∈ Ext^{s_b+s_c−1}`; the representative then moves by `a·z`.
/// Used to exercise the indeterminacy.
pub fn massey_with_shift(
    res: &FreeResolution,
    a: &ExtClass,
    b: &ExtClass,
    c: &ExtClass,
    shift: Option<&ExtClass>,
) -> Result<MasseyProduct, ProductError> {
    require_ground_field(res)?;
    let bc = yoneda_product(res, b, c)?;
    if !bc.is_zero() {
        return Err(ProductError::NonzeroProduct("b·c".into()));
    }
    let ab = yoneda_product(res, a, b)?;
    if !ab.is_zero() {
        return Err(ProductError::NonzeroProduct("a·b".into()));
    }
    let n = b.s + c.s;
    if n == 0 {
        // ⟨a, b, c⟩ with b, c in Ext^0: only degenerate brackets
        return Err(ProductError::NonzeroProduct("b·c (degree 0)".into()));
    }
    let s = a.s + n - 1;
    let degree = a.degree + b.degree + c.degree;
    check_window(res, s, degree)?;
    let hdeg = b.degree + c.degree;

    let mut fc = ChainMap::lift(res, c);
    let mut fb = ChainMap::lift(res, b);
    let mut fz = shift.map(|z| ChainMap::lift(res, z));
    // H[m] maps generator j of F_{n+m−1} into (F_m)_{|g| − hdeg}
    let mut homotopy: Vec<HashMap<usize, F2Vector>> = vec![HashMap::new(); a.s + 1];

    // generators needed at each level, from the top down
    let mut needed: Vec<Vec<usize>> = vec![Vec::new(); a.s + 1];
    needed[a.s] = res.generators_in(s, degree);
    for m in (1..=a.s).rev() {
        let mut below: Vec<usize> = Vec::new();
        for &j in &needed[m] {
            for (jj, _) in res.differential(n + m - 1, j) {
                if !below.contains(jj) {
                    below.push(*jj);
                }
            }
        }
        needed[m - 1] = below;
    }
    for m in 1..=a.s {
        for &j in &needed[m].clone() {
            let src = n + m - 1;
            let g = res.generators(src)[j];
            let target = g - hdeg;
            // (f_b f_c)_{m−1}(g)
            let fcv = fc.on_generator(b.s + m - 1, j);
            let mut w = fb.apply(m - 1, &fcv, g - c.degree);
            // H_{m−1}(d g)
            if m >= 2 {
                for (jj, coef) in res.differential(src, j) {
                    let inner = &homotopy[m - 1][jj];
                    let gd = res.generators(src - 1)[*jj] - hdeg;
                    w.add_assign(&res.act_on_free(m - 1, coef, inner, gd));
                }
            }
            let mut h = res
                .preimage(m, target, &w)
                .expect("null-homotopy exists when b·c = 0");
            if let Some(fz) = fz.as_mut() {
                h.add_assign(&fz.on_generator(m, j));
            }
            homotopy[m].insert(j, h);
        }
    }
    let gens = res.generators_in(s, degree);
    let mut coords = F2Vector::zeros(gens.len());
    for (local, j) in gens.iter().enumerate() {
        if evaluate(res, a, &homotopy[a.s][j]) {
            coords.flip(local);
        }
    }
    let representative = ExtClass { s, degree, coords };
    let indeterminacy = massey_indeterminacy(res, a, b, c)?;
    Ok(MasseyProduct {
        representative,
        indeterminacy,
    })
}

/// A basis of `a·Ext^{s_b+s_c−1, |b|+|c|} + Ext^{s_a+s_b−1, |a|+|b|}·c`.
pub fn massey_indeterminacy(
    res: &FreeResolution,
    a: &ExtClass,
    b: &ExtClass,
    c: &ExtClass,
) -> Result<Vec<ExtClass>, ProductError> {
    let s = a.s + b.s + c.s - 1;
    let degree = a.degree + b.degree + c.degree;
    let n = res.generators_in(s, degree).len();
    let mut span = EchelonBasis::new(n);
    let mut out = Vec::new();
    let mut push = |z: ExtClass| {
        if span.insert(&z.coords) {
            out.push(z);
        }
    };
    if b.s + c.s >= 1 {
        let ds = b.s + c.s - 1;
        let dd = b.degree + c.degree;
        for k in 0..res.generators_in(ds, dd).len() {
            push(yoneda_product(res, a, &ExtClass::basis(res, ds, dd, k))?);
        }
    }
    if a.s + b.s >= 1 {
        let ds = a.s + b.s - 1;
        let dd = a.degree + b.degree;
        for k in 0..res.generators_in(ds, dd).len() {
            push(yoneda_product(res, &ExtClass::basis(res, ds, dd, k), c)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::algebra::{AlgebraFlavor, WindowedAlgebra};
    use super::*;

    fn classical(smax: usize, pmax: i64) -> FreeResolution {
        FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(AlgebraFlavor::Classical)), smax, pmax)
    }

    fn h(res: &FreeResolution, i: u32) -> ExtClass {
        ExtClass::basis(res, 1, Bidegree::new(1 << i, 0), 0)
    }

    #[test]
    fn unit_and_small_products() {
        let res = classical(4, 12);
        let one = ExtClass::unit(&res);
        let h0 = h(&res, 0);
        let h1 = h(&res, 1);
        assert_eq!(yoneda_product(&res, &one, &h1).unwrap(), h1);
        assert_eq!(yoneda_product(&res, &h1, &one).unwrap(), h1);
        assert!(yoneda_product(&res, &h0, &h1).unwrap().is_zero());
        let h0sq = yoneda_product(&res, &h0, &h0).unwrap();
        assert_eq!(h0sq.degree, Bidegree::new(2, 0));
        assert!(!h0sq.is_zero());
        let h1sq = yoneda_product(&res, &h1, &h1).unwrap();
        assert!(!h1sq.is_zero());
        let h1cubed = yoneda_product(&res, &h1sq, &h1).unwrap();
        assert!(!h1cubed.is_zero());
        let h2 = h(&res, 2);
        let h0sqh2 = yoneda_product(&res, &h0sq, &h2).unwrap();
        assert!(!h0sqh2.is_zero());
        // h0²h2 = h1³
        assert_eq!(h0sqh2, h1cubed);
        assert!(matches!(
            yoneda_product(&res, &h1cubed, &h(&res, 3)),
            Err(ProductError::WindowExceeded { .. })
        ));
    }

    #[test]
    fn commutative_and_associative() {
        let res = classical(4, 14);
        let gens: Vec<ExtClass> = (0..4).map(|i| h(&res, i)).collect();
        for x in &gens {
            for y in &gens {
                if x.degree.p + y.degree.p > 14 {
                    continue;
                }
                assert_eq!(yoneda_product(&res, x, y).unwrap(), yoneda_product(&res, y, x).unwrap());
                for z in &gens {
                    if x.degree.p + y.degree.p + z.degree.p > 14 {
                        continue;
                    }
                    let l = yoneda_product(&res, &yoneda_product(&res, x, y).unwrap(), z).unwrap();
                    let r = yoneda_product(&res, x, &yoneda_product(&res, y, z).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn massey_examples() {
        let res = classical(4, 10);
        let h0 = h(&res, 0);
        let h1 = h(&res, 1);
        let h2 = h(&res, 2);
        let m = massey_triple(&res, &h0, &h1, &h0).unwrap();
        assert_eq!(m.representative, yoneda_product(&res, &h1, &h1).unwrap());
        assert!(m.indeterminacy.is_empty());
        let m = massey_triple(&res, &h1, &h0, &h1).unwrap();
        assert_eq!(m.representative, yoneda_product(&res, &h0, &h2).unwrap());
        assert!(m.indeterminacy.is_empty());
        assert!(matches!(
            massey_triple(&res, &h0, &h0, &h1),
            Err(ProductError::NonzeroProduct(_))
        ));
    }

    #[test]
    fn massey_with_zero_middle() {
        let res = classical(4, 10);
        let h0 = h(&res, 0);
        let h1 = h(&res, 1);
        let zero = ExtClass::zero(&res, 1, Bidegree::new(2, 0));
        let m = massey_triple(&res, &h0, &zero, &h1).unwrap();
        // coset contains 0 and the indeterminacy is h0·Ext^{1,3} + Ext^{1,3}·h1 (here 0)
        assert!(m.contains(&ExtClass::zero(&res, 2, Bidegree::new(5, 0))));
        let m = massey_triple(&res, &h1, &ExtClass::zero(&res, 1, Bidegree::new(1, 0)), &h1).unwrap();
        // indeterminacy h1·Ext^{1,3} + Ext^{1,3}·h1 = 0, but coset still contains 0
        assert!(m.representative.is_zero());
    }

    #[test]
    fn shifting_the_homotopy_moves_within_the_coset() {
        let res = classical(5, 14);
        let h0 = h(&res, 0);
        let h1 = h(&res, 1);
        let h0sq = yoneda_product(&res, &h0, &h0).unwrap();
        // ⟨h0, h1, h0²⟩: the homotopy can be shifted by lifts of Ext^{2,4} ∋ h1²
        let m = massey_triple(&res, &h0, &h1, &h0sq).unwrap();
        let ds = Bidegree::new(4, 0);
        assert!(!res.generators_in(2, ds).is_empty());
        for k in 0..res.generators_in(2, ds).len() {
            let z = ExtClass::basis(&res, 2, ds, k);
            let shifted = massey_with_shift(&res, &h0, &h1, &h0sq, Some(&z)).unwrap();
            let expected = m.representative.add(&yoneda_product(&res, &h0, &z).unwrap());
            assert_eq!(shifted.representative, expected);
            assert!(m.contains(&shifted.representative));
        }
    }
}
