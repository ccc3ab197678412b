//! Connected bigraded algebras presented by a basis per bidegree.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::milnor::{self, Bidegree, MilnorMonomial};

/// Which algebra a [`WindowedAlgebra`] realises. All bases are labelled by
/// Milnor monomials.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraFlavor {
    /// A₀, Milnor basis `Q^E P^R`.
    A0,
    /// The subalgebra G of A₀ spanned by the `P^R`, bidegree `(q)[2q]`.
    G,
    /// The classical Steenrod algebra, Milnor basis `Sq(R)` labelled `P^R`,
    /// singly graded (weight component always 0).
    Classical,
    /// The exterior algebra `Λ(Q₀, …, Q_n)` on the first `n + 1` Milnor operations.
    Exterior(usize),
    /// The ground field F₂.
    Trivial,
}

impl AlgebraFlavor {
    /// Charts over this algebra carry a genuine weight coordinate.
    pub fn is_bigraded(self) -> bool {
        !matches!(self, AlgebraFlavor::Classical)
    }
}

impl fmt::Display for AlgebraFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraFlavor::A0 => write!(f, "A0"),
            AlgebraFlavor::G => write!(f, "G"),
            AlgebraFlavor::Classical => write!(f, "classical"),
            AlgebraFlavor::Exterior(n) => write!(f, "Lambda(Q0..Q{n})"),
            AlgebraFlavor::Trivial => write!(f, "F2"),
        }
    }
}

/// The basis of one bidegree and its inverse index.
#[derive(Debug, Default)]
pub struct AlgebraBasis {
    pub monomials: Vec<MilnorMonomial>,
    index: HashMap<MilnorMonomial, usize>,
}

impl AlgebraBasis {
    fn new(monomials: Vec<MilnorMonomial>) -> Self {
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        AlgebraBasis { monomials, index }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, m: &MilnorMonomial) -> usize {
        self.index[m]
    }

    pub fn contains(&self, m: &MilnorMonomial) -> bool {
        self.index.contains_key(m)
    }
}

type ProductCache = HashMap<(MilnorMonomial, MilnorMonomial), Arc<Vec<MilnorMonomial>>>;

/// A connected bigraded algebra with memoised bases and products.
/// Safe to share between threads; caches sit behind read-mostly locks.
#[derive(Debug)]
pub struct WindowedAlgebra {
    flavor: AlgebraFlavor,
    bases: RwLock<HashMap<Bidegree, Arc<AlgebraBasis>>>,
    products: RwLock<ProductCache>,
}

impl WindowedAlgebra {
    pub fn new(flavor: AlgebraFlavor) -> Self {
        WindowedAlgebra {
            flavor,
            bases: RwLock::new(HashMap::new()),
            products: RwLock::new(HashMap::new()),
        }
    }

    pub fn flavor(&self) -> AlgebraFlavor {
        self.flavor
    }

    /// Bidegree of a basis monomial in this algebra's grading.
    pub fn bidegree_of(&self, m: &MilnorMonomial) -> Bidegree {
        match self.flavor {
            AlgebraFlavor::Classical => Bidegree::new(m.bidegree().q, 0),
            _ => m.bidegree(),
        }
    }

    fn compute_basis(&self, d: Bidegree) -> Vec<MilnorMonomial> {
        if d == Bidegree::ZERO {
            return vec![MilnorMonomial::one()];
        }
        if d.p <= 0 {
            return Vec::new();
        }
        match self.flavor {
            AlgebraFlavor::A0 => milnor::monomials_in_bidegree(d),
            AlgebraFlavor::G => {
                if d.p != 2 * d.q {
                    return Vec::new();
                }
                milnor::p_exponents_of_weight(d.q as u64)
                    .iter()
                    .map(|r| MilnorMonomial::p(r))
                    .collect()
            }
            AlgebraFlavor::Classical => {
                if d.q != 0 {
                    return Vec::new();
                }
                milnor::p_exponents_of_weight(d.p as u64)
                    .iter()
                    .map(|r| MilnorMonomial::p(r))
                    .collect()
            }
            AlgebraFlavor::Exterior(n) => (1u64..1u64 << (n + 1))
                .map(|mask| MilnorMonomial::from_parts(mask, Vec::new()))
                .filter(|m| m.bidegree() == d)
                .collect(),
            AlgebraFlavor::Trivial => Vec::new(),
        }
    }

    pub fn basis(&self, d: Bidegree) -> Arc<AlgebraBasis> {
        if let Some(b) = self.bases.read().unwrap().get(&d) {
            return b.clone();
        }
        let mut monomials = self.compute_basis(d);
        monomials.sort();
        let b = Arc::new(AlgebraBasis::new(monomials));
        self.bases.write().unwrap().insert(d, b.clone());
        b
    }

    pub fn dimension(&self, d: Bidegree) -> usize {
        self.basis(d).len()
    }

    /// Whether `m` is one of this algebra's basis monomials.
    pub fn contains(&self, m: &MilnorMonomial) -> bool {
        self.basis(self.bidegree_of(m)).contains(m)
    }

    /// `a·b` as a list of basis monomials.
    pub fn multiply(&self, a: &MilnorMonomial, b: &MilnorMonomial) -> Arc<Vec<MilnorMonomial>> {
        if a.is_one() {
            return Arc::new(vec![b.clone()]);
        }
        if b.is_one() {
            return Arc::new(vec![a.clone()]);
        }
        let key = (a.clone(), b.clone());
        if let Some(p) = self.products.read().unwrap().get(&key) {
            return p.clone();
        }
        let terms: Vec<MilnorMonomial> = match self.flavor {
            AlgebraFlavor::A0 => milnor::multiply_monomials(a, b).terms().cloned().collect(),
            AlgebraFlavor::G | AlgebraFlavor::Classical => milnor::multiply_p(a.r(), b.r())
                .iter()
                .map(|r| MilnorMonomial::p(r))
                .collect(),
            AlgebraFlavor::Exterior(_) => {
                if a.e_mask() & b.e_mask() == 0 {
                    vec![MilnorMonomial::from_parts(a.e_mask() | b.e_mask(), Vec::new())]
                } else {
                    Vec::new()
                }
            }
            AlgebraFlavor::Trivial => Vec::new(),
        };
        let p = Arc::new(terms);
        self.products.write().unwrap().insert(key, p.clone());
        p
    }

    /// Non-zero bidegrees with `0 < p ≤ pmax`, in increasing `(p, q)` order.
    pub fn positive_degrees(&self, pmax: i64) -> Vec<Bidegree> {
        let mut out = Vec::new();
        for p in 1..=pmax {
            for q in 0..=p {
                let d = Bidegree::new(p, q);
                if self.dimension(d) > 0 {
                    out.push(d);
                }
            }
        }
        out
    }

    /// Check associativity on all basis triples with total degree `≤ pmax`.
    pub fn check_associativity(&self, pmax: i64) -> Result<usize, String> {
        let degrees = self.positive_degrees(pmax);
        let mut checked = 0;
        for &da in &degrees {
            for &db in &degrees {
                for &dc in &degrees {
                    if da.p + db.p + dc.p > pmax {
                        continue;
                    }
                    for a in &self.basis(da).monomials {
                        for b in &self.basis(db).monomials {
                            for c in &self.basis(dc).monomials {
                                let left = self.multiply_list(&self.multiply(a, b), c);
                                let bc = self.multiply(b, c);
                                let right = self.multiply_left(a, &bc);
                                checked += 1;
                                if left != right {
                                    return Err(format!("({a} {b}) {c} ≠ {a} ({b} {c})"));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(checked)
    }

    fn multiply_list(&self, xs: &[MilnorMonomial], c: &MilnorMonomial) -> Vec<MilnorMonomial> {
        let mut acc = std::collections::BTreeSet::new();
        for x in xs {
            for t in self.multiply(x, c).iter() {
                if !acc.remove(t) {
                    acc.insert(t.clone());
                }
            }
        }
        acc.into_iter().collect()
    }

    fn multiply_left(&self, a: &MilnorMonomial, xs: &[MilnorMonomial]) -> Vec<MilnorMonomial> {
        let mut acc = std::collections::BTreeSet::new();
        for x in xs {
            for t in self.multiply(a, x).iter() {
                if !acc.remove(t) {
                    acc.insert(t.clone());
                }
            }
        }
        acc.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let cl = WindowedAlgebra::new(AlgebraFlavor::Classical);
        let dims: Vec<usize> = (0..8).map(|t| cl.dimension(Bidegree::new(t, 0))).collect();
        assert_eq!(dims, vec![1, 1, 1, 2, 2, 2, 3, 4]);
        let g = WindowedAlgebra::new(AlgebraFlavor::G);
        assert_eq!(g.dimension(Bidegree::new(6, 3)), 2);
        assert_eq!(g.dimension(Bidegree::new(3, 1)), 0);
        let e = WindowedAlgebra::new(AlgebraFlavor::Exterior(0));
        assert_eq!(e.positive_degrees(5), vec![Bidegree::new(1, 0)]);
        let t = WindowedAlgebra::new(AlgebraFlavor::Trivial);
        assert!(t.positive_degrees(5).is_empty());
        assert_eq!(t.dimension(Bidegree::ZERO), 1);
    }

    #[test]
    fn associative() {
        for f in [AlgebraFlavor::A0, AlgebraFlavor::G, AlgebraFlavor::Classical, AlgebraFlavor::Exterior(2)] {
            let a = WindowedAlgebra::new(f);
            a.check_associativity(9).unwrap();
        }
    }

    #[test]
    fn classical_products() {
        let cl = WindowedAlgebra::new(AlgebraFlavor::Classical);
        let sq1 = MilnorMonomial::p(&[1]);
        assert!(cl.multiply(&sq1, &sq1).is_empty());
        assert_eq!(cl.bidegree_of(&MilnorMonomial::p(&[0, 1])), Bidegree::new(3, 0));
    }
}
