//! Finite bigraded left A₀-modules given by explicit action tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::gf2::F2Vector;
use crate::milnor::{self, Bidegree, Element, MilnorMonomial};

/// A finite-dimensional bigraded F₂-vector space with a left action of the
/// Milnor basis of A₀. Absent table entries act as zero; the unit acts as the
/// identity.
#[derive(Clone, Debug)]
pub struct FiniteModule {
    names: Vec<String>,
    degrees: Vec<Bidegree>,
    by_degree: BTreeMap<Bidegree, Vec<usize>>,
    actions: HashMap<(MilnorMonomial, usize), F2Vector>,
}

impl FiniteModule {
    pub fn new(names: Vec<String>, degrees: Vec<Bidegree>) -> Self {
        assert_eq!(names.len(), degrees.len());
        let mut by_degree: BTreeMap<Bidegree, Vec<usize>> = BTreeMap::new();
        for (i, d) in degrees.iter().enumerate() {
            by_degree.entry(*d).or_default().push(i);
        }
        FiniteModule {
            names,
            degrees,
            by_degree,
            actions: HashMap::new(),
        }
    }

    /// `⊕ F₂[shift]` with every positive-degree operation acting as zero.
    pub fn trivial(shifts: &[Bidegree]) -> Self {
        let names = (0..shifts.len()).map(|i| format!("x{i}")).collect();
        FiniteModule::new(names, shifts.to_vec())
    }

    /// Record `m · e_i = v`. Panics on a degree mismatch.
    pub fn set_action(&mut self, m: MilnorMonomial, i: usize, v: F2Vector) {
        assert_eq!(v.len(), self.dimension());
        let target = self.degrees[i] + m.bidegree();
        for j in v.iter_ones() {
            assert_eq!(self.degrees[j], target, "action of {m} on {} has wrong degree", self.names[i]);
        }
        if v.is_zero() {
            self.actions.remove(&(m, i));
        } else {
            self.actions.insert((m, i), v);
        }
    }

    pub fn dimension(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, i: usize) -> Bidegree {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[Bidegree] {
        &self.degrees
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Bidegrees in which the module is non-zero.
    pub fn support(&self) -> impl Iterator<Item = Bidegree> + '_ {
        self.by_degree.keys().copied()
    }

    pub fn basis_in(&self, d: Bidegree) -> &[usize] {
        self.by_degree.get(&d).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn act(&self, m: &MilnorMonomial, i: usize) -> F2Vector {
        if m.is_one() {
            return F2Vector::unit(self.dimension(), i);
        }
        self.actions
            .get(&(m.clone(), i))
            .cloned()
            .unwrap_or_else(|| F2Vector::zeros(self.dimension()))
    }

    pub fn act_vector(&self, a: &Element, v: &F2Vector) -> F2Vector {
        let mut out = F2Vector::zeros(self.dimension());
        for m in a.terms() {
            for i in v.iter_ones() {
                out.add_assign(&self.act(m, i));
            }
        }
        out
    }

    /// Monomials whose bidegree is a difference of two support degrees.
    fn relevant_monomials(&self) -> Vec<MilnorMonomial> {
        let support: Vec<Bidegree> = self.support().collect();
        let mut diffs = BTreeSet::new();
        for a in &support {
            for b in &support {
                let d = *b - *a;
                if d.p > 0 {
                    diffs.insert(d);
                }
            }
        }
        diffs.into_iter().flat_map(milnor::monomials_in_bidegree).collect()
    }

    /// Check `(g b)·x = g·(b·x)` for the algebra generators `g ∈ {Q_j, P^{(2^m)}}`
    /// and every relevant monomial `b`; this implies the module axioms.
    /// Returns the number of identities checked.
    pub fn check_module_axioms(&self) -> Result<usize, String> {
        let monomials = self.relevant_monomials();
        let generators: Vec<MilnorMonomial> = monomials
            .iter()
            .filter(|m| is_generator(m))
            .cloned()
            .collect();
        let mut checked = 0;
        let mut all = monomials.clone();
        all.push(MilnorMonomial::one());
        for g in &generators {
            for b in &all {
                let gb = milnor::multiply_monomials(g, b);
                for x in 0..self.dimension() {
                    let lhs = self.act_vector(&gb, &F2Vector::unit(self.dimension(), x));
                    let bx = self.act(b, x);
                    let rhs = self.act_vector(&g.clone().into(), &bx);
                    checked += 1;
                    if lhs != rhs {
                        return Err(format!("({g})({b})·{} ≠ {g}·({b}·{})", self.names[x], self.names[x]));
                    }
                }
            }
        }
        Ok(checked)
    }
}

/// `Q_j` or `P^{(2^m)}`: a set of algebra generators of A₀.
pub fn is_generator(m: &MilnorMonomial) -> bool {
    let r = m.r();
    match (m.e_mask().count_ones(), r.len()) {
        (1, 0) => true,
        (0, 1) => r[0].is_power_of_two(),
        _ => false,
    }
}
