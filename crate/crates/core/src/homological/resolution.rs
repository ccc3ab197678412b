//! Minimal free resolutions, computed bidegree by bidegree.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use crate::gf2::{EchelonBasis, F2Vector, RowReduction};
use crate::milnor::{Bidegree, MilnorMonomial};
use crate::module::FiniteModule;

use super::algebra::{AlgebraBasis, WindowedAlgebra};

/// One generator's span `Λ·g` inside a free module in a fixed degree.
#[derive(Debug, Clone)]
pub struct FreeBlock {
    pub generator: usize,
    pub offset: usize,
    pub basis: Arc<AlgebraBasis>,
}

/// The basis of `(F_s)_D`: pairs (generator `g_j`, algebra monomial `a`)
/// standing for `a·g_j`, grouped by generator.
#[derive(Debug, Clone)]
pub struct FreeDegree {
    pub degree: Bidegree,
    pub blocks: Vec<FreeBlock>,
    by_generator: HashMap<usize, usize>,
    pub total: usize,
}

impl FreeDegree {
    fn new(algebra: &WindowedAlgebra, generators: &[Bidegree], degree: Bidegree) -> Self {
        let mut blocks = Vec::new();
        let mut by_generator = HashMap::new();
        let mut total = 0;
        for (j, g) in generators.iter().enumerate() {
            let basis = algebra.basis(degree - *g);
            if basis.is_empty() {
                continue;
            }
            by_generator.insert(j, blocks.len());
            let len = basis.len();
            blocks.push(FreeBlock {
                generator: j,
                offset: total,
                basis,
            });
            total += len;
        }
        FreeDegree {
            degree,
            blocks,
            by_generator,
            total,
        }
    }

    /// Index of `a·g_j`, if that element lies in this degree.
    pub fn position(&self, generator: usize, a: &MilnorMonomial) -> Option<usize> {
        let b = &self.blocks[*self.by_generator.get(&generator)?];
        Some(b.offset + b.basis.index_of(a))
    }

    /// The `(generator, monomial)` behind a basis index.
    pub fn decode(&self, index: usize) -> (usize, &MilnorMonomial) {
        let k = self.blocks.partition_point(|b| b.offset <= index) - 1;
        let b = &self.blocks[k];
        (b.generator, &b.basis.monomials[index - b.offset])
    }

    /// Index of the bare generator `g_j` (only when `|g_j|` equals this degree).
    pub fn generator_position(&self, generator: usize) -> Option<usize> {
        self.position(generator, &MilnorMonomial::one())
    }
}

/// The stored differential `d_s: (F_s)_D → (F_{s−1})_D` (or `→ M_D` for `s = 0`).
#[derive(Debug)]
struct Stage {
    rows: Vec<F2Vector>,
    reduction: RowReduction,
}

/// A minimal free resolution `… → F₁ → F₀ → M` through internal topological
/// degree `pmax` and homological degree `smax`.
#[derive(Debug)]
pub struct FreeResolution {
    algebra: Arc<WindowedAlgebra>,
    module: FiniteModule,
    smax: usize,
    pmax: i64,
    generators: Vec<Vec<Bidegree>>,
    /// `d(g)` as `(generator of F_{s−1}, coefficient)` terms; for `s = 0`,
    /// coefficients act on the module basis element given as the index.
    differentials: Vec<Vec<Vec<(usize, MilnorMonomial)>>>,
    stages: HashMap<(usize, Bidegree), Stage>,
    free_degrees: RwLock<HashMap<(usize, Bidegree), Arc<FreeDegree>>>,
    degrees: Vec<Bidegree>,
}

impl FreeResolution {
    /// Resolve the ground field F₂ in degree 0.
    pub fn of_ground_field(algebra: Arc<WindowedAlgebra>, smax: usize, pmax: i64) -> Self {
        FreeResolution::compute(algebra, FiniteModule::trivial(&[Bidegree::ZERO]), smax, pmax)
    }

    /// Minimal resolution of `module` (whose actions must be given in the
    /// algebra's own grading).
    pub fn compute(algebra: Arc<WindowedAlgebra>, module: FiniteModule, smax: usize, pmax: i64) -> Self {
        let mut res = FreeResolution {
            algebra,
            module,
            smax,
            pmax,
            generators: vec![Vec::new(); smax + 1],
            differentials: vec![Vec::new(); smax + 1],
            stages: HashMap::new(),
            free_degrees: RwLock::new(HashMap::new()),
            degrees: Vec::new(),
        };
        let support: Vec<Bidegree> = res.module.support().collect();
        let (pmin, qmin, qmax) = support.iter().fold((i64::MAX, i64::MAX, i64::MIN), |acc, d| {
            (acc.0.min(d.p), acc.1.min(d.q), acc.2.max(d.q))
        });
        if support.is_empty() {
            return res;
        }
        let mut degrees = Vec::new();
        for p in pmin..=pmax {
            let span = if res.algebra.flavor().is_bigraded() { p - pmin } else { 0 };
            for q in qmin..=qmax + span {
                degrees.push(Bidegree::new(p, q));
            }
        }
        for d in degrees {
            for s in 0..=smax {
                res.step(s, d);
            }
        }
        res
    }

    fn step(&mut self, s: usize, d: Bidegree) {
        let before = FreeDegree::new(&self.algebra, &self.generators[s], d);
        let target_len = if s == 0 {
            self.module.basis_in(d).len()
        } else {
            self.free_degree(s - 1, d).total
        };
        let kernel: Vec<F2Vector> = if s == 0 {
            (0..target_len).map(|i| F2Vector::unit(target_len, i)).collect()
        } else {
            match self.stages.get(&(s - 1, d)) {
                Some(st) => st.reduction.left_kernel().to_vec(),
                None => Vec::new(),
            }
        };
        if before.total == 0 && kernel.is_empty() {
            return;
        }
        let mut rows: Vec<F2Vector> = (0..before.total).map(|i| self.image_of_basis(s, &before, i)).collect();
        let mut span = EchelonBasis::new(target_len);
        for r in &rows {
            span.insert(r);
        }
        for k in kernel {
            if span.insert(&k) {
                let terms = self.decode_target(s, d, &k);
                self.generators[s].push(d);
                self.differentials[s].push(terms);
                rows.push(k);
            }
        }
        self.free_degrees.write().unwrap().remove(&(s, d));
        let reduction = RowReduction::new(&rows, target_len);
        self.stages.insert((s, d), Stage { rows, reduction });
        if self.degrees.last() != Some(&d) {
            self.degrees.push(d);
        }
    }

    /// `d(a·g_j)` for the basis element `i` of `fd`, as a vector in the target degree.
    fn image_of_basis(&self, s: usize, fd: &FreeDegree, i: usize) -> F2Vector {
        let (j, a) = fd.decode(i);
        let d = fd.degree;
        if s == 0 {
            let basis = self.module.basis_in(d);
            let mut out = F2Vector::zeros(basis.len());
            for (e, _) in &self.differentials[0][j] {
                let v = self.module.act(a, *e);
                for (pos, &b) in basis.iter().enumerate() {
                    if v.get(b) {
                        out.flip(pos);
                    }
                }
            }
            out
        } else {
            let target = self.free_degree(s - 1, d);
            let mut out = F2Vector::zeros(target.total);
            for (jj, c) in &self.differentials[s][j] {
                for t in self.algebra.multiply(a, c).iter() {
                    out.flip(target.position(*jj, t).expect("product lands in target degree"));
                }
            }
            out
        }
    }

    fn decode_target(&self, s: usize, d: Bidegree, v: &F2Vector) -> Vec<(usize, MilnorMonomial)> {
        if s == 0 {
            let basis = self.module.basis_in(d);
            v.iter_ones().map(|i| (basis[i], MilnorMonomial::one())).collect()
        } else {
            let fd = self.free_degree(s - 1, d);
            v.iter_ones()
                .map(|i| {
                    let (j, a) = fd.decode(i);
                    (j, a.clone())
                })
                .collect()
        }
    }

    pub fn algebra(&self) -> &Arc<WindowedAlgebra> {
        &self.algebra
    }

    pub fn module(&self) -> &FiniteModule {
        &self.module
    }

    pub fn smax(&self) -> usize {
        self.smax
    }

    pub fn pmax(&self) -> i64 {
        self.pmax
    }

    /// Bidegrees for which generators were computed, in processing order.
    pub fn processed_degrees(&self) -> &[Bidegree] {
        &self.degrees
    }

    /// `(s, D)` lies inside the computed window, so its data are exact.
    pub fn is_exact(&self, s: usize, d: Bidegree) -> bool {
        s <= self.smax && d.p <= self.pmax
    }

    pub fn generators(&self, s: usize) -> &[Bidegree] {
        self.generators.get(s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn generators_in(&self, s: usize, d: Bidegree) -> Vec<usize> {
        self.generators(s)
            .iter()
            .enumerate()
            .filter(|(_, g)| **g == d)
            .map(|(j, _)| j)
            .collect()
    }

    /// `d(g_{s,j})` as `(generator of F_{s−1}, coefficient)` terms.
    pub fn differential(&self, s: usize, j: usize) -> &[(usize, MilnorMonomial)] {
        &self.differentials[s][j]
    }

    pub fn free_degree(&self, s: usize, d: Bidegree) -> Arc<FreeDegree> {
        if let Some(fd) = self.free_degrees.read().unwrap().get(&(s, d)) {
            return fd.clone();
        }
        let fd = Arc::new(FreeDegree::new(&self.algebra, self.generators(s), d));
        self.free_degrees.write().unwrap().insert((s, d), fd.clone());
        fd
    }

    /// `dim (F_s)_D`.
    pub fn free_dimension(&self, s: usize, d: Bidegree) -> usize {
        self.free_degree(s, d).total
    }

    /// `a·v` for `v ∈ (F_s)_D`, landing in `(F_s)_{D+|a|}`.
    pub fn act_on_free(&self, s: usize, a: &MilnorMonomial, v: &F2Vector, d: Bidegree) -> F2Vector {
        let src = self.free_degree(s, d);
        let dst = self.free_degree(s, d + self.algebra.bidegree_of(a));
        let mut out = F2Vector::zeros(dst.total);
        for i in v.iter_ones() {
            let (j, b) = src.decode(i);
            for t in self.algebra.multiply(a, b).iter() {
                out.flip(dst.position(j, t).expect("product lands in target degree"));
            }
        }
        out
    }

    /// The element `Σ coeff·g_j` of `(F_s)_D` for a list of `(generator, coefficient)` terms.
    pub fn element_from_terms(&self, s: usize, d: Bidegree, terms: &[(usize, MilnorMonomial)]) -> F2Vector {
        let fd = self.free_degree(s, d);
        let mut out = F2Vector::zeros(fd.total);
        for (j, a) in terms {
            out.flip(fd.position(*j, a).expect("term lies in degree"));
        }
        out
    }

    /// `d_s(v)` for `v ∈ (F_s)_D` (`s ≥ 1`), in `(F_{s−1})_D`.
    pub fn apply_d(&self, s: usize, d: Bidegree, v: &F2Vector) -> F2Vector {
        let target = self.free_degree(s - 1, d).total;
        match self.stages.get(&(s, d)) {
            Some(st) => {
                let mut out = F2Vector::zeros(target);
                for i in v.iter_ones() {
                    out.add_assign(&st.rows[i]);
                }
                out
            }
            None => F2Vector::zeros(target),
        }
    }

    /// Some `z ∈ (F_s)_D` with `d z = w`, when `w` is a boundary.
    pub fn preimage(&self, s: usize, d: Bidegree, w: &F2Vector) -> Option<F2Vector> {
        if w.is_zero() {
            return Some(F2Vector::zeros(self.free_degree(s, d).total));
        }
        self.stages.get(&(s, d))?.reduction.preimage(w)
    }

    /// `d ∘ d = 0` on every generator.
    pub fn check_d_squared(&self) -> Result<usize, String> {
        let mut checked = 0;
        for s in 1..=self.smax {
            for (j, g) in self.generators(s).iter().enumerate() {
                let v = self.element_from_terms(s - 1, *g, self.differential(s, j));
                let dd = if s == 1 {
                    let basis = self.module.basis_in(*g);
                    let mut out = F2Vector::zeros(basis.len());
                    if let Some(st) = self.stages.get(&(0, *g)) {
                        for i in v.iter_ones() {
                            out.add_assign(&st.rows[i]);
                        }
                    }
                    out
                } else {
                    self.apply_d(s - 1, *g, &v)
                };
                checked += 1;
                if !dd.is_zero() {
                    return Err(format!("d²(g_{{{s},{j}}}) ≠ 0 at {g}"));
                }
            }
        }
        Ok(checked)
    }

    /// No differential `d_s` (`s ≥ 1`) has a unit coefficient.
    pub fn check_minimal(&self) -> Result<(), String> {
        for s in 1..=self.smax {
            for (j, terms) in self.differentials[s].iter().enumerate() {
                if terms.iter().any(|(_, a)| a.is_one()) {
                    return Err(format!("d(g_{{{s},{j}}}) has a unit coefficient"));
                }
            }
        }
        Ok(())
    }

    /// Bidegrees carrying generators in homological degree `s`.
    pub fn generator_degrees(&self, s: usize) -> BTreeSet<Bidegree> {
        self.generators(s).iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::algebra::AlgebraFlavor;
    use super::*;

    fn counts(res: &FreeResolution, s: usize) -> Vec<(i64, i64)> {
        res.generators(s).iter().map(|d| (d.p, d.q)).collect()
    }

    #[test]
    fn classical_low_degrees() {
        let res = FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(AlgebraFlavor::Classical)), 3, 3);
        assert_eq!(counts(&res, 0), vec![(0, 0)]);
        assert_eq!(counts(&res, 1), vec![(1, 0), (2, 0)]);
        assert_eq!(counts(&res, 2), vec![(2, 0)]);
        assert_eq!(counts(&res, 3), vec![(3, 0)]);
        res.check_d_squared().unwrap();
        res.check_minimal().unwrap();
    }

    #[test]
    fn trivial_algebra() {
        let res = FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(AlgebraFlavor::Trivial)), 4, 6);
        assert_eq!(res.generators(0).len(), 1);
        for s in 1..=4 {
            assert!(res.generators(s).is_empty());
        }
    }

    #[test]
    fn exterior_on_q0() {
        let res = FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(AlgebraFlavor::Exterior(0))), 6, 8);
        for s in 0..=6 {
            assert_eq!(counts(&res, s), vec![(s as i64, 0)]);
        }
        res.check_d_squared().unwrap();
    }

    #[test]
    fn a0_and_g_are_valid() {
        for f in [AlgebraFlavor::A0, AlgebraFlavor::G] {
            let res = FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(f)), 4, 12);
            assert!(res.check_d_squared().unwrap() > 0);
            res.check_minimal().unwrap();
        }
    }

    #[test]
    fn resolving_a_module() {
        // M = Λ(Q0) itself is free: F_0 = one generator, nothing above
        let mut m = FiniteModule::new(vec!["1".into(), "Q0".into()], vec![Bidegree::ZERO, Bidegree::new(1, 0)]);
        m.set_action(MilnorMonomial::q(0), 0, F2Vector::unit(2, 1));
        let res = FreeResolution::compute(Arc::new(WindowedAlgebra::new(AlgebraFlavor::Exterior(0))), m, 3, 6);
        assert_eq!(res.generators(0).len(), 1);
        assert!(res.generators(1).is_empty());
    }
}
