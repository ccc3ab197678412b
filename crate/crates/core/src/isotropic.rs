//! The isotropic coefficient module `H = Λ_{F₂}(r₀, r₁, …)` with its A₀-action.
//!
//! `rᵢ` has bidegree `(−2ⁱ+1)[−2^{i+1}+1]`. The Milnor operations act as
//! derivations with `Q_j rᵢ = δᵢⱼ`; the squares act on generators by
//! `Sq^{2^j} rᵢ = r_{i−1}` if `i = j` and `0` otherwise. Everything else about
//! the `P^R`-action is solved for by GF(2) linear algebra in
//! [`solve_action_table`], then extended to monomials by the Cartan formula.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf2::{self, F2Matrix, F2Vector};
use crate::milnor::{self, Bidegree, Element, MilnorMonomial};
use crate::module::FiniteModule;

/// Largest generator index representable in an [`ExteriorMonomial`].
pub const MAX_GENERATOR: usize = 40;

/// Bidegree of `rᵢ`.
pub fn generator_bidegree(i: usize) -> Bidegree {
    let two_i = 1i64 << i;
    Bidegree::new(-2 * two_i + 1, -two_i + 1)
}

/// `r_I = Π_{i∈I} rᵢ`, stored as a bitmask of `I`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExteriorMonomial(u64);

impl ExteriorMonomial {
    pub fn new(indices: &[usize]) -> Self {
        let mut mask = 0;
        for &i in indices {
            assert!(i <= MAX_GENERATOR, "generator index {i} too large");
            mask |= 1u64 << i;
        }
        ExteriorMonomial(mask)
    }

    pub fn from_mask(mask: u64) -> Self {
        ExteriorMonomial(mask)
    }

    pub fn one() -> Self {
        ExteriorMonomial(0)
    }

    pub fn generator(i: usize) -> Self {
        ExteriorMonomial::new(&[i])
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn indices(self) -> Vec<usize> {
        (0..64).filter(|i| self.0 >> i & 1 == 1).collect()
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.is_one()
    }

    pub fn max_index(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn bidegree(self) -> Bidegree {
        self.indices()
            .into_iter()
            .fold(Bidegree::ZERO, |acc, i| acc + generator_bidegree(i))
    }

    /// Exterior product; `None` when a generator repeats.
    pub fn product(self, other: Self) -> Option<Self> {
        (self.0 & other.0 == 0).then_some(ExteriorMonomial(self.0 | other.0))
    }

    /// The unique monomial of bidegree `d`, if any (bidegree determines `I`).
    pub fn in_bidegree(d: Bidegree) -> Option<Self> {
        let m = -d.offset();
        if m < 0 {
            return None;
        }
        let sum = m - d.q;
        if sum < 0 || sum.count_ones() as i64 != m || sum >= 1i64 << (MAX_GENERATOR + 1) {
            return None;
        }
        Some(ExteriorMonomial(sum as u64))
    }
}

impl fmt::Display for ExteriorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.indices().iter().map(|i| format!("r{i}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A GF(2) combination of exterior monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HElement {
    terms: BTreeSet<ExteriorMonomial>,
}

impl HElement {
    pub fn zero() -> Self {
        HElement::default()
    }

    pub fn one() -> Self {
        ExteriorMonomial::one().into()
    }

    pub fn from_terms<I: IntoIterator<Item = ExteriorMonomial>>(terms: I) -> Self {
        let mut out = HElement::zero();
        for t in terms {
            out.toggle(t);
        }
        out
    }

    pub fn toggle(&mut self, m: ExteriorMonomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ExteriorMonomial> + '_ {
        self.terms.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, m: ExteriorMonomial) -> bool {
        self.terms.contains(&m)
    }

    pub fn add(&self, other: &HElement) -> HElement {
        HElement {
            terms: self.terms.symmetric_difference(&other.terms).copied().collect(),
        }
    }

    pub fn multiply(&self, other: &HElement) -> HElement {
        let mut out = HElement::zero();
        for a in &self.terms {
            for b in &other.terms {
                if let Some(c) = a.product(*b) {
                    out.toggle(c);
                }
            }
        }
        out
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().filter_map(|m| m.max_index()).max()
    }
}

impl From<ExteriorMonomial> for HElement {
    fn from(m: ExteriorMonomial) -> Self {
        HElement {
            terms: std::iter::once(m).collect(),
        }
    }
}

impl fmt::Display for HElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Q_j` as a derivation: `Q_j r_I = r_{I∖{j}}` if `j ∈ I`, else 0.
pub fn q_action(j: usize, x: &HElement) -> HElement {
    HElement::from_terms(
        x.terms()
            .filter(|m| m.contains(j))
            .map(|m| ExteriorMonomial(m.0 & !(1u64 << j))),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IsotropicError {
    #[error("window is not complete: generator r{0} can reach the box but exceeds n_max")]
    IncompleteWindow(usize),
    #[error("element uses r{index}, beyond the window's n_max = {n_max:?}")]
    WindowExceeded { index: usize, n_max: Option<usize> },
    #[error("action constraints are inconsistent in blocks {}", format_blocks(.0))]
    Inconsistent(Vec<ActionBlock>),
    #[error("action constraints are underdetermined in blocks {}", format_blocks(.0))]
    Underdetermined(Vec<ActionBlock>),
}

fn format_blocks(blocks: &[ActionBlock]) -> String {
    let parts: Vec<String> = blocks.iter().map(|b| b.to_string()).collect();
    parts.join(", ")
}

/// The unknowns `P^R rᵢ = c·r_k` for fixed `(i, k)`: all `R` of weight `2ⁱ − 2ᵏ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionBlock {
    pub source: usize,
    pub target: usize,
    /// Bidegree of the operations `P^R` in the block.
    pub bidegree: Bidegree,
}

impl fmt::Display for ActionBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}→r{} at {}", self.source, self.target, self.bidegree)
    }
}

/// A finite box `pmin ≤ p ≤ pmax`, `qmin ≤ q ≤ qmax` in H, with the generators
/// that can reach it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsotropicWindow {
    pub pmin: i64,
    pub pmax: i64,
    pub qmin: i64,
    pub qmax: i64,
    generators: usize,
}

impl IsotropicWindow {
    /// The smallest complete window over the box: uses exactly the `rᵢ` whose
    /// own bidegree lies above the lower corner (any monomial containing `rᵢ`
    /// has both coordinates at most those of `rᵢ`).
    pub fn new(pmin: i64, pmax: i64, qmin: i64, qmax: i64) -> Self {
        let mut generators = 0;
        while generators <= MAX_GENERATOR {
            let d = generator_bidegree(generators);
            if d.p < pmin || d.q < qmin {
                break;
            }
            generators += 1;
        }
        IsotropicWindow {
            pmin,
            pmax,
            qmin,
            qmax,
            generators,
        }
    }

    /// A box together with an explicit `n_max`; fails if a generator beyond
    /// `n_max` could contribute a monomial inside the box.
    pub fn with_nmax(n_max: usize, pmin: i64, pmax: i64, qmin: i64, qmax: i64) -> Result<Self, IsotropicError> {
        let w = IsotropicWindow::new(pmin, pmax, qmin, qmax);
        if w.generators > n_max + 1 {
            return Err(IsotropicError::IncompleteWindow(n_max + 1));
        }
        Ok(IsotropicWindow {
            generators: n_max + 1,
            ..w
        })
    }

    /// All of `Λ(r₀, …, r_{n_max})`.
    pub fn full(n_max: usize) -> Self {
        let bottom = (0..=n_max).fold(Bidegree::ZERO, |acc, i| acc + generator_bidegree(i));
        IsotropicWindow::with_nmax(n_max, bottom.p, 0, bottom.q, 0).expect("full window is complete")
    }

    /// Every monomial with `p ≥ −depth`; exact for Ext in topological degree ≤ depth.
    pub fn for_depth(depth: i64) -> Self {
        IsotropicWindow::new(-depth, 0, -depth, 0)
    }

    pub fn n_max(&self) -> Option<usize> {
        self.generators.checked_sub(1)
    }

    pub fn generator_count(&self) -> usize {
        self.generators
    }

    pub fn contains_bidegree(&self, d: Bidegree) -> bool {
        (self.pmin..=self.pmax).contains(&d.p) && (self.qmin..=self.qmax).contains(&d.q)
    }

    pub fn contains(&self, m: ExteriorMonomial) -> bool {
        m.max_index().is_none_or(|i| i < self.generators) && self.contains_bidegree(m.bidegree())
    }

    /// Basis monomials inside the box, sorted by bidegree then mask.
    pub fn basis(&self) -> Vec<ExteriorMonomial> {
        let mut out: Vec<ExteriorMonomial> = (0..1u64 << self.generators)
            .map(ExteriorMonomial)
            .filter(|m| self.contains_bidegree(m.bidegree()))
            .collect();
        out.sort_by_key(|m| (m.bidegree(), m.0));
        out
    }

    /// The window is a sub-A₀-module of H when it is closed upwards.
    pub fn is_submodule(&self) -> bool {
        self.pmax >= 0 && self.qmax >= 0
    }
}

/// Which generator values `Sq^{2^j} r_j = r_{j−1}` (j ≥ 1) to impose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverInput {
    /// Entry `j−1` gives the imposed value of `Sq^{2^j} r_j`: `Some(true)` for
    /// `r_{j−1}`, `Some(false)` for 0, `None` for unconstrained.
    pub generator_table: Vec<Option<bool>>,
    /// Impose `P^R Q_k = Q_k P^R + Σ_j Q_{k+j} P^{R−2^k e_j}` on the generators.
    pub q_relations: bool,
}

impl SolverInput {
    /// The published generator table for generators up to `n_max`.
    pub fn published(n_max: usize) -> Self {
        SolverInput {
            generator_table: vec![Some(true); n_max],
            q_relations: true,
        }
    }
}

/// Memoised `P^R` on exterior monomials, keyed by `(R, mask)`.
type PCache = Mutex<HashMap<(Vec<u32>, u64), BTreeSet<u64>>>;

/// Solved structure constants: `P^R rᵢ = r_k` for each listed `(R, i) ↦ k`;
/// unlisted pairs with `R ≠ 0` act as zero.
#[derive(Debug)]
pub struct ActionTable {
    generators: usize,
    entries: BTreeMap<(Vec<u32>, usize), usize>,
    p_cache: PCache,
}

impl Clone for ActionTable {
    fn clone(&self) -> Self {
        ActionTable {
            generators: self.generators,
            entries: self.entries.clone(),
            p_cache: Mutex::new(HashMap::new()),
        }
    }
}

fn weight(r: &[u32]) -> u64 {
    r.iter()
        .enumerate()
        .map(|(j, &x)| x as u64 * ((1u64 << (j + 1)) - 1))
        .sum()
}

fn p_bidegree(r: &[u32]) -> Bidegree {
    let w = weight(r) as i64;
    Bidegree::new(2 * w, w)
}

/// Solve for all `P^R rᵢ` with `i ≤ n_max` using the published generator table.
pub fn solve_action_table(w: &IsotropicWindow) -> Result<ActionTable, IsotropicError> {
    let n = w.generator_count();
    solve_action_table_with(n, &SolverInput::published(n.saturating_sub(1)))
}

/// Solve with an explicit constraint set over the generators `r₀ … r_{generators−1}`.
///
/// Unknowns are grouped in blocks `(i, k)` of weight `2ⁱ − 2ᵏ` and solved in
/// order of increasing weight, so each constraint is linear in the current
/// block with all lower-weight values known. The constraints are
/// (a) the generator table, (b) `(gP^R)·rᵢ = g·(P^R rᵢ)` and
/// `(P^R g)·rᵢ = P^R·(g rᵢ)` for `g = P^{(2^m)}`, and (c) the commutator
/// relations with the `Q_k` evaluated on `rᵢ`.
pub fn solve_action_table_with(generators: usize, input: &SolverInput) -> Result<ActionTable, IsotropicError> {
    let mut blocks: Vec<(u64, usize, usize)> = Vec::new();
    for i in 0..generators {
        for k in 0..i {
            blocks.push(((1u64 << i) - (1u64 << k), i, k));
        }
    }
    blocks.sort();
    let mut known: BTreeMap<(Vec<u32>, usize), usize> = BTreeMap::new();
    // value of P^R r_i as a target index (R = 0 is the identity)
    let lookup = |known: &BTreeMap<(Vec<u32>, usize), usize>, r: &[u32], i: usize| -> Option<usize> {
        if r.iter().all(|&x| x == 0) {
            Some(i)
        } else {
            known.get(&(r.to_vec(), i)).copied()
        }
    };

    let mut level = 0;
    let mut failures: (Vec<ActionBlock>, Vec<ActionBlock>) = (Vec::new(), Vec::new());
    for &(w, i, k) in &blocks {
        if w != level {
            if !failures.0.is_empty() {
                return Err(IsotropicError::Inconsistent(failures.0));
            }
            if !failures.1.is_empty() {
                return Err(IsotropicError::Underdetermined(failures.1));
            }
            level = w;
        }
        let unknowns = milnor::p_exponents_of_weight(w);
        let index: HashMap<&Vec<u32>, usize> = unknowns.iter().enumerate().map(|(a, r)| (r, a)).collect();
        let mut rows: Vec<F2Vector> = Vec::new();
        let mut rhs: Vec<bool> = Vec::new();
        let mut push = |row: F2Vector, b: bool| {
            rows.push(row);
            rhs.push(b);
        };

        // (a) generator table: Sq^{2^i} r_i = P^{(2^{i-1})} r_i
        if i == k + 1 {
            if let Some(Some(v)) = input.generator_table.get(k) {
                let g = vec![1u32 << k];
                push(F2Vector::unit(unknowns.len(), index[&g]), *v);
            }
        }

        // (b) associativity with the generators g = P^{(2^m)}
        for m in 0..64 {
            let gw = 1u64 << m;
            if gw >= w {
                break;
            }
            let g = vec![1u32 << m];
            for rp in milnor::p_exponents_of_weight(w - gw) {
                // (g P^{R'}) r_i = g (P^{R'} r_i)
                let mut row = F2Vector::zeros(unknowns.len());
                for s in milnor::multiply_p(&g, &rp) {
                    row.flip(index[&s]);
                }
                let inner = lookup(&known, &rp, i);
                let b = inner.and_then(|t| lookup(&known, &g, t)) == Some(k);
                push(row, b);
                // (P^{R'} g) r_i = P^{R'} (g r_i)
                let mut row = F2Vector::zeros(unknowns.len());
                for s in milnor::multiply_p(&rp, &g) {
                    row.flip(index[&s]);
                }
                let inner = lookup(&known, &g, i);
                let b = inner.and_then(|t| lookup(&known, &rp, t)) == Some(k);
                push(row, b);
            }
        }

        // (c) P^R Q_k r_i = 0 for R ≠ 0 expands to
        //     c(R,i,k) + Σ_j [P^{R − 2^k e_j} r_i = r_{k+j}] = 0
        if input.q_relations {
            for r in &unknowns {
                let mut b = false;
                for j in 1..=r.len() {
                    if (r[j - 1] as u64) < (1u64 << k) {
                        continue;
                    }
                    let mut smaller = r.clone();
                    smaller[j - 1] -= 1u32 << k;
                    while smaller.last() == Some(&0) {
                        smaller.pop();
                    }
                    if lookup(&known, &smaller, i) == Some(k + j) {
                        b = !b;
                    }
                }
                push(F2Vector::unit(unknowns.len(), index[r]), b);
            }
        }

        let block = ActionBlock {
            source: i,
            target: k,
            bidegree: generator_bidegree(k) - generator_bidegree(i),
        };
        let matrix = F2Matrix::from_rows(rows, unknowns.len());
        let b = F2Vector::from_bits(&rhs);
        match gf2::solve(&matrix, &b).expect("dimensions agree") {
            None => failures.0.push(block),
            Some(x) => {
                if gf2::rank(&matrix) < unknowns.len() {
                    failures.1.push(block);
                }
                for a in x.iter_ones() {
                    known.insert((unknowns[a].clone(), i), k);
                }
            }
        }
    }
    if !failures.0.is_empty() {
        return Err(IsotropicError::Inconsistent(failures.0));
    }
    if !failures.1.is_empty() {
        return Err(IsotropicError::Underdetermined(failures.1));
    }
    Ok(ActionTable {
        generators,
        entries: known,
        p_cache: Mutex::new(HashMap::new()),
    })
}

impl ActionTable {
    pub fn generator_count(&self) -> usize {
        self.generators
    }

    /// Non-trivial solved values `P^R rᵢ = r_k`.
    pub fn entries(&self) -> impl Iterator<Item = (&[u32], usize, usize)> + '_ {
        self.entries.iter().map(|((r, i), k)| (r.as_slice(), *i, *k))
    }

    fn check(&self, x: &HElement) -> Result<(), IsotropicError> {
        match x.max_index() {
            Some(index) if index >= self.generators => Err(IsotropicError::WindowExceeded {
                index,
                n_max: self.generators.checked_sub(1),
            }),
            _ => Ok(()),
        }
    }

    fn p_on_generator(&self, r: &[u32], i: usize) -> Option<usize> {
        if r.iter().all(|&x| x == 0) {
            Some(i)
        } else {
            self.entries.get(&(r.to_vec(), i)).copied()
        }
    }

    /// `P^R r_I` by the Cartan formula over `milnor::coproduct(P^R)`.
    fn p_on_monomial(&self, r: &[u32], mask: u64) -> BTreeSet<u64> {
        if mask == 0 {
            return if r.iter().all(|&x| x == 0) {
                std::iter::once(0).collect()
            } else {
                BTreeSet::new()
            };
        }
        let key = (r.to_vec(), mask);
        if let Some(hit) = self.p_cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let low = mask.trailing_zeros() as usize;
        let rest = mask & !(1u64 << low);
        let mut out = BTreeSet::new();
        for (a, b) in milnor::coproduct(&MilnorMonomial::p(r)) {
            let Some(t) = self.p_on_generator(a.r(), low) else {
                continue;
            };
            for m in self.p_on_monomial(b.r(), rest) {
                if m >> t & 1 == 0 {
                    let v = m | 1u64 << t;
                    if !out.remove(&v) {
                        out.insert(v);
                    }
                }
            }
        }
        self.p_cache.lock().unwrap().insert(key, out.clone());
        out
    }

    /// `Q^E P^R · x`.
    pub fn act_monomial(&self, m: &MilnorMonomial, x: &HElement) -> Result<HElement, IsotropicError> {
        self.check(x)?;
        let mut y = HElement::zero();
        for t in x.terms() {
            for v in self.p_on_monomial(m.r(), t.0) {
                y.toggle(ExteriorMonomial(v));
            }
        }
        for j in m.e_indices().into_iter().rev() {
            y = q_action(j, &y);
        }
        Ok(y)
    }

    pub fn act(&self, a: &Element, x: &HElement) -> Result<HElement, IsotropicError> {
        let mut out = HElement::zero();
        for m in a.terms() {
            out = out.add(&self.act_monomial(m, x)?);
        }
        Ok(out)
    }

    /// `Sq^{2^j} · x`, with `Sq¹ = Q₀` and `Sq^{2^j} = P^{(2^{j−1})}` for `j ≥ 1`.
    pub fn sq_action(&self, j: u32, x: &HElement) -> Result<HElement, IsotropicError> {
        let op = if j == 0 {
            MilnorMonomial::q(0)
        } else {
            MilnorMonomial::p(&[1u32 << (j - 1)])
        };
        self.act_monomial(&op, x)
    }

    /// The window as a finite A₀-module, with every non-zero action recorded.
    pub fn window_module(&self, w: &IsotropicWindow) -> Result<FiniteModule, IsotropicError> {
        let basis = w.basis();
        if let Some(i) = basis.iter().filter_map(|m| m.max_index()).max() {
            if i >= self.generators {
                return Err(IsotropicError::WindowExceeded {
                    index: i,
                    n_max: self.generators.checked_sub(1),
                });
            }
        }
        let position: HashMap<ExteriorMonomial, usize> = basis.iter().enumerate().map(|(a, m)| (*m, a)).collect();
        let names = basis.iter().map(|m| m.to_string()).collect();
        let degrees = basis.iter().map(|m| m.bidegree()).collect();
        let mut module = FiniteModule::new(names, degrees);
        for (a, x) in basis.iter().enumerate() {
            let targets: BTreeSet<Bidegree> = basis
                .iter()
                .map(|y| y.bidegree() - x.bidegree())
                .filter(|d| d.p > 0)
                .collect();
            for d in targets {
                for op in milnor::monomials_in_bidegree(d) {
                    let y = self.act_monomial(&op, &HElement::from(*x))?;
                    if y.is_zero() {
                        continue;
                    }
                    let mut v = F2Vector::zeros(basis.len());
                    for t in y.terms() {
                        if let Some(&b) = position.get(&t) {
                            v.flip(b);
                        }
                    }
                    module.set_action(op, a, v);
                }
            }
        }
        Ok(module)
    }

    /// Check `(ab)·x = a·(b·x)` over the window (generators `a`, all monomials `b`).
    pub fn associativity_audit(&self, w: &IsotropicWindow) -> Result<usize, String> {
        let module = self.window_module(w).map_err(|e| e.to_string())?;
        module.check_module_axioms()
    }

    /// The offset law: `P^R` preserves `p − 2q`; returns false on any violation.
    pub fn offset_law_holds(&self) -> bool {
        self.entries().all(|(r, i, k)| {
            let d = generator_bidegree(i) + p_bidegree(r);
            d == generator_bidegree(k)
        })
    }
}

/// A G-module `N` (acting through `A₀ → G`, so every `Q` acts as zero)
/// smashed with the window: `a·(h⊗n) = Σ a′h ⊗ a″n` over `ψ(a)`.
pub fn smash_module(n: &FiniteModule, table: &ActionTable, w: &IsotropicWindow) -> Result<FiniteModule, IsotropicError> {
    let basis = w.basis();
    let hpos: HashMap<ExteriorMonomial, usize> = basis.iter().enumerate().map(|(a, m)| (*m, a)).collect();
    let nd = n.dimension();
    let idx = |h: usize, x: usize| h * nd + x;
    let mut names = Vec::new();
    let mut degrees = Vec::new();
    for h in &basis {
        for x in 0..nd {
            names.push(if h.is_one() {
                n.name(x).to_string()
            } else {
                format!("{h}⊗{}", n.name(x))
            });
            degrees.push(h.bidegree() + n.degree(x));
        }
    }
    let total = names.len();
    let mut module = FiniteModule::new(names, degrees.clone());
    let support: BTreeSet<Bidegree> = degrees.iter().copied().collect();
    for (hi, h) in basis.iter().enumerate() {
        for x in 0..nd {
            let src = degrees[idx(hi, x)];
            let diffs: BTreeSet<Bidegree> = support.iter().map(|d| *d - src).filter(|d| d.p > 0).collect();
            for d in diffs {
                for op in milnor::monomials_in_bidegree(d) {
                    let mut v = F2Vector::zeros(total);
                    for (a1, a2) in milnor::coproduct(&op) {
                        if a2.e_mask() != 0 {
                            continue;
                        }
                        let nv = n.act(&a2, x);
                        if nv.is_zero() {
                            continue;
                        }
                        let hv = table.act_monomial(&a1, &HElement::from(*h))?;
                        for t in hv.terms() {
                            let Some(&ht) = hpos.get(&t) else { continue };
                            for y in nv.iter_ones() {
                                v.flip(idx(ht, y));
                            }
                        }
                    }
                    if !v.is_zero() {
                        module.set_action(op, idx(hi, x), v);
                    }
                }
            }
        }
    }
    Ok(module)
}

// ---------------------------------------------------------------------------
// Injectivity over M = Λ(Q₀, …, Q_n) and the Hom comparison.

fn q_bidegree_of_mask(mask: u64) -> Bidegree {
    (0..64)
        .filter(|i| mask >> i & 1 == 1)
        .fold(Bidegree::ZERO, |acc, i| acc + milnor::q_bidegree(i))
}

/// A monomial left ideal of `M_n`, given as an up-closed set of subsets of `{0..n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialIdeal {
    pub n_max: usize,
    pub members: BTreeSet<u64>,
}

impl MonomialIdeal {
    pub fn generated_by(n_max: usize, gens: &[u64]) -> Self {
        let full = (1u64 << (n_max + 1)) - 1;
        let members = (0..=full)
            .filter(|s| gens.iter().any(|g| s & g == *g))
            .collect();
        MonomialIdeal { n_max, members }
    }

    /// Every monomial ideal of `M_n` (up-closed subsets of the Boolean lattice).
    pub fn all(n_max: usize) -> Vec<MonomialIdeal> {
        let full = (1u64 << (n_max + 1)) - 1;
        let size = 1usize << (n_max + 1);
        assert!(size <= 16, "exhaustive enumeration only for n_max ≤ 3");
        let mut out = Vec::new();
        for set in 0u64..(1u64 << size) {
            let members: BTreeSet<u64> = (0..=full).filter(|s| set >> s & 1 == 1).collect();
            let closed = members
                .iter()
                .all(|s| (0..=n_max).all(|j| members.contains(&(s | 1u64 << j))));
            if closed {
                out.push(MonomialIdeal { n_max, members });
            }
        }
        out
    }
}

/// Outcome of [`baer_injectivity_check`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaerReport {
    pub ideals_checked: usize,
    pub morphisms_checked: usize,
    pub failures: Vec<String>,
}

impl BaerReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// All M-linear maps `φ: I → H` of shift `d` (so `φ(Q_S) ∈ H_{|Q_S| + d}`),
/// as a basis of the solution space. Each map is a list of `(S, φ(Q_S))`.
fn hom_from_ideal(ideal: &MonomialIdeal, d: Bidegree) -> Vec<BTreeMap<u64, HElement>> {
    // unknown per member S with a monomial of H in degree |Q_S| + d
    let slots: Vec<(u64, ExteriorMonomial)> = ideal
        .members
        .iter()
        .filter_map(|&s| ExteriorMonomial::in_bidegree(q_bidegree_of_mask(s) + d).map(|u| (s, u)))
        .collect();
    let position: HashMap<u64, usize> = slots.iter().enumerate().map(|(a, (s, _))| (*s, a)).collect();
    let mut rows = Vec::new();
    for (a, &(s, u)) in slots.iter().enumerate() {
        for j in 0..=ideal.n_max {
            // Q_j φ(Q_S) = φ(Q_j Q_S)
            let mut row = F2Vector::zeros(slots.len());
            if u.contains(j) {
                row.flip(a);
            }
            if s >> j & 1 == 0 {
                if let Some(&b) = position.get(&(s | 1u64 << j)) {
                    row.flip(b);
                }
            }
            if !row.is_zero() {
                rows.push(row);
            }
        }
    }
    let matrix = F2Matrix::from_rows(rows, slots.len());
    gf2::kernel_basis(&matrix)
        .into_iter()
        .map(|v| {
            v.iter_ones()
                .map(|a| (slots[a].0, HElement::from(slots[a].1)))
                .collect()
        })
        .collect()
}

/// Extend `φ: I → H` to `ψ: M_n → H` by the explicit recipe
/// `ψ(1) = Σ_{x ∈ A} r_{I_x} φ(x)`: walking the ideal from the top down, every
/// monomial `x = Q_S` where the current candidate disagrees with `φ`
/// contributes `r_S · (φ(x) − Q_S ψ(1))`.
pub fn baer_extension(ideal: &MonomialIdeal, phi: &BTreeMap<u64, HElement>) -> HElement {
    let mut members: Vec<u64> = ideal.members.iter().copied().collect();
    members.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    let mut psi = HElement::zero();
    for s in members {
        let have = apply_q_mask(s, &psi);
        let want = phi.get(&s).cloned().unwrap_or_default();
        let err = want.add(&have);
        if !err.is_zero() {
            let r_s: HElement = ExteriorMonomial::from_mask(s).into();
            psi = psi.add(&r_s.multiply(&err));
        }
    }
    psi
}

fn apply_q_mask(mask: u64, x: &HElement) -> HElement {
    let mut y = x.clone();
    for j in (0..64).filter(|j| mask >> j & 1 == 1) {
        y = q_action(j, &y);
    }
    y
}

fn check_extension(ideal: &MonomialIdeal, phi: &BTreeMap<u64, HElement>, psi: &HElement) -> Result<(), String> {
    for &s in &ideal.members {
        let want = phi.get(&s).cloned().unwrap_or_default();
        let got = apply_q_mask(s, psi);
        if got != want {
            return Err(format!(
                "ψ(1) = {psi}: Q_S ψ(1) = {got} but φ(Q_S) = {want} for S = {s:#b}"
            ));
        }
    }
    Ok(())
}

/// Shifts worth testing for an ideal: map each minimal generator `Q_S` to some `r_V`.
fn candidate_shifts(ideal: &MonomialIdeal, rng: &mut ChaCha8Rng, count: usize) -> Vec<Bidegree> {
    let gens: Vec<u64> = ideal
        .members
        .iter()
        .copied()
        .filter(|s| (0..=ideal.n_max).all(|j| s >> j & 1 == 0 || !ideal.members.contains(&(s & !(1u64 << j)))))
        .collect();
    let mut out = BTreeSet::new();
    let top = 1u64 << (ideal.n_max + 2);
    for _ in 0..count {
        let Some(&g) = gens.choose(rng) else { break };
        let v = rng.random_range(0..top);
        out.insert(ExteriorMonomial::from_mask(v).bidegree() - q_bidegree_of_mask(g));
    }
    out.into_iter().collect()
}

/// Baer's criterion for `H` over `M_n = Λ(Q₀..Q_{n_max})`.
///
/// Ideals: all monomial ideals when `n_max ≤ 2`, otherwise `ideal_samples`
/// ideals generated by up to three random monomials. (Homogeneous elements of
/// `M_n` are monomials, since a bidegree determines the set of `Q`'s, so every
/// homogeneous ideal is monomial.) For each ideal, several shifts and random
/// `φ ∈ Hom_M(I, H)` are extended and checked directly.
pub fn baer_injectivity_check(n_max: usize, ideal_samples: usize, seed: u64) -> BaerReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ideals = if n_max <= 2 {
        MonomialIdeal::all(n_max)
    } else {
        let full = 1u64 << (n_max + 1);
        (0..ideal_samples)
            .map(|_| {
                let count = rng.random_range(1..=3);
                let gens: Vec<u64> = (0..count).map(|_| rng.random_range(0..full)).collect();
                MonomialIdeal::generated_by(n_max, &gens)
            })
            .collect()
    };
    let mut report = BaerReport::default();
    for ideal in &ideals {
        report.ideals_checked += 1;
        for d in candidate_shifts(ideal, &mut rng, 4) {
            let basis = hom_from_ideal(ideal, d);
            let mut samples: Vec<BTreeMap<u64, HElement>> = basis.clone();
            for _ in 0..2 {
                let mut phi: BTreeMap<u64, HElement> = BTreeMap::new();
                for b in &basis {
                    if rng.random::<bool>() {
                        for (s, v) in b {
                            let cur = phi.remove(s).unwrap_or_default().add(v);
                            if !cur.is_zero() {
                                phi.insert(*s, cur);
                            }
                        }
                    }
                }
                samples.push(phi);
            }
            for phi in samples {
                report.morphisms_checked += 1;
                let psi = baer_extension(ideal, &phi);
                if let Err(e) = check_extension(ideal, &phi, &psi) {
                    report.failures.push(format!("ideal {:?}, shift {d}: {e}", ideal.members));
                }
            }
        }
    }
    report
}

/// Dimensions of the three Hom spaces of the comparison lemma, in degree 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomReport {
    pub hom_f2: usize,
    pub hom_m: usize,
    pub hom_m_smash: usize,
    /// Every M-map `N → H ⊗ N′` takes values in `1 ⊗ N′`.
    pub lands_in_unit: bool,
}

impl HomReport {
    pub fn passed(&self) -> bool {
        self.hom_f2 == self.hom_m && self.hom_m == self.hom_m_smash && self.lands_in_unit
    }
}

/// `Hom_{F₂}(N,N′) → Hom_M(N,N′) → Hom_M(N, H⊗N′)` for graded modules with
/// trivial M-action, computed by linear algebra. `H` is taken exactly: in any
/// bidegree it is spanned by at most one monomial.
pub fn hom_comparison_check(n: &[Bidegree], n_prime: &[Bidegree]) -> HomReport {
    let hom_f2 = n
        .iter()
        .map(|a| n_prime.iter().filter(|b| a == *b).count())
        .sum();

    // Hom_M(N,N'): graded maps f with f(Q_j x) = Q_j f(x); both sides vanish
    // for trivial actions, so every graded map qualifies. Solve anyway.
    let slots_plain: Vec<(usize, usize)> = (0..n.len())
        .flat_map(|x| (0..n_prime.len()).map(move |y| (x, y)))
        .filter(|&(x, y)| n[x] == n_prime[y])
        .collect();
    let hom_m = slots_plain.len() - gf2::rank(&F2Matrix::zeros(0, slots_plain.len()));

    // Hom_M(N, H⊗N'): unknown coefficient of r_U ⊗ y in f(x) when
    // |r_U| + |y| = |x|; constraints Q_j f(x) = f(Q_j x) = 0.
    let slots: Vec<(usize, usize, ExteriorMonomial)> = (0..n.len())
        .flat_map(|x| (0..n_prime.len()).map(move |y| (x, y)))
        .filter_map(|(x, y)| ExteriorMonomial::in_bidegree(n[x] - n_prime[y]).map(|u| (x, y, u)))
        .collect();
    let max_j = slots.iter().filter_map(|s| s.2.max_index()).max().unwrap_or(0);
    let mut equations: BTreeMap<(usize, usize, u64), Vec<usize>> = BTreeMap::new();
    for (a, &(x, y, u)) in slots.iter().enumerate() {
        for j in 0..=max_j {
            if u.contains(j) {
                equations.entry((x, y, u.mask() & !(1u64 << j))).or_default().push(a);
            }
        }
    }
    let rows: Vec<F2Vector> = equations
        .values()
        .map(|cols| {
            let mut v = F2Vector::zeros(slots.len());
            for &c in cols {
                v.flip(c);
            }
            v
        })
        .collect();
    let matrix = F2Matrix::from_rows(rows, slots.len());
    let kernel = gf2::kernel_basis(&matrix);
    let lands_in_unit = kernel
        .iter()
        .all(|v| v.iter_ones().all(|a| slots[a].2.is_one()));
    HomReport {
        hom_f2,
        hom_m,
        hom_m_smash: kernel.len(),
        lands_in_unit,
    }
}

/// Random graded vector spaces for the Hom comparison: `dim` basis vectors in
/// G-degrees `(q)[2q]` shifted by a random multiple of the `rᵢ` degrees, so
/// that `H`-components can occur.
pub fn random_graded_space(rng: &mut impl Rng, dim: usize) -> Vec<Bidegree> {
    (0..dim)
        .map(|_| {
            let q = rng.random_range(0..4i64);
            let base = Bidegree::new(2 * q, q);
            if rng.random::<bool>() {
                base - ExteriorMonomial::from_mask(rng.random_range(0..8)).bidegree()
            } else {
                base
            }
        })
        .collect()
}
