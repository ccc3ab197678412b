//! The generalized Steenrod algebra A₀ in the Milnor basis `Q^E P^R`.
//!
//! A₀ is realised directly through its dual Hopf algebra
//! `Λ(τ₀, τ₁, …) ⊗ F₂[ξ₁, ξ₂, …]`: the basis monomial `Q^E P^R` is dual to
//! `τ^E ξ^R`. Products are computed with Milnor's matrix formula for the
//! `P` parts, after moving each `Q` of the right factor leftwards through the
//! `P` part of the left factor with the commutator rule
//! `P^R Q_k = Q_k P^R + Σ_j Q_{k+j} P^{R - 2^k e_j}`.
//!
//! `multiply_via_duality` recomputes products from the coproduct of the dual
//! algebra and serves as an independent oracle for `multiply`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

/// Largest supported generator index (exterior parts are stored in a `u64`).
pub const MAX_INDEX: usize = 63;

/// A bidegree written `(q)[p]`: `p` is the topological degree, `q` the weight.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bidegree {
    pub p: i64,
    pub q: i64,
}

impl Bidegree {
    pub const ZERO: Bidegree = Bidegree { p: 0, q: 0 };

    pub const fn new(p: i64, q: i64) -> Self {
        Bidegree { p, q }
    }

    /// Distance `p - 2q` from the slope-2 line.
    pub fn offset(self) -> i64 {
        self.p - 2 * self.q
    }
}

impl Add for Bidegree {
    type Output = Bidegree;
    fn add(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.p + o.p, self.q + o.q)
    }
}

impl AddAssign for Bidegree {
    fn add_assign(&mut self, o: Bidegree) {
        self.p += o.p;
        self.q += o.q;
    }
}

impl Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.p - o.p, self.q - o.q)
    }
}

impl Neg for Bidegree {
    type Output = Bidegree;
    fn neg(self) -> Bidegree {
        Bidegree::new(-self.p, -self.q)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})[{}]", self.q, self.p)
    }
}

/// Bidegree of `Q_i` (and of `τ_i`).
pub fn q_bidegree(i: usize) -> Bidegree {
    Bidegree::new((1i64 << (i + 1)) - 1, (1i64 << i) - 1)
}

/// Bidegree of the dual generator `ξ_i`, `i ≥ 1`.
pub fn xi_bidegree(i: usize) -> Bidegree {
    Bidegree::new((1i64 << (i + 1)) - 2, (1i64 << i) - 1)
}

fn trim(mut r: Vec<u32>) -> Vec<u32> {
    while r.last() == Some(&0) {
        r.pop();
    }
    r
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| (mask >> i) & 1 == 1)
}

/// Exterior part plus polynomial exponents; shared by `MilnorMonomial` and `DualMonomial`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
struct Exponents {
    e: u64,
    r: Vec<u32>,
}

impl Exponents {
    fn bidegree(&self) -> Bidegree {
        let mut d = Bidegree::ZERO;
        for i in bits(self.e) {
            d += q_bidegree(i);
        }
        for (k, &ri) in self.r.iter().enumerate() {
            let x = xi_bidegree(k + 1);
            d += Bidegree::new(x.p * ri as i64, x.q * ri as i64);
        }
        d
    }

    fn cmp_canonical(&self, other: &Self) -> Ordering {
        self.bidegree()
            .cmp(&other.bidegree())
            .then_with(|| bits(self.e).cmp(bits(other.e)))
            .then_with(|| self.r.cmp(&other.r))
    }
}

/// A Milnor basis monomial `Q^E P^R`; `E` is a set of indices, `R = (r₁, r₂, …)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MilnorMonomial(Exponents);

impl MilnorMonomial {
    pub fn new(e: &[usize], r: &[u32]) -> Self {
        let mut mask = 0u64;
        for &i in e {
            assert!(i <= MAX_INDEX, "Q index {i} too large");
            assert!(mask & (1 << i) == 0, "repeated Q index {i}");
            mask |= 1 << i;
        }
        Self::from_parts(mask, r.to_vec())
    }

    pub fn from_parts(e_mask: u64, r: Vec<u32>) -> Self {
        MilnorMonomial(Exponents { e: e_mask, r: trim(r) })
    }

    pub fn one() -> Self {
        Self::default()
    }

    /// The Milnor primitive `Q_i`.
    pub fn q(i: usize) -> Self {
        Self::new(&[i], &[])
    }

    /// `P^R`.
    pub fn p(r: &[u32]) -> Self {
        Self::new(&[], r)
    }

    pub fn e_mask(&self) -> u64 {
        self.0.e
    }

    pub fn e_indices(&self) -> Vec<usize> {
        bits(self.0.e).collect()
    }

    pub fn r(&self) -> &[u32] {
        &self.0.r
    }

    pub fn is_one(&self) -> bool {
        self.0.e == 0 && self.0.r.is_empty()
    }

    pub fn bidegree(&self) -> Bidegree {
        self.0.bidegree()
    }

    pub fn degree(&self) -> i64 {
        self.bidegree().p
    }

    pub fn dual(&self) -> DualMonomial {
        DualMonomial(self.0.clone())
    }

    fn write_q(&self, f: &mut fmt::Formatter<'_>, first: &mut bool) -> fmt::Result {
        for i in bits(self.0.e) {
            if !*first {
                write!(f, " ")?;
            }
            write!(f, "Q{i}")?;
            *first = false;
        }
        Ok(())
    }

    fn write_p(&self, f: &mut fmt::Formatter<'_>, first: &mut bool) -> fmt::Result {
        if !self.0.r.is_empty() {
            if !*first {
                write!(f, " ")?;
            }
            let parts: Vec<String> = self.0.r.iter().map(|x| x.to_string()).collect();
            write!(f, "P({})", parts.join(","))?;
            *first = false;
        }
        Ok(())
    }
}

impl Ord for MilnorMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_canonical(&other.0)
    }
}

impl PartialOrd for MilnorMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Prints in the `Q^E P^R` reading, e.g. `Q0 Q2 P(1,0,3)`.
impl fmt::Display for MilnorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        self.write_q(f, &mut first)?;
        self.write_p(f, &mut first)
    }
}

/// A monomial `τ^E ξ^R` of the dual Hopf algebra.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DualMonomial(Exponents);

impl DualMonomial {
    pub fn new(e: &[usize], r: &[u32]) -> Self {
        DualMonomial(MilnorMonomial::new(e, r).0)
    }

    pub fn from_parts(e_mask: u64, r: Vec<u32>) -> Self {
        DualMonomial(Exponents { e: e_mask, r: trim(r) })
    }

    pub fn one() -> Self {
        Self::default()
    }

    pub fn tau(i: usize) -> Self {
        Self::new(&[i], &[])
    }

    /// `ξ_i^k`; `ξ₀` is the unit.
    pub fn xi_pow(i: usize, k: u32) -> Self {
        if i == 0 || k == 0 {
            return Self::one();
        }
        let mut r = vec![0; i];
        r[i - 1] = k;
        Self::from_parts(0, r)
    }

    pub fn e_mask(&self) -> u64 {
        self.0.e
    }

    pub fn r(&self) -> &[u32] {
        &self.0.r
    }

    pub fn is_one(&self) -> bool {
        self.0.e == 0 && self.0.r.is_empty()
    }

    pub fn bidegree(&self) -> Bidegree {
        self.0.bidegree()
    }

    pub fn dual(&self) -> MilnorMonomial {
        MilnorMonomial(self.0.clone())
    }
}

impl Ord for DualMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_canonical(&other.0)
    }
}

impl PartialOrd for DualMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DualMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for i in bits(self.0.e) {
            parts.push(format!("t{i}"));
        }
        for (k, &ri) in self.0.r.iter().enumerate() {
            match ri {
                0 => {}
                1 => parts.push(format!("x{}", k + 1)),
                _ => parts.push(format!("x{}^{}", k + 1, ri)),
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// A GF(2) combination of Milnor monomials, read in the `Q^E P^R` basis.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Element {
    terms: BTreeSet<MilnorMonomial>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        MilnorMonomial::one().into()
    }

    pub fn from_terms<I: IntoIterator<Item = MilnorMonomial>>(terms: I) -> Self {
        let mut e = Self::zero();
        for t in terms {
            e.toggle(t);
        }
        e
    }

    /// Add a single monomial (mod 2).
    pub fn toggle(&mut self, m: MilnorMonomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &MilnorMonomial> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn contains(&self, m: &MilnorMonomial) -> bool {
        self.terms.contains(m)
    }

    /// The common bidegree of all terms, `None` for zero or inhomogeneous elements.
    pub fn bidegree(&self) -> Option<Bidegree> {
        let mut it = self.terms.iter().map(|m| m.bidegree());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.bidegree().is_some()
    }
}

impl From<MilnorMonomial> for Element {
    fn from(m: MilnorMonomial) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(m);
        Element { terms }
    }
}

impl Add<&Element> for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        Element {
            terms: self.terms.symmetric_difference(&rhs.terms).cloned().collect(),
        }
    }
}

impl AddAssign<&Element> for Element {
    fn add_assign(&mut self, rhs: &Element) {
        for t in &rhs.terms {
            self.toggle(t.clone());
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The same algebra element expressed in the `P^R Q^E` basis.
///
/// Each stored monomial `(E, R)` denotes the product `P^R · Q^E`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PrqeElement {
    terms: BTreeSet<MilnorMonomial>,
}

impl PrqeElement {
    pub fn from_terms<I: IntoIterator<Item = MilnorMonomial>>(terms: I) -> Self {
        let mut out = Self::default();
        for t in terms {
            out.toggle(t);
        }
        out
    }

    fn toggle(&mut self, m: MilnorMonomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &MilnorMonomial> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }
}

/// Prints monomials as `P(..) Q.. Q..`.
impl fmt::Display for PrqeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|m| {
                if m.is_one() {
                    return "1".to_string();
                }
                struct W<'a>(&'a MilnorMonomial);
                impl fmt::Display for W<'_> {
                    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        let mut first = true;
                        self.0.write_p(f, &mut first)?;
                        self.0.write_q(f, &mut first)
                    }
                }
                W(m).to_string()
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A Milnor matrix `X = (x_ij)`, `i, j ≥ 0`, with `x₀₀` unused.
///
/// Row `i ≥ 1` contributes `r_i = Σ_j 2^j x_ij`, column `j ≥ 1` contributes
/// `s_j = Σ_i x_ij`, and antidiagonal `n` gives `t_n = Σ_{i+j=n} x_ij`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MilnorMatrix {
    entries: Vec<Vec<u32>>,
}

impl MilnorMatrix {
    pub fn from_entries(entries: Vec<Vec<u32>>) -> Self {
        let width = entries.first().map_or(0, |r| r.len());
        assert!(entries.iter().all(|r| r.len() == width), "ragged Milnor matrix");
        MilnorMatrix { entries }
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0)
    }

    fn rows(&self) -> usize {
        self.entries.len()
    }

    fn cols(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    pub fn r_vector(&self) -> Vec<u32> {
        trim(
            (1..self.rows())
                .map(|i| (0..self.cols()).map(|j| self.get(i, j) << j).sum())
                .collect(),
        )
    }

    pub fn s_vector(&self) -> Vec<u32> {
        trim(
            (1..self.cols())
                .map(|j| (0..self.rows()).map(|i| self.get(i, j)).sum())
                .collect(),
        )
    }

    pub fn t_vector(&self) -> Vec<u32> {
        let n_max = (self.rows() + self.cols()).saturating_sub(2);
        trim(
            (1..=n_max)
                .map(|n| {
                    (0..=n)
                        .filter(|&i| i < self.rows() && n - i < self.cols())
                        .map(|i| self.get(i, n - i))
                        .sum()
                })
                .collect(),
        )
    }

    /// Nonzero entries as `((i, j), x_ij)`.
    pub fn nonzero_entries(&self) -> Vec<((usize, usize), u32)> {
        let mut out = Vec::new();
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                if (i, j) != (0, 0) && self.get(i, j) != 0 {
                    out.push(((i, j), self.get(i, j)));
                }
            }
        }
        out
    }
}

/// All Milnor matrices with `R(X) = r` and `S(X) = s`, in a fixed order.
pub fn enumerate_matrices(r: &[u32], s: &[u32]) -> Vec<MilnorMatrix> {
    let rows = r.len();
    let cols = s.len();
    let mut out = Vec::new();
    let mut entries = vec![vec![0u32; cols + 1]; rows + 1];
    let mut budget: Vec<u32> = s.to_vec();
    fill_row(1, r, &mut entries, &mut budget, &mut out);
    out
}

fn fill_row(
    i: usize,
    r: &[u32],
    entries: &mut Vec<Vec<u32>>,
    budget: &mut Vec<u32>,
    out: &mut Vec<MilnorMatrix>,
) {
    if i > r.len() {
        let mut m = entries.clone();
        for (j, &b) in budget.iter().enumerate() {
            m[0][j + 1] = b;
        }
        out.push(MilnorMatrix { entries: m });
        return;
    }
    fill_entry(i, 1, r[i - 1], r, entries, budget, out);
}

/// Choose `x_ij` for `j ≥ 1` with `remaining` of `r_i` left to distribute.
fn fill_entry(
    i: usize,
    j: usize,
    remaining: u32,
    r: &[u32],
    entries: &mut Vec<Vec<u32>>,
    budget: &mut Vec<u32>,
    out: &mut Vec<MilnorMatrix>,
) {
    if j > budget.len() {
        entries[i][0] = remaining;
        fill_row(i + 1, r, entries, budget, out);
        entries[i][0] = 0;
        return;
    }
    let max = (remaining >> j).min(budget[j - 1]);
    for x in 0..=max {
        entries[i][j] = x;
        budget[j - 1] -= x;
        fill_entry(i, j + 1, remaining - (x << j), r, entries, budget, out);
        budget[j - 1] += x;
    }
    entries[i][j] = 0;
}

/// `Π t_n! / Π x_ij!` mod 2: odd iff the entries on each antidiagonal have
/// pairwise disjoint binary digits.
pub fn b_mod2(x: &MilnorMatrix) -> bool {
    let n_max = (x.rows() + x.cols()).saturating_sub(2);
    for n in 1..=n_max {
        let mut seen = 0u32;
        for i in 0..=n {
            if i >= x.rows() || n - i >= x.cols() {
                continue;
            }
            let v = x.get(i, n - i);
            if seen & v != 0 {
                return false;
            }
            seen |= v;
        }
    }
    true
}

/// `P^R · P^S` as a set of `T` exponents (mod 2).
pub fn multiply_p(r: &[u32], s: &[u32]) -> BTreeSet<Vec<u32>> {
    let mut out = BTreeSet::new();
    if r.is_empty() {
        out.insert(s.to_vec());
        return out;
    }
    if s.is_empty() {
        out.insert(r.to_vec());
        return out;
    }
    for x in enumerate_matrices(r, s) {
        if b_mod2(&x) {
            let t = x.t_vector();
            if !out.remove(&t) {
                out.insert(t);
            }
        }
    }
    out
}

/// `P^R Q_k` rewritten as `Σ Q_m P^{R'}`, as pairs `(m, R')`.
fn p_times_q(r: &[u32], k: usize) -> Vec<(usize, Vec<u32>)> {
    let mut out = vec![(k, r.to_vec())];
    let step = 1u64 << k;
    for (idx, &rj) in r.iter().enumerate() {
        if rj as u64 >= step {
            let mut r2 = r.to_vec();
            r2[idx] -= step as u32;
            out.push((k + idx + 1, trim(r2)));
        }
    }
    out
}

/// Product of two basis monomials.
pub fn multiply_monomials(a: &MilnorMonomial, b: &MilnorMonomial) -> Element {
    let mut stage: HashMap<(u64, Vec<u32>), bool> = HashMap::new();
    stage.insert((a.0.e, a.0.r.clone()), true);
    for k in bits(b.0.e) {
        let mut next: HashMap<(u64, Vec<u32>), bool> = HashMap::new();
        for ((e, r), odd) in stage {
            if !odd {
                continue;
            }
            for (m, r2) in p_times_q(&r, k) {
                assert!(m <= MAX_INDEX, "Q index overflow");
                if e & (1 << m) != 0 {
                    continue;
                }
                *next.entry((e | (1 << m), r2)).or_insert(false) ^= true;
            }
        }
        stage = next;
    }
    let mut out = Element::zero();
    for ((e, r), odd) in stage {
        if !odd {
            continue;
        }
        for t in multiply_p(&r, &b.0.r) {
            out.toggle(MilnorMonomial::from_parts(e, t));
        }
    }
    out
}

/// Product in A₀, extended bilinearly.
pub fn multiply(a: &Element, b: &Element) -> Element {
    let mut out = Element::zero();
    for x in a.terms() {
        for y in b.terms() {
            out += &multiply_monomials(x, y);
        }
    }
    out
}

/// Product in the dual algebra: exterior in the `τ`s, polynomial in the `ξ`s.
pub fn dual_product(x: &DualMonomial, y: &DualMonomial) -> Option<DualMonomial> {
    if x.0.e & y.0.e != 0 {
        return None;
    }
    let n = x.0.r.len().max(y.0.r.len());
    let r = (0..n)
        .map(|i| x.0.r.get(i).copied().unwrap_or(0) + y.0.r.get(i).copied().unwrap_or(0))
        .collect();
    Some(DualMonomial::from_parts(x.0.e | y.0.e, r))
}

type Tensor = HashMap<(DualMonomial, DualMonomial), bool>;

fn tensor_mul(a: &Tensor, b: &Tensor) -> Tensor {
    let mut out = Tensor::new();
    for ((a1, a2), &odd_a) in a {
        if !odd_a {
            continue;
        }
        for ((b1, b2), &odd_b) in b {
            if !odd_b {
                continue;
            }
            if let (Some(l), Some(r)) = (dual_product(a1, b1), dual_product(a2, b2)) {
                *out.entry((l, r)).or_insert(false) ^= true;
            }
        }
    }
    out.retain(|_, odd| *odd);
    out
}

/// `ψ(ξ_k) = Σ_{i=0}^{k} ξ_{k-i}^{2^i} ⊗ ξ_i`.
fn xi_coproduct(k: usize) -> Tensor {
    let mut t = Tensor::new();
    for i in 0..=k {
        let left = DualMonomial::xi_pow(k - i, 1 << i);
        t.insert((left, DualMonomial::xi_pow(i, 1)), true);
    }
    t
}

/// `ψ(τ_k) = Σ_{i=0}^{k} ξ_{k-i}^{2^i} ⊗ τ_i + τ_k ⊗ 1`.
fn tau_coproduct(k: usize) -> Tensor {
    let mut t = Tensor::new();
    for i in 0..=k {
        let left = DualMonomial::xi_pow(k - i, 1 << i);
        t.insert((left, DualMonomial::tau(i)), true);
    }
    t.insert((DualMonomial::tau(k), DualMonomial::one()), true);
    t
}

/// The coproduct of a dual monomial, as a sorted list of tensor pairs (mod 2).
pub fn dual_coproduct(x: &DualMonomial) -> Vec<(DualMonomial, DualMonomial)> {
    let mut acc = Tensor::new();
    acc.insert((DualMonomial::one(), DualMonomial::one()), true);
    for k in bits(x.0.e) {
        acc = tensor_mul(&acc, &tau_coproduct(k));
    }
    for (idx, &rk) in x.0.r.iter().enumerate() {
        if rk == 0 {
            continue;
        }
        let gen = xi_coproduct(idx + 1);
        // square-and-multiply on ψ(ξ_k)^{r_k}
        let mut power = gen;
        let mut e = rk;
        let mut result: Option<Tensor> = None;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => power.clone(),
                    Some(r) => tensor_mul(&r, &power),
                });
            }
            e >>= 1;
            if e > 0 {
                power = tensor_mul(&power, &power);
            }
        }
        acc = tensor_mul(&acc, &result.expect("positive exponent"));
    }
    let mut out: Vec<_> = acc.into_iter().filter(|(_, odd)| *odd).map(|(k, _)| k).collect();
    out.sort();
    out
}

/// Coproduct of A₀ on a basis monomial, dual to `dual_product`:
/// `ψ(Q^E P^R) = Σ_{E = E₁ ⊔ E₂, R = S + T} Q^{E₁}P^S ⊗ Q^{E₂}P^T`.
pub fn coproduct(m: &MilnorMonomial) -> Vec<(MilnorMonomial, MilnorMonomial)> {
    let e = m.0.e;
    let mut out = Vec::new();
    let mut sub = e;
    let mut e_splits = Vec::new();
    loop {
        e_splits.push((sub, e & !sub));
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & e;
    }
    let r_splits = vector_splits(&m.0.r);
    for &(e1, e2) in &e_splits {
        for (s, t) in &r_splits {
            out.push((
                MilnorMonomial::from_parts(e1, s.clone()),
                MilnorMonomial::from_parts(e2, t.clone()),
            ));
        }
    }
    out.sort();
    out
}

fn vector_splits(r: &[u32]) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = vec![(Vec::new(), Vec::new())];
    for &ri in r {
        let mut next = Vec::with_capacity(out.len() * (ri as usize + 1));
        for (s, t) in &out {
            for a in 0..=ri {
                let mut s2 = s.clone();
                let mut t2 = t.clone();
                s2.push(a);
                t2.push(ri - a);
                next.push((s2, t2));
            }
        }
        out = next;
    }
    out
}

/// All exponent vectors `R` with `Σ r_i (2^i - 1) = weight`.
pub fn p_exponents_of_weight(weight: u64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut max_i = 0;
    while (1u64 << (max_i + 1)) - 1 <= weight {
        max_i += 1;
    }
    let mut cur = vec![0u32; max_i];
    fn rec(i: usize, remaining: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == 0 {
            if remaining == 0 {
                out.push(trim(cur.clone()));
            }
            return;
        }
        let unit = (1u64 << i) - 1;
        for k in 0..=(remaining / unit) {
            cur[i - 1] = k as u32;
            rec(i - 1, remaining - k * unit, cur, out);
        }
        cur[i - 1] = 0;
    }
    rec(max_i, weight, &mut cur, &mut out);
    out.sort();
    out
}

/// All Milnor monomials of topological degree `p`, sorted canonically.
pub fn monomials_of_degree(p: i64) -> Vec<MilnorMonomial> {
    static CACHE: OnceLock<Mutex<HashMap<i64, Arc<Vec<MilnorMonomial>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&p) {
        return v.as_ref().clone();
    }
    let mut out = Vec::new();
    if p >= 0 {
        let mut qs = Vec::new();
        while q_bidegree(qs.len()).p <= p {
            qs.push(qs.len());
        }
        for mask in 0u64..(1u64 << qs.len()) {
            let qp: i64 = bits(mask).map(|i| q_bidegree(i).p).sum();
            let rest = p - qp;
            if rest < 0 || rest % 2 != 0 {
                continue;
            }
            for r in p_exponents_of_weight((rest / 2) as u64) {
                out.push(MilnorMonomial::from_parts(mask, r));
            }
        }
    }
    out.sort();
    cache.lock().unwrap().insert(p, Arc::new(out.clone()));
    out
}

pub fn monomials_in_bidegree(d: Bidegree) -> Vec<MilnorMonomial> {
    monomials_of_degree(d.p)
        .into_iter()
        .filter(|m| m.bidegree() == d)
        .collect()
}

/// For one bidegree: every tensor pair `(u, v)` appearing in some `ψ(x)`,
/// mapped to the list of `x` whose coproduct contains it.
type PairingTable = HashMap<(MilnorMonomial, MilnorMonomial), Vec<MilnorMonomial>>;

fn pairing_table(d: Bidegree) -> Arc<PairingTable> {
    static CACHE: OnceLock<Mutex<HashMap<Bidegree, Arc<PairingTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&d) {
        return t.clone();
    }
    let mut table = PairingTable::new();
    for x in monomials_in_bidegree(d) {
        for (u, v) in dual_coproduct(&x.dual()) {
            table.entry((u.dual(), v.dual())).or_default().push(x.clone());
        }
    }
    let table = Arc::new(table);
    cache.lock().unwrap().insert(d, table.clone());
    table
}

/// Oracle product from `⟨ab, x⟩ = ⟨a ⊗ b, ψ(x)⟩`. Both factors must be homogeneous.
pub fn multiply_via_duality(a: &Element, b: &Element) -> Element {
    let (Some(da), Some(db)) = (a.bidegree(), b.bidegree()) else {
        assert!(a.is_homogeneous() && b.is_homogeneous(), "oracle needs homogeneous factors");
        return Element::zero();
    };
    let table = pairing_table(da + db);
    let mut out = Element::zero();
    for u in a.terms() {
        for v in b.terms() {
            if let Some(xs) = table.get(&(u.clone(), v.clone())) {
                for x in xs {
                    out.toggle(x.clone());
                }
            }
        }
    }
    out
}

/// Rewrite `Q^E P^R` combinations in the `P^R Q^E` basis by induction on `R`
/// and on the number of `Q`s.
pub fn qepr_to_prqe(a: &Element) -> PrqeElement {
    let mut memo = HashMap::new();
    let mut out = PrqeElement::default();
    for m in a.terms() {
        for t in convert_monomial(m.0.e, &m.0.r, &mut memo) {
            out.toggle(t);
        }
    }
    out
}

type ConvertMemo = HashMap<(u64, Vec<u32>), Vec<MilnorMonomial>>;

/// `Q^E P^R` as a list of `P^S Q^G` monomials (already reduced mod 2).
fn convert_monomial(e: u64, r: &[u32], memo: &mut ConvertMemo) -> Vec<MilnorMonomial> {
    if e == 0 {
        return vec![MilnorMonomial::from_parts(0, r.to_vec())];
    }
    let key = (e, r.to_vec());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let a = e.trailing_zeros() as usize;
    let rest = e & !(1 << a);
    let mut acc: HashMap<MilnorMonomial, bool> = HashMap::new();
    for inner in convert_monomial(rest, r, memo) {
        // Q_a · P^S Q^G
        for left in convert_q_single(a, &inner.0.r, memo) {
            if left.0.e & inner.0.e != 0 {
                continue;
            }
            let m = MilnorMonomial::from_parts(left.0.e | inner.0.e, left.0.r.clone());
            *acc.entry(m).or_insert(false) ^= true;
        }
    }
    let mut out: Vec<_> = acc.into_iter().filter(|(_, o)| *o).map(|(m, _)| m).collect();
    out.sort();
    memo.insert(key, out.clone());
    out
}

/// `Q_a P^S = P^S Q_a + Σ_j Q_{a+j} P^{S - 2^a e_j}`, the latter recursively converted.
fn convert_q_single(a: usize, s: &[u32], memo: &mut ConvertMemo) -> Vec<MilnorMonomial> {
    let mut acc: HashMap<MilnorMonomial, bool> = HashMap::new();
    acc.insert(MilnorMonomial::from_parts(1 << a, s.to_vec()), true);
    for (m, s2) in p_times_q(s, a).into_iter().skip(1) {
        for t in convert_monomial(1 << m, &s2, memo) {
            *acc.entry(t).or_insert(false) ^= true;
        }
    }
    let mut out: Vec<_> = acc.into_iter().filter(|(_, o)| *o).map(|(m, _)| m).collect();
    out.sort();
    out
}

/// Inverse of `qepr_to_prqe`: each `P^R Q^E` is evaluated as a product.
pub fn prqe_to_qepr(a: &PrqeElement) -> Element {
    let mut out = Element::zero();
    for m in a.terms() {
        let p = MilnorMonomial::from_parts(0, m.0.r.clone());
        let q = MilnorMonomial::from_parts(m.0.e, Vec::new());
        out += &multiply_monomials(&p, &q);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(ms: &[MilnorMonomial]) -> Element {
        Element::from_terms(ms.iter().cloned())
    }

    fn q(i: usize) -> MilnorMonomial {
        MilnorMonomial::q(i)
    }

    fn p(r: &[u32]) -> MilnorMonomial {
        MilnorMonomial::p(r)
    }

    #[test]
    fn bidegree_examples() {
        assert_eq!(q(2).bidegree(), Bidegree::new(7, 3));
        assert_eq!(p(&[1]).bidegree(), Bidegree::new(2, 1));
        assert_eq!(MilnorMonomial::one().bidegree(), Bidegree::ZERO);
        assert_eq!(Bidegree::new(7, 3).to_string(), "(3)[7]");
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        assert_eq!(p(&[1, 0, 0]), p(&[1]));
        assert_eq!(p(&[0]), MilnorMonomial::one());
    }

    #[test]
    fn matrix_enumeration_examples() {
        let ms = enumerate_matrices(&[1], &[1]);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].nonzero_entries(), vec![((0, 1), 1), ((1, 0), 1)]);
        assert_eq!(enumerate_matrices(&[], &[]).len(), 1);
        let ms = enumerate_matrices(&[2], &[1]);
        assert_eq!(ms.len(), 2);
        let entries: Vec<_> = ms.iter().map(|m| m.nonzero_entries()).collect();
        assert!(entries.contains(&vec![((0, 1), 1), ((1, 0), 2)]));
        assert!(entries.contains(&vec![((1, 1), 1)]));
        for m in &ms {
            assert_eq!(m.r_vector(), vec![2]);
            assert_eq!(m.s_vector(), vec![1]);
        }
    }

    /// Exhaustive search over all small matrices as an independent check.
    #[test]
    fn matrix_enumeration_matches_brute_force() {
        for r in [vec![3, 1], vec![4], vec![2, 2], vec![0, 1]] {
            for s in [vec![1, 1], vec![3], vec![2, 1]] {
                let rows = r.len() + 1;
                let cols = s.len() + 1;
                let cells = rows * cols - 1;
                let bound = 4u32;
                let mut count = 0;
                let mut idx = vec![0u32; cells];
                'outer: loop {
                    let mut e = vec![vec![0u32; cols]; rows];
                    for (k, &v) in idx.iter().enumerate() {
                        let flat = k + 1;
                        e[flat / cols][flat % cols] = v;
                    }
                    let m = MilnorMatrix::from_entries(e);
                    if m.r_vector() == trim(r.clone()) && m.s_vector() == trim(s.clone()) {
                        count += 1;
                    }
                    for slot in idx.iter_mut().take(cells) {
                        *slot += 1;
                        if *slot <= bound {
                            continue 'outer;
                        }
                        *slot = 0;
                    }
                    break;
                }
                assert_eq!(enumerate_matrices(&r, &s).len(), count, "R={r:?} S={s:?}");
            }
        }
    }

    fn factorial(n: u32) -> u128 {
        (1..=n as u128).product()
    }

    #[test]
    fn b_mod2_examples_and_factorials() {
        let x = MilnorMatrix::from_entries(vec![vec![0, 1], vec![1, 0]]);
        assert!(!b_mod2(&x));
        assert!(b_mod2(&MilnorMatrix::from_entries(vec![vec![0]])));
        let x = MilnorMatrix::from_entries(vec![vec![0, 0, 1], vec![1, 0, 0]]);
        assert!(b_mod2(&x));
        // compare with direct factorials on all small matrices of R=(3,1), S=(2,1)
        for m in enumerate_matrices(&[3, 1], &[2, 1]) {
            let num: u128 = m.t_vector().iter().map(|&t| factorial(t)).product();
            let den: u128 = m.nonzero_entries().iter().map(|&(_, v)| factorial(v)).product();
            assert_eq!(b_mod2(&m), (num / den) % 2 == 1);
        }
    }

    #[test]
    fn multiply_examples() {
        assert!(multiply(&q(0).into(), &q(0).into()).is_zero());
        let prod = multiply(&q(0).into(), &p(&[1]).into());
        assert_eq!(prod, el(&[MilnorMonomial::new(&[0], &[1])]));
        assert_eq!(qepr_to_prqe(&prod).to_string(), "P(1) Q0 + Q1");
        assert!(multiply(&p(&[1]).into(), &p(&[1]).into()).is_zero());
        assert_eq!(multiply(&p(&[1]).into(), &p(&[2]).into()), el(&[p(&[3])]));
        // P(1) Q0 = Q0 P(1) + Q1
        assert_eq!(
            multiply(&p(&[1]).into(), &q(0).into()),
            el(&[MilnorMonomial::new(&[0], &[1]), q(1)])
        );
    }

    #[test]
    fn duality_oracle_examples() {
        assert!(multiply_via_duality(&q(0).into(), &q(0).into()).is_zero());
        assert_eq!(
            multiply_via_duality(&p(&[1]).into(), &q(0).into()),
            el(&[MilnorMonomial::new(&[0], &[1]), q(1)])
        );
        let x: Element = MilnorMonomial::new(&[1], &[0, 1]).into();
        assert_eq!(multiply_via_duality(&Element::one(), &x), x);
        assert_eq!(multiply_via_duality(&p(&[2]).into(), &p(&[1]).into()), el(&[p(&[3]), p(&[0, 1])]));
    }

    #[test]
    fn dual_product_examples() {
        let t0 = DualMonomial::tau(0);
        let x1 = DualMonomial::xi_pow(1, 1);
        assert_eq!(dual_product(&t0, &t0), None);
        assert_eq!(dual_product(&t0, &x1), Some(DualMonomial::new(&[0], &[1])));
        assert_eq!(dual_product(&x1, &x1), Some(DualMonomial::xi_pow(1, 2)));
    }

    #[test]
    fn dual_coproduct_examples() {
        let one = DualMonomial::one();
        let x1 = DualMonomial::xi_pow(1, 1);
        let mut expect = vec![(x1.clone(), one.clone()), (one.clone(), x1.clone())];
        expect.sort();
        assert_eq!(dual_coproduct(&x1), expect);
        let t0 = DualMonomial::tau(0);
        let mut expect = vec![(t0.clone(), one.clone()), (one.clone(), t0.clone())];
        expect.sort();
        assert_eq!(dual_coproduct(&t0), expect);
        let x2 = DualMonomial::xi_pow(2, 1);
        let mut expect = vec![
            (x2.clone(), one.clone()),
            (DualMonomial::xi_pow(1, 2), x1.clone()),
            (one.clone(), x2.clone()),
        ];
        expect.sort();
        assert_eq!(dual_coproduct(&x2), expect);
        for (l, r) in dual_coproduct(&DualMonomial::new(&[0, 2], &[3, 1])) {
            assert_eq!(l.bidegree() + r.bidegree(), DualMonomial::new(&[0, 2], &[3, 1]).bidegree());
        }
    }

    #[test]
    fn coproduct_examples() {
        let one = MilnorMonomial::one();
        let mut expect = vec![(q(0), one.clone()), (one.clone(), q(0))];
        expect.sort();
        assert_eq!(coproduct(&q(0)), expect);
        let mut expect = vec![(p(&[1]), one.clone()), (one.clone(), p(&[1]))];
        expect.sort();
        assert_eq!(coproduct(&p(&[1])), expect);
        assert_eq!(coproduct(&one), vec![(one.clone(), one)]);
    }

    /// ⟨ψ(m), x ⊗ y⟩ = ⟨m, xy⟩ for all dual monomials in small degrees.
    #[test]
    fn coproduct_is_dual_to_dual_product() {
        for d in 0..=8 {
            for m in monomials_of_degree(d) {
                let cop: BTreeSet<_> = coproduct(&m).into_iter().collect();
                for d1 in 0..=d {
                    for x in monomials_of_degree(d1) {
                        for y in monomials_of_degree(d - d1) {
                            let prod = dual_product(&x.dual(), &y.dual());
                            let lhs = cop.contains(&(x.clone(), y.clone()));
                            assert_eq!(lhs, prod == Some(m.dual()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn basis_conversion_examples() {
        let e: Element = MilnorMonomial::new(&[0], &[1]).into();
        assert_eq!(qepr_to_prqe(&e).to_string(), "P(1) Q0 + Q1");
        assert_eq!(qepr_to_prqe(&p(&[1]).into()).to_string(), "P(1)");
        let e: Element = MilnorMonomial::new(&[0, 1], &[1]).into();
        let conv = qepr_to_prqe(&e);
        assert_eq!(prqe_to_qepr(&conv), e);
        // P(1) Q0 → Q0 P(1) + Q1
        let pq = PrqeElement::from_terms([MilnorMonomial::new(&[0], &[1])]);
        assert_eq!(prqe_to_qepr(&pq), el(&[MilnorMonomial::new(&[0], &[1]), q(1)]));
        assert_eq!(prqe_to_qepr(&PrqeElement::from_terms([q(1)])), el(&[q(1)]));
        assert_eq!(prqe_to_qepr(&PrqeElement::from_terms([p(&[2])])), el(&[p(&[2])]));
    }

    #[test]
    fn monomial_counts_small_degrees() {
        // A₀ has one monomial in each of degrees 0, 1, 2 and two in degree 3.
        let counts: Vec<usize> = (0..=4).map(|d| monomials_of_degree(d).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 2]);
    }

    #[test]
    fn printing() {
        assert_eq!(MilnorMonomial::new(&[0, 2], &[1, 0, 3]).to_string(), "Q0 Q2 P(1,0,3)");
        assert_eq!(Element::zero().to_string(), "0");
        assert_eq!(Element::one().to_string(), "1");
        assert_eq!(DualMonomial::new(&[1], &[2, 1]).to_string(), "t1 x1^2 x2");
    }
}
