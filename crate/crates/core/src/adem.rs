//! Admissible words in Steenrod squares.
//!
//! Two rewriting systems are supported: the classical algebra A with the
//! usual Adem relations, and the even subalgebra G ⊂ A₀ generated by the
//! `Sq^{2r}`, whose relations are the Adem relations among even squares with
//! the odd-`c` terms removed. Words over all of A₀ are evaluated through the
//! Milnor basis instead of being rewritten.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use crate::milnor::{self, Bidegree, Element, MilnorMonomial};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WordFlavor {
    /// The classical Steenrod algebra A.
    Classical,
    /// The subalgebra G of A₀ spanned by the `P^R`; all squares even.
    GEven,
    /// The generalized algebra A₀ (evaluated in the Milnor basis only).
    A0,
}

impl fmt::Display for WordFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordFlavor::Classical => "classical",
            WordFlavor::GEven => "G",
            WordFlavor::A0 => "A0",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdemError {
    #[error("Sq^0 is not allowed inside a word")]
    ZeroExponent,
    #[error("odd square Sq^{0} in a G-even word")]
    OddInEven(u32),
    #[error("cannot combine {0} and {1} words")]
    MixedFlavor(WordFlavor, WordFlavor),
    #[error("Adem rewriting is only defined for classical and G-even words, not {0}")]
    NoRewriting(WordFlavor),
}

/// `Sq^{i₁} ⋯ Sq^{iₙ}` in one of the three algebras.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SqWord {
    flavor: WordFlavor,
    exponents: Vec<u32>,
}

impl SqWord {
    pub fn new(flavor: WordFlavor, exponents: Vec<u32>) -> Result<Self, AdemError> {
        for &i in &exponents {
            if i == 0 {
                return Err(AdemError::ZeroExponent);
            }
            if flavor == WordFlavor::GEven && i % 2 == 1 {
                return Err(AdemError::OddInEven(i));
            }
        }
        Ok(SqWord { flavor, exponents })
    }

    pub fn empty(flavor: WordFlavor) -> Self {
        SqWord {
            flavor,
            exponents: Vec::new(),
        }
    }

    pub fn flavor(&self) -> WordFlavor {
        self.flavor
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn is_admissible(&self) -> bool {
        self.exponents.windows(2).all(|w| w[0] >= 2 * w[1])
    }

    /// Classical words sit in weight 0; in A₀ and G, `Sq^i` has bidegree `(⌊i/2⌋)[i]`.
    pub fn bidegree(&self) -> Bidegree {
        let p: i64 = self.exponents.iter().map(|&i| i as i64).sum();
        match self.flavor {
            WordFlavor::Classical => Bidegree::new(p, 0),
            _ => Bidegree::new(p, self.exponents.iter().map(|&i| (i / 2) as i64).sum()),
        }
    }

    pub fn concat(&self, other: &SqWord) -> Result<SqWord, AdemError> {
        if self.flavor != other.flavor {
            return Err(AdemError::MixedFlavor(self.flavor, other.flavor));
        }
        let mut exponents = self.exponents.clone();
        exponents.extend_from_slice(&other.exponents);
        Ok(SqWord {
            flavor: self.flavor,
            exponents,
        })
    }
}

impl fmt::Display for SqWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.exponents.iter().map(|i| format!("Sq{i}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A GF(2) sum of admissible words of one flavor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordElement {
    flavor: WordFlavor,
    terms: BTreeSet<Vec<u32>>,
}

impl WordElement {
    pub fn zero(flavor: WordFlavor) -> Self {
        WordElement {
            flavor,
            terms: BTreeSet::new(),
        }
    }

    pub fn flavor(&self) -> WordFlavor {
        self.flavor
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = SqWord> + '_ {
        self.terms.iter().map(|e| SqWord {
            flavor: self.flavor,
            exponents: e.clone(),
        })
    }

    fn toggle(&mut self, w: Vec<u32>) {
        if !self.terms.remove(&w) {
            self.terms.insert(w);
        }
    }

    pub fn add(&self, other: &WordElement) -> Result<WordElement, AdemError> {
        if self.flavor != other.flavor {
            return Err(AdemError::MixedFlavor(self.flavor, other.flavor));
        }
        Ok(WordElement {
            flavor: self.flavor,
            terms: self.terms.symmetric_difference(&other.terms).cloned().collect(),
        })
    }

    /// Product, reduced to admissible form.
    pub fn multiply(&self, other: &WordElement) -> Result<WordElement, AdemError> {
        if self.flavor != other.flavor {
            return Err(AdemError::MixedFlavor(self.flavor, other.flavor));
        }
        let mut out = WordElement::zero(self.flavor);
        for a in &self.terms {
            for b in &other.terms {
                let mut w = a.clone();
                w.extend_from_slice(b);
                let reduced = adem_reduce(&SqWord {
                    flavor: self.flavor,
                    exponents: w,
                })?;
                for t in reduced.terms {
                    out.toggle(t);
                }
            }
        }
        Ok(out)
    }
}

impl From<SqWord> for WordElement {
    fn from(w: SqWord) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(w.exponents);
        WordElement {
            flavor: w.flavor,
            terms,
        }
    }
}

impl fmt::Display for WordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms().map(|w| w.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `binom(n, k) mod 2` by Lucas' theorem; zero outside `0 ≤ k ≤ n`.
pub fn binom_mod2(n: i64, k: i64) -> bool {
    if n < 0 || k < 0 || k > n {
        return false;
    }
    (k & !n) == 0
}

/// Right-hand side of the relation for the inadmissible pair `Sq^a Sq^b`,
/// as pairs `(Sq^c, Sq^d)` with `d` possibly zero.
fn relation(flavor: WordFlavor, a: u32, b: u32) -> Vec<(u32, u32)> {
    let (a, b) = (a as i64, b as i64);
    let mut out = Vec::new();
    match flavor {
        WordFlavor::Classical => {
            for t in 0..=a / 2 {
                if binom_mod2(b - t - 1, a - 2 * t) {
                    out.push(((a + b - t) as u32, t as u32));
                }
            }
        }
        WordFlavor::GEven => {
            let (r, s) = (a / 2, b / 2);
            for t in 0..=r / 2 {
                if binom_mod2(2 * s - 2 * t - 1, 2 * r - 4 * t) {
                    out.push(((2 * r + 2 * s - 2 * t) as u32, (2 * t) as u32));
                }
            }
        }
        WordFlavor::A0 => unreachable!("no rewriting system for A0"),
    }
    out
}

/// Which inadmissible pair to rewrite first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RewriteOrder {
    Leftmost,
    Rightmost,
}

type ReduceCache = HashMap<(WordFlavor, RewriteOrder, Vec<u32>), BTreeSet<Vec<u32>>>;

fn reduce_cache() -> &'static Mutex<ReduceCache> {
    static CACHE: OnceLock<Mutex<ReduceCache>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn reduce_exponents(flavor: WordFlavor, order: RewriteOrder, w: &[u32]) -> BTreeSet<Vec<u32>> {
    let pairs = w.windows(2).enumerate().filter(|(_, p)| p[0] < 2 * p[1]).map(|(i, _)| i);
    let at = match order {
        RewriteOrder::Leftmost => pairs.min(),
        RewriteOrder::Rightmost => pairs.max(),
    };
    let Some(i) = at else {
        return std::iter::once(w.to_vec()).collect();
    };
    let key = (flavor, order, w.to_vec());
    if let Some(hit) = reduce_cache().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let mut out = BTreeSet::new();
    for (c, d) in relation(flavor, w[i], w[i + 1]) {
        let mut next = w[..i].to_vec();
        next.push(c);
        if d > 0 {
            next.push(d);
        }
        next.extend_from_slice(&w[i + 2..]);
        for t in reduce_exponents(flavor, order, &next) {
            if !out.remove(&t) {
                out.insert(t);
            }
        }
    }
    reduce_cache().lock().unwrap().insert(key, out.clone());
    out
}

/// Rewrite a word into a sum of admissible words (leftmost pair first).
pub fn adem_reduce(w: &SqWord) -> Result<WordElement, AdemError> {
    adem_reduce_with(w, RewriteOrder::Leftmost)
}

pub fn adem_reduce_with(w: &SqWord, order: RewriteOrder) -> Result<WordElement, AdemError> {
    if w.flavor == WordFlavor::A0 {
        return Err(AdemError::NoRewriting(WordFlavor::A0));
    }
    Ok(WordElement {
        flavor: w.flavor,
        terms: reduce_exponents(w.flavor, order, &w.exponents),
    })
}

/// The algebra map A → G, `Sq^r ↦ Sq^{2r}`.
pub fn double(x: &WordElement) -> Result<WordElement, AdemError> {
    if x.flavor != WordFlavor::Classical {
        return Err(AdemError::MixedFlavor(x.flavor, WordFlavor::Classical));
    }
    Ok(WordElement {
        flavor: WordFlavor::GEven,
        terms: x
            .terms
            .iter()
            .map(|w| w.iter().map(|i| 2 * i).collect())
            .collect(),
    })
}

pub fn double_word(w: &SqWord) -> Result<SqWord, AdemError> {
    if w.flavor != WordFlavor::Classical {
        return Err(AdemError::MixedFlavor(w.flavor, WordFlavor::Classical));
    }
    SqWord::new(WordFlavor::GEven, w.exponents.iter().map(|i| 2 * i).collect())
}

/// Both sides of `binom(2s-2t-1, 2r-4t) ≡ binom(s-t-1, r-2t) (mod 2)`.
pub fn verify_lucas(r: i64, s: i64, t: i64) -> (bool, bool) {
    (
        binom_mod2(2 * s - 2 * t - 1, 2 * r - 4 * t),
        binom_mod2(s - t - 1, r - 2 * t),
    )
}

/// `Sq^r` in the Milnor basis of A₀: `Sq^{2k} = P^{(k)}`, `Sq^{2k+1} = Q₀ P^{(k)}`.
pub fn sq_to_milnor(r: u32) -> Element {
    let e: &[usize] = if r % 2 == 1 { &[0] } else { &[] };
    MilnorMonomial::new(e, &[r / 2]).into()
}

/// Evaluate a word as a product in the Milnor basis. Classical words are
/// first carried into G by doubling.
pub fn word_to_milnor(w: &SqWord) -> Element {
    let scale = if w.flavor == WordFlavor::Classical { 2 } else { 1 };
    let mut acc = Element::one();
    for &i in &w.exponents {
        acc = milnor::multiply(&acc, &sq_to_milnor(scale * i));
        if acc.is_zero() {
            break;
        }
    }
    acc
}

pub fn word_element_to_milnor(x: &WordElement) -> Element {
    let mut out = Element::zero();
    for w in x.terms() {
        out += &word_to_milnor(&w);
    }
    out
}

/// `Q₀ = Sq¹`, `Q_{i+1} = Sq^{2^{i+1}} Q_i + Q_i Sq^{2^{i+1}}`, evaluated in A₀.
pub fn q_from_squares(i: usize) -> Element {
    let mut q = sq_to_milnor(1);
    for k in 0..i {
        let sq = sq_to_milnor(1 << (k + 1));
        q = &milnor::multiply(&sq, &q) + &milnor::multiply(&q, &sq);
    }
    q
}

/// Admissible words of topological degree exactly `p`.
pub fn admissible_words(flavor: WordFlavor, p: u32) -> Vec<SqWord> {
    let step = if flavor == WordFlavor::GEven { 2 } else { 1 };
    let mut out = Vec::new();
    // build words from the right: each new letter on the left must be ≥ twice the previous one
    fn rec(remaining: u32, min_first: u32, step: u32, suffix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            out.push(suffix.iter().rev().copied().collect());
            return;
        }
        let mut i = min_first.max(step);
        if !i.is_multiple_of(step) {
            i += step - i % step;
        }
        while i <= remaining {
            suffix.push(i);
            rec(remaining - i, 2 * i, step, suffix, out);
            suffix.pop();
            i += step;
        }
    }
    let mut raw = Vec::new();
    rec(p, 1, step, &mut Vec::new(), &mut raw);
    for e in raw {
        out.push(SqWord { flavor, exponents: e });
    }
    out.sort();
    out
}

/// All admissible words with topological degree at most `max_p`, grouped by bidegree.
pub fn admissible_basis(flavor: WordFlavor, max_p: u32) -> BTreeMap<Bidegree, Vec<SqWord>> {
    let mut out: BTreeMap<Bidegree, Vec<SqWord>> = BTreeMap::new();
    for p in 0..=max_p {
        for w in admissible_words(flavor, p) {
            out.entry(w.bidegree()).or_default().push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word(flavor: WordFlavor, e: &[u32]) -> SqWord {
        SqWord::new(flavor, e.to_vec()).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert!(adem_reduce(&word(WordFlavor::Classical, &[1, 1])).unwrap().is_zero());
        assert!(adem_reduce(&word(WordFlavor::GEven, &[2, 2])).unwrap().is_zero());
        assert_eq!(
            adem_reduce(&word(WordFlavor::Classical, &[2, 2])).unwrap(),
            word(WordFlavor::Classical, &[3, 1]).into()
        );
        assert_eq!(
            adem_reduce(&word(WordFlavor::Classical, &[1, 2])).unwrap(),
            word(WordFlavor::Classical, &[3]).into()
        );
        assert!(matches!(
            adem_reduce(&word(WordFlavor::A0, &[1, 1])),
            Err(AdemError::NoRewriting(_))
        ));
        assert!(SqWord::new(WordFlavor::GEven, vec![3]).is_err());
        let a = word(WordFlavor::Classical, &[1]);
        let b = word(WordFlavor::GEven, &[2]);
        assert!(a.concat(&b).is_err());
    }

    #[test]
    fn double_examples() {
        let sq1: WordElement = word(WordFlavor::Classical, &[1]).into();
        assert_eq!(double(&sq1).unwrap(), word(WordFlavor::GEven, &[2]).into());
        let x: WordElement = word(WordFlavor::Classical, &[3, 1]).into();
        assert_eq!(double(&x).unwrap(), word(WordFlavor::GEven, &[6, 2]).into());
        assert!(double(&WordElement::zero(WordFlavor::Classical)).unwrap().is_zero());
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(verify_lucas(1, 1, 0), (false, false));
        assert_eq!(verify_lucas(2, 2, 1), (true, true));
        assert_eq!(verify_lucas(3, 5, 1), (true, true));
    }

    #[test]
    fn sq_to_milnor_examples() {
        assert_eq!(sq_to_milnor(1), MilnorMonomial::q(0).into());
        assert_eq!(sq_to_milnor(2), MilnorMonomial::p(&[1]).into());
        assert_eq!(sq_to_milnor(0), Element::one());
    }

    #[test]
    fn word_to_milnor_examples() {
        assert!(word_to_milnor(&word(WordFlavor::A0, &[1, 1])).is_zero());
        assert_eq!(
            word_to_milnor(&word(WordFlavor::A0, &[2, 1])),
            milnor::multiply(&MilnorMonomial::p(&[1]).into(), &MilnorMonomial::q(0).into())
        );
        assert_eq!(word_to_milnor(&SqWord::empty(WordFlavor::A0)), Element::one());
    }

    #[test]
    fn q_from_squares_examples() {
        assert_eq!(q_from_squares(0), MilnorMonomial::q(0).into());
        let q1 = &word_to_milnor(&word(WordFlavor::A0, &[2, 1])) + &word_to_milnor(&word(WordFlavor::A0, &[1, 2]));
        assert_eq!(q1, MilnorMonomial::q(1).into());
        assert_eq!(q_from_squares(1), MilnorMonomial::q(1).into());
        assert_eq!(q_from_squares(2), MilnorMonomial::q(2).into());
    }

    #[test]
    fn admissible_examples() {
        let w3: Vec<String> = admissible_words(WordFlavor::Classical, 3).iter().map(|w| w.to_string()).collect();
        assert_eq!(w3, vec!["Sq2 Sq1", "Sq3"]);
        let g = admissible_basis(WordFlavor::GEven, 2);
        assert_eq!(g[&Bidegree::new(2, 1)], vec![word(WordFlavor::GEven, &[2])]);
        for f in [WordFlavor::Classical, WordFlavor::GEven, WordFlavor::A0] {
            assert_eq!(admissible_words(f, 0), vec![SqWord::empty(f)]);
        }
    }

    #[test]
    fn dimensions_match_milnor_basis() {
        for t in 0..=20u32 {
            let classical = admissible_words(WordFlavor::Classical, t).len();
            let even = admissible_words(WordFlavor::GEven, 2 * t).len();
            let p_monomials = milnor::monomials_in_bidegree(Bidegree::new(2 * t as i64, t as i64))
                .into_iter()
                .filter(|m| m.e_mask() == 0)
                .count();
            assert_eq!(classical, even, "t={t}");
            assert_eq!(classical, p_monomials, "t={t}");
        }
    }

    #[test]
    fn a0_admissible_counts_match_milnor_counts() {
        for (d, words) in admissible_basis(WordFlavor::A0, 16) {
            assert_eq!(words.len(), milnor::monomials_in_bidegree(d).len(), "{d}");
        }
    }

    #[test]
    fn doubling_is_multiplicative() {
        let words: Vec<SqWord> = (0..=20).flat_map(|t| admissible_words(WordFlavor::Classical, t)).collect();
        for u in &words {
            for v in &words {
                let du = u.bidegree().p + v.bidegree().p;
                if du > 20 {
                    continue;
                }
                let lhs = double(&adem_reduce(&u.concat(v).unwrap()).unwrap()).unwrap();
                let rhs = adem_reduce(&double_word(u).unwrap().concat(&double_word(v).unwrap()).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "{u} · {v}");
            }
        }
    }

    #[test]
    fn word_to_milnor_multiplicative() {
        let words: Vec<SqWord> = (0..=10).flat_map(|t| admissible_words(WordFlavor::A0, t)).collect();
        for u in &words {
            for v in &words {
                if u.bidegree().p + v.bidegree().p > 20 {
                    continue;
                }
                let lhs = word_to_milnor(&u.concat(v).unwrap());
                let rhs = milnor::multiply(&word_to_milnor(u), &word_to_milnor(v));
                assert_eq!(lhs, rhs, "{u} · {v}");
            }
        }
    }

    #[test]
    fn classical_reduction_agrees_with_milnor_evaluation() {
        for t in 2..=14u32 {
            for a in 1..t {
                let w = word(WordFlavor::Classical, &[a, t - a]);
                let reduced = adem_reduce(&w).unwrap();
                assert_eq!(word_element_to_milnor(&reduced), word_to_milnor(&w), "{w}");
            }
        }
    }

    proptest! {
        #[test]
        fn rewriting_is_confluent(letters in proptest::collection::vec(1u32..7, 1..5), even in any::<bool>()) {
            let (flavor, e) = if even {
                (WordFlavor::GEven, letters.iter().map(|x| 2 * x).collect::<Vec<_>>())
            } else {
                (WordFlavor::Classical, letters.clone())
            };
            let w = SqWord::new(flavor, e).unwrap();
            let left = adem_reduce_with(&w, RewriteOrder::Leftmost).unwrap();
            let right = adem_reduce_with(&w, RewriteOrder::Rightmost).unwrap();
            prop_assert!(left.terms().all(|t| t.is_admissible()));
            prop_assert_eq!(left, right);
        }
    }
}
