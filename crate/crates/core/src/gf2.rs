//! Bit-packed vectors and matrices over the two-element field.
//!
//! Rows are packed into 64-bit words with the column index as the fast axis.
//! Elimination always picks the lowest available column as the next pivot,
//! so results are reproducible across runs.

use std::fmt;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A vector over GF(2). Bits beyond `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct F2Vector {
    words: Vec<u64>,
    len: usize,
}

impl F2Vector {
    pub fn zeros(len: usize) -> Self {
        F2Vector {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_u8s(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// The unit vector with a single one at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &F2Vector) {
        assert_eq!(self.len, other.len, "length mismatch in vector addition");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn dot(&self, other: &F2Vector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot product");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate() {
            if word != 0 {
                return Some(w * WORD_BITS + word.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let tz = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(w * WORD_BITS + tz)
                }
            })
        })
    }

    /// Concatenate `self` followed by `other`.
    pub fn concat(&self, other: &F2Vector) -> F2Vector {
        let mut out = F2Vector::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    pub fn slice(&self, start: usize, end: usize) -> F2Vector {
        assert!(start <= end && end <= self.len);
        let mut out = F2Vector::zeros(end - start);
        for i in self.iter_ones().filter(|&i| i >= start && i < end) {
            out.set(i - start, true);
        }
        out
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, "]")
    }
}

/// A rectangular matrix over GF(2), stored as packed rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct F2Matrix {
    rows: Vec<F2Vector>,
    columns: usize,
}

impl F2Matrix {
    pub fn zeros(rows: usize, columns: usize) -> Self {
        F2Matrix {
            rows: vec![F2Vector::zeros(columns); rows],
            columns,
        }
    }

    pub fn identity(n: usize) -> Self {
        F2Matrix {
            rows: (0..n).map(|i| F2Vector::unit(n, i)).collect(),
            columns: n,
        }
    }

    /// Build from rows; every row must have length `columns`.
    pub fn from_rows(rows: Vec<F2Vector>, columns: usize) -> Self {
        for r in &rows {
            assert_eq!(r.len(), columns, "ragged matrix rows");
        }
        F2Matrix { rows, columns }
    }

    /// Convenience constructor from 0/1 literals.
    pub fn from_u8_rows(rows: &[&[u8]]) -> Self {
        let columns = rows.first().map_or(0, |r| r.len());
        Self::from_rows(rows.iter().map(|r| F2Vector::from_u8s(r)).collect(), columns)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns
    }

    pub fn rows(&self) -> &[F2Vector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &F2Vector {
        &self.rows[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    pub fn push_row(&mut self, row: F2Vector) {
        assert_eq!(row.len(), self.columns, "row length mismatch");
        self.rows.push(row);
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut t = F2Matrix::zeros(self.columns, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter_ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &F2Vector) -> F2Vector {
        assert_eq!(v.len(), self.columns, "dimension mismatch in matrix-vector product");
        let mut out = F2Vector::zeros(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(r, true);
            }
        }
        out
    }

    /// `v · self` for a row vector `v`.
    pub fn vec_mul(&self, v: &F2Vector) -> F2Vector {
        assert_eq!(v.len(), self.rows.len(), "dimension mismatch in vector-matrix product");
        let mut out = F2Vector::zeros(self.columns);
        for r in v.iter_ones() {
            out.add_assign(&self.rows[r]);
        }
        out
    }

    pub fn mul(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.columns, other.rows.len(), "dimension mismatch in matrix product");
        F2Matrix {
            rows: self.rows.iter().map(|r| other.vec_mul(r)).collect(),
            columns: other.columns,
        }
    }

    fn eliminate_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.columns {
            if next == self.rows.len() {
                break;
            }
            let Some(found) = (next..self.rows.len()).find(|&r| self.rows[r].get(col)) else {
                continue;
            };
            self.rows.swap(next, found);
            let pivot_row = self.rows[next].clone();
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r != next && row.get(col) {
                    row.add_assign(&pivot_row);
                }
            }
            pivots.push(col);
            next += 1;
        }
        pivots
    }
}

/// Reduced row echelon form together with the pivot columns (strictly increasing).
pub fn rref(m: &F2Matrix) -> (F2Matrix, Vec<usize>) {
    let mut out = m.clone();
    let pivots = out.eliminate_in_place();
    (out, pivots)
}

pub fn rank(m: &F2Matrix) -> usize {
    rref(m).1.len()
}

/// A basis of `{v : m·v = 0}`, one vector per free column.
pub fn kernel_basis(m: &F2Matrix) -> Vec<F2Vector> {
    let (r, pivots) = rref(m);
    let n = m.column_count();
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::with_capacity(n - pivots.len());
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = F2Vector::unit(n, free);
        for (row, &p) in pivots.iter().enumerate() {
            if r.get(row, free) {
                v.set(p, true);
            }
        }
        basis.push(v);
    }
    basis
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("right-hand side has length {got}, matrix has {expected} rows")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub got: usize,
}

/// Some `x` with `m·x = b`, or `Ok(None)` when the system is inconsistent.
pub fn solve(m: &F2Matrix, b: &F2Vector) -> Result<Option<F2Vector>, DimensionMismatch> {
    if b.len() != m.row_count() {
        return Err(DimensionMismatch {
            expected: m.row_count(),
            got: b.len(),
        });
    }
    let n = m.column_count();
    let augmented = F2Matrix::from_rows(
        m.rows()
            .iter()
            .enumerate()
            .map(|(i, row)| row.concat(&F2Vector::from_bits(&[b.get(i)])))
            .collect(),
        n + 1,
    );
    let (r, pivots) = rref(&augmented);
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = F2Vector::zeros(n);
    for (row, &p) in pivots.iter().enumerate() {
        if r.get(row, n) {
            x.set(p, true);
        }
    }
    Ok(Some(x))
}

/// Incrementally maintained row space in echelon form, used wherever vectors
/// are added one at a time and reduced against what is already there.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<F2Vector>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        EchelonBasis {
            len,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the stored rows, returning the remainder.
    pub fn reduce(&self, v: &F2Vector) -> F2Vector {
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.add_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &F2Vector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns false if it was already there.
    pub fn insert(&mut self, v: &F2Vector) -> bool {
        assert_eq!(v.len(), self.len);
        let r = self.reduce(v);
        let Some(p) = r.first_one() else {
            return false;
        };
        for row in self.rows.iter_mut() {
            if row.get(p) {
                row.add_assign(&r);
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }
}

/// Row reduction of a fixed list of rows that remembers how each echelon row
/// was combined from the originals. Answers left-kernel and preimage
/// questions for the map `z ↦ z·D` whose matrix `D` has the given rows.
#[derive(Clone, Debug)]
pub struct RowReduction {
    rows: Vec<F2Vector>,
    combos: Vec<F2Vector>,
    pivots: Vec<usize>,
    kernel: Vec<F2Vector>,
    columns: usize,
}

impl RowReduction {
    pub fn new(rows: &[F2Vector], columns: usize) -> Self {
        let n = rows.len();
        let mut out = RowReduction {
            rows: Vec::new(),
            combos: Vec::new(),
            pivots: Vec::new(),
            kernel: Vec::new(),
            columns,
        };
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), columns, "ragged matrix rows");
            let mut r = row.clone();
            let mut c = F2Vector::unit(n, i);
            for ((er, ec), &p) in out.rows.iter().zip(&out.combos).zip(&out.pivots) {
                if r.get(p) {
                    r.add_assign(er);
                    c.add_assign(ec);
                }
            }
            match r.first_one() {
                None => out.kernel.push(c),
                Some(p) => {
                    for (er, ec) in out.rows.iter_mut().zip(out.combos.iter_mut()) {
                        if er.get(p) {
                            er.add_assign(&r);
                            ec.add_assign(&c);
                        }
                    }
                    out.rows.push(r);
                    out.combos.push(c);
                    out.pivots.push(p);
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Basis of `{z : z·D = 0}`.
    pub fn left_kernel(&self) -> &[F2Vector] {
        &self.kernel
    }

    /// Some `z` with `z·D = w`, if `w` lies in the row space.
    pub fn preimage(&self, w: &F2Vector) -> Option<F2Vector> {
        assert_eq!(w.len(), self.columns);
        let n = self.kernel.len() + self.rows.len();
        let mut r = w.clone();
        let mut z = F2Vector::zeros(n);
        for ((er, ec), &p) in self.rows.iter().zip(&self.combos).zip(&self.pivots) {
            if r.get(p) {
                r.add_assign(er);
                z.add_assign(ec);
            }
        }
        r.is_zero().then_some(z)
    }

    /// Remainder of `w` modulo the row space (zero iff `w` is in the span).
    pub fn reduce(&self, w: &F2Vector) -> F2Vector {
        let mut r = w.clone();
        for (er, &p) in self.rows.iter().zip(&self.pivots) {
            if r.get(p) {
                r.add_assign(er);
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[u8]]) -> F2Matrix {
        F2Matrix::from_u8_rows(rows)
    }

    #[test]
    fn rref_examples() {
        assert_eq!(rref(&m(&[&[1, 1], &[1, 1]])), (m(&[&[1, 1], &[0, 0]]), vec![0]));
        assert_eq!(rref(&m(&[&[0, 0]])), (m(&[&[0, 0]]), vec![]));
        assert_eq!(rref(&m(&[&[1, 0], &[1, 1]])), (m(&[&[1, 0], &[0, 1]]), vec![0, 1]));
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&F2Matrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(&F2Matrix::zeros(2, 3)).len(), 3);
        assert_eq!(kernel_basis(&m(&[&[1, 1]])), vec![F2Vector::from_u8s(&[1, 1])]);
    }

    #[test]
    fn solve_examples() {
        let b = F2Vector::from_u8s(&[1, 0, 1]);
        assert_eq!(solve(&F2Matrix::identity(3), &b).unwrap(), Some(b));
        let x = solve(&m(&[&[1, 1]]), &F2Vector::from_u8s(&[0])).unwrap().unwrap();
        assert!(x == F2Vector::from_u8s(&[0, 0]) || x == F2Vector::from_u8s(&[1, 1]));
        assert_eq!(solve(&m(&[&[0]]), &F2Vector::from_u8s(&[1])).unwrap(), None);
        assert!(solve(&m(&[&[1]]), &F2Vector::zeros(2)).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&F2Matrix::identity(5)), 5);
        assert_eq!(rank(&F2Matrix::zeros(3, 4)), 0);
        assert_eq!(rank(&m(&[&[1, 1], &[1, 1]])), 1);
    }

    #[test]
    fn wide_vectors_cross_word_boundaries() {
        let mut v = F2Vector::zeros(130);
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.slice(60, 130).iter_ones().collect::<Vec<_>>(), vec![4, 69]);
    }

    #[test]
    fn echelon_basis_tracks_span() {
        let mut e = EchelonBasis::new(3);
        assert!(e.insert(&F2Vector::from_u8s(&[1, 1, 0])));
        assert!(e.insert(&F2Vector::from_u8s(&[0, 1, 1])));
        assert!(!e.insert(&F2Vector::from_u8s(&[1, 0, 1])));
        assert!(e.contains(&F2Vector::from_u8s(&[1, 0, 1])));
        assert_eq!(e.dimension(), 2);
    }

    fn arb_matrix() -> impl Strategy<Value = F2Matrix> {
        (0usize..9, 0usize..80).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r)
                .prop_map(move |rows| {
                    F2Matrix::from_rows(rows.iter().map(|b| F2Vector::from_bits(b)).collect(), c)
                })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity_and_kernel(mat in arb_matrix()) {
            let (r, pivots) = rref(&mat);
            prop_assert!(pivots.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(rank(&mat), pivots.len());
            let ker = kernel_basis(&mat);
            prop_assert_eq!(rank(&mat) + ker.len(), mat.column_count());
            for v in &ker {
                prop_assert!(mat.mul_vec(v).is_zero());
            }
            if !ker.is_empty() {
                let k = F2Matrix::from_rows(ker.clone(), mat.column_count());
                prop_assert_eq!(rank(&k), ker.len());
            }
            prop_assert_eq!(rref(&r).0, r.clone());
            // row space preserved: stacking the rref under the original adds nothing
            let mut stacked = mat.clone();
            for row in r.rows() { stacked.push_row(row.clone()); }
            prop_assert_eq!(rank(&stacked), rank(&mat));
        }

        #[test]
        fn solve_agrees_with_augmented_rank(mat in arb_matrix(), seed in any::<u64>()) {
            let bits: Vec<bool> = (0..mat.row_count()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let b = F2Vector::from_bits(&bits);
            let x = solve(&mat, &b).unwrap();
            let mut aug_rows = Vec::new();
            for (i, row) in mat.rows().iter().enumerate() {
                aug_rows.push(row.concat(&F2Vector::from_bits(&[b.get(i)])));
            }
            let aug = F2Matrix::from_rows(aug_rows, mat.column_count() + 1);
            match x {
                Some(x) => prop_assert_eq!(mat.mul_vec(&x), b),
                None => prop_assert!(rank(&aug) > rank(&mat)),
            }
        }
    }

    proptest! {
        #[test]
        fn row_reduction_kernel_and_preimage(
            rows in proptest::collection::vec(proptest::collection::vec(0u8..2, 5), 0..7),
            z in proptest::collection::vec(0u8..2, 7),
        ) {
            let vecs: Vec<F2Vector> = rows.iter().map(|r| F2Vector::from_u8s(r)).collect();
            let red = RowReduction::new(&vecs, 5);
            let d = F2Matrix::from_rows(vecs.clone(), 5);
            prop_assert_eq!(red.rank(), rank(&d));
            prop_assert_eq!(red.rank() + red.left_kernel().len(), vecs.len());
            for k in red.left_kernel() {
                prop_assert!(d.vec_mul(k).is_zero());
            }
            let z = F2Vector::from_u8s(&z[..vecs.len()]);
            let w = d.vec_mul(&z);
            let pre = red.preimage(&w).unwrap();
            prop_assert_eq!(d.vec_mul(&pre), w);
        }
    }
}
