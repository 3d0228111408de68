//! Dense linear algebra over GF(2): packed bit vectors and matrices, rank,
//! symmetric (Gram) factorization and exact minrank search over diagonal
//! completions.

use thiserror::Error;

/// Errors from GF(2) operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("exact minrank limited to n <= {limit}, got n = {n}")]
    MinrankTooLarge { n: usize, limit: usize },
}

/// A dense bit vector, packed 64 bits per word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Dot product mod 2.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2), row-major with packed words.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        Self { rows, cols, words_per_row, bits: vec![0; rows * words_per_row] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 entries. Rows must be equal length.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b != 0);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.bits[r * self.words_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let w = r * self.words_per_row + c / 64;
        if value {
            self.bits[w] |= 1 << (c % 64);
        } else {
            self.bits[w] &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        let w = r * self.words_per_row + c / 64;
        self.bits[w] ^= 1 << (c % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn row(&self, r: usize) -> BitVec {
        let mut v = BitVec::zeros(self.cols);
        let base = r * self.words_per_row;
        v.words.copy_from_slice(&self.bits[base..base + self.words_per_row]);
        // mask tail bits beyond cols
        let tail = self.cols % 64;
        if tail != 0 {
            if let Some(last) = v.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        v
    }

    pub fn col(&self, c: usize) -> BitVec {
        let mut v = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn set_row(&mut self, r: usize, v: &BitVec) {
        assert_eq!(v.len, self.cols);
        let base = r * self.words_per_row;
        self.bits[base..base + self.words_per_row].copy_from_slice(&v.words);
    }

    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert!(src < self.rows && dst < self.rows);
        let (s, d) = (src * self.words_per_row, dst * self.words_per_row);
        for k in 0..self.words_per_row {
            let w = self.bits[s + k];
            self.bits[d + k] ^= w;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (a, b) = (a * self.words_per_row, b * self.words_per_row);
        for k in 0..self.words_per_row {
            self.bits.swap(a + k, b + k);
        }
    }

    /// XOR `v` (viewed as a column) outer-product `v vᵀ` into the matrix:
    /// for every i with v[i] = 1, row i gains v.
    pub fn xor_outer_product(&mut self, v: &BitVec) {
        assert_eq!(self.rows, self.cols);
        assert_eq!(v.len, self.rows);
        for i in v.ones().collect::<Vec<_>>() {
            let base = i * self.words_per_row;
            for (k, w) in v.words.iter().enumerate() {
                self.bits[base + k] ^= w;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let (s, d) = (k * other.words_per_row, r * out.words_per_row);
                    for w in 0..other.words_per_row {
                        out.bits[d + w] ^= other.bits[s + w];
                    }
                }
            }
        }
        out
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
    }

    /// GF(2) row rank by Gaussian elimination on a working copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(pivot) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, pivot);
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    m.xor_row_into(rank, r);
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    /// Inverse of a square invertible matrix; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let pivot = (c..n).find(|&r| m.get(r, c))?;
            m.swap_rows(c, pivot);
            inv.swap_rows(c, pivot);
            for r in 0..n {
                if r != c && m.get(r, c) {
                    m.xor_row_into(c, r);
                    inv.xor_row_into(c, r);
                }
            }
        }
        Some(inv)
    }

    /// Diagonal as a bit vector (square matrices).
    pub fn diagonal(&self) -> BitVec {
        assert_eq!(self.rows, self.cols);
        let mut d = BitVec::zeros(self.rows);
        for i in 0..self.rows {
            d.set(i, self.get(i, i));
        }
        d
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Result of [`minrank2_exact`] / [`minrank2_greedy`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minrank {
    /// Minimum rank over the searched diagonal completions.
    pub value: usize,
    /// A diagonal completion achieving `value`.
    pub witness: BitVec,
    /// True when the whole diagonal space was searched.
    pub exact: bool,
}

/// Default exhaustive-search limit for [`minrank2_exact`].
pub const MINRANK_EXACT_LIMIT: usize = 20;

/// Minimum GF(2) rank of `D ⊕ S` over all diagonal matrices `D`, by
/// exhaustive search over all 2^n diagonals.
///
/// Ties are broken toward the lexicographically smallest witness vector
/// (compared entry by entry from index 0). Rejects n above `limit`.
pub fn minrank2_exact(s: &BitMatrix, limit: usize) -> Result<Minrank, Gf2Error> {
    if !s.is_symmetric() {
        return Err(Gf2Error::NotSymmetric);
    }
    let n = s.rows();
    if n > limit {
        return Err(Gf2Error::MinrankTooLarge { n, limit });
    }
    let mut best_value = usize::MAX;
    let mut best_witness = BitVec::zeros(n);
    // Iterate diagonals in lexicographic order of the witness vector
    // (bit i of the vector = bit n-1-i of the counter), so the first
    // minimum found is the lexicographically smallest witness.
    for mask in 0u64..(1u64 << n) {
        let mut m = s.clone();
        let mut d = BitVec::zeros(n);
        for i in 0..n {
            if (mask >> (n - 1 - i)) & 1 == 1 {
                d.set(i, true);
                m.flip(i, i);
            }
        }
        let r = m.rank();
        if r < best_value {
            best_value = r;
            best_witness = d;
            if r == 0 {
                break;
            }
        }
    }
    Ok(Minrank { value: best_value, witness: best_witness, exact: true })
}

/// Greedy upper bound on minrank: repeatedly flips the first diagonal entry
/// that lowers the rank, until no single flip improves.
pub fn minrank2_greedy(s: &BitMatrix) -> Result<Minrank, Gf2Error> {
    if !s.is_symmetric() {
        return Err(Gf2Error::NotSymmetric);
    }
    let n = s.rows();
    let mut m = s.clone();
    let mut witness = BitVec::zeros(n);
    let mut value = m.rank();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n {
            m.flip(i, i);
            let r = m.rank();
            if r < value {
                value = r;
                witness.flip(i);
                improved = true;
            } else {
                m.flip(i, i);
            }
        }
    }
    Ok(Minrank { value, witness, exact: false })
}

/// Factors a symmetric matrix `S` as `F Fᵀ` with `F` of width
/// `rank(S)` when `S` has a nonzero diagonal, and `rank(S) + 1` when the
/// diagonal is all zero (and `S ≠ 0`). Columns of `F` are returned as bit
/// vectors.
///
/// The factorization peels rank-one terms `f fᵀ` with `f` drawn from the
/// row space. A peel drops the rank exactly when `f = S x` with
/// `x · diag(S) = 1`; among those we avoid `f = diag(S)` while the rank is
/// at least 2, which keeps the residual non-alternating and the width
/// minimal. An all-zero diagonal is handled once, up front, by peeling an
/// arbitrary nonzero row (rank is preserved and the residual diagonal
/// becomes that row).
pub fn lempel_factor(s: &BitMatrix) -> Result<Vec<BitVec>, Gf2Error> {
    if !s.is_symmetric() {
        return Err(Gf2Error::NotSymmetric);
    }
    let n = s.rows();
    let mut m = s.clone();
    let mut cols: Vec<BitVec> = Vec::new();
    while !m.is_zero() {
        let d = m.diagonal();
        let f = if d.is_zero() {
            // Alternating case: peel a nonzero row. Rank cannot drop
            // (no x has x·d = 1), and the new diagonal equals the row.
            (0..n).map(|i| m.row(i)).find(|r| !r.is_zero()).expect("nonzero matrix has a nonzero row")
        } else {
            // Prefer f = row i with d[i] = 1 and row ≠ d.
            let mut pick: Option<BitVec> = None;
            let mut first_diag_row: Option<usize> = None;
            for i in d.ones() {
                let r = m.row(i);
                if first_diag_row.is_none() {
                    first_diag_row = Some(i);
                }
                if r != d {
                    pick = Some(r);
                    break;
                }
            }
            if pick.is_none() {
                // All diagonal-marked rows equal d; try f = row i ⊕ row j
                // with d[j] = 0 and row j ≠ 0 (x = e_i + e_j keeps x·d = 1).
                let i0 = first_diag_row.expect("nonzero diagonal");
                for j in 0..n {
                    if !d.get(j) {
                        let rj = m.row(j);
                        if !rj.is_zero() {
                            let mut f = m.row(i0);
                            f.xor_assign(&rj);
                            pick = Some(f);
                            break;
                        }
                    }
                }
            }
            // Rank 1 left: f = d is the only remaining peel and it zeroes S.
            pick.unwrap_or(d)
        };
        m.xor_outer_product(&f);
        cols.push(f);
    }
    Ok(cols)
}

/// Reconstructs `F Fᵀ` from factor columns (test/oracle helper).
pub fn gram_product(cols: &[BitVec], n: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(n, n);
    for f in cols {
        m.xor_outer_product(f);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain Vec<Vec<bool>> elimination, independent of BitMatrix internals.
    fn naive_rank(rows: Vec<Vec<bool>>) -> usize {
        let mut rows = rows;
        let cols = rows.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) {
                rows.swap(rank, p);
                let pivot = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row[c] {
                        for (a, b) in row.iter_mut().zip(&pivot) {
                            *a ^= b;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    fn c4() -> BitMatrix {
        // 4-cycle 0-1-2-3-0
        BitMatrix::from_rows(&[
            vec![0, 1, 0, 1],
            vec![1, 0, 1, 0],
            vec![0, 1, 0, 1],
            vec![1, 0, 1, 0],
        ])
    }

    #[test]
    fn rank_identity() {
        assert_eq!(BitMatrix::identity(4).rank(), 4);
    }

    #[test]
    fn rank_equal_rows() {
        let m = BitMatrix::from_rows(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn rank_c4_matches_naive_oracle() {
        let m = c4();
        let naive = naive_rank(
            (0..4).map(|r| (0..4).map(|c| m.get(r, c)).collect()).collect(),
        );
        assert_eq!(naive, 2);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn lempel_all_ones() {
        let s = BitMatrix::from_rows(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]);
        let f = lempel_factor(&s).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0], BitVec::from_indices(3, &[0, 1, 2]));
    }

    #[test]
    fn lempel_zero_matrix() {
        let f = lempel_factor(&BitMatrix::zeros(3, 3)).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn lempel_c4_width_three() {
        let s = c4();
        let f = lempel_factor(&s).unwrap();
        assert_eq!(f.len(), 3); // rank 2, zero diagonal
        assert_eq!(gram_product(&f, 4), s);
    }

    #[test]
    fn lempel_rejects_asymmetric() {
        let m = BitMatrix::from_rows(&[vec![0, 1], vec![0, 0]]);
        assert_eq!(lempel_factor(&m), Err(Gf2Error::NotSymmetric));
    }

    #[test]
    fn lempel_block_diag_width_equals_rank() {
        // diag(1) ⊕ C4: rank 3, nonzero diagonal => width must be 3.
        let mut s = BitMatrix::zeros(5, 5);
        s.set(0, 0, true);
        for (i, j) in [(1, 2), (2, 3), (3, 4), (4, 1)] {
            s.set(i, j, true);
            s.set(j, i, true);
        }
        assert_eq!(s.rank(), 3);
        let f = lempel_factor(&s).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(gram_product(&f, 5), s);
    }

    #[test]
    fn minrank_edgeless() {
        let r = minrank2_exact(&BitMatrix::zeros(4, 4), MINRANK_EXACT_LIMIT).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.witness.is_zero());
    }

    #[test]
    fn minrank_k3_is_one_with_identity_witness() {
        let k3 = BitMatrix::from_rows(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        let r = minrank2_exact(&k3, MINRANK_EXACT_LIMIT).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.witness, BitVec::from_indices(3, &[0, 1, 2]));
    }

    #[test]
    fn minrank_c4_matches_bruteforce() {
        let s = c4();
        // Independent brute force over all 16 diagonals.
        let mut best = usize::MAX;
        for mask in 0u32..16 {
            let mut m = s.clone();
            for i in 0..4 {
                if (mask >> i) & 1 == 1 {
                    m.flip(i, i);
                }
            }
            best = best.min(m.rank());
        }
        let r = minrank2_exact(&s, MINRANK_EXACT_LIMIT).unwrap();
        assert_eq!(r.value, best);
        assert_eq!(r.value, 2);
    }

    #[test]
    fn minrank_rejects_above_limit() {
        let m = BitMatrix::zeros(21, 21);
        assert!(matches!(
            minrank2_exact(&m, MINRANK_EXACT_LIMIT),
            Err(Gf2Error::MinrankTooLarge { n: 21, limit: 20 })
        ));
    }

    #[test]
    fn greedy_minrank_is_upper_bound() {
        let s = c4();
        let g = minrank2_greedy(&s).unwrap();
        let e = minrank2_exact(&s, MINRANK_EXACT_LIMIT).unwrap();
        assert!(g.value >= e.value);
        assert!(!g.exact);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = BitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), BitMatrix::identity(3));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sym_matrix(n: usize) -> impl Strategy<Value = BitMatrix> {
            proptest::collection::vec(any::<bool>(), n * (n + 1) / 2).prop_map(move |bits| {
                let mut m = BitMatrix::zeros(n, n);
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        if bits[k] {
                            m.set(i, j, true);
                            m.set(j, i, true);
                        }
                        k += 1;
                    }
                }
                m
            })
        }

        proptest! {
            #[test]
            fn lempel_reconstructs_and_width_bounded(m in (1usize..=10).prop_flat_map(sym_matrix)) {
                let n = m.rows();
                let f = lempel_factor(&m).unwrap();
                prop_assert_eq!(gram_product(&f, n), m.clone());
                prop_assert!(f.len() <= m.rank() + 1);
            }

            #[test]
            fn minrank_at_most_rank(m in (1usize..=8).prop_flat_map(sym_matrix)) {
                // zero out the diagonal so it is a graph adjacency
                let mut g = m;
                for i in 0..g.rows() {
                    g.set(i, i, false);
                }
                let r = minrank2_exact(&g, MINRANK_EXACT_LIMIT).unwrap();
                prop_assert!(r.value <= g.rank());
            }

            #[test]
            fn rank_invariant_under_row_ops(m in (1usize..=8).prop_flat_map(sym_matrix), a in 0usize..8, b in 0usize..8) {
                let n = m.rows();
                let (a, b) = (a % n, b % n);
                let r0 = m.rank();
                let mut p = m.clone();
                p.swap_rows(a, b);
                prop_assert_eq!(p.rank(), r0);
                if a != b {
                    let mut q = m.clone();
                    q.xor_row_into(a, b);
                    prop_assert_eq!(q.rank(), r0);
                }
            }
        }
    }
}
