//! Bit-packed linear algebra over GF(2).
//!
//! Vectors are packed 64 coordinates per word, coordinate `i` in bit `i % 64`
//! of word `i / 64`. Unused high bits of the last word are always zero, so
//! whole-word operations (XOR, popcount, equality) never see garbage.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Which half of a half-rate generator matrix failed to be an information set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Left,
    Right,
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Half::Left => f.write_str("left"),
            Half::Right => f.write_str("right"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitLinalgError {
    #[error("matrix is {rows}x{cols}, expected exactly twice as many columns as rows")]
    NotHalfRate { rows: usize, cols: usize },
    #[error("{half} coordinate half is not an information set (rank {rank} < {needed})")]
    SingularInformationSet { half: Half, rank: usize, needed: usize },
    #[error("generator rows are dependent: {rows} rows but rank {rank}")]
    RankDeficient { rows: usize, rank: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// A vector over GF(2) of fixed length.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = u64::MAX;
        }
        v.mask_tail();
        v
    }

    /// Builds a vector with the given coordinates set.
    ///
    /// # Panics
    /// Panics if any index is out of range.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    /// Parses a string of `0`/`1` characters, coordinate 0 first.
    pub fn parse(bits: &str) -> Option<Self> {
        let chars: Vec<char> = bits.chars().filter(|c| !c.is_whitespace()).collect();
        let mut v = Self::zeros(chars.len());
        for (i, c) in chars.iter().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => return None,
            }
        }
        Some(v)
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
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "coordinate {i} out of range (len {})", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "coordinate {i} out of range (len {})", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "coordinate {i} out of range (len {})", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Hamming weight.
    #[inline]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Weight restricted to the coordinates in `range`.
    pub fn weight_in(&self, range: Range<usize>) -> usize {
        assert!(range.end <= self.len);
        if range.start >= range.end {
            return 0;
        }
        let (first, last) = (range.start / WORD, (range.end - 1) / WORD);
        let lo_mask = u64::MAX << (range.start % WORD);
        let hi_mask = u64::MAX >> (WORD - 1 - (range.end - 1) % WORD);
        if first == last {
            return (self.words[first] & lo_mask & hi_mask).count_ones() as usize;
        }
        let mut total = (self.words[first] & lo_mask).count_ones() as usize;
        for w in &self.words[first + 1..last] {
            total += w.count_ones() as usize;
        }
        total + (self.words[last] & hi_mask).count_ones() as usize
    }

    /// Scalar product over GF(2).
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * WORD + tz)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones_iter().next()
    }

    /// Concatenation `self || other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.ones_iter() {
            out.set(i, true);
        }
        for i in other.ones_iter() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Coordinates `range` as a new vector.
    pub fn slice(&self, range: Range<usize>) -> BitVector {
        let mut out = BitVector::zeros(range.len());
        for i in self.ones_iter().filter(|i| range.contains(i)) {
            out.set(i - range.start, true);
        }
        out
    }

    /// Moves coordinate `i` to `image[i]`.
    pub fn permuted(&self, image: &[usize]) -> BitVector {
        assert_eq!(image.len(), self.len);
        BitVector::from_indices(self.len, self.ones_iter().map(|i| image[i]))
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2), stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn empty(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVector::from_indices(n, [i])).collect(),
        }
    }

    /// # Panics
    /// Panics if rows have differing lengths.
    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length {} != cols {cols}", r.len());
        }
        Self { cols, rows }
    }

    /// Parses rows of `0`/`1` strings.
    pub fn parse(rows: &[&str]) -> Option<Self> {
        let rows: Vec<BitVector> = rows.iter().map(|r| BitVector::parse(r)).collect::<Option<_>>()?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(Self { cols, rows })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVector> {
        self.rows
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        BitMatrix { cols: self.cols, rows }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out: Vec<BitVector> = (0..self.cols).map(|_| BitVector::zeros(self.nrows())).collect();
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones_iter() {
                out[c].set(r, true);
            }
        }
        BitMatrix {
            cols: self.nrows(),
            rows: out,
        }
    }

    /// Applies a coordinate permutation to every row.
    pub fn permute_columns(&self, image: &[usize]) -> BitMatrix {
        BitMatrix {
            cols: self.cols,
            rows: self.rows.iter().map(|r| r.permuted(image)).collect(),
        }
    }

    /// The codeword `Σ message_i · row_i`.
    pub fn encode(&self, message: &BitVector) -> BitVector {
        assert_eq!(message.len(), self.nrows());
        let mut out = BitVector::zeros(self.cols);
        for i in message.ones_iter() {
            out.xor_assign(&self.rows[i]);
        }
        out
    }

    /// Encodes the low `nrows` bits of `message` (at most 64 rows).
    pub fn encode_u64(&self, message: u64) -> BitVector {
        assert!(self.nrows() <= 64);
        let mut out = BitVector::zeros(self.cols);
        let mut bits = message;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            out.xor_assign(&self.rows[i]);
            bits &= bits - 1;
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Reduced row-echelon form with leftmost pivot selection.
    ///
    /// Zero rows are dropped, so the result has exactly `rank` rows.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let pivots = reduce_in_place(&mut rows, 0..self.cols);
        rows.truncate(pivots.len());
        (BitMatrix { cols: self.cols, rows }, pivots)
    }

    /// Echelon basis supporting repeated membership queries.
    pub fn echelon(&self) -> Echelon {
        let (basis, pivots) = self.rref();
        Echelon { basis, pivots }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.echelon().contains(v)
    }

    /// True iff the two matrices generate the same row space.
    pub fn same_row_space(&self, other: &BitMatrix) -> bool {
        if self.cols != other.cols {
            return false;
        }
        let (a, _) = self.rref();
        let (b, _) = other.rref();
        a == b
    }

    /// Basis of `{u : u·M = 0}`, as vectors of length `nrows`.
    pub fn left_kernel(&self) -> BitMatrix {
        let r = self.nrows();
        let mut aug: Vec<BitVector> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.concat(&BitVector::from_indices(r, [i])))
            .collect();
        let rank = reduce_in_place(&mut aug, 0..self.cols).len();
        let kernel = aug[rank..].iter().map(|v| v.slice(self.cols..self.cols + r)).collect();
        BitMatrix { cols: r, rows: kernel }
    }

    /// Brings `self` to systematic form on `columns`: row `i` has a 1 in
    /// `columns[i]` and zeros in the other listed columns.
    ///
    /// Returns the number of columns successfully pivoted on failure.
    pub fn systematize_on(&self, columns: &[usize]) -> Result<BitMatrix, usize> {
        assert!(columns.len() <= self.nrows());
        let mut rows = self.rows.clone();
        for (i, &c) in columns.iter().enumerate() {
            let Some(p) = (i..rows.len()).find(|&r| rows[r].get(c)) else {
                return Err(i);
            };
            rows.swap(i, p);
            let pivot = rows[i].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != i && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
        }
        Ok(BitMatrix { cols: self.cols, rows })
    }

    fn ensure_full_rank(&self) -> Result<(), BitLinalgError> {
        let rank = self.rank();
        if rank < self.nrows() {
            return Err(BitLinalgError::RankDeficient {
                rows: self.nrows(),
                rank,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.nrows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// An RREF basis together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub basis: BitMatrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Residue of `v` after clearing every pivot coordinate.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut v = v.clone();
        for (row, &p) in self.basis.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.basis.ncols() && self.reduce(v).is_zero()
    }
}

/// Gauss-Jordan elimination with pivots restricted to `pivot_cols`.
/// Rows with a pivot are moved to the front; the rest are zero on `pivot_cols`.
fn reduce_in_place(rows: &mut [BitVector], pivot_cols: Range<usize>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for c in pivot_cols {
        if next == rows.len() {
            break;
        }
        let Some(p) = (next..rows.len()).find(|&r| rows[r].get(c)) else {
            continue;
        };
        rows.swap(next, p);
        let (head, tail) = rows.split_at_mut(next);
        let (pivot, tail) = tail.split_first_mut().expect("pivot row exists");
        for row in head.iter_mut().chain(tail.iter_mut()) {
            if row.get(c) {
                row.xor_assign(pivot);
            }
        }
        pivots.push(c);
        next += 1;
    }
    pivots
}

/// RREF of `m`; see [`BitMatrix::rref`].
pub fn rref(m: &BitMatrix) -> (BitMatrix, Vec<usize>) {
    m.rref()
}

/// Two generator matrices of the same half-rate code: `[I | A]`, systematic on
/// the left half, and `[B | I]`, systematic on the right half.
pub fn disjoint_information_systematizations(g: &BitMatrix) -> Result<(BitMatrix, BitMatrix), BitLinalgError> {
    let k = g.nrows();
    if g.ncols() != 2 * k {
        return Err(BitLinalgError::NotHalfRate {
            rows: k,
            cols: g.ncols(),
        });
    }
    let left: Vec<usize> = (0..k).collect();
    let right: Vec<usize> = (k..2 * k).collect();
    let g1 = g
        .systematize_on(&left)
        .map_err(|rank| BitLinalgError::SingularInformationSet {
            half: Half::Left,
            rank,
            needed: k,
        })?;
    let g2 = g1
        .systematize_on(&right)
        .map_err(|rank| BitLinalgError::SingularInformationSet {
            half: Half::Right,
            rank,
            needed: k,
        })?;
    Ok((g1, g2))
}

/// Parity-check basis: an `(n-k) x n` full-rank matrix orthogonal to `g`.
pub fn dual_basis(g: &BitMatrix) -> Result<BitMatrix, BitLinalgError> {
    g.ensure_full_rank()?;
    let n = g.ncols();
    let (r, pivots) = g.rref();
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let rows = (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut h = BitVector::from_indices(n, [f]);
            for (row, &p) in r.rows().iter().zip(&pivots) {
                if row.get(f) {
                    h.set(p, true);
                }
            }
            h
        })
        .collect();
    Ok(BitMatrix::from_rows(n, rows))
}

/// Basis (in RREF) of the intersection of two row spaces.
///
/// Uses the left kernel of `[A; B]`: every `(u, v)` with `uA = vB` contributes `uA`.
pub fn intersect_rowspaces(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    assert_eq!(a.ncols(), b.ncols(), "row spaces live in different ambient spaces");
    let ea = a.rref().0;
    let eb = b.rref().0;
    let stacked = ea.stack(&eb);
    let kernel = stacked.left_kernel();
    let ka = ea.nrows();
    let rows: Vec<BitVector> = kernel
        .rows()
        .iter()
        .map(|combo| {
            let mut v = BitVector::zeros(a.ncols());
            for i in combo.ones_iter().filter(|&i| i < ka) {
                v.xor_assign(ea.row(i));
            }
            v
        })
        .collect();
    BitMatrix::from_rows(a.ncols(), rows).rref().0
}

/// `dim(C ∩ C⊥)` for the code generated by `g`.
pub fn hull_dimension(g: &BitMatrix) -> Result<usize, BitLinalgError> {
    let dual = dual_basis(g)?;
    Ok(intersect_rowspaces(g, &dual).nrows())
}
