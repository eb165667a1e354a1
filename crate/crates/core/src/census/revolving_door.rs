//! Revolving-door ordering of `t`-subsets of `{0, …, s−1}`.
//!
//! The listing is defined recursively:
//!
//! ```text
//! L(s, t) = L(s−1, t),  (s−1) ∪ reverse(L(s−1, t−1))
//! ```
//!
//! with `L(s, 0) = [∅]` and `L(t, t) = [{0, …, t−1}]`. Consecutive subsets
//! differ by exchanging one element, and the position of a pattern
//! `a_t > … > a_1` satisfies
//! `rank(a_t … a_1) = C(a_t + 1, t) − 1 − rank(a_{t−1} … a_1)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombError {
    #[error("rank {rank} out of range for C({s},{t}) = {total}")]
    RankOutOfRange { rank: u64, s: usize, t: usize, total: u64 },
    #[error("C({s},{t}) does not fit in 64 bits")]
    RankOverflow { s: usize, t: usize },
    #[error("invalid pattern {elements:?} for universe {s}")]
    InvalidPattern { s: usize, elements: Vec<usize> },
}

/// `C(n, k)`, or `None` on overflow of `u64`.
pub fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact after the multiplication
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    u64::try_from(acc).ok()
}

fn binom(n: usize, k: usize) -> u64 {
    binomial(n, k).expect("binomial coefficient within the overflow-checked range")
}

/// A `t`-subset of `{0, …, s−1}`, elements ascending.
#[derive(Clone)]
pub struct CombPattern {
    s: usize,
    elements: Vec<usize>,
    /// Copy of the previous pattern, reused across steps.
    scratch: Vec<usize>,
}

impl PartialEq for CombPattern {
    fn eq(&self, other: &Self) -> bool {
        self.s == other.s && self.elements == other.elements
    }
}

impl Eq for CombPattern {}

impl std::hash::Hash for CombPattern {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.s.hash(state);
        self.elements.hash(state);
    }
}

impl CombPattern {
    pub fn new(s: usize, mut elements: Vec<usize>) -> Result<Self, CombError> {
        elements.sort_unstable();
        let valid = elements.windows(2).all(|w| w[0] < w[1]) && elements.last().is_none_or(|&e| e < s);
        if !valid {
            return Err(CombError::InvalidPattern { s, elements });
        }
        Ok(Self {
            s,
            scratch: elements.clone(),
            elements,
        })
    }

    /// The rank-0 pattern `{0, …, t−1}`.
    pub fn first(s: usize, t: usize) -> Self {
        assert!(t <= s);
        Self {
            s,
            elements: (0..t).collect(),
            scratch: (0..t).collect(),
        }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    /// Advances in place; returns the `(removed, added)` exchange, or `None`
    /// (leaving the pattern untouched) after the last pattern.
    pub fn advance(&mut self) -> Option<(usize, usize)> {
        self.scratch.copy_from_slice(&self.elements);
        if !forward(&mut self.elements, self.scratch.len(), self.s) {
            return None;
        }
        Some(exchange(&self.scratch, &self.elements))
    }
}

impl fmt::Debug for CombPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CombPattern({}; {:?})", self.s, self.elements)
    }
}

/// The element that left and the element that joined between two patterns
/// one revolving-door step apart.
fn exchange(before: &[usize], after: &[usize]) -> (usize, usize) {
    let removed = before.iter().copied().find(|x| after.binary_search(x).is_err());
    let added = after.iter().copied().find(|x| before.binary_search(x).is_err());
    match (removed, added) {
        (Some(r), Some(a)) => (r, a),
        _ => unreachable!("revolving-door step must exchange exactly one element"),
    }
}

/// Successor of `c[..len]` within `L(n, len)`. Leaves `c` untouched on failure.
fn forward(c: &mut [usize], len: usize, n: usize) -> bool {
    if len == 0 {
        return false;
    }
    let a = c[len - 1];
    // Within the block of top element `a`, the rest runs through reverse(L(a, len-1)).
    if backward(c, len - 1) {
        return true;
    }
    if a + 1 == n {
        return false;
    }
    // First pattern of the next block: (a+1) ∪ last(L(a+1, len-1)).
    c[len - 1] = a + 1;
    if len >= 2 {
        for (i, slot) in c.iter_mut().enumerate().take(len - 2) {
            *slot = i;
        }
        c[len - 2] = a;
    }
    true
}

/// Predecessor of `c[..len]` within `L(·, len)`. Leaves `c` untouched on failure.
fn backward(c: &mut [usize], len: usize) -> bool {
    if len == 0 {
        return false;
    }
    let a = c[len - 1];
    if forward(c, len - 1, a) {
        return true;
    }
    if a == len - 1 {
        return false;
    }
    // Last pattern of the previous block: last(L(a, len)) = (a-1) ∪ {0..len-2}.
    c[len - 1] = a - 1;
    for (i, slot) in c.iter_mut().enumerate().take(len - 1) {
        *slot = i;
    }
    true
}

/// Next pattern in revolving-door order, or `None` after the last.
pub fn rd_successor(c: &CombPattern) -> Option<CombPattern> {
    let mut next = c.clone();
    next.advance().map(|_| next)
}

/// Position of `c` in the revolving-door listing of `C(s, t)`.
pub fn rd_rank(c: &CombPattern) -> u64 {
    c.elements
        .iter()
        .enumerate()
        .fold(0, |inner, (i, &a)| binom(a + 1, i + 1) - 1 - inner)
}

/// Pattern at position `rank` in the listing of `C(s, t)`.
pub fn rd_unrank(rank: u64, s: usize, t: usize) -> Result<CombPattern, CombError> {
    let total = binomial(s, t).ok_or(CombError::RankOverflow { s, t })?;
    if rank >= total {
        return Err(CombError::RankOutOfRange { rank, s, t, total });
    }
    let mut elements = vec![0; t];
    let (mut r, mut bound) = (rank, s);
    for len in (1..=t).rev() {
        // a_len is the unique a with C(a, len) <= r <= C(a+1, len) - 1
        let a = (len - 1..bound)
            .rev()
            .find(|&a| binom(a, len) <= r)
            .expect("rank within range");
        elements[len - 1] = a;
        r = binom(a + 1, len) - 1 - r;
        bound = a;
    }
    Ok(CombPattern {
        s,
        scratch: elements.clone(),
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(s: usize, t: usize) -> Vec<CombPattern> {
        let mut out = vec![CombPattern::first(s, t)];
        while let Some(next) = rd_successor(out.last().unwrap()) {
            out.push(next);
        }
        out
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 3), Some(10));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(69, 11), Some(1_823_810_410_032));
        assert_eq!(binomial(69, 34).map(|_| ()), None);
        assert_eq!(binomial(64, 32), Some(1_832_624_140_942_590_534));
    }

    #[test]
    fn walk_5_3() {
        let w = walk(5, 3);
        assert_eq!(w.len(), 10);
        let distinct: std::collections::HashSet<_> = w.iter().collect();
        assert_eq!(distinct.len(), 10);
        for pair in w.windows(2) {
            let common = pair[0]
                .elements()
                .iter()
                .filter(|x| pair[1].elements().contains(x))
                .count();
            assert_eq!(common, 2);
        }
    }

    #[test]
    fn degenerate_sizes() {
        assert_eq!(walk(4, 4).len(), 1);
        assert_eq!(walk(4, 0).len(), 1);
        assert_eq!(walk(0, 0).len(), 1);
        assert!(walk(4, 0)[0].elements().is_empty());
    }

    #[test]
    fn rank_follows_walk() {
        for (r, c) in walk(8, 3).iter().enumerate() {
            assert_eq!(rd_rank(c), r as u64);
        }
    }

    #[test]
    fn single_element_rank() {
        for a in 0..10 {
            assert_eq!(rd_rank(&CombPattern::new(10, vec![a]).unwrap()), a as u64);
        }
    }

    #[test]
    fn fixed_top_fills_rank_interval() {
        let (s, t) = (10, 4);
        for top in t - 1..s {
            let mut ranks: Vec<u64> = walk(s, t)
                .iter()
                .filter(|c| *c.elements().last().unwrap() == top)
                .map(rd_rank)
                .collect();
            ranks.sort_unstable();
            let lo = binomial(top, t).unwrap();
            let hi = binomial(top + 1, t).unwrap() - 1;
            assert_eq!(ranks, (lo..=hi).collect::<Vec<_>>());
        }
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(rd_unrank(0, 7, 3).unwrap(), CombPattern::first(7, 3));
        assert_eq!(
            rd_unrank(792, 12, 5),
            Err(CombError::RankOutOfRange {
                rank: 792,
                s: 12,
                t: 5,
                total: 792
            })
        );
        for r in 0..792 {
            assert_eq!(rd_rank(&rd_unrank(r, 12, 5).unwrap()), r);
        }
    }

    #[test]
    fn advance_reports_exchange() {
        let mut c = CombPattern::new(6, vec![0, 1, 2]).unwrap();
        let before = c.clone();
        let (out, inn) = c.advance().unwrap();
        assert!(before.elements().contains(&out) && !c.elements().contains(&out));
        assert!(c.elements().contains(&inn) && !before.elements().contains(&inn));
    }

    #[test]
    fn rejects_invalid_patterns() {
        assert!(CombPattern::new(4, vec![1, 1]).is_err());
        assert!(CombPattern::new(4, vec![4]).is_err());
        assert_eq!(CombPattern::new(4, vec![3, 0]).unwrap().elements(), &[0, 3]);
    }
}
