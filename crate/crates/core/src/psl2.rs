//! PSL₂(p) as Möbius maps acting on the projective line `{∞, 0, …, p−1}`.
//!
//! Points are stored as column indices: `y ∈ F_p` is index `y`, `∞` is index `p`,
//! matching the column layout of the extended QR code.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Psl2Error {
    #[error("determinant of [[{a},{b}],[{c},{d}]] is {det} mod {p}, expected 1")]
    BadDeterminant {
        p: u64,
        a: u64,
        b: u64,
        c: u64,
        d: u64,
        det: u64,
    },
    #[error("{rho} is not a primitive root mod {p} (order {order})")]
    NotPrimitiveRoot { p: u64, rho: u64, order: u64 },
    #[error("no element of order {order} found in PSL2({p})")]
    SearchExhausted { p: u64, order: u64 },
    #[error("PSL2 plan needs a prime p ≡ ±1 (mod 8), got {p}")]
    UnsupportedPrime { p: u64 },
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

pub fn mod_inv(a: u64, p: u64) -> u64 {
    assert!(!a.is_multiple_of(p), "0 has no inverse");
    mod_pow(a, p - 2, p)
}

/// Multiplicative order of `a` modulo the prime `p`.
pub fn multiplicative_order(a: u64, p: u64) -> u64 {
    let mut x = a % p;
    let mut k = 1;
    while x != 1 {
        x = x * (a % p) % p;
        k += 1;
        if k > p {
            return 0;
        }
    }
    k
}

pub fn smallest_primitive_root(p: u64) -> u64 {
    (2..p).find(|&g| multiplicative_order(g, p) == p - 1).unwrap_or(1)
}

/// Smallest `b` with `b² ≡ −1 (mod p)`, if any.
pub fn sqrt_minus_one(p: u64) -> Option<u64> {
    (1..p).find(|&b| b * b % p == p - 1)
}

/// An element of PSL₂(p), `y ↦ (ay + b)/(cy + d)` with `ad − bc = 1`.
///
/// The stored representative is the lexicographically smaller of `±(a,b,c,d)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MoebiusMap {
    p: u64,
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

impl MoebiusMap {
    /// Entries may be given as signed integers; they are reduced mod `p`.
    pub fn new(p: u64, a: i64, b: i64, c: i64, d: i64) -> Result<Self, Psl2Error> {
        let r = |x: i64| x.rem_euclid(p as i64) as u64;
        let (a, b, c, d) = (r(a), r(b), r(c), r(d));
        let det = (a * d % p + p - b * c % p) % p;
        if det != 1 {
            return Err(Psl2Error::BadDeterminant { p, a, b, c, d, det });
        }
        Ok(Self::canonical(p, a, b, c, d))
    }

    fn canonical(p: u64, a: u64, b: u64, c: u64, d: u64) -> Self {
        let neg = |x: u64| (p - x) % p;
        let pos = (a, b, c, d);
        let minus = (neg(a), neg(b), neg(c), neg(d));
        let (a, b, c, d) = pos.min(minus);
        Self { p, a, b, c, d }
    }

    pub fn identity(p: u64) -> Self {
        Self::canonical(p, 1, 0, 0, 1)
    }

    /// `S : y ↦ y + 1`.
    pub fn translation(p: u64) -> Self {
        Self::canonical(p, 1, 1, 0, 1)
    }

    /// `T : y ↦ −1/y`.
    pub fn inversion(p: u64) -> Self {
        Self::canonical(p, 0, p - 1, 1, 0)
    }

    /// `V : y ↦ ρ² y`.
    pub fn scaling(p: u64, rho: u64) -> Self {
        Self::canonical(p, rho % p, 0, 0, mod_inv(rho, p))
    }

    /// Companion form `[[0, 1], [−1, t]]`.
    pub fn companion(p: u64, t: u64) -> Self {
        Self::canonical(p, 0, 1, p - 1, t % p)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn trace(&self) -> u64 {
        (self.a + self.d) % self.p
    }

    /// Matrix product `self · other`; acts as "apply `other`, then `self`".
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        assert_eq!(self.p, other.p);
        let p = self.p;
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let (e, f, g, h) = (other.a, other.b, other.c, other.d);
        Self::canonical(
            p,
            (a * e + b * g) % p,
            (a * f + b * h) % p,
            (c * e + d * g) % p,
            (c * f + d * h) % p,
        )
    }

    pub fn inverse(&self) -> MoebiusMap {
        let p = self.p;
        Self::canonical(p, self.d, (p - self.b) % p, (p - self.c) % p, self.a)
    }

    pub fn pow(&self, mut e: u64) -> MoebiusMap {
        let mut acc = Self::identity(self.p);
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.p)
    }

    /// Order in PSL₂(p).
    pub fn order(&self) -> u64 {
        self.to_permutation().order()
    }

    /// Image of a point index (`p` stands for `∞`).
    pub fn apply(&self, y: usize) -> usize {
        let p = self.p;
        let inf = p as usize;
        if y == inf {
            return if self.c == 0 {
                inf
            } else {
                (self.a * mod_inv(self.c, p) % p) as usize
            };
        }
        let y = y as u64;
        let num = (self.a * y + self.b) % p;
        let den = (self.c * y + self.d) % p;
        if den == 0 {
            inf
        } else {
            (num * mod_inv(den, p) % p) as usize
        }
    }

    pub fn to_permutation(&self) -> CoordPermutation {
        let inv_table: Vec<u64> = (0..self.p)
            .map(|x| if x == 0 { 0 } else { mod_inv(x, self.p) })
            .collect();
        let p = self.p;
        let inf = p as usize;
        let mut image = Vec::with_capacity(inf + 1);
        for y in 0..p {
            let num = (self.a * y + self.b) % p;
            let den = (self.c * y + self.d) % p;
            image.push(if den == 0 {
                inf
            } else {
                (num * inv_table[den as usize] % p) as usize
            });
        }
        image.push(if self.c == 0 {
            inf
        } else {
            (self.a * inv_table[self.c as usize] % p) as usize
        });
        CoordPermutation { p, image }
    }
}

impl fmt::Debug for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// A permutation of the `p + 1` coordinate indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CoordPermutation {
    p: u64,
    image: Vec<usize>,
}

impl CoordPermutation {
    pub fn identity(p: u64) -> Self {
        Self {
            p,
            image: (0..=p as usize).collect(),
        }
    }

    /// # Panics
    /// Panics unless `image` is a bijection on `0..=p`.
    pub fn from_image(p: u64, image: Vec<usize>) -> Self {
        assert_eq!(image.len(), p as usize + 1);
        let mut seen = vec![false; image.len()];
        for &i in &image {
            assert!(i < seen.len() && !seen[i], "not a bijection");
            seen[i] = true;
        }
        Self { p, image }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &CoordPermutation) -> CoordPermutation {
        assert_eq!(self.image.len(), other.image.len());
        CoordPermutation {
            p: self.p,
            image: other.image.iter().map(|&j| self.image[j]).collect(),
        }
    }

    pub fn inverse(&self) -> CoordPermutation {
        let mut inv = vec![0; self.image.len()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        CoordPermutation { p: self.p, image: inv }
    }

    /// Disjoint cycles, each listed from its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.image.len()];
        let mut out = Vec::new();
        for start in 0..self.image.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = self.image[start];
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.image[cur];
            }
            out.push(cycle);
        }
        out
    }

    pub fn order(&self) -> u64 {
        self.cycles().iter().map(|c| c.len() as u64).fold(1, num_integer::lcm)
    }
}

/// `|PSL₂(p)| = p(p² − 1)/2` and its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupOrder {
    pub order: u64,
    pub factorization: Vec<(u64, u32)>,
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        let mut e = 0;
        while n.is_multiple_of(q) {
            n /= q;
            e += 1;
        }
        if e > 0 {
            out.push((q, e));
        }
        q += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn group_order(p: u64) -> GroupOrder {
    let order = p * (p * p - 1) / 2;
    GroupOrder {
        order,
        factorization: factorize(order),
    }
}

/// The subgroup data the orbit-counting congruences need.
#[derive(Debug, Clone)]
pub struct SylowPlan {
    pub p: u64,
    pub group_order: u64,
    pub factorization: Vec<(u64, u32)>,
    /// Exponent of 2 in the group order; the Sylow-2 subgroup is dihedral of order `2^s`.
    pub s: u32,
    /// An element of order `q` for each odd prime `q ≠ p` dividing the group order.
    pub odd_generators: BTreeMap<u64, MoebiusMap>,
    /// Generator of the Sylow-`p` subgroup, `y ↦ y + 1`.
    pub translation: MoebiusMap,
    /// Element of order `2^{s−1}`.
    pub rotation: MoebiusMap,
    /// Involution with `T P T⁻¹ = P⁻¹`, not a power of `P`.
    pub reflection: MoebiusMap,
}

impl SylowPlan {
    fn half_turn(&self) -> MoebiusMap {
        self.rotation.pow(1 << (self.s - 2))
    }

    /// `H₂ = {1, P^{2^{s−2}}}`.
    pub fn h2(&self) -> Vec<MoebiusMap> {
        vec![MoebiusMap::identity(self.p), self.half_turn()]
    }

    /// `G^i_4 = {1, P^{2^{s−2}}, P^i T, P^{2^{s−2}+i} T}` for `i ∈ {0, 1}`.
    pub fn g4(&self, i: u64) -> Vec<MoebiusMap> {
        let h = self.half_turn();
        let pit = self.rotation.pow(i).compose(&self.reflection);
        vec![MoebiusMap::identity(self.p), h, pit, h.compose(&pit)]
    }

    /// Odd prime-power parts of the group order other than `p`.
    pub fn odd_parts(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.factorization
            .iter()
            .copied()
            .filter(move |&(q, _)| q != 2 && q != self.p)
    }
}

fn find_companion_of_order(p: u64, order: u64) -> Result<MoebiusMap, Psl2Error> {
    (0..p)
        .map(|t| MoebiusMap::companion(p, t))
        .find(|m| m.order() == order)
        .ok_or(Psl2Error::SearchExhausted { p, order })
}

fn is_dihedral_pair(rotation: &MoebiusMap, reflection: &MoebiusMap, s: u32) -> bool {
    let conj = reflection.compose(rotation).compose(&reflection.inverse());
    let in_rotation_group = (0..1u64 << (s - 1)).any(|e| rotation.pow(e) == *reflection);
    reflection.order() == 2 && conj == rotation.inverse() && !in_rotation_group
}

/// Locates generators of every Sylow subgroup used by the congruence method.
///
/// Odd-order generators are the first companion forms `[[0,1],[−1,t]]` (by
/// increasing `t`) of the required order. For the dihedral Sylow-2 subgroup,
/// when `−1` is a square mod `p` with smallest root `b`, `P` is the first
/// `[[0,b],[b,t]]` of order `2^{s−1}` and `T = [[0,−1],[1,0]]`; otherwise a
/// companion-form `P` is paired with the first involution inverting it.
pub fn find_sylow_plan(p: u64) -> Result<SylowPlan, Psl2Error> {
    if !crate::qrcode::is_prime(p) || (p % 8 != 1 && p % 8 != 7) {
        return Err(Psl2Error::UnsupportedPrime { p });
    }
    let GroupOrder { order, factorization } = group_order(p);
    let s = factorization
        .iter()
        .find(|(q, _)| *q == 2)
        .map(|&(_, e)| e)
        .expect("p² − 1 is divisible by 16");

    let mut odd_generators = BTreeMap::new();
    for &(q, _) in factorization.iter().filter(|&&(q, _)| q != 2 && q != p) {
        odd_generators.insert(q, find_companion_of_order(p, q)?);
    }

    let target = 1u64 << (s - 1);
    let (rotation, reflection) = match sqrt_minus_one(p) {
        Some(b) => {
            let t_map = MoebiusMap::inversion(p);
            (0..p)
                .map(|t| MoebiusMap::canonical(p, 0, b, b, t))
                .find(|m| m.order() == target && is_dihedral_pair(m, &t_map, s))
                .map(|m| (m, t_map))
        }
        None => {
            let rot = find_companion_of_order(p, target)?;
            let inv = |x: u64| mod_inv(x, p);
            (0..p)
                .flat_map(|a| (1..p).map(move |b| (a, b)))
                .map(|(a, b)| {
                    let c = (p - 1 + p - a * a % p) % p * inv(b) % p;
                    MoebiusMap::canonical(p, a, b, c, (p - a) % p)
                })
                .find(|t| is_dihedral_pair(&rot, t, s))
                .map(|t| (rot, t))
        }
    }
    .ok_or(Psl2Error::SearchExhausted { p, order: target })?;

    Ok(SylowPlan {
        p,
        group_order: order,
        factorization,
        s,
        odd_generators,
        translation: MoebiusMap::translation(p),
        rotation,
        reflection,
    })
}

/// Checks `V = T S^ρ T S^μ T S^ρ` with `μ = ρ⁻¹` and `V : y ↦ ρ² y`, as an
/// equality of coordinate permutations. The word is read left to right as a
/// sequence of substitutions: `T` acts first.
pub fn footnote_v_identity(p: u64, rho: u64) -> Result<bool, Psl2Error> {
    let order = multiplicative_order(rho, p);
    if order != p - 1 {
        return Err(Psl2Error::NotPrimitiveRoot { p, rho, order });
    }
    let mu = mod_inv(rho, p);
    let s = MoebiusMap::translation(p).to_permutation();
    let t = MoebiusMap::inversion(p).to_permutation();
    let s_pow = |e: u64| (0..e).fold(CoordPermutation::identity(p), |acc, _| acc.compose(&s));
    let word = [t.clone(), s_pow(rho), t.clone(), s_pow(mu), t, s_pow(rho)];
    let product = word
        .iter()
        .fold(CoordPermutation::identity(p), |acc, x| x.compose(&acc));
    Ok(product == MoebiusMap::scaling(p, rho).to_permutation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn translation_cycles_finite_points() {
        let perm = MoebiusMap::translation(137).to_permutation();
        assert_eq!(perm.image()[137], 137);
        for y in 0..137 {
            assert_eq!(perm.image()[y], (y + 1) % 137);
        }
        assert_eq!(perm.order(), 137);
    }

    #[test]
    fn inversion_swaps_zero_and_infinity() {
        let perm = MoebiusMap::inversion(137).to_permutation();
        assert_eq!(perm.image()[0], 137);
        assert_eq!(perm.image()[137], 0);
        assert_eq!(perm.order(), 2);
    }

    #[test]
    fn identity_map() {
        assert!(MoebiusMap::identity(17).to_permutation().is_identity());
        assert!(MoebiusMap::new(17, -1, 0, 0, -1).unwrap().is_identity());
    }

    #[test]
    fn rejects_bad_determinant() {
        assert!(matches!(
            MoebiusMap::new(17, 1, 1, 1, 1),
            Err(Psl2Error::BadDeterminant { det: 0, .. })
        ));
    }

    #[test]
    fn group_orders() {
        let g = group_order(137);
        assert_eq!(g.order, 1_285_608);
        assert_eq!(g.factorization, vec![(2, 3), (3, 1), (17, 1), (23, 1), (137, 1)]);
        assert_eq!(group_order(7).order, 168);
        assert_eq!(group_order(17).order, 2448);
    }

    #[test]
    fn plan_137_matches_exhibited_generators() {
        let plan = find_sylow_plan(137).unwrap();
        assert_eq!(plan.s, 3);
        assert_eq!(plan.odd_generators[&3], MoebiusMap::new(137, 0, 1, 136, 1).unwrap());
        assert_eq!(plan.odd_generators[&17], MoebiusMap::new(137, 0, 1, 136, 6).unwrap());
        assert_eq!(plan.odd_generators[&23], MoebiusMap::new(137, 0, 1, 136, 11).unwrap());
        assert_eq!(plan.rotation, MoebiusMap::new(137, 0, 37, 37, 31).unwrap());
        assert_eq!(plan.rotation.order(), 4);
        assert_eq!(plan.reflection, MoebiusMap::inversion(137));
    }

    #[test]
    fn plan_17_has_order_eight_rotation() {
        let plan = find_sylow_plan(17).unwrap();
        assert_eq!(plan.s, 4);
        assert_eq!(plan.rotation.order(), 8);
        assert_eq!(plan.odd_generators[&3].order(), 3);
    }

    #[test]
    fn plan_for_seven_mod_eight_uses_fallback() {
        for p in [7, 23, 31, 47] {
            let plan = find_sylow_plan(p).unwrap();
            assert_eq!(plan.rotation.order(), 1 << (plan.s - 1));
            assert!(is_dihedral_pair(&plan.rotation, &plan.reflection, plan.s));
        }
    }

    #[test]
    fn subgroups_are_closed() {
        for p in [17, 41, 137] {
            let plan = find_sylow_plan(p).unwrap();
            for group in [plan.h2(), plan.g4(0), plan.g4(1)] {
                for x in &group {
                    assert!(group.contains(&x.inverse()));
                    for y in &group {
                        assert!(group.contains(&x.compose(y)), "p={p}: {x} * {y} escapes");
                    }
                }
                let distinct: std::collections::BTreeSet<_> = group.iter().collect();
                assert_eq!(distinct.len(), group.len());
            }
        }
    }

    #[test]
    fn dihedral_relation_on_permutations() {
        for p in [17, 41, 137] {
            let plan = find_sylow_plan(p).unwrap();
            let t = plan.reflection.to_permutation();
            let r = plan.rotation.to_permutation();
            assert_eq!(t.compose(&r).compose(&t), r.inverse());
        }
    }

    #[test]
    fn permutation_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [17u64, 137] {
            let random = |rng: &mut ChaCha8Rng| loop {
                let (a, b, c) = (rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(0..p));
                if a == 0 {
                    continue;
                }
                // d = (1 + bc) / a
                let d = (1 + b * c) % p * mod_inv(a, p) % p;
                return MoebiusMap::new(p, a as i64, b as i64, c as i64, d as i64).unwrap();
            };
            for _ in 0..100 {
                let (x, y) = (random(&mut rng), random(&mut rng));
                assert_eq!(
                    x.compose(&y).to_permutation(),
                    x.to_permutation().compose(&y.to_permutation())
                );
                let perm = x.to_permutation();
                for pt in 0..=p as usize {
                    assert_eq!(perm.image()[pt], x.apply(pt));
                }
            }
        }
    }

    #[test]
    fn footnote_identity() {
        assert_eq!(footnote_v_identity(17, 3), Ok(true));
        let rho = smallest_primitive_root(137);
        assert_eq!(footnote_v_identity(137, rho), Ok(true));
        assert_eq!(
            footnote_v_identity(17, 2),
            Err(Psl2Error::NotPrimitiveRoot {
                p: 17,
                rho: 2,
                order: 8
            })
        );
    }
}
