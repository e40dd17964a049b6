//! Subsets of users, colexicographic ranking, permutations, and the index
//! bookkeeping used by the delivery and decoding rules.
//!
//! Users are numbered from 1. Position-style index sets (leader indices,
//! non-leader indices) are 1-based as well, because the decoding signs
//! depend on their sums.

use alloc::vec::Vec;
use core::fmt;

use crate::linalg::LeaderSet;

/// Maximum number of users a [`UserSubset`] can address.
pub const MAX_USERS: usize = 64;

/// Largest n accepted by [`enumerate_permutations`].
pub const MAX_PERMUTATION_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CombinatError {
    #[error("user index {0} is outside 1..=64")]
    UserOutOfRange(usize),
    #[error("duplicate user {0} in subset")]
    DuplicateUser(usize),
    #[error("permutations of {0} elements exceed the cap of 8")]
    TooLarge(usize),
    #[error("subset rank {rank} is out of range for C({k}, {t})")]
    RankOutOfRange { rank: u64, k: usize, t: usize },
}

/// A set of users stored as a bitmask (bit `u - 1` for user `u`).
///
/// Iteration is always in increasing user order, so `nth(i)` is the
/// i-th smallest member.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct UserSubset(u64);

impl UserSubset {
    pub const EMPTY: UserSubset = UserSubset(0);

    pub const fn from_bits(bits: u64) -> Self {
        UserSubset(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn from_users(users: &[usize]) -> Result<Self, CombinatError> {
        let mut bits = 0u64;
        for &u in users {
            if u == 0 || u > MAX_USERS {
                return Err(CombinatError::UserOutOfRange(u));
            }
            let bit = 1u64 << (u - 1);
            if bits & bit != 0 {
                return Err(CombinatError::DuplicateUser(u));
            }
            bits |= bit;
        }
        Ok(UserSubset(bits))
    }

    /// `{1, ..., k}`.
    pub fn full(k: usize) -> Self {
        debug_assert!(k <= MAX_USERS);
        if k == MAX_USERS {
            UserSubset(u64::MAX)
        } else {
            UserSubset((1u64 << k) - 1)
        }
    }

    pub fn singleton(user: usize) -> Self {
        debug_assert!((1..=MAX_USERS).contains(&user));
        UserSubset(1 << (user - 1))
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, user: usize) -> bool {
        (1..=MAX_USERS).contains(&user) && self.0 & (1 << (user - 1)) != 0
    }

    pub fn with(self, user: usize) -> Self {
        self | UserSubset::singleton(user)
    }

    pub fn without(self, user: usize) -> Self {
        if self.contains(user) {
            UserSubset(self.0 & !(1 << (user - 1)))
        } else {
            self
        }
    }

    pub const fn union(self, other: Self) -> Self {
        UserSubset(self.0 | other.0)
    }

    pub const fn intersection(self, other: Self) -> Self {
        UserSubset(self.0 & other.0)
    }

    pub const fn difference(self, other: Self) -> Self {
        UserSubset(self.0 & !other.0)
    }

    pub const fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> Members {
        Members(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// The i-th smallest member, 1-based.
    pub fn nth(self, i: usize) -> Option<usize> {
        if i == 0 {
            return None;
        }
        self.iter().nth(i - 1)
    }

    /// 1-based position of `user` within the subset.
    pub fn position(self, user: usize) -> Option<usize> {
        if !self.contains(user) {
            return None;
        }
        let below = self.0 & ((1u64 << (user - 1)) - 1);
        Some(below.count_ones() as usize + 1)
    }

    /// Largest member, if any.
    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 64 - self.0.leading_zeros() as usize)
    }
}

impl core::ops::BitOr for UserSubset {
    type Output = UserSubset;
    fn bitor(self, rhs: Self) -> Self {
        self.union(rhs)
    }
}

impl fmt::Debug for UserSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for UserSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, u) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, "}}")
    }
}

impl IntoIterator for UserSubset {
    type Item = usize;
    type IntoIter = Members;
    fn into_iter(self) -> Members {
        self.iter()
    }
}

impl FromIterator<usize> for UserSubset {
    /// Panics on users outside `1..=64`.
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter()
            .fold(UserSubset::EMPTY, |acc, u| acc.with(u))
    }
}

/// Ascending iterator over subset members.
#[derive(Clone)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(tz + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Binomial coefficient with `C(x, y) = 0` whenever `x < 0`, `y < 0` or `x < y`.
pub fn binomial(n: i64, k: i64) -> u128 {
    if n < 0 || k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `binomial` for non-negative arguments.
pub fn choose(n: usize, k: usize) -> u128 {
    binomial(n as i64, k as i64)
}

/// Colexicographic rank of a subset among subsets of the same size.
pub fn colex_rank(s: UserSubset) -> u64 {
    s.iter()
        .enumerate()
        .map(|(i, u)| choose(u - 1, i + 1) as u64)
        .sum()
}

/// Inverse of [`colex_rank`] for t-subsets of `{1..k}`.
pub fn colex_unrank(mut rank: u64, k: usize, t: usize) -> Result<UserSubset, CombinatError> {
    if k > MAX_USERS || t > k || rank as u128 >= choose(k, t) {
        return Err(CombinatError::RankOutOfRange { rank, k, t });
    }
    let mut bits = 0u64;
    let mut upper = k;
    for i in (1..=t).rev() {
        // largest c with C(c, i) <= rank
        let mut c = i - 1;
        while c + 1 < upper && choose(c + 1, i) as u64 <= rank {
            c += 1;
        }
        rank -= choose(c, i) as u64;
        bits |= 1 << c;
        upper = c;
    }
    Ok(UserSubset(bits))
}

/// Iterator over all t-subsets of `{1..k}` in colexicographic order.
#[derive(Clone)]
pub struct Subsets {
    next: Option<u64>,
    limit: u64,
}

impl Iterator for Subsets {
    type Item = UserSubset;
    fn next(&mut self) -> Option<UserSubset> {
        let cur = self.next?;
        // Gosper's hack: next larger integer with the same popcount
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            let nxt = if r == 0 {
                None
            } else {
                Some((((r ^ cur) >> 2) / c) | r)
            };
            nxt.filter(|&n| n <= self.limit && n > cur)
        };
        Some(UserSubset(cur))
    }
}

/// Lazily enumerates the t-subsets of `{1..k}` in colexicographic order.
pub fn subsets(k: usize, t: usize) -> Subsets {
    assert!(k <= MAX_USERS, "at most 64 users are supported");
    if t > k {
        return Subsets {
            next: None,
            limit: 0,
        };
    }
    let limit = UserSubset::full(k).0;
    let first = if t == 64 { u64::MAX } else { (1u64 << t) - 1 };
    Subsets {
        next: Some(first),
        limit,
    }
}

pub fn enumerate_subsets(k: usize, t: usize) -> Vec<UserSubset> {
    subsets(k, t).collect()
}

/// t-subsets of an arbitrary ground set, colex order with respect to the
/// members of `ground`.
pub fn subsets_of(ground: UserSubset, t: usize) -> impl Iterator<Item = UserSubset> {
    let members = ground.to_vec();
    subsets(members.len(), t).map(move |local| local.iter().map(|i| members[i - 1]).collect())
}

/// `L_S = S ∩ L`.
pub fn leaders_in(s: UserSubset, leaders: &LeaderSet) -> UserSubset {
    s.intersection(leaders.as_subset())
}

/// `N_S = S \ L`.
pub fn nonleaders_in(s: UserSubset, leaders: &LeaderSet) -> UserSubset {
    s.difference(leaders.as_subset())
}

/// Leader indices of the leaders in `s`: `{i : L(i) ∈ s}`, 1-based and sorted.
pub fn ind(s: UserSubset, leaders: &LeaderSet) -> Vec<usize> {
    leaders
        .users()
        .iter()
        .enumerate()
        .filter(|(_, &u)| s.contains(u))
        .map(|(i, _)| i + 1)
        .collect()
}

/// Non-leader indices of the members of `a` missing from `s`:
/// `{i ∈ [|a|] : a(i) ∉ s}`, 1-based and sorted.
pub fn ind_bar(s: UserSubset, a: UserSubset) -> Vec<usize> {
    a.iter()
        .enumerate()
        .filter(|(_, u)| !s.contains(*u))
        .map(|(i, _)| i + 1)
        .collect()
}

/// Sum of the elements.
pub fn tot(x: &[usize]) -> usize {
    x.iter().sum()
}

/// Number of elements of `x` strictly below `y`.
pub fn card(x: &[usize], y: usize) -> usize {
    x.iter().filter(|&&v| v < y).count()
}

/// All permutations of `1..=n` in lexicographic order.
pub fn enumerate_permutations(n: usize) -> Result<Vec<Vec<usize>>, CombinatError> {
    if n > MAX_PERMUTATION_LEN {
        return Err(CombinatError::TooLarge(n));
    }
    let mut cur: Vec<usize> = (1..=n).collect();
    let mut out = Vec::new();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    Ok(out)
}
