//! Client-side recovery of untransmitted messages and per-user decoding.
//!
//! For a non-leader (t+1)-subset A every missing message satisfies
//! `W_A = Σ β_{A,S} W_S` over the (t+1)-subsets `S ⊆ A ∪ L`, `S ≠ A`, with
//! `β_{A,S} = (−1)^{1+Tot(Ind̄_S)} · det(D'_{A∖S, Ind_S})`.
//! Over GF(2) the same message is also the XOR of `W_{B∖V}` over the
//! full-rank families `V` of `B = A ∪ L`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::combinat::{
    card, enumerate_permutations, ind, ind_bar, subsets, subsets_of, tot, UserSubset,
    MAX_PERMUTATION_LEN,
};
use crate::encoder::{
    build_message, sign_coefficients, EncoderError, MulticastMessage, TransmissionPlan,
};
use crate::gf::{Field, FieldElement};
use crate::linalg::{DemandBasis, LinalgError};
use crate::placement::{
    compute_block, compute_transformed_block, demanded_function, CacheContent, FileLibrary,
    PlacementError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecoderError {
    #[error("invalid subsets A = {a}, S = {s}: {reason}")]
    BadSubsets {
        a: UserSubset,
        s: UserSubset,
        reason: &'static str,
    },
    #[error("permutation expansion over {0} leaders exceeds the cap")]
    TooLarge(usize),
    #[error("operation requires GF(2), field has order {0}")]
    WrongField(u32),
    #[error("user {user}: {reason}")]
    DecodeMismatch { user: usize, reason: &'static str },
    #[error("message for {0} is neither transmitted nor reconstructible")]
    MissingMessage(UserSubset),
    #[error("user {0} does not exist")]
    UnknownUser(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
}

fn bad(a: UserSubset, s: UserSubset, reason: &'static str) -> DecoderError {
    DecoderError::BadSubsets { a, s, reason }
}

fn check_beta_args(basis: &DemandBasis, a: UserSubset, s: UserSubset) -> Result<(), DecoderError> {
    let leaders = basis.leaders().as_subset();
    let all = UserSubset::full(basis.users());
    if !a.is_subset(all) || !s.is_subset(all) {
        return Err(bad(a, s, "users out of range"));
    }
    if a.len() != s.len() || a.is_empty() {
        return Err(bad(a, s, "|A| and |S| must both equal t+1"));
    }
    if !a.intersection(leaders).is_empty() {
        return Err(bad(a, s, "A contains a leader"));
    }
    if !s.is_subset(a.union(leaders)) {
        return Err(bad(a, s, "S is not inside A ∪ L"));
    }
    if s == a {
        return Err(bad(a, s, "S equals A"));
    }
    Ok(())
}

/// `β_{A,S}` as a signed minor of the transformed demand matrix.
pub fn beta(
    basis: &DemandBasis,
    a: UserSubset,
    s: UserSubset,
) -> Result<FieldElement, DecoderError> {
    check_beta_args(basis, a, s)?;
    let f = basis.field();
    let cols: Vec<usize> = ind(s, basis.leaders()).iter().map(|i| i - 1).collect();
    let rows: Vec<usize> = a.difference(s).iter().map(|u| u - 1).collect();
    let minor = basis.transformed().submatrix(&rows, &cols)?.det()?;
    Ok(f.mul(f.sign(1 + tot(&ind_bar(s, a))), minor))
}

/// `β_{A,S}` by explicit expansion over permutations `u` of `[|Ind_S|]`:
/// each term carries `(−1)^{1+Tot(Ind̄_S)+Σ Card([n]∖{u_1..u_j}, u_j)}` and
/// the product `Π_j x_{A(Ind̄_S(u_j)), Ind_S(j)}`.
pub fn beta_oracle(
    basis: &DemandBasis,
    a: UserSubset,
    s: UserSubset,
) -> Result<FieldElement, DecoderError> {
    check_beta_args(basis, a, s)?;
    let f = basis.field();
    let ind_s = ind(s, basis.leaders());
    let ind_bar_s = ind_bar(s, a);
    let n = ind_s.len();
    if n > MAX_PERMUTATION_LEN {
        return Err(DecoderError::TooLarge(n));
    }
    let x = basis.transformed();
    let base = 1 + tot(&ind_bar_s);
    let mut acc = FieldElement::ZERO;
    for u in enumerate_permutations(n).expect("within cap") {
        let mut exponent = base;
        for j in 0..n {
            let rest: Vec<usize> = (1..=n).filter(|v| !u[..=j].contains(v)).collect();
            exponent += card(&rest, u[j]);
        }
        let mut term = f.sign(exponent);
        for j in 0..n {
            let user = a.nth(ind_bar_s[u[j] - 1]).expect("index inside A");
            term = f.mul(term, x.get(user - 1, ind_s[j] - 1));
        }
        acc = f.add(acc, term);
    }
    Ok(acc)
}

fn check_missing(plan: &TransmissionPlan, a: UserSubset) -> Result<(), DecoderError> {
    let leaders = plan.leaders().as_subset();
    if a.len() != plan.t() + 1 || !a.is_subset(UserSubset::full(plan.users())) {
        return Err(bad(a, a, "A must be a (t+1)-subset of the users"));
    }
    if !a.intersection(leaders).is_empty() {
        return Err(bad(a, a, "A contains a leader"));
    }
    Ok(())
}

/// Rebuilds `W_A` from transmitted messages through the β coefficients.
pub fn reconstruct_missing(
    plan: &TransmissionPlan,
    a: UserSubset,
) -> Result<MulticastMessage, DecoderError> {
    check_missing(plan, a)?;
    let f = plan.field();
    let basis = plan.basis();
    let mut payload = vec![FieldElement::ZERO; plan.subfile_len()];
    for s in subsets_of(a.union(plan.leaders().as_subset()), plan.t() + 1) {
        if s == a {
            continue;
        }
        let coef = beta(basis, a, s)?;
        if coef.is_zero() {
            continue;
        }
        let m = plan.message(s).ok_or(DecoderError::MissingMessage(s))?;
        f.axpy(&mut payload, coef, &m.payload);
    }
    Ok(MulticastMessage {
        subset: a,
        coefficients: sign_coefficients(f, a, plan.leaders()),
        payload,
    })
}

/// The family of `V ⊆ B` with `|V| = |L|` and `rank_2(D_V) = |L|`.
pub fn xor_family(b: UserSubset, basis: &DemandBasis) -> Result<Vec<UserSubset>, DecoderError> {
    let q = basis.field().order();
    if q != 2 {
        return Err(DecoderError::WrongField(q));
    }
    let r = basis.rank();
    let mut out = Vec::new();
    for v in subsets_of(b, r) {
        if basis.demand().user_rows(v)?.rank() == r {
            out.push(v);
        }
    }
    Ok(out)
}

/// Rebuilds `W_A` over GF(2) as the XOR of `W_{B∖V}` for `V` in the
/// family of `B = A ∪ L`, skipping `V = L`.
pub fn reconstruct_missing_xor(
    plan: &TransmissionPlan,
    a: UserSubset,
) -> Result<MulticastMessage, DecoderError> {
    check_missing(plan, a)?;
    let f = plan.field();
    let leaders = plan.leaders().as_subset();
    let b = a.union(leaders);
    let mut payload = vec![FieldElement::ZERO; plan.subfile_len()];
    for v in xor_family(b, plan.basis())? {
        if v == leaders {
            continue;
        }
        let s = b.difference(v);
        let m = plan.message(s).ok_or(DecoderError::MissingMessage(s))?;
        f.axpy(&mut payload, FieldElement::ONE, &m.payload);
    }
    Ok(MulticastMessage {
        subset: a,
        coefficients: sign_coefficients(f, a, plan.leaders()),
        payload,
    })
}

/// Outcome of one parity count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lemma1Report {
    pub count: usize,
    pub even: bool,
}

/// Counts users `k ∈ B∖W` with `rank_2(D_{B∖(W∪{k})}) = |L|` and
/// `y_{k,file} ≠ 0`, i.e. how often `F_{file,W}` enters the XOR over the
/// family of `B`. `file` is a 0-based column index.
pub fn lemma1_check(
    b: UserSubset,
    basis: &DemandBasis,
    file: usize,
    w: UserSubset,
) -> Result<Lemma1Report, DecoderError> {
    let q = basis.field().order();
    if q != 2 {
        return Err(DecoderError::WrongField(q));
    }
    if !w.is_subset(b) {
        return Err(bad(b, w, "W is not inside B"));
    }
    let r = basis.rank();
    let mut count = 0;
    for k in b.difference(w) {
        if basis.demand_row(k)[file].is_zero() {
            continue;
        }
        let rest = b.difference(w.with(k));
        if rest.len() == r && basis.demand().user_rows(rest)?.rank() == r {
            count += 1;
        }
    }
    Ok(Lemma1Report {
        count,
        even: count % 2 == 0,
    })
}

/// Every message a user may need: the transmitted ones plus each missing
/// `W_A`, reconstructed once up front.
#[derive(Debug, Clone)]
pub struct MessageStore<'a> {
    plan: &'a TransmissionPlan,
    recovered: BTreeMap<UserSubset, MulticastMessage>,
}

impl<'a> MessageStore<'a> {
    pub fn new(plan: &'a TransmissionPlan) -> Result<Self, DecoderError> {
        let mut recovered = BTreeMap::new();
        let nonleaders = UserSubset::full(plan.users()).difference(plan.leaders().as_subset());
        for a in subsets_of(nonleaders, plan.t() + 1) {
            recovered.insert(a, reconstruct_missing(plan, a)?);
        }
        Ok(MessageStore { plan, recovered })
    }

    pub fn plan(&self) -> &'a TransmissionPlan {
        self.plan
    }

    pub fn get(&self, s: UserSubset) -> Option<&MulticastMessage> {
        self.plan.message(s).or_else(|| self.recovered.get(&s))
    }

    pub fn reconstructed(&self) -> impl Iterator<Item = &MulticastMessage> {
        self.recovered.values()
    }
}

/// Decodes `y_k · [F_1; …; F_N]` for the cache's owner using only its
/// cache and the broadcast.
pub fn user_decode(
    cache: &CacheContent,
    store: &MessageStore<'_>,
) -> Result<Vec<FieldElement>, DecoderError> {
    let plan = store.plan();
    let k = cache.user();
    if k == 0 || k > plan.users() {
        return Err(DecoderError::UnknownUser(k));
    }
    let f = plan.field();
    let basis = plan.basis();
    let y = basis.demand_row(k);
    let subfiles = subsets(plan.users(), plan.t());
    if y.iter().all(|e| e.is_zero()) {
        return Ok(vec![
            FieldElement::ZERO;
            plan.subfile_len() * subfiles.count()
        ]);
    }
    let mut out = Vec::new();
    for w in subsets(plan.users(), plan.t()) {
        if w.contains(k) {
            out.extend(compute_block(cache, k, y, w)?.symbols);
            continue;
        }
        let s = w.with(k);
        let m = store.get(s).ok_or(DecoderError::MissingMessage(s))?;
        if m.subset != s || m.coefficients != sign_coefficients(f, s, basis.leaders()) {
            return Err(DecoderError::DecodeMismatch {
                user: k,
                reason: "message coefficients violate the sign rule",
            });
        }
        if m.payload.len() != plan.subfile_len() {
            return Err(DecoderError::DecodeMismatch {
                user: k,
                reason: "message payload has the wrong length",
            });
        }
        let mut residual = m.payload.clone();
        let mut own = None;
        for &(other, alpha) in &m.coefficients {
            if other == k {
                own = Some(alpha);
                continue;
            }
            let blk = compute_transformed_block(
                cache,
                basis,
                other,
                basis.transformed_row(other),
                s.without(other),
            )?;
            f.axpy(&mut residual, f.neg(alpha), &blk.symbols);
        }
        let alpha = own.ok_or(DecoderError::DecodeMismatch {
            user: k,
            reason: "message does not involve the user",
        })?;
        let inv = f.inv(alpha).map_err(|_| DecoderError::DecodeMismatch {
            user: k,
            reason: "zero coefficient on the user's own block",
        })?;
        out.extend(residual.into_iter().map(|v| f.mul(v, inv)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserOutcome {
    pub user: usize,
    pub decoded: Vec<FieldElement>,
    pub matches: bool,
}

/// Difference between a reconstructed `W_A` and the message built directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual {
    pub subset: UserSubset,
    pub residual: Vec<FieldElement>,
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        self.residual.iter().all(|e| e.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReport {
    pub users: Vec<UserOutcome>,
    pub residuals: Vec<Residual>,
}

impl DecodeReport {
    pub fn success(&self) -> bool {
        self.users.iter().all(|u| u.matches) && self.residuals.iter().all(Residual::is_zero)
    }
}

/// Decodes every user and compares against the ground truth held by the
/// server, also checking each reconstructed message against a direct build.
pub fn verify_delivery(
    lib: &FileLibrary,
    plan: &TransmissionPlan,
    caches: &[CacheContent],
) -> Result<DecodeReport, DecoderError> {
    let f = plan.field();
    let store = MessageStore::new(plan)?;
    let mut residuals = Vec::new();
    for m in store.reconstructed() {
        let direct = build_message(lib, plan.basis(), plan.t(), m.subset)?;
        let mut residual = m.payload.clone();
        f.axpy(&mut residual, f.minus_one(), &direct.payload);
        residuals.push(Residual {
            subset: m.subset,
            residual,
        });
    }
    let mut users = Vec::new();
    for cache in caches {
        let decoded = user_decode(cache, &store)?;
        let expected = demanded_function(lib, plan.basis().demand_row(cache.user()));
        users.push(UserOutcome {
            user: cache.user(),
            matches: decoded == expected,
            decoded,
        });
    }
    Ok(DecodeReport { users, residuals })
}

/// Which of the three cancellation regimes a transformed subfile falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubfileCase {
    /// No leader in W.
    NoLeader,
    /// W contains the leader whose function the subfile carries.
    OwnLeaderInside,
    /// W contains leaders, but not the subfile's own leader.
    OtherLeadersOnly,
}

/// Coefficients of one transformed subfile `F'_{i,W}` on both sides of the
/// reconstruction identity for `W_A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientCheck {
    pub leader_index: usize,
    pub window: UserSubset,
    pub case: SubfileCase,
    pub lhs: FieldElement,
    pub rhs: FieldElement,
}

/// Expands both sides of `W_A = Σ β_{A,S} W_S` over the transformed subfiles,
/// with β taken from the permutation expansion. The identity holds iff every
/// entry has `lhs == rhs`; subfiles touching a leader must cancel to zero.
pub fn coefficient_identity(
    basis: &DemandBasis,
    a: UserSubset,
) -> Result<Vec<CoefficientCheck>, DecoderError> {
    let f: &Field = basis.field();
    let leaders = basis.leaders();
    if !a.intersection(leaders.as_subset()).is_empty() || a.is_empty() {
        return Err(bad(a, a, "A must be a nonempty set of non-leaders"));
    }
    let t = a.len() - 1;
    let b = a.union(leaders.as_subset());
    let x = basis.transformed();
    let mut betas = BTreeMap::new();
    for s in subsets_of(b, t + 1).filter(|&s| s != a) {
        betas.insert(s, beta_oracle(basis, a, s)?);
    }
    let mut out = Vec::new();
    for w in subsets_of(b, t) {
        for i in 1..=leaders.len() {
            let lhs = if w.is_subset(a) {
                let k = a.difference(w).iter().next().expect("one user left");
                let alpha = sign_coefficients(f, a, leaders)
                    .into_iter()
                    .find(|&(u, _)| u == k)
                    .expect("k in A")
                    .1;
                f.mul(alpha, x.get(k - 1, i - 1))
            } else {
                FieldElement::ZERO
            };
            let mut rhs = FieldElement::ZERO;
            for k in b.difference(w) {
                let s = w.with(k);
                if s == a {
                    continue;
                }
                let alpha = sign_coefficients(f, s, leaders)
                    .into_iter()
                    .find(|&(u, _)| u == k)
                    .expect("k in S")
                    .1;
                let term = f.mul(betas[&s], f.mul(alpha, x.get(k - 1, i - 1)));
                rhs = f.add(rhs, term);
            }
            let case = if w.intersection(leaders.as_subset()).is_empty() {
                SubfileCase::NoLeader
            } else if w.contains(leaders.users()[i - 1]) {
                SubfileCase::OwnLeaderInside
            } else {
                SubfileCase::OtherLeadersOnly
            };
            out.push(CoefficientCheck {
                leader_index: i,
                window: w,
                case,
                lhs,
                rhs,
            });
        }
    }
    Ok(out)
}
