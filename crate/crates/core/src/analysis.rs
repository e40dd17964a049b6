//! Load formulas and tradeoff curves in exact rational arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinat::{choose, UserSubset};
use crate::decoder::{verify_delivery, DecodeReport, DecoderError};
use crate::demand::random_demands;
use crate::encoder::{build_plan, EncoderError, TransmissionPlan};
use crate::gf::{Field, FieldElement};
use crate::linalg::{DemandMatrix, GfMatrix, RowSpace};
use crate::placement::{generate_library, man_place, PlacementError};

pub type Rational = BigRational;

/// Largest `q^{KN}` for which matrix spaces are enumerated exhaustively.
pub const ENUMERATION_CAP: u64 = 1 << 20;

/// Largest virtual population for [`private_construct`].
pub const PRIVATE_USER_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("no points given")]
    Empty,
    #[error("t = {t} is outside {lo}..={hi}")]
    BadT { t: usize, lo: usize, hi: usize },
    #[error("instance too large: {0}")]
    TooLarge(&'static str),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("there are no nonzero demand vectors when N = 0")]
    EmptySampleSpace,
    #[error("real user {0} demands the zero function")]
    ZeroDemand(usize),
    #[error("demand matrix shape or field does not match the request")]
    DemandShape,
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
}

/// One (memory, load) corner point, tagged with the t that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadPoint {
    pub memory: Rational,
    pub load: Rational,
    pub t: usize,
}

/// `C(n, k)` with `C(n, k) = 0` whenever `n < k` or either argument is negative.
pub fn binom(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn ratio(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

fn int(v: usize) -> BigInt {
    BigInt::from(v)
}

fn check_t(t: usize, lo: usize, hi: usize) -> Result<(), AnalysisError> {
    if t < lo || t > hi {
        return Err(AnalysisError::BadT { t, lo, hi });
    }
    Ok(())
}

/// `[C(K,t+1) − C(K−r,t+1)] / C(K,t)`.
pub fn achievable_load(k: usize, t: usize, r: usize) -> Rational {
    let (k, t, r) = (k as i64, t as i64, r as i64);
    ratio(binom(k, t + 1) - binom(k - r, t + 1), binom(k, t))
}

/// `(K − t)/(t + 1)`: every user demands a distinct file.
pub fn man_load(k: usize, t: usize) -> Rational {
    ratio(binom(k as i64, t as i64 + 1), binom(k as i64, t as i64))
}

/// Load when `d` distinct files are demanded under single-file demands.
pub fn yma_load(k: usize, t: usize, d: usize) -> Rational {
    let top = choose(k, t + 1) - if k >= d { choose(k - d, t + 1) } else { 0 };
    Rational::new(BigInt::from(top), BigInt::from(choose(k, t)))
}

fn curve(k: usize, n: usize, load: impl Fn(usize) -> Rational) -> Vec<LoadPoint> {
    (0..=k)
        .map(|t| LoadPoint {
            memory: ratio(int(n * t), int(k)),
            load: load(t),
            t,
        })
        .collect()
}

/// Corner points `(Nt/K, achievable_load(K, t, min(K, N)))`.
pub fn worst_case_curve(k: usize, n: usize) -> Vec<LoadPoint> {
    curve(k, n, |t| achievable_load(k, t, k.min(n)))
}

/// Worst-case single-file-demand curve, evaluated from its own closed form.
pub fn yma_worst_curve(k: usize, n: usize) -> Vec<LoadPoint> {
    curve(k, n, |t| yma_load(k, t, k.min(n)))
}

/// Converse values under uncoded placement; they coincide with the achievable curve.
pub fn converse_curve(k: usize, n: usize) -> Vec<LoadPoint> {
    curve(k, n, |t| yma_load(k, t, k.min(n)))
}

pub fn man_curve(k: usize, n: usize) -> Vec<LoadPoint> {
    curve(k, n, |t| man_load(k, t))
}

fn cross(o: &LoadPoint, a: &LoadPoint, b: &LoadPoint) -> Rational {
    (&a.memory - &o.memory) * (&b.load - &o.load) - (&a.load - &o.load) * (&b.memory - &o.memory)
}

/// Lower convex hull of the points, sorted by memory. Collinear boundary
/// points are kept. Points to the right of the first minimum-load point are
/// dropped, since extra memory can always be left unused.
pub fn lower_convex_envelope(points: &[LoadPoint]) -> Result<Vec<LoadPoint>, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.memory.cmp(&b.memory).then(a.load.cmp(&b.load)));
    sorted.dedup_by(|later, earlier| later.memory == earlier.memory);
    let mut hull: Vec<LoadPoint> = Vec::new();
    for p in sorted {
        while hull.len() >= 2
            && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p).is_negative()
        {
            hull.pop();
        }
        hull.push(p);
    }
    let best = hull
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.load.cmp(&b.load).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("nonempty");
    hull.truncate(best + 1);
    Ok(hull)
}

/// Sample space for random demand rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DemandModel {
    /// Uniform over all `q^N` vectors, zero included.
    #[default]
    AllVectors,
    /// Uniform over the `q^N − 1` nonzero vectors.
    NonzeroVectors,
}

fn pow_big(q: u32, e: usize) -> BigInt {
    Pow::pow(BigInt::from(q), e)
}

/// Number of K x N matrices over GF(q) with rank exactly r:
/// `Π_{i<r} (q^N − q^i)(q^K − q^i) / (q^r − q^i)`.
pub fn rank_count(k: usize, n: usize, q: u32, r: usize) -> BigInt {
    if r > k.min(n) {
        return BigInt::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..r {
        num *= (pow_big(q, n) - pow_big(q, i)) * (pow_big(q, k) - pow_big(q, i));
        den *= pow_big(q, r) - pow_big(q, i);
    }
    num / den
}

/// Probability of each rank `0..=min(K,N)` under the demand model.
pub fn rank_distribution(
    k: usize,
    n: usize,
    q: u32,
    model: DemandModel,
) -> Result<Vec<Rational>, AnalysisError> {
    if model == DemandModel::NonzeroVectors && n == 0 {
        return Err(AnalysisError::EmptySampleSpace);
    }
    Ok(match model {
        DemandModel::AllVectors => {
            let total = pow_big(q, k * n);
            (0..=k.min(n))
                .map(|r| ratio(rank_count(k, n, q, r), total.clone()))
                .collect()
        }
        DemandModel::NonzeroVectors => {
            // each new nonzero row stays in a d-dimensional span with
            // probability (q^d − 1)/(q^N − 1)
            let m = k.min(n);
            let nonzero = pow_big(q, n) - BigInt::one();
            let mut dist = vec![Rational::zero(); m + 1];
            dist[0] = Rational::one();
            for _ in 0..k {
                let mut next = vec![Rational::zero(); m + 1];
                for d in 0..=m {
                    if dist[d].is_zero() {
                        continue;
                    }
                    let stay = ratio(pow_big(q, d) - BigInt::one(), nonzero.clone());
                    next[d] += &dist[d] * &stay;
                    if d < m {
                        next[d + 1] += &dist[d] * (Rational::one() - stay);
                    }
                }
                dist = next;
            }
            dist
        }
    })
}

/// `E[achievable_load(K, t, rank(D))]` for random demands.
pub fn average_load(
    k: usize,
    n: usize,
    q: u32,
    t: usize,
    model: DemandModel,
) -> Result<Rational, AnalysisError> {
    check_t(t, 0, k)?;
    Ok(rank_distribution(k, n, q, model)?
        .into_iter()
        .enumerate()
        .map(|(r, p)| p * achievable_load(k, t, r))
        .fold(Rational::zero(), |a, b| a + b))
}

/// `Var[achievable_load(K, t, rank(D))]` for random demands.
pub fn load_variance(
    k: usize,
    n: usize,
    q: u32,
    t: usize,
    model: DemandModel,
) -> Result<Rational, AnalysisError> {
    let mean = average_load(k, n, q, t, model)?;
    let second = rank_distribution(k, n, q, model)?
        .into_iter()
        .enumerate()
        .map(|(r, p)| {
            let l = achievable_load(k, t, r);
            p * &l * l
        })
        .fold(Rational::zero(), |a, b| a + b);
    Ok(second - &mean * &mean)
}

fn all_vectors(field: &Field, n: usize) -> Vec<Vec<FieldElement>> {
    let q = field.order() as usize;
    (0..q.pow(n as u32))
        .map(|mut code| {
            let mut v = vec![FieldElement::ZERO; n];
            for slot in v.iter_mut().rev() {
                *slot = field.element((code % q) as u32).expect("digit below q");
                code /= q;
            }
            v
        })
        .collect()
}

fn space_size(k: usize, n: usize, q: u32) -> Option<u64> {
    (q as u64).checked_pow(u32::try_from(k * n).ok()?)
}

/// Rank histogram of every K x N matrix over GF(q), by depth-first
/// enumeration of the rows. Capped at `q^{KN} ≤ 2^20`.
pub fn rank_histogram_bruteforce(
    k: usize,
    n: usize,
    field: &Field,
    model: DemandModel,
) -> Result<Vec<BigUint>, AnalysisError> {
    match space_size(k, n, field.order()) {
        Some(s) if s <= ENUMERATION_CAP => {}
        _ => return Err(AnalysisError::TooLarge("q^(KN) exceeds 2^20")),
    }
    let rows = RowCodes {
        field,
        n,
        count: (field.order() as u64).pow(n as u32),
        first: if model == DemandModel::NonzeroVectors {
            1
        } else {
            0
        },
    };
    let mut hist = vec![0u64; k.min(n) + 1];
    let mut row = vec![FieldElement::ZERO; n];
    let mut scratch = Vec::with_capacity(n);
    fn walk(
        space: &RowSpace,
        depth: usize,
        rows: &RowCodes<'_>,
        row: &mut [FieldElement],
        scratch: &mut Vec<FieldElement>,
        hist: &mut [u64],
    ) {
        match depth {
            0 => hist[space.dim()] += 1,
            1 => {
                for code in rows.first..rows.count {
                    rows.decode(code, row);
                    hist[space.dim() + usize::from(space.is_independent(row, scratch))] += 1;
                }
            }
            _ => {
                for code in rows.first..rows.count {
                    rows.decode(code, row);
                    let mut next = space.clone();
                    next.insert(row);
                    walk(&next, depth - 1, rows, row, scratch, hist);
                }
            }
        }
    }
    walk(
        &RowSpace::new(field),
        k,
        &rows,
        &mut row,
        &mut scratch,
        &mut hist,
    );
    Ok(hist.into_iter().map(BigUint::from).collect())
}

/// Row vectors of length N indexed by their base-q code (code 0 is the zero row).
struct RowCodes<'a> {
    field: &'a Field,
    n: usize,
    count: u64,
    first: u64,
}

impl RowCodes<'_> {
    fn decode(&self, mut code: u64, out: &mut [FieldElement]) {
        let q = self.field.order() as u64;
        for slot in out[..self.n].iter_mut().rev() {
            *slot = self
                .field
                .element((code % q) as u32)
                .expect("digit below q");
            code /= q;
        }
    }
}

/// Monte Carlo estimate with exact sample statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonteCarloEstimate {
    pub trials: usize,
    pub mean: Rational,
    /// Unbiased sample variance of a single draw.
    pub variance: Rational,
}

impl MonteCarloEstimate {
    /// Whether `|mean − target| ≤ sigmas · sqrt(variance / trials)`,
    /// decided on squares so no rounding is involved.
    pub fn within_sigmas(&self, target: &Rational, sigmas: u32) -> bool {
        self.within_sigmas_of(target, &self.variance, sigmas)
    }

    /// Same test with a known per-draw variance in place of the sample one.
    pub fn within_sigmas_of(&self, target: &Rational, variance: &Rational, sigmas: u32) -> bool {
        let diff = &self.mean - target;
        let bound = Rational::from_integer(BigInt::from(sigmas * sigmas)) * variance
            / Rational::from_integer(int(self.trials));
        &diff * &diff <= bound
    }
}

fn random_nonzero_demands<R: Rng>(field: &Field, k: usize, n: usize, rng: &mut R) -> DemandMatrix {
    let q = field.order();
    let mut data = Vec::with_capacity(k * n);
    for _ in 0..k {
        loop {
            let row: Vec<FieldElement> = (0..n)
                .map(|_| field.element(rng.random_range(0..q)).expect("below q"))
                .collect();
            if row.iter().any(|e| !e.is_zero()) {
                data.extend(row);
                break;
            }
        }
    }
    GfMatrix::new(field, k, n, data).expect("valid shape")
}

/// Samples `trials` demand matrices from a ChaCha8 stream seeded by `seed`.
pub fn average_load_montecarlo(
    k: usize,
    n: usize,
    field: &Field,
    t: usize,
    model: DemandModel,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate, AnalysisError> {
    check_t(t, 0, k)?;
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    if model == DemandModel::NonzeroVectors && n == 0 {
        return Err(AnalysisError::EmptySampleSpace);
    }
    let loads: Vec<Rational> = (0..=k.min(n)).map(|r| achievable_load(k, t, r)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; loads.len()];
    for _ in 0..trials {
        let d = match model {
            DemandModel::AllVectors => random_demands(field, k, n, &mut rng),
            DemandModel::NonzeroVectors => random_nonzero_demands(field, k, n, &mut rng),
        };
        counts[d.rank()] += 1;
    }
    let total = int(trials);
    let mut sum = Rational::zero();
    let mut sum_sq = Rational::zero();
    for (c, l) in counts.iter().zip(&loads) {
        let c = Rational::from_integer(int(*c));
        sum += &c * l;
        sum_sq += &c * l * l;
    }
    let mean = &sum / Rational::from_integer(total.clone());
    let variance = if trials > 1 {
        (sum_sq - &mean * &sum) / Rational::from_integer(total - 1)
    } else {
        Rational::zero()
    };
    Ok(MonteCarloEstimate {
        trials,
        mean,
        variance,
    })
}

/// Device-to-device load for a given demand matrix:
/// `[C(K−1,t) − (1/K) Σ_k C(K−1−rank(D_{[K]∖{k}}), t)] / C(K−1,t−1)`.
pub fn d2d_load(demand: &DemandMatrix, t: usize) -> Result<Rational, AnalysisError> {
    let k = demand.rows();
    check_t(t, 1, k)?;
    let ranks: Vec<usize> = (1..=k)
        .map(|u| {
            demand
                .user_rows(UserSubset::full(k).without(u))
                .expect("rows in range")
                .rank()
        })
        .collect();
    Ok(d2d_from_ranks(k, t, &ranks))
}

fn d2d_from_ranks(k: usize, t: usize, ranks: &[usize]) -> Rational {
    let (ki, ti) = (k as i64, t as i64);
    let sub: BigInt = ranks.iter().map(|&r| binom(ki - 1 - r as i64, ti)).sum();
    let num = Rational::from_integer(binom(ki - 1, ti)) - ratio(sub, int(k));
    num / Rational::from_integer(binom(ki - 1, ti - 1))
}

/// Worst-case device-to-device load, reported two ways.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct D2dWorstCase {
    /// Maximum over every demand matrix, when `q^{KN} ≤ 2^20`.
    pub searched: Option<Rational>,
    /// Value with every leave-one-out rank set to `min(K−1, N)`.
    pub analytic: Rational,
}

/// Closed-form worst-case device-to-device load, every leave-one-out rank at `min(K−1, N)`.
pub fn d2d_worst_load(k: usize, n: usize, t: usize) -> Result<Rational, AnalysisError> {
    check_t(t, 1, k)?;
    Ok(d2d_from_ranks(k, t, &vec![(k - 1).min(n); k]))
}

/// Points `(Nt/K, d2d_worst_load(K, N, t))` for `t ∈ [1..K]`.
pub fn d2d_curve(k: usize, n: usize) -> Vec<LoadPoint> {
    (1..=k)
        .map(|t| LoadPoint {
            memory: ratio(int(n * t), int(k)),
            load: d2d_from_ranks(k, t, &vec![(k - 1).min(n); k]),
            t,
        })
        .collect()
}

pub fn d2d_worst_case(
    k: usize,
    n: usize,
    field: &Field,
    t: usize,
) -> Result<D2dWorstCase, AnalysisError> {
    let analytic = d2d_worst_load(k, n, t)?;
    let searched = match space_size(k, n, field.order()) {
        Some(s) if s <= ENUMERATION_CAP => {
            let rows = all_vectors(field, n);
            let mut best: Option<Rational> = None;
            let mut current = Vec::with_capacity(k);
            fn walk(
                rows: &[Vec<FieldElement>],
                current: &mut Vec<usize>,
                k: usize,
                n: usize,
                t: usize,
                field: &Field,
                best: &mut Option<Rational>,
            ) {
                if current.len() == k {
                    let data = current
                        .iter()
                        .flat_map(|&i| rows[i].iter().copied())
                        .collect();
                    let d = GfMatrix::new(field, k, n, data).expect("valid shape");
                    let load = d2d_load(&d, t).expect("t checked");
                    if best.as_ref().is_none_or(|b| load > *b) {
                        *best = Some(load);
                    }
                    return;
                }
                for i in 0..rows.len() {
                    current.push(i);
                    walk(rows, current, k, n, t, field, best);
                    current.pop();
                }
            }
            walk(&rows, &mut current, k, n, t, field, &mut best);
            best
        }
        _ => None,
    };
    Ok(D2dWorstCase { searched, analytic })
}

/// Number of nonzero demand vectors up to scaling, `(q^N − 1)/(q − 1)`.
pub fn canonical_count(q: u32, n: usize) -> BigInt {
    (pow_big(q, n) - BigInt::one()) / BigInt::from(q - 1)
}

/// Nonzero vectors whose first nonzero entry is 1, in lexicographic order.
pub fn canonical_functions(field: &Field, n: usize) -> Vec<Vec<FieldElement>> {
    all_vectors(field, n)
        .into_iter()
        .filter(|v| v.iter().find(|e| !e.is_zero()) == Some(&FieldElement::ONE))
        .collect()
}

/// Point of the private scheme with `N'K` virtual users:
/// `(tN/(N'K), [C(N'K,t+1) − C(N'K−N,t+1)] / C(N'K,t))`.
pub fn private_load(k: usize, n: usize, q: u32, t: usize) -> Result<LoadPoint, AnalysisError> {
    let users = canonical_count(q, n) * int(k);
    let hi = usize::try_from(&users).map_err(|_| AnalysisError::TooLarge("virtual population"))?;
    check_t(t, 1, hi)?;
    let (u, ti, ni) = (hi as i64, t as i64, n as i64);
    Ok(LoadPoint {
        memory: ratio(int(t * n), users),
        load: ratio(binom(u, ti + 1) - binom(u - ni, ti + 1), binom(u, ti)),
        t,
    })
}

/// Outcome of running the private scheme end to end.
#[derive(Debug, Clone)]
pub struct PrivateOutcome {
    pub plan: TransmissionPlan,
    pub report: DecodeReport,
    /// Virtual user (1-based) occupied by each real user.
    pub slots: Vec<usize>,
    /// Whether each real user recovered its own demanded function.
    pub real_matches: Vec<bool>,
    /// Transmitted messages divided by the number of subfiles.
    pub load: Rational,
}

/// Serves K real users through `N'K` virtual users, each canonical function
/// demanded exactly K times. Real user k takes the first free copy of the
/// canonical function proportional to its demand and rescales what it
/// decodes. The library has one symbol per subfile.
pub fn private_construct(
    field: &Field,
    k: usize,
    n: usize,
    t: usize,
    real_demands: &DemandMatrix,
    seed: u64,
) -> Result<PrivateOutcome, AnalysisError> {
    if real_demands.rows() != k || real_demands.cols() != n || real_demands.field() != field {
        return Err(AnalysisError::DemandShape);
    }
    let canon = canonical_functions(field, n);
    let users = canon.len() * k;
    if users > PRIVATE_USER_CAP {
        return Err(AnalysisError::TooLarge("more than 12 virtual users"));
    }
    check_t(t, 1, users)?;
    let mut virtual_rows = Vec::with_capacity(users);
    for c in &canon {
        for _ in 0..k {
            virtual_rows.extend_from_slice(c);
        }
    }
    let demand = GfMatrix::new(field, users, n, virtual_rows).expect("valid shape");
    let mut used = vec![0usize; canon.len()];
    let mut slots = Vec::with_capacity(k);
    let mut scales = Vec::with_capacity(k);
    for user in 1..=k {
        let y = real_demands.row(user - 1);
        let lead = *y
            .iter()
            .find(|e| !e.is_zero())
            .ok_or(AnalysisError::ZeroDemand(user))?;
        let inv = field.inv(lead).expect("nonzero");
        let normalized: Vec<FieldElement> = y.iter().map(|&e| field.mul(e, inv)).collect();
        let j = canon
            .iter()
            .position(|c| *c == normalized)
            .expect("canonical form exists");
        slots.push(j * k + used[j] + 1);
        used[j] += 1;
        scales.push(lead);
    }
    let b = choose(users, t) as usize;
    let lib = generate_library(field, n, b, users, t, seed)?;
    let plan = build_plan(&lib, demand)?;
    let report = verify_delivery(&lib, &plan, &man_place(&lib))?;
    let real_matches = (1..=k)
        .map(|user| {
            let outcome = &report.users[slots[user - 1] - 1];
            let scaled: Vec<FieldElement> = outcome
                .decoded
                .iter()
                .map(|&v| field.mul(v, scales[user - 1]))
                .collect();
            scaled == crate::placement::demanded_function(&lib, real_demands.row(user - 1))
        })
        .collect();
    let load = ratio(int(plan.messages().len()), binom(users as i64, t as i64));
    Ok(PrivateOutcome {
        plan,
        report,
        slots,
        real_matches,
        load,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn pt(m: Rational, l: Rational, t: usize) -> LoadPoint {
        LoadPoint {
            memory: m,
            load: l,
            t,
        }
    }

    #[test]
    fn binomial_convention() {
        assert_eq!(binom(5, 2), BigInt::from(10));
        assert_eq!(binom(2, 5), BigInt::zero());
        assert_eq!(binom(-1, 0), BigInt::zero());
        assert_eq!(binom(0, 0), BigInt::one());
        assert_eq!(binom(100, 50).to_string(), "100891344545564193334812497256");
    }

    #[test]
    fn achievable_examples() {
        assert_eq!(achievable_load(6, 2, 3), r(19, 15));
        assert_eq!(achievable_load(5, 1, 3), r(9, 5));
        assert_eq!(achievable_load(7, 3, 0), Rational::zero());
        assert_eq!(achievable_load(4, 4, 4), Rational::zero());
    }

    #[test]
    fn worst_case_examples() {
        let c = worst_case_curve(5, 3);
        assert_eq!(c[0], pt(Rational::zero(), r(3, 1), 0));
        assert_eq!(c[5], pt(r(3, 1), Rational::zero(), 5));
        let c = worst_case_curve(2, 2);
        assert_eq!(c[1], pt(r(1, 1), r(1, 2), 1));
        assert_eq!(worst_case_curve(7, 4), yma_worst_curve(7, 4));
    }

    #[test]
    fn man_matches_closed_form() {
        for t in 0..=4 {
            assert_eq!(man_load(4, t), r(4 - t as i64, t as i64 + 1));
        }
    }

    #[test]
    fn envelope_examples() {
        let single = vec![pt(r(1, 2), r(3, 1), 0)];
        assert_eq!(lower_convex_envelope(&single).unwrap(), single);
        let line = vec![
            pt(r(0, 1), r(2, 1), 0),
            pt(r(1, 1), r(1, 1), 1),
            pt(r(2, 1), r(0, 1), 2),
        ];
        assert_eq!(lower_convex_envelope(&line).unwrap(), line);
        let man = man_curve(2, 2);
        assert_eq!(lower_convex_envelope(&man).unwrap(), man);
        let dented = vec![
            pt(r(0, 1), r(2, 1), 0),
            pt(r(1, 1), r(3, 2), 1),
            pt(r(2, 1), r(0, 1), 2),
        ];
        assert_eq!(
            lower_convex_envelope(&dented).unwrap(),
            vec![dented[0].clone(), dented[2].clone()]
        );
        assert_eq!(lower_convex_envelope(&[]), Err(AnalysisError::Empty));
    }

    #[test]
    fn average_examples() {
        assert_eq!(
            average_load(1, 1, 2, 0, DemandModel::AllVectors).unwrap(),
            r(1, 2)
        );
        assert_eq!(
            average_load(2, 1, 2, 0, DemandModel::AllVectors).unwrap(),
            r(3, 4)
        );
        assert_eq!(
            average_load(3, 2, 5, 3, DemandModel::AllVectors).unwrap(),
            Rational::zero()
        );
        assert_eq!(
            average_load(2, 1, 2, 0, DemandModel::NonzeroVectors).unwrap(),
            r(1, 1)
        );
    }

    #[test]
    fn rank_counts_sum_to_total() {
        for (k, n, q) in [(3, 4, 2), (2, 2, 3), (4, 4, 4)] {
            let total: BigInt = (0..=k.min(n)).map(|r| rank_count(k, n, q, r)).sum();
            assert_eq!(total, pow_big(q, k * n));
        }
    }

    #[test]
    fn bruteforce_small() {
        let f = Field::new(2).unwrap();
        let h = rank_histogram_bruteforce(2, 2, &f, DemandModel::AllVectors).unwrap();
        assert_eq!(
            h,
            vec![1u32, 9, 6]
                .into_iter()
                .map(BigUint::from)
                .collect::<Vec<_>>()
        );
        assert!(rank_histogram_bruteforce(5, 5, &f, DemandModel::AllVectors).is_err());
    }

    #[test]
    fn d2d_examples() {
        let f = Field::new(2).unwrap();
        assert_eq!(d2d_load(&GfMatrix::identity(&f, 2), 1).unwrap(), r(1, 1));
        let full = GfMatrix::identity(&f, 4);
        for t in 1..=4 {
            let expect = ratio(binom(3, t as i64), binom(3, t as i64 - 1));
            assert_eq!(d2d_load(&full, t).unwrap(), expect);
        }
        assert_eq!(d2d_load(&full, 4).unwrap(), Rational::zero());
        assert!(matches!(
            d2d_load(&full, 0),
            Err(AnalysisError::BadT { .. })
        ));
        let w = d2d_worst_case(3, 2, &f, 1).unwrap();
        assert_eq!(w.searched.as_ref(), Some(&w.analytic));
    }

    #[test]
    fn private_examples() {
        let f2 = Field::new(2).unwrap();
        let canon = canonical_functions(&f2, 2);
        assert_eq!(canon.len(), 3);
        assert_eq!(canonical_count(3, 2), BigInt::from(4));
        assert_eq!(canonical_functions(&Field::new(3).unwrap(), 2).len(), 4);
        let p = private_load(2, 2, 2, 6).unwrap();
        assert_eq!((p.memory, p.load), (r(2, 1), Rational::zero()));
        assert!(private_load(2, 2, 2, 0).is_err());
    }

    #[test]
    fn private_construct_decodes_real_users() {
        let f = Field::new(2).unwrap();
        let real = GfMatrix::from_rows(&f, &[[1, 1], [1, 1]]).unwrap();
        let out = private_construct(&f, 2, 2, 2, &real, 4).unwrap();
        assert!(out.report.success());
        assert_eq!(out.real_matches, vec![true, true]);
        assert_eq!(out.slots, vec![5, 6]);
        assert_eq!(out.load, private_load(2, 2, 2, 2).unwrap().load);
        let zero = GfMatrix::from_rows(&f, &[[1, 0], [0, 0]]).unwrap();
        assert_eq!(
            private_construct(&f, 2, 2, 2, &zero, 4).err(),
            Some(AnalysisError::ZeroDemand(2))
        );
    }
}
