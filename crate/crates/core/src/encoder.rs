//! Server-side delivery.
//!
//! For a (t+1)-subset S the multicast message is
//! `W_S = Σ_i (−1)^{i−1} B'_{L_S(i), S∖{L_S(i)}} + Σ_j (−1)^{j−1} B'_{N_S(j), S∖{N_S(j)}}`,
//! where `L_S(i)` is the i-th smallest leader in S and `N_S(j)` the j-th
//! smallest non-leader. Only subsets containing at least one leader are sent.

use alloc::vec;
use alloc::vec::Vec;

use crate::combinat::{leaders_in, nonleaders_in, subsets, UserSubset};
use crate::gf::{Field, FieldElement};
use crate::linalg::{DemandBasis, DemandMatrix, LeaderSet, LinalgError};
use crate::placement::{compute_transformed_block, FileLibrary, PlacementError, SubfileSource};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncoderError {
    #[error("subset {subset} has {got} users, expected {expected}")]
    SubsetSize {
        subset: UserSubset,
        expected: usize,
        got: usize,
    },
    #[error("demand matrix is {rows}x{cols}, library expects {k}x{n}")]
    DemandShape {
        rows: usize,
        cols: usize,
        k: usize,
        n: usize,
    },
    #[error("demand matrix and library use different fields")]
    FieldMismatch,
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("malformed payload: {0}")]
    Wire(&'static str),
}

/// One broadcast transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastMessage {
    pub subset: UserSubset,
    /// `(user, α)` in ascending user order.
    pub coefficients: Vec<(usize, FieldElement)>,
    pub payload: Vec<FieldElement>,
}

impl MulticastMessage {
    pub fn alpha(&self, user: usize) -> Option<FieldElement> {
        self.coefficients
            .iter()
            .find(|(u, _)| *u == user)
            .map(|&(_, a)| a)
    }
}

/// Alternating signs, counted separately among the leaders and the
/// non-leaders of `s`, both in ascending user order.
pub fn sign_coefficients(
    field: &Field,
    s: UserSubset,
    leaders: &LeaderSet,
) -> Vec<(usize, FieldElement)> {
    let mut out: Vec<(usize, FieldElement)> = leaders_in(s, leaders)
        .iter()
        .enumerate()
        .chain(nonleaders_in(s, leaders).iter().enumerate())
        .map(|(pos, user)| (user, field.sign(pos)))
        .collect();
    out.sort_unstable_by_key(|&(u, _)| u);
    out
}

pub fn build_message<S: SubfileSource + ?Sized>(
    src: &S,
    basis: &DemandBasis,
    t: usize,
    s: UserSubset,
) -> Result<MulticastMessage, EncoderError> {
    if s.len() != t + 1 {
        return Err(EncoderError::SubsetSize {
            subset: s,
            expected: t + 1,
            got: s.len(),
        });
    }
    let f = src.field();
    let coefficients = sign_coefficients(f, s, basis.leaders());
    let mut payload = vec![FieldElement::ZERO; src.subfile_len()];
    for &(user, alpha) in &coefficients {
        let block = compute_transformed_block(
            src,
            basis,
            user,
            basis.transformed_row(user),
            s.without(user),
        )?;
        f.axpy(&mut payload, alpha, &block.symbols);
    }
    Ok(MulticastMessage {
        subset: s,
        coefficients,
        payload,
    })
}

/// Everything the server broadcasts for one demand matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionPlan {
    field: Field,
    t: usize,
    subfile_len: usize,
    basis: DemandBasis,
    messages: Vec<MulticastMessage>,
}

impl TransmissionPlan {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn users(&self) -> usize {
        self.basis.users()
    }

    pub fn files(&self) -> usize {
        self.basis.files()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn subfile_len(&self) -> usize {
        self.subfile_len
    }

    pub fn basis(&self) -> &DemandBasis {
        &self.basis
    }

    pub fn leaders(&self) -> &LeaderSet {
        self.basis.leaders()
    }

    pub fn demand(&self) -> &DemandMatrix {
        self.basis.demand()
    }

    /// Transmitted messages in colex order of their subsets.
    pub fn messages(&self) -> &[MulticastMessage] {
        &self.messages
    }

    /// The transmitted message for `s`, if `s` was sent.
    pub fn message(&self, s: UserSubset) -> Option<&MulticastMessage> {
        // equal-size subsets in colex order are sorted by bitmask
        self.messages
            .binary_search_by_key(&s.bits(), |m| m.subset.bits())
            .ok()
            .map(|i| &self.messages[i])
    }

    /// Transmitted channel symbols.
    pub fn channel_symbols(&self) -> usize {
        self.messages.len() * self.subfile_len
    }
}

/// Subsets that get transmitted: every (t+1)-subset meeting the leader set.
pub fn transmitted_subsets(
    k: usize,
    t: usize,
    leaders: &LeaderSet,
) -> impl Iterator<Item = UserSubset> + '_ {
    subsets(k, t + 1).filter(move |s| !leaders_in(*s, leaders).is_empty())
}

/// Builds the plan with the greedy leader set.
pub fn build_plan(
    lib: &FileLibrary,
    demand: DemandMatrix,
) -> Result<TransmissionPlan, EncoderError> {
    check_demand(lib, &demand)?;
    build_plan_with_basis(lib, DemandBasis::new(demand)?)
}

/// Builds the plan around a caller-chosen leader set.
pub fn build_plan_with_leaders(
    lib: &FileLibrary,
    demand: DemandMatrix,
    leaders: LeaderSet,
) -> Result<TransmissionPlan, EncoderError> {
    check_demand(lib, &demand)?;
    build_plan_with_basis(lib, DemandBasis::with_leaders(demand, leaders)?)
}

fn check_demand(lib: &FileLibrary, demand: &DemandMatrix) -> Result<(), EncoderError> {
    if demand.field() != lib.field() {
        return Err(EncoderError::FieldMismatch);
    }
    if demand.rows() != lib.users() || demand.cols() != lib.files() {
        return Err(EncoderError::DemandShape {
            rows: demand.rows(),
            cols: demand.cols(),
            k: lib.users(),
            n: lib.files(),
        });
    }
    Ok(())
}

fn build_plan_with_basis(
    lib: &FileLibrary,
    basis: DemandBasis,
) -> Result<TransmissionPlan, EncoderError> {
    let t = lib.t();
    let messages = transmitted_subsets(lib.users(), t, basis.leaders())
        .map(|s| build_message(lib, &basis, t, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TransmissionPlan {
        field: lib.field().clone(),
        t,
        subfile_len: lib.subfile_len(),
        basis,
        messages,
    })
}

const MAGIC: &[u8; 4] = b"FNCP";
const VERSION: u8 = 1;

fn symbol_width(q: u32) -> usize {
    if q <= 256 {
        1
    } else {
        2
    }
}

fn put_symbol(out: &mut Vec<u8>, width: usize, s: FieldElement) {
    if width == 1 {
        out.push(s.value() as u8);
    } else {
        out.extend_from_slice(&(s.value() as u16).to_le_bytes());
    }
}

/// Canonical little-endian wire format:
///
/// ```text
/// "FNCP" version:u8 q:u32 K:u16 N:u16 t:u16 L:u32 rank:u16 leaders:u16*rank
/// demand:sym*(K·N) count:u64
/// per message: subset:u64 alpha:sym*(t+1) payload:sym*L
/// ```
///
/// Symbols take one byte when q ≤ 256 and two bytes otherwise.
pub fn serialize_payload(plan: &TransmissionPlan) -> Vec<u8> {
    let q = plan.field.order();
    let w = symbol_width(q);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&q.to_le_bytes());
    out.extend_from_slice(&(plan.users() as u16).to_le_bytes());
    out.extend_from_slice(&(plan.files() as u16).to_le_bytes());
    out.extend_from_slice(&(plan.t as u16).to_le_bytes());
    out.extend_from_slice(&(plan.subfile_len as u32).to_le_bytes());
    out.extend_from_slice(&(plan.leaders().len() as u16).to_le_bytes());
    for &l in plan.leaders().users() {
        out.extend_from_slice(&(l as u16).to_le_bytes());
    }
    for &s in plan.demand().entries() {
        put_symbol(&mut out, w, s);
    }
    out.extend_from_slice(&(plan.messages.len() as u64).to_le_bytes());
    for m in &plan.messages {
        out.extend_from_slice(&m.subset.bits().to_le_bytes());
        for &(_, a) in &m.coefficients {
            put_symbol(&mut out, w, a);
        }
        for &s in &m.payload {
            put_symbol(&mut out, w, s);
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EncoderError> {
        if self.buf.len() < n {
            return Err(EncoderError::Wire("truncated"));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, EncoderError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, EncoderError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, EncoderError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, EncoderError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn symbol(&mut self, field: &Field, width: usize) -> Result<FieldElement, EncoderError> {
        let v = if width == 1 {
            self.u8()? as u32
        } else {
            self.u16()? as u32
        };
        field
            .element(v)
            .map_err(|_| EncoderError::Wire("symbol out of range"))
    }

    fn symbols(
        &mut self,
        field: &Field,
        width: usize,
        n: usize,
    ) -> Result<Vec<FieldElement>, EncoderError> {
        (0..n).map(|_| self.symbol(field, width)).collect()
    }
}

/// Inverse of [`serialize_payload`]; the leader set and signs are re-validated.
pub fn deserialize_payload(bytes: &[u8]) -> Result<TransmissionPlan, EncoderError> {
    let mut r = Reader { buf: bytes };
    if r.take(4)? != MAGIC {
        return Err(EncoderError::Wire("bad magic"));
    }
    if r.u8()? != VERSION {
        return Err(EncoderError::Wire("unsupported version"));
    }
    let field = Field::new(r.u32()? as u64).map_err(|_| EncoderError::Wire("bad field order"))?;
    let w = symbol_width(field.order());
    let k = r.u16()? as usize;
    let n = r.u16()? as usize;
    let t = r.u16()? as usize;
    let subfile_len = r.u32()? as usize;
    if t > k {
        return Err(EncoderError::Wire("t exceeds K"));
    }
    let rank = r.u16()? as usize;
    let leaders: Vec<usize> = (0..rank)
        .map(|_| r.u16().map(usize::from))
        .collect::<Result<_, _>>()?;
    let demand = DemandMatrix::new(&field, k, n, r.symbols(&field, w, k * n)?)?;
    let leaders = LeaderSet::from_users(&demand, &leaders)?;
    let basis = DemandBasis::with_leaders(demand, leaders)?;
    let count = r.u64()?;
    let leader_set = basis.leaders().clone();
    let mut expected = transmitted_subsets(k, t, &leader_set);
    let mut messages = Vec::new();
    for _ in 0..count {
        let subset = UserSubset::from_bits(r.u64()?);
        if expected.next() != Some(subset) {
            return Err(EncoderError::Wire("unexpected subset"));
        }
        let alphas = r.symbols(&field, w, t + 1)?;
        let coefficients: Vec<(usize, FieldElement)> = subset.iter().zip(alphas).collect();
        if coefficients != sign_coefficients(&field, subset, basis.leaders()) {
            return Err(EncoderError::Wire("coefficients violate the sign rule"));
        }
        let payload = r.symbols(&field, w, subfile_len)?;
        messages.push(MulticastMessage {
            subset,
            coefficients,
            payload,
        });
    }
    if expected.next().is_some() {
        return Err(EncoderError::Wire("missing messages"));
    }
    drop(expected);
    if !r.buf.is_empty() {
        return Err(EncoderError::Wire("trailing bytes"));
    }
    Ok(TransmissionPlan {
        field,
        t,
        subfile_len,
        basis,
        messages,
    })
}
