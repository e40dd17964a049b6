//! File library, MAN placement and block extraction.
//!
//! Files are indexed from 0 (matching demand-matrix columns); users and
//! windows `W` use 1-based user numbers. Subfile `F_{i,W}` occupies the
//! positions `[r·L, (r+1)·L)` of file `i`, where `r` is the colex rank of
//! `W` and `L = B / C(K,t)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinat::{choose, colex_rank, subsets, UserSubset, MAX_USERS};
use crate::gf::{Field, FieldElement};
use crate::linalg::DemandBasis;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlacementError {
    #[error("file length {b} is not divisible by the number of subfiles {subfiles}")]
    BadLength { b: usize, subfiles: u128 },
    #[error("t = {t} is outside 0..={k}")]
    BadT { t: usize, k: usize },
    #[error("at most {MAX_USERS} users are supported, got {0}")]
    TooManyUsers(usize),
    #[error("expected {expected} symbols, got {got}")]
    SymbolCount { expected: usize, got: usize },
    #[error("symbol {0} is not in the field")]
    SymbolRange(u32),
    #[error("subfile F_{{{file},{window}}} is not available")]
    MissingSubfile { file: usize, window: UserSubset },
    #[error("vector of length {got} does not match {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("operands are over different fields")]
    FieldMismatch,
}

/// Anything that can hand out subfiles `F_{i,W}`: the full library on the
/// server, or a user's cache.
pub trait SubfileSource {
    fn field(&self) -> &Field;
    fn subfile_len(&self) -> usize;
    fn subfile(&self, file: usize, window: UserSubset) -> Option<&[FieldElement]>;

    fn require_subfile(
        &self,
        file: usize,
        window: UserSubset,
    ) -> Result<&[FieldElement], PlacementError> {
        self.subfile(file, window)
            .ok_or(PlacementError::MissingSubfile { file, window })
    }
}

/// N files of B symbols each, split into C(K,t) equal subfiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileLibrary {
    field: Field,
    n: usize,
    b: usize,
    k: usize,
    t: usize,
    seed: u64,
    symbols: Vec<FieldElement>,
}

fn check_params(b: usize, k: usize, t: usize) -> Result<usize, PlacementError> {
    if k > MAX_USERS {
        return Err(PlacementError::TooManyUsers(k));
    }
    if t > k {
        return Err(PlacementError::BadT { t, k });
    }
    let subfiles = choose(k, t);
    if !(b as u128).is_multiple_of(subfiles) {
        return Err(PlacementError::BadLength { b, subfiles });
    }
    Ok((b as u128 / subfiles) as usize)
}

/// Fills a library with uniform symbols drawn from a ChaCha8 stream seeded by `seed`.
pub fn generate_library(
    field: &Field,
    n: usize,
    b: usize,
    k: usize,
    t: usize,
    seed: u64,
) -> Result<FileLibrary, PlacementError> {
    check_params(b, k, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = field.order();
    let symbols = (0..n * b)
        .map(|_| {
            field
                .element(rng.random_range(0..q))
                .expect("sampled below q")
        })
        .collect();
    Ok(FileLibrary {
        field: field.clone(),
        n,
        b,
        k,
        t,
        seed,
        symbols,
    })
}

impl FileLibrary {
    /// Wraps explicit symbols (row-major, file by file).
    pub fn from_symbols(
        field: &Field,
        n: usize,
        b: usize,
        k: usize,
        t: usize,
        seed: u64,
        symbols: Vec<FieldElement>,
    ) -> Result<Self, PlacementError> {
        check_params(b, k, t)?;
        if symbols.len() != n * b {
            return Err(PlacementError::SymbolCount {
                expected: n * b,
                got: symbols.len(),
            });
        }
        if let Some(bad) = symbols.iter().find(|&&s| !field.contains(s)) {
            return Err(PlacementError::SymbolRange(bad.value()));
        }
        Ok(FileLibrary {
            field: field.clone(),
            n,
            b,
            k,
            t,
            seed,
            symbols,
        })
    }

    pub fn files(&self) -> usize {
        self.n
    }

    pub fn file_len(&self) -> usize {
        self.b
    }

    pub fn users(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn symbols(&self) -> &[FieldElement] {
        &self.symbols
    }

    pub fn file(&self, i: usize) -> &[FieldElement] {
        &self.symbols[i * self.b..(i + 1) * self.b]
    }

    pub fn subfile_count(&self) -> u128 {
        choose(self.k, self.t)
    }

    /// Symbol positions `I_W` of window `W` (a t-subset of the users).
    pub fn positions(&self, window: UserSubset) -> core::ops::Range<usize> {
        let len = self.subfile_len();
        let start = colex_rank(window) as usize * len;
        start..start + len
    }

    fn valid_window(&self, window: UserSubset) -> bool {
        window.len() == self.t && window.is_subset(UserSubset::full(self.k))
    }
}

impl SubfileSource for FileLibrary {
    fn field(&self) -> &Field {
        &self.field
    }

    fn subfile_len(&self) -> usize {
        self.b / choose(self.k, self.t) as usize
    }

    fn subfile(&self, file: usize, window: UserSubset) -> Option<&[FieldElement]> {
        if file >= self.n || !self.valid_window(window) {
            return None;
        }
        Some(&self.file(file)[self.positions(window)])
    }
}

/// Cache content `Z_k` of one user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContent {
    user: usize,
    field: Field,
    subfile_len: usize,
    stored: BTreeMap<(usize, u64), Vec<FieldElement>>,
}

impl CacheContent {
    pub fn user(&self) -> usize {
        self.user
    }

    /// Number of symbols held in the cache.
    pub fn volume(&self) -> usize {
        self.stored.values().map(Vec::len).sum()
    }

    pub fn subfile_count(&self) -> usize {
        self.stored.len()
    }

    /// Stored subfiles keyed by `(file, colex rank of W)`.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, u64), &Vec<FieldElement>)> {
        self.stored.iter()
    }
}

impl SubfileSource for CacheContent {
    fn field(&self) -> &Field {
        &self.field
    }

    fn subfile_len(&self) -> usize {
        self.subfile_len
    }

    fn subfile(&self, file: usize, window: UserSubset) -> Option<&[FieldElement]> {
        self.stored
            .get(&(file, colex_rank(window)))
            .filter(|_| window.contains(self.user))
            .map(Vec::as_slice)
    }
}

/// User k stores `F_{i,W}` for every file i and every t-subset `W ∋ k`.
pub fn man_place(lib: &FileLibrary) -> Vec<CacheContent> {
    (1..=lib.users())
        .map(|user| {
            let mut stored = BTreeMap::new();
            for w in subsets(lib.users(), lib.t()).filter(|w| w.contains(user)) {
                for i in 0..lib.files() {
                    let sub = lib.subfile(i, w).expect("valid window");
                    stored.insert((i, colex_rank(w)), sub.to_vec());
                }
            }
            CacheContent {
                user,
                field: lib.field.clone(),
                subfile_len: lib.subfile_len(),
                stored,
            }
        })
        .collect()
}

/// The restriction of a user's demanded (or transformed) function to `I_W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub owner: usize,
    pub window: UserSubset,
    pub symbols: Vec<FieldElement>,
}

/// `B_{k,W} = Σ_i y_{k,i} F_{i,W}`.
pub fn compute_block<S: SubfileSource + ?Sized>(
    src: &S,
    owner: usize,
    y: &[FieldElement],
    window: UserSubset,
) -> Result<Block, PlacementError> {
    let f = src.field();
    let mut symbols = vec![FieldElement::ZERO; src.subfile_len()];
    for (i, &coef) in y.iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        f.axpy(&mut symbols, coef, src.require_subfile(i, window)?);
    }
    Ok(Block {
        owner,
        window,
        symbols,
    })
}

/// `F'_{i,W} = Σ_j y_{L(i),j} F_{j,W}` for the 1-based leader index `i`.
pub fn transformed_subfile<S: SubfileSource + ?Sized>(
    src: &S,
    basis: &DemandBasis,
    leader_index: usize,
    window: UserSubset,
) -> Result<Vec<FieldElement>, PlacementError> {
    let leader = basis.leaders().users()[leader_index - 1];
    Ok(compute_block(src, leader, basis.leader_demand(leader_index), window)?.symbols)
}

/// `B'_{k,W} = Σ_i x_{k,i} F'_{i,W}`, formed through the transformed subfiles.
pub fn compute_transformed_block<S: SubfileSource + ?Sized>(
    src: &S,
    basis: &DemandBasis,
    owner: usize,
    x: &[FieldElement],
    window: UserSubset,
) -> Result<Block, PlacementError> {
    if x.len() != basis.rank() {
        return Err(PlacementError::Dimension {
            expected: basis.rank(),
            got: x.len(),
        });
    }
    if src.field() != basis.field() {
        return Err(PlacementError::FieldMismatch);
    }
    let f = src.field();
    let mut symbols = vec![FieldElement::ZERO; src.subfile_len()];
    for (i, &coef) in x.iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        let sub = transformed_subfile(src, basis, i + 1, window)?;
        f.axpy(&mut symbols, coef, &sub);
    }
    Ok(Block {
        owner,
        window,
        symbols,
    })
}

/// `y · [F_1; …; F_N]`, the full demanded function.
pub fn demanded_function(lib: &FileLibrary, y: &[FieldElement]) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::ZERO; lib.file_len()];
    for (i, &coef) in y.iter().enumerate() {
        lib.field.axpy(&mut out, coef, lib.file(i));
    }
    out
}
