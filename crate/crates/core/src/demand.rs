//! Demand-matrix generators used by simulations and tests.

use alloc::vec::Vec;

use rand::Rng;

use crate::gf::{Field, FieldElement};
use crate::linalg::{DemandMatrix, GfMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DemandError {
    #[error("rank {rank} is impossible for a {k}x{n} matrix")]
    BadRank { rank: usize, k: usize, n: usize },
    #[error("file index {file} is outside 0..{n}")]
    BadFile { file: usize, n: usize },
}

fn random_row<R: Rng + ?Sized>(field: &Field, n: usize, rng: &mut R) -> Vec<FieldElement> {
    let q = field.order();
    (0..n)
        .map(|_| {
            field
                .element(rng.random_range(0..q))
                .expect("sampled below q")
        })
        .collect()
}

fn random_matrix<R: Rng + ?Sized>(
    field: &Field,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> GfMatrix {
    let data = (0..rows)
        .flat_map(|_| random_row(field, cols, rng))
        .collect();
    GfMatrix::new(field, rows, cols, data).expect("shape and range hold")
}

/// Every entry i.i.d. uniform over GF(q).
pub fn random_demands<R: Rng + ?Sized>(
    field: &Field,
    k: usize,
    n: usize,
    rng: &mut R,
) -> DemandMatrix {
    random_matrix(field, k, n, rng)
}

/// Rank `min(K, N)`: users `1..=min(K,N)` demand the unit vectors `e_1, e_2, …`
/// and the remaining users demand uniform random rows.
pub fn worst_case_demands<R: Rng + ?Sized>(
    field: &Field,
    k: usize,
    n: usize,
    rng: &mut R,
) -> DemandMatrix {
    let mut d = random_matrix(field, k, n, rng);
    for r in 0..k.min(n) {
        for c in 0..n {
            d.set(
                r,
                c,
                if r == c {
                    FieldElement::ONE
                } else {
                    FieldElement::ZERO
                },
            );
        }
    }
    d
}

/// Uniformly drawn coefficients times a uniformly drawn basis, retried
/// until the product has rank exactly `rank`.
pub fn random_rank_demands<R: Rng + ?Sized>(
    field: &Field,
    k: usize,
    n: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DemandMatrix, DemandError> {
    if rank > k.min(n) {
        return Err(DemandError::BadRank { rank, k, n });
    }
    loop {
        let coeffs = random_matrix(field, k, rank, rng);
        let basis = random_matrix(field, rank, n, rng);
        let d = coeffs.mul(&basis).expect("inner dimensions agree");
        if d.rank() == rank {
            return Ok(d);
        }
    }
}

/// User k demands file `files[k-1]` alone (0-based file indices).
pub fn single_file_demands(
    field: &Field,
    n: usize,
    files: &[usize],
) -> Result<DemandMatrix, DemandError> {
    let mut d = GfMatrix::zeros(field, files.len(), n);
    for (r, &file) in files.iter().enumerate() {
        if file >= n {
            return Err(DemandError::BadFile { file, n });
        }
        d.set(r, file, FieldElement::ONE);
    }
    Ok(d)
}
