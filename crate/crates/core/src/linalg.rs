//! Dense matrices over GF(q), plus leader selection on demand matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::combinat::{UserSubset, MAX_USERS};
use crate::gf::{Field, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix data has {got} entries, expected {rows}x{cols}")]
    Shape {
        rows: usize,
        cols: usize,
        got: usize,
    },
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("entry ({row}, {col}) = {value} is not in GF({q})")]
    Range {
        row: usize,
        col: usize,
        value: u32,
        q: u32,
    },
    #[error("determinant of a non-square {rows}x{cols} matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("index {index} out of range for dimension {bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("index set is not strictly increasing")]
    Unsorted,
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("matrices are over different fields")]
    FieldMismatch,
    #[error("matrix is singular")]
    Singular,
    #[error("users {0:?} do not form a leader set")]
    NotALeaderSet(Vec<usize>),
    #[error("demand row of user {0} is not in the span of the leader demands")]
    Inconsistent(usize),
    #[error("at most {MAX_USERS} users are supported, got {0}")]
    TooManyUsers(usize),
}

/// Row-major matrix over a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct GfMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
    field: Field,
}

/// K x N matrix whose k-th row is user k's demand vector.
pub type DemandMatrix = GfMatrix;

impl fmt::Debug for GfMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "GfMatrix over GF({}) {}x{} [",
            self.field.order(),
            self.rows,
            self.cols
        )?;
        for r in 0..self.rows {
            let row: Vec<u32> = self.row(r).iter().map(|e| e.value()).collect();
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

impl GfMatrix {
    pub fn new(
        field: &Field,
        rows: usize,
        cols: usize,
        data: Vec<FieldElement>,
    ) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape {
                rows,
                cols,
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|&e| !field.contains(e)) {
            return Err(LinalgError::Range {
                row: i / cols.max(1),
                col: i % cols.max(1),
                value: data[i].value(),
                q: field.order(),
            });
        }
        Ok(GfMatrix {
            rows,
            cols,
            data,
            field: field.clone(),
        })
    }

    /// Builds a matrix from integer rows, rejecting ragged rows and
    /// out-of-range entries (values are never wrapped).
    pub fn from_rows<R: AsRef<[u32]>>(field: &Field, rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(LinalgError::RaggedRow {
                    row: r,
                    expected: cols,
                    got: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                let e = field.element(v).map_err(|_| LinalgError::Range {
                    row: r,
                    col: c,
                    value: v,
                    q: field.order(),
                })?;
                data.push(e);
            }
        }
        Ok(GfMatrix {
            rows: rows.len(),
            cols,
            data,
            field: field.clone(),
        })
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        GfMatrix {
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
            field: field.clone(),
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = GfMatrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = FieldElement::ONE;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        debug_assert!(self.field.contains(v));
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [FieldElement] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.data
    }

    /// Integer view of the entries, row by row.
    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|e| e.value()).collect())
            .collect()
    }

    pub fn transpose(&self) -> GfMatrix {
        let mut t = GfMatrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &GfMatrix) -> Result<GfMatrix, LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(LinalgError::Dimension("left cols must equal right rows"));
        }
        let f = &self.field;
        let mut out = GfMatrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                let src = other.row(k);
                f.axpy(out.row_mut(r), a, src);
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![FieldElement::ZERO; self.cols];
        for (r, &a) in x.iter().enumerate() {
            self.field.axpy(&mut out, a, self.row(r));
        }
        out
    }

    /// Sub-matrix on the given rows and columns (0-based, strictly increasing).
    pub fn submatrix(&self, row_set: &[usize], col_set: &[usize]) -> Result<GfMatrix, LinalgError> {
        check_index_set(row_set, self.rows)?;
        check_index_set(col_set, self.cols)?;
        let mut data = Vec::with_capacity(row_set.len() * col_set.len());
        for &r in row_set {
            for &c in col_set {
                data.push(self.get(r, c));
            }
        }
        Ok(GfMatrix {
            rows: row_set.len(),
            cols: col_set.len(),
            data,
            field: self.field.clone(),
        })
    }

    /// Rows selected by a 1-based user subset, all columns.
    pub fn user_rows(&self, users: UserSubset) -> Result<GfMatrix, LinalgError> {
        let rows: Vec<usize> = users.iter().map(|u| u - 1).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        self.submatrix(&rows, &cols)
    }

    /// Reduced row echelon form in place; returns the pivot columns and the
    /// determinant factor accumulated by the row operations (only meaningful
    /// for square inputs).
    fn eliminate(&mut self) -> (Vec<usize>, FieldElement) {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut factor = FieldElement::ONE;
        let mut prow = 0;
        for c in 0..self.cols {
            if prow == self.rows {
                break;
            }
            let Some(src) = (prow..self.rows).find(|&r| !self.get(r, c).is_zero()) else {
                continue;
            };
            if src != prow {
                for j in 0..self.cols {
                    self.data.swap(src * self.cols + j, prow * self.cols + j);
                }
                factor = f.neg(factor);
            }
            let pv = self.get(prow, c);
            factor = f.mul(factor, pv);
            let inv = f.inv(pv).expect("pivot is nonzero");
            for v in self.row_mut(prow) {
                *v = f.mul(*v, inv);
            }
            let pivot_row = self.row(prow).to_vec();
            for r in 0..self.rows {
                if r == prow {
                    continue;
                }
                let coef = self.get(r, c);
                if !coef.is_zero() {
                    f.axpy(self.row_mut(r), f.neg(coef), &pivot_row);
                }
            }
            pivots.push(c);
            prow += 1;
        }
        (pivots, factor)
    }

    /// Rank over GF(q) by Gaussian elimination.
    pub fn rank(&self) -> usize {
        self.clone().eliminate().0.len()
    }

    /// Determinant by elimination; a row swap contributes a factor of -1.
    /// The 0x0 determinant is 1.
    pub fn det(&self) -> Result<FieldElement, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut m = self.clone();
        let (pivots, factor) = m.eliminate();
        Ok(if pivots.len() == self.rows {
            factor
        } else {
            FieldElement::ZERO
        })
    }

    pub fn inverse(&self) -> Result<GfMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = GfMatrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            aug.row_mut(r)[..n].copy_from_slice(self.row(r));
            aug.data[r * 2 * n + n + r] = FieldElement::ONE;
        }
        let (pivots, _) = aug.eliminate();
        if pivots.len() < n || (n > 0 && pivots[n - 1] >= n) {
            return Err(LinalgError::Singular);
        }
        let mut inv = GfMatrix::zeros(&self.field, n, n);
        for r in 0..n {
            inv.row_mut(r).copy_from_slice(&aug.row(r)[n..]);
        }
        Ok(inv)
    }
}

fn check_index_set(set: &[usize], bound: usize) -> Result<(), LinalgError> {
    if let Some(&bad) = set.iter().find(|&&i| i >= bound) {
        return Err(LinalgError::IndexOutOfRange { index: bad, bound });
    }
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LinalgError::Unsorted);
    }
    Ok(())
}

/// Incrementally maintained row space, used for greedy leader selection.
#[derive(Clone)]
pub(crate) struct RowSpace {
    field: Field,
    /// Reduced rows with their pivot column.
    basis: Vec<(usize, Vec<FieldElement>)>,
}

impl RowSpace {
    pub(crate) fn new(field: &Field) -> Self {
        RowSpace {
            field: field.clone(),
            basis: Vec::new(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Whether `row` lies outside the span, using `scratch` as workspace.
    pub(crate) fn is_independent(
        &self,
        row: &[FieldElement],
        scratch: &mut Vec<FieldElement>,
    ) -> bool {
        let f = &self.field;
        scratch.clear();
        scratch.extend_from_slice(row);
        for (pc, b) in &self.basis {
            let coef = scratch[*pc];
            if !coef.is_zero() {
                f.axpy(scratch, f.neg(coef), b);
            }
        }
        scratch.iter().any(|e| !e.is_zero())
    }

    /// Adds `row` if it is independent of the current basis.
    pub(crate) fn insert(&mut self, row: &[FieldElement]) -> bool {
        let f = &self.field;
        let mut v = row.to_vec();
        for (pc, b) in &self.basis {
            let coef = v[*pc];
            if !coef.is_zero() {
                f.axpy(&mut v, f.neg(coef), b);
            }
        }
        let Some(pc) = v.iter().position(|e| !e.is_zero()) else {
            return false;
        };
        let inv = f.inv(v[pc]).expect("nonzero");
        for e in v.iter_mut() {
            *e = f.mul(*e, inv);
        }
        // keep earlier basis rows reduced at the new pivot
        for (_, b) in self.basis.iter_mut() {
            let coef = b[pc];
            if !coef.is_zero() {
                f.axpy(b, f.neg(coef), &v);
            }
        }
        self.basis.push((pc, v));
        true
    }
}

/// A set of users whose demand rows form a basis of the demand row space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderSet {
    users: Vec<usize>,
    subset: UserSubset,
}

impl LeaderSet {
    /// Validates a caller-chosen leader set: full rank and of size rank(D).
    pub fn from_users(demand: &DemandMatrix, users: &[usize]) -> Result<Self, LinalgError> {
        let mut sorted = users.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let bad = || LinalgError::NotALeaderSet(users.to_vec());
        if sorted.len() != users.len() || sorted.iter().any(|&u| u == 0 || u > demand.rows()) {
            return Err(bad());
        }
        let subset = UserSubset::from_users(&sorted).map_err(|_| bad())?;
        let sub = demand.user_rows(subset)?;
        if sub.rank() != sorted.len() || demand.rank() != sorted.len() {
            return Err(bad());
        }
        Ok(LeaderSet {
            users: sorted,
            subset,
        })
    }

    /// Sorted 1-based leader users; `users()[i - 1]` is the leader with leader index i.
    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn as_subset(&self) -> UserSubset {
        self.subset
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn contains(&self, user: usize) -> bool {
        self.subset.contains(user)
    }

    /// 1-based leader index of `user`.
    pub fn leader_index(&self, user: usize) -> Option<usize> {
        self.subset.position(user)
    }
}

/// Greedy scan in increasing user order: a user becomes a leader iff its
/// row increases the rank of the rows chosen so far.
pub fn select_leaders(demand: &DemandMatrix) -> Result<LeaderSet, LinalgError> {
    if demand.rows() > MAX_USERS {
        return Err(LinalgError::TooManyUsers(demand.rows()));
    }
    let mut space = RowSpace::new(demand.field());
    let users: Vec<usize> = (0..demand.rows())
        .filter(|&r| space.insert(demand.row(r)))
        .map(|r| r + 1)
        .collect();
    let subset = UserSubset::from_users(&users).expect("users within range");
    Ok(LeaderSet { users, subset })
}

/// Solves `x_k · D_L = y_k` for every user, giving the K x |L| transformed
/// demand matrix. Leader rows come out as unit vectors.
pub fn express_in_leader_basis(
    demand: &DemandMatrix,
    leaders: &LeaderSet,
) -> Result<GfMatrix, LinalgError> {
    let f = demand.field();
    let r = leaders.len();
    let k = demand.rows();
    if r == 0 {
        if let Some(row) = (0..k).find(|&row| demand.row(row).iter().any(|e| !e.is_zero())) {
            return Err(LinalgError::Inconsistent(row + 1));
        }
        return Ok(GfMatrix::zeros(f, k, 0));
    }
    let leader_rows = demand.user_rows(leaders.as_subset())?;
    let (pivots, _) = leader_rows.clone().eliminate();
    if pivots.len() != r {
        return Err(LinalgError::NotALeaderSet(leaders.users().to_vec()));
    }
    let all: Vec<usize> = (0..r).collect();
    let square = leader_rows.submatrix(&all, &pivots)?;
    let inv = square.inverse()?;
    let mut out = GfMatrix::zeros(f, k, r);
    for user in 0..k {
        let y = demand.row(user);
        let y_p: Vec<FieldElement> = pivots.iter().map(|&c| y[c]).collect();
        let x = inv.left_mul_vec(&y_p);
        if leader_rows.left_mul_vec(&x) != y {
            return Err(LinalgError::Inconsistent(user + 1));
        }
        out.row_mut(user).copy_from_slice(&x);
    }
    Ok(out)
}

/// A demand matrix together with its leader set and transformed demands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandBasis {
    demand: DemandMatrix,
    leaders: LeaderSet,
    transformed: GfMatrix,
}

impl DemandBasis {
    /// Uses the greedy leader set.
    pub fn new(demand: DemandMatrix) -> Result<Self, LinalgError> {
        let leaders = select_leaders(&demand)?;
        Self::with_leaders(demand, leaders)
    }

    pub fn with_leaders(demand: DemandMatrix, leaders: LeaderSet) -> Result<Self, LinalgError> {
        if demand.rows() > MAX_USERS {
            return Err(LinalgError::TooManyUsers(demand.rows()));
        }
        let transformed = express_in_leader_basis(&demand, &leaders)?;
        Ok(DemandBasis {
            demand,
            leaders,
            transformed,
        })
    }

    pub fn demand(&self) -> &DemandMatrix {
        &self.demand
    }

    pub fn leaders(&self) -> &LeaderSet {
        &self.leaders
    }

    pub fn transformed(&self) -> &GfMatrix {
        &self.transformed
    }

    pub fn field(&self) -> &Field {
        self.demand.field()
    }

    pub fn users(&self) -> usize {
        self.demand.rows()
    }

    pub fn files(&self) -> usize {
        self.demand.cols()
    }

    pub fn rank(&self) -> usize {
        self.leaders.len()
    }

    /// Demand row of a 1-based user.
    pub fn demand_row(&self, user: usize) -> &[FieldElement] {
        self.demand.row(user - 1)
    }

    /// Transformed demand row of a 1-based user.
    pub fn transformed_row(&self, user: usize) -> &[FieldElement] {
        self.transformed.row(user - 1)
    }

    /// Demand row of the leader with 1-based leader index `i`.
    pub fn leader_demand(&self, i: usize) -> &[FieldElement] {
        self.demand_row(self.leaders.users()[i - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::enumerate_permutations;
    use proptest::prelude::*;

    pub(crate) fn example1(f: &Field) -> GfMatrix {
        GfMatrix::from_rows(
            f,
            &[
                [1, 0, 0],
                [0, 1, 0],
                [0, 0, 1],
                [1, 1, 0],
                [1, 0, 1],
                [1, 1, 1],
            ],
        )
        .unwrap()
    }

    /// Leibniz expansion, independent of the elimination path.
    fn det_leibniz(m: &GfMatrix) -> FieldElement {
        let f = m.field();
        let n = m.rows();
        let mut acc = FieldElement::ZERO;
        for perm in enumerate_permutations(n).unwrap() {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| perm[i] > perm[j])
                .count();
            let term = (0..n).fold(f.sign(inversions), |t, i| f.mul(t, m.get(i, perm[i] - 1)));
            acc = f.add(acc, term);
        }
        acc
    }

    fn arb_matrix(max_dim: usize) -> impl Strategy<Value = GfMatrix> {
        (
            prop::sample::select(vec![2u64, 3, 4, 5]),
            0..=max_dim,
            0..=max_dim,
        )
            .prop_flat_map(|(q, r, c)| {
                prop::collection::vec(0u32..q as u32, r * c).prop_map(move |vals| {
                    let f = Field::new(q).unwrap();
                    let data = vals.into_iter().map(|v| f.element(v).unwrap()).collect();
                    GfMatrix::new(&f, r, c, data).unwrap()
                })
            })
    }

    fn arb_square(max_dim: usize) -> impl Strategy<Value = GfMatrix> {
        (prop::sample::select(vec![2u64, 3, 4, 5]), 0..=max_dim).prop_flat_map(|(q, n)| {
            prop::collection::vec(0u32..q as u32, n * n).prop_map(move |vals| {
                let f = Field::new(q).unwrap();
                let data = vals.into_iter().map(|v| f.element(v).unwrap()).collect();
                GfMatrix::new(&f, n, n, data).unwrap()
            })
        })
    }

    #[test]
    fn rank_examples() {
        let f2 = Field::new(2).unwrap();
        assert_eq!(example1(&f2).rank(), 3);
        assert_eq!(GfMatrix::identity(&f2, 5).rank(), 5);
        assert_eq!(GfMatrix::zeros(&f2, 4, 3).rank(), 0);
    }

    #[test]
    fn det_examples() {
        let f = Field::new(7).unwrap();
        let (a, b, c, d) = (3, 5, 2, 6);
        let m = GfMatrix::from_rows(&f, &[[a, b], [c, d]]).unwrap();
        let expected = f.sub(
            f.mul(f.element(a).unwrap(), f.element(d).unwrap()),
            f.mul(f.element(c).unwrap(), f.element(b).unwrap()),
        );
        assert_eq!(m.det().unwrap(), expected);
        let one = GfMatrix::from_rows(&f, &[[4]]).unwrap();
        assert_eq!(one.det().unwrap(), f.element(4).unwrap());
        let f3 = Field::new(3).unwrap();
        let singular = GfMatrix::from_rows(&f3, &[[1, 2], [2, 1]]).unwrap();
        // cofactor expansion: 1*1 - 2*2 = -3 = 0 mod 3
        assert_eq!(singular.det().unwrap(), FieldElement::ZERO);
        assert_eq!(GfMatrix::zeros(&f3, 0, 0).det().unwrap(), FieldElement::ONE);
        assert!(matches!(
            GfMatrix::zeros(&f3, 2, 3).det(),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn submatrix_selection() {
        let f = Field::new(5).unwrap();
        let m = GfMatrix::from_rows(&f, &[[1, 2, 3], [4, 0, 1], [2, 2, 2]]).unwrap();
        let s = m.submatrix(&[0, 2], &[1, 2]).unwrap();
        assert_eq!(s.to_rows(), vec![vec![2, 3], vec![2, 2]]);
        assert_eq!(m.submatrix(&[0, 1, 2], &[0, 1, 2]).unwrap(), m);
        let empty = m.submatrix(&[], &[0, 1, 2]).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (0, 3));
        assert!(matches!(
            m.submatrix(&[3], &[0]),
            Err(LinalgError::IndexOutOfRange { index: 3, bound: 3 })
        ));
        assert_eq!(m.submatrix(&[1, 0], &[0]), Err(LinalgError::Unsorted));
    }

    #[test]
    fn from_rows_validation() {
        let f = Field::new(3).unwrap();
        assert!(matches!(
            GfMatrix::from_rows(&f, &[vec![0, 5]]),
            Err(LinalgError::Range {
                row: 0,
                col: 1,
                value: 5,
                q: 3
            })
        ));
        assert!(matches!(
            GfMatrix::from_rows(&f, &[vec![0, 1], vec![1]]),
            Err(LinalgError::RaggedRow { row: 1, .. })
        ));
    }

    #[test]
    fn leaders_of_examples() {
        let f2 = Field::new(2).unwrap();
        assert_eq!(select_leaders(&example1(&f2)).unwrap().users(), &[1, 2, 3]);
        let f7 = Field::new(7).unwrap();
        let d2 = GfMatrix::from_rows(
            &f7,
            &[[1, 0, 0], [0, 1, 0], [0, 0, 1], [3, 4, 5], [6, 1, 2]],
        )
        .unwrap();
        assert_eq!(select_leaders(&d2).unwrap().users(), &[1, 2, 3]);
        let same = GfMatrix::from_rows(&f7, &[[2, 3], [2, 3], [2, 3]]).unwrap();
        assert_eq!(select_leaders(&same).unwrap().users(), &[1]);
        let zero = GfMatrix::zeros(&f7, 3, 2);
        assert!(select_leaders(&zero).unwrap().is_empty());
    }

    #[test]
    fn explicit_leader_sets_are_validated() {
        let f2 = Field::new(2).unwrap();
        let d = example1(&f2);
        assert!(LeaderSet::from_users(&d, &[4, 5, 6]).is_ok());
        // rows 1, 2, 4 are dependent over GF(2)
        assert!(LeaderSet::from_users(&d, &[1, 2, 4]).is_err());
        assert!(LeaderSet::from_users(&d, &[1, 2]).is_err());
        assert!(LeaderSet::from_users(&d, &[1, 2, 7]).is_err());
    }

    #[test]
    fn transformed_demands_for_identity_leaders() {
        let f7 = Field::new(7).unwrap();
        let d = GfMatrix::from_rows(
            &f7,
            &[[1, 0, 0], [0, 1, 0], [0, 0, 1], [3, 4, 5], [6, 1, 2]],
        )
        .unwrap();
        let basis = DemandBasis::new(d.clone()).unwrap();
        assert_eq!(basis.transformed(), &d);
        assert_eq!(
            basis.transformed_row(2),
            &[FieldElement::ZERO, FieldElement::ONE, FieldElement::ZERO]
        );
    }

    #[test]
    fn transformed_demand_of_sum() {
        let f3 = Field::new(3).unwrap();
        let d = GfMatrix::from_rows(
            &f3,
            &[[1, 2, 0, 1], [0, 1, 1, 2], [2, 0, 1, 1], [1, 0, 1, 0]],
        )
        .unwrap();
        let basis = DemandBasis::new(d).unwrap();
        assert_eq!(basis.leaders().users(), &[1, 2, 3]);
        let x = basis.transformed_row(4);
        assert_eq!(
            x.iter().map(|e| e.value()).collect::<Vec<_>>(),
            vec![1, 1, 0]
        );
    }

    #[test]
    fn inconsistent_leader_basis_is_reported() {
        let f2 = Field::new(2).unwrap();
        let d = example1(&f2);
        let partial = GfMatrix::from_rows(&f2, &[[1, 0, 0], [0, 1, 0]]).unwrap();
        let l = LeaderSet::from_users(&partial, &[1, 2]).unwrap();
        assert_eq!(
            express_in_leader_basis(&d, &l),
            Err(LinalgError::Inconsistent(3))
        );
    }

    proptest! {
        #[test]
        fn rank_transpose_invariant(m in arb_matrix(5)) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn rank_invariant_under_row_ops(m in arb_matrix(5), a in 0usize..5, b in 0usize..5, s in any::<u32>()) {
            if m.rows() == 0 {
                return Ok(());
            }
            let (a, b) = (a % m.rows(), b % m.rows());
            let f = m.field().clone();
            let mut swapped = m.clone();
            let (ra, rb) = (m.row(a).to_vec(), m.row(b).to_vec());
            swapped.row_mut(a).copy_from_slice(&rb);
            swapped.row_mut(b).copy_from_slice(&ra);
            prop_assert_eq!(swapped.rank(), m.rank());
            let scale = f.element(1 + s % (f.order() - 1)).unwrap();
            let mut scaled = m.clone();
            for v in scaled.row_mut(a) {
                *v = f.mul(*v, scale);
            }
            prop_assert_eq!(scaled.rank(), m.rank());
        }

        #[test]
        fn det_matches_leibniz(m in arb_square(4)) {
            prop_assert_eq!(m.det().unwrap(), det_leibniz(&m));
            prop_assert_eq!(!m.det().unwrap().is_zero(), m.rank() == m.rows());
        }

        #[test]
        fn leader_basis_reproduces_demands(m in arb_matrix(6)) {
            let basis = DemandBasis::new(m.clone()).unwrap();
            prop_assert_eq!(basis.rank(), m.rank());
            let dl = m.user_rows(basis.leaders().as_subset()).unwrap();
            prop_assert_eq!(basis.transformed().mul(&dl).unwrap(), m.clone());
            for (i, &u) in basis.leaders().users().iter().enumerate() {
                let row = basis.transformed_row(u);
                for (j, e) in row.iter().enumerate() {
                    prop_assert_eq!(*e, if i == j { FieldElement::ONE } else { FieldElement::ZERO });
                }
            }
        }

        #[test]
        fn greedy_leaders_are_lexicographically_smallest(m in arb_matrix(5)) {
            let greedy = select_leaders(&m).unwrap();
            let r = m.rank();
            let first_valid = crate::combinat::subsets(m.rows(), r)
                .map(|s| s.to_vec())
                .filter(|users| LeaderSet::from_users(&m, users).is_ok())
                .min();
            prop_assert_eq!(Some(greedy.users().to_vec()), first_valid);
        }
    }
}
