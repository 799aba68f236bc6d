//! Exact linear algebra over ℚ: reduced row echelon form, rank and kernels.

use num_traits::{One, Zero};

use crate::lattice::{CohomologyClass, Rational};

/// Reduced row echelon form of a dense matrix, with its pivot columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Echelon {
    pub rows: Vec<Vec<Rational>>,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl Echelon {
    pub fn compute(matrix: &[Vec<Rational>], cols: usize) -> Self {
        let mut rows: Vec<Vec<Rational>> = matrix.to_vec();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for col in 0..cols {
            let Some(found) = (lead..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(lead, found);
            let inv = Rational::one() / &rows[lead][col];
            for x in rows[lead].iter_mut() {
                *x *= &inv;
            }
            let pivot_row = rows[lead].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == lead || row[col].is_zero() {
                    continue;
                }
                let factor = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &factor * p;
                }
            }
            pivots.push(col);
            lead += 1;
            if lead == rows.len() {
                break;
            }
        }
        Self { rows, pivots, cols }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// One kernel vector per free column, in ascending order of the free
    /// column. Each has a 1 at its free column.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let free = (0..self.cols).filter(|c| !self.pivots.contains(c));
        free.map(|f| {
            let mut v = vec![Rational::zero(); self.cols];
            v[f] = Rational::one();
            for (row, &p) in self.pivots.iter().enumerate() {
                v[p] = -self.rows[row][f].clone();
            }
            v
        })
        .collect()
    }
}

/// Matrix whose columns are the given classes (rows = coordinates).
pub fn columns_matrix(classes: &[CohomologyClass], dim: usize) -> Vec<Vec<Rational>> {
    (0..dim)
        .map(|i| classes.iter().map(|c| c.coords[i].clone()).collect())
        .collect()
}

/// Exact rank of a family of classes.
pub fn rank_of(classes: &[CohomologyClass]) -> usize {
    let Some(dim) = classes.first().map(CohomologyClass::len) else {
        return 0;
    };
    Echelon::compute(&columns_matrix(classes, dim), classes.len()).rank()
}

/// Basis of `{λ : Σ λ_i classes_i = 0}`, in reduced echelon order.
pub fn relations(classes: &[CohomologyClass]) -> Vec<Vec<Rational>> {
    let Some(dim) = classes.first().map(CohomologyClass::len) else {
        return Vec::new();
    };
    Echelon::compute(&columns_matrix(classes, dim), classes.len()).kernel_basis()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ratio;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn cls(v: &[i64]) -> CohomologyClass {
        CohomologyClass::from_integers(v)
    }

    #[test]
    fn rank_and_relations() {
        let classes = [cls(&[1, 0]), cls(&[-1, 1]), cls(&[0, 1])];
        assert_eq!(rank_of(&classes), 2);
        let rel = relations(&classes);
        assert_eq!(rel.len(), 1);
        let combo = CohomologyClass::weighted_sum(2, &rel[0], &classes).unwrap();
        assert!(combo.is_zero());
        assert_eq!(rel[0][2], ratio(1, 1));
    }

    #[test]
    fn empty_and_zero_columns() {
        assert_eq!(rank_of(&[]), 0);
        assert!(relations(&[]).is_empty());
        let classes = [cls(&[0, 0]), cls(&[2, 3])];
        assert_eq!(rank_of(&classes), 1);
        assert_eq!(relations(&classes), vec![vec![ratio(1, 1), ratio(0, 1)]]);
    }

    /// Integer determinant by fraction-free Bareiss elimination; an
    /// independent route to the rank of a square integer matrix.
    fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
        let n = m.len();
        let mut sign = BigInt::from(1);
        let mut prev = BigInt::from(1);
        for k in 0..n {
            if m[k][k] == BigInt::from(0) {
                let Some(swap) = (k + 1..n).find(|&r| m[r][k] != BigInt::from(0)) else {
                    return BigInt::from(0);
                };
                m.swap(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        sign * &m[n - 1][n - 1]
    }

    proptest! {
        #[test]
        fn square_rank_matches_determinant(entries in proptest::collection::vec(-2i64..3, 9)) {
            let classes: Vec<CohomologyClass> =
                entries.chunks(3).map(cls).collect();
            let m: Vec<Vec<BigInt>> = (0..3)
                .map(|i| classes.iter().map(|c| c.coords[i].numer().clone()).collect())
                .collect();
            let full = bareiss_det(m) != BigInt::from(0);
            prop_assert_eq!(rank_of(&classes) == 3, full);
        }

        #[test]
        fn kernel_vectors_are_relations(entries in proptest::collection::vec(-3i64..4, 12)) {
            let classes: Vec<CohomologyClass> = entries.chunks(3).map(cls).collect();
            let rels = relations(&classes);
            prop_assert_eq!(rels.len() + rank_of(&classes), classes.len());
            for r in rels {
                prop_assert!(CohomologyClass::weighted_sum(3, &r, &classes).unwrap().is_zero());
            }
        }
    }
}
