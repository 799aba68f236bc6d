//! Degree-2 lattices with an integral intersection form.
//!
//! Homology and cohomology classes share one coordinate vector: Poincaré
//! duality is the identity on coordinates and every pairing goes through the
//! intersection matrix `Q`. The area of a curve class `c` is therefore
//! `omegaᵀ Q c` and the volume of the manifold is `omegaᵀ Q omega / 2`
//! (capacity normalization: the unit ball has capacity 1 and volume 1/2).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, serde_vec};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A coordinate vector of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CohomologyClass {
    #[serde(with = "serde_vec")]
    pub coords: Vec<Rational>,
}

impl CohomologyClass {
    pub fn new(coords: Vec<Rational>) -> Self {
        Self { coords }
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        Self::new(coords.iter().copied().map(int).collect())
    }

    pub fn zero(rank: usize) -> Self {
        Self::new(vec![Rational::zero(); rank])
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self::new(self.coords.iter().map(|c| c * factor).collect())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self::new(
            self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        ))
    }

    /// `Σ weights[i] · classes[i]`.
    pub fn weighted_sum(rank: usize, weights: &[Rational], classes: &[Self]) -> Result<Self> {
        check_len(weights.len(), classes.len())?;
        let mut acc = vec![Rational::zero(); rank];
        for (w, c) in weights.iter().zip(classes) {
            check_len(rank, c.len())?;
            for (slot, x) in acc.iter_mut().zip(&c.coords) {
                *slot += w * x;
            }
        }
        Ok(Self::new(acc))
    }

    /// Max-norm distance.
    pub fn distance(&self, other: &Self) -> Result<Rational> {
        check_len(self.len(), other.len())?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| num_traits::Signed::abs(&(a - b)))
            .max()
            .unwrap_or_else(Rational::zero))
    }
}

impl fmt::Display for CohomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Symmetric integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionForm {
    rows: Vec<Vec<i64>>,
}

impl IntersectionForm {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("intersection form has rank 0".into()));
        }
        for row in &rows {
            check_len(n, row.len())?;
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate().take(i) {
                if *x != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "intersection form is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let n = entries.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { entries[i] } else { 0 }).collect())
            .collect();
        Self { rows }
    }

    /// The hyperbolic plane `[[0, 1], [1, 0]]`.
    pub fn hyperbolic() -> Self {
        Self { rows: vec![vec![0, 1], vec![1, 0]] }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }
}

/// `uᵀ Q v`, exactly.
pub fn pairing(u: &CohomologyClass, v: &CohomologyClass, q: &IntersectionForm) -> Result<Rational> {
    check_len(q.rank(), u.len())?;
    check_len(q.rank(), v.len())?;
    let mut total = Rational::zero();
    for (i, ui) in u.coords.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        let mut row = Rational::zero();
        for (j, vj) in v.coords.iter().enumerate() {
            let qij = q.entry(i, j);
            if qij != 0 {
                row += vj * int(qij);
            }
        }
        total += ui * row;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    pub name: String,
    pub class: Vec<i64>,
}

impl Curve {
    pub fn class(&self) -> CohomologyClass {
        CohomologyClass::from_integers(&self.class)
    }
}

/// A closed symplectic 4-manifold seen through H²: basis names, intersection
/// form, the symplectic class and a list of named curve classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeModel {
    basis_names: Vec<String>,
    intersection: IntersectionForm,
    omega: CohomologyClass,
    curves: Vec<Curve>,
}

impl LatticeModel {
    pub fn new(
        basis_names: Vec<String>,
        intersection: IntersectionForm,
        omega: CohomologyClass,
        curves: Vec<Curve>,
    ) -> Result<Self> {
        let rank = intersection.rank();
        check_len(rank, basis_names.len())?;
        check_len(rank, omega.len())?;
        for curve in &curves {
            check_len(rank, curve.class.len())?;
        }
        Ok(Self { basis_names, intersection, omega, curves })
    }

    /// `ℙ²` with the line class normalized to area 1.
    pub fn projective_plane() -> Self {
        Self::new(
            vec!["L".into()],
            IntersectionForm::diagonal(&[1]),
            CohomologyClass::from_integers(&[1]),
            vec![Curve { name: "L".into(), class: vec![1] }],
        )
        .expect("static model is well formed")
    }

    /// `S² × S²` with sphere areas `1` and `mu`. Basis `(S1, S2)` with the
    /// hyperbolic form and `omega = S1 + mu·S2`, so `area(S1) = mu` and
    /// `area(S2) = 1`.
    pub fn sphere_product(mu: Rational) -> Self {
        Self::new(
            vec!["S1".into(), "S2".into()],
            IntersectionForm::hyperbolic(),
            CohomologyClass::new(vec![int(1), mu]),
            vec![
                Curve { name: "S1".into(), class: vec![1, 0] },
                Curve { name: "S2".into(), class: vec![0, 1] },
            ],
        )
        .expect("static model is well formed")
    }

    /// One-point blow-up of `ℙ²` at a ball of capacity `mu`, carrying the
    /// strict transform `C = 3L − 2E` of a nodal cubic and the exceptional
    /// curve `E`. Basis `(L, E)`, `Q = diag(1, −1)`, `omega = L − mu·E`.
    pub fn cubic_blowup(mu: Rational) -> Self {
        Self::new(
            vec!["L".into(), "E".into()],
            IntersectionForm::diagonal(&[1, -1]),
            CohomologyClass::new(vec![int(1), -mu]),
            vec![
                Curve { name: "C".into(), class: vec![3, -2] },
                Curve { name: "E".into(), class: vec![0, 1] },
            ],
        )
        .expect("static model is well formed")
    }

    pub fn rank(&self) -> usize {
        self.intersection.rank()
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    pub fn intersection(&self) -> &IntersectionForm {
        &self.intersection
    }

    pub fn omega(&self) -> &CohomologyClass {
        &self.omega
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }

    pub fn pairing(&self, u: &CohomologyClass, v: &CohomologyClass) -> Result<Rational> {
        pairing(u, v, &self.intersection)
    }

    /// `omegaᵀ Q omega / 2`.
    pub fn symplectic_volume(&self) -> Rational {
        pairing(&self.omega, &self.omega, &self.intersection)
            .expect("omega length checked at construction")
            / int(2)
    }

    /// Symplectic area `[omega]·c` of a curve class.
    pub fn omega_area(&self, c: &CohomologyClass) -> Result<Rational> {
        pairing(&self.omega, c, &self.intersection)
    }

    pub fn from_file(file: &ManifoldFile) -> Result<Self> {
        let rank = file.intersection.len();
        if file.basis.len() != rank {
            return Err(Error::DimensionMismatch { expected: rank, found: file.basis.len() });
        }
        Self::new(
            file.basis.clone(),
            IntersectionForm::new(file.intersection.clone())?,
            CohomologyClass::new(file.omega.clone()),
            file.curves
                .iter()
                .map(|c| Curve { name: c.name.clone(), class: c.class.clone() })
                .collect(),
        )
    }

    pub fn to_file(&self) -> ManifoldFile {
        ManifoldFile {
            basis: self.basis_names.clone(),
            intersection: self.intersection.rows().to_vec(),
            omega: self.omega.coords.clone(),
            curves: self
                .curves
                .iter()
                .map(|c| CurveEntry { name: c.name.clone(), class: c.class.clone() })
                .collect(),
        }
    }
}

/// On-disk manifold description.
///
/// ```json
/// { "basis": ["L", "E"], "intersection": [[1, 0], [0, -1]],
///   "omega": ["1", "-1/2"],
///   "curves": [{"name": "C", "class": [3, -2]}, {"name": "E", "class": [0, 1]}] }
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldFile {
    pub basis: Vec<String>,
    pub intersection: Vec<Vec<i64>>,
    #[serde(with = "serde_vec")]
    pub omega: Vec<Rational>,
    #[serde(default)]
    pub curves: Vec<CurveEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub name: String,
    pub class: Vec<i64>,
}
