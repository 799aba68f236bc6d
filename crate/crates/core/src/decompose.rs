//! From a real symplectic class to weighted integral classes.
//!
//! The class `b` is written as a convex combination of nearby grid points of
//! `(ℤ/q)^n` (the vertices of the Kuhn simplex of the grid cell containing
//! `b`). Each vertex is scaled to an integral class `k_j b^j`, giving
//! weights `a_j = λ_j / k_j`, and linear dependences between the resulting
//! classes are eliminated one relation at a time while keeping every weight
//! nonnegative.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{CohomologyClass, LatticeModel, Rational};
use crate::linalg;
use crate::rational::{serde_str, serde_vec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarycentricDecomposition {
    pub vertices: Vec<CohomologyClass>,
    #[serde(with = "serde_vec")]
    pub weights: Vec<Rational>,
    pub grid_denominator: u64,
}

impl BarycentricDecomposition {
    pub fn barycenter(&self) -> CohomologyClass {
        let rank = self.vertices.first().map_or(0, CohomologyClass::len);
        CohomologyClass::weighted_sum(rank, &self.weights, &self.vertices)
            .expect("vertices share one length")
    }

    /// Largest max-norm distance from `b` to a vertex.
    pub fn max_distance(&self, b: &CohomologyClass) -> Rational {
        self.vertices
            .iter()
            .map(|v| v.distance(b).expect("same length"))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Kuhn (Freudenthal) simplex of the `1/q` grid cell containing `b`.
///
/// With `x = q·b = floor(x) + f`, the coordinates are visited in order of
/// decreasing fractional part (ties by ascending index) and incremented one
/// at a time. Consecutive differences of the sorted fractional parts are the
/// barycentric weights; zero-weight vertices are dropped.
pub fn kuhn_simplex(b: &CohomologyClass, q: u64) -> Result<BarycentricDecomposition> {
    if q == 0 {
        return Err(Error::InvalidInput("grid denominator q must be positive".into()));
    }
    let qr = Rational::from_integer(BigInt::from(q));
    let scaled: Vec<Rational> = b.coords.iter().map(|c| c * &qr).collect();
    let mut base: Vec<BigInt> = scaled.iter().map(|x| x.floor().to_integer()).collect();
    let frac: Vec<Rational> = scaled
        .iter()
        .zip(&base)
        .map(|(x, fl)| x - Rational::from_integer(fl.clone()))
        .collect();

    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&i, &j| frac[j].cmp(&frac[i]).then(i.cmp(&j)));

    let to_vertex = |grid: &[BigInt]| {
        CohomologyClass::new(
            grid.iter()
                .map(|g| Rational::new(g.clone(), BigInt::from(q)))
                .collect(),
        )
    };

    let mut vertices = Vec::new();
    let mut weights = Vec::new();
    let mut previous = Rational::one();
    for step in 0..=order.len() {
        let next = order.get(step).map_or_else(Rational::zero, |&i| frac[i].clone());
        let weight = &previous - &next;
        if !weight.is_zero() {
            vertices.push(to_vertex(&base));
            weights.push(weight);
        }
        if let Some(&i) = order.get(step) {
            base[i] += 1;
        }
        previous = next;
    }
    Ok(BarycentricDecomposition { vertices, weights, grid_denominator: q })
}

/// Least `k > 0` with `k·c` integral, and `k·c`.
pub fn clear_denominators(c: &CohomologyClass) -> (BigInt, CohomologyClass) {
    let k = c
        .coords
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled = c.scaled(&Rational::from_integer(k.clone()));
    (k, scaled)
}

/// One elimination performed by [`reduce_dependent`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Elimination {
    /// Index of the removed class in the list as it stood before this step.
    pub removed: usize,
    #[serde(with = "serde_vec")]
    pub relation: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reduction {
    pub classes: Vec<CohomologyClass>,
    #[serde(with = "serde_vec")]
    pub weights: Vec<Rational>,
    pub eliminations: Vec<Elimination>,
}

/// Removes linear dependences from `Σ a_i σ_i` without changing the sum.
///
/// For a relation `Σ λ_i σ_i = 0`, the class `σ_N` minimizing `|a_N / λ_N|`
/// among `λ_N ≠ 0` is substituted away and the others get
/// `a_i ← a_i − (λ_i / λ_N) a_N`, which stays nonnegative by minimality.
/// Ties prefer the larger `|λ_N|`, then the smaller index. The relation used
/// is the first kernel vector of the reduced echelon form.
pub fn reduce_dependent(classes: &[CohomologyClass], weights: &[Rational]) -> Result<Reduction> {
    if classes.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: classes.len(), found: weights.len() });
    }
    if let Some(first) = classes.first() {
        if let Some(bad) = classes.iter().find(|c| c.len() != first.len()) {
            return Err(Error::DimensionMismatch { expected: first.len(), found: bad.len() });
        }
    }
    if let Some(i) = weights.iter().position(Signed::is_negative) {
        return Err(Error::InvalidInput(format!("weight {i} is negative")));
    }

    let mut classes = classes.to_vec();
    let mut weights = weights.to_vec();
    let mut eliminations = Vec::new();
    while let Some(relation) = linalg::relations(&classes).into_iter().next() {
        let n = pick_eliminated(&relation, &weights);
        let lambda_n = relation[n].clone();
        let a_n = weights[n].clone();
        for (i, w) in weights.iter_mut().enumerate() {
            if i != n {
                *w -= &relation[i] / &lambda_n * &a_n;
            }
        }
        classes.remove(n);
        weights.remove(n);
        eliminations.push(Elimination { removed: n, relation });
    }
    Ok(Reduction { classes, weights, eliminations })
}

fn pick_eliminated(relation: &[Rational], weights: &[Rational]) -> usize {
    let key = |i: usize| ((&weights[i] / &relation[i]).abs(), relation[i].abs());
    (0..relation.len())
        .filter(|&i| !relation[i].is_zero())
        .min_by(|&i, &j| {
            let (ri, li) = key(i);
            let (rj, lj) = key(j);
            ri.cmp(&rj)
                .then_with(|| lj.cmp(&li))
                .then(i.cmp(&j))
        })
        .expect("a kernel vector has a nonzero entry")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarizationSketch {
    /// Integral classes, candidate Poincaré duals of the polarization curves.
    pub classes: Vec<CohomologyClass>,
    #[serde(with = "serde_vec")]
    pub weights: Vec<Rational>,
    /// `k_j` of the grid vertex each class came from.
    #[serde(serialize_with = "serialize_bigints")]
    pub clearing_factors: Vec<BigInt>,
}

fn serialize_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

/// Full output of [`synthesize_polarization`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Synthesis {
    pub barycentric: BarycentricDecomposition,
    pub reduction: Reduction,
    pub sketch: PolarizationSketch,
    /// Max-norm distance from `[omega]` to the farthest grid vertex (at most `1/q`).
    #[serde(with = "serde_str")]
    pub max_distance: Rational,
    /// `S_i · S_j` for `i < j`, row by row. Positivity is reported, not enforced.
    #[serde(with = "serde_vec")]
    pub pairwise_intersections: Vec<Rational>,
    pub intersections_nonnegative: bool,
}

pub fn synthesize_polarization(model: &LatticeModel, q: u64) -> Result<Synthesis> {
    let omega = model.omega();
    let barycentric = kuhn_simplex(omega, q)?;

    let mut classes = Vec::new();
    let mut weights = Vec::new();
    let mut factors = Vec::new();
    for (vertex, lambda) in barycentric.vertices.iter().zip(&barycentric.weights) {
        let (k, integral) = clear_denominators(vertex);
        weights.push(lambda / Rational::from_integer(k.clone()));
        classes.push(integral);
        factors.push(k);
    }
    let reduction = reduce_dependent(&classes, &weights)?;

    // After reduction the surviving classes are a subset of the originals.
    // Recover their clearing factors and drop classes whose weight reached 0.
    let mut kept_classes = Vec::new();
    let mut kept_weights = Vec::new();
    let mut kept_factors = Vec::new();
    let mut alive: Vec<usize> = (0..classes.len()).collect();
    for e in &reduction.eliminations {
        alive.remove(e.removed);
    }
    for ((class, weight), &orig) in reduction.classes.iter().zip(&reduction.weights).zip(&alive) {
        if weight.is_positive() {
            kept_classes.push(class.clone());
            kept_weights.push(weight.clone());
            kept_factors.push(factors[orig].clone());
        }
    }

    let rank = model.rank();
    let total = CohomologyClass::weighted_sum(rank, &kept_weights, &kept_classes)?;
    if &total != omega {
        return Err(Error::IdentityViolation {
            identity: "sum a_j * class_j = [omega]".into(),
            detail: format!("got {total}, expected {omega}"),
        });
    }

    let mut pairwise = Vec::new();
    for i in 0..kept_classes.len() {
        for j in i + 1..kept_classes.len() {
            pairwise.push(model.pairing(&kept_classes[i], &kept_classes[j])?);
        }
    }
    let nonnegative = pairwise.iter().all(|x| !x.is_negative());
    let max_distance = barycentric.max_distance(omega);
    Ok(Synthesis {
        barycentric,
        reduction,
        sketch: PolarizationSketch {
            classes: kept_classes,
            weights: kept_weights,
            clearing_factors: kept_factors,
        },
        max_distance,
        pairwise_intersections: pairwise,
        intersections_nonnegative: nonnegative,
    })
}
