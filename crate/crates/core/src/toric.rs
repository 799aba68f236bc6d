//! Moment polygons of toric 4-manifolds in coordinates `(R₁, R₂)`.
//!
//! Polygons are exact: vertices are rationals and their volume is the shoelace
//! area. The product field is the toric shadow of the Liouville field
//! `(1 − r₁²)/(2r₁) ∂_r₁ + (μ − r₂²)/(2r₂) ∂_r₂` on `S² × S²`, which in
//! `R_i = r_i²` reads `(area1 − R₁) ∂_R₁ + (area2 − R₂) ∂_R₂`.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{int, ratio, CohomologyClass, LatticeModel, Rational};
use crate::ode;
use crate::packing::{Ellipsoid, PackingReport, Polarization};
use crate::par::{self, Execution};
use crate::rational::{format_rational, serde_str, to_f64};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Point {
    #[serde(with = "serde_str")]
    pub x: Rational,
    #[serde(with = "serde_str")]
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Self { x, y }
    }

    fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    fn add_scaled(&self, d: &Point, t: &Rational) -> Point {
        Point::new(&self.x + &d.x * t, &self.y + &d.y * t)
    }
}

fn cross(u: &Point, v: &Point) -> Rational {
    &u.x * &v.y - &u.y * &v.x
}

/// Convex polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polytope {
    vertices: Vec<Point>,
}

impl Polytope {
    /// Validates strict convexity and counterclockwise order.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolytope(format!("{n} vertices")));
        }
        for i in 0..n {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % n];
            let c = &vertices[(i + 2) % n];
            if !cross(&b.sub(a), &c.sub(b)).is_positive() {
                return Err(Error::InvalidPolytope(format!(
                    "not strictly convex counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Exact shoelace area.
    pub fn area(&self) -> Rational {
        let n = self.vertices.len();
        let twice: Rational = (0..n)
            .map(|i| cross(&self.vertices[i], &self.vertices[(i + 1) % n]))
            .sum();
        twice / int(2)
    }

    /// `(min x, min y, max x, max y)`.
    pub fn bounds(&self) -> (Rational, Rational, Rational, Rational) {
        let first = &self.vertices[0];
        let mut b = (first.x.clone(), first.y.clone(), first.x.clone(), first.y.clone());
        for v in &self.vertices[1..] {
            b.0 = b.0.min(v.x.clone());
            b.1 = b.1.min(v.y.clone());
            b.2 = b.2.max(v.x.clone());
            b.3 = b.3.max(v.y.clone());
        }
        b
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolytopeKind {
    Rectangle { width: Rational, height: Rational },
    EllipsoidTriangle { a: Rational, b: Rational },
    /// Delzant cut of size `size` at vertex `corner`.
    Chop { polytope: Polytope, corner: usize, size: Rational },
}

pub fn build_polytope(kind: PolytopeKind) -> Result<Polytope> {
    let zero = Rational::zero;
    match kind {
        PolytopeKind::Rectangle { width, height } => Polytope::new(vec![
            Point::new(zero(), zero()),
            Point::new(width.clone(), zero()),
            Point::new(width, height.clone()),
            Point::new(zero(), height),
        ]),
        PolytopeKind::EllipsoidTriangle { a, b } => Polytope::new(vec![
            Point::new(zero(), zero()),
            Point::new(a, zero()),
            Point::new(zero(), b),
        ]),
        PolytopeKind::Chop { polytope, corner, size } => chop(&polytope, corner, &size),
    }
}

/// Splits a rational edge vector into a primitive integer direction and its
/// lattice length.
fn primitive_direction(e: &Point) -> Result<(Point, Rational)> {
    let l = e.x.denom().lcm(e.y.denom());
    let x = e.x.numer() * (&l / e.x.denom());
    let y = e.y.numer() * (&l / e.y.denom());
    let g = x.gcd(&y);
    if g.is_zero() {
        return Err(Error::InvalidPolytope("zero-length edge".into()));
    }
    let dir = Point::new(Rational::from_integer(&x / &g), Rational::from_integer(&y / &g));
    let length = Rational::new(g, l);
    Ok((dir, length))
}

fn chop(p: &Polytope, corner: usize, size: &Rational) -> Result<Polytope> {
    let n = p.vertices.len();
    if corner >= n {
        return Err(Error::InvalidPolytope(format!("corner {corner} of {n}")));
    }
    if !size.is_positive() {
        return Err(Error::InvalidPolytope("chop size must be positive".into()));
    }
    let v = &p.vertices[corner];
    let prev = &p.vertices[(corner + n - 1) % n];
    let next = &p.vertices[(corner + 1) % n];
    let (d_prev, len_prev) = primitive_direction(&prev.sub(v))?;
    let (d_next, len_next) = primitive_direction(&next.sub(v))?;
    if !cross(&d_next, &d_prev).abs().is_one() {
        return Err(Error::InvalidPolytope(format!("corner {corner} is not smooth")));
    }
    if size > &len_prev || size > &len_next {
        return Err(Error::InvalidPolytope(format!(
            "chop size {} exceeds an edge at corner {corner} (lattice lengths {}, {})",
            format_rational(size),
            format_rational(&len_prev),
            format_rational(&len_next)
        )));
    }
    let mut out: Vec<Point> = Vec::with_capacity(n + 1);
    for (i, w) in p.vertices.iter().enumerate() {
        if i == corner {
            out.push(v.add_scaled(&d_prev, size));
            out.push(v.add_scaled(&d_next, size));
        } else {
            out.push(w.clone());
        }
    }
    // A cut of full edge length lands on the neighbouring vertex.
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    Polytope::new(out)
}

/// The toric product field `(area1 − R₁, area2 − R₂)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToricField {
    #[serde(with = "serde_str")]
    pub area1: Rational,
    #[serde(with = "serde_str")]
    pub area2: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinLabel {
    /// Flows back to the edge `{R₂ = 0}`.
    Sigma1,
    /// Flows back to the edge `{R₁ = 0}`.
    Sigma2,
    Separatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub analytic: BasinLabel,
    pub integrated: BasinLabel,
    /// `R₂·area1 − R₁·area2` in binary64.
    pub margin: f64,
}

pub const BASIN_DT: f64 = 1e-3;
pub const EDGE_TOLERANCE: f64 = 1e-6;
const MAX_BACKWARD_STEPS: usize = 10_000_000;

impl ToricField {
    pub fn new(area1: Rational, area2: Rational) -> Result<Self> {
        if !area1.is_positive() || !area2.is_positive() {
            return Err(Error::InvalidInput("toric field needs positive areas".into()));
        }
        Ok(Self { area1, area2 })
    }

    /// The field of `S² × S²` with areas `1` and `mu`.
    pub fn product(mu: Rational) -> Result<Self> {
        Self::new(int(1), mu)
    }

    pub fn velocity(&self, x: &[f64; 2]) -> [f64; 2] {
        [to_f64(&self.area1) - x[0], to_f64(&self.area2) - x[1]]
    }

    pub fn rectangle(&self) -> Polytope {
        build_polytope(PolytopeKind::Rectangle {
            width: self.area1.clone(),
            height: self.area2.clone(),
        })
        .expect("positive sides")
    }

    /// Exact label from the sign of `R₂·area1 − R₁·area2`.
    pub fn analytic_label(&self, r1: &Rational, r2: &Rational) -> BasinLabel {
        let s = r2 * &self.area1 - r1 * &self.area2;
        if s.is_negative() {
            BasinLabel::Sigma1
        } else if s.is_positive() {
            BasinLabel::Sigma2
        } else {
            BasinLabel::Separatrix
        }
    }

    /// Label from integrating backward with RK4 until a coordinate comes
    /// within the edge tolerance of zero.
    pub fn integrated_label(&self, x0: [f64; 2]) -> BasinLabel {
        let (a1, a2) = (to_f64(&self.area1), to_f64(&self.area2));
        let f = |y: &[f64; 2]| [a1 - y[0], a2 - y[1]];
        let mut y = x0;
        for _ in 0..MAX_BACKWARD_STEPS {
            if y[0] <= EDGE_TOLERANCE || y[1] <= EDGE_TOLERANCE {
                break;
            }
            y = ode::rk4_step(&f, y, -BASIN_DT);
        }
        let (n1, n2) = (y[0] / a1, y[1] / a2);
        if n2 < n1 {
            BasinLabel::Sigma1
        } else if n1 < n2 {
            BasinLabel::Sigma2
        } else {
            BasinLabel::Separatrix
        }
    }

    pub fn classify(&self, r1: &Rational, r2: &Rational) -> Result<Classification> {
        let inside = r1.is_positive() && r2.is_positive() && r1 < &self.area1 && r2 < &self.area2;
        if !inside {
            return Err(Error::OutOfDomain(format!(
                "({}, {}) is not in the open rectangle",
                format_rational(r1),
                format_rational(r2)
            )));
        }
        let margin = to_f64(&(r2 * &self.area1 - r1 * &self.area2));
        Ok(Classification {
            analytic: self.analytic_label(r1, r2),
            integrated: self.integrated_label([to_f64(r1), to_f64(r2)]),
            margin,
        })
    }

    /// Euclidean distance from the separatrix `R₂·area1 = R₁·area2`.
    pub fn separatrix_distance(&self, x: &[f64; 2]) -> f64 {
        let (a1, a2) = (to_f64(&self.area1), to_f64(&self.area2));
        (x[1] * a1 - x[0] * a2).abs() / a1.hypot(a2)
    }

    /// Max distance from the separatrix along forward RK4 trajectories
    /// started at `points` evenly spaced points of the open diagonal.
    pub fn separatrix_drift(&self, points: usize, t_end: f64, dt: f64, exec: Execution) -> f64 {
        let (a1, a2) = (to_f64(&self.area1), to_f64(&self.area2));
        let f = |y: &[f64; 2]| [a1 - y[0], a2 - y[1]];
        let drifts = par::map_indexed(points, exec, |k| {
            let s = (k as f64 + 1.0) / (points as f64 + 1.0);
            let steps = (t_end / dt).ceil().max(1.0) as usize;
            let h = t_end / steps as f64;
            let mut y = [s * a1, s * a2];
            let mut worst = self.separatrix_distance(&y);
            for _ in 0..steps {
                y = ode::rk4_step(&f, y, h);
                worst = worst.max(self.separatrix_distance(&y));
            }
            worst
        });
        drifts.into_iter().fold(0.0, f64::max)
    }

    /// Areas of the two basin triangles below and above the separatrix.
    pub fn basin_areas(&self) -> (Rational, Rational) {
        let half = &self.area1 * &self.area2 / int(2);
        (half.clone(), half)
    }

    /// The basins as polygons: below the diagonal (`Σ₁`) and above (`Σ₂`).
    pub fn basin_polygons(&self) -> (Polytope, Polytope) {
        let o = Point::new(Rational::zero(), Rational::zero());
        let corner = Point::new(self.area1.clone(), self.area2.clone());
        let below = Polytope::new(vec![
            o.clone(),
            Point::new(self.area1.clone(), Rational::zero()),
            corner.clone(),
        ])
        .expect("positive areas");
        let above =
            Polytope::new(vec![o, corner, Point::new(Rational::zero(), self.area2.clone())])
                .expect("positive areas");
        (below, above)
    }
}

/// The product case `S² × S²` with areas `1` and `mu`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductReport {
    pub field: ToricField,
    pub polytope: Polytope,
    #[serde(with = "serde_str")]
    pub polytope_area: Rational,
    #[serde(with = "serde_str")]
    pub basin_area_1: Rational,
    #[serde(with = "serde_str")]
    pub basin_area_2: Rational,
    pub basins_fill_rectangle: bool,
    /// The ellipsoid `E(1, mu)` each basin is compared with.
    pub ellipsoid: Ellipsoid,
    pub basin_matches_ellipsoid: bool,
    pub packing: PackingReport,
    pub packing_matches_basins: bool,
}

pub fn product_report(mu: &Rational) -> Result<ProductReport> {
    let field = ToricField::product(mu.clone())?;
    let polytope = field.rectangle();
    let polytope_area = polytope.area();
    let (b1, b2) = field.basin_areas();
    let ellipsoid = Ellipsoid::new(int(1), mu.clone());
    let model = LatticeModel::sphere_product(mu.clone());
    let packing =
        Polarization::from_model_curves(&model, vec![int(1), mu.clone()], Rational::zero())?
            .packing_report()?;
    let mut pieces = packing.piece_volumes.clone();
    pieces.sort();
    Ok(ProductReport {
        basins_fill_rectangle: &b1 + &b2 == polytope_area,
        basin_matches_ellipsoid: b1 == ellipsoid.volume() && b2 == ellipsoid.volume(),
        packing_matches_basins: pieces == vec![b1.clone(), b2.clone()],
        field,
        polytope,
        polytope_area,
        basin_area_1: b1,
        basin_area_2: b2,
        ellipsoid,
        packing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Piece {
    pub label: String,
    pub ellipsoid: Ellipsoid,
    #[serde(with = "serde_str")]
    pub volume: Rational,
}

/// Packing of `ℙ²` by `B(μ) ⊔ E(3 − 2μ, 1/3) ⊔ E(μ, 2/3 − μ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicReport {
    #[serde(with = "serde_str")]
    pub mu: Rational,
    /// `ℓ − μe = (1/3)(3ℓ − 2e) + (2/3 − μ)e`.
    pub identity: String,
    pub identity_holds: bool,
    pub pieces: Vec<Piece>,
    #[serde(with = "serde_str")]
    pub total_volume: Rational,
    #[serde(with = "serde_str")]
    pub plane_volume: Rational,
    pub total_matches: bool,
    /// Triangle of `ℙ²` with the corner at the origin chopped by `μ`.
    pub blowup_polytope: Polytope,
    #[serde(with = "serde_str")]
    pub blowup_area: Rational,
    pub blowup_area_matches: bool,
}

pub fn unit_triangle() -> Polytope {
    build_polytope(PolytopeKind::EllipsoidTriangle { a: int(1), b: int(1) })
        .expect("unit triangle")
}

pub fn cubic_pipeline(mu: &Rational) -> Result<CubicReport> {
    if !mu.is_positive() || mu >= &ratio(2, 3) {
        return Err(Error::OutOfRange(format!(
            "cubic packing needs 0 < mu < 2/3, got {}",
            format_rational(mu)
        )));
    }
    let model = LatticeModel::cubic_blowup(mu.clone());
    let classes: Vec<CohomologyClass> = model.curves().iter().map(|c| c.class()).collect();
    let weights = vec![ratio(1, 3), ratio(2, 3) - mu];
    let sum = CohomologyClass::weighted_sum(model.rank(), &weights, &classes)?;
    let identity_holds = &sum == model.omega();
    if !identity_holds {
        return Err(Error::IdentityViolation {
            identity: "l - mu e = (1/3)(3l - 2e) + (2/3 - mu)e".into(),
            detail: format!("right side is {sum}"),
        });
    }
    let report = Polarization::new(&model, classes, weights, Rational::zero())?.packing_report()?;

    let ball = Ellipsoid::ball(mu.clone());
    let mut pieces = vec![Piece { label: "B".into(), volume: ball.volume(), ellipsoid: ball }];
    for (curve, e) in model.curves().iter().zip(&report.ellipsoids) {
        pieces.push(Piece { label: curve.name.clone(), volume: e.volume(), ellipsoid: e.clone() });
    }
    let total_volume: Rational = pieces.iter().map(|p| &p.volume).sum();
    let plane_volume = LatticeModel::projective_plane().symplectic_volume();

    let blowup_polytope = build_polytope(PolytopeKind::Chop {
        polytope: unit_triangle(),
        corner: 0,
        size: mu.clone(),
    })?;
    let blowup_area = blowup_polytope.area();
    Ok(CubicReport {
        mu: mu.clone(),
        identity: format!(
            "l - {}e = (1/3)(3l - 2e) + ({})e",
            format_rational(mu),
            format_rational(&(ratio(2, 3) - mu))
        ),
        identity_holds,
        pieces,
        total_matches: total_volume == plane_volume,
        total_volume,
        plane_volume,
        blowup_area_matches: blowup_area == model.symplectic_volume(),
        blowup_polytope,
        blowup_area,
    })
}

/// Lattice length of the segment `from → to`.
pub fn lattice_length(from: &Point, to: &Point) -> Result<Rational> {
    primitive_direction(&to.sub(from)).map(|(_, l)| l)
}
