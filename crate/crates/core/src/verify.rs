//! Invariant suite for the floating-point modules with pinned tolerances.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::{ratio, Rational};
use crate::localmodel::{ChartPoint, DiscBundleChart, ImagePoint};
use crate::par::{self, Execution};
use crate::toric::{BasinLabel, ToricField};

pub const LIOUVILLE_TOL: f64 = 1e-10;
pub const EXACTNESS_TOL: f64 = 1e-6;
pub const EXACTNESS_STEP: f64 = 1e-4;
pub const PULLBACK_TOL: f64 = 1e-8;
pub const PULLBACK_STEP: f64 = 1e-5;
pub const FLOW_TOL: f64 = 1e-6;
pub const FLOW_DT: f64 = 1e-3;
pub const BASIN_MARGIN: f64 = 1e-3;
pub const VOLUME_REL_TOL: f64 = 1e-2;
pub const DRIFT_TOL: f64 = 1e-9;
pub const CLASSIFY_MARGIN: f64 = 1e-6;

pub const GAMMAS: [f64; 3] = [-1.0, 0.0, 0.5];
pub const WEIGHTS: [f64; 3] = [1.0 / 3.0, 1.0, 2.0];

/// Base disc used throughout: `A = 3`, `δ = 1/10`.
pub const BASE_AREA: f64 = 3.0;
pub const DELTA: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub name: String,
    pub samples: usize,
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl InvariantReport {
    fn new(name: &str, samples: usize, max_defect: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            samples,
            max_defect,
            tolerance,
            passed: max_defect <= tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub quasi_random_points: usize,
    pub grid_per_axis: usize,
    pub basin_points: usize,
    pub volume_samples: usize,
    pub separatrix_points: usize,
    pub classify_points: usize,
    pub exec: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            quasi_random_points: 1_000,
            grid_per_axis: 10,
            basin_points: 10_000,
            volume_samples: 1_000_000,
            separatrix_points: 100,
            classify_points: 1_000,
            exec: Execution::Parallel,
        }
    }
}

/// `SINGPACK_SEED`, or 0 when unset or unparsable.
pub fn seed_from_env() -> u64 {
    std::env::var("SINGPACK_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// Radical inverse of `i` in base `b`.
fn halton(mut i: usize, b: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Quasi-random chart point with `P ∈ [0, A)`, `R ∈ [0, 1]`.
fn halton_point(i: usize) -> ChartPoint {
    ChartPoint::new(BASE_AREA * halton(i + 1, 2), halton(i + 1, 3), halton(i + 1, 5), halton(i + 1, 7))
}

fn charts() -> Vec<DiscBundleChart> {
    let mut out = Vec::new();
    for gamma in GAMMAS {
        for a in WEIGHTS {
            out.push(DiscBundleChart::new(a, gamma, BASE_AREA, DELTA).expect("valid chart"));
        }
    }
    out
}

pub fn liouville_identity(cfg: &SuiteConfig) -> Result<InvariantReport> {
    let mut worst = 0.0f64;
    for c in charts() {
        let d = par::map_indexed(cfg.quasi_random_points, cfg.exec, |i| c.liouville_defect(&halton_point(i)));
        for x in d {
            worst = worst.max(x?);
        }
    }
    Ok(InvariantReport::new("liouville_identity", 9 * cfg.quasi_random_points, worst, LIOUVILLE_TOL))
}

pub fn exactness(cfg: &SuiteConfig) -> Result<InvariantReport> {
    let mut worst = 0.0f64;
    for c in charts() {
        let d = par::map_indexed(cfg.quasi_random_points, cfg.exec, |i| {
            c.exactness_defect(&halton_point(i), EXACTNESS_STEP)
        });
        for x in d {
            worst = worst.max(x?);
        }
    }
    Ok(InvariantReport::new("exactness", 9 * cfg.quasi_random_points, worst, EXACTNESS_TOL))
}

/// Grid of `n⁴` points kept one step away from `P = 0` and `R ∈ {0, 1}`.
fn grid_point(idx: usize, n: usize) -> ChartPoint {
    let t = |k: usize| (k as f64 + 0.5) / n as f64;
    let (i, j, k, l) = (idx % n, (idx / n) % n, (idx / (n * n)) % n, idx / (n * n * n));
    ChartPoint::new((BASE_AREA - DELTA) * t(i), t(j), t(k), t(l))
}

pub fn pullback(cfg: &SuiteConfig) -> Result<InvariantReport> {
    let n = cfg.grid_per_axis;
    let total = n.pow(4);
    let mut worst = 0.0f64;
    for c in charts() {
        let d = par::map_indexed(total, cfg.exec, |idx| c.pullback_defect(&grid_point(idx, n), PULLBACK_STEP));
        for x in d {
            worst = worst.max(x?);
        }
    }
    Ok(InvariantReport::new("pullback", 9 * total, worst, PULLBACK_TOL))
}

pub fn flow_consistency(_cfg: &SuiteConfig) -> Result<InvariantReport> {
    let mut worst = 0.0f64;
    let mut samples = 0;
    for a in WEIGHTS {
        let c = DiscBundleChart::new(a, 0.5, BASE_AREA, DELTA)?;
        for q in [
            ImagePoint::new(1.0, 0.2, 0.0, 0.4),
            ImagePoint::new(0.3, 0.0, 0.9 * a, 0.0),
            ImagePoint::new(2.5, 0.7, 1.7 * a, 0.1),
        ] {
            for step in 0..=10 {
                let t = 0.5 * step as f64;
                let exact = c.flow_closed_form(&q, t);
                let rk = c.flow_rk4(&q, t, FLOW_DT);
                let d = exact
                    .coords()
                    .iter()
                    .zip(rk.coords())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(d);
                samples += 1;
            }
        }
    }
    Ok(InvariantReport::new("flow_consistency", samples, worst, FLOW_TOL))
}

/// The chart used for the basin and volume checks: `a = 1/3`, `γ = 1/2`.
pub fn basin_chart() -> DiscBundleChart {
    DiscBundleChart::new(1.0 / 3.0, 0.5, BASE_AREA, DELTA).expect("valid chart")
}

/// Fraction of off-margin random image points on which the two membership
/// routes disagree.
pub fn basin_agreement(cfg: &SuiteConfig) -> Result<InvariantReport> {
    let c = basin_chart();
    let ranges = par::chunk_ranges(cfg.basin_points, par::SAMPLING_CHUNKS);
    let counts = par::map_indexed(ranges.len(), cfg.exec, |k| -> Result<(usize, usize)> {
        let mut rng = par::chunk_rng(cfg.seed, k);
        let (mut tested, mut disagree) = (0, 0);
        for _ in ranges[k].clone() {
            let q = ImagePoint::new(
                rng.random::<f64>() * 1.5 * c.shrunk_area(),
                rng.random::<f64>(),
                rng.random::<f64>() * 1.5 * c.a,
                rng.random::<f64>(),
            );
            let m = c.basin_membership(&q)?;
            if (m.level - 1.0).abs() > BASIN_MARGIN {
                tested += 1;
                disagree += usize::from(!m.agree());
            }
        }
        Ok((tested, disagree))
    });
    let (mut tested, mut disagree) = (0, 0);
    for r in counts {
        let (t, d) = r?;
        tested += t;
        disagree += d;
    }
    let fraction = if tested == 0 { 0.0 } else { disagree as f64 / tested as f64 };
    Ok(InvariantReport::new("basin_agreement", tested, fraction, 0.0))
}

pub fn basin_volume(cfg: &SuiteConfig) -> Result<InvariantReport> {
    let mc = basin_chart().basin_volume_mc(cfg.volume_samples, cfg.seed, cfg.exec)?;
    Ok(InvariantReport::new("basin_volume", cfg.volume_samples, mc.relative_error(), VOLUME_REL_TOL))
}

/// Product field with areas `1` and `7/10`.
pub fn product_field() -> ToricField {
    ToricField::product(ratio(7, 10)).expect("positive areas")
}

pub fn separatrix_drift(cfg: &SuiteConfig) -> Result<InvariantReport> {
    let drift = product_field().separatrix_drift(cfg.separatrix_points, 1.0, 1e-3, cfg.exec);
    Ok(InvariantReport::new("separatrix_drift", cfg.separatrix_points, drift, DRIFT_TOL))
}

/// Fraction of off-margin random points where the sign test and the backward
/// integration disagree.
pub fn classify_agreement(cfg: &SuiteConfig) -> Result<InvariantReport> {
    let f = product_field();
    let ranges = par::chunk_ranges(cfg.classify_points, par::SAMPLING_CHUNKS);
    let mu = crate::rational::to_f64(&f.area2);
    let counts = par::map_indexed(ranges.len(), cfg.exec, |k| -> Result<(usize, usize)> {
        // separate stream family from the basin sampler
        let mut rng = par::chunk_rng(cfg.seed ^ 0x7012_1C00, k);
        let (mut tested, mut disagree) = (0, 0);
        for _ in ranges[k].clone() {
            let x: f64 = rng.random_range(1e-3..1.0 - 1e-3);
            let y: f64 = rng.random_range(1e-3..1.0 - 1e-3) * mu;
            let r1 = Rational::from_float(x).expect("finite");
            let r2 = Rational::from_float(y).expect("finite");
            let c = f.classify(&r1, &r2)?;
            if c.margin.abs() > CLASSIFY_MARGIN {
                tested += 1;
                disagree += usize::from(c.analytic != c.integrated || c.analytic == BasinLabel::Separatrix);
            }
        }
        Ok((tested, disagree))
    });
    let (mut tested, mut disagree) = (0, 0);
    for r in counts {
        let (t, d) = r?;
        tested += t;
        disagree += d;
    }
    let fraction = if tested == 0 { 0.0 } else { disagree as f64 / tested as f64 };
    Ok(InvariantReport::new("classify_agreement", tested, fraction, 0.0))
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<InvariantReport>> {
    Ok(vec![
        liouville_identity(cfg)?,
        exactness(cfg)?,
        pullback(cfg)?,
        flow_consistency(cfg)?,
        basin_agreement(cfg)?,
        basin_volume(cfg)?,
        separatrix_drift(cfg)?,
        classify_agreement(cfg)?,
    ])
}
