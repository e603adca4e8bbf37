//! Deterministic rational sample points.
//!
//! Coordinates are drawn uniformly from rationals in `[-box, box]` with
//! bounded denominator. Each sample index owns an independent stream derived
//! from the seed, so a retry at one index never shifts the points at another.

use crate::chart::{Chart, Point};
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
    /// Half-width of the sampling box (a positive rational).
    pub box_radius: Scalar,
    pub denom_bound: u32,
    pub tol: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 16,
            seed: 42,
            box_radius: Scalar::one(),
            denom_bound: 1024,
            tol: 1e-9,
        }
    }
}

impl SampleConfig {
    pub fn with_seed(seed: u64) -> Self {
        SampleConfig {
            seed,
            ..SampleConfig::default()
        }
    }

    /// RNG stream for sample index `k`.
    pub fn stream(&self, k: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    }
}

fn draw_scalar(rng: &mut ChaCha8Rng, cfg: &SampleConfig) -> Scalar {
    let den: i64 = rng.gen_range(1..=cfg.denom_bound as i64);
    // numerator bound: floor(box * den)
    let bound_big: BigInt = (cfg.box_radius.numer() * BigInt::from(den)) / cfg.box_radius.denom();
    let bound = bound_big.abs().to_i64().unwrap_or(i64::MAX);
    let num: i64 = if bound == 0 { 0 } else { rng.gen_range(-bound..=bound) };
    Scalar::ratio(num, den)
}

fn draw_point(rng: &mut ChaCha8Rng, chart: &Chart, cfg: &SampleConfig) -> Point {
    let values = (0..chart.dim()).map(|_| draw_scalar(rng, cfg)).collect();
    Point::new(chart, values).expect("dimension matches chart")
}

/// The base sample point at index `k` (before any retry redraws).
pub fn sample_point(chart: &Chart, cfg: &SampleConfig, k: usize) -> Point {
    let mut rng = cfg.stream(k as u64);
    draw_point(&mut rng, chart, cfg)
}

/// Run `f` on up to [`MAX_RETRIES`] points drawn from stream `k` until it
/// accepts one; `None` means the retries were exhausted (an inconclusive
/// sample index).
pub fn with_retries<T>(
    chart: &Chart,
    cfg: &SampleConfig,
    k: usize,
    mut f: impl FnMut(&Point) -> Option<T>,
) -> Option<(Point, T)> {
    let mut rng = cfg.stream(k as u64);
    for _ in 0..MAX_RETRIES {
        let p = draw_point(&mut rng, chart, cfg);
        if let Some(out) = f(&p) {
            return Some((p, out));
        }
    }
    None
}
