//! Seeded generators for the two reference models.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`. Every observation consumes its draws in a fixed order,
//! Bernoulli selectors first, then radii, then angles or the secondary
//! selector, so a sample depends only on `(n, seed)`.
//!
//! Pareto(alpha) means `P(Z > x) = x^-alpha` for `x >= 1`, drawn as
//! `U^(-1/alpha)` with `U` uniform on `(0, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Sample2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Full asymptotic dependence: mass on the diagonal plus two rays of
    /// slope 1.5 and 0.5 carrying a lighter tail.
    Example1,
    /// Strong asymptotic dependence: heavy radius with angles in
    /// `[0.4, 0.6]`, lighter radius with angles outside that band.
    Example2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub seed: u64,
    pub model: Model,
}

pub fn simulate(config: &SimConfig) -> Result<Sample2> {
    if config.n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    Ok(match config.model {
        Model::Example1 => gen_example1(config.n, config.seed),
        Model::Example2 => gen_example2(config.n, config.seed),
    })
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pareto_draw<R: Rng>(rng: &mut R, alpha: f64) -> f64 {
    // gen::<f64>() is in [0, 1); flip it so the base is never zero.
    let u = 1.0 - rng.gen::<f64>();
    u.powf(-1.0 / alpha)
}

fn bernoulli_half<R: Rng>(rng: &mut R) -> bool {
    rng.gen::<f64>() < 0.5
}

pub fn sample_pareto(alpha: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..n).map(|_| pareto_draw(&mut rng, alpha)).collect())
}

/// `X1 = B1·Z1 + (1-B1)·Z2`,
/// `X2 = B1·Z1 + B2·(1-B1)·1.5·Z2 + (1-B2)·(1-B1)·0.5·Z2`
/// with `Z1 ~ Pareto(1.5)`, `Z2 ~ Pareto(2.5)`, `B1, B2 ~ Bernoulli(1/2)`.
///
/// Draw order per observation: `B1, Z1, Z2, B2`.
pub fn gen_example1(n: usize, seed: u64) -> Sample2 {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let b1 = bernoulli_half(&mut rng);
            let z1 = pareto_draw(&mut rng, 1.5);
            let z2 = pareto_draw(&mut rng, 2.5);
            let b2 = bernoulli_half(&mut rng);
            match (b1, b2) {
                (true, _) => Point2::new(z1, z1),
                (false, true) => Point2::new(z2, 1.5 * z2),
                (false, false) => Point2::new(z2, 0.5 * z2),
            }
        })
        .collect()
}

/// `X = B·R1·(Θ1, 1-Θ1) + (1-B)·R2·(Θ2, 1-Θ2)` with `R1 ~ Pareto(1.5)`,
/// `R2 ~ Pareto(2.5)`, `Θ1 ~ Unif[0.4, 0.6]`,
/// `Θ2 ~ Unif([0,1] \ [0.4, 0.6))`, `B ~ Bernoulli(1/2)`.
///
/// Draw order per observation: `B, R1, R2, Θ1, Θ2`. `Θ2` uses the inverse
/// CDF of the two-interval law, one uniform per draw.
pub fn gen_example2(n: usize, seed: u64) -> Sample2 {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| example2_draw(&mut rng).0).collect()
}

/// One Example 2 observation together with its radius and angle.
pub(crate) fn example2_draw<R: Rng>(rng: &mut R) -> (Point2, f64, f64) {
    let b = bernoulli_half(rng);
    let r1 = pareto_draw(rng, 1.5);
    let r2 = pareto_draw(rng, 2.5);
    let theta1 = 0.4 + 0.2 * rng.gen::<f64>();
    let v = 0.8 * rng.gen::<f64>();
    let theta2 = if v < 0.4 { v } else { v + 0.2 };
    let (r, theta) = if b { (r1, theta1) } else { (r2, theta2) };
    (Point2::new(r * theta, r * (1.0 - theta)), r, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tailest::hill;

    #[test]
    fn pareto_support_and_determinism() {
        let a = sample_pareto(1.5, 10_000, 11).unwrap();
        assert!(a.iter().all(|&z| z >= 1.0 && z.is_finite()));
        assert_eq!(a, sample_pareto(1.5, 10_000, 11).unwrap());
        assert_ne!(a, sample_pareto(1.5, 10_000, 12).unwrap());
        assert!(matches!(sample_pareto(0.0, 5, 1), Err(Error::NonPositiveAlpha(_))));
        assert!(matches!(sample_pareto(-1.0, 5, 1), Err(Error::NonPositiveAlpha(_))));
    }

    #[test]
    fn pareto_tail_frequency() {
        let z = sample_pareto(2.5, 100_000, 5).unwrap();
        let freq = z.iter().filter(|&&v| v > 2.0).count() as f64 / z.len() as f64;
        let exact = 2f64.powf(-2.5);
        assert!((freq - exact).abs() < 0.01, "{freq} vs {exact}");
    }

    #[test]
    fn example1_rays() {
        let s = gen_example1(100_000, 21);
        let mut counts = [0usize; 3];
        for p in &s {
            let ratio = p.x2 / p.x1;
            if ratio == 1.0 {
                counts[0] += 1;
            } else if (ratio - 1.5).abs() < 1e-12 {
                counts[1] += 1;
            } else if (ratio - 0.5).abs() < 1e-12 {
                counts[2] += 1;
            } else {
                panic!("point off the three rays: {p:?}");
            }
        }
        let n = s.len() as f64;
        assert!((counts[0] as f64 / n - 0.5).abs() < 0.01);
        assert!((counts[1] as f64 / n - 0.25).abs() < 0.01);
        assert!((counts[2] as f64 / n - 0.25).abs() < 0.01);
    }

    #[test]
    fn example1_marginal_index() {
        let s = gen_example1(10_000, 3);
        let x1: Vec<f64> = s.iter().map(|p| p.x1).collect();
        let a = hill(&x1, 500).unwrap();
        assert!((a - 1.5).abs() < 0.2, "{a}");
    }

    #[test]
    fn example2_construction() {
        let mut rng = rng_from_seed(8);
        let mut inside = 0;
        let n = 100_000;
        for _ in 0..n {
            let (p, r, theta) = example2_draw(&mut rng);
            assert!(((p.x1 + p.x2) - r).abs() <= 1e-12 * r);
            let t1 = p.x1 / (p.x1 + p.x2);
            assert!((t1 - theta).abs() < 1e-12);
            if (0.4..=0.6).contains(&t1) {
                inside += 1;
            }
        }
        assert!((inside as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn example2_matches_draw_stream() {
        let s = gen_example2(50, 4);
        let mut rng = rng_from_seed(4);
        for p in s {
            assert_eq!(p, example2_draw(&mut rng).0);
        }
    }

    #[test]
    fn simulate_dispatch() {
        let c = SimConfig { n: 10, seed: 1, model: Model::Example1 };
        assert_eq!(simulate(&c).unwrap(), gen_example1(10, 1));
        let c = SimConfig { n: 0, seed: 1, model: Model::Example2 };
        assert!(simulate(&c).is_err());
    }
}
