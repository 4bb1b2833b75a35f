//! Monte-Carlo estimates of the Fisher information `E[∂_i l ∂_j l]`.
//!
//! Draws come from ChaCha8 streams: shard `s` of a run with seed `S` uses
//! `ChaCha8Rng::seed_from_u64(S)` with `set_stream(s)`. The shard plan is
//! fixed, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

pub const SHARDS: u64 = 16;
/// Poisson means at or above this use the rejection sampler.
const POISSON_INVERSION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Poisson,
    Pareto { a: f64 },
    Laplace,
    Weibull { b: f64 },
    BivariateGaussian { r: f64 },
}

impl Family {
    /// Number of manifold coordinates.
    pub fn n_params(&self) -> usize {
        match self {
            Family::BivariateGaussian { .. } => 3,
            _ => 1,
        }
    }

    /// Number of observed values per draw.
    pub fn n_obs(&self) -> usize {
        match self {
            Family::BivariateGaussian { .. } => 2,
            _ => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Family::Poisson => "poisson".into(),
            Family::Pareto { a } => format!("pareto(a={a})"),
            Family::Laplace => "laplace".into(),
            Family::Weibull { b } => format!("weibull(b={b})"),
            Family::BivariateGaussian { r } => format!("bivariate-gaussian(r={r})"),
        }
    }
}

/// One independent factor of a joint density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub family: Family,
    pub params: Vec<f64>,
}

/// A product of independent factors; the score is the concatenation of the factor scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    pub factors: Vec<Factor>,
}

impl DistSpec {
    pub fn single(family: Family, params: Vec<f64>) -> Result<Self> {
        let d = DistSpec { factors: vec![Factor { family, params }] };
        d.validate()?;
        Ok(d)
    }

    pub fn joint(parts: Vec<DistSpec>) -> Result<Self> {
        let d = DistSpec { factors: parts.into_iter().flat_map(|p| p.factors).collect() };
        d.validate()?;
        Ok(d)
    }

    pub fn poisson(theta: f64) -> Result<Self> {
        Self::single(Family::Poisson, vec![theta])
    }

    pub fn pareto(a: f64, theta: f64) -> Result<Self> {
        Self::single(Family::Pareto { a }, vec![theta])
    }

    pub fn laplace(theta: f64) -> Result<Self> {
        Self::single(Family::Laplace, vec![theta])
    }

    pub fn weibull(b: f64, theta: f64) -> Result<Self> {
        Self::single(Family::Weibull { b }, vec![theta])
    }

    pub fn bivariate_gaussian(r: f64, mu_x: f64, mu_y: f64, sigma: f64) -> Result<Self> {
        Self::single(Family::BivariateGaussian { r }, vec![mu_x, mu_y, sigma])
    }

    /// The four-factor Poisson / Pareto / Laplace / Weibull density.
    pub fn m4(a: f64, b: f64, theta: [f64; 4]) -> Result<Self> {
        Self::joint(vec![
            Self::poisson(theta[0])?,
            Self::pareto(a, theta[1])?,
            Self::laplace(theta[2])?,
            Self::weibull(b, theta[3])?,
        ])
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(GeoError::InvalidParameter("distribution has no factors".into()));
        }
        for f in &self.factors {
            if f.params.len() != f.family.n_params() {
                return Err(GeoError::DimensionMismatch {
                    expected: f.family.n_params(),
                    got: f.params.len(),
                });
            }
            if f.params.iter().any(|x| !x.is_finite()) {
                return Err(GeoError::InvalidParameter("parameters must be finite".into()));
            }
            let bad = |m: String| Err(GeoError::InvalidParameter(m));
            match f.family {
                Family::Pareto { a } if !(a > 0.0 && a.is_finite()) => return bad(format!("Pareto a must be > 0, got {a}")),
                Family::Weibull { b } if !(b > 0.0 && b.is_finite()) => return bad(format!("Weibull b must be > 0, got {b}")),
                Family::BivariateGaussian { r } if !(r.abs() < 1.0) => return bad(format!("need |r| < 1, got {r}")),
                Family::BivariateGaussian { .. } => {
                    if !(f.params[2] > 0.0) {
                        return bad(format!("sigma must be > 0, got {}", f.params[2]));
                    }
                }
                _ => {
                    if !(f.params[0] > 0.0) {
                        return bad(format!("{} parameter must be > 0, got {}", f.family.label(), f.params[0]));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.factors.iter().map(|f| f.family.n_params()).sum()
    }

    pub fn n_obs(&self) -> usize {
        self.factors.iter().map(|f| f.family.n_obs()).sum()
    }

    pub fn label(&self) -> String {
        self.factors.iter().map(|f| f.family.label()).collect::<Vec<_>>().join(" x ")
    }

    pub fn params(&self) -> Vec<f64> {
        self.factors.iter().flat_map(|f| f.params.iter().copied()).collect()
    }
}

fn open01<R: Rng>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

fn sample_poisson<R: Rng>(rng: &mut R, mean: f64) -> f64 {
    if mean < POISSON_INVERSION_LIMIT {
        // inversion by sequential search
        let u = open01(rng);
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut x = 0.0;
        while u > cdf && p > 0.0 {
            x += 1.0;
            p *= mean / x;
            cdf += p;
        }
        x
    } else {
        rand_distr::Poisson::new(mean).expect("validated mean").sample(rng)
    }
}

fn sample_factor<R: Rng>(rng: &mut R, f: &Factor, out: &mut Vec<f64>) {
    let t = f.params[0];
    match f.family {
        Family::Poisson => out.push(sample_poisson(rng, t)),
        Family::Pareto { a } => out.push(a * open01(rng).powf(-1.0 / t)),
        Family::Weibull { b } => out.push(t * (-open01(rng).ln()).powf(1.0 / b)),
        Family::Laplace => {
            let u = open01(rng) - 0.5;
            out.push(-t * u.signum() * (1.0 - 2.0 * u.abs()).ln());
        }
        Family::BivariateGaussian { r } => {
            let (mx, my, s) = (f.params[0], f.params[1], f.params[2]);
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            out.push(mx + s * z1);
            out.push(my + s * (r * z1 + (1.0 - r * r).sqrt() * z2));
        }
    }
}

fn draw<R: Rng>(rng: &mut R, d: &DistSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(d.n_obs());
    for f in &d.factors {
        sample_factor(rng, f, &mut out);
    }
    out
}

/// `n` draws from a single ChaCha8 stream seeded with `seed`; one row per draw.
pub fn sample(d: &DistSpec, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    d.validate()?;
    if n < 1 {
        return Err(GeoError::InvalidParameter("need at least one draw".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| draw(&mut rng, d)).collect())
}

fn out_of_support(f: &Factor, value: f64) -> GeoError {
    GeoError::OutOfSupport { family: f.family.label(), value }
}

/// Gradient of the log density with respect to the manifold coordinates.
pub fn score(d: &DistSpec, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != d.n_obs() {
        return Err(GeoError::DimensionMismatch { expected: d.n_obs(), got: x.len() });
    }
    let mut out = Vec::with_capacity(d.n_params());
    let mut k = 0;
    for f in &d.factors {
        let t = f.params[0];
        let v = x[k];
        match f.family {
            Family::Poisson => {
                if !(v >= 0.0 && v.fract() == 0.0) {
                    return Err(out_of_support(f, v));
                }
                out.push(v / t - 1.0);
            }
            Family::Pareto { a } => {
                if !(v >= a) {
                    return Err(out_of_support(f, v));
                }
                out.push(1.0 / t + a.ln() - v.ln());
            }
            Family::Laplace => {
                if !v.is_finite() {
                    return Err(out_of_support(f, v));
                }
                out.push(-1.0 / t + v.abs() / (t * t));
            }
            Family::Weibull { b } => {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(out_of_support(f, v));
                }
                out.push(-b / t + b * v.powf(b) * t.powf(-b - 1.0));
            }
            Family::BivariateGaussian { r } => {
                let (mx, my, s) = (f.params[0], f.params[1], f.params[2]);
                let (dx, dy) = (v - mx, x[k + 1] - my);
                if !dx.is_finite() || !dy.is_finite() {
                    return Err(out_of_support(f, if dx.is_finite() { x[k + 1] } else { v }));
                }
                let om = 1.0 - r * r;
                let s2 = s * s;
                let q = dx * dx - 2.0 * r * dx * dy + dy * dy;
                out.push((dx - r * dy) / (s2 * om));
                out.push((dy - r * dx) / (s2 * om));
                out.push(-2.0 / s + q / (s2 * s * om));
            }
        }
        k += f.family.n_obs();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub family: String,
    pub params: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub matrix: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    #[serde(skip)]
    pub score_mean: Vec<f64>,
    #[serde(skip)]
    pub score_stderr: Vec<f64>,
}

impl McEstimate {
    /// `(estimate − reference)/stderr` per entry; 0 where both the difference and stderr vanish.
    pub fn z_scores(&self, reference: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.matrix
            .iter()
            .zip(&self.stderr)
            .zip(reference)
            .map(|((row, se), refr)| {
                row.iter()
                    .zip(se)
                    .zip(refr)
                    .map(|((m, s), r)| {
                        let d = m - r;
                        if d == 0.0 {
                            0.0
                        } else {
                            d / s
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone)]
struct Sums {
    s1: Vec<f64>,
    s2: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
}

impl Sums {
    fn zeros(k: usize) -> Self {
        Sums { s1: vec![0.0; k * k], s2: vec![0.0; k * k], g1: vec![0.0; k], g2: vec![0.0; k] }
    }

    fn add(&mut self, o: &Sums) {
        for (a, b) in self.s1.iter_mut().zip(&o.s1) {
            *a += b;
        }
        for (a, b) in self.s2.iter_mut().zip(&o.s2) {
            *a += b;
        }
        for (a, b) in self.g1.iter_mut().zip(&o.g1) {
            *a += b;
        }
        for (a, b) in self.g2.iter_mut().zip(&o.g2) {
            *a += b;
        }
    }
}

fn shard_sums(d: &DistSpec, seed: u64, shard: u64, count: usize) -> Result<Sums> {
    let k = d.n_params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut s = Sums::zeros(k);
    for _ in 0..count {
        let x = draw(&mut rng, d);
        let g = score(d, &x)?;
        for i in 0..k {
            s.g1[i] += g[i];
            s.g2[i] += g[i] * g[i];
            for j in i..k {
                let p = g[i] * g[j];
                s.s1[i * k + j] += p;
                s.s2[i * k + j] += p * p;
            }
        }
    }
    Ok(s)
}

fn mean_and_se(sum: f64, sum_sq: f64, n: f64) -> (f64, f64) {
    let m = sum / n;
    let var = ((sum_sq / n - m * m) * n / (n - 1.0)).max(0.0);
    (m, (var / n).sqrt())
}

/// Sample mean of score outer products with per-entry standard errors.
pub fn estimate_fisher_mc(d: &DistSpec, n: usize, seed: u64) -> Result<McEstimate> {
    d.validate()?;
    if n < 100 {
        return Err(GeoError::InvalidParameter(format!("need n >= 100 draws, got {n}")));
    }
    let k = d.n_params();
    let per = n / SHARDS as usize;
    let extra = n % SHARDS as usize;
    let shards: Vec<Sums> = (0..SHARDS)
        .into_par_iter()
        .map(|s| shard_sums(d, seed, s, per + usize::from((s as usize) < extra)))
        .collect::<Result<Vec<_>>>()?;
    let mut total = Sums::zeros(k);
    for s in &shards {
        total.add(s);
    }
    let nf = n as f64;
    let mut matrix = vec![vec![0.0; k]; k];
    let mut stderr = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (m, se) = mean_and_se(total.s1[i * k + j], total.s2[i * k + j], nf);
            matrix[i][j] = m;
            matrix[j][i] = m;
            stderr[i][j] = se;
            stderr[j][i] = se;
        }
    }
    let (score_mean, score_stderr) = (0..k).map(|i| mean_and_se(total.g1[i], total.g2[i], nf)).unzip();
    Ok(McEstimate {
        family: d.label(),
        params: d.params(),
        n,
        seed,
        matrix,
        stderr,
        score_mean,
        score_stderr,
    })
}
