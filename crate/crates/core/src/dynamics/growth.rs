//! Polynomial versus exponential growth of a positive series.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// Coefficient-of-determination margin below which the two fits are tied.
pub const TIE_MARGIN: f64 = 0.005;
/// Slope magnitude below which a tied series counts as bounded.
pub const BOUNDED_SLOPE: f64 = 1e-3;
pub const MIN_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthKind {
    Bounded,
    Polynomial,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthClassification {
    pub kind: GrowthKind,
    /// Slope of `ln y` against `ln τ`; set for polynomial and bounded verdicts.
    pub degree: Option<f64>,
    /// Slope of `ln y` against `τ`; set for exponential verdicts.
    pub rate: Option<f64>,
    /// r² of the winning fit.
    pub fit_r2: f64,
    pub polynomial_r2: f64,
    pub exponential_r2: f64,
    pub window: (f64, f64),
}

/// Least-squares line `y = a + b x`, returning `(b, r²)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_res = (syy - slope * sxy).max(0.0);
    // a flat series is fitted perfectly by any slope-zero line
    let r2 = if syy <= 1e-30 * (1.0 + my * my) { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    (slope, r2)
}

/// Classifies the points of `series` with `τ` in `window` (inclusive, `τ > 0`).
pub fn classify_growth(series: &[(f64, f64)], window: (f64, f64)) -> Result<GrowthClassification> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1 && t > 0.0)
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(GeoError::InsufficientData {
            got: pts.len(),
            needed: MIN_POINTS,
        });
    }
    if let Some(&(tau, value)) = pts.iter().find(|&&(_, y)| !(y > 0.0) || !y.is_finite()) {
        return Err(GeoError::NonPositiveSeries { tau, value });
    }
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let lt: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    let (degree, pr2) = linear_fit(&lt, &ly);
    let (rate, er2) = linear_fit(&t, &ly);

    let (kind, fit_r2) = if (pr2 - er2).abs() <= TIE_MARGIN {
        if degree.abs().max(rate.abs()) < BOUNDED_SLOPE {
            (GrowthKind::Bounded, pr2)
        } else {
            (GrowthKind::Polynomial, pr2)
        }
    } else if er2 > pr2 {
        (GrowthKind::Exponential, er2)
    } else {
        (GrowthKind::Polynomial, pr2)
    };
    Ok(GrowthClassification {
        kind,
        degree: (kind != GrowthKind::Exponential).then_some(degree),
        rate: (kind == GrowthKind::Exponential).then_some(rate),
        fit_r2,
        polynomial_r2: pr2,
        exponential_r2: er2,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|k| {
                let t = a + (b - a) * k as f64 / (n - 1) as f64;
                (t, f(t))
            })
            .collect()
    }

    #[test]
    fn cubic_is_polynomial() {
        let c = classify_growth(&sample(|t| t.powi(3), 1.0, 100.0, 200), (1.0, 100.0)).unwrap();
        assert_eq!(c.kind, GrowthKind::Polynomial);
        assert!((c.degree.unwrap() - 3.0).abs() < 0.01);
        assert!(c.rate.is_none());
    }

    #[test]
    fn exponential_is_exponential() {
        let c = classify_growth(&sample(|t| (0.8 * t).exp(), 1.0, 20.0, 200), (1.0, 20.0)).unwrap();
        assert_eq!(c.kind, GrowthKind::Exponential);
        assert!((c.rate.unwrap() - 0.8).abs() < 0.01);
    }

    #[test]
    fn constant_is_bounded() {
        let c = classify_growth(&sample(|_| 2.5, 1.0, 10.0, 50), (0.0, 10.0)).unwrap();
        assert_eq!(c.kind, GrowthKind::Bounded);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            classify_growth(&sample(|t| t, 1.0, 2.0, 5), (0.0, 10.0)),
            Err(GeoError::InsufficientData { got: 5, .. })
        ));
        assert!(matches!(
            classify_growth(&sample(|t| t - 2.0, 1.0, 10.0, 50), (0.0, 10.0)),
            Err(GeoError::NonPositiveSeries { .. })
        ));
    }
}
