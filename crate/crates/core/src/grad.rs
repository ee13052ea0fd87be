//! Gradient-weighted effective depth.
//!
//! Each path carries a weight `g`, normalised over all paths, and the
//! effective depth is the weighted mean path length. Weights depend only on
//! path length here, so the path polynomial is all that is needed. Without
//! training data the weight is modelled as `gamma^len` (per-layer
//! attenuation); arbitrary per-length weights can be supplied instead.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Float, FromPrimitive};
use thiserror::Error;

use crate::depth::PathPolynomial;
use crate::scalar::PathCount;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GradError {
    #[error("gamma must lie in (0, 1], got {0}")]
    GammaOutOfRange(f64),
    #[error("no weight given for path length {0}")]
    MissingLength(u64),
    #[error("weight for length {length} must be finite and non-negative, got {value}")]
    InvalidWeight { length: u64, value: f64 },
    #[error("all path weights are zero")]
    AllZero,
    #[error("empty path polynomial")]
    EmptyPolynomial,
}

/// Per-layer attenuation: a path of length `len` gets weight `gamma^len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuationModel<F> {
    gamma: F,
}

impl<F: Float> AttenuationModel<F> {
    pub fn new(gamma: F) -> Result<Self, GradError> {
        if gamma > F::zero() && gamma <= F::one() {
            Ok(Self { gamma })
        } else {
            Err(GradError::GammaOutOfRange(
                gamma.to_f64().unwrap_or(f64::NAN),
            ))
        }
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }
}

/// Where the path weights of a report came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSource<F> {
    Attenuation(F),
    Custom,
}

impl<F: fmt::Display> fmt::Display for WeightSource<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSource::Attenuation(g) => write!(f, "attenuation({g})"),
            WeightSource::Custom => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDepthReport<F> {
    pub source: WeightSource<F>,
    pub depth: F,
    /// Normalised weight mass per path length; sums to one.
    pub mass: Vec<(u64, F)>,
}

/// Weighted mean length from per-length log weights `ln c + ln g`,
/// shifted by their maximum before exponentiating.
fn weighted_mean<F: Float + FromPrimitive>(
    log_weights: Vec<(u64, F)>,
) -> Result<(F, Vec<(u64, F)>), GradError> {
    let peak = log_weights
        .iter()
        .map(|&(_, w)| w)
        .filter(|w| w.is_finite())
        .fold(F::neg_infinity(), F::max);
    if !peak.is_finite() {
        return Err(GradError::AllZero);
    }
    let raw: Vec<(u64, F)> = log_weights
        .into_iter()
        .map(|(l, w)| {
            (
                l,
                if w.is_finite() {
                    (w - peak).exp()
                } else {
                    F::zero()
                },
            )
        })
        .collect();
    let total = raw.iter().fold(F::zero(), |acc, &(_, w)| acc + w);
    let mass: Vec<(u64, F)> = raw.into_iter().map(|(l, w)| (l, w / total)).collect();
    let depth = mass.iter().fold(F::zero(), |acc, &(l, w)| {
        acc + w * F::from_u64(l).expect("length representable")
    });
    Ok((depth, mass))
}

fn from_f64<F: FromPrimitive>(x: f64) -> F {
    F::from_f64(x).expect("float conversion")
}

pub fn gradient_weighted_depth<C, F>(
    poly: &PathPolynomial<C>,
    model: &AttenuationModel<F>,
) -> Result<WeightedDepthReport<F>, GradError>
where
    C: PathCount,
    F: Float + FromPrimitive,
{
    if poly.is_empty() {
        return Err(GradError::EmptyPolynomial);
    }
    let ln_gamma = model.gamma.ln();
    let logs = poly
        .terms()
        .map(|(l, c)| {
            (
                l,
                from_f64::<F>(c.ln()) + F::from_u64(l).expect("length") * ln_gamma,
            )
        })
        .collect();
    let (depth, mass) = weighted_mean(logs)?;
    Ok(WeightedDepthReport {
        source: WeightSource::Attenuation(model.gamma),
        depth,
        mass,
    })
}

/// Same as [`gradient_weighted_depth`] with caller-supplied weights per
/// path length; every length in the polynomial's support must be covered.
pub fn gradient_weighted_depth_custom<C, F>(
    poly: &PathPolynomial<C>,
    weights: &BTreeMap<u64, F>,
) -> Result<WeightedDepthReport<F>, GradError>
where
    C: PathCount,
    F: Float + FromPrimitive,
{
    if poly.is_empty() {
        return Err(GradError::EmptyPolynomial);
    }
    let mut logs = Vec::new();
    for (l, c) in poly.terms() {
        let g = *weights.get(&l).ok_or(GradError::MissingLength(l))?;
        if !(g.is_finite() && g >= F::zero()) {
            return Err(GradError::InvalidWeight {
                length: l,
                value: g.to_f64().unwrap_or(f64::NAN),
            });
        }
        logs.push((l, from_f64::<F>(c.ln()) + g.ln()));
    }
    let (depth, mass) = weighted_mean(logs)?;
    Ok(WeightedDepthReport {
        source: WeightSource::Custom,
        depth,
        mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(terms: &[(u64, u128)]) -> PathPolynomial<u128> {
        PathPolynomial::from_terms(terms.iter().copied()).unwrap()
    }

    fn gamma(g: f64) -> AttenuationModel<f64> {
        AttenuationModel::new(g).unwrap()
    }

    #[test]
    fn attenuation_examples() {
        let p = poly(&[(2, 1), (4, 1)]);
        assert!((gradient_weighted_depth(&p, &gamma(1.0)).unwrap().depth - 3.0).abs() < 1e-12);
        // (2*0.25 + 4*0.0625) / (0.25 + 0.0625)
        assert!((gradient_weighted_depth(&p, &gamma(0.5)).unwrap().depth - 2.4).abs() < 1e-12);
        let chain = poly(&[(16, 1)]);
        for g in [1.0, 0.9, 0.5, 1e-6] {
            assert_eq!(
                gradient_weighted_depth(&chain, &gamma(g)).unwrap().depth,
                16.0
            );
        }
    }

    #[test]
    fn gamma_range_is_checked() {
        assert_eq!(
            AttenuationModel::new(0.0),
            Err(GradError::GammaOutOfRange(0.0))
        );
        assert!(AttenuationModel::new(1.5).is_err());
        assert!(AttenuationModel::new(-0.1).is_err());
        assert!(AttenuationModel::new(f64::NAN).is_err());
        assert!(AttenuationModel::new(1.0).is_ok());
    }

    #[test]
    fn custom_examples() {
        let p = poly(&[(2, 1), (4, 3)]);
        let w: BTreeMap<u64, f64> = [(2, 1.0), (4, 0.0)].into();
        assert_eq!(gradient_weighted_depth_custom(&p, &w).unwrap().depth, 2.0);
        let w: BTreeMap<u64, f64> = [(2, 1.0), (4, 1.0)].into();
        assert!((gradient_weighted_depth_custom(&p, &w).unwrap().depth - 3.5).abs() < 1e-12);
        let p = poly(&[(2, 1), (4, 1)]);
        let w: BTreeMap<u64, f64> = [(2, 0.25), (4, 0.0625)].into();
        let custom = gradient_weighted_depth_custom(&p, &w).unwrap().depth;
        assert!((custom - gradient_weighted_depth(&p, &gamma(0.5)).unwrap().depth).abs() < 1e-12);
    }

    #[test]
    fn custom_errors() {
        let p = poly(&[(2, 1), (4, 3)]);
        let w: BTreeMap<u64, f64> = [(2, 1.0)].into();
        assert_eq!(
            gradient_weighted_depth_custom(&p, &w),
            Err(GradError::MissingLength(4))
        );
        let w: BTreeMap<u64, f64> = [(2, 0.0), (4, 0.0)].into();
        assert_eq!(
            gradient_weighted_depth_custom(&p, &w),
            Err(GradError::AllZero)
        );
        let w: BTreeMap<u64, f64> = [(2, -1.0), (4, 1.0)].into();
        assert!(matches!(
            gradient_weighted_depth_custom(&p, &w),
            Err(GradError::InvalidWeight { length: 2, .. })
        ));
    }

    #[test]
    fn mass_is_normalised_and_generic() {
        let p = poly(&[(2, 1), (4, 3), (6, 3), (8, 1)]);
        let r = gradient_weighted_depth(&p, &gamma(0.7)).unwrap();
        let total: f64 = r.mass.iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(r.source.to_string(), "attenuation(0.7)");

        let r32 = gradient_weighted_depth(&p, &AttenuationModel::new(0.7f32).unwrap()).unwrap();
        assert!((f64::from(r32.depth) - r.depth).abs() < 1e-5);
    }

    #[test]
    fn tiny_gamma_is_stable() {
        let p = poly(&[(2, 1), (4, 3), (6, 3), (8, 1), (400, 1)]);
        let r = gradient_weighted_depth(&p, &gamma(1e-6)).unwrap();
        assert!((r.depth - 2.0).abs() < 1e-9);
        assert!(r.depth.is_finite());
    }
}
