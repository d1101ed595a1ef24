//! Point-function generators used by configs and tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::space::QuasiMetricSpace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// `(x + eps)^exponent` with `x` the first coordinate; `eps` defaults to `1/N`.
    Power {
        exponent: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    /// `ln(x + eps)`; `eps` defaults to `1/N`.
    Log {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    /// `left` for `x < split`, `right` otherwise.
    TwoBlock {
        left: f64,
        right: f64,
        #[serde(default = "half")]
        split: f64,
    },
    /// `exp(sigma * Z)` with standard normal `Z`.
    Lognormal {
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `sigma * Z`.
    Normal {
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Indicator {
        points: Vec<usize>,
    },
    Values {
        values: Vec<f64>,
    },
}

fn half() -> f64 {
    0.5
}

impl FunctionSpec {
    /// Evaluates the generator; `default_seed` is used when the spec has none.
    pub fn evaluate(&self, space: &QuasiMetricSpace, default_seed: u64) -> Result<Vec<f64>> {
        let n = space.n();
        let eps_or = |e: &Option<f64>| e.unwrap_or(1.0 / n as f64);
        let values = match self {
            FunctionSpec::Constant { value } => vec![*value; n],
            FunctionSpec::Power { exponent, eps } => {
                let e = eps_or(eps);
                (0..n).map(|x| (space.position(x) + e).powf(*exponent)).collect()
            }
            FunctionSpec::Log { eps } => {
                let e = eps_or(eps);
                (0..n).map(|x| (space.position(x) + e).ln()).collect()
            }
            FunctionSpec::TwoBlock { left, right, split } => (0..n)
                .map(|x| if space.position(x) < *split { *left } else { *right })
                .collect(),
            FunctionSpec::Lognormal { sigma, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed));
                (0..n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (sigma * z).exp()
                    })
                    .collect()
            }
            FunctionSpec::Normal { sigma, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed));
                (0..n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        sigma * z
                    })
                    .collect()
            }
            FunctionSpec::Indicator { points } => {
                let mut v = vec![0.0; n];
                for &p in points {
                    if p >= n {
                        return Err(invalid("points", format!("point {p} out of range")));
                    }
                    v[p] = 1.0;
                }
                v
            }
            FunctionSpec::Values { values } => {
                if values.len() != n {
                    return Err(invalid(
                        "values",
                        format!("length {} does not match space size {n}", values.len()),
                    ));
                }
                values.clone()
            }
        };
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid("function", format!("generator produced {v}")));
        }
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceKind, SpaceParams};

    #[test]
    fn seeded_generators_are_reproducible() {
        let s = build_space(SpaceKind::Line, 16, &SpaceParams::default(), 0).unwrap();
        let spec = FunctionSpec::Lognormal { sigma: 1.0, seed: None };
        assert_eq!(spec.evaluate(&s, 5).unwrap(), spec.evaluate(&s, 5).unwrap());
        assert_ne!(spec.evaluate(&s, 5).unwrap(), spec.evaluate(&s, 6).unwrap());
    }

    #[test]
    fn power_weight_uses_inverse_n_offset() {
        let s = build_space(SpaceKind::Line, 4, &SpaceParams::default(), 0).unwrap();
        let v = FunctionSpec::Power { exponent: 1.0, eps: None }.evaluate(&s, 0).unwrap();
        assert_eq!(v, vec![0.25, 0.5, 0.75, 1.0]);
    }
}
