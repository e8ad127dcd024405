use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};

use super::SimError;
use crate::netgraph::{Network, NodeId};
use crate::schedulers::Job;
use crate::units::{parse_size, BITS_PER_TB, SECONDS_PER_HOUR};

/// Accepts either a number of bits or a string such as `"2.475TB"`.
fn bits<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Text(s) => parse_size(&s).map_err(serde::de::Error::custom),
    }
}

/// File-size law. All sizes in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SizeDist {
    /// Shifted Pareto: `P(X > x) = (x_m / (x - gamma))^beta` for `x ≥ gamma + x_m`.
    Pareto {
        beta: f64,
        #[serde(deserialize_with = "bits")]
        x_m: f64,
        #[serde(deserialize_with = "bits")]
        gamma: f64,
    },
    Exponential {
        #[serde(deserialize_with = "bits")]
        mean: f64,
    },
    Constant {
        #[serde(deserialize_with = "bits")]
        size: f64,
    },
}

impl SizeDist {
    /// Pareto law used for the clique experiments: mean about 2.473 TB.
    pub fn default_pareto() -> Self {
        SizeDist::Pareto {
            beta: 2.5,
            x_m: 1.48 * BITS_PER_TB,
            gamma: 6.25e-3 * BITS_PER_TB,
        }
    }

    pub fn default_exponential() -> Self {
        SizeDist::Exponential {
            mean: 2.475 * BITS_PER_TB,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            SizeDist::Pareto { beta, x_m, gamma } => gamma + x_m * beta / (beta - 1.0),
            SizeDist::Exponential { mean } => mean,
            SizeDist::Constant { size } => size,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            SizeDist::Pareto { beta, x_m, gamma } => {
                if x <= gamma + x_m {
                    0.0
                } else {
                    1.0 - (x_m / (x - gamma)).powf(beta)
                }
            }
            SizeDist::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-x / mean).exp()
                }
            }
            SizeDist::Constant { size } => {
                if x < size {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidWorkload(msg.to_string()));
        let pos = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            SizeDist::Pareto { beta, x_m, gamma } => {
                if !(beta.is_finite() && beta > 1.0) {
                    return bad("pareto beta must exceed 1 for a finite mean");
                }
                if !pos(x_m) || !(gamma.is_finite() && gamma >= 0.0) {
                    return bad("pareto x_m must be positive and gamma nonnegative");
                }
            }
            SizeDist::Exponential { mean } if !pos(mean) => {
                return bad("exponential mean must be positive")
            }
            SizeDist::Constant { size } if !pos(size) => {
                return bad("constant size must be positive")
            }
            _ => {}
        }
        Ok(())
    }

    /// Inverse-transform draw.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u = open_unit(rng);
        match *self {
            SizeDist::Pareto { beta, x_m, gamma } => gamma + x_m * u.powf(-1.0 / beta),
            SizeDist::Exponential { mean } => -mean * u.ln(),
            SizeDist::Constant { size } => size,
        }
    }
}

/// Uniform on `(0, 1]`.
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// How source and destination are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PairPolicy {
    /// Uniform over ordered pairs of distinct nodes.
    #[default]
    UniformDistinct,
    /// Every request uses the same pair, given by node names.
    Fixed { source: String, destination: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    /// Requests per hour.
    pub arrival_rate: f64,
    pub size_dist: SizeDist,
    #[serde(default)]
    pub pair_policy: PairPolicy,
    pub num_requests: usize,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            return Err(SimError::InvalidWorkload(
                "arrival rate must be positive".into(),
            ));
        }
        if self.num_requests == 0 {
            return Err(SimError::InvalidWorkload(
                "at least one request is required".into(),
            ));
        }
        self.size_dist.validate()
    }
}

/// Poisson arrivals with the spec's size law and pair policy. Each request
/// draws its gap, size and pair in that order from one ChaCha8 stream.
pub fn generate_trace(spec: &WorkloadSpec, net: &Network) -> Result<Vec<Job>, SimError> {
    spec.validate()?;
    let n = net.node_count();
    if n < 2 {
        return Err(SimError::InvalidWorkload(
            "topology needs at least two nodes".into(),
        ));
    }
    let fixed = match &spec.pair_policy {
        PairPolicy::UniformDistinct => None,
        PairPolicy::Fixed {
            source,
            destination,
        } => {
            let s = net.require_node(source)?;
            let d = net.require_node(destination)?;
            if s == d {
                return Err(SimError::InvalidWorkload(
                    "fixed pair needs distinct nodes".into(),
                ));
            }
            Some((s, d))
        }
    };
    let per_second = spec.arrival_rate / SECONDS_PER_HOUR;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut t = 0.0;
    let mut jobs = Vec::with_capacity(spec.num_requests);
    for id in 0..spec.num_requests {
        t += -open_unit(&mut rng).ln() / per_second;
        let size = spec.size_dist.sample(&mut rng);
        let (source, destination) = fixed.unwrap_or_else(|| {
            let s = rng.gen_range(0..n);
            let mut d = rng.gen_range(0..n - 1);
            if d >= s {
                d += 1;
            }
            (NodeId(s), NodeId(d))
        });
        jobs.push(Job {
            id: id as u64 + 1,
            source,
            destination,
            size,
            arrival: t,
        });
    }
    Ok(jobs)
}
