use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Request, RequestDoc, RequestsDoc};
use crate::topology::{Network, NodeName};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("traffic profile needs as many probabilities as volumes")]
    LengthMismatch,
    #[error("traffic profile is empty")]
    Empty,
    #[error("traffic volumes must be positive")]
    ZeroVolume,
    #[error("traffic probabilities must be non-negative and sum to 1 (got {0})")]
    BadProbabilities(f64),
    #[error("traffic needs at least two nodes")]
    TooFewNodes,
}

/// Discrete distribution of request volumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficProfile {
    pub volumes_gbps: Vec<u64>,
    pub probabilities: Vec<f64>,
}

impl Default for TrafficProfile {
    /// 1, 4 and 10 Tbps with probabilities 0.3, 0.3 and 0.4.
    fn default() -> Self {
        Self {
            volumes_gbps: vec![1000, 4000, 10_000],
            probabilities: vec![0.3, 0.3, 0.4],
        }
    }
}

impl TrafficProfile {
    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.volumes_gbps.len() != self.probabilities.len() {
            return Err(TrafficError::LengthMismatch);
        }
        if self.volumes_gbps.is_empty() {
            return Err(TrafficError::Empty);
        }
        if self.volumes_gbps.contains(&0) {
            return Err(TrafficError::ZeroVolume);
        }
        let sum: f64 = self.probabilities.iter().sum();
        if self.probabilities.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(TrafficError::BadProbabilities(sum));
        }
        Ok(())
    }

    pub fn mean_gbps(&self) -> f64 {
        self.volumes_gbps
            .iter()
            .zip(&self.probabilities)
            .map(|(&v, &p)| v as f64 * p)
            .sum()
    }
}

/// `count` requests between uniformly drawn ordered pairs of distinct nodes.
pub fn generate_traffic(
    network: &Network,
    count: usize,
    profile: &TrafficProfile,
    seed: u64,
) -> Result<Vec<Request>, TrafficError> {
    profile.validate()?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let n = network.node_count();
    if n < 2 {
        return Err(TrafficError::TooFewNodes);
    }
    let dist = WeightedIndex::new(&profile.probabilities).map_err(|_| TrafficError::BadProbabilities(0.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|id| {
            let src = rng.random_range(0..n);
            let mut dst = rng.random_range(0..n - 1);
            if dst >= src {
                dst += 1;
            }
            let gbps = profile.volumes_gbps[dist.sample(&mut rng)];
            Request { id, src, dst, gbps }
        })
        .collect())
}

/// Document form of a request list, using node names.
pub fn requests_doc(network: &Network, requests: &[Request]) -> RequestsDoc {
    RequestsDoc {
        requests: requests
            .iter()
            .map(|r| RequestDoc {
                src: NodeName::Text(network.node_name(r.src).to_string()),
                dst: NodeName::Text(network.node_name(r.dst).to_string()),
                gbps: r.gbps,
            })
            .collect(),
    }
}
