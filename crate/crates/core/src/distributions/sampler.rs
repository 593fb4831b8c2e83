use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::scalar::Real;

use super::SeverityModel;

/// Sampling plan for a [`SeverityModel`], prepared once and reused.
///
/// Variates are drawn in double precision whatever the model's scalar type.
#[derive(Debug, Clone)]
pub struct Sampler {
    node: Node,
}

#[derive(Debug, Clone)]
enum Node {
    Zero,
    Exponential { inv_rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Gamma(Gamma<f64>),
    Atoms { values: Vec<f64>, cumulative: Vec<f64> },
    Mixture { cumulative: Vec<f64>, parts: Vec<(f64, Node)> },
}

impl Sampler {
    pub fn new<T: Real>(model: &SeverityModel<T>) -> Self {
        Self {
            node: compile(model),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.node.sample(rng)
    }
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    // guard against a final sum a few ulps below one
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

fn compile<T: Real>(model: &SeverityModel<T>) -> Node {
    match model {
        SeverityModel::Exponential { rate } => Node::Exponential {
            inv_rate: rate.to_f64_lossy().recip(),
        },
        SeverityModel::LogNormal { mu, sigma2 } => Node::LogNormal {
            mu: mu.to_f64_lossy(),
            sigma: sigma2.to_f64_lossy().sqrt(),
        },
        SeverityModel::Gamma { shape, rate } => Node::Gamma(
            Gamma::new(shape.to_f64_lossy(), rate.to_f64_lossy().recip())
                .expect("validated gamma parameters"),
        ),
        SeverityModel::DiscreteAtoms { atoms } => {
            if atoms.iter().all(|(v, _)| v.is_zero()) {
                return Node::Zero;
            }
            Node::Atoms {
                values: atoms.iter().map(|(v, _)| v.to_f64_lossy()).collect(),
                cumulative: cumulative(atoms.iter().map(|(_, p)| p.to_f64_lossy())),
            }
        }
        SeverityModel::ScaledMixture { components } => Node::Mixture {
            cumulative: cumulative(components.iter().map(|c| c.weight.to_f64_lossy())),
            parts: components
                .iter()
                .map(|c| {
                    let s = c.scale.to_f64_lossy();
                    (s, if s == 0.0 { Node::Zero } else { compile(&c.base) })
                })
                .collect(),
        },
    }
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

impl Node {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Node::Zero => 0.0,
            Node::Exponential { inv_rate } => {
                let e: f64 = Exp1.sample(rng);
                e * inv_rate
            }
            Node::LogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
            Node::Gamma(g) => g.sample(rng),
            Node::Atoms { values, cumulative } => values[pick(cumulative, rng.random::<f64>())],
            Node::Mixture { cumulative, parts } => {
                let (scale, node) = &parts[pick(cumulative, rng.random::<f64>())];
                if *scale == 0.0 {
                    0.0
                } else {
                    scale * node.sample(rng)
                }
            }
        }
    }
}
