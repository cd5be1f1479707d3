use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ParamSet;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            _ => Err(Error::Config(format!("unknown optimizer '{s}' (expected adam or sgd)"))),
        }
    }
}

/// Adam with bias correction, or plain SGD. Blocks named in `frozen` are
/// never updated.
#[derive(Clone, Debug)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    frozen: Vec<String>,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, frozen: Vec<String>) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
        }
        Ok(Optimizer {
            kind,
            lr,
            frozen,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        })
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step<P: ParamSet>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let gblocks = grads.blocks();
        let mut pblocks = params.blocks_mut();
        if gblocks.len() != pblocks.len() {
            return Err(Error::dim("Optimizer::step", pblocks.len(), gblocks.len()));
        }
        if self.m.is_empty() && self.kind == OptimizerKind::Adam {
            self.m = gblocks.iter().map(|(_, g)| vec![0.0; g.as_slice().len()]).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let t = self.step as f64;
        let (c1, c2) = (1.0 - ADAM_BETA1.powf(t), 1.0 - ADAM_BETA2.powf(t));
        for (k, ((name, p), (_, g))) in pblocks.iter_mut().zip(&gblocks).enumerate() {
            if self.frozen.iter().any(|f| f == name) {
                continue;
            }
            let (ps, gs) = (p.as_mut_slice(), g.as_slice());
            if ps.len() != gs.len() {
                return Err(Error::dim("Optimizer::step", ps.len(), gs.len()));
            }
            match self.kind {
                OptimizerKind::Sgd => {
                    for (x, d) in ps.iter_mut().zip(gs) {
                        *x -= self.lr * d;
                    }
                }
                OptimizerKind::Adam => {
                    let (m, v) = (&mut self.m[k], &mut self.v[k]);
                    for i in 0..ps.len() {
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * gs[i];
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * gs[i] * gs[i];
                        let mh = m[i] / c1;
                        let vh = v[i] / c2;
                        ps[i] -= self.lr * mh / (vh.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        Ok(())
    }
}
