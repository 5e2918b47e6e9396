//! Adam optimizer with L2 weight decay.

use super::network::{BranchedNetwork, Gradients};
use super::train::TrainHyper;
use crate::error::{Error, Result};

use alloc::vec::Vec;

use ndarray::{Array1, Array2};

/// First and second moment estimates, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
}

impl AdamState {
    pub fn new(net: &BranchedNetwork) -> Self {
        let zeros = || {
            net.layers
                .iter()
                .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
                .collect::<Vec<_>>()
        };
        AdamState {
            m: zeros(),
            v: zeros(),
        }
    }
}

/// One Adam update, `step_index` starting at 1.
///
/// Weight decay follows the coupled convention: `decay * parameter` is added
/// to the gradient before the moment updates (biases included). The
/// `decoupled_decay` flag switches to subtracting `lr * decay * parameter`
/// directly from the weights instead.
pub fn adam_step(
    net: &mut BranchedNetwork,
    grads: &Gradients,
    state: &mut AdamState,
    hyper: &TrainHyper,
    step_index: u64,
) -> Result<()> {
    if step_index == 0 {
        return Err(Error::invalid("step_index starts at 1"));
    }
    if grads.layers.len() != net.layers.len() {
        return Err(Error::invalid("gradient/network layer count mismatch"));
    }
    let b1 = hyper.beta1;
    let b2 = hyper.beta2;
    let bc1 = 1.0 - libm::pow(b1, step_index as f64);
    let bc2 = 1.0 - libm::pow(b2, step_index as f64);
    let lr = hyper.learning_rate;
    let wd = hyper.weight_decay;

    for i in 0..net.layers.len() {
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            let g = if hyper.decoupled_decay {
                *p -= lr * wd * *p;
                g
            } else {
                g + wd * *p
            };
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (libm::sqrt(v_hat) + hyper.epsilon);
        };

        let layer = &mut net.layers[i];
        ndarray::Zip::from(&mut layer.w)
            .and(&grads.layers[i].0)
            .and(&mut state.m[i].0)
            .and(&mut state.v[i].0)
            .for_each(|p, &g, m, v| update(p, g, m, v));
        ndarray::Zip::from(&mut layer.b)
            .and(&grads.layers[i].1)
            .and(&mut state.m[i].1)
            .and(&mut state.v[i].1)
            .for_each(|p, &g, m, v| update(p, g, m, v));
    }
    Ok(())
}
