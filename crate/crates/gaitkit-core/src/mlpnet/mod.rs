//! The branched MLP: IMU inputs -> (speed, phase) -> (ankle angle, rate).
//!
//! Stage 1 maps the six IMU channels through six ReLU hidden layers to the
//! 2-wide middle output (V, P); stage 2 maps the middle output through six
//! more ReLU hidden layers to the 2-wide final output (alpha, alpha-dot).
//! Counting the input layer, the 12 hidden layers with their rectifications,
//! and the two output layers gives the 27-layer topology.
//!
//! All arithmetic is double precision; gradients are exact analytic
//! backpropagation and are cross-checked against finite differences in the
//! test suite.

mod adam;
mod network;
mod serialize;
mod train;

pub use adam::{adam_step, AdamState};
pub use network::{
    init_network, BranchedNetwork, DenseLayer, ForwardTrace, Gradients, NetworkConfig,
};
pub use serialize::{deserialize_network, serialize_network, WEIGHTS_MAGIC, WEIGHTS_VERSION};
pub use train::{
    train, train_single_fold, EpochRecord, FoldModel, PhaseEncoding, TestRecord, TrainHyper,
    TrainOutcome, TrainReport,
};

/// Decomposed mean-squared-error loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    /// MSE over the middle output (V, P), averaged over batch and dimension.
    pub middle: f64,
    /// MSE over the final output (alpha, alpha-dot).
    pub fin: f64,
    /// `lambda_mid * middle + lambda_fin * fin`.
    pub total: f64,
}

/// Weighted MSE loss over both output heads.
pub fn loss(
    pred_middle: ndarray::ArrayView2<f64>,
    pred_final: ndarray::ArrayView2<f64>,
    target_middle: ndarray::ArrayView2<f64>,
    target_final: ndarray::ArrayView2<f64>,
    lambda_mid: f64,
    lambda_fin: f64,
) -> LossParts {
    let middle = mse(pred_middle, target_middle);
    let fin = mse(pred_final, target_final);
    LossParts {
        middle,
        fin,
        total: lambda_mid * middle + lambda_fin * fin,
    }
}

fn mse(pred: ndarray::ArrayView2<f64>, target: ndarray::ArrayView2<f64>) -> f64 {
    debug_assert_eq!(pred.dim(), target.dim());
    let n = pred.len() as f64;
    let mut acc = 0.0;
    for (p, t) in pred.iter().zip(target.iter()) {
        let d = p - t;
        acc += d * d;
    }
    acc / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn loss_is_zero_on_perfect_prediction() {
        let m = array![[1.0, 2.0], [3.0, 4.0]];
        let f = array![[0.5, -1.0], [2.0, 0.0]];
        let l = loss(m.view(), f.view(), m.view(), f.view(), 1.0, 1.0);
        assert_eq!((l.middle, l.fin, l.total), (0.0, 0.0, 0.0));
    }

    #[test]
    fn middle_unit_error_gives_unit_mse() {
        let pred = array![[1.0, 1.0]];
        let zero = array![[0.0, 0.0]];
        let l = loss(pred.view(), zero.view(), zero.view(), zero.view(), 1.0, 1.0);
        assert_eq!(l.middle, 1.0); // (1 + 1) / 2
    }

    #[test]
    fn lambda_weights_decompose_total() {
        let pm = array![[1.0, -2.0], [0.0, 3.0]];
        let pf = array![[2.0, 2.0], [-1.0, 0.5]];
        let tm = array![[0.0, 1.0], [1.0, 1.0]];
        let tf = array![[1.0, 0.0], [0.0, 0.0]];
        let l = loss(pm.view(), pf.view(), tm.view(), tf.view(), 0.3, 1.7);
        assert!((l.total - (0.3 * l.middle + 1.7 * l.fin)).abs() < 1e-12);
        let l0 = loss(pm.view(), pf.view(), tm.view(), tf.view(), 0.0, 1.7);
        assert_eq!(l0.total, 1.7 * l0.fin);
    }
}
