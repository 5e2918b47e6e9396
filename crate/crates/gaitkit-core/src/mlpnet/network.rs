//! Network topology, initialization, forward pass, backpropagation.

use super::LossParts;
use crate::error::{Error, Result};

use alloc::vec::Vec;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Topology parameters. Defaults follow the published specification table
/// (6 hidden layers per stage, 2-wide middle and final outputs) with a
/// hidden width of 64.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    pub input_width: usize,
    pub hidden_width: usize,
    /// Hidden layers per stage (6 and 6).
    pub hidden_per_stage: usize,
    pub middle_width: usize,
    pub final_width: usize,
    /// When set, stage 2 additionally consumes stage 1's last hidden features
    /// alongside the middle output.
    pub stage2_sees_hidden: bool,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            input_width: 6,
            hidden_width: 64,
            hidden_per_stage: 6,
            middle_width: 2,
            final_width: 2,
            stage2_sees_hidden: false,
            seed: 0,
        }
    }
}

impl NetworkConfig {
    /// Weight-layer count: stage 1 hidden + middle output + stage 2 hidden +
    /// final output.
    pub fn layer_count(&self) -> usize {
        2 * self.hidden_per_stage + 2
    }

    /// Input width of stage 2's first layer.
    pub fn stage2_input_width(&self) -> usize {
        if self.stage2_sees_hidden {
            self.middle_width + self.hidden_width
        } else {
            self.middle_width
        }
    }

    /// (rows, cols) of every weight matrix in order.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.layer_count());
        let mut input = self.input_width;
        for _ in 0..self.hidden_per_stage {
            shapes.push((self.hidden_width, input));
            input = self.hidden_width;
        }
        shapes.push((self.middle_width, input));
        input = self.stage2_input_width();
        for _ in 0..self.hidden_per_stage {
            shapes.push((self.hidden_width, input));
            input = self.hidden_width;
        }
        shapes.push((self.final_width, input));
        shapes
    }
}

/// One fully-connected layer: `a = W x + b`, `W` stored as (out x in).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// The two chained dense-network stages.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchedNetwork {
    pub config: NetworkConfig,
    pub layers: Vec<DenseLayer>,
}

/// Per-layer parameter gradients, same shapes as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &BranchedNetwork) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
                .collect(),
        }
    }
}

/// Cached activations of one forward pass, reused by the backward pass.
pub struct ForwardTrace {
    /// Post-activation output of every weight layer, in order.
    outs: Vec<Array2<f64>>,
    /// Stage 2 input (middle output, optionally with hidden features).
    stage2_input: Array2<f64>,
}

impl ForwardTrace {
    pub fn middle(&self) -> &Array2<f64> {
        &self.outs[self.outs.len() / 2 - 1]
    }

    pub fn fin(&self) -> &Array2<f64> {
        self.outs.last().expect("non-empty network")
    }
}

/// He-uniform initialization (bound `sqrt(6 / fan_in)`), zero biases,
/// deterministic in the config seed.
pub fn init_network(config: &NetworkConfig) -> Result<BranchedNetwork> {
    if config.input_width == 0
        || config.hidden_width == 0
        || config.middle_width == 0
        || config.final_width == 0
        || config.hidden_per_stage == 0
    {
        return Err(Error::invalid("all network widths must be non-zero"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let layers = config
        .layer_shapes()
        .into_iter()
        .map(|(rows, cols)| {
            let bound = libm::sqrt(6.0 / cols as f64);
            let w =
                Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound));
            DenseLayer {
                w,
                b: Array1::zeros(rows),
            }
        })
        .collect();
    Ok(BranchedNetwork {
        config: *config,
        layers,
    })
}

impl BranchedNetwork {
    /// Total scalar parameter count (weights + biases).
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    fn stage1_layers(&self) -> usize {
        self.config.hidden_per_stage + 1
    }

    /// Batched forward pass; rows are samples. Returns (middle, final).
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
        let trace = self.forward_trace(input)?;
        Ok((trace.middle().clone(), trace.fin().clone()))
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<([f64; 2], [f64; 2])> {
        if input.len() != self.config.input_width {
            return Err(Error::invalid("input width mismatch"));
        }
        let x = Array2::from_shape_vec((1, input.len()), input.to_vec())
            .expect("shape checked above");
        let (m, f) = self.forward_batch(x.view())?;
        Ok(([m[[0, 0]], m[[0, 1]]], [f[[0, 0]], f[[0, 1]]]))
    }

    /// Forward pass keeping per-layer activations for backpropagation.
    pub fn forward_trace(&self, input: ArrayView2<f64>) -> Result<ForwardTrace> {
        if input.ncols() != self.config.input_width {
            return Err(Error::invalid("input width mismatch"));
        }
        if input.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite network input"));
        }
        let s1 = self.stage1_layers();
        let mut outs: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        let mut stage2_input = Array2::zeros((0, 0));

        for (i, layer) in self.layers.iter().enumerate() {
            let x: ArrayView2<f64> = if i == 0 {
                input.view()
            } else if i == s1 {
                stage2_input.view()
            } else {
                outs[i - 1].view()
            };
            let mut a = x.dot(&layer.w.t());
            a += &layer.b;
            let is_output = i == s1 - 1 || i == self.layers.len() - 1;
            if !is_output {
                a.mapv_inplace(|v| if v > 0.0 { v } else { 0.0 });
            }
            outs.push(a);
            if i == s1 - 1 {
                stage2_input = if self.config.stage2_sees_hidden {
                    ndarray::concatenate(Axis(1), &[outs[s1 - 1].view(), outs[s1 - 2].view()])
                        .expect("row counts match")
                } else {
                    outs[s1 - 1].clone()
                };
            }
        }
        Ok(ForwardTrace { outs, stage2_input })
    }

    /// Exact analytic gradients of the weighted total loss over one batch.
    ///
    /// The final-loss signal flows through the middle output back into
    /// stage 1; the middle loss adds its own signal at the middle output.
    pub fn backward(
        &self,
        input: ArrayView2<f64>,
        target_middle: ArrayView2<f64>,
        target_final: ArrayView2<f64>,
        lambda_mid: f64,
        lambda_fin: f64,
    ) -> Result<(Gradients, LossParts)> {
        let batch = input.nrows();
        if batch == 0 {
            return Err(Error::invalid("batch must be non-empty"));
        }
        let trace = self.forward_trace(input)?;
        let losses = super::loss(
            trace.middle().view(),
            trace.fin().view(),
            target_middle,
            target_final,
            lambda_mid,
            lambda_fin,
        );

        let s1 = self.stage1_layers();
        let total = self.layers.len();
        let mut grads = Gradients::zeros_like(self);

        // d(total)/d(final), linear output head.
        let scale_f = lambda_fin * 2.0 / (batch * self.config.final_width) as f64;
        let mut g: Array2<f64> = (trace.fin() - &target_final) * scale_f;

        // Skip-path gradient arriving at stage 1's last hidden output.
        let mut g_skip: Option<Array2<f64>> = None;

        // Stage 2, last layer down to its first.
        for i in (s1..total).rev() {
            let x: ArrayView2<f64> = if i == s1 {
                trace.stage2_input.view()
            } else {
                trace.outs[i - 1].view()
            };
            grads.layers[i].0 = g.t().dot(&x);
            grads.layers[i].1 = g.sum_axis(Axis(0));
            let mut g_prev = g.dot(&self.layers[i].w);
            if i > s1 {
                relu_mask(&mut g_prev, &trace.outs[i - 1]);
                g = g_prev;
            } else {
                // Split the stage-2 input gradient back into its parts.
                let mw = self.config.middle_width;
                let g_mid = g_prev.slice(s![.., ..mw]).to_owned();
                if self.config.stage2_sees_hidden {
                    g_skip = Some(g_prev.slice(s![.., mw..]).to_owned());
                }
                g = g_mid;
            }
        }

        // Middle-loss signal joins the final-loss signal at the middle output.
        let scale_m = lambda_mid * 2.0 / (batch * self.config.middle_width) as f64;
        g += &((trace.middle() - &target_middle) * scale_m);

        // Stage 1, middle output layer down to the input layer.
        for i in (0..s1).rev() {
            let x: ArrayView2<f64> = if i == 0 {
                input.view()
            } else {
                trace.outs[i - 1].view()
            };
            grads.layers[i].0 = g.t().dot(&x);
            grads.layers[i].1 = g.sum_axis(Axis(0));
            if i > 0 {
                let mut g_prev = g.dot(&self.layers[i].w);
                if i == s1 - 1 {
                    if let Some(skip) = g_skip.take() {
                        g_prev += &skip;
                    }
                }
                relu_mask(&mut g_prev, &trace.outs[i - 1]);
                g = g_prev;
            }
        }

        Ok((grads, losses))
    }
}

/// Zero the gradient where the forward ReLU output was zero.
fn relu_mask(grad: &mut Array2<f64>, relu_out: &Array2<f64>) {
    ndarray::Zip::from(grad).and(relu_out).for_each(|g, &y| {
        if y <= 0.0 {
            *g = 0.0;
        }
    });
}
