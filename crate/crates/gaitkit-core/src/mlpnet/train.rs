//! Mini-batch training loop over a cross-validation fold plan.

use super::adam::{adam_step, AdamState};
use super::network::{init_network, BranchedNetwork, NetworkConfig};
use crate::error::{Error, Result};
use crate::gaitdata::{fit_normalizer_subset, Dataset, FoldPlan, FoldRound, Normalizer};
use crate::Clock;

use alloc::vec::Vec;

use core::f64::consts::PI;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How the gait phase target is presented to the middle output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseEncoding {
    /// Raw percent in [0, 100). The middle output is (V, P).
    #[default]
    RawPercent,
    /// (sin, cos) of the phase angle; the middle output becomes
    /// (V, sin, cos) and the phase is recovered with atan2. Sidesteps the
    /// discontinuity at the 100 -> 0 wrap.
    SinCos,
}

impl PhaseEncoding {
    /// Middle-output width implied by the encoding.
    pub fn middle_width(self) -> usize {
        match self {
            PhaseEncoding::RawPercent => 2,
            PhaseEncoding::SinCos => 3,
        }
    }

    /// Middle-output target row for (speed, phase).
    pub fn encode(self, speed: f64, phase: f64) -> [f64; 3] {
        match self {
            PhaseEncoding::RawPercent => [speed, phase, 0.0],
            PhaseEncoding::SinCos => {
                let a = 2.0 * PI * phase / 100.0;
                [speed, libm::sin(a), libm::cos(a)]
            }
        }
    }

    /// Recover (speed, phase) from a middle-output row.
    pub fn decode(self, row: &[f64]) -> (f64, f64) {
        match self {
            PhaseEncoding::RawPercent => (row[0], row[1]),
            PhaseEncoding::SinCos => {
                let mut p = libm::atan2(row[1], row[2]) * 100.0 / (2.0 * PI);
                if p < 0.0 {
                    p += 100.0;
                }
                (row[0], p)
            }
        }
    }
}

/// Training hyperparameters. Defaults follow the published training setup
/// (learning rate 1e-2, weight decay 1e-2, 200 epochs, batch 512, Adam).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHyper {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub lambda_mid: f64,
    pub lambda_fin: f64,
    /// Decoupled (AdamW-style) decay instead of the classic coupled L2 term.
    pub decoupled_decay: bool,
    pub phase_encoding: PhaseEncoding,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            learning_rate: 1e-2,
            weight_decay: 1e-2,
            epochs: 200,
            batch_size: 512,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            lambda_mid: 1.0,
            lambda_fin: 1.0,
            decoupled_decay: false,
            phase_encoding: PhaseEncoding::RawPercent,
        }
    }
}

impl TrainHyper {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        let positive = [
            self.learning_rate,
            self.beta1,
            self.beta2,
            self.epsilon,
        ];
        if positive.iter().any(|&x| !(x > 0.0)) || self.weight_decay < 0.0 {
            return Err(Error::invalid("hyperparameters must be positive"));
        }
        Ok(())
    }
}

/// One per-epoch loss record of one fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub fold: usize,
    pub epoch: usize,
    pub train_middle: f64,
    pub train_final: f64,
    pub val_middle: f64,
    pub val_final: f64,
    pub seconds: f64,
}

/// Held-out test losses of one fold, evaluated with its best network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestRecord {
    pub fold: usize,
    pub test_middle: f64,
    pub test_final: f64,
    /// Epoch whose validation loss selected the model.
    pub best_epoch: usize,
}

/// Full training history: one entry per epoch per fold, plus per-fold test
/// losses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub tests: Vec<TestRecord>,
}

impl TrainReport {
    /// Cross-fold average of the per-fold test losses (middle, final).
    pub fn mean_test_losses(&self) -> (f64, f64) {
        let n = self.tests.len().max(1) as f64;
        (
            self.tests.iter().map(|t| t.test_middle).sum::<f64>() / n,
            self.tests.iter().map(|t| t.test_final).sum::<f64>() / n,
        )
    }
}

/// Best network of one fold plus the normalizer fitted on its train split.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldModel {
    pub fold: usize,
    pub network: BranchedNetwork,
    pub normalizer: Normalizer,
}

/// Result of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub models: Vec<FoldModel>,
    pub report: TrainReport,
}

struct Split {
    x: Array2<f64>,
    y_mid: Array2<f64>,
    y_fin: Array2<f64>,
}

fn build_split(
    dataset: &Dataset,
    indices: &[usize],
    normalizer: &Normalizer,
    encoding: PhaseEncoding,
) -> Split {
    let n = indices.len();
    let mw = encoding.middle_width();
    let mut x = Array2::zeros((n, crate::gaitdata::IMU_CHANNELS));
    let mut y_mid = Array2::zeros((n, mw));
    let mut y_fin = Array2::zeros((n, 2));
    for (r, &i) in indices.iter().enumerate() {
        let s = &dataset.samples[i];
        let z = normalizer.apply(s);
        for c in 0..crate::gaitdata::IMU_CHANNELS {
            x[[r, c]] = z[c];
        }
        let enc = encoding.encode(s.speed_mps, s.phase_pct);
        for c in 0..mw {
            y_mid[[r, c]] = enc[c];
        }
        y_fin[[r, 0]] = s.ankle_angle_deg;
        y_fin[[r, 1]] = s.ankle_rate_dps;
    }
    Split { x, y_mid, y_fin }
}

fn eval_split(net: &BranchedNetwork, split: &Split, hyper: &TrainHyper) -> Result<(f64, f64)> {
    if split.x.nrows() == 0 {
        return Ok((f64::NAN, f64::NAN));
    }
    let mut sum_mid = 0.0;
    let mut sum_fin = 0.0;
    let mut n = 0usize;
    for (xc, (mc, fc)) in split
        .x
        .axis_chunks_iter(Axis(0), 4096)
        .zip(
            split
                .y_mid
                .axis_chunks_iter(Axis(0), 4096)
                .zip(split.y_fin.axis_chunks_iter(Axis(0), 4096)),
        )
    {
        let (pm, pf) = net.forward_batch(xc)?;
        let l = super::loss(pm.view(), pf.view(), mc, fc, hyper.lambda_mid, hyper.lambda_fin);
        let rows = xc.nrows();
        sum_mid += l.middle * rows as f64;
        sum_fin += l.fin * rows as f64;
        n += rows;
    }
    Ok((sum_mid / n as f64, sum_fin / n as f64))
}

/// Train one cross-validation round.
///
/// The normalizer is fitted on the round's train split only. Every epoch the
/// train set is reshuffled (seeded), iterated in batches (last partial batch
/// allowed), and the validation loss recorded; the returned network is the
/// epoch snapshot with the lowest validation total loss.
pub fn train_single_fold(
    dataset: &Dataset,
    round: &FoldRound,
    fold: usize,
    config: &NetworkConfig,
    hyper: &TrainHyper,
    clock: &mut dyn Clock,
) -> Result<(FoldModel, Vec<EpochRecord>, TestRecord)> {
    hyper.validate()?;
    if round.train.is_empty() {
        return Err(Error::invalid("train split is empty"));
    }
    if config.middle_width != hyper.phase_encoding.middle_width() {
        return Err(Error::invalid(
            "middle_width does not match the phase encoding",
        ));
    }

    let normalizer = fit_normalizer_subset(dataset, &round.train)?;
    let train = build_split(dataset, &round.train, &normalizer, hyper.phase_encoding);
    let val = build_split(dataset, &round.validation, &normalizer, hyper.phase_encoding);
    let test = build_split(dataset, &round.test, &normalizer, hyper.phase_encoding);

    let mut net = init_network(&NetworkConfig {
        seed: config.seed.wrapping_add(fold as u64),
        ..*config
    })?;
    let mut adam = AdamState::new(&net);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(
        config
            .seed
            .wrapping_add(0x5851_f42d_4c95_7f2d_u64.wrapping_mul(fold as u64 + 1)),
    );

    let n_train = train.x.nrows();
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut records = Vec::with_capacity(hyper.epochs);
    let mut best: Option<(f64, usize, BranchedNetwork)> = None;
    let mut step: u64 = 0;

    for epoch in 0..hyper.epochs {
        let t0 = clock.now_us();
        order.shuffle(&mut shuffle_rng);
        let mut sum_mid = 0.0;
        let mut sum_fin = 0.0;
        for batch_idx in order.chunks(hyper.batch_size) {
            let xb = train.x.select(Axis(0), batch_idx);
            let mb = train.y_mid.select(Axis(0), batch_idx);
            let fb = train.y_fin.select(Axis(0), batch_idx);
            let (grads, losses) =
                net.backward(xb.view(), mb.view(), fb.view(), hyper.lambda_mid, hyper.lambda_fin)?;
            step += 1;
            adam_step(&mut net, &grads, &mut adam, hyper, step)?;
            sum_mid += losses.middle * batch_idx.len() as f64;
            sum_fin += losses.fin * batch_idx.len() as f64;
        }
        let train_middle = sum_mid / n_train as f64;
        let train_final = sum_fin / n_train as f64;
        let (val_middle, val_final) = eval_split(&net, &val, hyper)?;
        let seconds = (clock.now_us().saturating_sub(t0)) as f64 / 1e6;
        records.push(EpochRecord {
            fold,
            epoch,
            train_middle,
            train_final,
            val_middle,
            val_final,
            seconds,
        });

        let val_total = if val.x.nrows() == 0 {
            hyper.lambda_mid * train_middle + hyper.lambda_fin * train_final
        } else {
            hyper.lambda_mid * val_middle + hyper.lambda_fin * val_final
        };
        if best.as_ref().map_or(true, |(b, _, _)| val_total < *b) {
            best = Some((val_total, epoch, net.clone()));
        }
    }

    let (_, best_epoch, best_net) = best.expect("epochs >= 1");
    let (test_middle, test_final) = eval_split(&best_net, &test, hyper)?;
    Ok((
        FoldModel {
            fold,
            network: best_net,
            normalizer,
        },
        records,
        TestRecord {
            fold,
            test_middle,
            test_final,
            best_epoch,
        },
    ))
}

/// Train every round of the fold plan sequentially and aggregate the report.
pub fn train(
    dataset: &Dataset,
    plan: &FoldPlan,
    config: &NetworkConfig,
    hyper: &TrainHyper,
    clock: &mut dyn Clock,
) -> Result<TrainOutcome> {
    let mut models = Vec::with_capacity(plan.rounds.len());
    let mut report = TrainReport::default();
    for (fold, round) in plan.rounds.iter().enumerate() {
        let (model, records, test) =
            train_single_fold(dataset, round, fold, config, hyper, clock)?;
        models.push(model);
        report.epochs.extend(records);
        report.tests.push(test);
    }
    Ok(TrainOutcome { models, report })
}
