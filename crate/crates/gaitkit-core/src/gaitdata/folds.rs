//! Cycle-level k-fold cross-validation planning.
//!
//! Folds are assigned at gait-cycle granularity so near-duplicate neighboring
//! samples never straddle a fold boundary.

use super::Dataset;
use crate::error::{Error, Result};

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One cross-validation round: disjoint sample index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldRound {
    pub test: Vec<usize>,
    pub validation: Vec<usize>,
    pub train: Vec<usize>,
}

/// A k-fold partition over a dataset, with per-round validation splits.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub k: usize,
    /// Per-round test sample index sets; pairwise disjoint, union = all indices.
    pub folds: Vec<Vec<usize>>,
    pub rounds: Vec<FoldRound>,
    pub validation_fraction: f64,
    pub seed: u64,
}

/// Build a cycle-level k-fold plan. Per round, `validation_fraction` of the
/// non-test cycles (rounded) form the validation set.
pub fn kfold_split(
    dataset: &Dataset,
    k: usize,
    validation_fraction: f64,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    if !(0.0..1.0).contains(&validation_fraction) {
        return Err(Error::invalid("validation_fraction must lie in [0, 1)"));
    }
    let cycles = dataset.cycle_ranges();
    if cycles.len() < k {
        return Err(Error::invalid("dataset has fewer gait cycles than k"));
    }

    let mut order: Vec<usize> = (0..cycles.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    // Round-robin assignment keeps fold sizes within one cycle of each other.
    let mut fold_cycles: Vec<Vec<usize>> = alloc::vec![Vec::new(); k];
    for (i, c) in order.iter().enumerate() {
        fold_cycles[i % k].push(*c);
    }

    let expand = |cycle_ids: &[usize]| -> Vec<usize> {
        let mut idx: Vec<usize> = cycle_ids
            .iter()
            .flat_map(|&c| cycles[c].clone())
            .collect();
        idx.sort_unstable();
        idx
    };

    let mut folds = Vec::with_capacity(k);
    let mut rounds = Vec::with_capacity(k);
    for r in 0..k {
        let mut rest: Vec<usize> = (0..k)
            .filter(|&f| f != r)
            .flat_map(|f| fold_cycles[f].iter().copied())
            .collect();
        let mut round_rng =
            ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(r as u64 + 1)));
        rest.shuffle(&mut round_rng);
        let val_count = libm::round(rest.len() as f64 * validation_fraction) as usize;
        let (val_cycles, train_cycles) = rest.split_at(val_count);

        folds.push(expand(&fold_cycles[r]));
        rounds.push(FoldRound {
            test: expand(&fold_cycles[r]),
            validation: expand(val_cycles),
            train: expand(train_cycles),
        });
    }

    Ok(FoldPlan {
        k,
        folds,
        rounds,
        validation_fraction,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaitdata::{generate_dataset, GeneratorConfig, NoiseStd};

    fn dataset_with_cycles(n_cycles: usize) -> Dataset {
        generate_dataset(&GeneratorConfig {
            speeds_mps: alloc::vec![1.0],
            cycles_per_speed: n_cycles,
            sample_rate_hz: 100.0,
            noise: NoiseStd::NONE,
            seed: 1,
        })
        .unwrap()
    }

    #[test]
    fn even_division_of_cycles() {
        let d = dataset_with_cycles(10);
        let plan = kfold_split(&d, 5, 0.3, 42).unwrap();
        for fold in &plan.folds {
            assert_eq!(fold.len(), 2 * 120); // 2 cycles of 120 samples each
        }
    }

    #[test]
    fn folds_partition_all_indices() {
        let d = dataset_with_cycles(11);
        let plan = kfold_split(&d, 5, 0.3, 3).unwrap();
        let mut seen = alloc::vec![0u8; d.len()];
        for fold in &plan.folds {
            for &i in fold {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn round_split_counts() {
        // 100 cycles, k = 5: per round 20 test, round(80 * 0.3) = 24
        // validation, 56 train cycles.
        let d = dataset_with_cycles(100);
        let plan = kfold_split(&d, 5, 0.30, 9).unwrap();
        for round in &plan.rounds {
            assert_eq!(round.test.len(), 20 * 120);
            assert_eq!(round.validation.len(), 24 * 120);
            assert_eq!(round.train.len(), 56 * 120);
        }
    }

    #[test]
    fn round_sets_are_disjoint_and_cover() {
        let d = dataset_with_cycles(12);
        let plan = kfold_split(&d, 4, 0.25, 5).unwrap();
        for round in &plan.rounds {
            let mut seen = alloc::vec![0u8; d.len()];
            for &i in round.test.iter().chain(&round.validation).chain(&round.train) {
                seen[i] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let d = dataset_with_cycles(10);
        assert_eq!(
            kfold_split(&d, 5, 0.3, 7).unwrap(),
            kfold_split(&d, 5, 0.3, 7).unwrap()
        );
        assert_ne!(
            kfold_split(&d, 5, 0.3, 7).unwrap(),
            kfold_split(&d, 5, 0.3, 8).unwrap()
        );
    }

    #[test]
    fn too_few_cycles_rejected() {
        let d = dataset_with_cycles(3);
        assert!(kfold_split(&d, 5, 0.3, 0).is_err());
        assert!(kfold_split(&d, 1, 0.3, 0).is_err());
        assert!(kfold_split(&d, 3, 1.0, 0).is_err());
    }
}
