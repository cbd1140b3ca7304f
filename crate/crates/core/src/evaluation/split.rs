use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataio::Dataset;
use crate::forest::Label;

use super::EvalError;

/// One run's stratified 2-fold partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub seed: u64,
    pub run_index: usize,
    /// Fold (0 or 1) of each sample, in dataset order.
    pub fold_assignment: Vec<u8>,
}

impl SplitPlan {
    /// Sample indices in `fold`, ascending.
    pub fn fold(&self, fold: u8) -> Vec<usize> {
        self.fold_assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f == fold).then_some(i))
            .collect()
    }

    pub fn fold_sizes(&self) -> [usize; 2] {
        let ones = self.fold_assignment.iter().filter(|&&f| f == 1).count();
        [self.fold_assignment.len() - ones, ones]
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed of run `run_index`: two rounds of splitmix64 over the master seed
/// and the run index, so runs are independent of how many there are.
pub fn derive_seed(seed: u64, run_index: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ (run_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Stratified 2-fold split of `labels`. Within each class the samples are
/// shuffled and halved; an odd leftover goes to the currently smaller fold
/// (fold 0 on ties), which keeps both per-class and total sizes balanced.
pub fn make_split(labels: &[Label], seed: u64, run_index: usize) -> Result<SplitPlan, EvalError> {
    let n_classes = labels.iter().map(|&l| l as usize + 1).max().ok_or(EvalError::Empty)?;
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l as usize].push(i);
    }
    if let Some((class, members)) = by_class.iter().enumerate().find(|(_, m)| m.len() == 1) {
        return Err(EvalError::TooFewSamplesPerClass {
            class,
            count: members.len(),
        });
    }

    let sub_seed = derive_seed(seed, run_index);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
    let mut fold_assignment = vec![0u8; labels.len()];
    let mut sizes = [0usize; 2];
    for members in &mut by_class {
        // Fisher-Yates over u64 draws so the sequence does not depend on usize width.
        for i in (1..members.len()).rev() {
            let j = rng.random_range(0..=i as u64) as usize;
            members.swap(i, j);
        }
        let half = members.len() / 2;
        for (pos, &idx) in members.iter().enumerate() {
            let fold = if pos < half {
                0
            } else if pos < 2 * half {
                1
            } else {
                usize::from(sizes[1] < sizes[0])
            };
            fold_assignment[idx] = fold as u8;
            sizes[fold] += 1;
        }
    }
    Ok(SplitPlan {
        seed,
        run_index,
        fold_assignment,
    })
}

/// `runs` stratified 2-fold plans for `dataset`.
pub fn make_splits(dataset: &Dataset, seed: u64, runs: usize) -> Result<Vec<SplitPlan>, EvalError> {
    if runs == 0 {
        return Err(EvalError::NoRuns);
    }
    let labels: Vec<Label> = dataset.labels().collect();
    (0..runs).map(|r| make_split(&labels, seed, r)).collect()
}
