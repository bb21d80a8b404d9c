//! Stratified train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::{Dataset, SplitTag};
use crate::error::{Error, Result};

/// Split preserving class proportions to within one sample per class.
/// Deterministic under `seed`.
pub fn stratified_split(
    d: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let (train_idx, test_idx) = stratified_indices(&d.y, test_fraction, seed)?;
    Ok((
        d.subset(&train_idx, Some(SplitTag::Train)),
        d.subset(&test_idx, Some(SplitTag::Test)),
    ))
}

/// Index-level splitter shared by the dataset splitter and the ablation
/// harness (which must reuse one partition across feature families).
pub fn stratified_indices(
    y: &[bool],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.len() < 2 {
            return Err(Error::invalid(format!(
                "class {class} has {} members; need at least 2 to split",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let n_test = ((members.len() as f64 * test_fraction).round() as usize)
            .clamp(1, members.len() - 1);
        test.extend(members.drain(..n_test));
        train.extend(members);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
