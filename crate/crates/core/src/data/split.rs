use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GroupedDataset;
use crate::error::{Error, Result};

/// Stratified split by `(group, label)`.
///
/// Each stratum of size `s ≥ 2` sends `round(test_fraction · s)` rows,
/// clamped to `1..=s-1`, to the test side. Singleton strata stay in train.
/// Rows keep their original order within each side.
pub fn train_test_split(
    gd: &GroupedDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(GroupedDataset, GroupedDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut strata: BTreeMap<(usize, i8), Vec<usize>> = BTreeMap::new();
    for i in 0..gd.nrows() {
        let label = gd.labels.as_ref().map_or(0, |l| l[i]);
        strata.entry((gd.group_ids[i], label)).or_default().push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for ((group, label), mut rows) in strata {
        let size = rows.len();
        if size == 1 {
            log::warn!(
                "stratum (group '{}', label {label}) has a single row; assigned to train",
                gd.group_names[group]
            );
            train.extend(rows);
            continue;
        }
        let n_test = ((test_fraction * size as f64).round() as usize).clamp(1, size - 1);
        rows.shuffle(&mut rng);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((gd.subset(&train)?, gd.subset(&test)?))
}
