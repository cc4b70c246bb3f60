//! Stratified hold-out split.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::PipelineError;
use crate::ml::Dataset;
use crate::seed::{self, derive_seed};

/// Row positions (into the dataset the split was made from), each side
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldoutSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per class, `round(n_class * train_fraction)` rows go to training. With
/// `grouped`, whole recordings (by `groups` key) are assigned instead, so
/// class counts only approximate the target.
pub fn split_holdout(data: &Dataset, train_fraction: f64, seed_value: u64, grouped: bool) -> Result<HoldoutSplit, PipelineError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(PipelineError::Config(format!("train_fraction {train_fraction} outside (0, 1)")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let rows: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == class).collect();
        let target = (rows.len() as f64 * train_fraction).round() as usize;
        let mut rng = seed::rng(derive_seed(seed_value, &[class as u64]));
        if grouped {
            let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for &r in &rows {
                by_group.entry(&data.groups[r]).or_default().push(r);
            }
            let mut groups: Vec<Vec<usize>> = by_group.into_values().collect();
            groups.shuffle(&mut rng);
            let mut taken = 0;
            for g in groups {
                if taken < target {
                    taken += g.len();
                    train.extend(g);
                } else {
                    test.extend(g);
                }
            }
        } else {
            let mut rows = rows;
            rows.shuffle(&mut rng);
            train.extend_from_slice(&rows[..target]);
            test.extend_from_slice(&rows[target..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    for (side, rows) in [("train", &train), ("test", &test)] {
        for class in [true, false] {
            let n = rows.iter().filter(|&&r| data.labels[r] == class).count();
            if n < 2 {
                return Err(PipelineError::Data(format!(
                    "dataset too small: {side} split has {n} rows of class {}",
                    if class { "inside" } else { "outside" }
                )));
            }
        }
    }
    Ok(HoldoutSplit { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize, pos: usize) -> Dataset {
        Dataset {
            features: vec![vec![0.0]; n],
            labels: (0..n).map(|i| i < pos).collect(),
            groups: (0..n).map(|i| format!("g{}", i / 4)).collect(),
            row_ids: (0..n).collect(),
        }
    }

    #[test]
    fn proportional_rounding() {
        let d = data(1000, 270);
        let s = split_holdout(&d, 0.8, 1, false).unwrap();
        assert_eq!(s.train.len(), 800);
        assert_eq!(s.train.iter().filter(|&&r| d.labels[r]).count(), 216);
        assert_eq!(s.test.iter().filter(|&&r| d.labels[r]).count(), 54);
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        assert_eq!(s, split_holdout(&d, 0.8, 1, false).unwrap());
        assert_ne!(s, split_holdout(&d, 0.8, 2, false).unwrap());
    }

    #[test]
    fn grouped_keeps_recordings_whole() {
        let d = data(400, 108);
        let s = split_holdout(&d, 0.8, 3, true).unwrap();
        let test_groups: std::collections::HashSet<&str> = s.test.iter().map(|&r| d.groups[r].as_str()).collect();
        assert!(s.train.iter().all(|&r| !test_groups.contains(d.groups[r].as_str())));
        assert!((s.train.len() as f64 - 320.0).abs() <= 8.0);
    }

    #[test]
    fn too_small() {
        let d = data(6, 2);
        assert!(matches!(split_holdout(&d, 0.8, 0, false), Err(PipelineError::Data(_))));
    }
}
