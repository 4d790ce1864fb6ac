//! Nested stratified splitting: per class, a test fraction is removed first,
//! then a validation fraction of what remains.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub val_fraction_of_remainder: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            test_fraction: 0.20,
            val_fraction_of_remainder: 0.10,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("test_fraction", self.test_fraction),
            ("val_fraction_of_remainder", self.val_fraction_of_remainder),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Split(format!("{name} must be in (0,1), got {f}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified index split. Within each class the order is shuffled under the
/// seed, `round(test_fraction · n)` indices go to test, then
/// `round(val_fraction · remainder)` to validation, the rest to train.
pub fn split_nested(labels: &[usize], num_classes: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    if labels.is_empty() {
        return Err(Error::Split("cannot split an empty dataset".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(Error::Split(format!("label {l} out of range for {num_classes} classes")));
        }
        by_class[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = SplitIndices { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for (class, mut idx) in by_class.into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 5 {
            return Err(Error::Split(format!(
                "class {class} has only {} samples, need at least 5 to stratify",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_test = (spec.test_fraction * n as f64).round() as usize;
        let rem = n - n_test;
        let n_val = (spec.val_fraction_of_remainder * rem as f64).round() as usize;
        out.test.extend(&idx[..n_test]);
        out.val.extend(&idx[n_test..n_test + n_val]);
        out.train.extend(&idx[n_test + n_val..]);
    }
    out.train.sort_unstable();
    out.val.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}
