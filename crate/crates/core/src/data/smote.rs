//! SMOTE oversampling: minority classes are filled up to the majority count
//! with convex interpolations between same-class nearest neighbors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self { k_neighbors: 5, seed: 42 }
    }
}

#[derive(Debug, Clone)]
pub struct SmoteOutcome {
    /// Original rows unchanged, synthetic rows appended per class in class
    /// order.
    pub x: Tensor,
    pub labels: Vec<usize>,
    pub synthetic: Vec<bool>,
    /// Source-row index pair (sample, neighbor) for each synthetic row, in
    /// appended order.
    pub parents: Vec<(usize, usize)>,
}

/// `x_i + u·(x_ij − x_i)` per coordinate, clamped onto the segment so the
/// result is provably inside the parents' componentwise hull.
fn interpolate(a: &[f32], b: &[f32], u: f32, out: &mut Vec<f32>) {
    for (&av, &bv) in a.iter().zip(b) {
        let v = av + u * (bv - av);
        out.push(v.clamp(av.min(bv), av.max(bv)));
    }
}

/// k nearest same-class rows for every row of the class, ties broken by
/// index. `members` holds row indices into `x`.
fn knn_within_class(x: &Tensor, members: &[usize], k: usize) -> Vec<Vec<usize>> {
    let d = x.dim(1);
    let xd = x.data();
    let row = |i: usize| &xd[i * d..(i + 1) * d];
    members
        .iter()
        .map(|&i| {
            let mut dists: Vec<(f64, usize)> = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| {
                    let dist: f64 = row(i)
                        .iter()
                        .zip(row(j))
                        .map(|(&a, &b)| {
                            let diff = a as f64 - b as f64;
                            diff * diff
                        })
                        .sum();
                    (dist, j)
                })
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            dists.truncate(k);
            dists.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Oversamples every class to the majority count. The majority class is left
/// untouched; each synthetic sample interpolates a random class member toward
/// one of its k nearest same-class neighbors with u ~ Uniform[0,1).
pub fn smote(
    x: &Tensor,
    labels: &[usize],
    num_classes: usize,
    cfg: &SmoteConfig,
) -> Result<SmoteOutcome> {
    if x.rank() != 2 {
        return Err(Error::Smote(format!("expected flattened [N,D] input, got {:?}", x.shape())));
    }
    if x.dim(0) != labels.len() {
        return Err(Error::Smote(format!(
            "{} rows but {} labels",
            x.dim(0),
            labels.len()
        )));
    }
    if cfg.k_neighbors == 0 {
        return Err(Error::Smote("k_neighbors must be positive".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(Error::Smote(format!("label {l} out of range for {num_classes} classes")));
        }
        by_class[l].push(i);
    }
    let majority = by_class.iter().map(Vec::len).max().unwrap_or(0);

    let d = x.dim(1);
    let mut data = x.data().to_vec();
    let mut out_labels = labels.to_vec();
    let mut synthetic = vec![false; labels.len()];
    let mut parents = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for (class, members) in by_class.iter().enumerate() {
        let need = majority - members.len();
        if need == 0 {
            continue;
        }
        if members.len() <= cfg.k_neighbors {
            return Err(Error::Smote(format!(
                "class {class} has {} samples but k={} needs at least {}; lower k_neighbors",
                members.len(),
                cfg.k_neighbors,
                cfg.k_neighbors + 1
            )));
        }
        let neighbors = knn_within_class(x, members, cfg.k_neighbors);
        for _ in 0..need {
            let pick = rng.random_range(0..members.len());
            let i = members[pick];
            let j = neighbors[pick][rng.random_range(0..cfg.k_neighbors)];
            let u: f32 = rng.random();
            let xd = x.data();
            interpolate(&xd[i * d..(i + 1) * d], &xd[j * d..(j + 1) * d], u, &mut data);
            out_labels.push(class);
            synthetic.push(true);
            parents.push((i, j));
        }
    }

    let n = out_labels.len();
    Ok(SmoteOutcome {
        x: Tensor::new(&[n, d], data)?,
        labels: out_labels,
        synthetic,
        parents,
    })
}

pub fn class_histogram(labels: &[usize], num_classes: usize) -> Vec<usize> {
    let mut hist = vec![0usize; num_classes];
    for &l in labels {
        hist[l] += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clustered_set(hist: &[usize], d: usize, seed: u64) -> (Tensor, Vec<usize>) {
        // each class sits in its own box so nearest neighbors stay in-class
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (class, &count) in hist.iter().enumerate() {
            for _ in 0..count {
                for _ in 0..d {
                    data.push(class as f32 * 10.0 + rng.random::<f32>());
                }
                labels.push(class);
            }
        }
        let n = labels.len();
        (Tensor::new(&[n, d], data).unwrap(), labels)
    }

    #[test]
    fn interpolation_endpoints() {
        let a = [1.0, 5.0, -2.0];
        let b = [3.0, 5.0, -4.0];
        let mut at_zero = Vec::new();
        interpolate(&a, &b, 0.0, &mut at_zero);
        assert_eq!(at_zero, a);
        let mut at_one = Vec::new();
        interpolate(&a, &b, 1.0, &mut at_one);
        assert_eq!(at_one, b);
    }

    #[test]
    fn imbalanced_histogram_becomes_uniform() {
        let (x, labels) = clustered_set(&[20, 6, 40, 28], 3, 1);
        let out = smote(&x, &labels, 4, &SmoteConfig::default()).unwrap();
        assert_eq!(class_histogram(&out.labels, 4), [40, 40, 40, 40]);
        assert_eq!(out.labels.len(), 160);
        let synth_count = out.synthetic.iter().filter(|&&s| s).count();
        assert_eq!(synth_count, 20 + 34 + 0 + 12);
        assert_eq!(out.parents.len(), synth_count);
    }

    #[test]
    fn original_rows_and_majority_class_are_untouched() {
        let (x, labels) = clustered_set(&[10, 25, 8, 12], 4, 2);
        let out = smote(&x, &labels, 4, &SmoteConfig::default()).unwrap();
        let d = x.dim(1);
        assert_eq!(&out.x.data()[..x.numel()], x.data());
        assert_eq!(&out.labels[..labels.len()], &labels[..]);
        // class 1 is the majority: every one of its rows is an original
        let class1: Vec<usize> = (0..out.labels.len()).filter(|&i| out.labels[i] == 1).collect();
        assert_eq!(class1.len(), 25);
        assert!(class1.iter().all(|&i| !out.synthetic[i]));
        let _ = d;
    }

    #[test]
    fn synthetics_sit_inside_their_parents_hull() {
        let (x, labels) = clustered_set(&[30, 9, 14, 21], 5, 3);
        let out = smote(&x, &labels, 4, &SmoteConfig::default()).unwrap();
        let d = x.dim(1);
        let n_real = labels.len();
        for (s, &(i, j)) in out.parents.iter().enumerate() {
            let row = &out.x.data()[(n_real + s) * d..(n_real + s + 1) * d];
            let a = &x.data()[i * d..(i + 1) * d];
            let b = &x.data()[j * d..(j + 1) * d];
            assert_eq!(labels[i], out.labels[n_real + s]);
            assert_eq!(labels[j], out.labels[n_real + s]);
            for k in 0..d {
                assert!(row[k] >= a[k].min(b[k]) && row[k] <= a[k].max(b[k]));
            }
        }
    }

    #[test]
    fn seed_determinism() {
        let (x, labels) = clustered_set(&[12, 7, 18, 9], 3, 4);
        let a = smote(&x, &labels, 4, &SmoteConfig::default()).unwrap();
        let b = smote(&x, &labels, 4, &SmoteConfig::default()).unwrap();
        let c = smote(&x, &labels, 4, &SmoteConfig { seed: 7, ..Default::default() }).unwrap();
        assert_eq!(a.x.data(), b.x.data());
        assert_eq!(a.parents, b.parents);
        assert_ne!(a.x.data(), c.x.data());
    }

    #[test]
    fn class_smaller_than_k_plus_one_is_rejected() {
        let (x, labels) = clustered_set(&[4, 20], 3, 5);
        let err = smote(&x, &labels, 2, &SmoteConfig::default()).unwrap_err();
        assert!(err.to_string().contains("lower k_neighbors"), "{err}");
        // with a smaller k the same histogram is fine
        assert!(smote(&x, &labels, 2, &SmoteConfig { k_neighbors: 3, seed: 42 }).is_ok());
    }

    #[test]
    fn balanced_input_is_a_no_op() {
        let (x, labels) = clustered_set(&[8, 8], 3, 6);
        let out = smote(&x, &labels, 2, &SmoteConfig::default()).unwrap();
        assert_eq!(out.x.data(), x.data());
        assert!(out.parents.is_empty());
    }
}
