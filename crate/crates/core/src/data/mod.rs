//! Dataset plumbing: ingestion, preprocessing, stratified splitting, and
//! SMOTE, with an on-disk tensor cache in WeightArchive format.

pub mod ingest;
pub mod resize;
pub mod smote;
pub mod split;
pub mod toy;

use std::path::Path;
use std::str::FromStr;

use crate::archive::WeightArchive;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub use ingest::{ingest_directory, IngestOutcome};
pub use resize::resize_bilinear;
pub use smote::{class_histogram, smote, SmoteConfig, SmoteOutcome};
pub use split::{split_nested, SplitIndices, SplitSpec};

/// Dementia-severity classes in fixed order: Mild, Moderate, Non-, and Very
/// Mild Demented. Matches the alphabetical order of the dataset directories.
pub const CLASS_NAMES: [&str; 4] = ["MID", "MOD", "ND", "VMD"];

/// Raw decoded images with values in [0,255], one label per image.
#[derive(Debug, Clone)]
pub struct LabeledImageSet {
    pub images: Vec<Tensor>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub synthetic: Vec<bool>,
}

impl LabeledImageSet {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn histogram(&self) -> Vec<usize> {
        class_histogram(&self.labels, self.class_names.len())
    }
}

/// Preprocessed tensors: X in [0,1], Y one-hot rows.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Tensor,
    pub y: Tensor,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub synthetic: Vec<bool>,
}

pub fn one_hot(labels: &[usize], num_classes: usize) -> Result<Tensor> {
    let mut data = vec![0f32; labels.len() * num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(Error::Label(format!("label {l} out of range for {num_classes} classes")));
        }
        data[i * num_classes + l] = 1.0;
    }
    Tensor::new(&[labels.len(), num_classes], data)
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn histogram(&self) -> Vec<usize> {
        class_histogram(&self.labels, self.num_classes())
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        Ok(Dataset {
            x: self.x.gather_rows(indices)?,
            y: self.y.gather_rows(indices)?,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            synthetic: indices.iter().map(|&i| self.synthetic[i]).collect(),
        })
    }

    /// Cache file with entries "X", "Y", "provenance" (1.0 = synthetic).
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut archive = WeightArchive::new();
        archive.insert("X", self.x.clone())?;
        archive.insert("Y", self.y.clone())?;
        let flags: Vec<f32> = self.synthetic.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect();
        archive.insert("provenance", Tensor::new(&[flags.len()], flags)?)?;
        archive.save(path)
    }

    pub fn load_cache(path: &Path, class_names: &[String]) -> Result<Dataset> {
        let archive = WeightArchive::load(path)?;
        let x = archive.require("X")?.clone();
        let y = archive.require("Y")?.clone();
        let prov = archive.require("provenance")?;
        if y.rank() != 2 || y.dim(0) != x.dim(0) || prov.numel() != x.dim(0) {
            return Err(Error::Data(format!(
                "cache entries disagree: X {:?}, Y {:?}, provenance {:?}",
                x.shape(),
                y.shape(),
                prov.shape()
            )));
        }
        if y.dim(1) != class_names.len() {
            return Err(Error::Data(format!(
                "cache has {} classes but {} names were supplied",
                y.dim(1),
                class_names.len()
            )));
        }
        let c = y.dim(1);
        let labels = y
            .data()
            .chunks_exact(c)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite one-hot"))
                    .map(|(i, _)| i)
                    .expect("non-empty row")
            })
            .collect();
        Ok(Dataset {
            x,
            y,
            labels,
            class_names: class_names.to_vec(),
            synthetic: prov.data().iter().map(|&v| v != 0.0).collect(),
        })
    }
}

/// Divides every pixel by 255 and one-hot encodes the labels. All images must
/// share one shape and hold values in [0,255].
pub fn normalize_and_encode(set: &LabeledImageSet) -> Result<Dataset> {
    if set.is_empty() {
        return Err(Error::Data("cannot encode an empty image set".into()));
    }
    if set.images.len() != set.labels.len() {
        return Err(Error::Data(format!(
            "{} images but {} labels",
            set.images.len(),
            set.labels.len()
        )));
    }
    let shape = set.images[0].shape().to_vec();
    let mut data = Vec::with_capacity(set.len() * set.images[0].numel());
    for (i, img) in set.images.iter().enumerate() {
        if img.shape() != shape {
            return Err(Error::Data(format!(
                "image {i} has shape {:?}, expected {shape:?}; resize first",
                img.shape()
            )));
        }
        for &v in img.data() {
            if !(0.0..=255.0).contains(&v) {
                return Err(Error::Data(format!("image {i} has pixel {v} outside [0,255]")));
            }
            data.push(v / 255.0);
        }
    }
    let x = Tensor::new(&[set.len(), shape[0], shape[1], shape[2]], data)?;
    let y = one_hot(&set.labels, set.class_names.len())?;
    Ok(Dataset {
        x,
        y,
        labels: set.labels.clone(),
        class_names: set.class_names.clone(),
        synthetic: set.synthetic.clone(),
    })
}

/// Resizes every image to `h`×`w` with bilinear interpolation.
pub fn resize_set(set: &LabeledImageSet, h: usize, w: usize) -> Result<LabeledImageSet> {
    let images = set
        .images
        .iter()
        .map(|img| resize_bilinear(img, h, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledImageSet {
        images,
        labels: set.labels.clone(),
        class_names: set.class_names.clone(),
        synthetic: set.synthetic.clone(),
    })
}

/// Oversamples a preprocessed dataset; rows are flattened to vectors for the
/// neighbor search and reshaped back afterwards.
pub fn smote_dataset(ds: &Dataset, cfg: &SmoteConfig) -> Result<Dataset> {
    let n = ds.len();
    let feature_dims: Vec<usize> = ds.x.shape()[1..].to_vec();
    let d: usize = feature_dims.iter().product();
    let flat = ds.x.clone().reshape(&[n, d])?;
    let out = smote(&flat, &ds.labels, ds.num_classes(), cfg)?;
    let n_new = out.labels.len();
    let mut shape = vec![n_new];
    shape.extend(&feature_dims);
    Ok(Dataset {
        x: out.x.reshape(&shape)?,
        y: one_hot(&out.labels, ds.num_classes())?,
        labels: out.labels,
        class_names: ds.class_names.clone(),
        synthetic: out.synthetic,
    })
}

/// Stratified nested split of a preprocessed dataset.
pub fn split_dataset(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let idx = split_nested(&ds.labels, ds.num_classes(), spec)?;
    for (name, part) in [("train", &idx.train), ("val", &idx.val), ("test", &idx.test)] {
        if part.is_empty() {
            return Err(Error::Split(format!(
                "the {name} split came out empty; supply more samples per class"
            )));
        }
    }
    Ok((ds.subset(&idx.train)?, ds.subset(&idx.val)?, ds.subset(&idx.test)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Smote,
    NoSmote,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smote" => Ok(Scenario::Smote),
            "no-smote" => Ok(Scenario::NoSmote),
            other => Err(Error::Config(format!(
                "unknown scenario {other:?}; expected smote or no-smote"
            ))),
        }
    }
}

/// Where oversampling happens relative to the split: `Paper` follows the
/// published procedure (oversample, then split — interpolated samples can
/// land in the test set); `AfterSplit` confines synthesis to the training
/// split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoteOrder {
    Paper,
    AfterSplit,
}

impl FromStr for SmoteOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(SmoteOrder::Paper),
            "after-split" => Ok(SmoteOrder::AfterSplit),
            other => Err(Error::Config(format!(
                "unknown smote order {other:?}; expected paper or after-split"
            ))),
        }
    }
}
