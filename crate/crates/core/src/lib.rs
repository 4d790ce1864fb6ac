//! Training and inference engine for small convolutional classifiers over
//! brain MRI slices, with no external ML runtime: dense f32 tensors, hand
//! written forward/backward passes, Adam, and an evaluation toolkit covering
//! confusion matrices, ROC/AUC, ensembling, and the Wilcoxon signed-rank test.

pub mod archive;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod ops;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::Tensor;
