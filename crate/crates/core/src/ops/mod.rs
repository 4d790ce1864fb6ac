//! Layer primitives: each forward has a matching hand-derived backward.

pub mod activation;
pub mod batchnorm;
pub mod conv;
pub mod dense;
pub mod gradcheck;
pub mod loss;
pub mod pool;

pub use activation::{relu, relu_backward, softmax};
pub use batchnorm::{batchnorm_backward, batchnorm_infer, batchnorm_train, BnCache};
pub use conv::{conv2d, conv2d_backward};
pub use dense::{dense, dense_backward};
pub use gradcheck::{gradient_check, GradCheck, DEFAULT_STEP};
pub use loss::{cross_entropy, flatten, flatten_backward, softmax_cross_entropy, PROB_FLOOR};
pub use pool::{pool2d, pool2d_backward, PoolCache, PoolMode};
