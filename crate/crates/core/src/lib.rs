//! Dimension reduction and intrinsic dimension estimation.
//!
//! Reducers take an `n x p` [`DataMatrix`], preprocess it, and return a
//! [`ReductionResult`] holding the `n x d` embedding, the preprocessing
//! record, and for linear methods the `p x d` projection. Estimators return
//! an [`IdeResult`] with a global estimate and, for bottom-up schemes,
//! per-point local estimates.

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod estimate;
pub mod generate;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod preprocess;
pub mod reduce;

pub use data::{apply_to_new, validate, DataMatrix, IdeResult, Labels, MethodKind, ReductionResult, TargetDim};
pub use error::{DimError, Result};
pub use preprocess::{preprocess, PreprocessKind, PreprocessRecord};
