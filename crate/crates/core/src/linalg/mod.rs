//! Dense linear algebra: matrices, SVD, PCA and the projection and
//! thresholding maps behind the model constraint sets.

mod matrix;
mod pca;
mod projection;
mod svd;

pub use matrix::Matrix;
pub use pca::{pca_fit_transform, PcaFit};
pub(crate) use projection::project_l2_ball_in_place;
pub use projection::{project_l2_ball, project_simplex_scaled, project_trace_ball, svt};
pub use svd::{svd, trace_norm, SvdResult};
