//! Special functions, quadrature, 1-D optimization and random streams shared
//! by the rest of the crate.

pub mod optimize;
pub mod quadrature;
pub mod random;
pub mod special;

pub use optimize::{maximize_concave_1d, minimize_convex_1d};
pub use quadrature::{integrate_1d, integrate_with_breaks, QuadratureSpec};
pub use random::{stream_uniform, RandomStream, StreamCursor};
pub use special::{
    log_normal_cdf, log_q_tail, normal_cdf, normal_pdf, normal_quantile, q_tail, q_tail_inverse,
};
