//! Exact Gauss–Manin determinants, epsilon-factor corrections and
//! exponential period computations for connections on the projective line.

pub mod field;
pub mod forms;
pub mod connection;
pub mod derham;
pub mod epsilon;
pub mod periods;
