//! Scenario drivers behind the `gmdet` binary: spec checking, the Fourier
//! family, the Kloosterman pipeline and the period lab.

pub mod check;
pub mod fourier;
pub mod input;
pub mod report;
pub mod golden;
pub mod kloosterman;
pub mod periods;
