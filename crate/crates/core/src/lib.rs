//! ARFIMA(p, d, q) long-memory modelling: Whittle estimation, exact
//! autocovariances, asymptotic covariance, impulse responses, simulation,
//! forecasting and predictive-ability testing.

// `!(x < y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acvf;
pub mod asymp_cov;
pub mod error;
pub mod gw;
pub mod hypergeo;
pub mod irf;
pub mod model;
pub mod optim;
pub mod par;
pub mod poly;
pub mod quad;
pub mod simulate;
pub mod spectral;
pub mod special;
pub mod whittle;

pub use error::{ArfimaError, Result};
pub use model::{ArfimaModel, StationarityReport, TimeSeries};
