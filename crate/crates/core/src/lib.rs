//! Measure-valued solutions of the linear continuity equation by
//! characteristics, with concave-cost optimal transport diagnostics.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod measure;
pub mod numeric;
pub mod quadrature;
pub mod cost;
pub mod fields;
pub mod transport;
pub mod flow;
pub mod diagnostics;
pub mod instances;
pub mod io;
pub mod scenario;
pub mod selftest;
