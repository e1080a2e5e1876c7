//! Memoryless relay networks and their generalized SNR.
//!
//! Amplify-, demodulate- and estimate-and-forward relay maps over discrete
//! constellations in unit-power Gaussian noise, with quadrature and Monte Carlo
//! evaluation of single, parallel, serial and hybrid networks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod constellation;
pub mod error;
pub mod gsnr;
pub mod network;
pub mod quadrature;
pub mod relayfn;
pub mod sim;

pub use channel::{gaussian_density, push_through_relay, ChannelDensity, GaussianLink, GridSpec, Mixture};
pub use constellation::{make_pam, make_psk, make_qam, q_function, Constellation, Modulation, SourceModel};
pub use error::{Error, Result};
pub use gsnr::{decompose, GsnrReport, Method, MmseRelation};
pub use num_complex::Complex64;
pub use relayfn::{RelayFunction, RelayKind};
