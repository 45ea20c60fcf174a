//! Fairness auditing of tabular binary classifiers: local surrogate
//! explanations, their global aggregation over a picked set of instances,
//! and a feature-dropout ensemble that repairs models relying on sensitive
//! features.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod cli;
pub mod data;
pub mod error;
pub mod global;
pub mod lime;
pub mod models;
pub mod scalar;
pub mod seed;

pub use error::{Error, Result};

pub type LocalExplanation64 = lime::LocalExplanation<f64>;
pub type LocalExplanation32 = lime::LocalExplanation<f32>;
pub type GlobalExplanation64 = global::GlobalExplanation<f64>;
pub type GlobalExplanation32 = global::GlobalExplanation<f32>;
pub type RidgeFit64 = lime::RidgeFit<f64>;
pub type RidgeFit32 = lime::RidgeFit<f32>;
