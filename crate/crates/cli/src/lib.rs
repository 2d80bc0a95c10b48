//! File formats, reports and the command pipeline behind the `lora-place`
//! binary. The numerical work lives in `lora-place-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod gridio;
pub mod render;
pub mod report;
pub mod scene_json;

pub use error::{Error, Result};
