//! Large-scale image downscaling guided by intensity co-occurrence.
//!
//! The pipeline per channel: learn a 256×256 co-occurrence profile of the
//! input ([`cooc`]), build a box-averaged guide on the output grid
//! ([`guide`]), then filter each output window with weights
//! `exp(alpha · Cn(G(p), I(j)))` ([`lsid`]). [`baselines`], [`metrics`] and
//! [`bench`] provide reference resamplers, PSNR/SSIM and a batch harness.

pub mod baselines;
pub mod bench;
pub mod cooc;
pub mod error;
pub mod guide;
pub mod lsid;
pub mod method;
pub mod metrics;
pub mod raster;

pub use error::{Error, Result};
pub use guide::{make_scale_spec, ScaleSpec};
pub use lsid::LsidParams;
pub use method::Method;
pub use raster::{load_image, merge_channels, save_image, Plane, Raster};
