use std::fmt;
use std::str::FromStr;

use crate::baselines::{downscale_bicubic, downscale_box, downscale_lanczos};
use crate::error::{Error, Result};
use crate::lsid::{downscale_image, LsidParams};
use crate::raster::Raster;

/// Built-in downscaling methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Lsid,
    Box,
    Bicubic,
    Lanczos,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lsid, Method::Box, Method::Bicubic, Method::Lanczos];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Lsid => "lsid",
            Method::Box => "box",
            Method::Bicubic => "bicubic",
            Method::Lanczos => "lanczos",
        }
    }

    /// Downscale `img` by `params.factor`. Only LSID reads `alpha` and `k`.
    pub fn run(&self, img: &Raster, params: &LsidParams) -> Result<Raster> {
        match self {
            Method::Lsid => downscale_image(img, params),
            Method::Box => downscale_box(img, params.factor),
            Method::Bicubic => downscale_bicubic(img, params.factor),
            Method::Lanczos => downscale_lanczos(img, params.factor),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method '{s}' (expected lsid, box, bicubic or lanczos)")))
    }
}
