//! Output grid geometry and the uniform-average guide image.
//!
//! Output pixel `p` is centered at input coordinate
//! `floor(p * factor + factor / 2)` on each axis, and its window extends
//! `ceil(factor)` pixels on either side of that center, clipped to the
//! input. For integer factor `s` the window side is `2s + 1`. Windows of
//! neighboring output pixels overlap.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::Plane;

/// Low-resolution guide plane; one rounded window mean per output pixel.
pub type GuideImage = Plane;

/// Downscaling factor together with the geometry it implies for a given
/// input size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSpec {
    factor: f64,
    half: usize,
    in_width: usize,
    in_height: usize,
    out_width: usize,
    out_height: usize,
}

impl ScaleSpec {
    pub fn new(in_width: usize, in_height: usize, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor <= 1.0 {
            return Err(Error::InvalidFactor(factor));
        }
        let out_width = (in_width as f64 / factor).floor() as usize;
        let out_height = (in_height as f64 / factor).floor() as usize;
        if out_width == 0 || out_height == 0 {
            return Err(Error::ImageTooSmall {
                width: in_width,
                height: in_height,
                factor,
            });
        }
        Ok(ScaleSpec {
            factor,
            half: factor.ceil() as usize,
            in_width,
            in_height,
            out_width,
            out_height,
        })
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// Window half-width, `ceil(factor)`.
    pub fn half(&self) -> usize {
        self.half
    }

    /// Window side before clipping, `2 * half + 1`.
    pub fn window_side(&self) -> usize {
        2 * self.half + 1
    }

    pub fn in_width(&self) -> usize {
        self.in_width
    }

    pub fn in_height(&self) -> usize {
        self.in_height
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    pub fn out_height(&self) -> usize {
        self.out_height
    }

    /// Input (row, col) at the center of output pixel (row, col).
    pub fn output_center(&self, row: usize, col: usize) -> (usize, usize) {
        (
            center(row, self.factor, self.in_height),
            center(col, self.factor, self.in_width),
        )
    }

    /// Input column at the center of output column `col`.
    pub fn center_col(&self, col: usize) -> usize {
        center(col, self.factor, self.in_width)
    }

    /// Input row at the center of output row `row`.
    pub fn center_row(&self, row: usize) -> usize {
        center(row, self.factor, self.in_height)
    }

    /// Clipped input columns covered by output column `col`.
    pub fn window_cols(&self, col: usize) -> Range<usize> {
        window(center(col, self.factor, self.in_width), self.half, self.in_width)
    }

    /// Clipped input rows covered by output row `row`.
    pub fn window_rows(&self, row: usize) -> Range<usize> {
        window(center(row, self.factor, self.in_height), self.half, self.in_height)
    }

    pub(crate) fn check_plane(&self, plane: &Plane) -> Result<()> {
        if plane.width() != self.in_width || plane.height() != self.in_height {
            return Err(Error::DimensionMismatch(format!(
                "plane is {}x{}, scale spec expects {}x{}",
                plane.width(),
                plane.height(),
                self.in_width,
                self.in_height
            )));
        }
        Ok(())
    }
}

/// Shorthand for [`ScaleSpec::new`].
pub fn make_scale_spec(in_width: usize, in_height: usize, factor: f64) -> Result<ScaleSpec> {
    ScaleSpec::new(in_width, in_height, factor)
}

fn center(p: usize, factor: f64, len: usize) -> usize {
    let c = (p as f64 * factor + factor / 2.0).floor() as usize;
    c.min(len - 1)
}

fn window(center: usize, half: usize, len: usize) -> Range<usize> {
    center.saturating_sub(half)..(center + half + 1).min(len)
}

/// Round half away from zero and clamp to the 8-bit range.
#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Uniform window average at every output pixel, rounded to integers.
pub fn compute_guide(plane: &Plane, spec: &ScaleSpec) -> Result<GuideImage> {
    spec.check_plane(plane)?;
    let (w, h) = (plane.width(), plane.height());

    // summed-area table with a zero first row and column
    let stride = w + 1;
    let mut sat = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut run = 0u64;
        for (x, &v) in plane.row(y).iter().enumerate() {
            run += v as u64;
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + run;
        }
    }

    let cols: Vec<Range<usize>> = (0..spec.out_width).map(|c| spec.window_cols(c)).collect();
    let mut out = vec![0u8; spec.out_width * spec.out_height];
    out.par_chunks_mut(spec.out_width)
        .enumerate()
        .for_each(|(oy, line)| {
            let rows = spec.window_rows(oy);
            for (dst, xs) in line.iter_mut().zip(&cols) {
                let sum = sat[rows.end * stride + xs.end] + sat[rows.start * stride + xs.start]
                    - sat[rows.start * stride + xs.end]
                    - sat[rows.end * stride + xs.start];
                let n = (rows.len() * xs.len()) as f64;
                *dst = to_u8(sum as f64 / n);
            }
        });
    Plane::new(spec.out_width, spec.out_height, out)
}
