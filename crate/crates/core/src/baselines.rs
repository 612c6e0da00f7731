//! Reference downscalers: box average, Keys bicubic and Lanczos-3.
//!
//! All three sample at the same output centers as the LSID pipeline. The
//! bicubic and Lanczos kernels are stretched by the scale factor for
//! anti-aliasing, applied separably with clamp-to-edge borders, and their
//! taps are renormalized to sum to one.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::Result;
use crate::guide::{compute_guide, to_u8, ScaleSpec};
use crate::raster::{merge_channels, Plane, Raster};

/// Keys cubic convolution parameter.
pub const KEYS_A: f64 = -0.5;
pub const LANCZOS_LOBES: f64 = 3.0;

/// Per-channel uniform window average; the same pathway that builds the
/// LSID guide image.
pub fn downscale_box(img: &Raster, factor: f64) -> Result<Raster> {
    let spec = ScaleSpec::new(img.width(), img.height(), factor)?;
    let planes = img
        .split_channels()
        .par_iter()
        .map(|p| compute_guide(p, &spec))
        .collect::<Result<Vec<_>>>()?;
    merge_channels(planes)
}

pub fn downscale_bicubic(img: &Raster, factor: f64) -> Result<Raster> {
    resample(img, factor, &Kernel::Cubic)
}

pub fn downscale_lanczos(img: &Raster, factor: f64) -> Result<Raster> {
    resample(img, factor, &Kernel::Lanczos3)
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Kernel {
    Cubic,
    Lanczos3,
}

impl Kernel {
    fn support(&self) -> f64 {
        match self {
            Kernel::Cubic => 2.0,
            Kernel::Lanczos3 => LANCZOS_LOBES,
        }
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        match self {
            Kernel::Cubic => keys_cubic(x, KEYS_A),
            Kernel::Lanczos3 => lanczos(x, LANCZOS_LOBES),
        }
    }
}

pub fn keys_cubic(x: f64, a: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

pub fn lanczos(x: f64, lobes: f64) -> f64 {
    if x.abs() < lobes {
        sinc(x) * sinc(x / lobes)
    } else {
        0.0
    }
}

/// Normalized taps for one output sample: weight `i` applies to input
/// index `start + i`.
#[derive(Debug, Clone)]
pub(crate) struct Taps {
    pub(crate) start: usize,
    pub(crate) weights: Vec<f64>,
}

/// Taps for every output index along one axis. Out-of-range inputs are
/// folded onto the nearest edge sample.
pub(crate) fn axis_taps(
    in_len: usize,
    out_len: usize,
    factor: f64,
    center: impl Fn(usize) -> usize,
    kernel: &Kernel,
) -> Vec<Taps> {
    let radius = kernel.support() * factor;
    (0..out_len)
        .map(|p| {
            let c = center(p) as f64;
            let lo = (c - radius).ceil() as i64;
            let hi = (c + radius).floor() as i64;
            let clamp = |j: i64| j.clamp(0, in_len as i64 - 1) as usize;
            let start = clamp(lo);
            let mut weights = vec![0.0; clamp(hi) - start + 1];
            for j in lo..=hi {
                weights[clamp(j) - start] += kernel.eval((j as f64 - c) / factor);
            }
            let sum: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= sum);
            Taps { start, weights }
        })
        .collect()
}

fn resample(img: &Raster, factor: f64, kernel: &Kernel) -> Result<Raster> {
    let spec = ScaleSpec::new(img.width(), img.height(), factor)?;
    let xtaps = axis_taps(spec.in_width(), spec.out_width(), factor, |c| spec.center_col(c), kernel);
    let ytaps = axis_taps(spec.in_height(), spec.out_height(), factor, |r| spec.center_row(r), kernel);
    let planes = img
        .split_channels()
        .par_iter()
        .map(|p| resample_plane(p, &spec, &xtaps, &ytaps))
        .collect::<Result<Vec<_>>>()?;
    merge_channels(planes)
}

fn resample_plane(plane: &Plane, spec: &ScaleSpec, xtaps: &[Taps], ytaps: &[Taps]) -> Result<Plane> {
    let (out_w, out_h) = (spec.out_width(), spec.out_height());

    // horizontal pass over every input row
    let mut tmp = vec![0.0f64; out_w * plane.height()];
    tmp.par_chunks_mut(out_w).enumerate().for_each(|(y, line)| {
        let row = plane.row(y);
        for (dst, t) in line.iter_mut().zip(xtaps) {
            *dst = t
                .weights
                .iter()
                .zip(&row[t.start..])
                .map(|(w, &v)| w * v as f64)
                .sum();
        }
    });

    let mut out = vec![0u8; out_w * out_h];
    out.par_chunks_mut(out_w).zip(ytaps).for_each(|(line, t)| {
        for (x, dst) in line.iter_mut().enumerate() {
            let v: f64 = t
                .weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * tmp[(t.start + i) * out_w + x])
                .sum();
            *dst = to_u8(v);
        }
    });
    Plane::new(out_w, out_h, out)
}
