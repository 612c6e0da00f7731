//! Co-occurrence guided kernel filtering.
//!
//! Each output pixel `p` is a weighted mean over its input window `Ω(p)`:
//!
//! ```text
//! J(p) = Σ w(p, j) · I(j) / Σ w(p, j),   w(p, j) = exp(α · Cn(G(p), I(j)))
//! ```
//!
//! where `G` is the rounded box-average guide and `Cn` the max-normalized
//! co-occurrence profile of the input channel. Since the weight depends only
//! on the pair `(G(p), I(j))`, a 256×256 table of weights is built once per
//! plane and the inner loop is two lookups and two additions per pixel.
//! Window pixels are visited in raster order so the floating-point sums do
//! not depend on scheduling.

use rayon::prelude::*;

use crate::cooc::{compute_profile, CoocProfile, LEVELS};
use crate::error::{Error, Result};
use crate::guide::{compute_guide, to_u8, GuideImage, ScaleSpec};
use crate::raster::{merge_channels, Plane, Raster};

pub const DEFAULT_ALPHA: f64 = 5.0;
pub const DEFAULT_K: usize = 3;
/// Largest accepted `|alpha|`.
pub const MAX_ALPHA: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsidParams {
    /// Range-kernel strength; negative values favor rare intensity pairs.
    pub alpha: f64,
    /// Neighborhood radius for profile learning.
    pub k: usize,
    pub factor: f64,
}

impl LsidParams {
    /// Parameters with the default `alpha = 5` and `k = 3`.
    pub fn new(factor: f64) -> Self {
        LsidParams {
            alpha: DEFAULT_ALPHA,
            k: DEFAULT_K,
            factor,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha.abs() > MAX_ALPHA {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if self.k == 0 {
            return Err(Error::InvalidRadius { k: 0, max: usize::MAX });
        }
        if !self.factor.is_finite() || self.factor <= 1.0 {
            return Err(Error::InvalidFactor(self.factor));
        }
        Ok(())
    }
}

/// Range-kernel weight for normalized co-occurrence `c`.
#[inline]
pub fn weight(c: f64, alpha: f64) -> f64 {
    (alpha * c).exp()
}

/// Per-guide-value weights `w[g][b]` and weighted intensities `w[g][b] · b`.
struct WeightTable {
    w: Vec<f64>,
    wv: Vec<f64>,
}

impl WeightTable {
    /// Rows are filled only for guide values that occur in `guide`.
    fn new(profile: &CoocProfile, alpha: f64, guide: &GuideImage) -> Self {
        let mut used = [false; LEVELS];
        for &g in guide.data() {
            used[g as usize] = true;
        }
        let mut w = vec![0.0; LEVELS * LEVELS];
        let mut wv = vec![0.0; LEVELS * LEVELS];
        for g in (0..LEVELS).filter(|&g| used[g]) {
            let norm = profile.norm_row(g as u8);
            let row = g * LEVELS;
            for (b, &c) in norm.iter().enumerate() {
                let weight = weight(c, alpha);
                w[row + b] = weight;
                wv[row + b] = weight * b as f64;
            }
        }
        WeightTable { w, wv }
    }

    #[inline]
    fn rows(&self, g: u8) -> (&[f64], &[f64]) {
        let start = g as usize * LEVELS;
        (&self.w[start..start + LEVELS], &self.wv[start..start + LEVELS])
    }
}

fn check_inputs(
    plane: &Plane,
    guide: &GuideImage,
    profile: &CoocProfile,
    params: &LsidParams,
    spec: &ScaleSpec,
) -> Result<()> {
    params.validate()?;
    spec.check_plane(plane)?;
    if guide.width() != spec.out_width() || guide.height() != spec.out_height() {
        return Err(Error::DimensionMismatch(format!(
            "guide is {}x{}, output is {}x{}",
            guide.width(),
            guide.height(),
            spec.out_width(),
            spec.out_height()
        )));
    }
    if profile.k() != params.k {
        return Err(Error::RadiusMismatch(profile.k(), params.k));
    }
    if spec.factor() != params.factor {
        return Err(Error::DimensionMismatch(format!(
            "scale spec factor {} differs from parameter factor {}",
            spec.factor(),
            params.factor
        )));
    }
    Ok(())
}

fn filter<T, F>(
    plane: &Plane,
    guide: &GuideImage,
    profile: &CoocProfile,
    params: &LsidParams,
    spec: &ScaleSpec,
    finish: F,
) -> Result<Vec<T>>
where
    T: Copy + Default + Send,
    F: Fn(f64) -> T + Sync,
{
    check_inputs(plane, guide, profile, params, spec)?;
    let table = WeightTable::new(profile, params.alpha, guide);
    let cols: Vec<_> = (0..spec.out_width()).map(|c| spec.window_cols(c)).collect();

    let mut out = vec![T::default(); spec.out_width() * spec.out_height()];
    out.par_chunks_mut(spec.out_width())
        .enumerate()
        .for_each(|(oy, line)| {
            let rows = spec.window_rows(oy);
            for (ox, (dst, xs)) in line.iter_mut().zip(&cols).enumerate() {
                let (w, wv) = table.rows(guide.get(ox, oy));
                let (mut num, mut den) = (0.0f64, 0.0f64);
                for y in rows.clone() {
                    for &v in &plane.row(y)[xs.clone()] {
                        num += wv[v as usize];
                        den += w[v as usize];
                    }
                }
                *dst = finish(num / den);
            }
        });
    Ok(out)
}

/// Filtered output before rounding, one value per output pixel in raster
/// order.
pub fn filter_values(
    plane: &Plane,
    guide: &GuideImage,
    profile: &CoocProfile,
    params: &LsidParams,
    spec: &ScaleSpec,
) -> Result<Vec<f64>> {
    filter(plane, guide, profile, params, spec, |v| v)
}

/// Downscale one channel given its guide and co-occurrence profile.
pub fn downscale_plane(
    plane: &Plane,
    guide: &GuideImage,
    profile: &CoocProfile,
    params: &LsidParams,
    spec: &ScaleSpec,
) -> Result<Plane> {
    let data = filter(plane, guide, profile, params, spec, to_u8)?;
    Plane::new(spec.out_width(), spec.out_height(), data)
}

/// Downscaled image together with the guide image used to produce it.
#[derive(Debug, Clone)]
pub struct LsidOutput {
    pub image: Raster,
    pub guide: Raster,
}

/// Run the full pipeline on every channel independently.
pub fn downscale_image(img: &Raster, params: &LsidParams) -> Result<Raster> {
    downscale_image_with_guide(img, params).map(|out| out.image)
}

pub fn downscale_image_with_guide(img: &Raster, params: &LsidParams) -> Result<LsidOutput> {
    params.validate()?;
    let spec = ScaleSpec::new(img.width(), img.height(), params.factor)?;
    let per_channel: Vec<(Plane, Plane)> = img
        .split_channels()
        .into_par_iter()
        .map(|plane| {
            let profile = compute_profile(&plane, params.k)?;
            let guide = compute_guide(&plane, &spec)?;
            let out = downscale_plane(&plane, &guide, &profile, params, &spec)?;
            Ok((out, guide))
        })
        .collect::<Result<_>>()?;
    let (planes, guides): (Vec<_>, Vec<_>) = per_channel.into_iter().unzip();
    Ok(LsidOutput {
        image: merge_channels(planes)?,
        guide: merge_channels(guides)?,
    })
}
