//! Intensity co-occurrence profiles.
//!
//! For every pixel `i` and every offset in the square `[-k, k]²` (origin
//! included) whose target `j` lies inside the plane, the pair
//! `(I(i), I(j))` is counted once. Neighborhoods are clipped at the border.
//! Because the offset square is centrally symmetric and clipping is
//! symmetric, the resulting 256×256 matrix is symmetric.

use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{save_image, Plane, Raster};

pub const LEVELS: usize = 256;
const CELLS: usize = LEVELS * LEVELS;

/// Co-occurrence counts of one channel and their max-normalized form.
#[derive(Clone, PartialEq)]
pub struct CoocProfile {
    k: usize,
    counts: Vec<u64>,
    norm: Vec<f64>,
    max: u64,
}

impl std::fmt::Debug for CoocProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoocProfile")
            .field("k", &self.k)
            .field("max", &self.max)
            .field("total", &self.total())
            .finish()
    }
}

impl CoocProfile {
    fn from_counts(k: usize, counts: Vec<u64>) -> Self {
        debug_assert_eq!(counts.len(), CELLS);
        let max = counts.iter().copied().max().unwrap_or(0);
        let norm = if max == 0 {
            vec![0.0; CELLS]
        } else {
            let m = max as f64;
            counts.iter().map(|&c| c as f64 / m).collect()
        };
        CoocProfile { k, counts, norm, max }
    }

    /// Neighborhood radius the profile was learned with.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self, a: u8, b: u8) -> u64 {
        self.counts[index(a, b)]
    }

    pub fn norm(&self, a: u8, b: u8) -> f64 {
        self.norm[index(a, b)]
    }

    /// Row-major 256×256 counts; entry `a * 256 + b` is `C(a, b)`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Row-major 256×256 normalized counts in `[0, 1]`.
    pub fn norm_matrix(&self) -> &[f64] {
        &self.norm
    }

    /// Normalized row for guide intensity `a`.
    pub fn norm_row(&self, a: u8) -> &[f64] {
        let start = a as usize * LEVELS;
        &self.norm[start..start + LEVELS]
    }

    pub fn max_count(&self) -> u64 {
        self.max
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Grayscale 256×256 log-scaled view: pixel at row `a`, column `b` is
    /// `round(255 · ln(1 + C(a,b)) / ln(1 + max C))`.
    pub fn heatmap(&self) -> Raster {
        let denom = (1.0 + self.max as f64).ln();
        let data = self
            .counts
            .iter()
            .map(|&c| {
                if self.max == 0 {
                    0
                } else {
                    (255.0 * (1.0 + c as f64).ln() / denom).round().clamp(0.0, 255.0) as u8
                }
            })
            .collect();
        Raster::new(LEVELS, LEVELS, 1, data).expect("256x256 heatmap")
    }

    /// 256 lines of 256 comma-separated counts, line `a` holding `C(a, ·)`.
    pub fn counts_csv(&self) -> String {
        let mut out = String::with_capacity(CELLS * 4);
        for row in self.counts.chunks_exact(LEVELS) {
            for (b, c) in row.iter().enumerate() {
                if b > 0 {
                    out.push(',');
                }
                write!(out, "{c}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[inline]
fn index(a: u8, b: u8) -> usize {
    (a as usize) << 8 | b as usize
}

fn check_radius(plane: &Plane, k: usize) -> Result<()> {
    let max = plane.width().min(plane.height());
    if k == 0 || k > max {
        return Err(Error::InvalidRadius { k, max });
    }
    Ok(())
}

/// Learn the co-occurrence profile of `plane` with neighborhood radius `k`.
///
/// Rows are split across the rayon pool; each worker fills a private count
/// matrix and the matrices are summed, so the result does not depend on the
/// number of threads.
pub fn compute_profile(plane: &Plane, k: usize) -> Result<CoocProfile> {
    check_radius(plane, k)?;
    let height = plane.height();
    let chunk = rows_per_chunk(plane);
    let chunks: Vec<Range<usize>> = (0..height)
        .step_by(chunk)
        .map(|start| start..(start + chunk).min(height))
        .collect();

    // Pairs for the "forward" half of the offset square; the backward half
    // is the transpose of these counts.
    let half = chunks
        .into_par_iter()
        .map(|rows| {
            let mut counts = vec![0u64; CELLS];
            accumulate(plane, k, rows, &mut counts, true);
            counts
        })
        .reduce(|| vec![0u64; CELLS], add_into);

    let mut counts = vec![0u64; CELLS];
    for a in 0..LEVELS {
        for b in 0..LEVELS {
            counts[a * LEVELS + b] = half[a * LEVELS + b] + half[b * LEVELS + a];
        }
    }
    // zero offset: each pixel pairs with itself
    for &v in plane.data() {
        counts[index(v, v)] += 1;
    }
    Ok(CoocProfile::from_counts(k, counts))
}

/// Profile of the pairs whose first pixel lies in `rows`, counted over the
/// full offset square. Merging the partial profiles of a row partition
/// gives [`compute_profile`] of the whole plane.
pub fn compute_partial_profile(plane: &Plane, k: usize, rows: Range<usize>) -> Result<CoocProfile> {
    check_radius(plane, k)?;
    if rows.start >= rows.end || rows.end > plane.height() {
        return Err(Error::InvalidRaster(format!(
            "row range {rows:?} outside plane of height {}",
            plane.height()
        )));
    }
    let mut counts = vec![0u64; CELLS];
    accumulate(plane, k, rows, &mut counts, false);
    Ok(CoocProfile::from_counts(k, counts))
}

/// Sum the counts of several profiles learned with the same `k`.
pub fn merge_profiles(parts: &[CoocProfile]) -> Result<CoocProfile> {
    let first = parts.first().ok_or(Error::NoProfiles)?;
    if let Some(p) = parts.iter().find(|p| p.k != first.k) {
        return Err(Error::RadiusMismatch(first.k, p.k));
    }
    let counts = parts
        .iter()
        .fold(vec![0u64; CELLS], |acc, p| add_into(acc, p.counts.clone()));
    Ok(CoocProfile::from_counts(first.k, counts))
}

/// Write the log-scaled heatmap PNG to `heatmap_path` and the raw counts
/// CSV to `csv_path`, or next to the heatmap with a `.csv` extension.
pub fn export_heatmap(
    profile: &CoocProfile,
    heatmap_path: impl AsRef<Path>,
    csv_path: Option<&Path>,
) -> Result<PathBuf> {
    let heatmap_path = heatmap_path.as_ref();
    save_image(&profile.heatmap(), heatmap_path)?;
    let csv_path = csv_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| heatmap_path.with_extension("csv"));
    fs::write(&csv_path, profile.counts_csv()).map_err(|e| Error::io(&csv_path, e))?;
    Ok(csv_path)
}

fn add_into(mut acc: Vec<u64>, other: Vec<u64>) -> Vec<u64> {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
    acc
}

fn rows_per_chunk(plane: &Plane) -> usize {
    let workers = rayon::current_num_threads().max(1);
    let by_workers = plane.height().div_ceil(workers * 4);
    // small chunks cost a 512 KiB matrix each
    let min_rows = (1 << 16) / plane.width().max(1) + 1;
    by_workers.max(min_rows).max(1)
}

/// Count pairs `(I(i), I(i + o))` for every `i` in `rows`. With
/// `forward_only` the offsets are restricted to the half of the square that
/// comes after the origin in raster order, and the origin is skipped.
fn accumulate(plane: &Plane, k: usize, rows: Range<usize>, counts: &mut [u64], forward_only: bool) {
    let (w, h) = (plane.width() as isize, plane.height() as isize);
    let k = k as isize;
    for dy in -k..=k {
        for dx in -k..=k {
            if forward_only && (dy < 0 || (dy == 0 && dx <= 0)) {
                continue;
            }
            let x0 = (-dx).max(0) as usize;
            let x1 = (w - dx).min(w).max(0) as usize;
            if x0 >= x1 {
                continue;
            }
            for y in rows.clone() {
                let ny = y as isize + dy;
                if ny < 0 || ny >= h {
                    continue;
                }
                let src = &plane.row(y)[x0..x1];
                let shifted = (x0 as isize + dx) as usize;
                let dst = &plane.row(ny as usize)[shifted..shifted + (x1 - x0)];
                for (&a, &b) in src.iter().zip(dst) {
                    counts[index(a, b)] += 1;
                }
            }
        }
    }
}
