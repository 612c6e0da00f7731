//! Literal, unoptimized transcription of the downscaler used as a test
//! oracle. Shares no code with the library: plain vectors, nested loops,
//! weights evaluated per pixel.

#![allow(dead_code)]

/// Single-channel image as plain rows.
pub struct Gray {
    pub w: usize,
    pub h: usize,
    pub px: Vec<u8>,
}

impl Gray {
    pub fn at(&self, x: i64, y: i64) -> Option<u8> {
        if x < 0 || y < 0 || x >= self.w as i64 || y >= self.h as i64 {
            None
        } else {
            Some(self.px[y as usize * self.w + x as usize])
        }
    }
}

/// Pair counts over the clipped `[-k, k]²` neighborhood, origin included.
pub fn cooccurrence(img: &Gray, k: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; 256]; 256];
    let k = k as i64;
    for y in 0..img.h as i64 {
        for x in 0..img.w as i64 {
            let a = img.at(x, y).unwrap() as usize;
            for oy in -k..=k {
                for ox in -k..=k {
                    if let Some(b) = img.at(x + ox, y + oy) {
                        c[a][b as usize] += 1;
                    }
                }
            }
        }
    }
    c
}

pub fn normalize(c: &[Vec<u64>]) -> Vec<Vec<f64>> {
    let max = c.iter().flatten().copied().max().unwrap() as f64;
    c.iter()
        .map(|row| row.iter().map(|&v| v as f64 / max).collect())
        .collect()
}

pub fn out_dims(img: &Gray, factor: f64) -> (usize, usize) {
    (
        (img.w as f64 / factor).floor() as usize,
        (img.h as f64 / factor).floor() as usize,
    )
}

/// Window values of output pixel (px, py) in raster order.
pub fn window(img: &Gray, factor: f64, px: usize, py: usize) -> Vec<u8> {
    let half = factor.ceil() as i64;
    let cx = ((px as f64 * factor + factor / 2.0).floor() as i64).min(img.w as i64 - 1);
    let cy = ((py as f64 * factor + factor / 2.0).floor() as i64).min(img.h as i64 - 1);
    let mut v = Vec::new();
    for y in cy - half..=cy + half {
        for x in cx - half..=cx + half {
            if let Some(p) = img.at(x, y) {
                v.push(p);
            }
        }
    }
    v
}

pub fn guide(img: &Gray, factor: f64) -> Vec<u8> {
    let (ow, oh) = out_dims(img, factor);
    let mut g = Vec::new();
    for py in 0..oh {
        for px in 0..ow {
            let win = window(img, factor, px, py);
            let mut sum = 0.0;
            for &v in &win {
                sum += v as f64;
            }
            g.push((sum / win.len() as f64).round() as u8);
        }
    }
    g
}

/// Unrounded filter output per output pixel.
pub fn lsid_values(img: &Gray, factor: f64, k: usize, alpha: f64) -> Vec<f64> {
    let norm = normalize(&cooccurrence(img, k));
    let g = guide(img, factor);
    let (ow, oh) = out_dims(img, factor);
    let mut out = Vec::new();
    for py in 0..oh {
        for px in 0..ow {
            let gp = g[py * ow + px] as usize;
            let mut p = 0.0;
            let mut q = 0.0;
            for v in window(img, factor, px, py) {
                let w = (alpha * norm[gp][v as usize]).exp();
                p += w * v as f64;
                q += w;
            }
            out.push(p / q);
        }
    }
    out
}

pub fn lsid(img: &Gray, factor: f64, k: usize, alpha: f64) -> Vec<u8> {
    lsid_values(img, factor, k, alpha)
        .into_iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect()
}
