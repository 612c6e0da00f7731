//! 8-bit image container, planar channel views and PNG / PPM file I/O.
//!
//! A [`Raster`] stores samples channel-interleaved (RGBRGB...). Processing
//! stages work on one [`Plane`] per channel; [`Raster::split_channels`] and
//! [`merge_channels`] convert between the two layouts.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};

/// Multi-channel 8-bit image, row-major and channel-interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

/// A single channel of an image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!("empty raster {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidRaster(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidRaster(format!(
                "expected {} samples for {width}x{height}x{channels}, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(Raster { width, height, channels, data })
    }

    /// Raster filled with a single value in every sample.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Raster::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    /// Sample at column `x`, row `y`, channel `c`.
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn split_channels(&self) -> Vec<Plane> {
        if self.channels == 1 {
            return vec![Plane {
                width: self.width,
                height: self.height,
                data: self.data.clone(),
            }];
        }
        (0..self.channels)
            .map(|c| Plane {
                width: self.width,
                height: self.height,
                data: self.data.iter().skip(c).step_by(self.channels).copied().collect(),
            })
            .collect()
    }

    /// Extract one channel as a plane.
    pub fn channel(&self, c: usize) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().skip(c).step_by(self.channels).copied().collect(),
        }
    }
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!("empty plane {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "expected {} samples for {width}x{height} plane, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Plane { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Plane::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn into_raster(self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.data,
        }
    }
}

/// Interleave planes back into a raster. Inverse of [`Raster::split_channels`].
pub fn merge_channels(planes: Vec<Plane>) -> Result<Raster> {
    let channels = planes.len();
    if channels != 1 && channels != 3 {
        return Err(Error::InvalidRaster(format!(
            "can only merge 1 or 3 planes, got {channels}"
        )));
    }
    let (width, height) = (planes[0].width, planes[0].height);
    if let Some(p) = planes.iter().find(|p| p.width != width || p.height != height) {
        return Err(Error::DimensionMismatch(format!(
            "plane {}x{} does not match {width}x{height}",
            p.width, p.height
        )));
    }
    if channels == 1 {
        return Ok(planes.into_iter().next().unwrap().into_raster());
    }
    let mut data = vec![0u8; width * height * channels];
    for (c, plane) in planes.iter().enumerate() {
        for (dst, &src) in data.iter_mut().skip(c).step_by(channels).zip(&plane.data) {
            *dst = src;
        }
    }
    Raster::new(width, height, channels, data)
}

const PNG_SIGNATURE: &[u8] = &[0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// Load an 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) or binary
/// PGM/PPM (P5/P6, maxval 255). The format is detected from the file
/// contents, not the extension. Alpha is discarded with a warning.
pub fn load_image(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(path, bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(path, &bytes)
    } else {
        Err(Error::UnsupportedFormat { path: path.to_path_buf() })
    }
}

/// Write a raster. `.png` writes PNG; `.ppm`, `.pgm` and `.pnm` write binary
/// PNM (P5 for one channel, P6 for three).
pub fn save_image(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes = match ext.as_str() {
        "png" => encode_png(raster)?,
        "ppm" | "pgm" | "pnm" => encode_pnm(raster),
        _ => return Err(Error::UnsupportedFormat { path: path.to_path_buf() }),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// True when the path has an extension [`load_image`] is expected to read.
pub fn is_image_path(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref(),
        Some("png" | "ppm" | "pgm" | "pnm")
    )
}

pub fn encode_pnm(raster: &Raster) -> Vec<u8> {
    let magic = if raster.channels == 1 { "P5" } else { "P6" };
    let header = format!("{magic} {} {}\n255\n", raster.width, raster.height);
    let mut out = Vec::with_capacity(header.len() + raster.data.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&raster.data);
    out
}

fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<Raster> {
    let malformed = |reason: &str| Error::Decode {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("header field out of range"))?;
    }
    // exactly one whitespace byte separates maxval from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(malformed("missing whitespace after maxval"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        let depth = if maxval > 255 { 16 } else { (usize::BITS - maxval.leading_zeros()).max(1) };
        return Err(Error::UnsupportedBitDepth { path: path.to_path_buf(), depth });
    }
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| malformed("dimensions overflow"))?;
    let data = bytes
        .get(pos..pos + len)
        .ok_or_else(|| malformed("truncated raster data"))?;
    Raster::new(width, height, channels, data.to_vec()).map_err(|e| malformed(&e.to_string()))
}

fn decode_png(path: &Path, bytes: Vec<u8>) -> Result<Raster> {
    let decode_err = |e: png::DecodingError| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(decode_err)?;
    if reader.info().bit_depth == png::BitDepth::Sixteen {
        return Err(Error::UnsupportedBitDepth { path: path.to_path_buf(), depth: 16 });
    }
    let size = reader.output_buffer_size().ok_or_else(|| Error::Decode {
        path: path.to_path_buf(),
        reason: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(decode_err)?;
    buf.truncate(info.buffer_size());
    let (width, height) = (info.width as usize, info.height as usize);

    let (channels, data) = match info.color_type {
        png::ColorType::Grayscale => (1, buf),
        png::ColorType::Rgb => (3, buf),
        png::ColorType::GrayscaleAlpha => {
            log::warn!("{}: dropping alpha channel", path.display());
            (1, buf.chunks_exact(2).map(|px| px[0]).collect())
        }
        png::ColorType::Rgba => {
            log::warn!("{}: dropping alpha channel", path.display());
            (3, buf.chunks_exact(4).flat_map(|px| [px[0], px[1], px[2]]).collect())
        }
        png::ColorType::Indexed => {
            return Err(Error::Decode {
                path: path.to_path_buf(),
                reason: "palette was not expanded".into(),
            })
        }
    };
    Raster::new(width, height, channels, data).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn encode_png(raster: &Raster) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, raster.width as u32, raster.height as u32);
        encoder.set_color(if raster.channels == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer
            .write_image_data(&raster.data)
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer.finish().map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loads_p5_bytes_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        fs::write(&path, b"P5 2 2\n255\n\x00\x40\x80\xff").unwrap();
        let r = load_image(&path).unwrap();
        assert_eq!(r, Raster::new(2, 2, 1, vec![0, 64, 128, 255]).unwrap());
    }

    #[test]
    fn loads_p6_with_comment() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ppm");
        fs::write(&path, b"P6\n# made by hand\n1 1\n255\n\x0a\x14\x1e").unwrap();
        let r = load_image(&path).unwrap();
        assert_eq!(r, Raster::new(1, 1, 3, vec![10, 20, 30]).unwrap());
    }

    #[test]
    fn pnm_writer_header_is_exact() {
        let r = Raster::new(3, 2, 3, vec![7; 18]).unwrap();
        let bytes = encode_pnm(&r);
        assert!(bytes.starts_with(b"P6 3 2\n255\n"));
        assert_eq!(bytes.len(), "P6 3 2\n255\n".len() + 18);
    }

    #[test]
    fn rejects_sixteen_bit_pnm() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        fs::write(&path, b"P5 1 1\n65535\n\x00\x00").unwrap();
        let err = load_image(&path).unwrap_err();
        assert!(err.to_string().contains("unsupported bit depth"), "{err}");
    }

    #[test]
    fn rejects_sixteen_bit_png() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let mut bytes = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut bytes, 2, 1);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Sixteen);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[0, 1, 255, 255]).unwrap();
        }
        fs::write(&path, bytes).unwrap();
        let err = load_image(&path).unwrap_err();
        assert!(matches!(err, Error::UnsupportedBitDepth { depth: 16, .. }));
        assert!(err.to_string().contains("unsupported bit depth"));
    }

    #[test]
    fn strips_alpha_from_rgba_png() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgba.png");
        let mut bytes = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut bytes, 2, 1);
            enc.set_color(png::ColorType::Rgba);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[1, 2, 3, 128, 4, 5, 6, 0]).unwrap();
        }
        fs::write(&path, bytes).unwrap();
        let r = load_image(&path).unwrap();
        assert_eq!(r, Raster::new(2, 1, 3, vec![1, 2, 3, 4, 5, 6]).unwrap());
    }

    #[test]
    fn truncated_pnm_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.ppm");
        fs::write(&path, b"P6 2 2\n255\n\x00\x01").unwrap();
        assert!(matches!(load_image(&path), Err(Error::Decode { .. })));
    }

    #[test]
    fn save_to_missing_directory_fails_with_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("no/such/dir/out.png");
        let r = Raster::filled(2, 2, 1, 9).unwrap();
        assert!(matches!(save_image(&r, path), Err(Error::Io { .. })));
    }

    #[test]
    fn split_rgb_and_gray() {
        let rgb = Raster::new(1, 1, 3, vec![10, 20, 30]).unwrap();
        let planes = rgb.split_channels();
        let values: Vec<_> = planes.iter().map(|p| p.data().to_vec()).collect();
        assert_eq!(values, vec![vec![10], vec![20], vec![30]]);

        let gray = Raster::new(2, 1, 1, vec![4, 5]).unwrap();
        assert_eq!(gray.split_channels(), vec![Plane::new(2, 1, vec![4, 5]).unwrap()]);
    }

    #[test]
    fn merge_checks_dimensions() {
        let a = Plane::filled(2, 2, 1).unwrap();
        let b = Plane::filled(2, 3, 1).unwrap();
        let c = Plane::filled(2, 2, 1).unwrap();
        assert!(matches!(merge_channels(vec![a, b, c]), Err(Error::DimensionMismatch(_))));

        let single = merge_channels(vec![Plane::new(1, 1, vec![10]).unwrap()]).unwrap();
        assert_eq!(single.channels(), 1);

        let planes = vec![
            Plane::new(1, 1, vec![10]).unwrap(),
            Plane::new(1, 1, vec![20]).unwrap(),
            Plane::new(1, 1, vec![30]).unwrap(),
        ];
        assert_eq!(merge_channels(planes).unwrap().data(), &[10, 20, 30]);
    }

    fn arb_raster() -> impl Strategy<Value = Raster> {
        (1usize..=64, 1usize..=64, prop_oneof![Just(1usize), Just(3usize)]).prop_flat_map(
            |(w, h, c)| {
                proptest::collection::vec(any::<u8>(), w * h * c)
                    .prop_map(move |data| Raster::new(w, h, c, data).unwrap())
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn file_round_trip_is_bit_exact(r in arb_raster()) {
            let dir = tempfile::tempdir().unwrap();
            for name in ["img.png", "img.ppm"] {
                let path = dir.path().join(name);
                save_image(&r, &path).unwrap();
                prop_assert_eq!(&load_image(&path).unwrap(), &r);
            }
        }

        #[test]
        fn split_merge_is_identity(r in arb_raster()) {
            prop_assert_eq!(merge_channels(r.split_channels()).unwrap(), r);
        }
    }
}
