//! Image and label containers plus the color/sampling primitives every
//! corruption builds on.
//!
//! Two pixel representations are used throughout the crate:
//!
//! - [`RasterImage`]: 8-bit sRGB, what PNG files store.
//! - [`LinearImage`]: unit-interval linear RGB (`f32`), where physically
//!   motivated operations (blur, the intensity noise model, geometric
//!   resampling) happen.
//!
//! Conversion uses the exact piecewise sRGB transfer function, not a gamma
//! approximation, and quantization always rounds half away from zero so that
//! the 8-bit round trip is the identity on all 256 code values.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Row-major 3-channel 8-bit sRGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

/// Row-major 3-channel linear-RGB image with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    width: u32,
    height: u32,
    pixels: Vec<f32>,
}

/// Row-major per-pixel class-id grid.
///
/// `ignore_id` marks pixels excluded from scoring (unlabeled regions,
/// out-of-warp areas). Ground truth and predictions share this type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    ids: Vec<u16>,
    ignore_id: u16,
}

impl RasterImage {
    /// Wrap a row-major RGB8 buffer. Length must be exactly `width·height·3`.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        let expect = width as usize * height as usize * 3;
        if pixels.len() != expect {
            return Err(Error::Input(format!(
                "pixel buffer length {} does not match {}x{}x3 = {}",
                pixels.len(),
                width,
                height,
                expect
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Solid-color image.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&rgb);
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }
}

impl LinearImage {
    /// Wrap a row-major linear buffer. Length must be exactly `width·height·3`.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        let expect = width as usize * height as usize * 3;
        if pixels.len() != expect {
            return Err(Error::Input(format!(
                "pixel buffer length {} does not match {}x{}x3 = {}",
                pixels.len(),
                width,
                height,
                expect
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [f32; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&rgb);
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f32] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [f32; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, rgb: [f32; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Clamp every sample into `[0, 1]`.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.pixels {
            *v = v.clamp(0.0, 1.0);
        }
    }
}

impl LabelMap {
    pub fn from_ids(width: u32, height: u32, ids: Vec<u16>, ignore_id: u16) -> Result<Self> {
        check_dims(width, height)?;
        let expect = width as usize * height as usize;
        if ids.len() != expect {
            return Err(Error::Input(format!(
                "label buffer length {} does not match {}x{} = {}",
                ids.len(),
                width,
                height,
                expect
            )));
        }
        Ok(Self {
            width,
            height,
            ids,
            ignore_id,
        })
    }

    pub fn filled(width: u32, height: u32, id: u16, ignore_id: u16) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            ids: vec![id; width as usize * height as usize],
            ignore_id,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn ids(&self) -> &[u16] {
        &self.ids
    }

    pub fn ids_mut(&mut self) -> &mut [u16] {
        &mut self.ids
    }

    pub fn ignore_id(&self) -> u16 {
        self.ignore_id
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.ids[y as usize * self.width as usize + x as usize]
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Input(format!(
            "image dimensions must be at least 1x1, got {}x{}",
            width, height
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sRGB transfer function
// ---------------------------------------------------------------------------

/// Decode one sRGB sample in `[0, 1]` to linear light (exact piecewise curve).
#[inline]
pub fn srgb_decode(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Encode one linear sample in `[0, 1]` to sRGB (inverse of [`srgb_decode`]).
#[inline]
pub fn srgb_encode(v: f64) -> f64 {
    if v <= 0.0031308 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

/// Quantize a unit-interval value to 8 bits, rounding half away from zero.
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn decode_lut() -> &'static [f32; 256] {
    static LUT: OnceLock<[f32; 256]> = OnceLock::new();
    LUT.get_or_init(|| {
        let mut t = [0.0f32; 256];
        for (i, slot) in t.iter_mut().enumerate() {
            *slot = srgb_decode(i as f64 / 255.0) as f32;
        }
        t
    })
}

/// Convert an 8-bit sRGB image to linear RGB.
pub fn srgb_to_linear(img: &RasterImage) -> LinearImage {
    let lut = decode_lut();
    let pixels = img.pixels.iter().map(|&b| lut[b as usize]).collect();
    LinearImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Convert a linear image back to 8-bit sRGB.
///
/// Samples are clamped to `[0, 1]`, gamma-encoded, and rounded half away
/// from zero, so `linear_to_srgb(srgb_to_linear(x)) == x` for every 8-bit
/// input.
pub fn linear_to_srgb(img: &LinearImage) -> RasterImage {
    let pixels = img
        .pixels
        .iter()
        .map(|&v| quantize_u8(srgb_encode((v as f64).clamp(0.0, 1.0))))
        .collect();
    RasterImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Out-of-bounds handling for [`sample_bilinear`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BorderPolicy {
    /// Out-of-bounds taps read this constant color.
    Constant([f32; 3]),
    /// Out-of-bounds taps read the nearest edge pixel.
    ClampToEdge,
}

/// Bilinear sample at real pixel coordinates; pixel centers sit on the
/// integer lattice.
pub fn sample_bilinear(img: &LinearImage, x: f64, y: f64, border: BorderPolicy) -> [f32; 3] {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = (x - x0) as f32;
    let fy = (y - y0) as f32;
    let x0 = x0 as i64;
    let y0 = y0 as i64;

    let tap = |xi: i64, yi: i64| -> [f32; 3] {
        let w = img.width as i64;
        let h = img.height as i64;
        match border {
            BorderPolicy::ClampToEdge => {
                let cx = xi.clamp(0, w - 1) as u32;
                let cy = yi.clamp(0, h - 1) as u32;
                img.get(cx, cy)
            }
            BorderPolicy::Constant(c) => {
                if xi < 0 || yi < 0 || xi >= w || yi >= h {
                    c
                } else {
                    img.get(xi as u32, yi as u32)
                }
            }
        }
    };

    let p00 = tap(x0, y0);
    let p10 = tap(x0 + 1, y0);
    let p01 = tap(x0, y0 + 1);
    let p11 = tap(x0 + 1, y0 + 1);

    let mut out = [0.0f32; 3];
    for ch in 0..3 {
        let top = p00[ch] + (p10[ch] - p00[ch]) * fx;
        let bot = p01[ch] + (p11[ch] - p01[ch]) * fx;
        out[ch] = top + (bot - top) * fy;
    }
    out
}

/// Nearest-neighbor label sample; ties round toward the smaller index, and
/// anything outside the map reads as `ignore_id`.
pub fn sample_nearest(labels: &LabelMap, x: f64, y: f64) -> u16 {
    let xi = (x - 0.5).ceil() as i64;
    let yi = (y - 0.5).ceil() as i64;
    if xi < 0 || yi < 0 || xi >= labels.width as i64 || yi >= labels.height as i64 {
        labels.ignore_id
    } else {
        labels.get(xi as u32, yi as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn srgb_fixed_points() {
        assert_eq!(srgb_decode(0.0), 0.0);
        assert_eq!(srgb_decode(1.0), 1.0);
        // Closed-form transfer at code 128.
        let v = srgb_decode(128.0 / 255.0);
        assert!((v - 0.2158).abs() < 1e-4, "decode(128/255) = {v}");
    }

    #[test]
    fn srgb_round_trip_all_codes() {
        let img = RasterImage::from_pixels(
            16,
            16,
            (0..16 * 16 * 3).map(|i| (i % 256) as u8).collect(),
        )
        .unwrap();
        let back = linear_to_srgb(&srgb_to_linear(&img));
        assert_eq!(img, back);

        // Every 8-bit code individually, via the scalar path.
        for code in 0u16..=255 {
            let lin = srgb_decode(code as f64 / 255.0);
            let enc = quantize_u8(srgb_encode(lin));
            assert_eq!(enc, code as u8, "round trip broke at code {code}");
        }
    }

    #[test]
    fn srgb_decode_strictly_monotone() {
        let mut prev = -1.0;
        for code in 0u16..=255 {
            let v = srgb_decode(code as f64 / 255.0);
            assert!(v > prev, "not strictly increasing at code {code}");
            prev = v;
        }
    }

    #[test]
    fn bilinear_lattice_points_exact() {
        let img = LinearImage::from_pixels(
            3,
            2,
            vec![
                0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, //
                0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95,
            ],
        )
        .unwrap();
        for y in 0..2u32 {
            for x in 0..3u32 {
                let s = sample_bilinear(&img, x as f64, y as f64, BorderPolicy::ClampToEdge);
                assert_eq!(s, img.get(x, y));
            }
        }
    }

    #[test]
    fn bilinear_midpoint_is_average() {
        let img =
            LinearImage::from_pixels(2, 1, vec![0.2, 0.4, 0.6, 0.8, 0.6, 0.2]).unwrap();
        let s = sample_bilinear(&img, 0.5, 0.0, BorderPolicy::ClampToEdge);
        assert!((s[0] - 0.5).abs() < 1e-6);
        assert!((s[1] - 0.5).abs() < 1e-6);
        assert!((s[2] - 0.4).abs() < 1e-6);
    }

    #[test]
    fn bilinear_constant_image_everywhere() {
        let img = LinearImage::filled(5, 4, [0.3, 0.3, 0.3]).unwrap();
        for &(x, y) in &[(0.25, 0.75), (3.9, 0.1), (2.5, 2.5), (4.0, 3.0)] {
            let s = sample_bilinear(&img, x, y, BorderPolicy::ClampToEdge);
            for ch in 0..3 {
                assert!((s[ch] - 0.3).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn nearest_rounds_and_ties_toward_smaller() {
        let labels =
            LabelMap::from_ids(4, 4, (0..16).map(|i| i as u16).collect(), 255).unwrap();
        assert_eq!(sample_nearest(&labels, 2.4, 3.4), labels.get(2, 3));
        assert_eq!(sample_nearest(&labels, 2.5, 1.0), labels.get(2, 1));
        assert_eq!(sample_nearest(&labels, 2.6, 1.0), labels.get(3, 1));
        assert_eq!(sample_nearest(&labels, -1.0, 0.0), 255);
        assert_eq!(sample_nearest(&labels, 0.0, 17.0), 255);
    }

    proptest! {
        #[test]
        fn nearest_never_fabricates_ids(
            ids in proptest::collection::vec(0u16..5, 36),
            coords in proptest::collection::vec((-2.0f64..8.0, -2.0f64..8.0), 40)
        ) {
            let labels = LabelMap::from_ids(6, 6, ids.clone(), 255).unwrap();
            for (x, y) in coords {
                let id = sample_nearest(&labels, x, y);
                prop_assert!(id == 255 || ids.contains(&id));
            }
        }

        #[test]
        fn bilinear_within_neighbor_range(
            pixels in proptest::collection::vec(0.0f32..1.0, 4 * 4 * 3),
            x in 0.0f64..3.0,
            y in 0.0f64..3.0,
        ) {
            let img = LinearImage::from_pixels(4, 4, pixels).unwrap();
            let s = sample_bilinear(&img, x, y, BorderPolicy::ClampToEdge);
            let x0 = x.floor() as u32;
            let y0 = y.floor() as u32;
            for ch in 0..3 {
                let mut lo = f32::INFINITY;
                let mut hi = f32::NEG_INFINITY;
                for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    let v = img.get((x0 + dx).min(3), (y0 + dy).min(3))[ch];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                prop_assert!(s[ch] >= lo - 1e-6 && s[ch] <= hi + 1e-6);
            }
        }
    }
}
