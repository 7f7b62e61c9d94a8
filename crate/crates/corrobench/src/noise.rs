//! Noise family: Gaussian, impulse, shot, speckle, and the
//! intensity-dependent luminance/chrominance sensor model.
//!
//! The four classic noises operate on sRGB unit-interval values. The
//! intensity model instead works in linear light: both of its components are
//! added to linear intensities, and a gain factor makes dark pixels noisier
//! than bright ones, matching real sensor behavior.

use crate::error::{Error, Result};
use crate::pixel::{linear_to_srgb, quantize_u8, srgb_to_linear, RasterImage};
use crate::rng::RandomStream;

/// Parameters of the intensity-dependent noise model.
///
/// - `sigma_lum`: luminance (channel-correlated) noise std at full intensity.
/// - `sigma_chroma`: per-channel chroma noise std at full intensity.
/// - `alpha`: intensity-dependence gain; the local std scales by
///   `g(y) = 1 + alpha·(1 − y)` where `y` is the linear channel mean, so
///   `alpha = 0` removes the dependence entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityNoiseParams {
    pub sigma_lum: f64,
    pub sigma_chroma: f64,
    pub alpha: f64,
}

impl IntensityNoiseParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.sigma_lum) || !ok(self.sigma_chroma) || !ok(self.alpha) {
            return Err(Error::Parameter(
                "intensity noise parameters must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Parameter(format!(
            "noise sigma must be finite and non-negative, got {sigma}"
        )));
    }
    Ok(())
}

/// Additive Gaussian noise per sample, `x + N(0, σ²)` on sRGB unit values.
pub fn gaussian_noise(img: &RasterImage, sigma: f64, rng: &mut RandomStream) -> Result<RasterImage> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let mut out = img.clone();
    for b in out.pixels_mut() {
        let v = *b as f64 / 255.0 + rng.next_gaussian() * sigma;
        *b = quantize_u8(v);
    }
    Ok(out)
}

/// Shot noise: each sample becomes `Poisson(x·λ)/λ`, so variance shrinks as
/// the photon scale `λ` grows.
pub fn shot_noise(img: &RasterImage, photon_scale: f64, rng: &mut RandomStream) -> Result<RasterImage> {
    if !photon_scale.is_finite() || photon_scale <= 0.0 {
        return Err(Error::Parameter(format!(
            "shot noise photon scale must be positive, got {photon_scale}"
        )));
    }
    let mut out = img.clone();
    for b in out.pixels_mut() {
        let lam = *b as f64 / 255.0 * photon_scale;
        let k = rng.next_poisson(lam);
        *b = quantize_u8(k as f64 / photon_scale);
    }
    Ok(out)
}

/// Impulse (salt-and-pepper) noise: each pixel is independently replaced by
/// black or white, equal odds, with probability `fraction`.
pub fn impulse_noise(img: &RasterImage, fraction: f64, rng: &mut RandomStream) -> Result<RasterImage> {
    if !fraction.is_finite() || !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Parameter(format!(
            "impulse fraction must be in [0, 1], got {fraction}"
        )));
    }
    if fraction == 0.0 {
        return Ok(img.clone());
    }
    let mut out = img.clone();
    let w = out.width();
    let h = out.height();
    for y in 0..h {
        for x in 0..w {
            if rng.next_f64() < fraction {
                let v = if rng.next_f64() < 0.5 { 0 } else { 255 };
                out.put(x, y, [v, v, v]);
            }
        }
    }
    Ok(out)
}

/// Multiplicative speckle noise, `x·(1 + N(0, σ²))` per sample.
pub fn speckle_noise(img: &RasterImage, sigma: f64, rng: &mut RandomStream) -> Result<RasterImage> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let mut out = img.clone();
    for b in out.pixels_mut() {
        let x = *b as f64 / 255.0;
        *b = quantize_u8(x * (1.0 + rng.next_gaussian() * sigma));
    }
    Ok(out)
}

/// Intensity-dependent luminance/chrominance noise in linear color space.
///
/// Per pixel: with `y` the mean of the three linear channels and
/// `g(y) = 1 + alpha·(1 − y)`, one luminance sample `N(0, (σ_lum·g)²)` is
/// added to all three channels and an independent chroma sample
/// `N(0, (σ_chroma·g)²)` to each, then the result is clamped and re-encoded.
pub fn intensity_dependent_noise(
    img: &RasterImage,
    params: &IntensityNoiseParams,
    rng: &mut RandomStream,
) -> Result<RasterImage> {
    params.validate()?;
    if params.sigma_lum == 0.0 && params.sigma_chroma == 0.0 {
        return Ok(img.clone());
    }
    let mut linear = srgb_to_linear(img);
    for px in linear.pixels_mut().chunks_exact_mut(3) {
        let y = (px[0] as f64 + px[1] as f64 + px[2] as f64) / 3.0;
        let gain = 1.0 + params.alpha * (1.0 - y);
        let n_lum = rng.next_gaussian() * params.sigma_lum * gain;
        for v in px.iter_mut() {
            let n_chroma = rng.next_gaussian() * params.sigma_chroma * gain;
            *v = ((*v as f64 + n_lum + n_chroma).clamp(0.0, 1.0)) as f32;
        }
    }
    Ok(linear_to_srgb(&linear))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pixel::{srgb_decode, srgb_encode};

    fn gray_field(size: u32, code: u8) -> RasterImage {
        RasterImage::filled(size, size, [code, code, code]).unwrap()
    }

    /// 8-bit code whose decoded linear value is closest to `y`.
    fn code_for_linear(y: f64) -> u8 {
        (srgb_encode(y) * 255.0).round() as u8
    }

    fn sample_std(out: &RasterImage, reference: f64) -> f64 {
        let n = out.pixels().len() as f64;
        let var = out
            .pixels()
            .iter()
            .map(|&b| (b as f64 / 255.0 - reference).powi(2))
            .sum::<f64>()
            / n;
        var.sqrt()
    }

    #[test]
    fn zero_strength_is_bit_identical() {
        let img = RasterImage::from_pixels(8, 8, (0..192).map(|i| i as u8).collect()).unwrap();
        let mut rng = RandomStream::new(3);
        assert_eq!(gaussian_noise(&img, 0.0, &mut rng).unwrap(), img);
        assert_eq!(impulse_noise(&img, 0.0, &mut rng).unwrap(), img);
        assert_eq!(speckle_noise(&img, 0.0, &mut rng).unwrap(), img);
        let params = IntensityNoiseParams {
            sigma_lum: 0.0,
            sigma_chroma: 0.0,
            alpha: 1.5,
        };
        assert_eq!(intensity_dependent_noise(&img, &params, &mut rng).unwrap(), img);
    }

    #[test]
    fn gaussian_noise_std_matches_sigma() {
        let img = gray_field(600, 128);
        let mut rng = RandomStream::new(7);
        let sigma = 0.06;
        let out = gaussian_noise(&img, sigma, &mut rng).unwrap();
        let std = sample_std(&out, 128.0 / 255.0);
        assert!(
            (std - sigma).abs() < 0.03 * sigma,
            "measured {std} vs sigma {sigma}"
        );
    }

    #[test]
    fn shot_noise_variance_matches_poisson_identity() {
        // Var(out) = x/λ on the unclipped range.
        let code = 128u8;
        let x = code as f64 / 255.0;
        let lambda = 40.0;
        let img = gray_field(500, code);
        let mut rng = RandomStream::new(11);
        let out = shot_noise(&img, lambda, &mut rng).unwrap();
        let n = out.pixels().len() as f64;
        let mean = out.pixels().iter().map(|&b| b as f64 / 255.0).sum::<f64>() / n;
        let var = out
            .pixels()
            .iter()
            .map(|&b| (b as f64 / 255.0 - mean).powi(2))
            .sum::<f64>()
            / n;
        let expect = x / lambda;
        assert!(
            (var - expect).abs() < 0.05 * expect,
            "variance {var} vs {expect}"
        );
    }

    #[test]
    fn impulse_noise_hits_expected_fraction() {
        let img = gray_field(400, 100);
        let mut rng = RandomStream::new(13);
        let fraction = 0.12;
        let out = impulse_noise(&img, fraction, &mut rng).unwrap();
        let mut changed = 0usize;
        for (a, b) in img.pixels().chunks_exact(3).zip(out.pixels().chunks_exact(3)) {
            if a != b {
                assert!(b == [0, 0, 0] || b == [255, 255, 255]);
                changed += 1;
            }
        }
        let rate = changed as f64 / (400.0 * 400.0);
        assert!((rate - fraction).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn speckle_noise_std_scales_with_intensity() {
        let mut rng = RandomStream::new(17);
        let sigma = 0.05;
        let bright = speckle_noise(&gray_field(400, 200), sigma, &mut rng).unwrap();
        let dim = speckle_noise(&gray_field(400, 50), sigma, &mut rng).unwrap();
        let std_bright = sample_std(&bright, 200.0 / 255.0);
        let std_dim = sample_std(&dim, 50.0 / 255.0);
        let ratio = std_bright / std_dim;
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    /// Measured std of the added noise in linear space on a flat field.
    fn intensity_noise_std(y: f64, params: &IntensityNoiseParams, seed: u64) -> f64 {
        let img = gray_field(256, code_for_linear(y));
        let base = srgb_decode(code_for_linear(y) as f64 / 255.0);
        let mut rng = RandomStream::new(seed);
        let out = intensity_dependent_noise(&img, params, &mut rng).unwrap();
        let lin = srgb_to_linear(&out);
        let n = lin.pixels().len() as f64;
        let var = lin
            .pixels()
            .iter()
            .map(|&v| (v as f64 - base).powi(2))
            .sum::<f64>()
            / n;
        var.sqrt()
    }

    #[test]
    fn intensity_noise_flat_when_alpha_zero() {
        let params = IntensityNoiseParams {
            sigma_lum: 0.01,
            sigma_chroma: 0.01,
            alpha: 0.0,
        };
        let dark = intensity_noise_std(0.1, &params, 21);
        let bright = intensity_noise_std(0.9, &params, 22);
        let ratio = dark / bright;
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn intensity_noise_dark_pixels_noisier() {
        let params = IntensityNoiseParams {
            sigma_lum: 0.01,
            sigma_chroma: 0.01,
            alpha: 2.0,
        };
        // g(0.1)/g(0.9) = 2.8/1.2
        let dark = intensity_noise_std(0.1, &params, 31);
        let bright = intensity_noise_std(0.9, &params, 32);
        let ratio = dark / bright;
        assert!((ratio - 2.333).abs() < 0.233, "ratio {ratio}");
    }

    #[test]
    fn intensity_noise_std_monotone_in_intensity() {
        let params = IntensityNoiseParams {
            sigma_lum: 0.012,
            sigma_chroma: 0.008,
            alpha: 1.5,
        };
        let stds: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .enumerate()
            .map(|(i, &y)| intensity_noise_std(y, &params, 40 + i as u64))
            .collect();
        for pair in stds.windows(2) {
            assert!(pair[0] > pair[1], "stds not decreasing: {stds:?}");
        }
    }

    #[test]
    fn luminance_component_fully_correlated() {
        let params = IntensityNoiseParams {
            sigma_lum: 0.05,
            sigma_chroma: 0.0,
            alpha: 1.0,
        };
        let img = gray_field(64, 120);
        let mut rng = RandomStream::new(51);
        let out = intensity_dependent_noise(&img, &params, &mut rng).unwrap();
        for px in out.pixels().chunks_exact(3) {
            assert!(px[0] == px[1] && px[1] == px[2], "channels diverged: {px:?}");
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        let img = gray_field(4, 10);
        let mut rng = RandomStream::new(1);
        assert!(gaussian_noise(&img, -0.1, &mut rng).is_err());
        assert!(gaussian_noise(&img, f64::NAN, &mut rng).is_err());
        assert!(shot_noise(&img, 0.0, &mut rng).is_err());
        assert!(impulse_noise(&img, 1.5, &mut rng).is_err());
        assert!(speckle_noise(&img, f64::INFINITY, &mut rng).is_err());
        let bad = IntensityNoiseParams {
            sigma_lum: -1.0,
            sigma_chroma: 0.0,
            alpha: 0.0,
        };
        assert!(intensity_dependent_noise(&img, &bad, &mut rng).is_err());
    }
}
