//! PNG reading and writing for images and label maps.
//!
//! Images are 8-bit RGB; grayscale inputs are replicated to 3 channels on
//! load. Label maps are single-channel 8- or 16-bit PNG. Decoded pixel
//! content is bit-exact; ancillary encoder chunks are not constrained.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::{ColorType, DynamicImage, ImageEncoder, ImageReader};

use crate::error::{Error, Result};
use crate::pixel::{LabelMap, RasterImage};

fn codec_err(path: &Path, e: image::ImageError) -> Error {
    Error::Codec {
        path: Some(path.to_path_buf()),
        message: e.to_string(),
    }
}

/// Load an RGB image from a PNG (or JPEG) file.
pub fn read_image(path: &Path) -> Result<RasterImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| codec_err(path, e))?;
    let rgb = match decoded {
        DynamicImage::ImageRgb8(img) => img,
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLuma16(_) => decoded.to_rgb8(),
        other => other.to_rgb8(),
    };
    RasterImage::from_pixels(rgb.width(), rgb.height(), rgb.into_raw())
}

/// Write an RGB image as an 8-bit PNG.
pub fn write_image_png(path: &Path, img: &RasterImage) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let encoder = image::codecs::png::PngEncoder::new(BufWriter::new(file));
    encoder
        .write_image(img.pixels(), img.width(), img.height(), ColorType::Rgb8.into())
        .map_err(|e| codec_err(path, e))
}

/// Load a label map from a single-channel 8- or 16-bit PNG.
pub fn read_labels(path: &Path, ignore_id: u16) -> Result<LabelMap> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| codec_err(path, e))?;
    let (w, h, ids) = match decoded {
        DynamicImage::ImageLuma8(img) => {
            let (w, h) = (img.width(), img.height());
            (w, h, img.into_raw().into_iter().map(u16::from).collect())
        }
        DynamicImage::ImageLuma16(img) => {
            let (w, h) = (img.width(), img.height());
            (w, h, img.into_raw())
        }
        other => {
            return Err(Error::Codec {
                path: Some(path.to_path_buf()),
                message: format!(
                    "label maps must be single-channel 8- or 16-bit PNG, got {:?}",
                    other.color()
                ),
            })
        }
    };
    LabelMap::from_ids(w, h, ids, ignore_id)
}

/// Write a label map as a single-channel PNG.
///
/// Uses 8-bit when every id fits, 16-bit otherwise.
pub fn write_labels_png(path: &Path, labels: &LabelMap) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let encoder = image::codecs::png::PngEncoder::new(BufWriter::new(file));
    let fits_8bit = labels.ids().iter().all(|&id| id < 256);
    if fits_8bit {
        let buf: Vec<u8> = labels.ids().iter().map(|&id| id as u8).collect();
        encoder
            .write_image(&buf, labels.width(), labels.height(), ColorType::L8.into())
            .map_err(|e| codec_err(path, e))
    } else {
        let mut buf = Vec::with_capacity(labels.ids().len() * 2);
        for &id in labels.ids() {
            buf.extend_from_slice(&id.to_ne_bytes());
        }
        encoder
            .write_image(&buf, labels.width(), labels.height(), ColorType::L16.into())
            .map_err(|e| codec_err(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pixel::LabelMap;

    #[test]
    fn image_png_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = RasterImage::from_pixels(
            7,
            5,
            (0..7 * 5 * 3).map(|i| (i * 37 % 256) as u8).collect(),
        )
        .unwrap();
        write_image_png(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn labels_round_trip_8_and_16_bit() {
        let dir = tempfile::tempdir().unwrap();

        let small = LabelMap::from_ids(4, 3, (0..12).map(|i| i as u16 % 20).collect(), 255).unwrap();
        let p8 = dir.path().join("small.png");
        write_labels_png(&p8, &small).unwrap();
        assert_eq!(read_labels(&p8, 255).unwrap(), small);

        let big =
            LabelMap::from_ids(4, 3, (0..12).map(|i| 300 + i as u16).collect(), 65535).unwrap();
        let p16 = dir.path().join("big.png");
        write_labels_png(&p16, &big).unwrap();
        assert_eq!(read_labels(&p16, 65535).unwrap(), big);
    }

    #[test]
    fn rgb_label_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let img = RasterImage::filled(3, 3, [1, 2, 3]).unwrap();
        write_image_png(&path, &img).unwrap();
        assert!(read_labels(&path, 255).is_err());
    }
}
