//! Raster containers and PNG/JPEG I/O shared by every stage.
//!
//! Colour images are kept as row-major `[r, g, b]` triples of `f64` in
//! `[0, 1]`. 8-bit sources are divided by 255 and 16-bit sources by 65535;
//! alpha is dropped on load.

use std::io::Cursor;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ColorType, DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use crate::dbscan::ClusterSet;
use crate::error::{Error, Result};

fn check_len(width: usize, height: usize, actual: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let expected = width * height;
    if actual != expected {
        return Err(Error::BufferLength {
            width,
            height,
            expected,
            actual,
        });
    }
    Ok(())
}

/// Dense RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_len(width, height, data.len())?;
        for px in &data {
            for &c in px {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::OutOfRange { value: c });
                }
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image from a per-pixel closure `f(x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    /// Quantizes to 8-bit RGB (round to nearest).
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data
            .iter()
            .flat_map(|px| px.map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8))
            .collect()
    }
}

/// Single-channel real raster.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FloatPlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FloatPlane {
        FloatPlane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Per-pixel rust candidacy; `true` marks a candidate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_len(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Intersection over union; two empty masks score 1.
    pub fn iou(&self, other: &BinaryMask) -> Result<f64> {
        ensure_same_dims(self.dims(), other.dims())?;
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        Ok(if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        })
    }

    /// Gray 8-bit bytes, 255 for `true`.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Loads a PNG or JPEG file into an [`RgbImage`].
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode_rgb(&bytes).map_err(|e| match e {
        Error::Decode { message, .. } => Error::Decode {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Decodes in-memory PNG or JPEG bytes.
pub fn decode_rgb(bytes: &[u8]) -> Result<RgbImage> {
    let decode_err = |message: String| Error::Decode {
        path: "<memory>".into(),
        message,
    };
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| decode_err(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        Some(other) => return Err(decode_err(format!("unsupported format {other:?}"))),
        None => return Err(decode_err("unrecognized format".into())),
    }
    let img = reader.decode().map_err(|e| decode_err(e.to_string()))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::EmptyImage);
    }
    from_dynamic(&img)
}

fn from_dynamic(img: &DynamicImage) -> Result<RgbImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let sixteen_bit = matches!(
        img.color(),
        ColorType::L16 | ColorType::La16 | ColorType::Rgb16 | ColorType::Rgba16
    );
    let data = if sixteen_bit {
        img.to_rgb16()
            .pixels()
            .map(|p| p.0.map(|c| f64::from(c) / 65535.0))
            .collect()
    } else {
        img.to_rgb8()
            .pixels()
            .map(|p| p.0.map(|c| f64::from(c) / 255.0))
            .collect()
    };
    RgbImage::new(w, h, data)
}

fn encode_png(bytes: &[u8], width: usize, height: usize, color: ExtendedColorType) -> Vec<u8> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(bytes, width as u32, height as u32, color)
        .expect("in-memory PNG encoding of a validated buffer");
    out
}

/// Encodes a mask as an 8-bit grayscale PNG.
pub fn encode_mask_png(mask: &BinaryMask) -> Vec<u8> {
    encode_png(&mask.to_gray8(), mask.width, mask.height, ExtendedColorType::L8)
}

/// Encodes an image as an 8-bit RGB PNG.
pub fn encode_rgb_png(image: &RgbImage) -> Vec<u8> {
    encode_png(
        &image.to_rgb8(),
        image.width,
        image.height,
        ExtendedColorType::Rgb8,
    )
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_mask_png(mask))
}

pub fn save_rgb(image: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_rgb_png(image))
}

/// Reads a mask PNG back; any non-zero gray level counts as `true`.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode_mask(&bytes)
}

pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| {
        Error::Decode {
            path: "<memory>".into(),
            message: e.to_string(),
        }
    })?;
    let gray = img.to_luma8();
    BinaryMask::new(
        gray.width() as usize,
        gray.height() as usize,
        gray.pixels().map(|p| p.0[0] != 0).collect(),
    )
}

/// Highlight colour and blend factor for [`render_overlay_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayStyle {
    pub color: [f64; 3],
    pub blend: f64,
}

impl Default for OverlayStyle {
    fn default() -> Self {
        Self {
            color: [1.0, 0.0, 0.0],
            blend: 0.5,
        }
    }
}

/// Blends retained cluster pixels toward pure red at 0.5.
pub fn render_overlay(image: &RgbImage, clusters: &ClusterSet) -> Result<RgbImage> {
    render_overlay_with(image, clusters, OverlayStyle::default())
}

pub fn render_overlay_with(
    image: &RgbImage,
    clusters: &ClusterSet,
    style: OverlayStyle,
) -> Result<RgbImage> {
    ensure_same_dims(image.dims(), clusters.dims())?;
    if !(0.0..=1.0).contains(&style.blend) {
        return Err(Error::InvalidParameter {
            name: "blend",
            message: format!("{} not in [0, 1]", style.blend),
        });
    }
    let a = style.blend;
    let mut out = image.clone();
    for (x, y) in clusters.retained_points() {
        let px = &mut out.data[y as usize * image.width + x as usize];
        for (v, &target) in px.iter_mut().zip(&style.color) {
            *v = ((1.0 - a) * *v + a * target).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}
