use std::path::Path;

use image::imageops::{self, FilterType};
use image::{DynamicImage, RgbImage};
use serde::{Deserialize, Serialize};

use super::backend::Preprocessing;
use crate::{Error, Result};

/// Network input size (width, height) for landscape and square images.
pub const LANDSCAPE: (u32, u32) = (768, 512);
/// Network input size (width, height) for portrait images.
pub const PORTRAIT: (u32, u32) = (512, 768);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    #[default]
    Bilinear,
    Bicubic,
    Lanczos3,
}

impl From<Interpolation> for FilterType {
    fn from(value: Interpolation) -> Self {
        match value {
            Interpolation::Nearest => FilterType::Nearest,
            Interpolation::Bilinear => FilterType::Triangle,
            Interpolation::Bicubic => FilterType::CatmullRom,
            Interpolation::Lanczos3 => FilterType::Lanczos3,
        }
    }
}

/// A normalized `3 × height × width` tensor in channel-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl ImageTensor {
    pub const CHANNELS: usize = 3;

    pub fn at(&self, channel: usize, y: usize, x: usize) -> f32 {
        self.data[(channel * self.height + y) * self.width + x]
    }
}

/// Output geometry for an input of `width × height`; squares count as landscape.
pub fn target_geometry(width: u32, height: u32) -> (u32, u32) {
    if width >= height {
        LANDSCAPE
    } else {
        PORTRAIT
    }
}

pub fn decode_image(bytes: &[u8]) -> Result<DynamicImage> {
    image::load_from_memory(bytes).map_err(|e| Error::Decode(e.to_string()))
}

pub fn open_image(path: impl AsRef<Path>) -> Result<DynamicImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| Error::Decode(format!("{}: {e}", path.display())))
}

/// Scales the image to cover the target geometry, center-crops it and
/// applies per-channel normalization. Grayscale input is replicated to RGB.
pub fn preprocess_image(image: &DynamicImage, prep: &Preprocessing) -> Result<ImageTensor> {
    let (w, h) = (image.width(), image.height());
    if w == 0 || h == 0 {
        return Err(Error::Decode("image has no pixels".into()));
    }
    let rgb = image.to_rgb8();
    let (tw, th) = target_geometry(w, h);
    let cropped = cover_and_crop(&rgb, tw, th, prep.interpolation.into());

    let (tw, th) = (tw as usize, th as usize);
    let plane = tw * th;
    let mut data = vec![0f32; 3 * plane];
    for (x, y, px) in cropped.enumerate_pixels() {
        let offset = y as usize * tw + x as usize;
        for c in 0..3 {
            let v = f32::from(px[c]) * prep.pixel_scale;
            data[c * plane + offset] = (v - prep.mean[c]) / prep.std[c];
        }
    }
    Ok(ImageTensor {
        width: tw,
        height: th,
        data,
    })
}

fn cover_and_crop(img: &RgbImage, tw: u32, th: u32, filter: FilterType) -> RgbImage {
    let (w, h) = img.dimensions();
    let scale = f64::max(f64::from(tw) / f64::from(w), f64::from(th) / f64::from(h));
    let nw = ((f64::from(w) * scale).round() as u32).max(tw);
    let nh = ((f64::from(h) * scale).round() as u32).max(th);
    let resized = if (nw, nh) == (w, h) {
        img.clone()
    } else {
        imageops::resize(img, nw, nh, filter)
    };
    let x0 = (nw - tw) / 2;
    let y0 = (nh - th) / 2;
    imageops::crop_imm(&resized, x0, y0, tw, th).to_image()
}
