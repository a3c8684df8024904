// SPDX-License-Identifier: Apache-2.0

//! Grayscale test images and binary PGM (P5) I/O.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major pixels.
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width < 8 || height < 8 {
            return Err(Error::Image(format!("{width}x{height} is smaller than 8x8")));
        }
        if pixels.len() != width * height {
            return Err(Error::Image(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Pixel with replicate padding outside the image.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut fields = Vec::new();
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Image("truncated PGM header".into()));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or("").to_string());
        }
        if fields[0] != "P5" {
            return Err(Error::Image(format!("unsupported magic `{}`", fields[0])));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Image(format!("bad PGM header field `{s}`")))
        };
        let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
        if maxval != 255 {
            return Err(Error::Image(format!("unsupported maxval {maxval}")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let data = bytes
            .get(pos..pos + w * h)
            .ok_or_else(|| Error::Image("truncated PGM raster".into()))?;
        Image::new(w, h, data.to_vec())
    }
}

/// Ordered, non-empty list of images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageSet {
    pub images: Vec<Image>,
    pub names: Vec<String>,
}

const TEXTURES: [(&str, &[u8]); 4] = [
    ("bark", include_bytes!("../../assets/bark.pgm")),
    ("clouds", include_bytes!("../../assets/clouds.pgm")),
    ("pebbles", include_bytes!("../../assets/pebbles.pgm")),
    ("weave", include_bytes!("../../assets/weave.pgm")),
];

pub const BUNDLED_SIZE: usize = 64;

impl ImageSet {
    pub fn new(names: Vec<String>, images: Vec<Image>) -> Result<Self> {
        if images.is_empty() || names.len() != images.len() {
            return Err(Error::Image("image set must be non-empty with one name per image".into()));
        }
        Ok(Self { images, names })
    }

    /// Four textured images from `assets/` followed by ramp, checkerboard,
    /// Gaussian noise (seed 7) and constant 128, all 64x64.
    pub fn bundled() -> Self {
        let mut names = Vec::new();
        let mut images = Vec::new();
        for (name, bytes) in TEXTURES {
            names.push(name.to_string());
            images.push(Image::from_pgm(bytes).expect("bundled asset is a valid PGM"));
        }
        for (name, img) in synthetic(BUNDLED_SIZE) {
            names.push(name.to_string());
            images.push(img);
        }
        Self { images, names }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

pub fn synthetic(n: usize) -> Vec<(&'static str, Image)> {
    let ramp = Image::from_fn(n, n, |x, _| (x * 255 / (n - 1)) as u8);
    let checker = Image::from_fn(n, n, |x, y| if (x / 8 + y / 8) % 2 == 0 { 32 } else { 224 });
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let normal = Normal::new(128.0f64, 40.0).expect("valid parameters");
    let noise_px: Vec<u8> = (0..n * n)
        .map(|_| normal.sample(&mut rng).round().clamp(0.0, 255.0) as u8)
        .collect();
    let noise = Image { width: n, height: n, pixels: noise_px };
    let constant = Image::from_fn(n, n, |_, _| 128);
    vec![("ramp", ramp), ("checkerboard", checker), ("noise", noise), ("constant", constant)]
}
