// SPDX-License-Identifier: Apache-2.0

//! Regenerates the textured test images in `assets/`.
//!
//! Usage: `cargo run -p axsel --example gen_textures -- <assets dir>`

use std::path::PathBuf;

use axsel::quality_oracle::images::{Image, BUNDLED_SIZE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Lattice {
    size: usize,
    values: Vec<f64>,
}

impl Lattice {
    fn new(size: usize, rng: &mut ChaCha8Rng) -> Self {
        let values = (0..size * size).map(|_| rng.gen::<f64>()).collect();
        Self { size, values }
    }

    /// Smoothly interpolated value noise, periodic in the lattice size.
    fn sample(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (sx, sy) = (fx * fx * (3.0 - 2.0 * fx), fy * fy * (3.0 - 2.0 * fy));
        let at = |i: f64, j: f64| {
            let i = (i as i64).rem_euclid(self.size as i64) as usize;
            let j = (j as i64).rem_euclid(self.size as i64) as usize;
            self.values[j * self.size + i]
        };
        let top = at(x0, y0) * (1.0 - sx) + at(x0 + 1.0, y0) * sx;
        let bot = at(x0, y0 + 1.0) * (1.0 - sx) + at(x0 + 1.0, y0 + 1.0) * sx;
        top * (1.0 - sy) + bot * sy
    }

    fn fbm(&self, x: f64, y: f64, octaves: u32) -> f64 {
        let (mut sum, mut amp, mut freq, mut norm) = (0.0, 1.0, 1.0, 0.0);
        for _ in 0..octaves {
            sum += amp * self.sample(x * freq, y * freq);
            norm += amp;
            amp *= 0.5;
            freq *= 2.0;
        }
        sum / norm
    }
}

fn to_u8(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "assets".into()));
    let n = BUNDLED_SIZE;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let lattice = Lattice::new(32, &mut rng);

    let bark = Image::from_fn(n, n, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let warp = 4.0 * lattice.fbm(xf / 16.0, yf / 4.0, 3);
        let streak = (xf * 0.45 + warp).sin();
        to_u8(0.45 + 0.28 * streak + 0.2 * (lattice.fbm(xf / 2.0, yf / 8.0, 2) - 0.5))
    });

    let clouds = Image::from_fn(n, n, |x, y| {
        to_u8(lattice.fbm(x as f64 / 12.0 + 7.0, y as f64 / 12.0 + 3.0, 5) * 1.3 - 0.1)
    });

    let seeds: Vec<(f64, f64)> = (0..24)
        .map(|_| (rng.gen::<f64>() * n as f64, rng.gen::<f64>() * n as f64))
        .collect();
    let pebbles = Image::from_fn(n, n, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let mut d: Vec<f64> = seeds
            .iter()
            .map(|&(sx, sy)| ((xf - sx).powi(2) + (yf - sy).powi(2)).sqrt())
            .collect();
        d.sort_by(f64::total_cmp);
        let edge = ((d[1] - d[0]) / 6.0).min(1.0);
        let shade = 0.25 + 0.5 * lattice.sample(xf / 20.0 + 11.0, yf / 20.0);
        to_u8(0.1 + edge * shade + 0.08 * (lattice.sample(xf, yf) - 0.5))
    });

    let weave = Image::from_fn(n, n, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let over = ((x / 4 + y / 4) % 2) as f64;
        let thread = if over == 0.0 {
            (xf * std::f64::consts::PI / 4.0).sin().abs()
        } else {
            (yf * std::f64::consts::PI / 4.0).sin().abs()
        };
        to_u8(0.2 + 0.55 * thread + 0.15 * lattice.fbm(xf / 6.0 + 5.0, yf / 6.0 + 9.0, 3))
    });

    for (name, img) in [("bark", bark), ("clouds", clouds), ("pebbles", pebbles), ("weave", weave)] {
        std::fs::write(dir.join(format!("{name}.pgm")), img.to_pgm())?;
    }
    Ok(())
}
