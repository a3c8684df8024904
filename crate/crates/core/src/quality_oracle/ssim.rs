// SPDX-License-Identifier: Apache-2.0

use super::images::Image;
use crate::error::{Error, Result};

pub const WINDOW: usize = 8;
pub const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Mean SSIM over non-overlapping 8x8 windows. Rows and columns past the last
/// full window are ignored. Variances and covariance use the population
/// (divide-by-N) form.
pub fn ssim(out: &Image, reference: &Image) -> Result<f64> {
    if out.width != reference.width || out.height != reference.height {
        return Err(Error::Dimension(format!(
            "{}x{} vs {}x{}",
            out.width, out.height, reference.width, reference.height
        )));
    }
    let (wx, wy) = (out.width / WINDOW, out.height / WINDOW);
    if wx == 0 || wy == 0 {
        return Err(Error::Dimension("image smaller than one window".into()));
    }
    let n = (WINDOW * WINDOW) as f64;
    let mut total = 0.0;
    for by in 0..wy {
        for bx in 0..wx {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for y in by * WINDOW..(by + 1) * WINDOW {
                for x in bx * WINDOW..(bx + 1) * WINDOW {
                    let a = out.get(x, y) as f64;
                    let b = reference.get(x, y) as f64;
                    sx += a;
                    sy += b;
                    sxx += a * a;
                    syy += b * b;
                    sxy += a * b;
                }
            }
            let (mx, my) = (sx / n, sy / n);
            let vx = sxx / n - mx * mx;
            let vy = syy / n - my * my;
            let cxy = sxy / n - mx * my;
            total += ((2.0 * mx * my + C1) * (2.0 * cxy + C2))
                / ((mx * mx + my * my + C1) * (vx + vy + C2));
        }
    }
    Ok(total / (wx * wy) as f64)
}

/// Mean of per-image SSIM over paired image lists.
pub fn mean_ssim(outs: &[Image], refs: &[Image]) -> Result<f64> {
    if outs.len() != refs.len() || outs.is_empty() {
        return Err(Error::Dimension(format!("{} outputs for {} references", outs.len(), refs.len())));
    }
    let mut sum = 0.0;
    for (o, r) in outs.iter().zip(refs) {
        sum += ssim(o, r)?;
    }
    Ok(sum / outs.len() as f64)
}
