//! Debug dump of grid channels as PGM images.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureGrid;

/// Writes one channel of a feature grid as an 8-bit binary PGM, linearly
/// normalized over the channel's value range; empty pixels render black.
pub fn write_channel_pgm(grid: &FeatureGrid, channel: usize, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let res = grid.res;
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for v in 0..res {
        for u in 0..res {
            if !grid.is_empty_at(u, v) {
                let x = grid.channel(u, v, channel);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut buf = format!("P5\n{res} {res}\n255\n").into_bytes();
    for v in 0..res {
        for u in 0..res {
            let px = if grid.is_empty_at(u, v) {
                0u8
            } else {
                let t = (grid.channel(u, v, channel) - lo) / span;
                (1.0 + t * 254.0).round().clamp(1.0, 255.0) as u8
            };
            buf.push(px);
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(display.clone(), e))?;
    f.write_all(&buf).map_err(|e| Error::io(display, e))
}
