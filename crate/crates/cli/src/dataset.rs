//! Binary label-dataset files produced by `gen-labels` and consumed by
//! `train`.
//!
//! Layout (little-endian): magic "VINL" | u32 version | u32 pooled_res |
//! u32 grid_res | u32 record count | records. Each record: u64 scene seed,
//! u32 stage, u32 candidate index, f64 improvement, u32 f_base, u64 inside,
//! u64 outside, pooled mean grid (f32), pooled variance grid (f32).

use std::io::{Read, Write};
use std::path::Path;

use nbvlab::features::{FeatureBundle, PooledGrid, CHANNELS};

use crate::error::{CliError, CliResult};

const MAGIC: &[u8; 4] = b"VINL";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord {
    pub scene_seed: u64,
    pub stage: u32,
    pub candidate: u32,
    pub rri: f64,
    pub bundle: FeatureBundle,
}

pub fn write_label_file(path: &Path, pooled_res: u32, grid_res: u32, records: &[LabelRecord]) -> CliResult<()> {
    let display = path.display().to_string();
    let cell_count = pooled_res as usize * pooled_res as usize * CHANNELS;
    let mut buf = Vec::with_capacity(24 + records.len() * (44 + 8 * cell_count));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&pooled_res.to_le_bytes());
    buf.extend_from_slice(&grid_res.to_le_bytes());
    buf.extend_from_slice(&(records.len() as u32).to_le_bytes());
    for r in records {
        debug_assert_eq!(r.bundle.f_p.res, pooled_res);
        debug_assert_eq!(r.bundle.grid_res, grid_res);
        buf.extend_from_slice(&r.scene_seed.to_le_bytes());
        buf.extend_from_slice(&r.stage.to_le_bytes());
        buf.extend_from_slice(&r.candidate.to_le_bytes());
        buf.extend_from_slice(&r.rri.to_le_bytes());
        buf.extend_from_slice(&r.bundle.f_base.to_le_bytes());
        buf.extend_from_slice(&r.bundle.f_empty.0.to_le_bytes());
        buf.extend_from_slice(&r.bundle.f_empty.1.to_le_bytes());
        for &x in &r.bundle.f_p.data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        for &x in &r.bundle.f_v.data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    std::fs::write(path, &buf).map_err(|e| CliError::io(display, e))
}

pub fn read_label_file(path: &Path) -> CliResult<Vec<LabelRecord>> {
    let display = path.display().to_string();
    let mut raw = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| CliError::io(display.clone(), e))?;
    let fail = |reason: &str| CliError::Core(nbvlab::Error::format(display.clone(), reason));
    if raw.len() < 20 || &raw[0..4] != MAGIC {
        return Err(fail("bad magic (expected VINL)"));
    }
    let u32_at = |off: usize| u32::from_le_bytes(raw[off..off + 4].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(fail("unsupported version"));
    }
    let pooled_res = u32_at(8);
    let grid_res = u32_at(12);
    let count = u32_at(16) as usize;
    let cell_count = pooled_res as usize * pooled_res as usize * CHANNELS;
    let rec_bytes = 8 + 4 + 4 + 8 + 4 + 8 + 8 + 8 * cell_count;
    if raw.len() != 20 + count * rec_bytes {
        return Err(fail("truncated or oversized payload"));
    }
    let mut records = Vec::with_capacity(count);
    let mut off = 20;
    for _ in 0..count {
        let scene_seed = u64::from_le_bytes(raw[off..off + 8].try_into().unwrap());
        let stage = u32_at(off + 8);
        let candidate = u32_at(off + 12);
        let rri = f64::from_le_bytes(raw[off + 16..off + 24].try_into().unwrap());
        let f_base = u32_at(off + 24);
        let inside = u64::from_le_bytes(raw[off + 28..off + 36].try_into().unwrap());
        let outside = u64::from_le_bytes(raw[off + 36..off + 44].try_into().unwrap());
        let mut cursor = off + 44;
        let mut read_grid = |cursor: &mut usize| {
            let data: Vec<f32> = raw[*cursor..*cursor + 4 * cell_count]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            *cursor += 4 * cell_count;
            PooledGrid {
                res: pooled_res,
                data,
            }
        };
        let f_p = read_grid(&mut cursor);
        let f_v = read_grid(&mut cursor);
        records.push(LabelRecord {
            scene_seed,
            stage,
            candidate,
            rri,
            bundle: FeatureBundle {
                f_p,
                f_v,
                f_empty: (inside, outside),
                f_base,
                grid_res,
            },
        });
        off += rec_bytes;
    }
    Ok(records)
}
