//! Versioned binary checkpoint format.
//!
//! Layout (all integers little-endian):
//! magic "VINW" | u32 version | profile block | u32 tensor count |
//! per tensor: u32 name length, name bytes, u32 rank, u32 dims, f32 data.
//! The profile block stores the id string plus every numeric field, so a
//! loaded model rejects bundles built for another shape.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vin::params::{ParamSet, VinParams, VinProfile};

const MAGIC: &[u8; 4] = b"VINW";
const VERSION: u32 = 1;

fn tensor_shapes(profile: &VinProfile) -> [Vec<usize>; 14] {
    let cin = |s: usize| {
        if s == 0 {
            crate::vin::params::INPUT_CHANNELS
        } else {
            profile.conv_channels[s - 1]
        }
    };
    [
        vec![3, 3, cin(0), profile.conv_channels[0]],
        vec![profile.conv_channels[0]],
        vec![3, 3, cin(1), profile.conv_channels[1]],
        vec![profile.conv_channels[1]],
        vec![3, 3, cin(2), profile.conv_channels[2]],
        vec![profile.conv_channels[2]],
        vec![3, 3, cin(3), profile.conv_channels[3]],
        vec![profile.conv_channels[3]],
        vec![profile.head_input(), profile.hidden],
        vec![profile.hidden],
        vec![profile.hidden, profile.hidden],
        vec![profile.hidden],
        vec![profile.hidden],
        vec![crate::vin::labels::NUM_THRESHOLDS],
    ]
}

pub fn save_checkpoint(params: &VinParams<f32>, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let p = &params.profile;
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    let id = p.id.as_bytes();
    buf.extend_from_slice(&(id.len() as u32).to_le_bytes());
    buf.extend_from_slice(id);
    buf.extend_from_slice(&p.pooled_res.to_le_bytes());
    buf.extend_from_slice(&p.grid_res.to_le_bytes());
    for c in p.conv_channels {
        buf.extend_from_slice(&(c as u32).to_le_bytes());
    }
    buf.extend_from_slice(&(p.hidden as u32).to_le_bytes());
    buf.extend_from_slice(&p.vis_scale.to_le_bytes());
    buf.extend_from_slice(&p.depth_scale.to_le_bytes());
    buf.extend_from_slice(&p.base_scale.to_le_bytes());

    let names = ParamSet::<f32>::tensor_names();
    let shapes = tensor_shapes(p);
    let tensors = params.set.tensors();
    buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for ((name, shape), data) in names.iter().zip(&shapes).zip(tensors) {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &d in shape {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        let expect: usize = shape.iter().product();
        debug_assert_eq!(expect, data.len());
        for &x in data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(display.clone(), e))?;
    f.write_all(&buf).map_err(|e| Error::io(display, e))
}

pub fn load_checkpoint(path: &Path) -> Result<VinParams<f32>> {
    let display = path.display().to_string();
    let mut raw = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| Error::io(display.clone(), e))?;
    let mut cur = Cursor {
        raw: &raw,
        pos: 0,
        path: &display,
    };
    if cur.take(4)? != MAGIC.as_slice() {
        return Err(Error::format(display, "bad magic (expected VINW)"));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::format(
            display,
            format!("unsupported checkpoint version {version}"),
        ));
    }
    let id_len = cur.u32()? as usize;
    let id = String::from_utf8(cur.take(id_len)?.to_vec())
        .map_err(|_| Error::format(display.clone(), "profile id not utf-8"))?;
    let pooled_res = cur.u32()?;
    let grid_res = cur.u32()?;
    let conv_channels = [
        cur.u32()? as usize,
        cur.u32()? as usize,
        cur.u32()? as usize,
        cur.u32()? as usize,
    ];
    let hidden = cur.u32()? as usize;
    let profile = VinProfile {
        id,
        pooled_res,
        grid_res,
        conv_channels,
        hidden,
        vis_scale: cur.f32()?,
        depth_scale: cur.f32()?,
        base_scale: cur.f32()?,
    };
    let count = cur.u32()? as usize;
    if count != 14 {
        return Err(Error::format(display, format!("expected 14 tensors, found {count}")));
    }
    let names = ParamSet::<f32>::tensor_names();
    let shapes = tensor_shapes(&profile);
    let mut set = ParamSet::<f32>::zeros_like_profile(&profile);
    {
        let slots = set.tensors_mut();
        for ((expect_name, expect_shape), slot) in names.iter().zip(&shapes).zip(slots) {
            let name_len = cur.u32()? as usize;
            let name = String::from_utf8(cur.take(name_len)?.to_vec())
                .map_err(|_| Error::format(display.clone(), "tensor name not utf-8"))?;
            if name != *expect_name {
                return Err(Error::format(
                    display.clone(),
                    format!("tensor '{name}' out of order (expected '{expect_name}')"),
                ));
            }
            let rank = cur.u32()? as usize;
            let mut dims = Vec::with_capacity(rank);
            for _ in 0..rank {
                dims.push(cur.u32()? as usize);
            }
            if dims != *expect_shape {
                return Err(Error::format(
                    display.clone(),
                    format!("tensor '{name}' shape {dims:?} != expected {expect_shape:?}"),
                ));
            }
            let n: usize = dims.iter().product();
            let bytes = cur.take(n * 4)?;
            for (dst, chunk) in slot.iter_mut().zip(bytes.chunks_exact(4)) {
                *dst = f32::from_le_bytes(chunk.try_into().unwrap());
            }
        }
    }
    if cur.pos != raw.len() {
        return Err(Error::format(display, "trailing bytes after tensors"));
    }
    Ok(VinParams { profile, set })
}

struct Cursor<'a> {
    raw: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.raw.len() {
            return Err(Error::format(self.path.to_string(), "truncated file"));
        }
        let s = &self.raw[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}
