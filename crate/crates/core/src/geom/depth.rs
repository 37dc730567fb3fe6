//! Metric depth images and their raw binary file format.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const DEPTH_MAGIC: &[u8; 4] = b"DPTH";

/// An H×W grid of camera-space depths in meters, row-major. The value 0
/// marks pixels where no surface was hit; valid depths are strictly
/// positive and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f32>,
}

impl DepthImage {
    pub fn new_invalid(width: u32, height: u32) -> Self {
        DepthImage {
            width,
            height,
            values: vec![0.0; width as usize * height as usize],
        }
    }

    pub fn get(&self, u: u32, v: u32) -> f32 {
        self.values[v as usize * self.width as usize + u as usize]
    }

    pub fn set(&mut self, u: u32, v: u32, depth: f32) {
        self.values[v as usize * self.width as usize + u as usize] = depth;
    }

    pub fn is_valid(&self, u: u32, v: u32) -> bool {
        self.get(u, v) > 0.0
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&d| d > 0.0).count()
    }

    /// All values finite, valid entries strictly positive.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.width as usize * self.height as usize {
            return Err(Error::Dimension(format!(
                "{} values for a {}x{} image",
                self.values.len(),
                self.width,
                self.height
            )));
        }
        if let Some((i, &d)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, &d)| !d.is_finite() || d < 0.0)
        {
            return Err(Error::Parameter(format!("depth[{i}] = {d} invalid")));
        }
        Ok(())
    }

    /// Writes the raw format: 16-byte header (magic "DPTH", u32 W, u32 H,
    /// u32 reserved) followed by row-major little-endian f32 values.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + self.values.len() * 4);
        buf.extend_from_slice(DEPTH_MAGIC);
        buf.extend_from_slice(&self.width.to_le_bytes());
        buf.extend_from_slice(&self.height.to_le_bytes());
        buf.extend_from_slice(&0u32.to_le_bytes());
        for d in &self.values {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        let mut f =
            std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(&buf)
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let mut f = std::fs::File::open(path).map_err(|e| Error::io(display.clone(), e))?;
        let mut header = [0u8; 16];
        f.read_exact(&mut header)
            .map_err(|e| Error::io(display.clone(), e))?;
        if &header[0..4] != DEPTH_MAGIC {
            return Err(Error::format(display, "bad magic (expected DPTH)"));
        }
        let width = u32::from_le_bytes(header[4..8].try_into().unwrap());
        let height = u32::from_le_bytes(header[8..12].try_into().unwrap());
        let n = width as usize * height as usize;
        let mut raw = Vec::new();
        f.read_to_end(&mut raw)
            .map_err(|e| Error::io(display.clone(), e))?;
        if raw.len() != n * 4 {
            return Err(Error::format(
                display,
                format!("expected {} payload bytes, found {}", n * 4, raw.len()),
            ));
        }
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let img = DepthImage {
            width,
            height,
            values,
        };
        img.validate()
            .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
        Ok(img)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let mut img = DepthImage::new_invalid(3, 2);
        img.set(0, 0, 1.5);
        img.set(2, 1, 0.25);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.dpth");
        img.write_file(&path).unwrap();
        let back = DepthImage::read_file(&path).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.dpth");
        std::fs::write(&path, b"XXXX0000000000000000").unwrap();
        assert!(matches!(
            DepthImage::read_file(&path),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.dpth");
        let mut buf = Vec::new();
        buf.extend_from_slice(b"DPTH");
        buf.extend_from_slice(&4u32.to_le_bytes());
        buf.extend_from_slice(&4u32.to_le_bytes());
        buf.extend_from_slice(&0u32.to_le_bytes());
        buf.extend_from_slice(&[0u8; 8]);
        std::fs::write(&path, &buf).unwrap();
        assert!(matches!(
            DepthImage::read_file(&path),
            Err(Error::Format { .. })
        ));
    }
}
