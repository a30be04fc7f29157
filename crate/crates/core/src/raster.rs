//! In-memory 8-bit RGB raster plus lossless PNG/PGM interchange.

use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("io failure for {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported format for {path}: {detail}")]
    UnsupportedFormat { path: String, detail: String },
}

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    data: Vec<u8>, // RGB interleaved, len = w*h*3
}

pub const WHITE: [u8; 3] = [255, 255, 255];

impl Raster {
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        assert!(width >= 1 && height >= 1, "raster dimensions must be >= 1");
        let mut data = vec![0u8; width as usize * height as usize * 3];
        for px in data.chunks_exact_mut(3) {
            px.copy_from_slice(&color);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn white(width: u32, height: u32) -> Self {
        Self::filled(width, height, WHITE)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    fn idx(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.idx(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, color: [u8; 3]) {
        let i = self.idx(x, y);
        self.data[i..i + 3].copy_from_slice(&color);
    }

    /// BT.601 luma of the pixel, rounded to u8.
    #[inline]
    pub fn luma(&self, x: u32, y: u32) -> u8 {
        let [r, g, b] = self.get(x, y);
        luma_of(r, g, b)
    }

    /// Grayscale copy of the whole image, one luma byte per pixel.
    pub fn to_luma(&self) -> Vec<u8> {
        self.data
            .chunks_exact(3)
            .map(|c| luma_of(c[0], c[1], c[2]))
            .collect()
    }

    /// Hex SHA-256 over dimensions and pixel content.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.width.to_le_bytes());
        h.update(self.height.to_le_bytes());
        h.update(&self.data);
        let digest = h.finalize();
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Nearest-neighbor resample; preserves binarized content.
    pub fn resize_nearest(&self, width: u32, height: u32) -> Raster {
        if (width, height) == self.dimensions() {
            return self.clone();
        }
        let mut out = Raster::filled(width, height, [0, 0, 0]);
        for y in 0..height {
            let sy = ((y as u64 * self.height as u64) / height as u64).min(self.height as u64 - 1);
            for x in 0..width {
                let sx =
                    ((x as u64 * self.width as u64) / width as u64).min(self.width as u64 - 1);
                out.put(x, y, self.get(sx as u32, sy as u32));
            }
        }
        out
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RasterError> {
        let img = image::RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("buffer length matches dimensions");
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(source) => RasterError::Io {
                    path: path.display().to_string(),
                    source,
                },
                other => RasterError::UnsupportedFormat {
                    path: path.display().to_string(),
                    detail: other.to_string(),
                },
            })
    }

    /// Load a PNG (8-bit RGB/RGBA/gray) or PGM image.
    pub fn load(path: &Path) -> Result<Raster, RasterError> {
        let bytes = std::fs::read(path).map_err(|source| RasterError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let img = image::load_from_memory(&bytes).map_err(|e| RasterError::UnsupportedFormat {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let rgb = img.to_rgb8();
        Ok(Raster {
            width: rgb.width(),
            height: rgb.height(),
            data: rgb.into_raw(),
        })
    }
}

#[inline]
pub fn luma_of(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    y.round().min(255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(n: u32) -> Raster {
        let mut r = Raster::white(n, n);
        for y in 0..n {
            for x in 0..n {
                if (x + y) % 2 == 0 {
                    r.put(x, y, [0, 0, 0]);
                }
            }
        }
        r
    }

    #[test]
    fn png_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("board.png");
        let r = checkerboard(3);
        r.save_png(&path).unwrap();
        let back = Raster::load(&path).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn load_missing_file_is_io_failure() {
        let err = Raster::load(Path::new("/nonexistent/nothing.png")).unwrap_err();
        assert!(matches!(err, RasterError::Io { .. }));
    }

    #[test]
    fn load_garbage_is_unsupported_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.png");
        std::fs::write(&path, b"not an image").unwrap();
        let err = Raster::load(&path).unwrap_err();
        assert!(matches!(err, RasterError::UnsupportedFormat { .. }));
    }

    #[test]
    fn pgm_fixture_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fix.pgm");
        let mut bytes = b"P5\n4 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 128, 0, 255, 0, 0, 255]);
        std::fs::write(&path, bytes).unwrap();
        let r = Raster::load(&path).unwrap();
        assert_eq!(r.dimensions(), (4, 2));
        assert_eq!(r.get(1, 0), [255, 255, 255]);
        assert_eq!(r.get(0, 0), [0, 0, 0]);
    }

    #[test]
    fn thousand_px_png_reports_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.png");
        Raster::white(1000, 1000).save_png(&path).unwrap();
        let r = Raster::load(&path).unwrap();
        assert_eq!(r.dimensions(), (1000, 1000));
    }

    #[test]
    fn content_hash_is_stable_and_discriminates() {
        let a = checkerboard(8);
        let b = checkerboard(8);
        assert_eq!(a.content_hash(), b.content_hash());
        let mut c = checkerboard(8);
        c.put(0, 0, [1, 2, 3]);
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn nearest_resize_preserves_binarization() {
        let r = checkerboard(10).resize_nearest(25, 25);
        assert_eq!(r.dimensions(), (25, 25));
        for y in 0..25 {
            for x in 0..25 {
                let px = r.get(x, y);
                assert!(px == [0, 0, 0] || px == [255, 255, 255]);
            }
        }
    }
}
