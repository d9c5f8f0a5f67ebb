//! Owned 8-bit RGB raster with row-major layout and PNG/JPEG file IO.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PixelError {
    #[error("pixel buffer dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: u32, height: u32 },
    #[error("pixel data length {got} does not match {width}x{height}x3 = {want}")]
    DataLength { width: u32, height: u32, got: usize, want: usize },
    #[error("failed to decode image {path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("failed to encode image {path}: {source}")]
    Encode {
        path: String,
        #[source]
        source: image::ImageError,
    },
}

/// Row-major interleaved RGB buffer. Index `(row, col)` with `row` growing
/// downward, matching image and grid conventions used across the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelBuffer {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl PixelBuffer {
    /// Black buffer of the given size.
    pub fn new(width: u32, height: u32) -> Result<Self, PixelError> {
        if width == 0 || height == 0 {
            return Err(PixelError::EmptyDimensions { width, height });
        }
        Ok(Self { width, height, data: vec![0; width as usize * height as usize * 3] })
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, PixelError> {
        if width == 0 || height == 0 {
            return Err(PixelError::EmptyDimensions { width, height });
        }
        let want = width as usize * height as usize * 3;
        if data.len() != want {
            return Err(PixelError::DataLength { width, height, got: data.len(), want });
        }
        Ok(Self { width, height, data })
    }

    /// Decode a PNG or JPEG file and convert to RGB8.
    pub fn load(path: &Path) -> Result<Self, PixelError> {
        let img = image::open(path)
            .map_err(|source| PixelError::Decode { path: path.display().to_string(), source })?;
        let rgb = img.to_rgb8();
        let (width, height) = rgb.dimensions();
        Self::from_raw(width, height, rgb.into_raw())
    }

    /// Decode PNG or JPEG bytes and convert to RGB8.
    pub fn decode(bytes: &[u8]) -> Result<Self, PixelError> {
        let img = image::load_from_memory(bytes)
            .map_err(|source| PixelError::Decode { path: "<memory>".to_string(), source })?;
        let rgb = img.to_rgb8();
        let (width, height) = rgb.dimensions();
        Self::from_raw(width, height, rgb.into_raw())
    }

    pub fn save_png(&self, path: &Path) -> Result<(), PixelError> {
        let img = image::RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("buffer length is validated on construction");
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| PixelError::Encode { path: path.display().to_string(), source })
    }

    /// Encode as PNG bytes.
    pub fn encode_png(&self) -> Result<Vec<u8>, PixelError> {
        let img = image::RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("buffer length is validated on construction");
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png)
            .map_err(|source| PixelError::Encode { path: "<memory>".to_string(), source })?;
        Ok(out.into_inner())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, row: u32, col: u32) -> usize {
        debug_assert!(row < self.height && col < self.width);
        (row as usize * self.width as usize + col as usize) * 3
    }

    #[inline]
    pub fn get(&self, row: u32, col: u32) -> [u8; 3] {
        let o = self.offset(row, col);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    #[inline]
    pub fn set(&mut self, row: u32, col: u32, rgb: [u8; 3]) {
        let o = self.offset(row, col);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    /// Copy of the axis-aligned window starting at `(top, left)`.
    ///
    /// Panics if the window exceeds the buffer; callers validate bounds.
    pub fn crop(&self, top: u32, left: u32, width: u32, height: u32) -> PixelBuffer {
        assert!(left + width <= self.width && top + height <= self.height);
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for row in top..top + height {
            let start = self.offset(row, left);
            data.extend_from_slice(&self.data[start..start + width as usize * 3]);
        }
        PixelBuffer { width, height, data }
    }
}
