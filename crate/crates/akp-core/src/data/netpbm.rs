//! Binary netpbm ingestion: PGM (P5) and PPM (P6) with maxval up to 255.
//! Directory layout is `root/{no_tumor,tumor}/*.pgm|*.ppm`.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::Dataset;

/// Header tokens may be separated by whitespace and `#` comment lines.
struct TokenReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> TokenReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        TokenReader { bytes, pos: 0 }
    }

    fn skip_noise(&mut self) {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_noise();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::ImageFormat("truncated netpbm header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                Error::ImageFormat(format!(
                    "expected a number in netpbm header, got {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Parse a binary PGM/PPM buffer into (channels, height, width, pixels).
/// Pixels are scaled to [0, 1] and returned channel-planar.
pub fn parse_netpbm(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<f64>)> {
    let mut reader = TokenReader::new(bytes);
    let magic = reader.token()?;
    let channels = match magic {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(Error::ImageFormat(format!(
                "unsupported magic number {:?} (binary P5/P6 only)",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = reader.number()?;
    let height = reader.number()?;
    let maxval = reader.number()?;
    if width == 0 || height == 0 {
        return Err(Error::ImageFormat("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::ImageFormat(format!(
            "maxval {maxval} unsupported (one byte per sample required)"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if reader.pos >= bytes.len() || !bytes[reader.pos].is_ascii_whitespace() {
        return Err(Error::ImageFormat("missing raster separator".into()));
    }
    let raster = &bytes[reader.pos + 1..];
    let expected = width * height * channels;
    if raster.len() < expected {
        return Err(Error::ImageFormat(format!(
            "raster holds {} bytes, expected {expected}",
            raster.len()
        )));
    }

    // interleaved samples -> channel planes
    let mut pixels = vec![0.0; expected];
    let plane = width * height;
    for i in 0..plane {
        for c in 0..channels {
            pixels[c * plane + i] = raster[i * channels + c] as f64 / maxval as f64;
        }
    }
    Ok((channels, height, width, pixels))
}

/// Write a single-channel image as binary PGM with maxval 255. Values are
/// clamped to [0, 1] and quantized to 8 bits.
pub fn write_pgm(path: &Path, height: usize, width: usize, pixels: &[f64]) -> Result<()> {
    if pixels.len() != height * width {
        return Err(Error::ShapeMismatch(format!(
            "{} pixels for a {height}x{width} image",
            pixels.len()
        )));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "P5\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = pixels
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

/// Three-channel counterpart of `write_pgm` (binary PPM). `pixels` is
/// channel-planar, matching `Dataset` layout.
pub fn write_ppm(path: &Path, height: usize, width: usize, pixels: &[f64]) -> Result<()> {
    let plane = height * width;
    if pixels.len() != 3 * plane {
        return Err(Error::ShapeMismatch(format!(
            "{} samples for a 3x{height}x{width} image",
            pixels.len()
        )));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "P6\n{width} {height}\n255\n")?;
    let mut bytes = Vec::with_capacity(3 * plane);
    for i in 0..plane {
        for c in 0..3 {
            bytes.push((pixels[c * plane + i].clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

fn is_netpbm(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()),
        Some(ref e) if e == "pgm" || e == "ppm"
    )
}

fn read_class_dir(dir: &Path) -> Result<Vec<(usize, usize, usize, Vec<f64>)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.is_file() && is_netpbm(p))
        .collect();
    paths.sort();
    let mut images = Vec::with_capacity(paths.len());
    for path in paths {
        let bytes = std::fs::read(&path)?;
        let parsed = parse_netpbm(&bytes)
            .map_err(|e| Error::ImageFormat(format!("{}: {e}", path.display())))?;
        images.push(parsed);
    }
    Ok(images)
}

/// Load `root/no_tumor` as class 0 and `root/tumor` as class 1. All images
/// must share one (channels, height, width); differing sizes are an error,
/// never silently resampled.
pub fn load_image_dir(root: &Path) -> Result<Dataset> {
    let class0 = read_class_dir(&root.join("no_tumor"))?;
    let class1 = read_class_dir(&root.join("tumor"))?;
    if class0.is_empty() && class1.is_empty() {
        return Err(Error::ImageFormat(format!(
            "no PGM/PPM images under {}",
            root.display()
        )));
    }
    for (name, imgs) in [("no_tumor", &class0), ("tumor", &class1)] {
        if imgs.is_empty() {
            eprintln!(
                "warning: {} contains no images; dataset is single-class",
                root.join(name).display()
            );
        }
    }

    let (c, h, w, _) = *class0.first().or(class1.first()).expect("non-empty");
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (label, imgs) in [(0u8, class0), (1u8, class1)] {
        for (ic, ih, iw, pixels) in imgs {
            if (ic, ih, iw) != (c, h, w) {
                return Err(Error::ImageFormat(format!(
                    "image size {ic}x{ih}x{iw} does not match {c}x{h}x{w}; resampling is not performed"
                )));
            }
            data.extend_from_slice(&pixels);
            labels.push(label);
        }
    }
    let n = labels.len();
    Dataset::new(Tensor::from_vec(&[n, c, h, w], data)?, labels)
}

/// Write a dataset to `root/{no_tumor,tumor}` as PGM (single channel) or
/// PPM (three channels).
pub fn save_image_dir(root: &Path, ds: &Dataset) -> Result<()> {
    let shape = ds.images.shape();
    let (c, h, w) = (shape[1], shape[2], shape[3]);
    if c != 1 && c != 3 {
        return Err(Error::ImageFormat(format!(
            "netpbm supports 1 or 3 channels, dataset has {c}"
        )));
    }
    std::fs::create_dir_all(root.join("no_tumor"))?;
    std::fs::create_dir_all(root.join("tumor"))?;
    for i in 0..ds.len() {
        let sub = if ds.labels[i] == 0 { "no_tumor" } else { "tumor" };
        let name = format!("img{i:05}.{}", if c == 1 { "pgm" } else { "ppm" });
        let path = root.join(sub).join(name);
        if c == 1 {
            write_pgm(&path, h, w, ds.image(i))?;
        } else {
            write_ppm(&path, h, w, ds.image(i))?;
        }
    }
    Ok(())
}
