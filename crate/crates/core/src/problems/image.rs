//! Grayscale images: PGM (P5) and CSV I/O, column stacking, test phantom.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    /// Row-major, nominally in `[0, 255]`.
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidStructure("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, got: pixels.len() });
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("pixels"));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Columns stacked top to bottom: entry `col * height + row`.
    pub fn to_column_stacked(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.pixels.len());
        for col in 0..self.width {
            out.extend((0..self.height).map(|row| self.get(row, col)));
        }
        out
    }

    pub fn from_column_stacked(width: usize, height: usize, v: &[f64]) -> Result<Self> {
        if v.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, got: v.len() });
        }
        let mut pixels = vec![0.0; v.len()];
        for col in 0..width {
            for row in 0..height {
                pixels[row * width + col] = v[col * height + row];
            }
        }
        Self::new(width, height, pixels)
    }

    /// Reads `.pgm` as binary PGM and anything else as CSV.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            Self::read_pgm(path)
        } else {
            Self::read_csv(path)
        }
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_pgm(&bytes).map_err(|(line, message)| Error::Parse { path: path.to_path_buf(), line, message })
    }

    /// Binary PGM with maxval 255; pixels are rounded and clamped.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().map(|p| p.round().clamp(0.0, 255.0) as u8));
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// One image row per line, comma separated.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
        let mut pixels = Vec::new();
        let mut width = None;
        let mut height = 0;
        for (k, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| parse_err(k + 1, format!("bad pixel `{}`: {e}", v.trim())))
                })
                .collect::<Result<_>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(parse_err(k + 1, format!("expected {w} pixels, found {}", row.len())));
                }
                _ => {}
            }
            pixels.extend(row);
            height += 1;
        }
        Self::new(width.unwrap_or(0), height, pixels)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::new();
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            text.push_str(&line.join(","));
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, (usize, String)> {
    let mut pos = 0;
    let mut line = 1;
    let mut token = |pos: &mut usize| -> std::result::Result<(String, usize), (usize, String)> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                if bytes[*pos] == b'\n' {
                    line += 1;
                }
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err((line, "unexpected end of header".into()));
        }
        Ok((String::from_utf8_lossy(&bytes[start..*pos]).into_owned(), line))
    };
    let (magic, l) = token(&mut pos)?;
    if magic != "P5" {
        return Err((l, format!("expected binary PGM magic `P5`, found `{magic}`")));
    }
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let (tok, l) = token(&mut pos)?;
        *slot = tok.parse().map_err(|_| (l, format!("bad {name} `{tok}`")))?;
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 255 {
        return Err((line, format!("maxval {maxval} unsupported (1..=255)")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = width * height;
    if bytes.len() < pos + need {
        return Err((line, format!("raster holds {} of {need} pixels", bytes.len().saturating_sub(pos))));
    }
    let scale = 255.0 / maxval as f64;
    let pixels = bytes[pos..pos + need].iter().map(|&b| b as f64 * scale).collect();
    GrayImage::new(width, height, pixels).map_err(|e| (line, e.to_string()))
}

/// Smooth bumps over a ramp plus a bright rectangle and a dark disc.
pub fn phantom(n: usize) -> GrayImage {
    let mut pixels = Vec::with_capacity(n * n);
    let nf = n as f64;
    let bumps = [(0.3, 0.3, 0.12, 90.0), (0.7, 0.6, 0.18, 70.0), (0.45, 0.8, 0.08, 60.0)];
    for row in 0..n {
        for col in 0..n {
            let (y, x) = ((row as f64 + 0.5) / nf, (col as f64 + 0.5) / nf);
            let mut v = 30.0 + 40.0 * x;
            for (cx, cy, w, h) in bumps {
                v += h * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * w * w)).exp();
            }
            if (0.15..0.45).contains(&x) && (0.6..0.85).contains(&y) {
                v += 80.0;
            }
            if (x - 0.7).powi(2) + (y - 0.3).powi(2) < 0.015 {
                v -= 50.0;
            }
            pixels.push(v.clamp(0.0, 255.0));
        }
    }
    GrayImage::new(n, n, pixels).expect("phantom dimensions are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_stacking_round_trip() {
        let img = GrayImage::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(img.to_column_stacked(), vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(GrayImage::from_column_stacked(3, 2, &img.to_column_stacked()).unwrap(), img);
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.pgm");
        let img = phantom(16);
        img.write_pgm(&path).unwrap();
        let back = GrayImage::load(&path).unwrap();
        assert_eq!((back.width(), back.height()), (16, 16));
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a.round() - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pgm_with_comments_and_errors() {
        let mut data = b"P5\n# comment\n2 1\n255\n".to_vec();
        data.extend([10u8, 200]);
        assert_eq!(parse_pgm(&data).unwrap().pixels(), &[10.0, 200.0]);
        let err = parse_pgm(b"P2\n2 1\n255\n").unwrap_err();
        assert_eq!(err.0, 1);
        let short = parse_pgm(b"P5\n2 2\n255\n\x01").unwrap_err();
        assert!(short.1.contains("raster"));
    }

    #[test]
    fn csv_round_trip_and_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.csv");
        let img = GrayImage::new(2, 2, vec![0.5, 1.0, 254.25, 3.0]).unwrap();
        img.write_csv(&path).unwrap();
        assert_eq!(GrayImage::load(&path).unwrap(), img);
        std::fs::write(&path, "1,2\n3\n").unwrap();
        match GrayImage::read_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn phantom_in_range_with_structure() {
        let img = phantom(64);
        assert!(img.pixels().iter().all(|p| (0.0..=255.0).contains(p)));
        let mean = img.pixels().iter().sum::<f64>() / 4096.0;
        let var = img.pixels().iter().map(|p| (p - mean).powi(2)).sum::<f64>() / 4096.0;
        assert!(var > 100.0);
    }
}
