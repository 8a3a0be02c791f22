//! Multi-resolution local binary pattern histograms over a cell grid.
//!
//! Frames are pre-cropped grayscale mouth regions. Each frame maps to one
//! fixed-length feature vector: per grid cell, per sampling radius, an
//! L1-normalized histogram of LBP codes, concatenated cell-major and
//! radius-minor. The dimensionality depends on the configuration only,
//! never on image content.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A grayscale frame, row-major intensities in `[0, 255]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != rows * cols {
            return Err(Error::invalid(format!(
                "pixel buffer has {} entries, expected {}x{} = {}",
                pixels.len(),
                rows,
                cols,
                rows * cols
            )));
        }
        Ok(GrayImage { rows, cols, pixels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixel(&self, r: usize, c: usize) -> u8 {
        self.pixels[r * self.cols + c]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Bilinear sample at real coordinates. Nested lerp keeps constant
    /// regions exact, so a flat image compares equal to its own samples.
    fn sample(&self, row: f64, col: f64) -> f64 {
        let r0 = row.floor();
        let c0 = col.floor();
        let fr = row - r0;
        let fc = col - c0;
        let r0 = r0 as usize;
        let c0 = c0 as usize;
        let r1 = (r0 + 1).min(self.rows - 1);
        let c1 = (c0 + 1).min(self.cols - 1);
        let p00 = f64::from(self.pixel(r0, c0));
        let p01 = f64::from(self.pixel(r0, c1));
        let p10 = f64::from(self.pixel(r1, c0));
        let p11 = f64::from(self.pixel(r1, c1));
        let top = p00 + fc * (p01 - p00);
        let bottom = p10 + fc * (p11 - p10);
        top + fr * (bottom - top)
    }
}

/// LBP extraction settings. `LBP_{1:8x8}` style configurations map to
/// `radii = 1..=8`, `samples = 8`; the `u2` superscript is the `uniform`
/// flag and the cell-grid prefix is `grid_rows x grid_cols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbpConfig {
    /// Sampling points per circle (P).
    #[serde(default = "default_samples")]
    pub samples: u32,
    /// Circle radii in pixels, strictly increasing.
    pub radii: Vec<f64>,
    /// Map codes through the uniform-pattern (u2) binning.
    #[serde(default)]
    pub uniform: bool,
    #[serde(default = "default_grid")]
    pub grid_rows: usize,
    #[serde(default = "default_grid")]
    pub grid_cols: usize,
}

fn default_samples() -> u32 {
    8
}

fn default_grid() -> usize {
    1
}

impl LbpConfig {
    pub fn new(
        samples: u32,
        radii: Vec<f64>,
        uniform: bool,
        grid_rows: usize,
        grid_cols: usize,
    ) -> Result<Self> {
        let config = LbpConfig {
            samples,
            radii,
            uniform,
            grid_rows,
            grid_cols,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 4 {
            return Err(Error::invalid(format!(
                "need at least 4 sampling points, got {}",
                self.samples
            )));
        }
        // 2^P histogram bins; beyond 16 the non-uniform histogram is unusable.
        if self.samples > 16 {
            return Err(Error::invalid(format!(
                "at most 16 sampling points supported, got {}",
                self.samples
            )));
        }
        if self.radii.is_empty() {
            return Err(Error::invalid("radii must be nonempty"));
        }
        if self.radii[0] <= 0.0 {
            return Err(Error::invalid(format!(
                "radii must be positive, got {}",
                self.radii[0]
            )));
        }
        if self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("radii must be strictly increasing"));
        }
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::invalid("grid must have at least one cell"));
        }
        Ok(())
    }

    /// Histogram bins per (cell, radius) block.
    pub fn bins(&self) -> usize {
        if self.uniform {
            uniform_bin_count(self.samples)
        } else {
            1 << self.samples
        }
    }

    /// Feature dimensionality; a function of the configuration alone.
    pub fn feature_dim(&self) -> usize {
        self.grid_rows * self.grid_cols * self.radii.len() * self.bins()
    }
}

/// Total bins of the u2 mapping: P(P-1)+2 uniform codes plus one shared bin.
pub fn uniform_bin_count(samples: u32) -> usize {
    let p = samples as usize;
    p * (p - 1) + 3
}

fn circular_transitions(code: u32, samples: u32) -> u32 {
    let mask = if samples == 32 {
        u32::MAX
    } else {
        (1u32 << samples) - 1
    };
    let rotated = ((code >> 1) | (code << (samples - 1))) & mask;
    (code ^ rotated).count_ones()
}

/// Bin index of `code` under the u2 mapping: uniform codes (at most two
/// circular transitions) each get their own bin in ascending code order,
/// everything else shares the final bin.
pub fn uniform_bin(code: u32, samples: u32) -> usize {
    assert!(
        code < (1u32 << samples),
        "code {code} out of range for P={samples}"
    );
    let p = samples as usize;
    if circular_transitions(code, samples) > 2 {
        return p * (p - 1) + 2;
    }
    (0..code)
        .filter(|&c| circular_transitions(c, samples) <= 2)
        .count()
}

/// Lookup table over all 2^P codes; `uniform_bin` one code at a time.
fn uniform_table(samples: u32) -> Vec<usize> {
    let p = samples as usize;
    let shared = p * (p - 1) + 2;
    let mut rank = 0;
    (0..1u32 << samples)
        .map(|code| {
            if circular_transitions(code, samples) <= 2 {
                rank += 1;
                rank - 1
            } else {
                shared
            }
        })
        .collect()
}

/// LBP code at a center pixel: bit `p` is set iff the bilinearly
/// interpolated neighbor at angle `2*pi*p/P` (counter-clockwise from the
/// +x axis, x = columns, y = up) is at least the center intensity.
pub fn lbp_code_at(
    image: &GrayImage,
    r: usize,
    c: usize,
    radius: f64,
    samples: u32,
) -> Result<u32> {
    if image.rows < 3 || image.cols < 3 {
        return Err(Error::invalid(format!(
            "image {}x{} too small for LBP (need at least 3x3)",
            image.rows, image.cols
        )));
    }
    let (rf, cf) = (r as f64, c as f64);
    let fits = rf - radius >= 0.0
        && rf + radius <= (image.rows - 1) as f64
        && cf - radius >= 0.0
        && cf + radius <= (image.cols - 1) as f64;
    if !fits {
        return Err(Error::invalid(format!(
            "sampling circle of radius {radius} around ({r}, {c}) leaves the {}x{} image",
            image.rows, image.cols
        )));
    }
    Ok(lbp_code_unchecked(image, rf, cf, radius, samples))
}

fn lbp_code_unchecked(image: &GrayImage, rf: f64, cf: f64, radius: f64, samples: u32) -> u32 {
    let center = f64::from(image.pixel(rf as usize, cf as usize));
    let mut code = 0u32;
    for p in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * f64::from(p) / f64::from(samples);
        let row = rf - radius * theta.sin();
        let col = cf + radius * theta.cos();
        if image.sample(row, col) >= center {
            code |= 1 << p;
        }
    }
    code
}

/// One frame's feature vector of dimensionality [`LbpConfig::feature_dim`].
pub type FeatureVector = Vec<f64>;

/// Grid cell boundaries: cell `i` spans `[bound(i), bound(i+1))` with
/// `bound(i) = floor(i * extent / cells)`; the last cell absorbs the remainder.
fn cell_bounds(extent: usize, cells: usize) -> Vec<usize> {
    (0..=cells).map(|i| i * extent / cells).collect()
}

/// Extract one frame's histogram features.
///
/// The image is partitioned into a `grid_rows x grid_cols` grid as evenly as
/// possible. Within each cell, for each radius, every pixel whose sampling
/// circle stays inside the cell's region contributes one code; pixels whose
/// circle would leave the cell are skipped rather than padded. Each
/// (cell, radius) histogram is L1-normalized and the blocks are concatenated
/// cell-major, radius-minor.
pub fn extract_frame_features(image: &GrayImage, config: &LbpConfig) -> Result<FeatureVector> {
    config.validate()?;
    let bins = config.bins();
    let table = if config.uniform {
        Some(uniform_table(config.samples))
    } else {
        None
    };
    let row_bounds = cell_bounds(image.rows, config.grid_rows);
    let col_bounds = cell_bounds(image.cols, config.grid_cols);

    let mut features = Vec::with_capacity(config.feature_dim());
    for gr in 0..config.grid_rows {
        for gc in 0..config.grid_cols {
            let (top, bottom) = (row_bounds[gr], row_bounds[gr + 1]);
            let (left, right) = (col_bounds[gc], col_bounds[gc + 1]);
            for &radius in &config.radii {
                let mut hist = vec![0u64; bins];
                let mut count = 0u64;
                for r in top..bottom {
                    let rf = r as f64;
                    if rf - radius < top as f64 || rf + radius > (bottom - 1) as f64 {
                        continue;
                    }
                    for c in left..right {
                        let cf = c as f64;
                        if cf - radius < left as f64 || cf + radius > (right - 1) as f64 {
                            continue;
                        }
                        let code = lbp_code_unchecked(image, rf, cf, radius, config.samples);
                        let bin = match &table {
                            Some(t) => t[code as usize],
                            None => code as usize,
                        };
                        hist[bin] += 1;
                        count += 1;
                    }
                }
                if count == 0 {
                    return Err(Error::invalid(format!(
                        "image too small for radius {radius}: cell ({gr}, {gc}) of a {}x{} image has no valid centers",
                        image.rows, image.cols
                    )));
                }
                let total = count as f64;
                features.extend(hist.iter().map(|&h| h as f64 / total));
            }
        }
    }
    Ok(features)
}

/// An ordered sequence of equal-dimension frame features; rows are frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    frames: DMatrix<f64>,
}

impl FeatureSequence {
    pub fn from_rows(rows: Vec<FeatureVector>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid(format!(
                "a sequence needs at least 2 frames, got {}",
                rows.len()
            )));
        }
        let dim = rows[0].len();
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::invalid(format!(
                "frame {} has dimension {}, expected {}",
                bad,
                rows[bad].len(),
                dim
            )));
        }
        if dim == 0 {
            return Err(Error::invalid("frames must have at least one feature"));
        }
        let frames = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        Ok(FeatureSequence { frames })
    }

    pub fn from_matrix(frames: DMatrix<f64>) -> Result<Self> {
        if frames.nrows() < 2 || frames.ncols() == 0 {
            return Err(Error::invalid(format!(
                "a sequence needs at least 2 frames of positive dimension, got {}x{}",
                frames.nrows(),
                frames.ncols()
            )));
        }
        Ok(FeatureSequence { frames })
    }

    /// Number of frames n_k.
    pub fn len(&self) -> usize {
        self.frames.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.nrows() == 0
    }

    /// Feature dimensionality D.
    pub fn dim(&self) -> usize {
        self.frames.ncols()
    }

    /// The n_k x D data matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> Vec<f64> {
        self.frames.row(i).iter().copied().collect()
    }

    /// One row per frame, comma-separated values, no header. Values are
    /// written in shortest round-trip form so reloads are bit-identical.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.len() {
            let row: Vec<String> = self.frames.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows: Vec<FeatureVector> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| Error::Manifest {
                    path: path.to_path_buf(),
                    row: idx + 1,
                    msg: format!("not a number: {field:?}"),
                })?;
                row.push(v);
            }
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::Manifest {
                        path: path.to_path_buf(),
                        row: idx + 1,
                        msg: format!("ragged row: {} values, expected {}", row.len(), first.len()),
                    });
                }
            }
            rows.push(row);
        }
        FeatureSequence::from_rows(rows)
    }
}

/// Per-frame extraction, order preserved. All frames must share dimensions.
pub fn extract_sequence_features(
    frames: &[GrayImage],
    config: &LbpConfig,
) -> Result<FeatureSequence> {
    if frames.len() < 2 {
        return Err(Error::invalid(format!(
            "a sequence needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    let (rows, cols) = (frames[0].rows(), frames[0].cols());
    if let Some(bad) = frames
        .iter()
        .position(|f| f.rows() != rows || f.cols() != cols)
    {
        return Err(Error::invalid(format!(
            "frame {} is {}x{}, expected {}x{}",
            bad,
            frames[bad].rows(),
            frames[bad].cols(),
            rows,
            cols
        )));
    }
    let vectors: Result<Vec<FeatureVector>> = frames
        .par_iter()
        .map(|f| extract_frame_features(f, config))
        .collect();
    FeatureSequence::from_rows(vectors?)
}

/// Read a binary (P5) PGM image with maxval up to 255.
pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|msg| Error::Container {
        path: path.to_path_buf(),
        msg,
    })
}

fn pgm_token(bytes: &[u8], pos: &mut usize) -> std::result::Result<String, String> {
    // skip whitespace and '#' comment lines
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err("truncated header".into());
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut pos = 0;
    if pgm_token(bytes, &mut pos)? != "P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let cols: usize = pgm_token(bytes, &mut pos)?
        .parse()
        .map_err(|_| "bad width")?;
    let rows: usize = pgm_token(bytes, &mut pos)?
        .parse()
        .map_err(|_| "bad height")?;
    let maxval: usize = pgm_token(bytes, &mut pos)?
        .parse()
        .map_err(|_| "bad maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval} (need 1..=255)"));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster separator".into());
    }
    pos += 1;
    let expected = rows * cols;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(format!(
            "raster has {} bytes, expected {expected}",
            raster.len()
        ));
    }
    GrayImage::new(rows, cols, raster[..expected].to_vec()).map_err(|e| e.to_string())
}

/// Write a binary (P5) PGM image, maxval 255.
pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", image.cols(), image.rows()).into_bytes();
    out.extend_from_slice(image.pixels());
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn constant_image(rows: usize, cols: usize, v: u8) -> GrayImage {
        GrayImage::new(rows, cols, vec![v; rows * cols]).unwrap()
    }

    fn random_image(rng: &mut StdRng, rows: usize, cols: usize) -> GrayImage {
        GrayImage::new(rows, cols, (0..rows * cols).map(|_| rng.gen()).collect()).unwrap()
    }

    fn rotate180(image: &GrayImage) -> GrayImage {
        let mut pixels = image.pixels().to_vec();
        pixels.reverse();
        GrayImage::new(image.rows(), image.cols(), pixels).unwrap()
    }

    #[test]
    fn constant_image_codes_all_ones() {
        let img = constant_image(5, 5, 77);
        assert_eq!(lbp_code_at(&img, 2, 2, 1.0, 8).unwrap(), 255);
        assert_eq!(lbp_code_at(&img, 2, 2, 1.5, 8).unwrap(), 255);
    }

    #[test]
    fn strict_maximum_center_codes_zero() {
        let mut pixels = vec![0u8; 9];
        pixels[4] = 255;
        let img = GrayImage::new(3, 3, pixels).unwrap();
        assert_eq!(lbp_code_at(&img, 1, 1, 1.0, 8).unwrap(), 0);
    }

    #[test]
    fn gradient_image_code_matches_hand_evaluation() {
        // f(r, c) = 10 + 30r + 10c; bilinear sampling reproduces it exactly.
        // Neighbors at radius 1 around the center (value 50), CCW from +x:
        //   p=0: 60   p=1: 35.86  p=2: 20    p=3: 21.72
        //   p=4: 40   p=5: 64.14  p=6: 80    p=7: 78.28
        // so bits {0, 5, 6, 7} are set.
        let img = GrayImage::new(3, 3, vec![10, 20, 30, 40, 50, 60, 70, 80, 90]).unwrap();
        assert_eq!(lbp_code_at(&img, 1, 1, 1.0, 8).unwrap(), 0b1110_0001);
    }

    #[test]
    fn out_of_bounds_center_is_rejected() {
        let img = constant_image(5, 5, 10);
        assert!(lbp_code_at(&img, 0, 2, 1.0, 8).is_err());
        assert!(lbp_code_at(&img, 2, 2, 2.5, 8).is_err());
    }

    #[test]
    fn uniform_bins_for_known_codes() {
        // 0 and 255 have zero transitions and keep their own bins; the
        // alternating pattern has eight and lands in the shared bin.
        let shared = 8 * 7 + 2;
        assert_ne!(uniform_bin(0, 8), shared);
        assert_ne!(uniform_bin(255, 8), shared);
        assert_eq!(uniform_bin(0b0101_0101, 8), shared);
    }

    #[test]
    fn uniform_mapping_is_total_and_surjective() {
        assert_eq!(uniform_bin_count(8), 59);
        for p in [4, 8] {
            let mut seen = vec![false; uniform_bin_count(p)];
            for code in 0..1u32 << p {
                seen[uniform_bin(code, p)] = true;
            }
            assert!(seen.iter().all(|s| *s), "some bin never hit for P={p}");
        }
    }

    #[test]
    fn constant_image_histogram_concentrates() {
        let config = LbpConfig::new(8, vec![1.0], true, 1, 1).unwrap();
        let img = constant_image(6, 6, 128);
        let f = extract_frame_features(&img, &config).unwrap();
        assert_eq!(f.len(), 59);
        let bin = uniform_bin(255, 8);
        for (i, v) in f.iter().enumerate() {
            if i == bin {
                assert_eq!(*v, 1.0);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn feature_dim_follows_config_only() {
        let config = LbpConfig::new(8, vec![1.0, 2.0, 3.0, 4.0], true, 3, 4).unwrap();
        assert_eq!(config.feature_dim(), 12 * 4 * 59);
        assert_eq!(config.feature_dim(), 2832);
        let mut rng = StdRng::seed_from_u64(1);
        let a = extract_frame_features(&random_image(&mut rng, 60, 80), &config).unwrap();
        let b = extract_frame_features(&random_image(&mut rng, 45, 63), &config).unwrap();
        assert_eq!(a.len(), 2832);
        assert_eq!(b.len(), 2832);
    }

    #[test]
    fn histogram_blocks_are_normalized() {
        let mut rng = StdRng::seed_from_u64(2);
        let config = LbpConfig::new(8, vec![1.0, 2.5], false, 2, 2).unwrap();
        let img = random_image(&mut rng, 60, 80);
        let f = extract_frame_features(&img, &config).unwrap();
        assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
        for block in f.chunks(config.bins()) {
            let sum: f64 = block.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "block sum {sum}");
        }
    }

    #[test]
    fn rotation_preserves_block_mass() {
        let mut rng = StdRng::seed_from_u64(3);
        let config = LbpConfig::new(8, vec![1.0, 2.0], true, 2, 3).unwrap();
        let img = random_image(&mut rng, 30, 42);
        let f = extract_frame_features(&rotate180(&img), &config).unwrap();
        for block in f.chunks(config.bins()) {
            let sum: f64 = block.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn extraction_is_deterministic() {
        let mut rng = StdRng::seed_from_u64(4);
        let config = LbpConfig::new(8, vec![1.0, 2.0], true, 1, 2).unwrap();
        let img = random_image(&mut rng, 24, 24);
        let a = extract_frame_features(&img, &config).unwrap();
        let b = extract_frame_features(&img, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_small_image_names_the_radius() {
        let config = LbpConfig::new(8, vec![1.0, 5.0], true, 2, 2).unwrap();
        let img = constant_image(12, 12, 9);
        let err = extract_frame_features(&img, &config)
            .unwrap_err()
            .to_string();
        assert!(err.contains("radius 5"), "error was: {err}");
    }

    #[test]
    fn sequences_preserve_order_and_reject_mixed_dims() {
        let config = LbpConfig::new(8, vec![1.0], true, 1, 1).unwrap();
        let a = constant_image(8, 8, 3);
        let b = constant_image(8, 8, 200);
        let seq = extract_sequence_features(&[a.clone(), b.clone()], &config).unwrap();
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.frame(0), seq.frame(1));

        assert!(extract_sequence_features(&[], &config).is_err());
        let odd = constant_image(9, 8, 3);
        assert!(extract_sequence_features(&[a, odd], &config).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(LbpConfig::new(3, vec![1.0], true, 1, 1).is_err());
        assert!(LbpConfig::new(8, vec![], true, 1, 1).is_err());
        assert!(LbpConfig::new(8, vec![2.0, 1.0], true, 1, 1).is_err());
        assert!(LbpConfig::new(8, vec![1.0], true, 0, 1).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let mut rng = StdRng::seed_from_u64(5);
        let img = random_image(&mut rng, 13, 17);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.pgm");
        write_pgm(&path, &img).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn pgm_parser_handles_comments_and_rejects_garbage() {
        let img = parse_pgm(b"P5\n# comment\n2 3\n255\n\x01\x02\x03\x04\x05\x06").unwrap();
        assert_eq!((img.rows(), img.cols()), (3, 2));
        assert_eq!(img.pixel(2, 1), 6);
        assert!(parse_pgm(b"P2\n2 2\n255\n....").is_err());
        assert!(parse_pgm(b"P5\n2 2\n65535\n\0\0\0\0\0\0\0\0").is_err());
        assert!(parse_pgm(b"P5\n4 4\n255\n\x01\x02").is_err());
    }

    #[test]
    fn feature_csv_round_trip() {
        let seq =
            FeatureSequence::from_rows(vec![vec![0.125, 1.0 / 3.0], vec![-2.5e-17, 7.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.csv");
        seq.write_csv(&path).unwrap();
        let back = FeatureSequence::read_csv(&path).unwrap();
        assert_eq!(seq.matrix(), back.matrix());
    }
}
