//! Fixed-length glyph descriptors: a 32x32 coverage grid, its one-level Haar
//! transform and per-row / per-column circular autocorrelations.

use std::fmt::Write as _;

use thiserror::Error;

use crate::layout::SymbolImage;
use crate::preprocess::BinaryImage;

pub const GRID: usize = 32;
pub const FEATURE_LEN: usize = 3 * GRID * GRID;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("symbol has no foreground pixels")]
    EmptySymbol,
    #[error("feature dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

/// 32x32 grid of foreground coverage fractions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGlyph {
    cells: Vec<f64>,
}

impl NormalizedGlyph {
    pub fn from_cells(cells: Vec<f64>) -> Self {
        assert_eq!(cells.len(), GRID * GRID);
        Self { cells }
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * GRID + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Area-average resampling weights: for each output cell, the source
/// indices it touches and the overlap length in units of 1/GRID pixel.
fn overlap_weights(src_len: usize) -> Vec<Vec<(usize, u64)>> {
    let n = src_len as u64;
    let g = GRID as u64;
    (0..g)
        .map(|j| {
            let (lo, hi) = (j * n, (j + 1) * n);
            let first = (lo / g) as usize;
            let last = (hi.div_ceil(g) as usize).min(src_len);
            (first..last)
                .filter_map(|x| {
                    let (a, b) = (x as u64 * g, (x as u64 + 1) * g);
                    let ov = b.min(hi).saturating_sub(a.max(lo));
                    (ov > 0).then_some((x, ov))
                })
                .collect()
        })
        .collect()
}

/// Crop to the ink and resample to 32x32 by exact area averaging.
pub fn normalize_raster(raster: &BinaryImage) -> Result<NormalizedGlyph, FeatureError> {
    let (w, h) = (raster.width(), raster.height());
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..h {
        for x in 0..w {
            if raster.get(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x + 1);
                y1 = y1.max(y + 1);
            }
        }
    }
    if x0 == usize::MAX {
        return Err(FeatureError::EmptySymbol);
    }
    let (cw, ch) = (x1 - x0, y1 - y0);
    let wx = overlap_weights(cw);
    let wy = overlap_weights(ch);

    // Column pass: per source row, integer coverage numerators per output column.
    let mut rows = vec![0u64; ch * GRID];
    for y in 0..ch {
        for (j, ws) in wx.iter().enumerate() {
            rows[y * GRID + j] = ws.iter().filter(|(x, _)| raster.get(x0 + x, y0 + y)).map(|(_, o)| o).sum();
        }
    }
    let denom = (cw * ch) as f64;
    let mut cells = vec![0.0; GRID * GRID];
    for (i, ws) in wy.iter().enumerate() {
        for j in 0..GRID {
            let num: u64 = ws.iter().map(|&(y, o)| o * rows[y * GRID + j]).sum();
            cells[i * GRID + j] = num as f64 / denom;
        }
    }
    Ok(NormalizedGlyph { cells })
}

pub fn normalize_32(symbol: &SymbolImage) -> Result<NormalizedGlyph, FeatureError> {
    normalize_raster(&symbol.raster)
}

/// One-level orthonormal 2-D Haar transform laid out as LL, LH, HL, HH,
/// each 16x16 row-major.
pub fn haar_dwt(glyph: &NormalizedGlyph) -> Vec<f64> {
    let half = GRID / 2;
    let band = half * half;
    let mut out = vec![0.0; 4 * band];
    for i in 0..half {
        for j in 0..half {
            let a = glyph.get(2 * i, 2 * j);
            let b = glyph.get(2 * i, 2 * j + 1);
            let c = glyph.get(2 * i + 1, 2 * j);
            let d = glyph.get(2 * i + 1, 2 * j + 1);
            let k = i * half + j;
            out[k] = (a + b + c + d) / 2.0;
            out[band + k] = (a + b - c - d) / 2.0;
            out[2 * band + k] = (a - b + c - d) / 2.0;
            out[3 * band + k] = (a - b - c + d) / 2.0;
        }
    }
    out
}

fn circular_autocorrelation(seq: &[f64; GRID], out: &mut [f64]) {
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = (0..GRID).map(|x| seq[x] * seq[(x + k) % GRID]).sum();
    }
    let r0 = out[0];
    if r0 > 0.0 {
        out.iter_mut().for_each(|v| *v /= r0);
    } else {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Per-row autocorrelations (lags 0..31) followed by per-column ones,
/// each normalised so lag 0 is 1.
pub fn autocorrelation_features(glyph: &NormalizedGlyph) -> Vec<f64> {
    let mut out = vec![0.0; 2 * GRID * GRID];
    let (horizontal, vertical) = out.split_at_mut(GRID * GRID);
    let mut seq = [0.0; GRID];
    for r in 0..GRID {
        seq.copy_from_slice(&glyph.cells[r * GRID..(r + 1) * GRID]);
        circular_autocorrelation(&seq, &mut horizontal[r * GRID..(r + 1) * GRID]);
    }
    for c in 0..GRID {
        for (r, s) in seq.iter_mut().enumerate() {
            *s = glyph.get(r, c);
        }
        circular_autocorrelation(&seq, &mut vertical[c * GRID..(c + 1) * GRID]);
    }
    out
}

pub fn glyph_features(glyph: &NormalizedGlyph) -> FeatureVector {
    let mut v = haar_dwt(glyph);
    v.extend(autocorrelation_features(glyph));
    FeatureVector(v)
}

pub fn raster_features(raster: &BinaryImage) -> Result<FeatureVector, FeatureError> {
    Ok(glyph_features(&normalize_raster(raster)?))
}

pub fn feature_vector(symbol: &SymbolImage) -> Result<FeatureVector, FeatureError> {
    raster_features(&symbol.raster)
}

/// Debug dump: one vector per line, space-separated.
pub fn format_feature_dump(vectors: &[FeatureVector]) -> String {
    let mut s = String::new();
    for v in vectors {
        for (i, x) in v.0.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x}");
        }
        s.push('\n');
    }
    s
}

pub fn parse_feature_dump(text: &str) -> Result<Vec<FeatureVector>, FeatureError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let v: Result<Vec<f64>, _> = l.split_whitespace().map(str::parse).collect();
            let v = v.map_err(|e| FeatureError::Dump {
                line: i + 1,
                message: format!("{e}"),
            })?;
            if v.len() != FEATURE_LEN {
                return Err(FeatureError::Dump {
                    line: i + 1,
                    message: format!("expected {FEATURE_LEN} values, found {}", v.len()),
                });
            }
            Ok(FeatureVector(v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn solid(w: usize, h: usize) -> BinaryImage {
        BinaryImage::from_pixels(w, h, vec![true; w * h]).unwrap()
    }

    /// Upsample every pixel to a 32x32 block, then average 1/32-scaled boxes.
    fn oracle_normalize(raster: &BinaryImage) -> Vec<f64> {
        let (w, h) = (raster.width(), raster.height());
        let (bw, bh) = (w * GRID, h * GRID);
        let mut out = vec![0.0; GRID * GRID];
        for i in 0..GRID {
            for j in 0..GRID {
                let mut count = 0usize;
                for yy in i * h * GRID / GRID..(i + 1) * h * GRID / GRID {
                    for xx in j * w..(j + 1) * w {
                        if raster.get(xx / GRID, yy / GRID) {
                            count += 1;
                        }
                    }
                }
                out[i * GRID + j] = count as f64 / ((bw / GRID) * (bh / GRID)) as f64;
            }
        }
        out
    }

    fn random_raster(w: usize, h: usize, bits: &[bool]) -> BinaryImage {
        let mut img = BinaryImage::from_pixels(w, h, bits[..w * h].to_vec()).unwrap();
        // pin the tight box to the full raster
        img.set(0, 0, true);
        img.set(w - 1, h - 1, true);
        img
    }

    #[test]
    fn solid_blocks_normalise_to_ones() {
        for (w, h) in [(32, 32), (64, 64), (5, 70)] {
            let g = normalize_raster(&solid(w, h)).unwrap();
            assert!(g.cells().iter().all(|&v| (v - 1.0).abs() < 1e-12), "{w}x{h}");
        }
    }

    #[test]
    fn empty_raster_is_rejected() {
        assert_eq!(normalize_raster(&BinaryImage::new(4, 4)), Err(FeatureError::EmptySymbol));
    }

    #[test]
    fn margins_do_not_matter() {
        let mut a = BinaryImage::new(10, 10);
        let mut b = BinaryImage::new(30, 25);
        for (x, y) in [(1, 1), (2, 3), (5, 4), (3, 8)] {
            a.set(x, y, true);
            b.set(x + 11, y + 7, true);
        }
        assert_eq!(raster_features(&a).unwrap(), raster_features(&b).unwrap());
    }

    #[test]
    fn constant_grid_haar() {
        let g = NormalizedGlyph::from_cells(vec![0.25; GRID * GRID]);
        let c = haar_dwt(&g);
        assert!(c[..256].iter().all(|&v| (v - 0.5).abs() < 1e-15));
        assert!(c[256..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_block_haar_formulas() {
        let mut cells = vec![0.0; GRID * GRID];
        let (a, b, c, d) = (0.9, 0.2, 0.5, 0.1);
        cells[0] = a;
        cells[1] = b;
        cells[GRID] = c;
        cells[GRID + 1] = d;
        let t = haar_dwt(&NormalizedGlyph::from_cells(cells));
        assert!((t[0] - (a + b + c + d) / 2.0).abs() < 1e-15);
        assert!((t[256] - (a + b - c - d) / 2.0).abs() < 1e-15);
        assert!((t[512] - (a - b + c - d) / 2.0).abs() < 1e-15);
        assert!((t[768] - (a - b - c + d) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_glyph_has_zero_autocorrelation() {
        let g = NormalizedGlyph::from_cells(vec![0.0; GRID * GRID]);
        assert!(autocorrelation_features(&g).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dump_round_trip() {
        let v = raster_features(&solid(3, 7)).unwrap();
        let back = parse_feature_dump(&format_feature_dump(&[v.clone(), v.clone()])).unwrap();
        assert_eq!(back, vec![v.clone(), v]);
        assert!(parse_feature_dump("1 2 3").is_err());
    }

    proptest! {
        #[test]
        fn area_average_matches_oracle(w in 1usize..50, h in 1usize..50, bits in proptest::collection::vec(any::<bool>(), 2500)) {
            let r = random_raster(w, h, &bits);
            let g = normalize_raster(&r).unwrap();
            for (got, want) in g.cells().iter().zip(oracle_normalize(&r)) {
                prop_assert!((got - want).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(got));
            }
        }

        #[test]
        fn haar_preserves_energy(cells in proptest::collection::vec(0.0f64..=1.0, GRID * GRID)) {
            let g = NormalizedGlyph::from_cells(cells);
            let e0: f64 = g.cells().iter().map(|v| v * v).sum();
            let e1: f64 = haar_dwt(&g).iter().map(|v| v * v).sum();
            prop_assert!((e0 - e1).abs() <= 1e-9 * e0.max(1e-300));
        }

        #[test]
        fn autocorrelation_matches_direct_products(cells in proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..=1.0], GRID * GRID)) {
            let g = NormalizedGlyph::from_cells(cells);
            let got = autocorrelation_features(&g);
            for r in 0..GRID {
                let row: Vec<f64> = (0..GRID).map(|c| g.get(r, c)).collect();
                let r0: f64 = row.iter().map(|v| v * v).sum();
                for k in 0..GRID {
                    let mut s = 0.0;
                    for x in 0..GRID {
                        s += row[x] * row[(x + k) % GRID];
                    }
                    let want = if r0 > 0.0 { s / r0 } else { 0.0 };
                    prop_assert!((got[r * GRID + k] - want).abs() < 1e-12);
                }
                if r0 > 0.0 {
                    prop_assert_eq!(got[r * GRID], 1.0);
                }
            }
            for c in 0..GRID {
                let col: Vec<f64> = (0..GRID).map(|r| g.get(r, c)).collect();
                let c0: f64 = col.iter().map(|v| v * v).sum();
                for k in 0..GRID {
                    let s: f64 = (0..GRID).map(|y| col[y] * col[(y + k) % GRID]).sum();
                    let want = if c0 > 0.0 { s / c0 } else { 0.0 };
                    prop_assert!((got[1024 + c * GRID + k] - want).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn feature_layout(w in 1usize..40, h in 1usize..40, bits in proptest::collection::vec(any::<bool>(), 1600)) {
            let r = random_raster(w, h, &bits);
            let v = raster_features(&r).unwrap();
            prop_assert_eq!(v.0.len(), FEATURE_LEN);
            prop_assert!(v.0.iter().all(|x| x.is_finite()));
            let g = normalize_raster(&r).unwrap();
            prop_assert_eq!(&v.0[..1024], &haar_dwt(&g)[..]);
            prop_assert_eq!(v, raster_features(&r).unwrap());
        }
    }
}
