//! Glyph atlases and synthetic page composition.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use super::glyphs::{render, DesignBook, GlyphStyle, RenderedGlyph, OTTU_GAP};
use crate::features::{raster_features, FeatureError, FeatureVector};
use crate::layout::{connected_components, remove_specks, Zone};
use crate::preprocess::{decode_pgm, encode_pgm, rotate, BinaryImage, GrayImage, PreprocessError};
use crate::script::{unicode_to_symbols, LabelId, Role, ScriptError, SymbolRegistry};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no glyph for symbol `{name}` (label {label})")]
    MissingGlyph { label: LabelId, name: String },
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Image(#[from] PreprocessError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("atlas index line {line}: {message}")]
    Index { line: usize, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// How atlas variants are drawn.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AtlasParams {
    pub variants: usize,
    pub seed: u64,
    pub stroke: f64,
    pub stroke_jitter: f64,
    pub scale_jitter: f64,
    pub wobble: f64,
    /// Make variant 0 of every label the undistorted design.
    pub canonical_first: bool,
}

impl Default for AtlasParams {
    fn default() -> Self {
        Self {
            variants: 6,
            seed: 1,
            stroke: 4.0,
            stroke_jitter: 0.4,
            scale_jitter: 0.04,
            wobble: 0.8,
            canonical_first: true,
        }
    }
}

/// Labelled glyph images, several variants per label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlyphAtlas {
    glyphs: BTreeMap<LabelId, Vec<RenderedGlyph>>,
}

const INDEX_FILE: &str = "atlas.tsv";

impl GlyphAtlas {
    pub fn new() -> Self {
        Self::default()
    }

    /// Draw `params.variants` glyphs for every recognition unit. Variant 0
    /// is the undistorted design.
    pub fn generate(registry: &SymbolRegistry, params: &AtlasParams) -> Self {
        let book = DesignBook::new(registry);
        let mut rng = StdRng::seed_from_u64(params.seed);
        let mut atlas = Self::new();
        for id in book.labels() {
            let design = book.get(id).expect("listed label");
            for v in 0..params.variants.max(1) {
                let style = if v == 0 && params.canonical_first {
                    GlyphStyle {
                        stroke: params.stroke,
                        ..Default::default()
                    }
                } else {
                    GlyphStyle {
                        scale: 1.0 + rng.gen_range(-1.0..=1.0) * params.scale_jitter,
                        stroke: params.stroke + rng.gen_range(-1.0..=1.0) * params.stroke_jitter,
                        wobble: params.wobble,
                        seed: rng.gen(),
                    }
                };
                atlas.insert(id, render(design, &style));
            }
        }
        atlas
    }

    pub fn insert(&mut self, label: LabelId, glyph: RenderedGlyph) {
        self.glyphs.entry(label).or_default().push(glyph);
    }

    pub fn get(&self, label: LabelId) -> Option<&[RenderedGlyph]> {
        self.glyphs.get(&label).map(Vec::as_slice).filter(|g| !g.is_empty())
    }

    pub fn labels(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.glyphs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.glyphs.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write one subdirectory per label id holding PGM glyphs, plus an
    /// `atlas.tsv` index of `label, file, baseline_row`.
    pub fn save(&self, dir: &Path) -> Result<(), SynthError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut index = String::from("label\tfile\tbaseline_row\n");
        for (label, glyphs) in &self.glyphs {
            let sub = dir.join(label.to_string());
            std::fs::create_dir_all(&sub).map_err(io_err(&sub))?;
            for (n, g) in glyphs.iter().enumerate() {
                let rel = format!("{label}/{n}.pgm");
                let path = dir.join(&rel);
                std::fs::write(&path, encode_pgm(&g.image.to_gray())).map_err(io_err(&path))?;
                let _ = writeln!(index, "{label}\t{rel}\t{}", g.baseline_row);
            }
        }
        let path = dir.join(INDEX_FILE);
        std::fs::write(&path, index).map_err(io_err(&path))
    }

    /// Read an atlas written by [`save`](Self::save). Glyph images are
    /// thresholded at mid-grey.
    pub fn load(dir: &Path) -> Result<Self, SynthError> {
        let path = dir.join(INDEX_FILE);
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        let mut atlas = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || (i == 0 && line.starts_with("label\t")) {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let bad = |m: &str| SynthError::Index {
                line: line_no,
                message: m.to_string(),
            };
            if f.len() != 3 {
                return Err(bad("expected 3 tab-separated fields"));
            }
            let label: LabelId = f[0].parse().map_err(|_| bad("bad label id"))?;
            let baseline_row: i32 = f[2].parse().map_err(|_| bad("bad baseline row"))?;
            let glyph_path: PathBuf = dir.join(f[1]);
            let bytes = std::fs::read(&glyph_path).map_err(io_err(&glyph_path))?;
            let image = decode_pgm(&bytes)?.threshold(128);
            atlas.insert(label, RenderedGlyph { image, baseline_row });
        }
        Ok(atlas)
    }
}

/// Salt-and-pepper noise: each pixel, with probability `p`, is replaced by
/// black or white with equal odds.
pub fn salt_and_pepper(image: &mut GrayImage, p: f64, rng: &mut StdRng) {
    if p <= 0.0 {
        return;
    }
    for v in image.pixels_mut() {
        if rng.gen_bool(p.min(1.0)) {
            *v = if rng.gen_bool(0.5) { 0 } else { 255 };
        }
    }
}

/// Layout and distortion settings for a synthetic page.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct PageParams {
    pub width: usize,
    pub margin: usize,
    pub glyph_gap: usize,
    pub word_gap: usize,
    pub line_pitch: usize,
    /// Print vowel parts as separate glyphs after the ottus.
    pub letterpress: bool,
    pub rotation_degrees: f64,
    /// Italic slant, degrees; positive leans right.
    pub shear_degrees: f64,
    pub seed: u64,
}

impl Default for PageParams {
    fn default() -> Self {
        Self {
            width: 1200,
            margin: 40,
            glyph_gap: 4,
            word_gap: 20,
            line_pitch: 112,
            letterpress: false,
            rotation_degrees: 0.0,
            shear_degrees: 0.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    pub salt_pepper: f64,
}

/// A composed page with its exact ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticPage {
    pub image: GrayImage,
    /// Lines separated by `\n`, words by single spaces, NFC.
    pub truth: String,
    pub zones: Vec<Zone>,
}

struct Placed<'a> {
    glyph: &'a RenderedGlyph,
    left: i32,
    top: i32,
}

/// Replace each composite unit by its base and separate part, the part
/// following any ottus of the same akshara.
fn letterpress_split(registry: &SymbolRegistry, symbols: &[LabelId]) -> Vec<LabelId> {
    let split: HashMap<LabelId, (LabelId, LabelId)> = registry.combinations().map(|((b, p), u)| (u, (b, p))).collect();
    let is_ottu = |id: LabelId| matches!(registry.role(id), Role::Ottu | Role::OttuComplex);
    let mut out = Vec::with_capacity(symbols.len() + 4);
    let mut i = 0;
    while i < symbols.len() {
        let s = symbols[i];
        i += 1;
        match split.get(&s) {
            Some(&(base, part)) => {
                out.push(base);
                while i < symbols.len() && is_ottu(symbols[i]) {
                    out.push(symbols[i]);
                    i += 1;
                }
                out.push(part);
            }
            None => out.push(s),
        }
    }
    out
}

/// Lay out one word with its left edge at 0 and the baseline at row 0.
fn layout_word<'a>(
    atlas: &'a GlyphAtlas,
    registry: &SymbolRegistry,
    symbols: &[LabelId],
    gap: i32,
    rng: &mut StdRng,
) -> Result<(Vec<Placed<'a>>, i32), SynthError> {
    let mut placed: Vec<Placed> = Vec::with_capacity(symbols.len());
    let mut cursor = 0i32;
    // Horizontal span of the last base glyph and the bottom of its ottu stack.
    let mut anchor: Option<(i32, i32, i32)> = None;
    for &s in symbols {
        let variants = atlas.get(s).ok_or_else(|| SynthError::MissingGlyph {
            label: s,
            name: registry.get(s).map(|l| l.name.clone()).unwrap_or_default(),
        })?;
        let glyph = &variants[rng.gen_range(0..variants.len())];
        let (w, h) = (glyph.image.width() as i32, glyph.image.height() as i32);
        let ottu = matches!(registry.role(s), Role::Ottu | Role::OttuComplex);
        match anchor {
            Some((l, r, stack_bottom)) if ottu => {
                let top = if stack_bottom <= 0 { -glyph.baseline_row } else { stack_bottom + OTTU_GAP + 1 };
                let left = (l + r) / 2 - w / 2;
                placed.push(Placed { glyph, left, top });
                anchor = Some((l, r, top + h - 1));
            }
            _ => {
                let top = -glyph.baseline_row;
                placed.push(Placed { glyph, left: cursor, top });
                anchor = Some((cursor, cursor + w, 0));
                cursor += w + gap;
            }
        }
    }
    Ok((placed, (cursor - gap).max(0)))
}

/// Render `text` from atlas glyphs.
///
/// Words are wrapped greedily to the page width. The returned truth is the
/// NFC text as laid out; the zone list holds one text block covering the
/// page.
pub fn compose_synthetic_page(
    atlas: &GlyphAtlas,
    registry: &SymbolRegistry,
    text: &str,
    page: &PageParams,
    noise: &NoiseParams,
) -> Result<SyntheticPage, SynthError> {
    if page.line_pitch == 0 || page.width <= 2 * page.margin {
        return Err(SynthError::InvalidParams("page narrower than its margins".into()));
    }
    if !(0.0..=1.0).contains(&noise.salt_pepper) {
        return Err(SynthError::InvalidParams("noise probability outside [0, 1]".into()));
    }
    let mut rng = StdRng::seed_from_u64(page.seed);
    let text: String = text.nfc().collect();
    let usable = (page.width - 2 * page.margin) as i32;

    // (placed glyphs with word offsets, words) per line
    let mut lines: Vec<(Vec<Placed>, Vec<String>)> = Vec::new();
    let mut cur: (Vec<Placed>, Vec<String>) = (Vec::new(), Vec::new());
    let mut x = 0i32;
    for word in text.split_whitespace() {
        let mut symbols = unicode_to_symbols(registry, word)?;
        if page.letterpress {
            symbols = letterpress_split(registry, &symbols);
        }
        let (glyphs, width) = layout_word(atlas, registry, &symbols, page.glyph_gap as i32, &mut rng)?;
        if !cur.1.is_empty() && x + page.word_gap as i32 + width > usable {
            lines.push(std::mem::take(&mut cur));
            x = 0;
        }
        if !cur.1.is_empty() {
            x += page.word_gap as i32;
        }
        cur.0.extend(glyphs.into_iter().map(|p| Placed { left: p.left + x, ..p }));
        cur.1.push(word.to_string());
        x += width;
    }
    if !cur.1.is_empty() {
        lines.push(cur);
    }

    let tan = page.shear_degrees.to_radians().tan();
    let slant = ((page.line_pitch as f64) * tan.abs()).ceil() as usize;
    let width = page.width + slant;
    let height = 2 * page.margin + lines.len().max(1) * page.line_pitch;
    let mut image = GrayImage::filled(width, height, 255);
    let first_baseline = page.margin as i32 + 40;
    for (li, (glyphs, _)) in lines.iter().enumerate() {
        let baseline = first_baseline + (li * page.line_pitch) as i32;
        let x0 = page.margin as i32 + if tan < 0.0 { slant as i32 } else { 0 };
        for p in glyphs {
            let img = &p.glyph.image;
            for gy in 0..img.height() {
                for gx in 0..img.width() {
                    if !img.get(gx, gy) {
                        continue;
                    }
                    let y = baseline + p.top + gy as i32;
                    let shift = ((baseline - y) as f64 * tan).round() as i32;
                    let x = x0 + p.left + gx as i32 + shift;
                    if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                        image.set(x as usize, y as usize, 0);
                    }
                }
            }
        }
    }
    let mut image = rotate(&image, page.rotation_degrees);
    salt_and_pepper(&mut image, noise.salt_pepper, &mut rng);
    let truth = lines.iter().map(|(_, w)| w.join(" ")).collect::<Vec<_>>().join("\n");
    let zones = vec![Zone::whole_page(image.width(), image.height())];
    Ok(SyntheticPage { image, truth, zones })
}

/// Noise augmentation applied to atlas glyphs when building training data.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AugmentParams {
    /// Noisy copies added per glyph.
    pub noisy_copies: usize,
    pub salt_pepper: f64,
    /// Components smaller than this are dropped, as on a page.
    pub min_component_area: usize,
    pub seed: u64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            noisy_copies: 1,
            salt_pepper: 0.02,
            min_component_area: 4,
            seed: 7,
        }
    }
}

/// Labelled feature vectors for the base and ottu classifiers.
#[derive(Debug, Clone, Default)]
pub struct TrainingSets {
    pub base: Vec<(FeatureVector, LabelId)>,
    pub ottu: Vec<(FeatureVector, LabelId)>,
}

fn noisy_copy(glyph: &BinaryImage, aug: &AugmentParams, rng: &mut StdRng) -> BinaryImage {
    const PAD: usize = 2;
    let (w, h) = (glyph.width() + 2 * PAD, glyph.height() + 2 * PAD);
    let mut img = BinaryImage::new(w, h);
    for y in 0..glyph.height() {
        for x in 0..glyph.width() {
            if glyph.get(x, y) {
                img.set(x + PAD, y + PAD, true);
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            // Only the half of the noise that flips the pixel matters.
            if rng.gen_bool((aug.salt_pepper / 2.0).min(1.0)) {
                img.set(x, y, !img.get(x, y));
            }
        }
    }
    let kept = remove_specks(connected_components(&img), aug.min_component_area);
    let mut out = BinaryImage::new(w, h);
    for c in kept {
        for (x, y) in c.pixels {
            out.set(x as usize, y as usize, true);
        }
    }
    out
}

/// Feature vectors for every atlas glyph plus noisy copies, split between
/// the base and ottu models.
pub fn training_sets(atlas: &GlyphAtlas, registry: &SymbolRegistry, aug: &AugmentParams) -> Result<TrainingSets, SynthError> {
    let mut rng = StdRng::seed_from_u64(aug.seed);
    let mut sets = TrainingSets::default();
    for label in atlas.labels() {
        let Some(info) = registry.get(label) else {
            return Err(SynthError::MissingGlyph { label, name: String::new() });
        };
        let target = if matches!(info.role, Role::Ottu | Role::OttuComplex) {
            &mut sets.ottu
        } else {
            &mut sets.base
        };
        for g in atlas.get(label).unwrap_or_default() {
            target.push((raster_features(&g.image)?, label));
            for _ in 0..aug.noisy_copies {
                let noisy = noisy_copy(&g.image, aug, &mut rng);
                if let Ok(f) = raster_features(&noisy) {
                    target.push((f, label));
                }
            }
        }
    }
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_atlas(reg: &SymbolRegistry) -> GlyphAtlas {
        GlyphAtlas::generate(reg, &AtlasParams { variants: 1, ..Default::default() })
    }

    #[test]
    fn atlas_round_trips_through_disk() {
        let reg = SymbolRegistry::builtin();
        let atlas = small_atlas(&reg);
        let dir = tempfile::tempdir().unwrap();
        atlas.save(dir.path()).unwrap();
        let back = GlyphAtlas::load(dir.path()).unwrap();
        assert_eq!(back, atlas);
    }

    #[test]
    fn letterpress_moves_parts_after_ottus() {
        let reg = SymbolRegistry::builtin();
        let syms = unicode_to_symbols(&reg, "ಕ್ಕಾ").unwrap();
        let lp = letterpress_split(&reg, &syms);
        let names: Vec<&str> = lp.iter().map(|&i| reg.label(i).name.as_str()).collect();
        assert_eq!(names, ["ka", "k_ottu", "aa_part"]);
    }

    #[test]
    fn missing_glyph() {
        let reg = SymbolRegistry::builtin();
        let mut atlas = GlyphAtlas::new();
        let ka = reg.id("ka").unwrap();
        atlas.insert(ka, small_atlas(&reg).get(ka).unwrap()[0].clone());
        let page = compose_synthetic_page(&atlas, &reg, "ಕ", &PageParams::default(), &NoiseParams::default()).unwrap();
        assert_eq!(page.truth, "ಕ");
        let err = compose_synthetic_page(&atlas, &reg, "ಕಾ", &PageParams::default(), &NoiseParams::default()).unwrap_err();
        assert!(matches!(err, SynthError::MissingGlyph { ref name, .. } if name == "kaa"));
    }

    #[test]
    fn ottus_are_drawn_below_the_baseline() {
        let reg = SymbolRegistry::builtin();
        let atlas = small_atlas(&reg);
        let page = compose_synthetic_page(&atlas, &reg, "ಕ್ಕ", &PageParams::default(), &NoiseParams::default()).unwrap();
        let baseline = PageParams::default().margin + 40;
        let ink_rows: Vec<usize> = (0..page.image.height())
            .filter(|&y| (0..page.image.width()).any(|x| page.image.get(x, y) == 0))
            .collect();
        assert!(ink_rows.contains(&baseline));
        for gap in 1..=OTTU_GAP as usize {
            assert!(!ink_rows.contains(&(baseline + gap)));
        }
        assert!(ink_rows.contains(&(baseline + OTTU_GAP as usize + 1)));
    }

    #[test]
    fn wraps_lines() {
        let reg = SymbolRegistry::builtin();
        let atlas = small_atlas(&reg);
        let text = "ಕನ್ನಡ ".repeat(30);
        let page = compose_synthetic_page(&atlas, &reg, &text, &PageParams::default(), &NoiseParams::default()).unwrap();
        assert!(page.truth.lines().count() > 1);
        assert_eq!(page.truth.split_whitespace().count(), 30);
    }
}
