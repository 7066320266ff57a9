//! Procedural stroke glyphs for every recognition unit.
//!
//! Shapes are drawn in a design space where the letter body spans
//! `0 <= y < 32` and the baseline is the last body row. Vowel signs,
//! ottus and marks follow the script's placement: signs attach to the
//! consonant body, ottus are smaller copies of the body hung below the
//! baseline, and marks stand to the right.

use std::collections::HashMap;

use crate::preprocess::BinaryImage;
use crate::script::{LabelId, Role, SymbolRegistry, Vowel};

/// Body height in design units.
pub const BODY: f64 = 32.0;
const OTTU_SCALE: f64 = 0.6;
const OTTU_STROKE: f64 = 0.7;
/// Blank rows between the baseline and an ottu.
pub const OTTU_GAP: i32 = 3;

#[derive(Debug, Clone, Copy)]
enum Prim {
    Seg(f64, f64, f64, f64),
    Ring(f64, f64, f64),
    Disc(f64, f64, f64),
    /// Filled box `[x0, x1) x [y0, y1)`, drawn without stroke.
    Rect(f64, f64, f64, f64),
}

impl Prim {
    fn scaled(self, k: f64) -> Prim {
        match self {
            Prim::Seg(a, b, c, d) => Prim::Seg(a * k, b * k, c * k, d * k),
            Prim::Ring(x, y, r) => Prim::Ring(x * k, y * k, r * k),
            Prim::Disc(x, y, r) => Prim::Disc(x * k, y * k, r * k),
            Prim::Rect(a, b, c, d) => Prim::Rect(a * k, b * k, c * k, d * k),
        }
    }
}

/// Vector description of one glyph.
#[derive(Debug, Clone)]
pub struct Design {
    prims: Vec<Prim>,
    ottu: bool,
}

/// Rendering parameters for one glyph variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlyphStyle {
    pub scale: f64,
    /// Stroke width in pixels.
    pub stroke: f64,
    /// Largest displacement of stroke end points, design units.
    pub wobble: f64,
    pub seed: u64,
}

impl Default for GlyphStyle {
    fn default() -> Self {
        Self {
            scale: 1.0,
            stroke: 4.0,
            wobble: 0.0,
            seed: 0,
        }
    }
}

fn path(points: &[(f64, f64)]) -> Vec<Prim> {
    points.windows(2).map(|p| Prim::Seg(p[0].0, p[0].1, p[1].0, p[1].1)).collect()
}

fn seg(x0: f64, y0: f64, x1: f64, y1: f64) -> Prim {
    Prim::Seg(x0, y0, x1, y1)
}

/// Consonant body: frame variant `k % 3` and interior pattern `k / 3`.
fn body(k: usize) -> Vec<Prim> {
    let mut p = vec![seg(2.0, 2.0, 22.0, 2.0), seg(2.0, 30.0, 22.0, 30.0)];
    match k % 3 {
        0 => p.extend([seg(2.0, 2.0, 2.0, 30.0), seg(22.0, 2.0, 22.0, 30.0)]),
        1 => p.push(seg(2.0, 2.0, 2.0, 30.0)),
        _ => p.push(seg(22.0, 2.0, 22.0, 30.0)),
    }
    match k / 3 {
        0 => {}
        1 => p.push(seg(2.0, 16.0, 22.0, 16.0)),
        2 => p.push(seg(12.0, 2.0, 12.0, 30.0)),
        3 => p.push(seg(2.0, 2.0, 22.0, 30.0)),
        4 => p.push(seg(22.0, 2.0, 2.0, 30.0)),
        5 => p.extend([seg(2.0, 2.0, 22.0, 30.0), seg(22.0, 2.0, 2.0, 30.0)]),
        6 => p.extend([seg(2.0, 16.0, 22.0, 16.0), seg(12.0, 2.0, 12.0, 16.0)]),
        7 => p.extend([Prim::Ring(12.0, 16.0, 5.0), seg(12.0, 2.0, 12.0, 11.0)]),
        8 => p.extend([seg(2.0, 11.0, 22.0, 11.0), seg(2.0, 21.0, 22.0, 21.0)]),
        9 => p.extend([seg(2.0, 16.0, 22.0, 16.0), seg(12.0, 16.0, 12.0, 30.0)]),
        10 => p.extend([Prim::Disc(12.0, 16.0, 4.0), seg(12.0, 2.0, 12.0, 12.0)]),
        _ => p.extend(path(&[(2.0, 30.0), (12.0, 14.0), (22.0, 30.0)])),
    }
    p
}

fn vowel_sign(v: Vowel) -> Vec<Prim> {
    // Every attachment starts on the top or bottom bar, which all frames share.
    let u_hook = path(&[(22.0, 30.0), (30.0, 30.0), (30.0, 14.0), (26.0, 10.0)]);
    let e_flag = vec![seg(12.0, 2.0, 20.0, -6.0)];
    match v {
        Vowel::A => vec![seg(12.0, 2.0, 12.0, -6.0)],
        Vowel::Aa => path(&[(22.0, 2.0), (30.0, 2.0), (30.0, 14.0)]),
        Vowel::I => path(&[(2.0, 2.0), (-4.0, -4.0), (4.0, -7.0)]),
        Vowel::U => u_hook,
        Vowel::Uu => {
            let mut p = u_hook;
            p.extend(path(&[(30.0, 22.0), (37.0, 22.0), (37.0, 30.0)]));
            p
        }
        Vowel::E => e_flag,
        Vowel::O => {
            let mut p = e_flag;
            p.extend(u_hook);
            p
        }
        // Remaining vowels are written with separate marks.
        _ => Vec::new(),
    }
}

fn halant() -> Vec<Prim> {
    let mut p = vec![seg(12.0, 2.0, 12.0, -6.0)];
    p.extend(path(&[(22.0, 30.0), (30.0, 22.0), (34.0, 26.0)]));
    p
}

/// Independent vowel: round body with two ears and an inner pattern.
fn independent_vowel(j: usize) -> Vec<Prim> {
    let mut p = vec![Prim::Ring(12.0, 16.0, 14.0), seg(5.0, 4.0, 1.0, -5.0), seg(19.0, 4.0, 23.0, -5.0)];
    let h = seg(2.0, 16.0, 22.0, 16.0);
    let v = seg(12.0, 4.0, 12.0, 28.0);
    match j {
        0 => {}
        1 => p.push(h),
        2 => p.push(v),
        3 => p.push(seg(4.0, 8.0, 20.0, 24.0)),
        4 => p.push(seg(20.0, 8.0, 4.0, 24.0)),
        5 => p.extend([seg(4.0, 8.0, 20.0, 24.0), seg(20.0, 8.0, 4.0, 24.0)]),
        6 => p.extend([h, v]),
        7 => p.push(Prim::Ring(12.0, 16.0, 5.0)),
        8 => p.extend([seg(4.0, 11.0, 20.0, 11.0), seg(4.0, 21.0, 20.0, 21.0)]),
        9 => p.push(Prim::Disc(12.0, 16.0, 4.0)),
        10 => p.extend(path(&[(4.0, 24.0), (12.0, 10.0), (20.0, 24.0)])),
        11 => p.push(seg(12.0, 16.0, 28.0, 16.0)),
        _ => p.push(seg(-4.0, 16.0, 12.0, 16.0)),
    }
    p
}

fn kannada_digit(n: usize) -> Vec<Prim> {
    let mut p = path(&[(12.0, 0.0), (24.0, 16.0), (12.0, 32.0), (0.0, 16.0), (12.0, 0.0)]);
    let v = seg(12.0, 6.0, 12.0, 26.0);
    let h = seg(6.0, 16.0, 18.0, 16.0);
    match n {
        1 => p.push(v),
        2 => p.push(h),
        3 => p.push(Prim::Ring(12.0, 16.0, 4.0)),
        4 => p.push(Prim::Disc(12.0, 16.0, 3.5)),
        5 => p.extend([v, h]),
        6 => p.push(seg(8.0, 12.0, 16.0, 20.0)),
        7 => p.push(seg(16.0, 12.0, 8.0, 20.0)),
        _ => p.push(seg(12.0, 0.0, 12.0, -7.0)),
    }
    p
}

fn arabic_digit(n: usize) -> Vec<Prim> {
    let segs = [
        seg(2.0, 2.0, 14.0, 2.0),
        seg(14.0, 2.0, 14.0, 16.0),
        seg(14.0, 16.0, 14.0, 30.0),
        seg(2.0, 30.0, 14.0, 30.0),
        seg(2.0, 16.0, 2.0, 30.0),
        seg(2.0, 2.0, 2.0, 16.0),
        seg(2.0, 16.0, 14.0, 16.0),
    ];
    let on: &str = match n {
        0 => "abcdef",
        1 => "bc",
        2 => "abged",
        3 => "abgcd",
        4 => "fgbc",
        5 => "afgcd",
        6 => "afgedc",
        7 => "abc",
        8 => "abcdefg",
        _ => "abcdfg",
    };
    let mut p: Vec<Prim> = on.bytes().map(|c| segs[(c - b'a') as usize]).collect();
    match n {
        0 => p.push(seg(14.0, 2.0, 2.0, 30.0)),
        1 => p.extend([seg(14.0, 2.0, 8.0, 8.0), seg(8.0, 30.0, 20.0, 30.0)]),
        _ => {}
    }
    p
}

fn named(name: &str) -> Option<Vec<Prim>> {
    use Prim::{Disc, Rect, Ring};
    let p = match name {
        "aa_part" => path(&[(0.0, 2.0), (8.0, 2.0), (8.0, 16.0), (3.0, 20.0)]),
        "u_part" => path(&[(0.0, 30.0), (8.0, 30.0), (8.0, 14.0), (4.0, 10.0)]),
        "uu_part" => {
            let mut p = path(&[(0.0, 30.0), (8.0, 30.0), (8.0, 14.0), (4.0, 10.0)]);
            p.extend(path(&[(8.0, 22.0), (15.0, 22.0), (15.0, 30.0)]));
            p
        }
        "halant_part" => path(&[(0.0, 30.0), (12.0, 16.0), (16.0, 20.0)]),
        "dheergha" => path(&[(0.0, 6.0), (6.0, 0.0), (6.0, 30.0), (12.0, 24.0)]),
        "ai_mark" => vec![seg(6.0, 0.0, 6.0, 30.0), seg(6.0, 8.0, 0.0, 8.0), seg(6.0, 16.0, 0.0, 16.0)],
        "ru_mark" => vec![seg(6.0, 0.0, 6.0, 22.0), Ring(6.0, 26.0, 5.0)],
        "au_mark" => {
            let mut p = vec![Ring(6.0, 6.0, 5.0)];
            p.extend(path(&[(6.0, 11.0), (6.0, 30.0), (12.0, 24.0)]));
            p
        }
        "anusvara_or_zero" => vec![Ring(8.0, 16.0, 6.0)],
        "nine_or_arkaa" => {
            let mut p = vec![Ring(8.0, 10.0, 6.0)];
            p.extend(path(&[(14.0, 10.0), (14.0, 26.0), (8.0, 30.0)]));
            p
        }
        "visarga" => vec![Ring(6.0, 8.0, 3.5), Ring(6.0, 24.0, 3.5)],
        "colon" => vec![Rect(2.0, 6.0, 8.0, 12.0), Rect(2.0, 20.0, 8.0, 26.0)],
        "avagraha" => path(&[(14.0, 2.0), (2.0, 10.0), (14.0, 20.0), (2.0, 30.0)]),
        "danda" => vec![seg(4.0, -2.0, 4.0, 30.0), seg(4.0, -2.0, -1.0, 2.0)],
        "double_danda" => vec![seg(3.0, -2.0, 3.0, 30.0), seg(12.0, -2.0, 12.0, 30.0), seg(3.0, -2.0, 12.0, -2.0)],
        "question" => {
            let mut p = path(&[(2.0, 8.0), (8.0, 2.0), (14.0, 8.0), (8.0, 16.0), (8.0, 22.0)]);
            p.push(Disc(8.0, 29.0, 2.5));
            p
        }
        "lparen" => path(&[(10.0, -4.0), (4.0, 6.0), (4.0, 26.0), (10.0, 36.0)]),
        "rparen" => path(&[(2.0, -4.0), (8.0, 6.0), (8.0, 26.0), (2.0, 36.0)]),
        "lbracket" => path(&[(10.0, -4.0), (3.0, -4.0), (3.0, 36.0), (10.0, 36.0)]),
        "rbracket" => path(&[(2.0, -4.0), (9.0, -4.0), (9.0, 36.0), (2.0, 36.0)]),
        "semicolon" => vec![Rect(2.0, 6.0, 8.0, 12.0), Rect(2.0, 24.0, 8.0, 30.0), seg(7.0, 29.0, 4.0, 35.0)],
        "exclamation" => vec![seg(5.0, -2.0, 5.0, 20.0), Rect(2.0, 26.0, 8.0, 32.0)],
        "slash" => vec![seg(14.0, -4.0, 2.0, 36.0)],
        "period" => vec![Disc(2.5, 29.5, 2.6)],
        "comma" => vec![Rect(0.0, 27.0, 5.0, 32.0), seg(3.5, 31.0, 1.5, 37.0)],
        "lquote" => vec![Rect(0.0, 5.0, 8.0, 10.0), Rect(0.0, 0.0, 2.0, 5.0), Rect(6.0, 0.0, 8.0, 5.0)],
        "rquote" => vec![Rect(0.0, 0.0, 8.0, 5.0), Rect(0.0, 5.0, 2.0, 10.0), Rect(6.0, 5.0, 8.0, 10.0)],
        "apostrophe" => vec![Rect(0.0, 0.0, 3.0, 7.0), Rect(1.0, 7.0, 3.0, 10.0)],
        "hyphen" => vec![seg(2.0, 16.0, 12.0, 16.0)],
        _ => return None,
    };
    Some(p)
}

/// Extra stroke distinguishing each ottu complex from the plain ottu.
fn flourish(j: usize) -> Vec<Prim> {
    let ra = path(&[(22.0, 30.0), (32.0, 24.0), (32.0, 8.0)]);
    let mut p = match j {
        0 => return path(&[(22.0, 30.0), (30.0, 36.0), (36.0, 28.0)]),
        5 => return path(&[(2.0, 2.0), (-6.0, -2.0), (-6.0, 10.0)]),
        _ => ra,
    };
    match j {
        2 => p.push(seg(32.0, 16.0, 38.0, 16.0)),
        3 => p.push(Prim::Ring(35.0, 8.0, 3.0)),
        4 => p.push(seg(32.0, 8.0, 38.0, 2.0)),
        _ => {}
    }
    p
}

/// Glyph designs for a registry, keyed by label id.
pub struct DesignBook {
    designs: HashMap<LabelId, Design>,
}

impl DesignBook {
    /// A design for every recognition unit the classifier can emit.
    pub fn new(registry: &SymbolRegistry) -> Self {
        let roots: Vec<char> = registry
            .labels()
            .iter()
            .filter(|l| l.role == Role::PureConsonant)
            .filter_map(|l| l.unicode.first().copied())
            .collect();
        let root_index = |c: char| roots.iter().position(|&r| r == c);
        let (mut vowel_no, mut complex_no) = (0usize, 0usize);
        let mut designs = HashMap::new();
        for l in registry.recognition_labels() {
            let (prims, ottu) = match l.role {
                Role::IndependentVowel => {
                    vowel_no += 1;
                    (independent_vowel(vowel_no - 1), false)
                }
                Role::ConsonantVowel => {
                    let Some(k) = l.consonant().and_then(root_index) else { continue };
                    let mut p = body(k);
                    p.extend(vowel_sign(l.vowel.unwrap_or(Vowel::A)));
                    (p, false)
                }
                Role::PureConsonant => {
                    let Some(k) = l.consonant().and_then(root_index) else { continue };
                    let mut p = body(k);
                    p.extend(halant());
                    (p, false)
                }
                Role::Ottu | Role::OttuComplex => {
                    let Some(k) = l.unicode.get(1).copied().and_then(root_index) else { continue };
                    let mut p = body(k);
                    p.push(seg(2.0, 30.0, -6.0, 36.0));
                    if l.role == Role::OttuComplex {
                        p.extend(flourish(complex_no));
                        complex_no += 1;
                    }
                    (p, true)
                }
                Role::KannadaDigit => {
                    let Some(n) = l.name.strip_prefix("kdigit_").and_then(|s| s.parse().ok()) else { continue };
                    (kannada_digit(n), false)
                }
                Role::ArabicDigit => {
                    let Some(n) = l.name.strip_prefix("digit_").and_then(|s| s.parse().ok()) else { continue };
                    (arabic_digit(n), false)
                }
                _ => match named(&l.name) {
                    Some(p) => (p, false),
                    None => continue,
                },
            };
            designs.insert(l.id, Design { prims, ottu });
        }
        Self { designs }
    }

    pub fn get(&self, id: LabelId) -> Option<&Design> {
        self.designs.get(&id)
    }

    pub fn labels(&self) -> Vec<LabelId> {
        let mut v: Vec<LabelId> = self.designs.keys().copied().collect();
        v.sort_unstable();
        v
    }
}

/// Deterministic value in `[-1, 1]` for a design point.
fn hash_unit(x: f64, y: f64, seed: u64, salt: u64) -> f64 {
    let mut h = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    for v in [x.to_bits(), y.to_bits()] {
        h ^= v;
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 31;
    }
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn wobble(x: f64, y: f64, style: &GlyphStyle) -> (f64, f64) {
    if style.wobble == 0.0 {
        return (x, y);
    }
    (
        x + style.wobble * hash_unit(x, y, style.seed, 1),
        y + style.wobble * hash_unit(x, y, style.seed, 2),
    )
}

fn seg_dist2(px: f64, py: f64, (ax, ay): (f64, f64), (bx, by): (f64, f64)) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0) };
    let (qx, qy) = (ax + t * dx - px, ay + t * dy - py);
    qx * qx + qy * qy
}

/// A rendered glyph: ink raster plus the raster row that sits on the
/// baseline. Ottus have a negative baseline row, their first row being
/// below the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedGlyph {
    pub image: BinaryImage,
    pub baseline_row: i32,
}

/// Rasterise a design. Pixel centres inside a stroke (or box) are ink.
pub fn render(design: &Design, style: &GlyphStyle) -> RenderedGlyph {
    let (k, stroke) = if design.ottu {
        (style.scale * OTTU_SCALE, style.stroke * OTTU_STROKE)
    } else {
        (style.scale, style.stroke)
    };
    // Pixel-space primitives.
    let prims: Vec<Prim> = design
        .prims
        .iter()
        .map(|p| match *p {
            Prim::Seg(a, b, c, d) => {
                let (a, b) = wobble(a, b, style);
                let (c, d) = wobble(c, d, style);
                Prim::Seg(a, b, c, d)
            }
            Prim::Ring(x, y, r) => {
                let (x, y) = wobble(x, y, style);
                Prim::Ring(x, y, r)
            }
            other => other,
        })
        .map(|p| p.scaled(k))
        .collect();
    let half = stroke / 2.0;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &prims {
        let (a, b, c, d) = match *p {
            Prim::Seg(a, b, c, d) => (a.min(c) - half, b.min(d) - half, a.max(c) + half, b.max(d) + half),
            Prim::Ring(x, y, r) => (x - r - half, y - r - half, x + r + half, y + r + half),
            Prim::Disc(x, y, r) => (x - r, y - r, x + r, y + r),
            Prim::Rect(a, b, c, d) => (a, b, c, d),
        };
        x0 = x0.min(a);
        y0 = y0.min(b);
        x1 = x1.max(c);
        y1 = y1.max(d);
    }
    let (ix0, iy0) = (x0.floor() as i32 - 1, y0.floor() as i32 - 1);
    let (w, h) = ((x1.ceil() as i32 + 1 - ix0) as usize, (y1.ceil() as i32 + 1 - iy0) as usize);
    let mut img = BinaryImage::new(w, h);
    let h2 = half * half;
    for j in 0..h {
        let py = (iy0 + j as i32) as f64 + 0.5;
        for i in 0..w {
            let px = (ix0 + i as i32) as f64 + 0.5;
            let ink = prims.iter().any(|p| match *p {
                Prim::Seg(a, b, c, d) => seg_dist2(px, py, (a, b), (c, d)) <= h2,
                Prim::Ring(x, y, r) => (((px - x).powi(2) + (py - y).powi(2)).sqrt() - r).abs() <= half,
                Prim::Disc(x, y, r) => (px - x).powi(2) + (py - y).powi(2) <= r * r,
                Prim::Rect(a, b, c, d) => px >= a && px < c && py >= b && py < d,
            });
            if ink {
                img.set(i, j, true);
            }
        }
    }
    let (cropped, top) = crop_to_ink(&img);
    let baseline_row = if design.ottu {
        -(OTTU_GAP + 1)
    } else {
        // Last pixel row whose centre lies inside the body.
        let last_body_row = (BODY * k - 0.5).ceil() as i32 - 1;
        last_body_row - (iy0 + top as i32)
    };
    RenderedGlyph {
        image: cropped,
        baseline_row,
    }
}

/// Tight crop; returns the image and the number of rows removed at the top.
pub(crate) fn crop_to_ink(img: &BinaryImage) -> (BinaryImage, usize) {
    let (w, h) = (img.width(), img.height());
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..h {
        for x in 0..w {
            if img.get(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x + 1);
                y1 = y1.max(y + 1);
            }
        }
    }
    if x0 == usize::MAX {
        return (BinaryImage::new(1, 1), 0);
    }
    let mut out = BinaryImage::new(x1 - x0, y1 - y0);
    for y in y0..y1 {
        for x in x0..x1 {
            if img.get(x, y) {
                out.set(x - x0, y - y0, true);
            }
        }
    }
    (out, y0)
}
