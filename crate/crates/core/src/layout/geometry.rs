use super::SymbolImage;

/// Punctuation recognised from position and shape alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Punctuation {
    Period,
    Comma,
    LeftQuote,
    RightQuote,
    Apostrophe,
    Hyphen,
}

impl Punctuation {
    /// Registry name of the matching recognition unit.
    pub fn label_name(self) -> &'static str {
        match self {
            Self::Period => "period",
            Self::Comma => "comma",
            Self::LeftQuote => "lquote",
            Self::RightQuote => "rquote",
            Self::Apostrophe => "apostrophe",
            Self::Hyphen => "hyphen",
        }
    }
}

/// Label small marks from their size and position relative to the foreline
/// and baseline. Returns `None` whenever the shape could be anything else;
/// the classifier handles those.
pub fn classify_by_geometry(symbol: &SymbolImage, foreline: i32, baseline: i32) -> Option<Punctuation> {
    let lh = (baseline - foreline + 1).max(1) as f64;
    let b = &symbol.bbox;
    let (w, h) = (b.width() as f64, b.height() as f64);
    let (top, last) = (b.top, b.bottom - 1);
    let tol = (0.1 * lh).max(1.0);

    if h > 0.45 * lh || w > 0.8 * lh {
        return None;
    }

    // Hyphen: flat bar floating mid-body.
    let mid = (b.top + b.bottom) as f64 / 2.0;
    if h <= 0.15 * lh && w >= 2.0 * h && w >= 0.2 * lh {
        let lo = foreline as f64 + 0.25 * lh;
        let hi = baseline as f64 - 0.2 * lh;
        if mid >= lo && mid <= hi {
            return Some(Punctuation::Hyphen);
        }
        return None;
    }
    if w > 0.3 * lh {
        return None;
    }

    // Dot: tiny blob resting on the baseline.
    if h <= 0.2 * lh && ((last - baseline) as f64).abs() <= tol && w <= 2.0 * h && h <= 2.0 * w {
        return Some(Punctuation::Period);
    }

    // Comma: small mark starting near the baseline and dropping below it.
    if top as f64 >= baseline as f64 - 0.25 * lh && (last - baseline) as f64 > tol {
        return Some(Punctuation::Comma);
    }

    // Quotes and apostrophe: small marks hanging near the foreline.
    if h >= 0.1 * lh && last as f64 <= foreline as f64 + 0.35 * lh {
        let half = (b.height() / 2) as usize;
        let (mut upper, mut lower) = (0usize, 0usize);
        for y in 0..b.height() as usize {
            for x in 0..b.width() as usize {
                if symbol.raster.get(x, y) {
                    if y < half {
                        upper += 1;
                    } else if y >= b.height() as usize - half {
                        lower += 1;
                    }
                }
            }
        }
        let total = (upper + lower).max(1) as f64;
        let balance = (upper as f64 - lower as f64) / total;
        if balance.abs() <= 0.15 && h >= 2.0 * w {
            return Some(Punctuation::Apostrophe);
        }
        if balance > 0.15 {
            return Some(Punctuation::RightQuote);
        }
        if balance < -0.15 {
            return Some(Punctuation::LeftQuote);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::BBox;
    use crate::preprocess::BinaryImage;

    fn sym(left: i32, top: i32, rows: &[&str]) -> SymbolImage {
        let h = rows.len();
        let w = rows[0].len();
        let mut raster = BinaryImage::new(w, h);
        for (y, r) in rows.iter().enumerate() {
            for (x, ch) in r.chars().enumerate() {
                raster.set(x, y, ch == '#');
            }
        }
        SymbolImage {
            raster,
            bbox: BBox::new(left, top, left + w as i32, top + h as i32),
            is_ottu: false,
            component_ids: vec![0],
        }
    }

    // Line with foreline 10, baseline 41: height 32.
    const F: i32 = 10;
    const B: i32 = 41;

    #[test]
    fn dot_on_baseline() {
        let s = sym(0, 38, &["####", "####", "####", "####"]);
        assert_eq!(classify_by_geometry(&s, F, B), Some(Punctuation::Period));
    }

    #[test]
    fn comma_descends() {
        let s = sym(0, 37, &["####", "####", "####", "####", "  ##", "  ##", "  # ", " #  ", "#   "]);
        assert_eq!(classify_by_geometry(&s, F, B), Some(Punctuation::Comma));
    }

    #[test]
    fn hyphen_mid_body() {
        let s = sym(0, 24, &["##########", "##########", "##########"]);
        assert_eq!(classify_by_geometry(&s, F, B), Some(Punctuation::Hyphen));
    }

    #[test]
    fn quotes_by_mass() {
        let rq = sym(0, 8, &["###", "###", "###", " ##", " # ", "#  "]);
        assert_eq!(classify_by_geometry(&rq, F, B), Some(Punctuation::RightQuote));
        let lq = sym(0, 8, &["  #", " # ", "## ", "###", "###", "###"]);
        assert_eq!(classify_by_geometry(&lq, F, B), Some(Punctuation::LeftQuote));
        let ap = sym(0, 8, &["##", "##", "##", "##", "##", "##", "##", "##"]);
        assert_eq!(classify_by_geometry(&ap, F, B), Some(Punctuation::Apostrophe));
    }

    #[test]
    fn full_height_glyph_defers() {
        let rows: Vec<String> = (0..32).map(|_| "#".repeat(20)).collect();
        let refs: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
        assert_eq!(classify_by_geometry(&sym(0, F, &refs), F, B), None);
    }
}
