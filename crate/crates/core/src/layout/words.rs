use super::{Component, LayoutConfig, TextLine};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    /// Index of the parent line on its page.
    pub line: usize,
    /// Column span `[left, right)` in line coordinates.
    pub left: i32,
    pub right: i32,
    pub component_ids: Vec<usize>,
}

/// Split a line into words at empty-column runs wider than
/// `word_gap_ratio * line_height` in the vertical projection profile.
///
/// `components` are the line's components after italic correction.
pub fn segment_words(line: &TextLine, line_index: usize, components: &[Component], config: &LayoutConfig) -> Vec<Word> {
    if components.is_empty() {
        return Vec::new();
    }
    let left = components.iter().map(|c| c.bbox.left).min().unwrap_or(0);
    let right = components.iter().map(|c| c.bbox.right).max().unwrap_or(0);
    let mut ink = vec![false; (right - left) as usize];
    for c in components {
        for &(x, _) in &c.pixels {
            ink[(x - left) as usize] = true;
        }
    }
    let threshold = config.word_gap_ratio * line.line_height() as f64;

    let mut spans: Vec<(i32, i32)> = Vec::new();
    let mut start = 0usize;
    let mut x = 0usize;
    while x < ink.len() {
        if ink[x] {
            x += 1;
            continue;
        }
        let gap_start = x;
        while x < ink.len() && !ink[x] {
            x += 1;
        }
        if (x - gap_start) as f64 > threshold {
            spans.push((left + start as i32, left + gap_start as i32));
            start = x;
        }
    }
    spans.push((left + start as i32, right));

    let mut words: Vec<Word> = spans
        .into_iter()
        .map(|(l, r)| Word {
            line: line_index,
            left: l,
            right: r,
            component_ids: Vec::new(),
        })
        .collect();
    for c in components {
        let w = words
            .iter_mut()
            .rfind(|w| w.left <= c.bbox.left)
            .expect("first span starts at the line's left edge");
        w.component_ids.push(c.id);
    }
    for w in &mut words {
        w.component_ids.sort_unstable();
    }
    words.retain(|w| !w.component_ids.is_empty());
    words
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::BBox;

    fn block(id: usize, x0: i32, w: i32) -> Component {
        let mut px = Vec::new();
        for y in 0..20 {
            for x in x0..x0 + w {
                px.push((x, y));
            }
        }
        Component::from_pixels(id, px)
    }

    fn line() -> TextLine {
        TextLine {
            bbox: BBox::new(0, 0, 400, 20),
            component_ids: vec![],
            foreline: 0,
            baseline: 19,
            shear_degrees: 0.0,
        }
    }

    #[test]
    fn wide_gap_separates_words() {
        let comps = vec![block(0, 0, 10), block(1, 12, 10), block(2, 32, 10)];
        let words = segment_words(&line(), 0, &comps, &LayoutConfig::default());
        assert_eq!(words.len(), 2);
        assert_eq!(words[0].component_ids, vec![0, 1]);
        assert_eq!(words[1].component_ids, vec![2]);
        assert!(words[0].right <= words[1].left);
    }

    #[test]
    fn solid_line_is_one_word() {
        let comps = vec![block(0, 0, 100)];
        assert_eq!(segment_words(&line(), 0, &comps, &LayoutConfig::default()).len(), 1);
    }

    #[test]
    fn narrow_gap_stays_inside_word() {
        let comps = vec![block(0, 0, 10), block(1, 11, 10)];
        assert_eq!(segment_words(&line(), 0, &comps, &LayoutConfig::default()).len(), 1);
    }
}
