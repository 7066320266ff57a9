use super::{BBox, Component, LayoutConfig, LayoutError, Zone};

/// One text line of a zone.
#[derive(Debug, Clone, PartialEq)]
pub struct TextLine {
    pub bbox: BBox,
    /// Page component ids, ascending.
    pub component_ids: Vec<usize>,
    /// Top row of the base-symbol body.
    pub foreline: i32,
    /// Bottom row of the base-symbol body; ottus hang below it.
    pub baseline: i32,
    /// Italic shear found by [`correct_italics`](super::correct_italics), degrees.
    pub shear_degrees: f64,
}

impl TextLine {
    /// Body height, the scale for all line-relative thresholds.
    pub fn line_height(&self) -> i32 {
        self.baseline - self.foreline + 1
    }
}

struct Cluster {
    top: i32,
    bottom: i32,
    members: Vec<usize>,
}

/// Group the components of a zone into text lines, top to bottom.
///
/// Components are clustered by overlap of their row intervals. A cluster
/// that starts below the preceding line's baseline, sits close under it and
/// is made of small components (a strip of short ottus printed clear of the
/// main line) is folded into that line.
pub fn segment_lines(components: &[Component], zone: &Zone, config: &LayoutConfig) -> Vec<TextLine> {
    let in_zone: Vec<&Component> = components
        .iter()
        .filter(|c| zone.contains_center_of(&c.bbox))
        .collect();
    if in_zone.is_empty() {
        return Vec::new();
    }

    let h_ref = reference_height(&in_zone);
    let (mut core, tall): (Vec<&Component>, Vec<&Component>) = in_zone
        .iter()
        .partition(|c| c.bbox.height() as f64 <= 2.5 * h_ref);
    if core.is_empty() {
        core = tall.clone();
    }
    core.sort_by_key(|c| (c.bbox.top, c.bbox.left, c.id));

    let mut clusters: Vec<Cluster> = Vec::new();
    for c in &core {
        match clusters.last_mut() {
            Some(cl) if c.bbox.top < cl.bottom => {
                cl.bottom = cl.bottom.max(c.bbox.bottom);
                cl.members.push(c.id);
            }
            _ => clusters.push(Cluster {
                top: c.bbox.top,
                bottom: c.bbox.bottom,
                members: vec![c.id],
            }),
        }
    }
    if core.len() != in_zone.len() {
        for c in tall.iter().filter(|c| c.bbox.height() as f64 > 2.5 * h_ref) {
            let best = clusters
                .iter()
                .enumerate()
                .max_by_key(|(i, cl)| {
                    let overlap = (c.bbox.bottom.min(cl.bottom) - c.bbox.top.max(cl.top)).max(0);
                    (overlap, std::cmp::Reverse(*i))
                })
                .map(|(i, _)| i)
                .unwrap_or(0);
            clusters[best].members.push(c.id);
        }
    }

    let by_id = |id: usize| -> &Component { components.iter().find(|c| c.id == id).expect("known id") };
    let mut heights: Vec<i32> = clusters.iter().map(|c| c.bottom - c.top).collect();
    heights.sort_unstable();
    let median_line_height = heights[heights.len() / 2] as f64;

    let mut lines: Vec<TextLine> = Vec::new();
    for cl in clusters {
        let members: Vec<&Component> = cl.members.iter().map(|&id| by_id(id)).collect();
        if let Some(prev) = lines.last_mut() {
            let gap = cl.top - prev.bbox.bottom;
            let small_parts = median_component_height(&members) < 0.75 * h_ref;
            let short = ((cl.bottom - cl.top) as f64) < config.strip_height_ratio * median_line_height;
            if cl.top > prev.baseline && (gap as f64) < 0.5 * h_ref && (short || small_parts) {
                for c in &members {
                    prev.bbox = prev.bbox.union(&c.bbox);
                }
                prev.component_ids.extend(cl.members.iter().copied());
                prev.component_ids.sort_unstable();
                continue;
            }
        }
        let mut bbox = members[0].bbox;
        for c in &members {
            bbox = bbox.union(&c.bbox);
        }
        let (foreline, baseline) = match estimate_reference_rows(&members) {
            Ok(rows) => rows,
            // Very short lines (dots, dashes) get the box itself as body.
            Err(_) => (bbox.top, (bbox.bottom - 1).max(bbox.top)),
        };
        let mut ids = cl.members;
        ids.sort_unstable();
        lines.push(TextLine {
            bbox,
            component_ids: ids,
            foreline,
            baseline,
            shear_degrees: 0.0,
        });
    }
    lines
}

/// Foreline and baseline from the horizontal projection profile.
///
/// The baseline is the row after which the profile drops most steeply,
/// searched in the lower half of the line; the foreline is the row where it
/// rises most steeply, searched in the upper half.
pub fn estimate_reference_rows(components: &[&Component]) -> Result<(i32, i32), LayoutError> {
    let Some(first) = components.first() else {
        return Err(LayoutError::DegenerateLine { height: 0 });
    };
    let mut bbox = first.bbox;
    for c in components {
        bbox = bbox.union(&c.bbox);
    }
    let n = bbox.height();
    if n < 4 {
        return Err(LayoutError::DegenerateLine { height: n });
    }
    let mut profile = vec![0i64; n as usize + 2];
    for c in components {
        for &(_, y) in &c.pixels {
            profile[(y - bbox.top) as usize + 1] += 1;
        }
    }
    // profile[r + 1] is row r; profile[0] and profile[n + 1] are zero padding.
    let half = n / 2;
    let mut baseline = n - 1;
    let mut steepest_drop = i64::MAX;
    for r in half..n {
        let g = profile[r as usize + 2] - profile[r as usize + 1];
        if g < steepest_drop {
            steepest_drop = g;
            baseline = r;
        }
    }
    let mut foreline = 0;
    let mut steepest_rise = i64::MIN;
    for r in 0..half {
        let g = profile[r as usize + 1] - profile[r as usize];
        if g > steepest_rise {
            steepest_rise = g;
            foreline = r;
        }
    }
    if foreline >= baseline {
        return Err(LayoutError::DegenerateLine { height: n });
    }
    Ok((bbox.top + foreline, bbox.top + baseline))
}

fn reference_height(components: &[&Component]) -> f64 {
    let mut hs: Vec<i32> = components
        .iter()
        .map(|c| c.bbox.height())
        .filter(|&h| h >= 3)
        .collect();
    if hs.is_empty() {
        hs = components.iter().map(|c| c.bbox.height()).collect();
    }
    hs.sort_unstable();
    hs[hs.len() / 2] as f64
}

fn median_component_height(components: &[&Component]) -> f64 {
    let mut hs: Vec<i32> = components.iter().map(|c| c.bbox.height()).collect();
    hs.sort_unstable();
    hs[hs.len() / 2] as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(id: usize, x0: i32, y0: i32, x1: i32, y1: i32) -> Component {
        let mut px = Vec::new();
        for y in y0..y1 {
            for x in x0..x1 {
                px.push((x, y));
            }
        }
        Component::from_pixels(id, px)
    }

    /// Hollow box with a flat top and bottom stroke: a crude base glyph.
    fn glyph(id: usize, x0: i32, top: i32, bottom: i32) -> Component {
        let mut px = Vec::new();
        for y in top..bottom {
            for x in x0..x0 + 20 {
                let edge = y < top + 3 || y >= bottom - 3 || x < x0 + 3 || x >= x0 + 17;
                if edge {
                    px.push((x, y));
                }
            }
        }
        Component::from_pixels(id, px)
    }

    #[test]
    fn single_line() {
        let comps: Vec<_> = (0..5).map(|i| glyph(i, i as i32 * 25, 10, 40)).collect();
        let lines = segment_lines(&comps, &Zone::whole_page(200, 100), &LayoutConfig::default());
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].component_ids, vec![0, 1, 2, 3, 4]);
        assert_eq!(lines[0].baseline, 39);
        assert_eq!(lines[0].foreline, 10);
    }

    #[test]
    fn detached_ottu_strip_joins_the_line_above() {
        let mut comps: Vec<_> = (0..5).map(|i| glyph(i, i as i32 * 25, 10, 40)).collect();
        comps.push(rect(5, 4, 47, 16, 60));
        comps.push(rect(6, 54, 47, 66, 60));
        let lines = segment_lines(&comps, &Zone::whole_page(200, 100), &LayoutConfig::default());
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].component_ids.len(), 7);
        assert_eq!(lines[0].baseline, 39);
    }

    #[test]
    fn well_separated_lines_stay_apart() {
        let mut comps: Vec<_> = (0..4).map(|i| glyph(i, i as i32 * 25, 10, 40)).collect();
        comps.extend((0..4).map(|i| glyph(4 + i, i as i32 * 25, 80, 110)));
        let lines = segment_lines(&comps, &Zone::whole_page(200, 200), &LayoutConfig::default());
        assert_eq!(lines.len(), 2);
        assert!(lines[0].bbox.bottom <= lines[1].bbox.top);
    }

    #[test]
    fn empty_zone_has_no_lines() {
        assert!(segment_lines(&[], &Zone::whole_page(10, 10), &LayoutConfig::default()).is_empty());
    }

    #[test]
    fn single_row_line_is_degenerate() {
        let c = rect(0, 0, 5, 30, 6);
        assert!(matches!(
            estimate_reference_rows(&[&c]),
            Err(LayoutError::DegenerateLine { height: 1 })
        ));
    }
}
