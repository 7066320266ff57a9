use super::{BBox, Component, LayoutConfig};
use crate::preprocess::BinaryImage;

/// One recognition unit's worth of ink.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolImage {
    /// Tight crop of the member components.
    pub raster: BinaryImage,
    pub bbox: BBox,
    pub is_ottu: bool,
    pub component_ids: Vec<usize>,
}

impl SymbolImage {
    fn from_components(parts: &[&Component], is_ottu: bool) -> Self {
        let mut bbox = parts[0].bbox;
        for c in parts {
            bbox = bbox.union(&c.bbox);
        }
        let mut raster = BinaryImage::new(bbox.width() as usize, bbox.height() as usize);
        for c in parts {
            for &(x, y) in &c.pixels {
                raster.set((x - bbox.left) as usize, (y - bbox.top) as usize, true);
            }
        }
        let mut ids: Vec<usize> = parts.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        Self {
            raster,
            bbox,
            is_ottu,
            component_ids: ids,
        }
    }
}

/// True when at least `mass_ratio` of the component's pixels lie below the
/// baseline row.
pub fn is_ottu(component: &Component, baseline: i32, mass_ratio: f64) -> bool {
    let below = component.pixels.iter().filter(|&&(_, y)| y > baseline).count();
    below as f64 >= mass_ratio * component.area() as f64
}

/// Split a word's components into symbols.
///
/// Components above the baseline that overlap horizontally by at least
/// `overlap_ratio` of the narrower box are merged (transitively). Ottus stay
/// separate and are placed right after the base symbol they overlap most.
pub fn segment_symbols(components: &[&Component], baseline: i32, config: &LayoutConfig) -> Vec<SymbolImage> {
    let (ottus, bases): (Vec<&Component>, Vec<&Component>) = components
        .iter()
        .partition(|c| is_ottu(c, baseline, config.ottu_mass_ratio));

    // Union-find over base components.
    let mut parent: Vec<usize> = (0..bases.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..bases.len() {
        for j in i + 1..bases.len() {
            let (a, b) = (&bases[i].bbox, &bases[j].bbox);
            let narrow = a.width().min(b.width()) as f64;
            if a.horizontal_overlap(b) as f64 >= config.overlap_ratio * narrow {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut groups: Vec<Vec<&Component>> = Vec::new();
    let mut group_of_root = vec![usize::MAX; bases.len()];
    for (i, &b) in bases.iter().enumerate() {
        let r = find(&mut parent, i);
        if group_of_root[r] == usize::MAX {
            group_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of_root[r]].push(b);
    }
    let mut base_syms: Vec<SymbolImage> = groups.iter().map(|g| SymbolImage::from_components(g, false)).collect();
    base_syms.sort_by_key(|s| (s.bbox.left, s.bbox.top));

    let mut attached: Vec<Vec<SymbolImage>> = vec![Vec::new(); base_syms.len()];
    let mut orphans: Vec<SymbolImage> = Vec::new();
    for o in ottus {
        let sym = SymbolImage::from_components(&[o], true);
        let target = base_syms
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let overlap = b.bbox.horizontal_overlap(&sym.bbox);
                let dist = (b.bbox.center_x2() - sym.bbox.center_x2()).abs();
                (i, overlap, dist)
            })
            .min_by_key(|&(i, overlap, dist)| (std::cmp::Reverse(overlap), dist, i));
        match target {
            Some((i, _, _)) => attached[i].push(sym),
            None => orphans.push(sym),
        }
    }

    let mut out = Vec::with_capacity(components.len());
    for (base, mut ots) in base_syms.into_iter().zip(attached) {
        out.push(base);
        ots.sort_by_key(|s| (s.bbox.top, s.bbox.left));
        out.extend(ots);
    }
    orphans.sort_by_key(|s| (s.bbox.left, s.bbox.top));
    out.extend(orphans);
    out
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

    #[test]
    fn ottu_mass_rule() {
        assert!(is_ottu(&rect(0, 0, 21, 10, 30), 20, 0.7));
        assert!(!is_ottu(&rect(0, 0, 0, 10, 20), 20, 0.7));
        // Tall ottu poking 2 rows above the baseline.
        assert!(is_ottu(&rect(0, 0, 19, 10, 30), 20, 0.7));
    }

    #[test]
    fn stacked_components_form_one_symbol() {
        let parts = [rect(0, 0, 0, 10, 5), rect(1, 0, 7, 10, 12), rect(2, 1, 14, 9, 20)];
        let refs: Vec<&Component> = parts.iter().collect();
        let syms = segment_symbols(&refs, 19, &LayoutConfig::default());
        assert_eq!(syms.len(), 1);
        assert_eq!(syms[0].component_ids, vec![0, 1, 2]);
        assert_eq!(syms[0].raster.count_foreground(), 50 + 50 + 48);
    }

    #[test]
    fn ottu_follows_its_base() {
        // base, base-with-ottu, anusvara-like blob
        let parts = [
            rect(0, 0, 0, 10, 20),
            rect(1, 14, 0, 24, 20),
            rect(2, 15, 23, 23, 30),
            rect(3, 28, 8, 32, 14),
        ];
        let refs: Vec<&Component> = parts.iter().collect();
        let syms = segment_symbols(&refs, 19, &LayoutConfig::default());
        let ids: Vec<_> = syms.iter().map(|s| (s.component_ids[0], s.is_ottu)).collect();
        assert_eq!(ids, vec![(0, false), (1, false), (2, true), (3, false)]);
    }

    #[test]
    fn single_component_is_single_symbol() {
        let c = rect(7, 3, 3, 9, 9);
        let syms = segment_symbols(&[&c], 10, &LayoutConfig::default());
        assert_eq!(syms.len(), 1);
        assert_eq!(syms[0].bbox, c.bbox);
    }
}
