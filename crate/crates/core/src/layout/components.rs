use crate::preprocess::BinaryImage;

/// Axis-aligned box, half-open: `[left, right) x [top, bottom)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BBox {
    pub left: i32,
    pub top: i32,
    pub right: i32,
    pub bottom: i32,
}

impl BBox {
    pub fn new(left: i32, top: i32, right: i32, bottom: i32) -> Self {
        Self {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn from_point(x: i32, y: i32) -> Self {
        Self::new(x, y, x + 1, y + 1)
    }

    pub fn width(&self) -> i32 {
        self.right - self.left
    }

    pub fn height(&self) -> i32 {
        self.bottom - self.top
    }

    pub fn include(&mut self, x: i32, y: i32) {
        self.left = self.left.min(x);
        self.top = self.top.min(y);
        self.right = self.right.max(x + 1);
        self.bottom = self.bottom.max(y + 1);
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox::new(
            self.left.min(other.left),
            self.top.min(other.top),
            self.right.max(other.right),
            self.bottom.max(other.bottom),
        )
    }

    /// Length of the shared column range.
    pub fn horizontal_overlap(&self, other: &BBox) -> i32 {
        (self.right.min(other.right) - self.left.max(other.left)).max(0)
    }

    /// Length of the shared row range.
    pub fn vertical_overlap(&self, other: &BBox) -> i32 {
        (self.bottom.min(other.bottom) - self.top.max(other.top)).max(0)
    }

    pub fn center_x2(&self) -> i32 {
        self.left + self.right
    }

    pub fn center_y2(&self) -> i32 {
        self.top + self.bottom
    }
}

/// A maximal 8-connected set of foreground pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    pub bbox: BBox,
    /// `(x, y)` page coordinates in raster order.
    pub pixels: Vec<(i32, i32)>,
}

impl Component {
    pub fn from_pixels(id: usize, mut pixels: Vec<(i32, i32)>) -> Self {
        assert!(!pixels.is_empty(), "component must be non-empty");
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let mut bbox = BBox::from_point(pixels[0].0, pixels[0].1);
        for &(x, y) in &pixels {
            bbox.include(x, y);
        }
        Self { id, bbox, pixels }
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Label 8-connected foreground regions. Components are numbered in the
/// raster order of their first pixel.
pub fn connected_components(image: &BinaryImage) -> Vec<Component> {
    let (w, h) = (image.width(), image.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || !image.pixels()[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(idx) = stack.pop() {
            let (x, y) = (idx % w, idx / w);
            pixels.push((x as i32, y as i32));
            let x_lo = x.saturating_sub(1);
            let x_hi = (x + 1).min(w - 1);
            let y_lo = y.saturating_sub(1);
            let y_hi = (y + 1).min(h - 1);
            for ny in y_lo..=y_hi {
                for nx in x_lo..=x_hi {
                    let n = ny * w + nx;
                    if !seen[n] && image.pixels()[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        out.push(Component::from_pixels(out.len(), pixels));
    }
    out
}

/// Drop components smaller than `min_area` pixels (scanner dust, speckle
/// noise) and renumber the survivors.
pub fn remove_specks(components: Vec<Component>, min_area: usize) -> Vec<Component> {
    components
        .into_iter()
        .filter(|c| c.area() >= min_area)
        .enumerate()
        .map(|(i, mut c)| {
            c.id = i;
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_image_has_no_components() {
        assert!(connected_components(&BinaryImage::new(5, 5)).is_empty());
    }

    #[test]
    fn disjoint_dots_are_separate() {
        let mut img = BinaryImage::new(5, 5);
        img.set(0, 0, true);
        img.set(3, 3, true);
        let comps = connected_components(&img);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].bbox, BBox::new(0, 0, 1, 1));
    }

    #[test]
    fn diagonal_neighbours_connect() {
        let mut img = BinaryImage::new(4, 4);
        for i in 0..4 {
            img.set(i, i, true);
        }
        let comps = connected_components(&img);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].area(), 4);
    }

    #[test]
    fn speck_removal_renumbers() {
        let mut img = BinaryImage::new(8, 3);
        img.set(0, 0, true);
        for x in 3..8 {
            img.set(x, 1, true);
        }
        let comps = remove_specks(connected_components(&img), 2);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].id, 0);
        assert_eq!(comps[0].area(), 5);
    }
}
