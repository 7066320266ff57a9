use super::{BinaryImage, GrayImage, PreprocessError};

/// Largest skew magnitude searched, degrees.
pub const SKEW_SEARCH_RANGE: f64 = 15.0;
/// Angular resolution of the search, degrees.
pub const SKEW_STEP: f64 = 0.1;
/// Skews smaller than this are left uncorrected.
pub const DEFAULT_SKEW_THRESHOLD: f64 = 0.5;

/// Detected page skew. Positive angles are counter-clockwise rotations of the
/// page content as it appears on screen (text lines rise to the right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewEstimate {
    pub angle_degrees: f64,
    /// Fraction of voting points that fall in the winning accumulator cell.
    pub confidence: f64,
}

impl SkewEstimate {
    pub fn zero() -> Self {
        Self {
            angle_degrees: 0.0,
            confidence: 1.0,
        }
    }
}

/// Hough-transform skew detection.
///
/// Every foreground pixel whose lower neighbour is background votes, i.e. the
/// bottom of each vertical ink run in every column. For each candidate angle
/// the votes are accumulated over `rho = y cos(a) + x sin(a)` in one-pixel
/// bins; the angle whose accumulator holds the highest peak wins. Ties go to
/// the angle of smallest magnitude.
pub fn detect_skew(image: &BinaryImage) -> Result<SkewEstimate, PreprocessError> {
    let (w, h) = (image.width(), image.height());
    let mut points: Vec<(f32, f32)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if image.get(x, y) && (y + 1 == h || !image.get(x, y + 1)) {
                points.push((x as f32, y as f32));
            }
        }
    }
    if points.is_empty() {
        return Err(PreprocessError::NoContent);
    }

    let steps = (SKEW_SEARCH_RANGE / SKEW_STEP).round() as i32;
    let diag = ((w * w + h * h) as f64).sqrt().ceil() as usize;
    let offset = diag as f32;
    let mut acc = vec![0u32; 2 * diag + 2];

    // Visit angles by increasing magnitude so the first strict maximum is the
    // smallest-magnitude one.
    let mut order: Vec<i32> = (-steps..=steps).collect();
    order.sort_by_key(|&k| (k.abs(), k < 0));

    let mut best = (0i32, 0u32);
    for k in order {
        let angle = (k as f64 * SKEW_STEP).to_radians();
        let (sin, cos) = (angle.sin() as f32, angle.cos() as f32);
        acc.iter_mut().for_each(|a| *a = 0);
        let mut peak = 0u32;
        for &(x, y) in &points {
            let rho = (y * cos + x * sin + offset).round() as usize;
            let cell = &mut acc[rho];
            *cell += 1;
            peak = peak.max(*cell);
        }
        if peak > best.1 {
            best = (k, peak);
        }
    }
    Ok(SkewEstimate {
        angle_degrees: best.0 as f64 * SKEW_STEP,
        confidence: best.1 as f64 / points.len() as f64,
    })
}

/// Rotate the page content counter-clockwise by `degrees` with bilinear
/// interpolation. The canvas grows to hold the whole rotated page; samples
/// falling outside the source read as white paper.
pub fn rotate(image: &GrayImage, degrees: f64) -> GrayImage {
    if degrees == 0.0 {
        return image.clone();
    }
    let (w, h) = (image.width() as f64, image.height() as f64);
    let a = degrees.to_radians();
    let (sin, cos) = a.sin_cos();
    let new_w = (w * cos.abs() + h * sin.abs()).ceil().max(1.0) as usize;
    let new_h = (w * sin.abs() + h * cos.abs()).ceil().max(1.0) as usize;
    let (cx, cy) = (w / 2.0, h / 2.0);
    let (ncx, ncy) = (new_w as f64 / 2.0, new_h as f64 / 2.0);

    let mut out = GrayImage::filled(new_w, new_h, 255);
    for oy in 0..new_h {
        let dy = oy as f64 + 0.5 - ncy;
        for ox in 0..new_w {
            let dx = ox as f64 + 0.5 - ncx;
            // Inverse of the forward map (x, y) -> (x cos + y sin, -x sin + y cos).
            let sx = dx * cos - dy * sin + cx - 0.5;
            let sy = dx * sin + dy * cos + cy - 0.5;
            out.set(ox, oy, sample_bilinear(image, sx, sy));
        }
    }
    out
}

/// Map a point of the source image into the canvas produced by [`rotate`].
pub fn rotate_point(width: usize, height: usize, degrees: f64, x: f64, y: f64) -> (f64, f64) {
    let (w, h) = (width as f64, height as f64);
    let (sin, cos) = degrees.to_radians().sin_cos();
    let new_w = (w * cos.abs() + h * sin.abs()).ceil().max(1.0);
    let new_h = (w * sin.abs() + h * cos.abs()).ceil().max(1.0);
    let (dx, dy) = (x - w / 2.0, y - h / 2.0);
    (
        dx * cos + dy * sin + new_w / 2.0,
        -dx * sin + dy * cos + new_h / 2.0,
    )
}

/// Undo a detected skew. Below `threshold` degrees the image is returned
/// untouched; otherwise it is rotated by the opposite angle. The caller is
/// expected to binarize the result again.
pub fn deskew(gray: &GrayImage, estimate: &SkewEstimate, threshold: f64) -> GrayImage {
    if estimate.angle_degrees.abs() < threshold {
        return gray.clone();
    }
    rotate(gray, -estimate.angle_degrees)
}

fn sample_bilinear(image: &GrayImage, x: f64, y: f64) -> u8 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let px = |xx: i64, yy: i64| -> f64 {
        if xx < 0 || yy < 0 || xx >= image.width() as i64 || yy >= image.height() as i64 {
            255.0
        } else {
            image.get(xx as usize, yy as usize) as f64
        }
    };
    let top = px(x0, y0) * (1.0 - fx) + px(x0 + 1, y0) * fx;
    let bottom = px(x0, y0 + 1) * (1.0 - fx) + px(x0 + 1, y0 + 1) * fx;
    (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn striped_page() -> GrayImage {
        let mut img = GrayImage::filled(400, 300, 255);
        for line in 0..5 {
            let y0 = 40 + line * 50;
            for y in y0..y0 + 20 {
                for x in 40..360 {
                    // gaps between "words"
                    if (x / 30) % 4 != 3 {
                        img.set(x, y, 0);
                    }
                }
            }
        }
        img
    }

    #[test]
    fn empty_page_has_no_content() {
        let bin = BinaryImage::new(20, 20);
        assert!(matches!(detect_skew(&bin), Err(PreprocessError::NoContent)));
    }

    #[test]
    fn axis_aligned_page_has_zero_skew() {
        let est = detect_skew(&striped_page().threshold(128)).unwrap();
        assert!(est.angle_degrees.abs() <= 0.1, "{est:?}");
        assert!(est.confidence > 0.0 && est.confidence <= 1.0);
    }

    #[test]
    fn small_skew_is_left_alone() {
        let page = striped_page();
        let est = SkewEstimate {
            angle_degrees: 0.3,
            confidence: 1.0,
        };
        assert_eq!(deskew(&page, &est, DEFAULT_SKEW_THRESHOLD), page);
        assert_eq!(rotate(&page, 0.0), page);
    }

    #[test]
    fn rotation_direction_matches_detection() {
        let page = striped_page();
        for angle in [3.0, -7.5] {
            let est = detect_skew(&rotate(&page, angle).threshold(128)).unwrap();
            assert!((est.angle_degrees - angle).abs() <= 0.5, "{angle}: {est:?}");
        }
    }

    #[test]
    fn rotate_point_tracks_content() {
        let mut img = GrayImage::filled(100, 60, 255);
        for y in 10..14 {
            for x in 70..74 {
                img.set(x, y, 0);
            }
        }
        let rotated = rotate(&img, 12.0);
        let (px, py) = rotate_point(100, 60, 12.0, 72.0, 12.0);
        assert!(rotated.get(px.round() as usize, py.round() as usize) < 128);
    }
}
