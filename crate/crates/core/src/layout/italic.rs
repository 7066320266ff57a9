use super::Component;
use crate::preprocess::{BinaryImage, GrayImage};

/// Largest shear magnitude tried, degrees.
pub const MAX_SHEAR_DEGREES: i32 = 20;

fn offset(y: i32, y_ref: i32, tan: f64) -> i32 {
    ((y_ref - y) as f64 * tan).round() as i32
}

/// Distinct shifted columns, counted with a stamp buffer indexed from `lo`.
fn ink_columns(pixels: &[(i32, i32)], y_ref: i32, tan: f64, lo: i32, stamp: &mut [u32], round: u32) -> usize {
    let mut n = 0;
    for &(x, y) in pixels {
        let col = (x - offset(y, y_ref, tan) - lo) as usize;
        if stamp[col] != round {
            stamp[col] = round;
            n += 1;
        }
    }
    n
}

/// Shear that best straightens the given pixels about row `y_ref`, in whole
/// degrees within the cap. Fewest ink columns (most empty columns in the
/// vertical projection) wins; ties go toward zero.
fn best_shear(pixels: &[(i32, i32)], y_ref: i32) -> i32 {
    if pixels.is_empty() {
        return 0;
    }
    let (mut x0, mut x1, mut dy) = (i32::MAX, i32::MIN, 0i32);
    for &(x, y) in pixels {
        x0 = x0.min(x);
        x1 = x1.max(x);
        dy = dy.max((y_ref - y).abs());
    }
    let max_tan = (MAX_SHEAR_DEGREES as f64).to_radians().tan();
    let reach = (dy as f64 * max_tan).ceil() as i32 + 1;
    let lo = x0 - reach;
    let mut stamp = vec![0u32; (x1 + reach - lo + 1) as usize];
    let mut order: Vec<i32> = (-MAX_SHEAR_DEGREES..=MAX_SHEAR_DEGREES).collect();
    order.sort_by_key(|&s| (s.abs(), s < 0));
    let mut best = (0, usize::MAX);
    for (round, s) in order.into_iter().enumerate() {
        let tan = (s as f64).to_radians().tan();
        let n = ink_columns(pixels, y_ref, tan, lo, &mut stamp, round as u32 + 1);
        if n < best.1 {
            best = (s, n);
        }
    }
    best.0
}

/// Italic correction for one line. Returns the detected shear in degrees
/// and the components with that shear removed, about the baseline row.
pub fn correct_italics_components(components: &[&Component], baseline: i32) -> (f64, Vec<Component>) {
    let pixels: Vec<(i32, i32)> = components.iter().flat_map(|c| c.pixels.iter().copied()).collect();
    let s = best_shear(&pixels, baseline);
    let tan = (s as f64).to_radians().tan();
    let out = components
        .iter()
        .map(|c| {
            if s == 0 {
                return (*c).clone();
            }
            let px = c.pixels.iter().map(|&(x, y)| (x - offset(y, baseline, tan), y)).collect();
            Component::from_pixels(c.id, px)
        })
        .collect();
    (s as f64, out)
}

/// Raster form of italic correction for an image holding one line. The
/// bottom ink row serves as the shear pivot. The output keeps the height and
/// is widened when needed so no ink is lost.
pub fn correct_italics(image: &BinaryImage) -> (BinaryImage, f64) {
    let mut pixels = Vec::new();
    for y in 0..image.height() {
        for x in 0..image.width() {
            if image.get(x, y) {
                pixels.push((x as i32, y as i32));
            }
        }
    }
    let Some(&(_, y_ref)) = pixels.last() else {
        return (image.clone(), 0.0);
    };
    let s = best_shear(&pixels, y_ref);
    if s == 0 {
        return (image.clone(), 0.0);
    }
    let tan = (s as f64).to_radians().tan();
    let sheared: Vec<(i32, i32)> = pixels.iter().map(|&(x, y)| (x - offset(y, y_ref, tan), y)).collect();
    let old_min = pixels.iter().map(|p| p.0).min().unwrap_or(0);
    let new_min = sheared.iter().map(|p| p.0).min().unwrap_or(0);
    let shift = old_min - new_min;
    let max_x = sheared.iter().map(|p| p.0 + shift).max().unwrap_or(0);
    let width = image.width().max(max_x as usize + 1);
    let mut out = BinaryImage::new(width, image.height());
    for (x, y) in sheared {
        out.set((x + shift) as usize, y as usize, true);
    }
    (out, s as f64)
}

/// Lean content to the right by `degrees` about row `y_ref`, as italic type
/// does. Pixels pushed off the canvas are lost; vacated pixels are white.
pub fn shear_image(image: &GrayImage, degrees: f64, y_ref: i32) -> GrayImage {
    let tan = degrees.to_radians().tan();
    let (w, h) = (image.width(), image.height());
    let mut out = GrayImage::filled(w, h, 255);
    for y in 0..h {
        let dx = offset(y as i32, y_ref, tan);
        for x in 0..w {
            let nx = x as i32 + dx;
            if nx >= 0 && (nx as usize) < w {
                out.set(nx as usize, y, image.get(x, y));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bars() -> GrayImage {
        let mut img = GrayImage::filled(200, 60, 255);
        for k in 0..6 {
            let x0 = 40 + k * 22;
            for y in 10..50 {
                for x in x0..x0 + 4 {
                    img.set(x, y, 0);
                }
            }
        }
        img
    }

    #[test]
    fn upright_text_is_not_sheared() {
        let (_, s) = correct_italics(&bars().threshold(128));
        assert_eq!(s, 0.0);
    }

    #[test]
    fn recovers_synthetic_shear() {
        let img = shear_image(&bars(), 10.0, 49).threshold(128);
        let (fixed, s) = correct_italics(&img);
        assert!((s - 10.0).abs() <= 1.0, "{s}");
        let (_, again) = correct_italics(&fixed);
        assert_eq!(again, 0.0);
    }

    #[test]
    fn shear_is_capped() {
        let img = shear_image(&bars(), 25.0, 49).threshold(128);
        let (_, s) = correct_italics(&img);
        assert!(s.abs() <= MAX_SHEAR_DEGREES as f64);
    }
}
