use super::{BinaryImage, GrayImage, PreprocessError};

/// Global Otsu threshold over a 256-bin histogram.
///
/// Returns the level `t` maximizing the between-class variance of the split
/// `[0, t] | (t, 255]`; among exactly tied maximizers the smallest `t` wins.
pub fn otsu_threshold(hist: &[u64; 256]) -> Result<u8, PreprocessError> {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(PreprocessError::EmptyHistogram);
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(PreprocessError::ZeroVariance);
    }
    let total_sum: u128 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();

    let mut w0: u128 = 0;
    let mut s0: u128 = 0;
    let mut best: Option<(u8, f64)> = None;
    for (t, &count) in hist.iter().enumerate() {
        w0 += count as u128;
        s0 += t as u128 * count as u128;
        let w1 = total as u128 - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let s1 = total_sum - s0;
        // w0*w1*(mu0-mu1)^2 == (w1*s0 - w0*s1)^2 / (w0*w1)
        let diff = (w1 * s0) as f64 - (w0 * s1) as f64;
        let score = diff * diff / (w0 as f64 * w1 as f64);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((t as u8, score));
        }
    }
    best.map(|(t, _)| t).ok_or(PreprocessError::ZeroVariance)
}

/// Otsu-binarize a gray image. Returns the binary image and the threshold used.
pub fn binarize(image: &GrayImage) -> Result<(BinaryImage, u8), PreprocessError> {
    let t = otsu_threshold(&image.histogram())?;
    Ok((image.threshold(t), t))
}
