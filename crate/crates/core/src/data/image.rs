use crate::error::{Error, Result};

pub const MNIST_SIDE: usize = 28;
pub const REDUCED_SIDE: usize = 16;

/// Bilinear resize with corner-aligned grids: destination pixel `(i, j)`
/// samples source coordinate `(i·(R−1)/(r−1), j·(C−1)/(c−1))`.
pub fn resize_bilinear(src: &[f64], src_rows: usize, src_cols: usize, dst_rows: usize, dst_cols: usize) -> Result<Vec<f64>> {
    if src.len() != src_rows * src_cols || src_rows == 0 || src_cols == 0 {
        return Err(Error::invalid(format!(
            "image buffer of length {} is not {src_rows}×{src_cols}",
            src.len()
        )));
    }
    if dst_rows == 0 || dst_cols == 0 {
        return Err(Error::invalid("empty destination grid"));
    }
    let ys = sample_points(src_rows, dst_rows);
    let xs = sample_points(src_cols, dst_cols);
    let mut out = Vec::with_capacity(dst_rows * dst_cols);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = src[y0 * src_cols + x0] * (1.0 - fx) + src[y0 * src_cols + x1] * fx;
            let bottom = src[y1 * src_cols + x0] * (1.0 - fx) + src[y1 * src_cols + x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    Ok(out)
}

fn sample_points(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = if dst > 1 { (src - 1) as f64 / (dst - 1) as f64 } else { 0.0 };
    (0..dst)
        .map(|i| {
            let pos = i as f64 * scale;
            let lo = (pos.floor() as usize).min(src - 1);
            let hi = (lo + 1).min(src - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect()
}

/// 28×28 → 16×16, row-major in and out.
pub fn downsample_16(image: &[f64]) -> Result<Vec<f64>> {
    if image.len() != MNIST_SIDE * MNIST_SIDE {
        return Err(Error::invalid(format!("expected a 28×28 image, got {} pixels", image.len())));
    }
    resize_bilinear(image, MNIST_SIDE, MNIST_SIDE, REDUCED_SIDE, REDUCED_SIDE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_zero_images() {
        let out = downsample_16(&[37.5; 784]).unwrap();
        assert_eq!(out.len(), 256);
        assert!(out.iter().all(|&v| (v - 37.5).abs() < 1e-12));
        assert!(downsample_16(&[0.0; 784]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn corners_preserved() {
        let mut img = vec![0.0; 784];
        img[0] = 255.0;
        img[783] = 100.0;
        let out = downsample_16(&img).unwrap();
        assert_eq!(out[0], 255.0);
        assert_eq!(out[255], 100.0);
    }

    #[test]
    fn output_range() {
        let img: Vec<f64> = (0..784).map(|i| ((i * 37) % 256) as f64).collect();
        let out = downsample_16(&img).unwrap();
        assert!(out.iter().all(|&v| (0.0..=255.0).contains(&v)));
    }

    #[test]
    fn wrong_shape() {
        assert!(downsample_16(&[0.0; 783]).is_err());
        assert!(resize_bilinear(&[0.0; 4], 2, 3, 2, 2).is_err());
    }
}
