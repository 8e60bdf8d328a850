use crate::error::{Error, Result};
use crate::tensor::Tensor2;

/// Rotates each square image (one per row) by `angle` degrees about its
/// center using bilinear interpolation. Reads outside the image are 0.
pub fn rotate_flat_images(images: &Tensor2, side: usize, angle: f64) -> Result<Tensor2> {
    if side == 0 || images.cols() != side * side {
        return Err(Error::Shape(format!(
            "{} columns is not a {side}x{side} image",
            images.cols()
        )));
    }
    let (s, c) = angle.to_radians().sin_cos();
    let center = (side as f64 - 1.0) / 2.0;
    let mut out = Tensor2::zeros(images.rows(), images.cols());

    // inverse map: source = R(-angle) · (dst - center) + center
    let coords: Vec<(f64, f64)> = (0..side * side)
        .map(|p| {
            let dx = (p % side) as f64 - center;
            let dy = (p / side) as f64 - center;
            (center + c * dx + s * dy, center - s * dx + c * dy)
        })
        .collect();

    for r in 0..images.rows() {
        let src = images.row(r);
        let pixel = |x: isize, y: isize| -> f64 {
            if x < 0 || y < 0 || x >= side as isize || y >= side as isize {
                0.0
            } else {
                src[y as usize * side + x as usize]
            }
        };
        for (dst, &(sx, sy)) in out.row_mut(r).iter_mut().zip(&coords) {
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as isize, y0 as isize);
            let top = pixel(x0, y0) * (1.0 - fx) + pixel(x0 + 1, y0) * fx;
            let bottom = pixel(x0, y0 + 1) * (1.0 - fx) + pixel(x0 + 1, y0 + 1) * fx;
            *dst = top * (1.0 - fy) + bottom * fy;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(side: usize) -> Tensor2 {
        let data = (0..2 * side * side)
            .map(|i| ((i * 37) % 101) as f64 / 100.0)
            .collect();
        Tensor2::new(2, side * side, data).unwrap()
    }

    #[test]
    fn zero_angle_is_identity() {
        for side in [5, 6, 28] {
            let img = ramp(side);
            let out = rotate_flat_images(&img, side, 0.0).unwrap();
            for (a, b) in img.data().iter().zip(out.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn four_quarter_turns_compose_to_identity() {
        for side in [5, 8] {
            let img = ramp(side);
            let mut cur = img.clone();
            for _ in 0..4 {
                cur = rotate_flat_images(&cur, side, 90.0).unwrap();
            }
            for (a, b) in img.data().iter().zip(cur.data()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quarter_turn_moves_corner() {
        // 3x3 with a single lit pixel at (x=2, y=1)
        let mut img = Tensor2::zeros(1, 9);
        img.data_mut()[5] = 1.0;
        let out = rotate_flat_images(&img, 3, 90.0).unwrap();
        let lit: Vec<usize> = (0..9).filter(|&i| out.data()[i] > 0.5).collect();
        assert_eq!(lit.len(), 1);
        assert_ne!(lit[0], 5);
        assert_ne!(lit[0], 4);
    }

    #[test]
    fn zero_image_stays_zero() {
        let img = Tensor2::zeros(3, 49);
        for angle in [13.0, 45.0, 200.0] {
            assert!(rotate_flat_images(&img, 7, angle)
                .unwrap()
                .data()
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn non_square_is_shape_error() {
        let img = Tensor2::zeros(1, 10);
        assert!(matches!(
            rotate_flat_images(&img, 3, 10.0),
            Err(Error::Shape(_))
        ));
    }
}
