use std::cmp::Ordering;

use nalgebra::{Matrix2, Matrix2x3, Vector2};
use ndarray::{Array2, Array3};
use rayon::prelude::*;

use super::camera::PinholeCamera;
use super::geometry::{GaussianPrimitive, Rgb};
use crate::error::{input, Result};

/// Primitives closer than this (camera-space z) are not rendered.
pub const NEAR_PLANE: f64 = 1e-4;
/// Contributions end at this many standard deviations (squared Mahalanobis
/// radius 9).
const CUTOFF_SIGMA: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedFrame {
    /// `H x W x 3`, composited over the background.
    pub color: Array3<f64>,
    /// `H x W`, blended camera-space depth; 0 where nothing contributes.
    pub depth: Array2<f64>,
    /// `H x W`, accumulated opacity.
    pub alpha: Array2<f64>,
}

/// A primitive after EWA projection into one camera.
struct Splat {
    depth: f64,
    mean: Vector2<f64>,
    conic: Matrix2<f64>,
    /// Inclusive pixel bounds `[x0, x1] x [y0, y1]`.
    bounds: (usize, usize, usize, usize),
    opacity: f64,
    color: Rgb,
    key: [f64; 14],
}

fn project(g: &GaussianPrimitive, camera: &PinholeCamera) -> Option<Splat> {
    let t = camera.world_to_camera(g.mu());
    if t.z < NEAR_PLANE {
        return None;
    }
    let (fx, fy) = camera.focal();
    let w = camera.view_rotation();
    let cov_cam = w * g.covariance() * w.transpose();
    // Jacobian of the perspective projection at the centre
    #[rustfmt::skip]
    let jac = Matrix2x3::new(
        fx / t.z, 0.0, -fx * t.x / (t.z * t.z),
        0.0, fy / t.z, -fy * t.y / (t.z * t.z),
    );
    let cov2 = jac * cov_cam * jac.transpose();
    let (a, b, c) = (cov2[(0, 0)], 0.5 * (cov2[(0, 1)] + cov2[(1, 0)]), cov2[(1, 1)]);
    let det = a * c - b * b;
    if !(det > 0.0 && det.is_finite()) {
        return None;
    }
    let conic = Matrix2::new(c, -b, -b, a) / det;

    let (u, v) = camera.project(&t);
    let mid = 0.5 * (a + c);
    let lambda_max = mid + (mid * mid - det).max(0.0).sqrt();
    let radius = CUTOFF_SIGMA * lambda_max.sqrt();
    let (width, height) = camera.resolution();
    // pixel centres sit at integer + 0.5
    let x0 = (u - radius - 0.5).ceil().max(0.0);
    let x1 = (u + radius - 0.5).floor().min(width as f64 - 1.0);
    let y0 = (v - radius - 0.5).ceil().max(0.0);
    let y1 = (v + radius - 0.5).floor().min(height as f64 - 1.0);
    if !(x0 <= x1 && y0 <= y1) {
        return None;
    }
    Some(Splat {
        depth: t.z,
        mean: Vector2::new(u, v),
        conic,
        bounds: (x0 as usize, x1 as usize, y0 as usize, y1 as usize),
        opacity: g.opacity(),
        color: g.color(),
        key: g.sort_key(),
    })
}

fn front_to_back(a: &Splat, b: &Splat) -> Ordering {
    a.depth.total_cmp(&b.depth).then_with(|| {
        a.key
            .iter()
            .zip(&b.key)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

struct PixelValue {
    color: Rgb,
    depth: f64,
    alpha: f64,
}

fn shade(splats: &[Splat], x: usize, y: usize, background: Rgb) -> PixelValue {
    let p = Vector2::new(x as f64 + 0.5, y as f64 + 0.5);
    let mut color = [0.0; 3];
    let mut depth = 0.0;
    let mut transmittance = 1.0;
    for s in splats {
        let (x0, x1, y0, y1) = s.bounds;
        if x < x0 || x > x1 || y < y0 || y > y1 {
            continue;
        }
        let d = p - s.mean;
        let m = d.dot(&(s.conic * d));
        if m > CUTOFF_SIGMA * CUTOFF_SIGMA {
            continue;
        }
        let alpha = s.opacity * (-0.5 * m).exp();
        if alpha <= 0.0 {
            continue;
        }
        let weight = alpha * transmittance;
        for (acc, c) in color.iter_mut().zip(s.color) {
            *acc += c * weight;
        }
        depth += s.depth * weight;
        transmittance *= 1.0 - alpha;
        if transmittance == 0.0 {
            break;
        }
    }
    for (acc, bg) in color.iter_mut().zip(background) {
        *acc += transmittance * bg;
    }
    PixelValue {
        color,
        depth,
        alpha: 1.0 - transmittance,
    }
}

/// Front-to-back alpha compositing of EWA-projected Gaussians.
///
/// Each primitive contributes `opacity * G2d(p)` within three standard
/// deviations of its projected centre. Primitives are ordered by
/// camera-space depth, ties broken by their attributes, so the output does
/// not depend on the order of `scene`.
pub fn render(scene: &[GaussianPrimitive], camera: &PinholeCamera, background: Rgb) -> Result<RenderedFrame> {
    let (width, height) = camera.resolution();
    if width == 0 || height == 0 {
        return input("camera resolution must be at least 1x1");
    }
    let mut splats: Vec<Splat> = scene.iter().filter_map(|g| project(g, camera)).collect();
    splats.sort_by(front_to_back);

    let rows: Vec<Vec<PixelValue>> = (0..height)
        .into_par_iter()
        .map(|y| (0..width).map(|x| shade(&splats, x, y, background)).collect())
        .collect();

    let mut color = Array3::zeros((height, width, 3));
    let mut depth = Array2::zeros((height, width));
    let mut alpha = Array2::zeros((height, width));
    for (y, row) in rows.into_iter().enumerate() {
        for (x, px) in row.into_iter().enumerate() {
            for c in 0..3 {
                color[[y, x, c]] = px.color[c];
            }
            depth[[y, x]] = px.depth;
            alpha[[y, x]] = px.alpha;
        }
    }
    Ok(RenderedFrame { color, depth, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{UnitQuaternion, Vector3};

    fn axis_camera(size: usize) -> PinholeCamera {
        // pixel (size/2, size/2) looks straight down +z
        let c = size as f64 / 2.0;
        PinholeCamera::new(
            Vector3::zeros(),
            UnitQuaternion::identity(),
            (10.0, 10.0),
            (c, c),
            (size, size),
        )
        .unwrap()
    }

    fn on_axis(z: f64, opacity: f64, color: Rgb) -> GaussianPrimitive {
        // centre at pixel (4, 4) of a 9x9 camera with principal point 4.5
        GaussianPrimitive::isotropic(Vector3::new(0.0, 0.0, z), 0.1, opacity, color).unwrap()
    }

    #[test]
    fn empty_scene_is_background() {
        let f = render(&[], &axis_camera(9), [0.0; 3]).unwrap();
        assert!(f.color.iter().all(|&v| v == 0.0));
        assert!(f.depth.iter().all(|&v| v == 0.0));
        assert!(f.alpha.iter().all(|&v| v == 0.0));
        let f = render(&[], &axis_camera(4), [0.2, 0.3, 0.4]).unwrap();
        assert_eq!(f.color[[1, 2, 1]], 0.3);
    }

    #[test]
    fn opaque_gaussian_on_ray() {
        let f = render(&[on_axis(2.0, 1.0, [1.0, 0.0, 0.0])], &axis_camera(9), [0.0; 3]).unwrap();
        assert!((f.color[[4, 4, 0]] - 1.0).abs() < 1e-6);
        assert!(f.color[[4, 4, 1]].abs() < 1e-6);
        assert!((f.depth[[4, 4]] - 2.0).abs() < 1e-6);
        assert!((f.alpha[[4, 4]] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn alpha_equals_opacity_at_peak() {
        let f = render(&[on_axis(3.0, 0.37, [0.5; 3])], &axis_camera(9), [0.0; 3]).unwrap();
        assert!((f.alpha[[4, 4]] - 0.37).abs() < 1e-6);
        assert!(f.alpha.iter().all(|a| (0.0..=1.0).contains(a)));
    }

    #[test]
    fn front_gaussian_occludes_back_one() {
        let red = on_axis(1.0, 1.0, [1.0, 0.0, 0.0]);
        let blue = on_axis(2.0, 1.0, [0.0, 0.0, 1.0]);
        let cam = axis_camera(9);
        let a = render(&[red.clone(), blue.clone()], &cam, [0.0; 3]).unwrap();
        let b = render(&[blue, red], &cam, [0.0; 3]).unwrap();
        assert!((a.color[[4, 4, 0]] - 1.0).abs() < 1e-6);
        assert!(a.color[[4, 4, 2]].abs() < 1e-6);
        assert!((a.depth[[4, 4]] - 1.0).abs() < 1e-6);
        assert_eq!(a, b);
    }

    #[test]
    fn culls_behind_camera_and_off_screen() {
        let behind = on_axis(-1.0, 1.0, [1.0; 3]);
        let off = GaussianPrimitive::isotropic(Vector3::new(50.0, 0.0, 1.0), 0.1, 1.0, [1.0; 3]).unwrap();
        let f = render(&[behind, off], &axis_camera(9), [0.1; 3]).unwrap();
        assert!(f.color.iter().all(|&v| v == 0.1));
        assert!(f.alpha.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn occluder_dominates_depth_as_opacity_grows() {
        let cam = axis_camera(9);
        let mut last_err = f64::INFINITY;
        for o in [0.5, 0.9, 0.99, 1.0] {
            let front = on_axis(1.0, o, [1.0; 3]);
            let back = on_axis(3.0, 1.0, [1.0; 3]);
            let f = render(&[front, back], &cam, [0.0; 3]).unwrap();
            let err = (f.depth[[4, 4]] - 1.0).abs();
            assert!(err <= last_err);
            last_err = err;
        }
        assert!(last_err < 1e-12);
    }
}
