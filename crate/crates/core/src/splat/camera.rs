use nalgebra::{Isometry3, Matrix3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::geometry::{quaternion_from_wxyz, quaternion_to_wxyz};
use crate::error::{input, Result};

/// Pinhole camera. Camera space is x right, y down, z forward; pixel
/// `(u, v)` is sampled at its centre `(u + 0.5, v + 0.5)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CameraRecord", try_from = "CameraRecord")]
pub struct PinholeCamera {
    position: Vector3<f64>,
    /// Camera-to-world rotation.
    orientation: UnitQuaternion<f64>,
    focal: (f64, f64),
    principal: (f64, f64),
    /// `(width, height)` in pixels.
    resolution: (usize, usize),
}

impl PinholeCamera {
    pub fn new(
        position: Vector3<f64>,
        orientation: UnitQuaternion<f64>,
        focal: (f64, f64),
        principal: (f64, f64),
        resolution: (usize, usize),
    ) -> Result<Self> {
        if !(focal.0 > 0.0 && focal.1 > 0.0 && focal.0.is_finite() && focal.1.is_finite()) {
            return input(format!("focal lengths must be positive, got {focal:?}"));
        }
        if resolution.0 == 0 || resolution.1 == 0 {
            return input(format!("resolution must be at least 1x1, got {resolution:?}"));
        }
        if !(position.iter().all(|v| v.is_finite()) && principal.0.is_finite() && principal.1.is_finite()) {
            return input("camera position and principal point must be finite");
        }
        Ok(Self {
            position,
            orientation,
            focal,
            principal,
            resolution,
        })
    }

    /// Camera at `position` looking at `target`, with image-up roughly along
    /// `up`. The principal point is the image centre.
    pub fn look_at(
        position: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
        focal: f64,
        resolution: (usize, usize),
    ) -> Result<Self> {
        let forward = target - position;
        if forward.norm() == 0.0 {
            return input("camera position coincides with its target");
        }
        let forward = forward.normalize();
        let right = forward.cross(&up);
        if right.norm() < 1e-12 {
            return input("up vector is parallel to the viewing direction");
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[right, down, forward]));
        Self::new(
            position,
            UnitQuaternion::from_rotation_matrix(&rot),
            (focal, focal),
            (resolution.0 as f64 / 2.0, resolution.1 as f64 / 2.0),
            resolution,
        )
    }

    pub fn position(&self) -> &Vector3<f64> {
        &self.position
    }

    pub fn orientation(&self) -> &UnitQuaternion<f64> {
        &self.orientation
    }

    pub fn focal(&self) -> (f64, f64) {
        self.focal
    }

    pub fn principal(&self) -> (f64, f64) {
        self.principal
    }

    pub fn resolution(&self) -> (usize, usize) {
        self.resolution
    }

    /// World-to-camera rotation matrix.
    pub fn view_rotation(&self) -> Matrix3<f64> {
        self.orientation.inverse().to_rotation_matrix().into_inner()
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation.inverse_transform_vector(&(p - self.position))
    }

    /// Pixel coordinates of a camera-space point in front of the camera.
    pub fn project(&self, p_cam: &Vector3<f64>) -> (f64, f64) {
        (
            self.focal.0 * p_cam.x / p_cam.z + self.principal.0,
            self.focal.1 * p_cam.y / p_cam.z + self.principal.1,
        )
    }

    /// Same camera after a rigid motion of the whole scene.
    pub fn transformed(&self, motion: &Isometry3<f64>) -> Self {
        Self {
            position: motion.transform_vector(&self.position) + motion.translation.vector,
            orientation: motion.rotation * self.orientation,
            ..self.clone()
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraRecord {
    position: [f64; 3],
    /// `[w, x, y, z]`, camera-to-world.
    orientation: [f64; 4],
    focal: [f64; 2],
    principal: [f64; 2],
    /// `[width, height]`
    resolution: [usize; 2],
}

impl From<PinholeCamera> for CameraRecord {
    fn from(c: PinholeCamera) -> Self {
        Self {
            position: c.position.into(),
            orientation: quaternion_to_wxyz(&c.orientation),
            focal: [c.focal.0, c.focal.1],
            principal: [c.principal.0, c.principal.1],
            resolution: [c.resolution.0, c.resolution.1],
        }
    }
}

impl TryFrom<CameraRecord> for PinholeCamera {
    type Error = crate::Error;

    fn try_from(r: CameraRecord) -> Result<Self> {
        Self::new(
            r.position.into(),
            quaternion_from_wxyz(r.orientation)?,
            (r.focal[0], r.focal[1]),
            (r.principal[0], r.principal[1]),
            (r.resolution[0], r.resolution[1]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn look_at_puts_target_on_axis() {
        let cam = PinholeCamera::look_at(
            Vector3::new(3.0, 1.0, 2.0),
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::y(),
            50.0,
            (64, 48),
        )
        .unwrap();
        let p = cam.world_to_camera(&Vector3::zeros());
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.z, 14f64.sqrt(), epsilon = 1e-12);
        let (u, v) = cam.project(&p);
        assert_abs_diff_eq!(u, 32.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v, 24.0, epsilon = 1e-9);
        // world up projects above the centre (smaller v)
        let above = cam.world_to_camera(&Vector3::new(0.0, 0.5, 0.0));
        assert!(cam.project(&above).1 < 24.0);
    }

    #[test]
    fn validation() {
        let q = UnitQuaternion::identity();
        assert!(PinholeCamera::new(Vector3::zeros(), q, (0.0, 1.0), (0.0, 0.0), (4, 4)).is_err());
        assert!(PinholeCamera::new(Vector3::zeros(), q, (1.0, 1.0), (0.0, 0.0), (0, 4)).is_err());
        assert!(PinholeCamera::look_at(Vector3::zeros(), Vector3::zeros(), Vector3::y(), 1.0, (4, 4)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let cam = PinholeCamera::look_at(
            Vector3::new(0.0, 0.0, -2.0),
            Vector3::zeros(),
            Vector3::y(),
            40.0,
            (32, 24),
        )
        .unwrap();
        let text = serde_json::to_string(&cam).unwrap();
        let back: PinholeCamera = serde_json::from_str(&text).unwrap();
        assert_abs_diff_eq!(back.orientation().angle_to(cam.orientation()), 0.0, epsilon = 1e-12);
        assert_eq!(back.resolution(), (32, 24));
    }
}
