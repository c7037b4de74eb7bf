use nalgebra::{Isometry3, Matrix3, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

pub type Rgb = [f64; 3];

/// Anisotropic 3D Gaussian with a constant colour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PrimitiveRecord", try_from = "PrimitiveRecord")]
pub struct GaussianPrimitive {
    mu: Vector3<f64>,
    scale: Vector3<f64>,
    rotation: UnitQuaternion<f64>,
    opacity: f64,
    color: Rgb,
}

impl GaussianPrimitive {
    pub fn new(
        mu: Vector3<f64>,
        scale: Vector3<f64>,
        rotation: UnitQuaternion<f64>,
        opacity: f64,
        color: Rgb,
    ) -> Result<Self> {
        if !mu.iter().all(|v| v.is_finite()) {
            return input("gaussian center must be finite");
        }
        if !scale.iter().all(|&s| s > 0.0 && s.is_finite()) {
            return input(format!("gaussian scale must be positive, got {:?}", scale.as_slice()));
        }
        if !(0.0..=1.0).contains(&opacity) {
            return input(format!("opacity must lie in [0, 1], got {opacity}"));
        }
        if !color.iter().all(|c| (0.0..=1.0).contains(c)) {
            return input(format!("colour components must lie in [0, 1], got {color:?}"));
        }
        Ok(Self {
            mu,
            scale,
            rotation,
            opacity,
            color,
        })
    }

    /// Isotropic primitive with standard deviation `sigma`.
    pub fn isotropic(mu: Vector3<f64>, sigma: f64, opacity: f64, color: Rgb) -> Result<Self> {
        Self::new(mu, Vector3::repeat(sigma), UnitQuaternion::identity(), opacity, color)
    }

    pub fn mu(&self) -> &Vector3<f64> {
        &self.mu
    }

    pub fn scale(&self) -> &Vector3<f64> {
        &self.scale
    }

    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.rotation
    }

    pub fn opacity(&self) -> f64 {
        self.opacity
    }

    pub fn color(&self) -> Rgb {
        self.color
    }

    pub fn covariance(&self) -> Matrix3<f64> {
        covariance_unchecked(&self.scale, &self.rotation)
    }

    /// Same primitive after a rigid motion of the whole scene.
    pub fn transformed(&self, motion: &Isometry3<f64>) -> Self {
        Self {
            mu: motion.transform_vector(&self.mu) + motion.translation.vector,
            rotation: motion.rotation * self.rotation,
            ..self.clone()
        }
    }

    /// Total order over every attribute; used to make compositing order
    /// independent of input order when depths tie.
    pub(crate) fn sort_key(&self) -> [f64; 14] {
        let q = self.rotation.quaternion();
        [
            self.mu.x,
            self.mu.y,
            self.mu.z,
            self.scale.x,
            self.scale.y,
            self.scale.z,
            q.w,
            q.i,
            q.j,
            q.k,
            self.opacity,
            self.color[0],
            self.color[1],
            self.color[2],
        ]
    }
}

fn covariance_unchecked(scale: &Vector3<f64>, rotation: &UnitQuaternion<f64>) -> Matrix3<f64> {
    let r = rotation.to_rotation_matrix().into_inner();
    let s2 = Matrix3::from_diagonal(&scale.component_mul(scale));
    let sigma = r * s2 * r.transpose();
    // symmetrize away rounding
    (sigma + sigma.transpose()) * 0.5
}

/// `R diag(s^2) R^T`.
pub fn covariance_from_scale_rotation(scale: &Vector3<f64>, rotation: &UnitQuaternion<f64>) -> Result<Matrix3<f64>> {
    if !scale.iter().all(|&s| s > 0.0 && s.is_finite()) {
        return input(format!("scale must be positive, got {:?}", scale.as_slice()));
    }
    Ok(covariance_unchecked(scale, rotation))
}

/// `exp(-1/2 (x - mu)^T Sigma^-1 (x - mu))`, evaluated in the primitive's
/// principal frame so no matrix inverse is needed.
pub fn gaussian_density(point: &Vector3<f64>, primitive: &GaussianPrimitive) -> f64 {
    let local = primitive.rotation.inverse_transform_vector(&(point - primitive.mu));
    let q: f64 = local
        .iter()
        .zip(primitive.scale.iter())
        .map(|(d, s)| (d / s).powi(2))
        .sum();
    (-0.5 * q).exp()
}

/// Quaternion from `[w, x, y, z]`, renormalized. Zero-norm input is rejected.
pub fn quaternion_from_wxyz(q: [f64; 4]) -> Result<UnitQuaternion<f64>> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    let norm = raw.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return input(format!("quaternion {q:?} cannot be normalized"));
    }
    Ok(UnitQuaternion::from_quaternion(raw))
}

pub fn quaternion_to_wxyz(q: &UnitQuaternion<f64>) -> [f64; 4] {
    let q = q.quaternion();
    [q.w, q.i, q.j, q.k]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrimitiveRecord {
    mu: [f64; 3],
    scale: [f64; 3],
    /// `[w, x, y, z]`
    rotation: [f64; 4],
    opacity: f64,
    color: Rgb,
}

impl From<GaussianPrimitive> for PrimitiveRecord {
    fn from(p: GaussianPrimitive) -> Self {
        Self {
            mu: p.mu.into(),
            scale: p.scale.into(),
            rotation: quaternion_to_wxyz(&p.rotation),
            opacity: p.opacity,
            color: p.color,
        }
    }
}

impl TryFrom<PrimitiveRecord> for GaussianPrimitive {
    type Error = crate::Error;

    fn try_from(r: PrimitiveRecord) -> Result<Self> {
        Self::new(
            r.mu.into(),
            r.scale.into(),
            quaternion_from_wxyz(r.rotation)?,
            r.opacity,
            r.color,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn covariance_examples() {
        let id = UnitQuaternion::identity();
        let c = covariance_from_scale_rotation(&Vector3::new(1.0, 1.0, 1.0), &id).unwrap();
        assert_abs_diff_eq!(c, Matrix3::identity(), epsilon = 1e-12);
        let c = covariance_from_scale_rotation(&Vector3::new(2.0, 1.0, 1.0), &id).unwrap();
        assert_abs_diff_eq!(c, Matrix3::from_diagonal(&Vector3::new(4.0, 1.0, 1.0)), epsilon = 1e-12);
        let rz = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), FRAC_PI_2);
        let c = covariance_from_scale_rotation(&Vector3::new(2.0, 1.0, 1.0), &rz).unwrap();
        assert_abs_diff_eq!(c, Matrix3::from_diagonal(&Vector3::new(1.0, 4.0, 1.0)), epsilon = 1e-12);
        assert!(covariance_from_scale_rotation(&Vector3::new(0.0, 1.0, 1.0), &id).is_err());
        assert!(covariance_from_scale_rotation(&Vector3::new(1.0, -1.0, 1.0), &id).is_err());
    }

    #[test]
    fn density_examples() {
        let unit = GaussianPrimitive::isotropic(Vector3::new(1.0, 2.0, 3.0), 1.0, 1.0, [1.0; 3]).unwrap();
        assert_eq!(gaussian_density(unit.mu(), &unit), 1.0);
        let p = Vector3::new(1.0, 3.0, 3.0);
        assert_abs_diff_eq!(gaussian_density(&p, &unit), 0.606_531, epsilon = 1e-6);
        let far = Vector3::new(4.0, 2.0, 3.0);
        assert_abs_diff_eq!(gaussian_density(&far, &unit), 0.011_109, epsilon = 1e-6);
    }

    #[test]
    fn density_agrees_with_explicit_inverse() {
        let q = UnitQuaternion::from_euler_angles(0.3, -0.7, 1.1);
        let g = GaussianPrimitive::new(
            Vector3::new(0.1, 0.2, 0.3),
            Vector3::new(0.5, 1.5, 0.2),
            q,
            0.5,
            [0.2; 3],
        )
        .unwrap();
        let inv = g.covariance().try_inverse().unwrap();
        let x = Vector3::new(0.4, -0.1, 0.35);
        let d = x - g.mu();
        let expected = (-0.5 * (d.transpose() * inv * d)[0]).exp();
        assert_abs_diff_eq!(gaussian_density(&x, &g), expected, epsilon = 1e-12);
    }

    #[test]
    fn constructor_validation() {
        let id = UnitQuaternion::identity();
        let ok = |o: f64, c: Rgb| GaussianPrimitive::new(Vector3::zeros(), Vector3::repeat(1.0), id, o, c);
        assert!(ok(0.5, [0.5; 3]).is_ok());
        assert!(ok(1.5, [0.5; 3]).is_err());
        assert!(ok(0.5, [0.5, 1.2, 0.0]).is_err());
        assert!(quaternion_from_wxyz([0.0; 4]).is_err());
    }

    #[test]
    fn json_roundtrip_uses_wxyz() {
        let q = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), FRAC_PI_2);
        let g = GaussianPrimitive::new(
            Vector3::new(1.0, 2.0, 3.0),
            Vector3::new(0.1, 0.2, 0.3),
            q,
            0.9,
            [1.0, 0.5, 0.0],
        )
        .unwrap();
        let json = serde_json::to_value(&g).unwrap();
        assert!((json["rotation"][0].as_f64().unwrap() - std::f64::consts::FRAC_PI_4.cos()).abs() < 1e-12);
        let back: GaussianPrimitive = serde_json::from_value(json).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"mu":[0,0,0],"scale":[0,1,1],"rotation":[1,0,0,0],"opacity":1,"color":[1,1,1]}"#;
        assert!(serde_json::from_str::<GaussianPrimitive>(bad).is_err());
    }

    proptest! {
        #[test]
        fn covariance_is_spd_with_scale_eigenvalues(
            s in proptest::array::uniform3(0.05f64..3.0),
            e in proptest::array::uniform3(-3.0f64..3.0),
        ) {
            let q = UnitQuaternion::from_euler_angles(e[0], e[1], e[2]);
            prop_assert!((q.norm() - 1.0).abs() < 1e-9);
            let c = covariance_from_scale_rotation(&Vector3::from(s), &q).unwrap();
            prop_assert!((c - c.transpose()).abs().max() <= 1e-12);
            let mut eig: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            let mut expected: Vec<f64> = s.iter().map(|v| v * v).collect();
            expected.sort_by(f64::total_cmp);
            for (a, b) in eig.iter().zip(&expected) {
                prop_assert!(*a > 0.0);
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b));
            }
        }

        #[test]
        fn density_in_unit_interval_and_decreasing_along_rays(
            dir in proptest::array::uniform3(-1.0f64..1.0),
            t1 in 0.01f64..3.0,
            dt in 0.01f64..3.0,
        ) {
            let v = Vector3::from(dir);
            prop_assume!(v.norm() > 1e-3);
            let q = UnitQuaternion::from_euler_angles(0.2, 0.4, -0.9);
            let g = GaussianPrimitive::new(Vector3::new(0.5, -0.5, 2.0), Vector3::new(0.7, 0.3, 1.1), q, 1.0, [0.0; 3]).unwrap();
            let a = gaussian_density(&(g.mu() + v * t1), &g);
            let b = gaussian_density(&(g.mu() + v * (t1 + dt)), &g);
            prop_assert!(a > 0.0 && a < 1.0);
            prop_assert!(b < a || b == 0.0);
        }
    }
}
