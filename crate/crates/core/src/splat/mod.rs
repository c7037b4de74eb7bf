//! Forward renderer for 3D Gaussian primitives and the synthetic fixture
//! scenes used to exercise the loss and pairing code.

mod camera;
mod fixture;
mod geometry;
mod render;

pub use camera::PinholeCamera;
pub use fixture::{make_fixture_scene, FixtureScene, PRESETS};
pub use geometry::{
    covariance_from_scale_rotation, gaussian_density, quaternion_from_wxyz, quaternion_to_wxyz, GaussianPrimitive, Rgb,
};
pub use render::{render, RenderedFrame, NEAR_PLANE};
