//! Rigid transforms stored as 4x4 homogeneous matrices.
//!
//! The matrix itself is the stored value, so serialization round-trips are
//! bit-exact (no quaternion re-derivation on load).

use nalgebra::{Matrix3, Matrix4, Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_io::Pose6D;

/// `T^{a}_{b}`: pose of frame `b` expressed in frame `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneousTransform(Matrix4<f64>);

impl HomogeneousTransform {
    pub fn identity() -> Self {
        HomogeneousTransform(Matrix4::identity())
    }

    pub fn from_pose(pose: &Pose6D) -> Self {
        let [qx, qy, qz, qw] = pose.orientation;
        let q = UnitQuaternion::from_quaternion(Quaternion::new(qw, qx, qy, qz));
        Self::from_parts(q.to_rotation_matrix().matrix(), &Vector3::from(pose.position))
    }

    pub fn from_parts(rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(translation);
        HomogeneousTransform(m)
    }

    pub fn translation(x: f64, y: f64, z: f64) -> Self {
        Self::from_parts(&Matrix3::identity(), &Vector3::new(x, y, z))
    }

    pub fn from_yaw(yaw: f64, translation: [f64; 3]) -> Self {
        let r = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
        Self::from_parts(r.matrix(), &Vector3::from(translation))
    }

    /// Parses 16 row-major values and checks rigidity (R Rᵀ = I within 1e-9,
    /// det +1, last row `[0, 0, 0, 1]`).
    pub fn from_row_major(values: &[f64]) -> Result<Self> {
        if values.len() != 16 {
            return Err(Error::Schema(format!(
                "transform needs 16 values, got {}",
                values.len()
            )));
        }
        let m = Matrix4::from_row_slice(values);
        let t = HomogeneousTransform(m);
        t.check_rigid()?;
        Ok(t)
    }

    pub fn check_rigid(&self) -> Result<()> {
        let m = &self.0;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema("non-finite transform entry".into()));
        }
        if m[(3, 0)] != 0.0 || m[(3, 1)] != 0.0 || m[(3, 2)] != 0.0 || m[(3, 3)] != 1.0 {
            return Err(Error::Schema("last row must be [0, 0, 0, 1]".into()));
        }
        let r = self.rotation();
        let err = (r * r.transpose() - Matrix3::identity()).abs().max();
        if err > 1e-9 || r.determinant() < 0.0 {
            return Err(Error::Schema(format!(
                "rotation block is not orthonormal (err {err:e})"
            )));
        }
        Ok(())
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                out[r * 4 + c] = self.0[(r, c)];
            }
        }
        out
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn position(&self) -> [f64; 3] {
        [self.0[(0, 3)], self.0[(1, 3)], self.0[(2, 3)]]
    }

    /// `self · other`.
    pub fn compose(&self, other: &HomogeneousTransform) -> HomogeneousTransform {
        HomogeneousTransform(self.0 * other.0)
    }

    /// Rigid inverse `[Rᵀ, -Rᵀ t]`.
    pub fn inverse(&self) -> HomogeneousTransform {
        let rt = self.rotation().transpose();
        let t = Vector3::from(self.position());
        Self::from_parts(&rt, &(-(rt * t)))
    }

    /// Rotation about the vertical axis, radians.
    pub fn yaw(&self) -> f64 {
        self.0[(1, 0)].atan2(self.0[(0, 0)])
    }

    /// Keeps translation and the yaw component of the rotation.
    pub fn project_yaw(&self) -> HomogeneousTransform {
        Self::from_yaw(self.yaw(), self.position())
    }

    pub fn to_pose(&self) -> Pose6D {
        let r = Rotation3::from_matrix_unchecked(self.rotation());
        let q = UnitQuaternion::from_rotation_matrix(&r);
        Pose6D {
            position: self.position(),
            orientation: [q.i, q.j, q.k, q.w],
        }
    }
}

impl Serialize for HomogeneousTransform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HomogeneousTransform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<f64> = Vec::deserialize(d)?;
        HomogeneousTransform::from_row_major(&v).map_err(serde::de::Error::custom)
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a % two_pi;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    } else if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}
