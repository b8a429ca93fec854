//! Frame-aware rigid-transform algebra and the ultrasound pixel-to-3D mapping.
//!
//! Transforms are tagged with the coordinate frame they map *from* and *to*;
//! composition is rejected unless the inner frames cancel. The convention is
//! that a transform with `from = B, to = A` maps B-frame coordinates into the
//! A-frame, so `compose(a_from_b, b_from_c)` yields the A-from-C map.

use nalgebra::{Matrix4, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five coordinate frames of the tracking chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameId {
    /// Phone camera frame.
    Cam,
    /// Probe marker-rig frame.
    Probe,
    /// Ultrasound image plane frame (mm, z = 0 on the plane).
    #[serde(rename = "US")]
    Us,
    /// Calibration phantom frame.
    Calib,
    /// Static reference (patient) frame.
    Ref,
}

impl std::fmt::Display for FrameId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FrameId::Cam => "Cam",
            FrameId::Probe => "Probe",
            FrameId::Us => "US",
            FrameId::Calib => "Calib",
            FrameId::Ref => "Ref",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("frame mismatch: cannot chain {outer} <- {inner_a} with {inner_b} <- {from}")]
    FrameMismatch {
        outer: FrameId,
        inner_a: FrameId,
        inner_b: FrameId,
        from: FrameId,
    },
    #[error("expected transform {expected_from} -> {expected_to}, got {got_from} -> {got_to}")]
    WrongFrames {
        expected_from: FrameId,
        expected_to: FrameId,
        got_from: FrameId,
        got_to: FrameId,
    },
    #[error("pixel ({0}, {1}) lies outside the ROI box")]
    OutsideRoi(f64, f64),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
}

/// Rigid transform (unit quaternion + translation in mm) between two tagged frames.
///
/// Maps points expressed in `from`-frame coordinates into the `to` frame.
/// The quaternion is renormalized after every operation so long chains of
/// compositions do not drift off the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: UnitQuaternion<f64>,
    translation: Vector3<f64>,
    from: FrameId,
    to: FrameId,
}

/// Serialized form: `{from, to, quat: [w,x,y,z], t_mm: [x,y,z]}`.
#[derive(Serialize, Deserialize)]
struct TransformRecord {
    from: FrameId,
    to: FrameId,
    quat: [f64; 4],
    t_mm: [f64; 3],
}

impl Serialize for RigidTransform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let q = self.rotation.quaternion();
        TransformRecord {
            from: self.from,
            to: self.to,
            quat: [q.w, q.i, q.j, q.k],
            t_mm: [self.translation.x, self.translation.y, self.translation.z],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RigidTransform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = TransformRecord::deserialize(d)?;
        let [w, x, y, z] = r.quat;
        Ok(RigidTransform::new(
            UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z)),
            Vector3::from(r.t_mm),
            r.from,
            r.to,
        ))
    }
}

impl RigidTransform {
    pub fn new(
        rotation: UnitQuaternion<f64>,
        translation: Vector3<f64>,
        from: FrameId,
        to: FrameId,
    ) -> Self {
        Self {
            rotation: rotation.renormalize(),
            translation,
            from,
            to,
        }
    }

    pub fn identity(from: FrameId, to: FrameId) -> Self {
        Self::new(UnitQuaternion::identity(), Vector3::zeros(), from, to)
    }

    /// Build from a rotation matrix; the matrix is projected onto the nearest
    /// unit quaternion.
    pub fn from_parts(
        rotation: nalgebra::Rotation3<f64>,
        translation: Vector3<f64>,
        from: FrameId,
        to: FrameId,
    ) -> Self {
        Self::new(
            UnitQuaternion::from_rotation_matrix(&rotation),
            translation,
            from,
            to,
        )
    }

    pub fn rotation(&self) -> UnitQuaternion<f64> {
        self.rotation
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.translation
    }

    pub fn from_frame(&self) -> FrameId {
        self.from
    }

    pub fn to_frame(&self) -> FrameId {
        self.to
    }

    /// Reject unless the transform carries exactly the given frame tags.
    pub fn expect_frames(&self, from: FrameId, to: FrameId) -> Result<(), GeomError> {
        if self.from != from || self.to != to {
            return Err(GeomError::WrongFrames {
                expected_from: from,
                expected_to: to,
                got_from: self.from,
                got_to: self.to,
            });
        }
        Ok(())
    }

    /// Homogeneous 4x4 matrix (column-vector convention).
    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(self.rotation.to_rotation_matrix().matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Angular distance to another transform, in degrees.
    pub fn rotation_angle_to(&self, other: &RigidTransform) -> f64 {
        self.rotation.angle_to(&other.rotation).to_degrees()
    }

    /// Euclidean distance between the two translations, in mm.
    pub fn translation_distance_to(&self, other: &RigidTransform) -> f64 {
        (self.translation - other.translation).norm()
    }
}

/// Chain two transforms: `compose(a, b)` requires `a.from == b.to` and maps
/// `b.from` coordinates into `a.to`.
pub fn compose(a: &RigidTransform, b: &RigidTransform) -> Result<RigidTransform, GeomError> {
    if a.from != b.to {
        return Err(GeomError::FrameMismatch {
            outer: a.to,
            inner_a: a.from,
            inner_b: b.to,
            from: b.from,
        });
    }
    Ok(RigidTransform::new(
        a.rotation * b.rotation,
        a.rotation * b.translation + a.translation,
        b.from,
        a.to,
    ))
}

/// Invert a transform, swapping its frame tags.
pub fn invert(t: &RigidTransform) -> RigidTransform {
    let inv_rot = t.rotation.inverse();
    RigidTransform::new(inv_rot, -(inv_rot * t.translation), t.to, t.from)
}

/// Apply a transform to a point expressed in `t.from` coordinates.
pub fn transform_point(t: &RigidTransform, p: &Vector3<f64>) -> Vector3<f64> {
    t.rotation * p + t.translation
}

/// Axis-aligned ROI box in full-frame pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoiBox {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl RoiBox {
    pub fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    /// True when the (possibly sub-pixel) full-frame point lies inside the box.
    pub fn contains(&self, i: f64, j: f64) -> bool {
        i >= self.x as f64
            && j >= self.y as f64
            && i <= (self.x + self.width) as f64
            && j <= (self.y + self.height) as f64
    }
}

/// Ultrasound image intrinsics: the active ROI and the isotropic pixel scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UsIntrinsics {
    /// Pixel scale in mm/pixel.
    pub s_us: f64,
    /// Active image region within the raw machine frame.
    pub roi: RoiBox,
}

/// Admissible imaging depths in mm: {5, 10, ..., 100}.
pub const DEPTH_STEPS_MM: std::ops::RangeInclusive<u32> = 1..=20;

/// The imaging depth (mm) nearest to `depth_mm` from the admissible set.
pub fn nearest_depth_setting(depth_mm: f64) -> f64 {
    let step = (depth_mm / 5.0).round().clamp(1.0, 20.0);
    step * 5.0
}

impl UsIntrinsics {
    pub fn new(s_us: f64, roi: RoiBox) -> Result<Self, GeomError> {
        if !(s_us > 0.0) {
            return Err(GeomError::InvalidIntrinsics(format!(
                "pixel scale must be positive, got {s_us}"
            )));
        }
        if roi.width < 32 || roi.height < 32 {
            return Err(GeomError::InvalidIntrinsics(format!(
                "ROI must be at least 32x32 px, got {}x{}",
                roi.width, roi.height
            )));
        }
        Ok(Self { s_us, roi })
    }

    /// Imaging depth covered by the ROI, in mm.
    pub fn depth_mm(&self) -> f64 {
        self.s_us * self.roi.height as f64
    }

    /// Map a full-frame pixel onto the US image plane (mm, z = 0).
    ///
    /// `i` runs along columns, `j` along rows; the ROI origin maps to (0,0,0).
    pub fn pixel_to_us(&self, i: f64, j: f64) -> Result<Vector3<f64>, GeomError> {
        if !self.roi.contains(i, j) {
            return Err(GeomError::OutsideRoi(i, j));
        }
        Ok(Vector3::new(
            self.s_us * (i - self.roi.x as f64),
            self.s_us * (j - self.roi.y as f64),
            0.0,
        ))
    }

    /// Inverse of [`pixel_to_us`](Self::pixel_to_us) for points on the plane.
    pub fn us_to_pixel(&self, p: &Vector3<f64>) -> (f64, f64) {
        (
            p.x / self.s_us + self.roi.x as f64,
            p.y / self.s_us + self.roi.y as f64,
        )
    }
}
