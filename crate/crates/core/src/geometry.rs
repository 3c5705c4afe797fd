//! Rigid transforms and timestamped poses.
//!
//! Rotations follow the intrinsic yaw-pitch-roll convention,
//! `R = Rz(yaw) * Ry(pitch) * Rx(roll)`, and transforms are active: a pose
//! matrix maps points expressed in the pose's local frame into the global frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating rotation blocks.
pub const RIGID_TOLERANCE: f64 = 1e-9;

/// A timestamped 6-DoF pose. Angles are radians, positions meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub timestamp_ns: i64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn new(timestamp_ns: i64, translation: [f64; 3], rpy: [f64; 3]) -> Self {
        Pose {
            timestamp_ns,
            x: translation[0],
            y: translation[1],
            z: translation[2],
            roll: rpy[0],
            pitch: rpy[1],
            yaw: rpy[2],
        }
    }

    pub fn identity(timestamp_ns: i64) -> Self {
        Pose::new(timestamp_ns, [0.0; 3], [0.0; 3])
    }

    pub fn validate(&self) -> Result<()> {
        if self.timestamp_ns < 0 {
            return Err(Error::InvalidPose(format!(
                "negative timestamp {}",
                self.timestamp_ns
            )));
        }
        let fields = [
            ("x", self.x),
            ("y", self.y),
            ("z", self.z),
            ("roll", self.roll),
            ("pitch", self.pitch),
            ("yaw", self.yaw),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidPose(format!("{name} is not finite ({v})")));
            }
        }
        Ok(())
    }

    pub fn translation(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// A 4x4 rigid transform, row-major, with last row `(0, 0, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 4]; 4]", into = "[[f64; 4]; 4]")]
pub struct AffineMatrix {
    m: [[f64; 4]; 4],
}

impl TryFrom<[[f64; 4]; 4]> for AffineMatrix {
    type Error = Error;

    fn try_from(rows: [[f64; 4]; 4]) -> Result<Self> {
        AffineMatrix::from_rows(rows)
    }
}

impl From<AffineMatrix> for [[f64; 4]; 4] {
    fn from(m: AffineMatrix) -> Self {
        m.m
    }
}

impl Default for AffineMatrix {
    fn default() -> Self {
        AffineMatrix::IDENTITY
    }
}

impl AffineMatrix {
    pub const IDENTITY: AffineMatrix = AffineMatrix {
        m: [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    };

    /// Builds a matrix from raw rows, checking the rigid-transform invariants.
    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NotRigid("non-finite entry".into()));
        }
        if rows[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::NotRigid(format!("last row is {:?}", rows[3])));
        }
        let m = AffineMatrix { m: rows };
        m.check_rotation(RIGID_TOLERANCE)?;
        Ok(m)
    }

    pub fn from_rotation_translation(r: [[f64; 3]; 3], t: [f64; 3]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..3 {
            m[i][..3].copy_from_slice(&r[i]);
            m[i][3] = t[i];
        }
        m[3][3] = 1.0;
        AffineMatrix { m }
    }

    pub fn translation_only(t: [f64; 3]) -> Self {
        let mut m = AffineMatrix::IDENTITY;
        for (i, v) in t.iter().enumerate() {
            m.m[i][3] = *v;
        }
        m
    }

    pub fn rows(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    pub fn rotation(&self) -> [[f64; 3]; 3] {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            row.copy_from_slice(&self.m[i][..3]);
        }
        r
    }

    pub fn translation(&self) -> [f64; 3] {
        [self.m[0][3], self.m[1][3], self.m[2][3]]
    }

    #[inline]
    pub fn transform_point(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2] + m[0][3],
            m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2] + m[1][3],
            m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2] + m[2][3],
        ]
    }

    #[inline]
    pub fn transform_vector(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Checks that the rotation block is orthonormal with determinant one.
    pub fn check_rotation(&self, tol: f64) -> Result<()> {
        let r = self.rotation();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > tol {
                    return Err(Error::NotRigid(format!(
                        "R^T R [{i}][{j}] = {dot}, expected {want}"
                    )));
                }
            }
        }
        let det = det3(&r);
        if (det - 1.0).abs() > tol {
            return Err(Error::NotRigid(format!("det(R) = {det}")));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &AffineMatrix) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn det3(r: &[[f64; 3]; 3]) -> f64 {
    r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
        - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
}

/// Rotation matrix `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn rotation_from_rpy(roll: f64, pitch: f64, yaw: f64) -> [[f64; 3]; 3] {
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sy, cy) = yaw.sin_cos();
    [
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ]
}

/// Local-to-global transform of a pose.
pub fn pose_to_matrix(pose: &Pose) -> Result<AffineMatrix> {
    pose.validate()?;
    let r = rotation_from_rpy(pose.roll, pose.pitch, pose.yaw);
    Ok(AffineMatrix::from_rotation_translation(r, pose.translation()))
}

/// Returns the transform that applies `b` first and then `a`.
pub fn compose(a: &AffineMatrix, b: &AffineMatrix) -> AffineMatrix {
    let mut out = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..3 {
                acc += a.m[i][k] * b.m[k][j];
            }
            if j == 3 {
                acc += a.m[i][3];
            }
            out[i][j] = acc;
        }
    }
    out[3][3] = 1.0;
    AffineMatrix { m: out }
}

/// Rigid inverse `(R^T, -R^T t)`.
pub fn inverse(m: &AffineMatrix) -> AffineMatrix {
    let r = m.rotation();
    let t = m.translation();
    let mut rt = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            rt[i][j] = r[j][i];
        }
    }
    let ti = [
        -(rt[0][0] * t[0] + rt[0][1] * t[1] + rt[0][2] * t[2]),
        -(rt[1][0] * t[0] + rt[1][1] * t[1] + rt[1][2] * t[2]),
        -(rt[2][0] * t[0] + rt[2][1] * t[1] + rt[2][2] * t[2]),
    ];
    AffineMatrix::from_rotation_translation(rt, ti)
}
