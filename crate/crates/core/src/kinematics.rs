//! Leg forward/inverse kinematics and body orientation.
//!
//! Frame conventions used throughout the crate:
//!
//! * body frame: X forward, Y left, Z up, origin at the body's geometric center;
//! * hip frame: axes parallel to the body frame at zero pose, origin at the
//!   hip-roll joint of that leg;
//! * `theta1` rolls the whole leg about the hip X axis (right-handed);
//! * `theta2` pitches the upper link about the rolled Y axis (right-handed,
//!   so a positive angle swings the upper link backward from vertical);
//! * `theta3` is the interior angle between the upper and lower link at the
//!   knee. [`THETA3_STRAIGHT`] (= π) means the links are collinear.
//!
//! The knee always bends backward: the knee joint sits behind the line from
//! the pitch joint to the foot.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Mul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Knee value at which the upper and lower links are collinear.
pub const THETA3_STRAIGHT: f64 = PI;

/// Slack allowed when deciding whether a target sits on the workspace
/// boundary or an angle on a limit.
const GEOM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LegId {
    FL,
    FR,
    BL,
    BR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Front,
    Back,
}

impl LegId {
    /// Canonical ordering used for every per-leg array in the crate.
    pub const ALL: [LegId; 4] = [LegId::FL, LegId::FR, LegId::BL, LegId::BR];

    pub fn index(self) -> usize {
        match self {
            LegId::FL => 0,
            LegId::FR => 1,
            LegId::BL => 2,
            LegId::BR => 3,
        }
    }

    pub fn side(self) -> Side {
        match self {
            LegId::FL | LegId::BL => Side::Left,
            LegId::FR | LegId::BR => Side::Right,
        }
    }

    pub fn end(self) -> End {
        match self {
            LegId::FL | LegId::FR => End::Front,
            LegId::BL | LegId::BR => End::Back,
        }
    }

    /// +1 for left legs, -1 for right legs.
    pub fn side_sign(self) -> f64 {
        match self.side() {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    /// The leg on the other side at the same end.
    pub fn mirror(self) -> LegId {
        match self {
            LegId::FL => LegId::FR,
            LegId::FR => LegId::FL,
            LegId::BL => LegId::BR,
            LegId::BR => LegId::BL,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LegId::FL => "FL",
            LegId::FR => "FR",
            LegId::BL => "BL",
            LegId::BR => "BR",
        }
    }
}

impl std::fmt::Display for LegId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LegId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "FL" => Ok(LegId::FL),
            "FR" => Ok(LegId::FR),
            "BL" => Ok(LegId::BL),
            "BR" => Ok(LegId::BR),
            other => Err(format!("unknown leg `{other}` (expected FL, FR, BL or BR)")),
        }
    }
}

/// Closed interval of admissible joint angles, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn from_degrees(lo: f64, hi: f64) -> Self {
        Self::new(lo.to_radians(), hi.to_radians())
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    fn contains_with_slack(&self, v: f64) -> bool {
        v >= self.lo - GEOM_EPS && v <= self.hi + GEOM_EPS
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi
    }
}

/// Link lengths (meters) and joint limits of one leg. All four legs share it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegGeometry {
    pub l_hip: f64,
    pub l_upper: f64,
    pub l_lower: f64,
    pub hip_limits: Interval,
    pub upper_limits: Interval,
    pub lower_limits: Interval,
}

impl Default for LegGeometry {
    fn default() -> Self {
        Self {
            l_hip: 0.104,
            l_upper: 0.150,
            l_lower: 0.150,
            hip_limits: Interval::new(-FRAC_PI_2, FRAC_PI_2),
            upper_limits: Interval::from_degrees(-70.0, 170.0),
            lower_limits: Interval::from_degrees(30.0, 130.0),
        }
    }
}

impl LegGeometry {
    /// Returns the name of the first violated invariant, if any.
    pub fn validate(&self) -> Result<(), &'static str> {
        for (name, len) in [("l_hip", self.l_hip), ("l_upper", self.l_upper), ("l_lower", self.l_lower)] {
            if !(len.is_finite() && len > 0.0) {
                return Err(name);
            }
        }
        for (name, lim) in
            [("hip_limits", self.hip_limits), ("upper_limits", self.upper_limits), ("lower_limits", self.lower_limits)]
        {
            if !lim.is_valid() {
                return Err(name);
            }
        }
        Ok(())
    }

    pub fn max_reach(&self) -> f64 {
        self.l_upper + self.l_lower
    }

    pub fn limits(&self) -> [Interval; 3] {
        [self.hip_limits, self.upper_limits, self.lower_limits]
    }

    pub fn within_limits(&self, a: &JointAngles) -> bool {
        self.hip_limits.contains(a.theta1)
            && self.upper_limits.contains(a.theta2)
            && self.lower_limits.contains(a.theta3)
    }

    pub fn clamp(&self, a: JointAngles) -> JointAngles {
        JointAngles::new(
            self.hip_limits.clamp(a.theta1),
            self.upper_limits.clamp(a.theta2),
            self.lower_limits.clamp(a.theta3),
        )
    }
}

/// Hip, upper-leg and knee angles of one leg, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl JointAngles {
    pub const fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self { theta1, theta2, theta3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Angles for the opposite side that put the foot at the y-mirrored point.
    pub fn mirrored(self) -> Self {
        Self::new(-self.theta1, self.theta2, self.theta3)
    }

    pub fn is_finite(&self) -> bool {
        self.theta1.is_finite() && self.theta2.is_finite() && self.theta3.is_finite()
    }
}

/// A 3-vector in meters. Used for foot targets, mount offsets and world points.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Foot position expressed in the leg's hip frame.
pub type FootTarget = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &Vec3) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Body height above the ground, orientation and the lateral CoM lean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyPose {
    pub height: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub lateral_shift: f64,
}

impl BodyPose {
    pub fn level(height: f64) -> Self {
        Self { height, roll: 0.0, pitch: 0.0, yaw: 0.0, lateral_shift: 0.0 }
    }

    /// Position of the body center in the neutral (ground) frame.
    pub fn translation(&self) -> Vec3 {
        Vec3::new(0.0, self.lateral_shift, self.height)
    }
}

/// Row-major 3×3 matrix. Produced by the rotation helpers below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(pub [[f64; 3]; 3]);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix = RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn transpose(&self) -> RotationMatrix {
        let m = &self.0;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[j][i];
            }
        }
        RotationMatrix(t)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry-wise deviation of `RᵀR` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.transpose() * *self;
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.0[i][j] - want).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &RotationMatrix) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        RotationMatrix(out)
    }
}

impl Mul<Vec3> for RotationMatrix {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

pub fn rot_x(theta: f64) -> RotationMatrix {
    let (s, c) = theta.sin_cos();
    RotationMatrix([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
}

pub fn rot_y(theta: f64) -> RotationMatrix {
    let (s, c) = theta.sin_cos();
    RotationMatrix([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
}

pub fn rot_z(theta: f64) -> RotationMatrix {
    let (s, c) = theta.sin_cos();
    RotationMatrix([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// Body orientation `Rz(yaw) · Ry(pitch) · Rx(roll)`, mapping body-frame
/// vectors into the neutral frame.
pub fn body_rotation(pose: &BodyPose) -> RotationMatrix {
    rot_z(pose.yaw) * rot_y(pose.pitch) * rot_x(pose.roll)
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IkError {
    #[error("target ({x:.4}, {y:.4}, {z:.4}) is outside the workspace of leg {leg}", x = .target.x, y = .target.y, z = .target.z)]
    Unreachable { leg: LegId, target: FootTarget },
    #[error("leg {leg}: solution {angles:?} violates joint limits")]
    JointLimitViolation { leg: LegId, angles: JointAngles },
    #[error("non-finite target for leg {leg}")]
    NonFinite { leg: LegId },
}

/// Foot position in the hip frame. Total on finite input; limits are not checked.
pub fn leg_fk(angles: &JointAngles, geom: &LegGeometry, leg: LegId) -> FootTarget {
    let JointAngles { theta1, theta2, theta3 } = *angles;
    let knee = theta2 + theta3;
    let px = -geom.l_upper * theta2.sin() + geom.l_lower * knee.sin();
    let pz = -geom.l_upper * theta2.cos() + geom.l_lower * knee.cos();
    let py = leg.side_sign() * geom.l_hip;
    let (s1, c1) = theta1.sin_cos();
    Vec3::new(px, py * c1 - pz * s1, py * s1 + pz * c1)
}

/// Closed-form solution without limit enforcement. Still fails with
/// `Unreachable` when no geometric solution exists.
pub fn leg_ik_unchecked(target: &FootTarget, geom: &LegGeometry, leg: LegId) -> Result<JointAngles, IkError> {
    if !target.is_finite() {
        return Err(IkError::NonFinite { leg });
    }
    let unreachable = || IkError::Unreachable { leg, target: *target };
    let sy = leg.side_sign() * geom.l_hip;

    // Hip roll: rotate (sy, pz) onto (y, z) where pz < 0 is the sagittal-plane depth.
    let d2 = target.y * target.y + target.z * target.z;
    let pz2 = d2 - geom.l_hip * geom.l_hip;
    if pz2 < -GEOM_EPS {
        return Err(unreachable());
    }
    let pz = -pz2.max(0.0).sqrt();
    let theta1 = wrap_angle(target.z.atan2(target.y) - pz.atan2(sy));

    // Planar two-link problem in the rolled sagittal plane.
    let px = target.x;
    let r2 = px * px + pz * pz;
    let r = r2.sqrt();
    let (l2, l3) = (geom.l_upper, geom.l_lower);
    if r > l2 + l3 + GEOM_EPS || r < (l2 - l3).abs() - GEOM_EPS || r < GEOM_EPS {
        return Err(unreachable());
    }
    let cos_knee = ((l2 * l2 + l3 * l3 - r2) / (2.0 * l2 * l3)).clamp(-1.0, 1.0);
    let theta3 = cos_knee.acos();
    let cos_hip = ((l2 * l2 + r2 - l3 * l3) / (2.0 * l2 * r)).clamp(-1.0, 1.0);
    let foot_dir = (-px).atan2(-pz);
    let theta2 = wrap_angle(foot_dir + cos_hip.acos());

    Ok(JointAngles::new(theta1, theta2, theta3))
}

/// Closed-form leg IK with the backward-knee branch and joint limits enforced.
pub fn leg_ik(target: &FootTarget, geom: &LegGeometry, leg: LegId) -> Result<JointAngles, IkError> {
    let angles = leg_ik_unchecked(target, geom, leg)?;
    let [hip, upper, lower] = geom.limits();
    if hip.contains_with_slack(angles.theta1)
        && upper.contains_with_slack(angles.theta2)
        && lower.contains_with_slack(angles.theta3)
    {
        // Pull boundary hits inside so callers can rely on strict containment.
        Ok(geom.clamp(angles))
    } else {
        Err(IkError::JointLimitViolation { leg, angles })
    }
}

pub fn reachable(target: &FootTarget, geom: &LegGeometry, leg: LegId) -> bool {
    leg_ik(target, geom, leg).is_ok()
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Hip-joint positions relative to the body center, indexed by [`LegId::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mounts(pub [Vec3; 4]);

impl Mounts {
    /// Symmetric rectangle with half-length `dx` and half-width `dy`.
    pub fn symmetric(dx: f64, dy: f64) -> Self {
        let mut m = [Vec3::ZERO; 4];
        for leg in LegId::ALL {
            let fx = match leg.end() {
                End::Front => dx,
                End::Back => -dx,
            };
            m[leg.index()] = Vec3::new(fx, leg.side_sign() * dy, 0.0);
        }
        Mounts(m)
    }

    pub fn get(&self, leg: LegId) -> Vec3 {
        self.0[leg.index()]
    }
}

impl Default for Mounts {
    fn default() -> Self {
        Mounts::symmetric(0.120, 0.055)
    }
}

/// Feet directly under each hip, on the ground plane of the neutral frame.
pub fn neutral_stance(geom: &LegGeometry, mounts: &Mounts) -> [Vec3; 4] {
    LegId::ALL.map(|leg| {
        let m = mounts.get(leg);
        Vec3::new(m.x, m.y + leg.side_sign() * geom.l_hip, 0.0)
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("body pose infeasible: {failures:?}")]
pub struct BodyPoseInfeasible {
    pub failures: Vec<IkError>,
}

/// Hip-frame targets that realize `pose` while the feet stay at `world_feet`
/// (neutral-frame coordinates, ground at z = 0).
pub fn body_targets(pose: &BodyPose, world_feet: &[Vec3; 4], mounts: &Mounts) -> [FootTarget; 4] {
    let rt = body_rotation(pose).transpose();
    let t = pose.translation();
    LegId::ALL.map(|leg| rt * (world_feet[leg.index()] - t) - mounts.get(leg))
}

/// Body-level IK: hip-frame targets for `pose`, rejected if any leg cannot reach.
pub fn body_ik(
    pose: &BodyPose,
    world_feet: &[Vec3; 4],
    mounts: &Mounts,
    geom: &LegGeometry,
) -> Result<[FootTarget; 4], BodyPoseInfeasible> {
    let targets = body_targets(pose, world_feet, mounts);
    let failures: Vec<IkError> =
        LegId::ALL.iter().filter_map(|&leg| leg_ik(&targets[leg.index()], geom, leg).err()).collect();
    if failures.is_empty() {
        Ok(targets)
    } else {
        Err(BodyPoseInfeasible { failures })
    }
}

/// Inverse of [`body_targets`]: where a hip-frame foot lands in the neutral frame.
pub fn hip_to_world(pose: &BodyPose, target: &FootTarget, mount: &Vec3) -> Vec3 {
    body_rotation(pose) * (*target + *mount) + pose.translation()
}
