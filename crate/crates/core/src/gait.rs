//! Phase-offset gait clock, foot trajectories and static stability scoring.
//!
//! A plan is expressed as per-leg displacements from the neutral stance
//! point, in the neutral (ground) frame. The controller adds them to the
//! neutral footholds and feeds the result to body IK.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{LegId, Mounts, Side, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitPattern {
    #[default]
    Trot,
    Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideWalkMode {
    #[default]
    Linear,
    Rotation,
}

/// Step parameters requested by the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitCommand {
    pub pattern: GaitPattern,
    pub step_length_x: f64,
    pub step_length_y: f64,
    pub swing_height: f64,
    pub stance_depth: f64,
    pub side_walk_mode: SideWalkMode,
    pub cycle_period: f64,
}

impl Default for GaitCommand {
    fn default() -> Self {
        Self {
            pattern: GaitPattern::Trot,
            step_length_x: 0.0,
            step_length_y: 0.0,
            swing_height: 0.04,
            stance_depth: 0.0,
            side_walk_mode: SideWalkMode::Linear,
            cycle_period: default_cycle_period(GaitPattern::Trot),
        }
    }
}

pub fn default_cycle_period(pattern: GaitPattern) -> f64 {
    match pattern {
        GaitPattern::Trot => 0.8,
        GaitPattern::Walk => 1.6,
    }
}

/// Admissible ranges for [`GaitCommand`] fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitLimits {
    pub max_step_x: f64,
    pub max_step_y: f64,
    pub max_swing_height: f64,
    pub max_stance_depth: f64,
    pub min_cycle_period: f64,
    pub max_cycle_period: f64,
}

impl Default for GaitLimits {
    fn default() -> Self {
        Self {
            max_step_x: 0.10,
            max_step_y: 0.06,
            max_swing_height: 0.08,
            max_stance_depth: 0.02,
            min_cycle_period: 0.2,
            max_cycle_period: 4.0,
        }
    }
}

impl GaitCommand {
    /// Clamps every numeric field into `limits`; non-finite values fall back to the defaults.
    pub fn clamped(&self, limits: &GaitLimits) -> GaitCommand {
        let fin = |v: f64, d: f64| if v.is_finite() { v } else { d };
        let d = GaitCommand::default();
        GaitCommand {
            pattern: self.pattern,
            side_walk_mode: self.side_walk_mode,
            step_length_x: fin(self.step_length_x, 0.0).clamp(-limits.max_step_x, limits.max_step_x),
            step_length_y: fin(self.step_length_y, 0.0).clamp(-limits.max_step_y, limits.max_step_y),
            swing_height: fin(self.swing_height, d.swing_height).clamp(0.0, limits.max_swing_height),
            stance_depth: fin(self.stance_depth, 0.0).clamp(0.0, limits.max_stance_depth),
            cycle_period: fin(self.cycle_period, default_cycle_period(self.pattern))
                .clamp(limits.min_cycle_period, limits.max_cycle_period),
        }
    }

    /// Name of the first field outside `limits`.
    pub fn validate(&self, limits: &GaitLimits) -> Result<(), &'static str> {
        let checks = [
            ("step_length_x", self.step_length_x.abs() <= limits.max_step_x),
            ("step_length_y", self.step_length_y.abs() <= limits.max_step_y),
            ("swing_height", (0.0..=limits.max_swing_height).contains(&self.swing_height)),
            ("stance_depth", (0.0..=limits.max_stance_depth).contains(&self.stance_depth)),
            ("cycle_period", self.cycle_period > 0.0 && self.cycle_period.is_finite()),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(name),
            None => Ok(()),
        }
    }

    pub fn is_zero_motion(&self) -> bool {
        self.step_length_x == 0.0 && self.step_length_y == 0.0 && self.swing_height == 0.0 && self.stance_depth == 0.0
    }
}

/// Phase offsets (stance start, as a fraction of the cycle) and duty factor of a pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitPhase {
    pub offsets: [f64; 4],
    pub duty_factor: f64,
}

impl GaitPhase {
    pub fn for_pattern(pattern: GaitPattern) -> Self {
        // Indexed FL, FR, BL, BR.
        match pattern {
            GaitPattern::Trot => GaitPhase { offsets: [0.0, 0.5, 0.5, 0.0], duty_factor: 0.5 },
            // Swing windows: BR [0, .25), FR [.25, .5), BL [.5, .75), FL [.75, 1).
            GaitPattern::Walk => GaitPhase { offsets: [0.0, 0.5, 0.75, 0.25], duty_factor: 0.75 },
        }
    }

    pub fn offset(&self, leg: LegId) -> f64 {
        self.offsets[leg.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegPhase {
    pub is_stance: bool,
    /// Progress through the current stance or swing segment, in [0, 1).
    pub local_phase: f64,
}

pub fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs.
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Stance occupies `[0, duty)` of the leg's shifted phase, swing the remainder.
pub fn leg_phase(global_phase: f64, offset: f64, duty: f64) -> LegPhase {
    let shifted = wrap_phase(global_phase - offset);
    if shifted < duty {
        LegPhase { is_stance: true, local_phase: shifted / duty }
    } else {
        let local = ((shifted - duty) / (1.0 - duty)).min(1.0 - f64::EPSILON);
        LegPhase { is_stance: false, local_phase: local }
    }
}

/// Foot path while airborne: horizontal progress from -step/2 to +step/2 with a half-sine lift.
pub fn swing_trajectory(local_phase: f64, cmd: &GaitCommand) -> Vec3 {
    let u = local_phase - 0.5;
    Vec3::new(u * cmd.step_length_x, u * cmd.step_length_y, cmd.swing_height * (PI * local_phase).sin())
}

/// Foot path while loaded: linear sweep from +step/2 back to -step/2, optional ground press.
pub fn stance_trajectory(local_phase: f64, cmd: &GaitCommand) -> Vec3 {
    let u = 0.5 - local_phase;
    Vec3::new(u * cmd.step_length_x, u * cmd.step_length_y, -cmd.stance_depth * (PI * local_phase).sin())
}

/// Re-aims the lateral part of a linear step according to the side-walk mode.
///
/// In rotation mode the lateral step becomes a tangent about the body center,
/// `ẑ × r` at the leg's mount, normalized so the mean tangent length across
/// the four mounts equals `|step_length_y|`. Positive steps turn the body left.
pub fn steer_displacement(leg: LegId, base: Vec3, cmd: &GaitCommand, mounts: &Mounts) -> Vec3 {
    match cmd.side_walk_mode {
        SideWalkMode::Linear => base,
        SideWalkMode::Rotation => {
            if cmd.step_length_y == 0.0 {
                return Vec3::new(base.x, 0.0, base.z);
            }
            let progress = base.y / cmd.step_length_y;
            let mean_radius = LegId::ALL.iter().map(|&l| mounts.get(l).x.hypot(mounts.get(l).y)).sum::<f64>() / 4.0;
            let r = mounts.get(leg);
            let scale = if mean_radius > 0.0 { cmd.step_length_y / mean_radius } else { 0.0 };
            let (tx, ty) = (-r.y * scale, r.x * scale);
            Vec3::new(base.x + progress * tx, progress * ty, base.z)
        }
    }
}

/// Lean applied by the walk gait, in the neutral frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LeanParams {
    /// Peak lateral shift, meters.
    pub amplitude: f64,
    /// Width of the smoothstep transition around each swing-side change, fraction of cycle.
    pub ramp: f64,
}

impl Default for LeanParams {
    fn default() -> Self {
        Self { amplitude: 0.03, ramp: 0.10 }
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Walk-gait lateral shift: +amplitude (lean left) while right legs swing,
/// -amplitude while left legs swing, crossing zero at each side change.
pub fn walk_lean(global_phase: f64, lean: &LeanParams) -> f64 {
    let p = wrap_phase(global_phase);
    // -1 → +1 as the signed distance to a side change goes from -ramp/2 to +ramp/2.
    let edge = |d: f64| {
        if lean.ramp <= 0.0 {
            if d >= 0.0 {
                1.0
            } else {
                -1.0
            }
        } else {
            2.0 * smoothstep(d / lean.ramp + 0.5) - 1.0
        }
    };
    let g = if p < 0.25 {
        edge(p)
    } else if p < 0.75 {
        -edge(p - 0.5)
    } else {
        edge(p - 1.0)
    };
    lean.amplitude * g
}

/// Output of the planners for one instant of the cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootPlan {
    pub phase: f64,
    pub displacement: [Vec3; 4],
    pub stance: [bool; 4],
    pub lateral_shift: f64,
}

impl FootPlan {
    pub fn neutral(phase: f64) -> Self {
        FootPlan { phase, displacement: [Vec3::ZERO; 4], stance: [true; 4], lateral_shift: 0.0 }
    }

    /// Feet touching the ground: stance legs plus swing legs at zero lift.
    pub fn supporting(&self) -> [bool; 4] {
        std::array::from_fn(|i| self.stance[i] || self.displacement[i].z <= 0.0)
    }
}

/// Turns a command and a phase into a [`FootPlan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitPlanner {
    pub mounts: Mounts,
    pub lean: LeanParams,
}

impl GaitPlanner {
    pub fn new(mounts: Mounts, lean: LeanParams) -> Self {
        Self { mounts, lean }
    }

    pub fn plan(&self, global_phase: f64, cmd: &GaitCommand) -> FootPlan {
        match cmd.pattern {
            GaitPattern::Trot => self.plan_trot(global_phase, cmd),
            GaitPattern::Walk => self.plan_walk(global_phase, cmd),
        }
    }

    pub fn plan_trot(&self, global_phase: f64, cmd: &GaitCommand) -> FootPlan {
        self.plan_legs(global_phase, cmd, GaitPhase::for_pattern(GaitPattern::Trot), 0.0)
    }

    pub fn plan_walk(&self, global_phase: f64, cmd: &GaitCommand) -> FootPlan {
        let lean = walk_lean(global_phase, &self.lean);
        self.plan_legs(global_phase, cmd, GaitPhase::for_pattern(GaitPattern::Walk), lean)
    }

    fn plan_legs(&self, global_phase: f64, cmd: &GaitCommand, phase: GaitPhase, lateral_shift: f64) -> FootPlan {
        let p = wrap_phase(global_phase);
        let mut plan = FootPlan::neutral(p);
        plan.lateral_shift = lateral_shift;
        for leg in LegId::ALL {
            let lp = leg_phase(p, phase.offset(leg), phase.duty_factor);
            let base = if lp.is_stance {
                stance_trajectory(lp.local_phase, cmd)
            } else {
                swing_trajectory(lp.local_phase, cmd)
            };
            plan.displacement[leg.index()] = steer_displacement(leg, base, cmd, &self.mounts);
            plan.stance[leg.index()] = lp.is_stance;
        }
        plan
    }
}

/// Which side's leg is airborne in a walk plan, if any.
pub fn swinging_side(plan: &FootPlan) -> Option<Side> {
    LegId::ALL.iter().find(|l| !plan.stance[l.index()]).map(|l| l.side())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("support polygon needs at least 3 feet, got {0}")]
pub struct DegenerateSupport(pub usize);

/// Convex hull in counter-clockwise order (Andrew's monotone chain). Collinear points dropped.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Signed distance from `com` to the boundary of the support polygon (positive inside).
pub fn com_margin(stance_feet: &[(f64, f64)], com: (f64, f64)) -> Result<f64, DegenerateSupport> {
    if stance_feet.len() < 3 {
        return Err(DegenerateSupport(stance_feet.len()));
    }
    let hull = convex_hull(stance_feet);
    let n = hull.len();
    let edge = |i: usize| (hull[i], hull[(i + 1) % n]);
    let dist = (0..n.max(1))
        .map(|i| {
            let (a, b) = edge(i);
            segment_distance(com, a, b)
        })
        .fold(f64::INFINITY, f64::min);
    if n < 3 {
        return Ok(-dist);
    }
    let inside = (0..n).all(|i| {
        let (a, b) = edge(i);
        (b.0 - a.0) * (com.1 - a.1) - (b.1 - a.1) * (com.0 - a.0) >= 0.0
    });
    Ok(if inside { dist } else { -dist })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cmd(pattern: GaitPattern) -> GaitCommand {
        GaitCommand {
            pattern,
            step_length_x: 0.06,
            step_length_y: 0.0,
            swing_height: 0.04,
            cycle_period: default_cycle_period(pattern),
            ..GaitCommand::default()
        }
    }

    fn planner() -> GaitPlanner {
        GaitPlanner::new(Mounts::default(), LeanParams::default())
    }

    #[test]
    fn leg_phase_examples() {
        let a = leg_phase(0.25, 0.0, 0.5);
        assert!(a.is_stance);
        assert_abs_diff_eq!(a.local_phase, 0.5);
        let b = leg_phase(0.75, 0.0, 0.5);
        assert!(!b.is_stance);
        assert_abs_diff_eq!(b.local_phase, 0.5);
        let c = leg_phase(0.10, 0.5, 0.75);
        assert!(c.is_stance);
        assert_abs_diff_eq!(c.local_phase, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn duty_accounting_by_sweep() {
        for pattern in [GaitPattern::Trot, GaitPattern::Walk] {
            let phase = GaitPhase::for_pattern(pattern);
            for leg in LegId::ALL {
                let stance = (0..1000)
                    .filter(|k| leg_phase(*k as f64 / 1000.0, phase.offset(leg), phase.duty_factor).is_stance)
                    .count();
                assert_abs_diff_eq!(stance as f64 / 1000.0, phase.duty_factor, epsilon = 2e-3);
            }
        }
    }

    #[test]
    fn swing_examples() {
        let c = GaitCommand { step_length_x: 0.06, swing_height: 0.04, ..GaitCommand::default() };
        let mid = swing_trajectory(0.5, &c);
        assert_abs_diff_eq!(mid.x, 0.0);
        assert_abs_diff_eq!(mid.z, 0.04);
        let c = GaitCommand { step_length_y: 0.02, ..c };
        let start = swing_trajectory(0.0, &c);
        assert_eq!(start, Vec3::new(-0.03, -0.01, 0.0));
        assert_abs_diff_eq!(swing_trajectory(0.25, &c).z, 0.028284271247461905, epsilon = 1e-15);
    }

    #[test]
    fn stance_examples_and_seams() {
        let c = GaitCommand { step_length_x: 0.06, step_length_y: -0.03, stance_depth: 0.01, ..GaitCommand::default() };
        let zero_press = GaitCommand { stance_depth: 0.0, step_length_x: 0.0, step_length_y: 0.0, ..c };
        assert_eq!(stance_trajectory(0.5, &zero_press), Vec3::ZERO);
        assert_abs_diff_eq!(stance_trajectory(0.0, &c).x, 0.03);
        let before_one = 1.0 - 1e-12;
        assert!(stance_trajectory(before_one, &c).distance(&swing_trajectory(0.0, &c)) < 1e-9);
        assert!(swing_trajectory(before_one, &c).distance(&stance_trajectory(0.0, &c)) < 1e-9);
    }

    #[test]
    fn linear_steer_is_uniform() {
        let c = GaitCommand::default();
        let base = Vec3::new(0.03, 0.01, 0.0);
        for leg in LegId::ALL {
            assert_eq!(steer_displacement(leg, base, &c, &Mounts::default()), base);
        }
    }

    #[test]
    fn rotation_steer_spins() {
        let m = Mounts::default();
        let c = GaitCommand { side_walk_mode: SideWalkMode::Rotation, step_length_y: 0.04, ..GaitCommand::default() };
        let base = swing_trajectory(0.9, &c);
        let d = LegId::ALL.map(|l| steer_displacement(l, base, &c, &m));
        let sx = |l: LegId| d[l.index()].x.signum();
        assert_eq!(sx(LegId::FL), sx(LegId::BL));
        assert_eq!(sx(LegId::FR), sx(LegId::BR));
        assert_ne!(sx(LegId::FL), sx(LegId::FR));
        // Endpoint progress is ±1/2, so each tangent has |step_y|/2 length at the endpoints.
        let mean: f64 = LegId::ALL
            .iter()
            .map(|&l| {
                let t = steer_displacement(l, swing_trajectory(0.0, &c), &c, &m);
                t.x.hypot(t.y)
            })
            .sum::<f64>()
            / 4.0;
        assert_abs_diff_eq!(mean, 0.02, epsilon = 1e-12);

        let still = GaitCommand { step_length_y: 0.0, ..c };
        for l in LegId::ALL {
            let d = steer_displacement(l, stance_trajectory(0.3, &still), &still, &m);
            assert_eq!((d.x, d.y), (0.0, 0.0));
        }
    }

    #[test]
    fn trot_panels() {
        let p = planner();
        let c = cmd(GaitPattern::Trot);
        let q = p.plan_trot(0.25, &c);
        assert_eq!(q.stance, [true, false, false, true]); // FL, FR, BL, BR
        let q = p.plan_trot(0.75, &c);
        assert_eq!(q.stance, [false, true, true, false]);
        assert_eq!(q.lateral_shift, 0.0);
    }

    #[test]
    fn walk_panels() {
        let p = planner();
        let c = cmd(GaitPattern::Walk);
        let q = p.plan_walk(0.125, &c);
        assert_eq!(q.stance, [true, true, true, false]);
        assert!(q.lateral_shift > 0.0);
        let q = p.plan_walk(0.625, &c);
        assert_eq!(q.stance, [true, true, false, true]);
        assert!(q.lateral_shift < 0.0);
        let order: Vec<LegId> = [0.1, 0.3, 0.6, 0.8]
            .iter()
            .map(|&ph| {
                let q = p.plan_walk(ph, &c);
                *LegId::ALL.iter().find(|l| !q.stance[l.index()]).unwrap()
            })
            .collect();
        assert_eq!(order, vec![LegId::BR, LegId::FR, LegId::BL, LegId::FL]);
    }

    #[test]
    fn walk_lean_follows_swing_side() {
        let lean = LeanParams::default();
        let p = planner();
        let c = cmd(GaitPattern::Walk);
        for k in 0..1000 {
            let ph = k as f64 / 1000.0;
            let plan = p.plan_walk(ph, &c);
            let l = walk_lean(ph, &lean);
            match swinging_side(&plan) {
                Some(Side::Right) => assert!(l >= 0.0, "phase {ph}"),
                Some(Side::Left) => assert!(l <= 0.0, "phase {ph}"),
                None => {}
            }
        }
        assert_abs_diff_eq!(walk_lean(0.25, &lean), 0.03);
        assert_abs_diff_eq!(walk_lean(0.75, &lean), -0.03);
        assert_abs_diff_eq!(walk_lean(0.0, &lean), 0.0);
    }

    fn brute_margin(poly: &[(f64, f64)], p: (f64, f64)) -> f64 {
        // Oracle for convex CCW input: min point-to-segment distance, sign by half-plane test.
        let n = poly.len();
        let mut d = f64::INFINITY;
        let mut inside = true;
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            for k in 0..=20_000 {
                let t = k as f64 / 20_000.0;
                let q = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
                d = d.min((p.0 - q.0).hypot(p.1 - q.1));
            }
            inside &= (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0;
        }
        if inside {
            d
        } else {
            -d
        }
    }

    #[test]
    fn com_margin_examples() {
        let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert_abs_diff_eq!(com_margin(&square, (0.5, 0.5)).unwrap(), 0.5);
        assert_abs_diff_eq!(com_margin(&square, (1.0, 0.3)).unwrap(), 0.0);
        let tri = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        let m = com_margin(&tri, (0.25, 0.25)).unwrap();
        assert_abs_diff_eq!(m, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(m, brute_margin(&tri, (0.25, 0.25)), epsilon = 1e-4);
        assert!(com_margin(&tri, (1.0, 1.0)).unwrap() < 0.0);
        assert_eq!(com_margin(&tri[..2], (0.0, 0.0)), Err(DegenerateSupport(2)));
    }

    #[test]
    fn com_margin_matches_brute_force_on_quads() {
        let quad = [(-0.1, -0.15), (0.12, -0.16), (0.11, 0.15), (-0.13, 0.14)];
        for p in [(0.0, 0.0), (0.05, -0.1), (0.2, 0.0), (-0.12, 0.149)] {
            let got = com_margin(&quad, p).unwrap();
            assert_abs_diff_eq!(got, brute_margin(&quad, p), epsilon = 1e-5);
        }
    }

    #[test]
    fn collinear_support_is_never_positive() {
        let line = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)];
        assert_abs_diff_eq!(com_margin(&line, (1.0, 0.0)).unwrap(), 0.0);
        assert!(com_margin(&line, (1.0, 0.5)).unwrap() < 0.0);
    }

    #[test]
    fn clamp_and_validate() {
        let limits = GaitLimits::default();
        let wild =
            GaitCommand { step_length_x: 1.0, stance_depth: -1.0, cycle_period: f64::NAN, ..GaitCommand::default() };
        assert_eq!(wild.validate(&limits), Err("step_length_x"));
        let c = wild.clamped(&limits);
        assert_eq!(c.step_length_x, 0.10);
        assert_eq!(c.stance_depth, 0.0);
        assert_eq!(c.cycle_period, 0.8);
        assert!(c.validate(&limits).is_ok());
        let zero = GaitCommand { cycle_period: 0.0, ..GaitCommand::default() };
        assert_eq!(zero.validate(&limits), Err("cycle_period"));
    }
}
