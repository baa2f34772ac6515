use proptest::prelude::*;
use quadruped_core::kinematics::Vec3;
use quadruped_core::simulator::odometry_update;

fn feet() -> [Vec3; 4] {
    [
        Vec3::new(0.12, 0.159, 0.0),
        Vec3::new(0.12, -0.159, 0.0),
        Vec3::new(-0.12, 0.159, 0.0),
        Vec3::new(-0.12, -0.159, 0.0),
    ]
}

/// Moves the feet as the body would see them after the body moved by (dx, dy, dθ).
fn body_moved(f: &[Vec3; 4], dx: f64, dy: f64, dth: f64) -> [Vec3; 4] {
    let (s, c) = (-dth).sin_cos();
    f.map(|p| {
        let (x, y) = (p.x - dx, p.y - dy);
        Vec3::new(c * x - s * y, s * x + c * y, p.z)
    })
}

fn residual(prev: &[Vec3; 4], new: &[Vec3; 4], stance: &[bool; 4], m: (f64, f64, f64)) -> f64 {
    let (s, c) = m.2.sin_cos();
    (0..4)
        .filter(|&i| stance[i])
        .map(|i| {
            let (x, y) = (c * new[i].x - s * new[i].y + m.0, s * new[i].x + c * new[i].y + m.1);
            (x - prev[i].x).powi(2) + (y - prev[i].y).powi(2)
        })
        .sum()
}

/// Coarse-to-fine exhaustive search over (dx, dy, dθ).
fn grid_fit(prev: &[Vec3; 4], new: &[Vec3; 4], stance: &[bool; 4]) -> (f64, f64, f64) {
    let mut center = (0.0, 0.0, 0.0);
    let mut span = (0.05, 0.05, 0.2);
    let n = 12;
    for _ in 0..14 {
        let mut best = (f64::INFINITY, center);
        for i in -n..=n {
            for j in -n..=n {
                for k in -n..=n {
                    let m = (
                        center.0 + span.0 * i as f64 / n as f64,
                        center.1 + span.1 * j as f64 / n as f64,
                        center.2 + span.2 * k as f64 / n as f64,
                    );
                    let r = residual(prev, new, stance, m);
                    if r < best.0 {
                        best = (r, m);
                    }
                }
            }
        }
        center = best.1;
        span = (span.0 / 4.0, span.1 / 4.0, span.2 / 4.0);
    }
    center
}

#[test]
fn noisy_fit_matches_grid_search() {
    let prev = feet();
    let noise = [(0.002, -0.001), (-0.0015, 0.0007), (0.0004, 0.0021), (-0.0011, -0.0017)];
    let moved = body_moved(&prev, 0.013, -0.004, 0.035);
    let new: [Vec3; 4] = std::array::from_fn(|i| moved[i] + Vec3::new(noise[i].0, noise[i].1, 0.0));
    for stance in [[true; 4], [true, true, false, true], [true, false, false, true]] {
        let got = odometry_update(&prev, &new, &stance).unwrap();
        let want = grid_fit(&prev, &new, &stance);
        assert!((got.0 - want.0).abs() < 1e-6, "{got:?} vs {want:?}");
        assert!((got.1 - want.1).abs() < 1e-6, "{got:?} vs {want:?}");
        assert!((got.2 - want.2).abs() < 1e-6, "{got:?} vs {want:?}");
    }
}

proptest! {
    #[test]
    fn rigid_motion_is_recovered_exactly(
        dx in -0.05f64..0.05, dy in -0.05f64..0.05, dth in -0.3f64..0.3, mask in 1u8..16,
    ) {
        let stance: [bool; 4] = std::array::from_fn(|i| mask & (1 << i) != 0);
        let count = stance.iter().filter(|s| **s).count();
        let prev = feet();
        let new = body_moved(&prev, dx, dy, dth);
        let (ox, oy, oth) = odometry_update(&prev, &new, &stance).unwrap();
        if count >= 2 {
            prop_assert!((ox - dx).abs() < 1e-9 && (oy - dy).abs() < 1e-9 && (oth - dth).abs() < 1e-9);
        } else {
            // One foot pins translation only.
            prop_assert_eq!(oth, 0.0);
        }
        if dth == 0.0 {
            prop_assert!((ox - dx).abs() < 1e-12 && (oy - dy).abs() < 1e-12);
        }
    }
}
