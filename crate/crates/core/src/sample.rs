//! Random states, fields and Lorentz generators for audits and property tests.

use nalgebra::{Matrix3, Matrix4, Vector3};
use rand::Rng;

use crate::evolution_space::EvolutionPoint;
use crate::minkowski::{hat, LabFrameState, SkewEndomorphism};

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Position at distance `r_range` from the origin, speed below `max_speed`,
/// isotropic spin direction.
pub fn lab_state<R: Rng + ?Sized>(rng: &mut R, r_range: (f64, f64), max_speed: f64) -> LabFrameState {
    let r = unit_vector(rng) * rng.random_range(r_range.0..r_range.1);
    let v = unit_vector(rng) * rng.random_range(0.0..max_speed);
    let t = rng.random_range(-1.0..1.0);
    LabFrameState::new(r, t, v, unit_vector(rng)).expect("sampled state satisfies invariants")
}

pub fn point<R: Rng + ?Sized>(rng: &mut R, r_range: (f64, f64), max_speed: f64) -> EvolutionPoint {
    EvolutionPoint::from_lab(&lab_state(rng, r_range, max_speed))
}

/// Generic skew endomorphism with `E`, `B` components uniform in `[-scale, scale]`.
pub fn skew<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> SkewEndomorphism {
    let mut c = || rng.random_range(-scale..scale);
    SkewEndomorphism::from_fields(Vector3::new(c(), c(), c()), Vector3::new(c(), c(), c()))
}

/// Infinitesimal spatial rotation `diag(j(ω), 0)` with `|ω_i| ≤ scale`.
pub fn rotation_generator<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> SkewEndomorphism {
    let mut c = || rng.random_range(-scale..scale);
    SkewEndomorphism::magnetic(Vector3::new(c(), c(), c()))
}

/// Random proper rotation of `R³` (axis-angle via Rodrigues).
pub fn rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    let axis = unit_vector(rng);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let k = hat(&axis);
    Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
}

/// The matrix `diag(R, 1)`.
pub fn lift(rot: &Matrix3<f64>) -> Matrix4<f64> {
    crate::fields::spatial_rotation(rot)
}

/// States at radius in `r_range` with speed in `speed_range` and isotropic
/// spin: a family with a wide spread of `⟨u, r × v⟩`.
pub fn spin_orbit_family<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    r_range: (f64, f64),
    speed_range: (f64, f64),
) -> Vec<LabFrameState> {
    (0..n)
        .map(|_| {
            let r = unit_vector(rng) * rng.random_range(r_range.0..r_range.1);
            let v = unit_vector(rng) * rng.random_range(speed_range.0..speed_range.1);
            LabFrameState::new(r, 0.0, v, unit_vector(rng)).expect("sampled state satisfies invariants")
        })
        .collect()
}

/// Like [`spin_orbit_family`] but with `u ⊥ r × v`, so `⟨u, r × v⟩ = 0`.
pub fn perpendicular_family<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    r_range: (f64, f64),
    speed_range: (f64, f64),
) -> Vec<LabFrameState> {
    spin_orbit_family(rng, n, r_range, speed_range)
        .into_iter()
        .map(|mut s| {
            let normal = s.r.cross(&s.v).normalize();
            let mut u = unit_vector(rng);
            u -= normal * normal.dot(&u);
            s.u = u.normalize();
            s
        })
        .collect()
}
