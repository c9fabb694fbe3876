//! Identities of the spin tensor, the coupling α and the Hodge star on
//! random constrained inputs.

use nalgebra::{Matrix4, Vector3};
use presym::evolution_space::{AmbientTangent, EvolutionPoint};
use presym::minkowski::{
    bar, coupling_alpha_raw, hodge_star, lab_compose, metric, outer_bar, spin_tensor, FourVector, LabFrameState,
    SkewEndomorphism,
};
use proptest::prelude::*;

const TOL: f64 = 1e-11;

/// Levi-Civita symbol on (x, y, z, t) with ε_txyz = +1.
fn levi_civita(idx: [usize; 4]) -> f64 {
    // position of t first: (t, x, y, z) = (3, 0, 1, 2)
    let relabel = |a: usize| (a + 1) % 4;
    let p = idx.map(relabel);
    let mut sign = 1.0;
    for a in 0..4 {
        for b in a + 1..4 {
            if p[a] == p[b] {
                return 0.0;
            }
            if p[a] > p[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Star by index gymnastics: lower with g, raise both indices, contract with ½ε.
fn star_by_components(a: &Matrix4<f64>) -> Matrix4<f64> {
    let g = metric();
    let lowered = g * a;
    let upper = g * lowered * g;
    let mut out = Matrix4::zeros();
    for p in 0..4 {
        for q in 0..4 {
            let mut sum = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    sum += 0.5 * levi_civita([p, q, c, d]) * upper[(c, d)];
                }
            }
            out[(p, q)] = sum;
        }
    }
    g * out
}

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c)| Vector3::new(a, b, c))
}

fn unit3() -> impl Strategy<Value = Vector3<f64>> {
    vec3().prop_filter("non-degenerate direction", |v| v.norm() > 0.1).prop_map(|v| v.normalize())
}

fn point() -> impl Strategy<Value = EvolutionPoint> {
    (vec3(), vec3(), unit3(), -2.0..2.0f64).prop_map(|(r, v, u, t)| {
        // |v| < √3 · 0.55 < 0.96
        let v = v * 0.55;
        EvolutionPoint::from_lab(&LabFrameState::new(r * 3.0, t, v, u).unwrap())
    })
}

fn field() -> impl Strategy<Value = SkewEndomorphism> {
    (vec3(), vec3()).prop_map(|(e, b)| SkewEndomorphism::from_fields(e, b))
}

/// Tangent vector at `p` built from free components.
fn tangent_at(p: &EvolutionPoint, a: Vector3<f64>, b: Vector3<f64>, c: f64) -> AmbientTangent {
    let (i, j) = (p.i(), p.j());
    // δI ⊥ I, δJ ⊥ J with J̄δI + ĪδJ = 0
    let raw_i = FourVector::new(a.x, a.y, a.z, c);
    let di = raw_i - i * (bar(i) * raw_i)[0];
    let raw_j = FourVector::new(b.x, b.y, b.z, -c);
    let mut dj = raw_j + j * (bar(j) * raw_j)[0];
    // fix the mixed constraint along I (Ī I = 1, J̄ I = 0, so this keeps J̄δJ = 0)
    let mixed = (bar(j) * di)[0] + (bar(i) * dj)[0];
    dj -= i * mixed;
    AmbientTangent::new(FourVector::zeros(), di, dj)
}

/// `δΩ` for a tangent vector, from the definition `Ω = ⋆(I J̄ - J Ī)`.
fn omega_variation(p: &EvolutionPoint, d: &AmbientTangent) -> Matrix4<f64> {
    let (i, j) = (p.i(), p.j());
    let m = outer_bar(&d.di, j) + outer_bar(i, &d.dj) - outer_bar(&d.dj, i) - outer_bar(j, &d.di);
    *hodge_star(&m).unwrap().matrix()
}

#[test]
fn star_matches_levi_civita_contraction() {
    let samples = [
        SkewEndomorphism::from_fields(Vector3::new(0.3, -1.2, 0.4), Vector3::new(0.7, 0.1, -0.5)),
        SkewEndomorphism::electric(Vector3::new(0.0, 0.0, 1.0)),
        SkewEndomorphism::magnetic(Vector3::new(1.0, 2.0, 3.0)),
    ];
    for f in samples {
        let oracle = star_by_components(f.matrix());
        assert!((f.star().matrix() - oracle).amax() < 1e-15, "{oracle}");
        assert!((f.star().star().matrix() + f.matrix()).amax() < 1e-15);
    }
}

#[test]
fn spin_tensor_at_rest_rotates_about_the_spin() {
    let state = LabFrameState::new(Vector3::zeros(), 0.0, Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0)).unwrap();
    let (_, i, j) = lab_compose(&state);
    let omega = spin_tensor(&i, &j).unwrap();
    assert_eq!(omega, SkewEndomorphism::magnetic(Vector3::new(0.0, 0.0, 1.0)));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn alpha_has_two_forms(p in point(), f in field()) {
        let omega = p.spin_tensor();
        let by_trace = -0.5 * (omega.matrix() * f.matrix()).trace();
        let by_star = coupling_alpha_raw(p.i(), p.j(), &f);
        prop_assert!((by_trace - by_star).abs() < TOL * (1.0 + by_star.abs()));
    }

    #[test]
    fn starred_field_on_the_frame(p in point(), f in field()) {
        let (i, j) = (p.i(), p.j());
        let omega = p.spin_tensor();
        let alpha = p.alpha(&f);
        let star = f.star();
        let on_i = star.apply(i) - (omega.matrix() * f.matrix() * j + j * alpha);
        let on_j = star.apply(j) - (omega.matrix() * f.matrix() * i + i * alpha);
        let scale = 1.0 + i.amax() * j.amax() * f.norm();
        prop_assert!(on_i.amax() < TOL * scale * scale, "{on_i}");
        prop_assert!(on_j.amax() < TOL * scale * scale, "{on_j}");
    }

    #[test]
    fn spin_tensor_cubes_to_minus_itself(p in point()) {
        let o = *p.spin_tensor().matrix();
        let scale = o.amax().powi(3).max(1.0);
        prop_assert!((o * o * o + o).amax() < TOL * scale);
    }

    #[test]
    fn spin_tensor_kills_the_frame(p in point()) {
        let o = p.spin_tensor();
        prop_assert!(o.apply(p.i()).amax() < TOL * o.norm() * p.i().amax());
        prop_assert!(o.apply(p.j()).amax() < TOL * o.norm() * p.j().amax());
    }

    #[test]
    fn frame_variation_is_a_trace(p in point(), a in vec3(), b in vec3(), c in -1.0..1.0f64,
                                  a2 in vec3(), b2 in vec3(), c2 in -1.0..1.0f64) {
        let d1 = tangent_at(&p, a, b, c);
        let d2 = tangent_at(&p, a2, b2, c2);
        prop_assert!(d1.is_tangent(&p, 1e-10) && d2.is_tangent(&p, 1e-10));
        let o = *p.spin_tensor().matrix();
        let lhs = (bar(&d1.di) * o * d2.di)[0] - (bar(&d1.dj) * o * d2.dj)[0];
        let rhs = -(omega_variation(&p, &d1) * o * omega_variation(&p, &d2)).trace();
        let scale = 1.0 + lhs.abs() + o.amax().powi(3) * d1.to_vector().amax() * d2.to_vector().amax();
        prop_assert!((lhs - rhs).abs() < TOL * scale * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn rotation_trace_identity(p in point(), w in vec3(), a in vec3(), b in vec3(), c in -1.0..1.0f64) {
        let lambda = *SkewEndomorphism::magnetic(w).matrix();
        let o = *p.spin_tensor().matrix();
        let d = omega_variation(&p, &tangent_at(&p, a, b, c));
        let lhs = ((lambda * o - o * lambda) * o * d).trace();
        let rhs = -0.5 * (lambda * d).trace();
        let scale = 1.0 + o.amax().powi(3) * lambda.amax() * d.amax();
        prop_assert!((lhs - rhs).abs() < TOL * scale, "{lhs} vs {rhs}");
    }
}
