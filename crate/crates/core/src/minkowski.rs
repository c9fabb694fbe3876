//! Minkowski space `R^{3,1}` with index order `(x, y, z, t)` and metric
//! `diag(-1, -1, -1, +1)`.
//!
//! Skew endomorphisms (`Ā = -A` where `Ā = g⁻¹ Aᵀ g`) stand in for 2-forms via
//! `F(P, S) = P̄ F S`. Every such matrix has the block shape
//!
//! ```text
//! [ j(B)  E ]
//! [ Eᵀ    0 ]
//! ```
//!
//! with `j(w) r = w × r`. The Hodge star is oriented so that a purely
//! electric-like `F` maps to `⋆F = [[-j(E), 0], [0, 0]]`; equivalently the
//! Levi-Civita symbol has `ε_{txyz} = +1`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, RowVector4, Vector3, Vector4};

use crate::error::{Constraint, Error, Result};

/// A point or vector of Minkowski space, components `(x, y, z, t)`.
pub type FourVector = Vector4<f64>;

/// Index of the time component.
pub const T: usize = 3;

/// The Minkowski metric `diag(-1, -1, -1, +1)`.
pub fn metric() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(-1.0, -1.0, -1.0, 1.0))
}

/// `ā = g(a, ·)` as a row vector.
#[inline]
pub fn bar(a: &FourVector) -> RowVector4<f64> {
    RowVector4::new(-a[0], -a[1], -a[2], a[3])
}

/// `ā b = -a_x b_x - a_y b_y - a_z b_z + a_t b_t`.
#[inline]
pub fn mink_inner(a: &FourVector, b: &FourVector) -> f64 {
    -a[0] * b[0] - a[1] * b[1] - a[2] * b[2] + a[3] * b[3]
}

/// The endomorphism `a b̄ : x ↦ a (b̄ x)`.
#[inline]
pub fn outer_bar(a: &FourVector, b: &FourVector) -> Matrix4<f64> {
    a * bar(b)
}

/// g-transpose `Ā = g⁻¹ Aᵀ g`.
pub fn g_transpose(a: &Matrix4<f64>) -> Matrix4<f64> {
    let g = metric();
    g * a.transpose() * g
}

/// Cross-product matrix: `hat(w) r = w × r`.
#[inline]
pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0)
}

/// Inverse of [`hat`] on antisymmetric 3×3 matrices.
#[inline]
pub fn unhat(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

pub fn spatial(a: &FourVector) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

pub fn four(r: &Vector3<f64>, t: f64) -> FourVector {
    FourVector::new(r[0], r[1], r[2], t)
}

/// Largest entry of `Ā + A`.
pub fn skew_residual(a: &Matrix4<f64>) -> f64 {
    (g_transpose(a) + a).amax()
}

/// A g-skew endomorphism of Minkowski space: field strengths, spin tensors,
/// their duals, and moment matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewEndomorphism(Matrix4<f64>);

impl SkewEndomorphism {
    pub const CONSTRUCTION_TOL: f64 = 1e-12;

    pub fn zero() -> Self {
        SkewEndomorphism(Matrix4::zeros())
    }

    /// Validates g-skewness to `1e-12` relative to the matrix scale.
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        Self::with_tolerance(m, Self::CONSTRUCTION_TOL)
    }

    pub fn with_tolerance(m: Matrix4<f64>, tol: f64) -> Result<Self> {
        let residual = skew_residual(&m);
        if residual > tol * m.amax().max(1.0) {
            return Err(Error::NotSkew { residual });
        }
        Ok(SkewEndomorphism(m))
    }

    /// Exact skew part `(A - Ā)/2` of an arbitrary matrix.
    pub fn skew_part(m: &Matrix4<f64>) -> Self {
        SkewEndomorphism((m - g_transpose(m)) * 0.5)
    }

    /// Builds `[[j(b), e], [eᵀ, 0]]`.
    pub fn from_fields(e: Vector3<f64>, b: Vector3<f64>) -> Self {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat(&b));
        for k in 0..3 {
            m[(k, T)] = e[k];
            m[(T, k)] = e[k];
        }
        SkewEndomorphism(m)
    }

    pub fn electric(e: Vector3<f64>) -> Self {
        Self::from_fields(e, Vector3::zeros())
    }

    pub fn magnetic(b: Vector3<f64>) -> Self {
        Self::from_fields(Vector3::zeros(), b)
    }

    /// The `E` block (last column, spatial rows).
    pub fn e_part(&self) -> Vector3<f64> {
        Vector3::new(self.0[(0, T)], self.0[(1, T)], self.0[(2, T)])
    }

    /// The `B` in the spatial block `j(B)`.
    pub fn b_part(&self) -> Vector3<f64> {
        unhat(&self.0.fixed_view::<3, 3>(0, 0).into_owned())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4<f64> {
        self.0
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        self.0 * v
    }

    /// Frobenius norm of the matrix.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Hodge dual.
    pub fn star(&self) -> Self {
        let e = self.e_part();
        let b = self.b_part();
        SkewEndomorphism::from_fields(b, -e)
    }

    /// `[A, B] = AB - BA`, again skew.
    pub fn commutator(&self, other: &Self) -> Self {
        SkewEndomorphism(self.0 * other.0 - other.0 * self.0)
    }
}

impl Add for SkewEndomorphism {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        SkewEndomorphism(self.0 + rhs.0)
    }
}

impl AddAssign for SkewEndomorphism {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for SkewEndomorphism {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        SkewEndomorphism(self.0 - rhs.0)
    }
}

impl Neg for SkewEndomorphism {
    type Output = Self;
    fn neg(self) -> Self {
        SkewEndomorphism(-self.0)
    }
}

impl Mul<f64> for SkewEndomorphism {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        SkewEndomorphism(self.0 * rhs)
    }
}

impl Mul<FourVector> for &SkewEndomorphism {
    type Output = FourVector;
    fn mul(self, rhs: FourVector) -> FourVector {
        self.0 * rhs
    }
}

impl Mul<&SkewEndomorphism> for &SkewEndomorphism {
    type Output = Matrix4<f64>;
    fn mul(self, rhs: &SkewEndomorphism) -> Matrix4<f64> {
        self.0 * rhs.0
    }
}

/// Hodge star of a raw matrix; rejects inputs whose skewness residual
/// exceeds `1e-10`.
pub fn hodge_star(f: &Matrix4<f64>) -> Result<SkewEndomorphism> {
    let residual = skew_residual(f);
    if residual > 1e-10 {
        return Err(Error::NotSkew { residual });
    }
    Ok(SkewEndomorphism::skew_part(f).star())
}

/// `[I² - 1, J² + 1, Ī J]`.
pub fn constraint_residuals(i: &FourVector, j: &FourVector) -> [f64; 3] {
    [
        mink_inner(i, i) - 1.0,
        mink_inner(j, j) + 1.0,
        mink_inner(i, j),
    ]
}

/// Checks the evolution-space relations on `(I, J)` to `tol`.
pub fn check_constraints(i: &FourVector, j: &FourVector, tol: f64) -> Result<()> {
    let [c1, c2, c3] = constraint_residuals(i, j);
    for (which, residual) in [
        (Constraint::UnitTimelike, c1),
        (Constraint::UnitSpacelike, c2),
        (Constraint::Orthogonal, c3),
    ] {
        if residual.abs() > tol {
            return Err(Error::ConstraintViolated { which, residual });
        }
    }
    if i[T] <= 0.0 {
        return Err(Error::ConstraintViolated {
            which: Constraint::FuturePointing,
            residual: i[T],
        });
    }
    Ok(())
}

/// `j(I, J) = ⋆(I J̄ - J Ī)` with no constraint checks. Bilinear in
/// `(I, J)`, so it is defined on the whole ambient space.
pub fn spin_tensor_raw(i: &FourVector, j: &FourVector) -> SkewEndomorphism {
    SkewEndomorphism(outer_bar(i, j) - outer_bar(j, i)).star()
}

/// The normalized spin tensor `Ω = j(I, J)` of a constrained pair.
pub fn spin_tensor(i: &FourVector, j: &FourVector) -> Result<SkewEndomorphism> {
    check_constraints(i, j, 1e-9)?;
    Ok(spin_tensor_raw(i, j))
}

/// `α = Ī ⋆(F) J` with no constraint checks.
#[inline]
pub fn coupling_alpha_raw(i: &FourVector, j: &FourVector, f: &SkewEndomorphism) -> f64 {
    (bar(i) * f.star().matrix() * j)[0]
}

/// The spin-field coupling `α = Ī ⋆(F) J = -½ Tr(Ω F)`.
pub fn coupling_alpha(i: &FourVector, j: &FourVector, f: &SkewEndomorphism) -> Result<f64> {
    check_constraints(i, j, 1e-9)?;
    Ok(coupling_alpha_raw(i, j, f))
}

/// A state seen by the observer `U = (0, 0, 0, 1)`: position `r` at time `t`,
/// velocity `v` and unit spin direction `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabFrameState {
    pub r: Vector3<f64>,
    pub t: f64,
    pub v: Vector3<f64>,
    pub u: Vector3<f64>,
}

impl LabFrameState {
    pub fn new(r: Vector3<f64>, t: f64, v: Vector3<f64>, u: Vector3<f64>) -> Result<Self> {
        let speed = v.norm();
        if !(speed < 1.0) {
            return Err(Error::Superluminal { speed });
        }
        let norm = u.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitSpin { norm });
        }
        Ok(LabFrameState { r, t, v, u })
    }

    /// `(1 - |v|²)^{-1/2}`
    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.v.norm_squared()).sqrt()
    }

    /// `(1 - ⟨u, v⟩²)^{-1/2}`
    pub fn gamma_tilde(&self) -> f64 {
        let uv = self.u.dot(&self.v);
        1.0 / (1.0 - uv * uv).sqrt()
    }
}

/// `(X, I, J)` from lab data: `I = γ(v, 1)`, `J = γ̃(u, ⟨u, v⟩)`.
pub fn lab_compose(state: &LabFrameState) -> (FourVector, FourVector, FourVector) {
    let x = four(&state.r, state.t);
    let i = four(&state.v, 1.0) * state.gamma();
    let j = four(&state.u, state.u.dot(&state.v)) * state.gamma_tilde();
    (x, i, j)
}

/// Inverse of [`lab_compose`] for the rest observer `U = (0, 0, 0, 1)`.
pub fn lab_decompose(
    x: &FourVector,
    i: &FourVector,
    j: &FourVector,
    observer: &FourVector,
) -> Result<LabFrameState> {
    if (observer - FourVector::new(0.0, 0.0, 0.0, 1.0)).amax() > 1e-15 {
        return Err(Error::UnsupportedObserver);
    }
    if i[T] <= 0.0 {
        return Err(Error::NotFuturePointing);
    }
    let v = spatial(i) / i[T];
    let js = spatial(j);
    let norm = js.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateSpin { norm2: mink_inner(j, j) });
    }
    LabFrameState::new(spatial(x), x[T], v, js / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::*;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol
        }
    }

    #[test]
    fn inner_products() {
        let t = FourVector::new(0.0, 0.0, 0.0, 1.0);
        let z = FourVector::new(0.0, 0.0, 1.0, 0.0);
        assert_eq!(mink_inner(&t, &t), 1.0);
        assert_eq!(mink_inner(&z, &z), -1.0);
        let a = FourVector::new(1.0, 2.0, 3.0, 4.0);
        let b = FourVector::new(4.0, 3.0, 2.0, 1.0);
        assert_eq!(mink_inner(&a, &b), -12.0);
        assert_eq!((bar(&a) * b)[0], -12.0);
        assert_eq!(a.transpose() * metric() * b, bar(&a) * b);
    }

    #[test]
    fn star_of_zero_and_electric_field() {
        assert_eq!(SkewEndomorphism::zero().star(), SkewEndomorphism::zero());
        let e = Vector3::new(0.0, 0.0, 1.0);
        let star = SkewEndomorphism::electric(e).star();
        let mut expected = Matrix4::zeros();
        expected.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-hat(&e)));
        assert_eq!(*star.matrix(), expected);
    }

    #[test]
    fn hodge_star_rejects_non_skew() {
        let mut m = Matrix4::zeros();
        m[(0, 1)] = 1.0;
        assert!(matches!(hodge_star(&m), Err(Error::NotSkew { .. })));
        let f = SkewEndomorphism::from_fields(Vector3::new(1.0, 2.0, 3.0), Vector3::new(-1.0, 0.5, 2.0));
        assert_eq!(hodge_star(f.matrix()).unwrap(), f.star());
    }

    #[test]
    fn constructors_produce_skew_matrices() {
        let f = SkewEndomorphism::from_fields(Vector3::new(0.3, -1.0, 2.0), Vector3::new(1.5, 0.1, -0.7));
        assert!(skew_residual(f.matrix()) < 1e-15);
        assert!(SkewEndomorphism::new(*f.matrix()).is_ok());
        assert_eq!(f.e_part(), Vector3::new(0.3, -1.0, 2.0));
        assert_eq!(f.b_part(), Vector3::new(1.5, 0.1, -0.7));
    }

    #[test]
    fn spin_tensor_at_rest() {
        let i = FourVector::new(0.0, 0.0, 0.0, 1.0);
        let j = FourVector::new(0.0, 0.0, 1.0, 0.0);
        let omega = spin_tensor(&i, &j).unwrap();
        assert_eq!(omega, SkewEndomorphism::magnetic(Vector3::z()));
    }

    #[test]
    fn spin_tensor_names_failed_constraint() {
        let i = FourVector::new(0.0, 0.0, 0.0, 1.0);
        let j = FourVector::new(0.0, 0.0, 1.0, 0.1);
        match spin_tensor(&i, &j) {
            Err(Error::ConstraintViolated { which, .. }) => assert_eq!(which, Constraint::UnitSpacelike),
            other => panic!("unexpected {other:?}"),
        }
        let j = FourVector::new(0.0, 0.0, 1.0, 0.0);
        let i = FourVector::new(0.0, 0.0, 0.0, -1.0);
        match spin_tensor(&i, &j) {
            Err(Error::ConstraintViolated { which, .. }) => assert_eq!(which, Constraint::FuturePointing),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alpha_vanishes_at_rest_in_electric_field() {
        let state = LabFrameState::new(Vector3::zeros(), 0.0, Vector3::zeros(), Vector3::new(0.6, 0.0, 0.8)).unwrap();
        let (_, i, j) = lab_compose(&state);
        let f = SkewEndomorphism::electric(Vector3::new(0.1, -0.4, 2.0));
        assert!(coupling_alpha(&i, &j, &f).unwrap().abs() < 1e-16);
        assert_eq!(coupling_alpha(&i, &j, &SkewEndomorphism::zero()).unwrap(), 0.0);
    }

    #[test]
    fn compose_known_values() {
        let state = LabFrameState::new(Vector3::zeros(), 0.0, Vector3::zeros(), Vector3::z()).unwrap();
        let (_, i, j) = lab_compose(&state);
        assert_eq!(i, FourVector::new(0.0, 0.0, 0.0, 1.0));
        assert_eq!(j, FourVector::new(0.0, 0.0, 1.0, 0.0));

        let state = LabFrameState::new(Vector3::zeros(), 0.0, Vector3::new(0.6, 0.0, 0.0), Vector3::x()).unwrap();
        assert!(close(state.gamma(), 1.25, 1e-15));
        assert!(close(state.gamma_tilde(), 1.25, 1e-15));
        let (_, i, j) = lab_compose(&state);
        assert!((i - FourVector::new(0.75, 0.0, 0.0, 1.25)).amax() < 1e-15);
        assert!((j - FourVector::new(1.25, 0.0, 0.0, 0.75)).amax() < 1e-15);
    }

    #[test]
    fn lab_errors() {
        assert!(matches!(
            LabFrameState::new(Vector3::zeros(), 0.0, Vector3::new(1.0, 0.0, 0.0), Vector3::z()),
            Err(Error::Superluminal { .. })
        ));
        let x = FourVector::zeros();
        let i = FourVector::new(0.0, 0.0, 0.0, -1.0);
        let j = FourVector::new(0.0, 0.0, 1.0, 0.0);
        let u = FourVector::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(lab_decompose(&x, &i, &j, &u), Err(Error::NotFuturePointing));
        let err = lab_decompose(&x, &i, &j, &u).unwrap_err().to_string();
        assert!(err.contains("not future-pointing"));
        let err = LabFrameState::new(Vector3::zeros(), 0.0, Vector3::new(0.0, 1.2, 0.0), Vector3::z())
            .unwrap_err()
            .to_string();
        assert!(err.contains("superluminal"));
    }
}
