//! The 9-dimensional evolution space `V = {(X, I, J) : I² = -J² = 1, Ī J = 0}`
//! with `I` future-pointing, the model coefficients, and the kinematic
//! quantities derived from a point and a field: dressed mass, momentum
//! `P = (m + kα) I + ℓ ⋆(F) J` and the starred frame `(I*, Ω*)`.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::minkowski::{
    check_constraints, constraint_residuals, coupling_alpha_raw, mink_inner, spin_tensor_raw, FourVector,
    SkewEndomorphism, T,
};

/// Accepted constraint drift for points handed in from outside.
pub const POINT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionPoint {
    x: FourVector,
    i: FourVector,
    j: FourVector,
}

impl EvolutionPoint {
    pub fn new(x: FourVector, i: FourVector, j: FourVector) -> Result<Self> {
        check_constraints(&i, &j, POINT_TOL)?;
        Ok(EvolutionPoint { x, i, j })
    }

    pub fn from_lab(state: &crate::minkowski::LabFrameState) -> Self {
        let (x, i, j) = crate::minkowski::lab_compose(state);
        EvolutionPoint { x, i, j }
    }

    pub fn x(&self) -> &FourVector {
        &self.x
    }

    pub fn i(&self) -> &FourVector {
        &self.i
    }

    pub fn j(&self) -> &FourVector {
        &self.j
    }

    /// `[I² - 1, J² + 1, Ī J]`.
    pub fn residuals(&self) -> [f64; 3] {
        constraint_residuals(&self.i, &self.j)
    }

    pub fn spin_tensor(&self) -> SkewEndomorphism {
        spin_tensor_raw(&self.i, &self.j)
    }

    pub fn alpha(&self, f: &SkewEndomorphism) -> f64 {
        coupling_alpha_raw(&self.i, &self.j, f)
    }

    /// Packs `(X, I, J)` into a 12-vector.
    pub fn to_vector(&self) -> SVector<f64, 12> {
        pack(&self.x, &self.i, &self.j)
    }

    /// Moves along an ambient tangent without re-projecting.
    pub fn displaced(&self, d: &AmbientTangent, h: f64) -> (FourVector, FourVector, FourVector) {
        (self.x + d.dx * h, self.i + d.di * h, self.j + d.dj * h)
    }
}

pub(crate) fn pack(a: &FourVector, b: &FourVector, c: &FourVector) -> SVector<f64, 12> {
    let mut v = SVector::<f64, 12>::zeros();
    v.fixed_rows_mut::<4>(0).copy_from(a);
    v.fixed_rows_mut::<4>(4).copy_from(b);
    v.fixed_rows_mut::<4>(8).copy_from(c);
    v
}

/// Restores the constraints: normalize `I`, remove the `I` component of `J`,
/// then normalize `J`.
pub fn project_to_v(x: FourVector, i: FourVector, j: FourVector) -> Result<EvolutionPoint> {
    let i2 = mink_inner(&i, &i);
    if !(i2 > 0.0) || i[T] <= 0.0 {
        return Err(Error::LeftTimelikeCone { norm2: i2 });
    }
    let i = i / i2.sqrt();
    let j = j - i * mink_inner(&i, &j);
    let j2 = mink_inner(&j, &j);
    if !(j2 < 0.0) {
        return Err(Error::DegenerateSpin { norm2: j2 });
    }
    let j = j / (-j2).sqrt();
    Ok(EvolutionPoint { x, i, j })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Free,
    Souriau,
    Stora,
    Custom,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Preset::Free),
            "souriau" => Ok(Preset::Souriau),
            "stora" => Ok(Preset::Stora),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::InvalidInput(format!("unknown preset {other:?}"))),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Preset::Free => "free",
            Preset::Souriau => "souriau",
            Preset::Stora => "stora",
            Preset::Custom => "custom",
        })
    }
}

/// Mass `m`, spin `s`, charge `q`, gyromagnetic ratio `g`, and the two
/// coupling constants `k`, `ℓ` entering `P`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelCoefficients {
    pub m: f64,
    pub s: f64,
    pub q: f64,
    pub g: f64,
    pub k: f64,
    pub l: f64,
    pub preset: Preset,
}

impl ModelCoefficients {
    fn validated(self) -> Result<Self> {
        if !(self.m > 0.0) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {}", self.m)));
        }
        if !(self.s > 0.0) {
            return Err(Error::InvalidInput(format!("spin must be positive, got {}", self.s)));
        }
        if [self.q, self.g, self.k, self.l].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(self)
    }

    /// Uncoupled particle: `k = ℓ = 0`.
    pub fn free(m: f64, s: f64) -> Result<Self> {
        ModelCoefficients { m, s, q: 0.0, g: 0.0, k: 0.0, l: 0.0, preset: Preset::Free }.validated()
    }

    /// `k = -(g/2) q s / m`, `ℓ = 0`.
    pub fn souriau(m: f64, s: f64, q: f64, g: f64) -> Result<Self> {
        let k = -0.5 * g * q * s / m;
        ModelCoefficients { m, s, q, g, k, l: 0.0, preset: Preset::Souriau }.validated()
    }

    /// `k = -((g-1)/2) q s / m`, `ℓ = -½ q s / m`: BMT-compatible and with the
    /// `g - 1` spin-orbit coefficient.
    pub fn stora(m: f64, s: f64, q: f64, g: f64) -> Result<Self> {
        let k = -0.5 * (g - 1.0) * q * s / m;
        let l = -0.5 * q * s / m;
        ModelCoefficients { m, s, q, g, k, l, preset: Preset::Stora }.validated()
    }

    pub fn custom(m: f64, s: f64, q: f64, g: f64, k: f64, l: f64) -> Result<Self> {
        ModelCoefficients { m, s, q, g, k, l, preset: Preset::Custom }.validated()
    }

    pub fn from_preset(preset: Preset, m: f64, s: f64, q: f64, g: f64) -> Result<Self> {
        match preset {
            Preset::Free => Self::free(m, s).map(|c| ModelCoefficients { q, g, ..c }),
            Preset::Souriau => Self::souriau(m, s, q, g),
            Preset::Stora => Self::stora(m, s, q, g),
            Preset::Custom => Err(Error::InvalidInput("custom preset needs explicit k and l".into())),
        }
    }

    /// `k + ℓ + (g/2) q s / m`.
    pub fn bmt_residual(&self) -> f64 {
        self.k + self.l + 0.5 * self.g * self.q * self.s / self.m
    }

    pub fn bmt_compatible(&self) -> bool {
        self.bmt_residual().abs() <= 1e-12 * (1.0 + (self.g * self.q * self.s / self.m).abs())
    }

    /// Theoretical spin-orbit coefficient `k / (s m)`.
    pub fn spin_orbit_coefficient(&self) -> f64 {
        self.k / (self.s * self.m)
    }

    /// Same model with `(m, s, q, k, ℓ)` scaled as `(λm, λs, λq, λk, λℓ)`.
    pub fn rescaled(&self, factor: f64) -> Self {
        ModelCoefficients {
            m: self.m * factor,
            s: self.s * factor,
            q: self.q * factor,
            k: self.k * factor,
            l: self.l * factor,
            ..*self
        }
    }
}

/// A vector `(δX, δI, δJ)` of the ambient space `(R^{3,1})³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientTangent {
    pub dx: FourVector,
    pub di: FourVector,
    pub dj: FourVector,
}

impl AmbientTangent {
    pub fn zero() -> Self {
        AmbientTangent {
            dx: FourVector::zeros(),
            di: FourVector::zeros(),
            dj: FourVector::zeros(),
        }
    }

    pub fn new(dx: FourVector, di: FourVector, dj: FourVector) -> Self {
        AmbientTangent { dx, di, dj }
    }

    pub fn from_vector(v: &SVector<f64, 12>) -> Self {
        AmbientTangent {
            dx: v.fixed_rows::<4>(0).into_owned(),
            di: v.fixed_rows::<4>(4).into_owned(),
            dj: v.fixed_rows::<4>(8).into_owned(),
        }
    }

    pub fn to_vector(&self) -> SVector<f64, 12> {
        pack(&self.dx, &self.di, &self.dj)
    }

    pub fn scale(&self, factor: f64) -> Self {
        AmbientTangent {
            dx: self.dx * factor,
            di: self.di * factor,
            dj: self.dj * factor,
        }
    }

    /// `[Ī δI, J̄ δJ, J̄ δI + Ī δJ]` at `point`; all zero for tangents to `V`.
    pub fn tangency_residuals(&self, point: &EvolutionPoint) -> [f64; 3] {
        let (i, j) = (point.i(), point.j());
        [
            mink_inner(i, &self.di),
            mink_inner(j, &self.dj),
            mink_inner(j, &self.di) + mink_inner(i, &self.dj),
        ]
    }

    pub fn is_tangent(&self, point: &EvolutionPoint, tol: f64) -> bool {
        self.tangency_residuals(point).iter().all(|r| r.abs() <= tol)
    }
}

/// `M = m + k α`.
pub fn dressed_mass(coeffs: &ModelCoefficients, point: &EvolutionPoint, f: &SkewEndomorphism) -> f64 {
    coeffs.m + coeffs.k * point.alpha(f)
}

/// `P = (m + k α) I + ℓ ⋆(F) J`.
pub fn momentum(coeffs: &ModelCoefficients, point: &EvolutionPoint, f: &SkewEndomorphism) -> FourVector {
    momentum_raw(coeffs, point.i(), point.j(), f)
}

pub(crate) fn momentum_raw(
    coeffs: &ModelCoefficients,
    i: &FourVector,
    j: &FourVector,
    f: &SkewEndomorphism,
) -> FourVector {
    let star = f.star();
    let alpha = coupling_alpha_raw(i, j, f);
    i * (coeffs.m + coeffs.k * alpha) + star.apply(j) * coeffs.l
}

/// `I* = P / |P|` together with `Ω* = j(I*, J)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarredFrame {
    pub i_star: FourVector,
    pub omega_star: SkewEndomorphism,
    pub p_norm: f64,
    /// `J̄ I*`.
    pub orthogonality: f64,
}

/// Starred frame; `|J̄ I*|` must stay below `ortho_factor · ‖F‖`.
pub fn starred_frame_with(
    coeffs: &ModelCoefficients,
    point: &EvolutionPoint,
    f: &SkewEndomorphism,
    ortho_factor: f64,
) -> Result<StarredFrame> {
    let p = momentum(coeffs, point, f);
    let p2 = mink_inner(&p, &p);
    if !(p2 > 0.0) || p[T] <= 0.0 {
        return Err(Error::MomentumNotTimelike { p2 });
    }
    let p_norm = p2.sqrt();
    let i_star = p / p_norm;
    let orthogonality = mink_inner(point.j(), &i_star);
    let bound = ortho_factor * f.norm() + 1e-12;
    if orthogonality.abs() > bound {
        return Err(Error::StarredOrthogonality { residual: orthogonality.abs(), bound });
    }
    Ok(StarredFrame {
        i_star,
        omega_star: spin_tensor_raw(&i_star, point.j()),
        p_norm,
        orthogonality,
    })
}

pub fn starred_frame(coeffs: &ModelCoefficients, point: &EvolutionPoint, f: &SkewEndomorphism) -> Result<StarredFrame> {
    starred_frame_with(coeffs, point, f, 10.0)
}
