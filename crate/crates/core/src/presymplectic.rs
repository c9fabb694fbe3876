//! The Lagrange 2-forms on the evolution space and their characteristic
//! direction.
//!
//! All three forms share the shape
//!
//! ```text
//! σ(d1, d2) = s (d1Ī Ω d2I - d1J̄ Ω d2J) - d1P̄ d2X + d2P̄ d1X + q d1X̄ F d2X
//! ```
//!
//! and differ only in the momentum `P`:
//!
//! | variant   | `P`                          | field coupling |
//! |-----------|------------------------------|----------------|
//! | `Free`    | `m I`                        | none           |
//! | `Souriau` | `(m - (g/2)(qs/m) α) I`      | `q F`          |
//! | `Stora`   | `(m + kα) I + ℓ ⋆(F) J`      | `q F`          |
//!
//! The variation `dP` includes the `∇F` terms coming from the `X`-dependence
//! of `α` and `⋆F`, so the forms are the exact ones for non-uniform fields.
//!
//! The forms are evaluated on the ambient space `R^12 ∋ (X, I, J)`; only
//! their pullback to `V` is meaningful (and closed).

use nalgebra::{Matrix4, SMatrix, SVector};

use crate::error::{Error, Result};
use crate::evolution_space::{AmbientTangent, EvolutionPoint, ModelCoefficients, Preset};
use crate::fields::FieldModel;
use crate::minkowski::{bar, coupling_alpha_raw, metric, spin_tensor_raw, FourVector, SkewEndomorphism};

pub type SigmaMatrix = SMatrix<f64, 12, 12>;
pub type KernelSystem = SMatrix<f64, 15, 15>;

/// Singular values below `RANK_TOL · σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Minimum ratio between the two smallest singular values of the kernel
/// system for the kernel to count as one-dimensional.
pub const DEGENERACY_RATIO: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Free,
    Souriau,
    Stora,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormModel {
    pub variant: Variant,
    pub coeffs: ModelCoefficients,
    pub field: FieldModel,
}

impl TwoFormModel {
    pub fn new(variant: Variant, coeffs: ModelCoefficients, field: FieldModel) -> Self {
        TwoFormModel { variant, coeffs, field }
    }

    /// Picks the variant matching the coefficient preset; custom coefficients
    /// use the general (Stora) form.
    pub fn from_coeffs(coeffs: ModelCoefficients, field: FieldModel) -> Self {
        let variant = match coeffs.preset {
            Preset::Free => Variant::Free,
            Preset::Souriau => Variant::Souriau,
            Preset::Stora | Preset::Custom => Variant::Stora,
        };
        Self::new(variant, coeffs, field)
    }

    pub fn with_field(&self, field: FieldModel) -> Self {
        TwoFormModel { field, ..self.clone() }
    }

    /// `(k, ℓ, q)` actually entering the form.
    pub fn couplings(&self) -> (f64, f64, f64) {
        let c = &self.coeffs;
        match self.variant {
            Variant::Free => (0.0, 0.0, 0.0),
            Variant::Souriau => (-0.5 * c.g * c.q * c.s / c.m, 0.0, c.q),
            Variant::Stora => (c.k, c.l, c.q),
        }
    }

    /// The field seen by the form at `x` (zero for the free variant).
    pub fn field_at(&self, x: &FourVector) -> Result<SkewEndomorphism> {
        match self.variant {
            Variant::Free => Ok(SkewEndomorphism::zero()),
            _ => self.field.field_at(x),
        }
    }

    /// The momentum `P` entering the form.
    pub fn momentum_raw(&self, x: &FourVector, i: &FourVector, j: &FourVector) -> Result<FourVector> {
        let (k, l, _) = self.couplings();
        if self.variant == Variant::Free {
            return Ok(i * self.coeffs.m);
        }
        let f = self.field.field_at(x)?;
        let alpha = coupling_alpha_raw(i, j, &f);
        Ok(i * (self.coeffs.m + k * alpha) + f.star().apply(j) * l)
    }

    pub fn momentum(&self, point: &EvolutionPoint) -> Result<FourVector> {
        self.momentum_raw(point.x(), point.i(), point.j())
    }
}

/// Coordinate matrix `S_ab = σ(e_a, e_b)` at an arbitrary ambient point.
pub fn sigma_matrix_raw(
    model: &TwoFormModel,
    x: &FourVector,
    i: &FourVector,
    j: &FourVector,
) -> Result<SigmaMatrix> {
    let g = metric();
    let s = model.coeffs.s;
    let omega = spin_tensor_raw(i, j);
    let g_omega = g * omega.matrix();

    let mut sigma = SigmaMatrix::zeros();
    sigma.fixed_view_mut::<4, 4>(4, 4).copy_from(&(g_omega * s));
    sigma.fixed_view_mut::<4, 4>(8, 8).copy_from(&(g_omega * -s));

    // dP = DP · (dX, dI, dJ)
    let mut dp = SMatrix::<f64, 4, 12>::zeros();
    let (k, l, q) = model.couplings();
    let mut field = None;
    if model.variant == Variant::Free {
        dp.fixed_view_mut::<4, 4>(0, 4).copy_from(&(Matrix4::identity() * model.coeffs.m));
    } else {
        let f = model.field.field_at(x)?;
        let star = f.star();
        let star_j = star.apply(j);
        let alpha = (bar(i) * star_j)[0];
        let mass = model.coeffs.m + k * alpha;

        // ∂α/∂I = (⋆F J)̄,  ∂α/∂J = Ī ⋆F
        let dalpha_di = bar(&star_j);
        let dalpha_dj = bar(i) * star.matrix();
        dp.fixed_view_mut::<4, 4>(0, 4)
            .copy_from(&(Matrix4::identity() * mass + i * dalpha_di * k));
        dp.fixed_view_mut::<4, 4>(0, 8)
            .copy_from(&(i * dalpha_dj * k + star.matrix() * l));
        if !model.field.is_uniform() {
            for c in 0..4 {
                let mut e = FourVector::zeros();
                e[c] = 1.0;
                let dstar = model.field.grad_field_at(x, &e)?.star();
                let dstar_j = dstar.apply(j);
                let dalpha = (bar(i) * dstar_j)[0];
                dp.set_column(c, &(i * (k * dalpha) + dstar_j * l));
            }
        }
        field = Some(f);
    }

    // -d1P̄ d2X + d2P̄ d1X
    let a = dp.transpose() * g;
    for r in 0..12 {
        for c in 0..4 {
            sigma[(r, c)] -= a[(r, c)];
            sigma[(c, r)] += a[(r, c)];
        }
    }
    if let Some(f) = field {
        let gf = g * f.matrix() * q;
        let mut xx = sigma.fixed_view_mut::<4, 4>(0, 0);
        xx += gf;
    }
    Ok(sigma)
}

pub fn sigma_matrix(model: &TwoFormModel, point: &EvolutionPoint) -> Result<SigmaMatrix> {
    sigma_matrix_raw(model, point.x(), point.i(), point.j())
}

/// `σ(d1, d2)` at a point of `V`.
pub fn sigma_eval(
    model: &TwoFormModel,
    point: &EvolutionPoint,
    d1: &AmbientTangent,
    d2: &AmbientTangent,
) -> Result<f64> {
    let sigma = sigma_matrix(model, point)?;
    Ok(d1.to_vector().dot(&(sigma * d2.to_vector())))
}

/// Covectors of the three constraints, normalized as `-Ī dI`, `J̄ dJ` and
/// `J̄ dI + Ī dJ`, as columns.
fn constraint_covectors(i: &FourVector, j: &FourVector) -> SMatrix<f64, 12, 3> {
    let gi = bar(i).transpose();
    let gj = bar(j).transpose();
    let mut c = SMatrix::<f64, 12, 3>::zeros();
    c.fixed_view_mut::<4, 1>(4, 0).copy_from(&(-gi));
    c.fixed_view_mut::<4, 1>(8, 1).copy_from(&gj);
    c.fixed_view_mut::<4, 1>(4, 2).copy_from(&gj);
    c.fixed_view_mut::<4, 1>(8, 2).copy_from(&gi);
    c
}

/// Orthonormal basis (Euclidean, in the ambient chart) of `T_p V`.
pub fn tangent_basis(point: &EvolutionPoint) -> [SVector<f64, 12>; 9] {
    let normals = constraint_covectors(point.i(), point.j());
    let mut accepted: Vec<SVector<f64, 12>> = Vec::with_capacity(12);
    for col in normals.column_iter() {
        let mut v = col.into_owned();
        for u in &accepted {
            v -= u * u.dot(&v);
        }
        accepted.push(v.normalize());
    }
    for a in 0..12 {
        if accepted.len() == 12 {
            break;
        }
        let mut v = SVector::<f64, 12>::zeros();
        v[a] = 1.0;
        for _ in 0..2 {
            for u in &accepted {
                v -= u * u.dot(&v);
            }
        }
        let n = v.norm();
        if n > 0.3 {
            accepted.push(v / n);
        }
    }
    std::array::from_fn(|k| accepted[k + 3])
}

/// The characteristic direction of `σ` at a point together with the
/// Lagrange multipliers.
///
/// The multipliers are normalized so that the `I`- and `J`-slot equations
/// read `… - λ I + ν J = 0` and `… + μ J + ν I = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSolution {
    /// Gauge-normalized so that `Ī δX = 1`.
    pub delta: AmbientTangent,
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub sigma_min: f64,
    /// Second-smallest singular value of the kernel system (rank margin).
    pub sigma_min2: f64,
    /// `Ī δX` of the unit null vector before normalization.
    pub gauge: f64,
    /// `‖K n‖ / ‖K‖` for the unit null vector `n`.
    pub residual: f64,
}

/// Assembles the 15×15 system in `(δX, δI, δJ, λ, μ, ν)`.
pub fn kernel_system(model: &TwoFormModel, point: &EvolutionPoint) -> Result<KernelSystem> {
    let sigma = sigma_matrix(model, point)?;
    let c = constraint_covectors(point.i(), point.j());
    let mut k = KernelSystem::zeros();
    // σ(δ, ·) = Sᵀ δ = -S δ
    k.fixed_view_mut::<12, 12>(0, 0).copy_from(&(-sigma));
    k.fixed_view_mut::<12, 3>(0, 12).copy_from(&c);
    k.fixed_view_mut::<3, 12>(12, 0).copy_from(&c.transpose());
    Ok(k)
}

pub fn kernel(model: &TwoFormModel, point: &EvolutionPoint) -> Result<KernelSolution> {
    let system = kernel_system(model, point)?;
    let svd = system.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let values = svd.singular_values;
    let mut order: Vec<usize> = (0..15).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let (smallest, second) = (values[order[0]], values[order[1]]);
    if second <= DEGENERACY_RATIO * smallest {
        return Err(Error::RankDegeneracy { smallest, second });
    }
    let null: SVector<f64, 15> = v_t.row(order[0]).transpose();
    let residual = (system * null).norm() / system.norm();

    let delta = AmbientTangent::from_vector(&null.fixed_rows::<12>(0).into_owned());
    let gauge = (bar(point.i()) * delta.dx)[0];
    if gauge.abs() < 1e-8 {
        return Err(Error::LightlikeGauge { gauge });
    }
    Ok(KernelSolution {
        delta: delta.scale(1.0 / gauge),
        lambda: null[12] / gauge,
        mu: null[13] / gauge,
        nu: null[14] / gauge,
        sigma_min: smallest,
        sigma_min2: second,
        gauge,
        residual,
    })
}

/// Rank of the pullback of `σ` to `T_p V`.
pub fn rank_at(model: &TwoFormModel, point: &EvolutionPoint) -> Result<usize> {
    let values = pullback_singular_values(model, point)?;
    let max = values.first().copied().unwrap_or(0.0);
    Ok(values.iter().filter(|&&v| v > RANK_TOL * max).count())
}

/// Singular values of the 9×9 pullback `Tᵀ S T`, descending.
pub fn pullback_singular_values(model: &TwoFormModel, point: &EvolutionPoint) -> Result<Vec<f64>> {
    let sigma = sigma_matrix(model, point)?;
    let basis = tangent_basis(point);
    let t = SMatrix::<f64, 12, 9>::from_columns(&basis);
    let pulled = t.transpose() * sigma * t;
    let mut values: Vec<f64> = pulled.singular_values().iter().cloned().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Largest component of the finite-difference exterior derivative `dσ` on
/// triples of tangent basis vectors, central differences with step `h`.
pub fn closedness_residual(model: &TwoFormModel, point: &EvolutionPoint, h: f64) -> Result<f64> {
    let basis = tangent_basis(point);
    let base = point.to_vector();
    let mut derivs = Vec::with_capacity(9);
    for t in &basis {
        let at = |sign: f64| {
            let p = base + t * (sign * h);
            sigma_matrix_raw(
                model,
                &p.fixed_rows::<4>(0).into_owned(),
                &p.fixed_rows::<4>(4).into_owned(),
                &p.fixed_rows::<4>(8).into_owned(),
            )
        };
        derivs.push((at(1.0)? - at(-1.0)?) / (2.0 * h));
    }
    let form = |d: &SigmaMatrix, v: &SVector<f64, 12>, w: &SVector<f64, 12>| v.dot(&(d * w));
    let mut worst: f64 = 0.0;
    for a in 0..9 {
        for b in a + 1..9 {
            for c in b + 1..9 {
                let (u, v, w) = (&basis[a], &basis[b], &basis[c]);
                let d = form(&derivs[a], v, w) - form(&derivs[b], u, w) + form(&derivs[c], u, v);
                worst = worst.max(d.abs());
            }
        }
    }
    Ok(worst)
}
