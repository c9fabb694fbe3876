//! Right-hand sides of the reference BMT system and of the linearized
//! distributions, integration of the kernel flow, and weak-field scans.

use std::collections::BTreeMap;

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::evolution_space::{
    momentum, pack, project_to_v, starred_frame, AmbientTangent, EvolutionPoint, ModelCoefficients,
};
use crate::fields::FieldModel;
use crate::minkowski::{
    bar, constraint_residuals, coupling_alpha_raw, mink_inner, spin_tensor_raw, FourVector, SkewEndomorphism,
};
use crate::presymplectic::{kernel, TwoFormModel};

/// Column names of the trajectory CSV.
pub const TRAJECTORY_HEADER: &str =
    "tau,x,y,z,t,Ix,Iy,Iz,It,Jx,Jy,Jz,Jt,Px,Py,Pz,E,H,Jx_am,Jy_am,Jz_am,c1,c2,c3";

/// Pre-projection constraint drift above which a step is rejected.
pub const MAX_STEP_DRIFT: f64 = 1e-6;

/// `(dX, dP, dS)` of the BMT system.
pub fn bmt_reference_rhs(
    p: &FourVector,
    s: &FourVector,
    f: &SkewEndomorphism,
    q: f64,
    g: f64,
) -> Result<(FourVector, FourVector, FourVector)> {
    let p2 = mink_inner(p, p);
    if !(p2 > 0.0) {
        return Err(Error::MomentumNotTimelike { p2 });
    }
    let fp = f.apply(p);
    let fs = f.apply(s);
    let ds = -(fs * (0.5 * g) + p * ((1.0 - 0.5 * g) * mink_inner(p, &fs) / p2)) * q;
    Ok((*p, -fp * q, ds))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearizedForm {
    /// Velocity, Lorentz and spin equations written with `I* = P/|P|`,
    /// gauge `Ī* δX = 1`.
    Starred,
    /// The intermediate form in terms of `I`, gauge `Ī δX = 1`. Kept for
    /// debugging; with Souriau's coefficients it is Souriau's own system.
    Provisional,
}

/// First-order (in `F`) characteristic direction for BMT-compatible
/// coefficients.
pub fn linearized_rhs(
    coeffs: &ModelCoefficients,
    point: &EvolutionPoint,
    f: &SkewEndomorphism,
    form: LinearizedForm,
) -> Result<AmbientTangent> {
    if !coeffs.bmt_compatible() {
        return Err(Error::NotBmtCompatible { residual: coeffs.bmt_residual() });
    }
    let (m, s, q, g) = (coeffs.m, coeffs.s, coeffs.q, coeffs.g);
    let (i, j) = (point.i(), point.j());
    let spin_rhs = |axis: &FourVector| -> FourVector {
        let fj = f.apply(j);
        -(fj * (0.5 * g) + axis * ((1.0 - 0.5 * g) * mink_inner(axis, &fj))) * (q / m)
    };
    match form {
        LinearizedForm::Provisional => {
            let omega = spin_tensor_raw(i, j);
            let fi = f.apply(i);
            let dx = i - omega.apply(&fi) * ((coeffs.k + q * s / m) / m);
            Ok(AmbientTangent::new(dx, -fi * (q / m), spin_rhs(i)))
        }
        LinearizedForm::Starred => {
            let frame = starred_frame(coeffs, point, f)?;
            let i_star = frame.i_star;
            let fi = f.apply(&i_star);
            let dx = i_star - frame.omega_star.apply(&fi) * (q * s / (m * m) * (1.0 - 0.5 * g));
            let di_star = -fi * (q / m);
            let dj = spin_rhs(&i_star);
            let di = unstar_velocity(coeffs, point, f, frame.p_norm, &i_star, &di_star, &dj)?;
            Ok(AmbientTangent::new(dx, di, dj))
        }
    }
}

/// Solves `δI* = (1/|P|)(1 - I* Ī*) δP(δI, δJ)` for a `δI` tangent to `V`.
fn unstar_velocity(
    coeffs: &ModelCoefficients,
    point: &EvolutionPoint,
    f: &SkewEndomorphism,
    p_norm: f64,
    i_star: &FourVector,
    di_star: &FourVector,
    dj: &FourVector,
) -> Result<FourVector> {
    let (i, j) = (point.i(), point.j());
    let star = f.star();
    let mass = coeffs.m + coeffs.k * coupling_alpha_raw(i, j, f);
    let projector = (nalgebra::Matrix4::identity() - i_star * bar(i_star)) / p_norm;
    // δP = M δI + k (δĪ ⋆F J) I + k (Ī ⋆F δJ) I + ℓ ⋆F δJ
    let d_p_di = nalgebra::Matrix4::identity() * mass + i * bar(&star.apply(j)) * coeffs.k;
    let d_p_dj = i * (bar(i) * star.matrix()) * coeffs.k + star.matrix() * coeffs.l;

    let mut a = SMatrix::<f64, 6, 4>::zeros();
    a.fixed_view_mut::<4, 4>(0, 0).copy_from(&(projector * d_p_di));
    a.fixed_view_mut::<1, 4>(4, 0).copy_from(&bar(i));
    a.fixed_view_mut::<1, 4>(5, 0).copy_from(&bar(j));
    let mut b = SVector::<f64, 6>::zeros();
    b.fixed_rows_mut::<4>(0).copy_from(&(di_star - projector * d_p_dj * dj));
    b[5] = -mink_inner(i, dj);
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidInput(format!("starred velocity conversion failed: {e}")))?;
    Ok(x)
}

/// Normalization of the kernel direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    /// `Ī δX = 1`.
    Inertial,
    /// `Ī* δX = 1`, the parametrization of the starred linearized system.
    Momentum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    Kernel,
    Linearized,
    BmtReference,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Flow {
    Kernel { model: TwoFormModel, gauge: Gauge },
    Linearized { coeffs: ModelCoefficients, field: FieldModel, form: LinearizedForm },
    /// BMT system on `(X, P, S)` started from `P = mI`, `S = sJ`.
    BmtReference { coeffs: ModelCoefficients, field: FieldModel },
}

impl Flow {
    pub fn kind(&self) -> FlowKind {
        match self {
            Flow::Kernel { .. } => FlowKind::Kernel,
            Flow::Linearized { .. } => FlowKind::Linearized,
            Flow::BmtReference { .. } => FlowKind::BmtReference,
        }
    }

    /// Vector field at a point of `V` (not defined for the BMT flow, which
    /// lives on `(X, P, S)`).
    pub fn tangent(&self, point: &EvolutionPoint) -> Result<(AmbientTangent, Diagnostics)> {
        let mut diag = Diagnostics::new();
        let delta = match self {
            Flow::Kernel { model, gauge } => {
                let sol = kernel(model, point)?;
                diag.insert("sigma_min2", sol.sigma_min2);
                let scale = match gauge {
                    Gauge::Inertial => 1.0,
                    Gauge::Momentum => {
                        let p = model.momentum(point)?;
                        let p2 = mink_inner(&p, &p);
                        if !(p2 > 0.0) {
                            return Err(Error::MomentumNotTimelike { p2 });
                        }
                        p2.sqrt() / mink_inner(&p, &sol.delta.dx)
                    }
                };
                diag.insert("lambda", sol.lambda * scale);
                diag.insert("mu", sol.mu * scale);
                diag.insert("nu", sol.nu * scale);
                sol.delta.scale(scale)
            }
            Flow::Linearized { coeffs, field, form } => {
                let f = field.field_at(point.x())?;
                linearized_rhs(coeffs, point, &f, *form)?
            }
            Flow::BmtReference { .. } => {
                return Err(Error::InvalidInput("the BMT flow has no tangent on V".into()));
            }
        };
        Ok((delta, diag))
    }

    /// Momentum recorded with each sample.
    fn momentum_at(&self, point: &EvolutionPoint) -> Result<FourVector> {
        match self {
            Flow::Kernel { model, .. } => model.momentum(point),
            Flow::Linearized { coeffs, field, .. } => Ok(momentum(coeffs, point, &field.field_at(point.x())?)),
            Flow::BmtReference { coeffs, .. } => Ok(point.i() * coeffs.m),
        }
    }
}

pub type Diagnostics = BTreeMap<&'static str, f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub point: EvolutionPoint,
    pub p: FourVector,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub h: f64,
    pub kind: FlowKind,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least the start")
    }

    /// Largest pre-projection constraint drift of any step.
    pub fn max_drift(&self) -> f64 {
        self.samples.iter().filter_map(|s| s.diagnostics.get("drift")).fold(0.0, |a, &b| a.max(b))
    }
}

fn unpack(y: &SVector<f64, 12>) -> (FourVector, FourVector, FourVector) {
    (
        y.fixed_rows::<4>(0).into_owned(),
        y.fixed_rows::<4>(4).into_owned(),
        y.fixed_rows::<4>(8).into_owned(),
    )
}

fn rk4<E>(
    y: &SVector<f64, 12>,
    h: f64,
    mut rhs: impl FnMut(&SVector<f64, 12>) -> std::result::Result<SVector<f64, 12>, E>,
) -> std::result::Result<SVector<f64, 12>, E> {
    let k1 = rhs(y)?;
    let k2 = rhs(&(y + k1 * (0.5 * h)))?;
    let k3 = rhs(&(y + k2 * (0.5 * h)))?;
    let k4 = rhs(&(y + k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

fn residual_diagnostics(diag: &mut Diagnostics, i: &FourVector, j: &FourVector) -> f64 {
    let [c1, c2, c3] = constraint_residuals(i, j);
    diag.insert("c1", c1);
    diag.insert("c2", c2);
    diag.insert("c3", c3);
    c1.abs().max(c2.abs()).max(c3.abs())
}

/// Integrates `flow` with the classical fourth-order Runge–Kutta method,
/// projecting back onto `V` every `project_every` steps.
pub fn integrate(flow: &Flow, start: &EvolutionPoint, h: f64, n_steps: usize, project_every: usize) -> Result<Trajectory> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
    }
    if let Flow::BmtReference { coeffs, field } = flow {
        return integrate_bmt(coeffs, field, start, h, n_steps);
    }
    let project_every = project_every.max(1);
    let record = |tau: f64, point: EvolutionPoint, mut diagnostics: Diagnostics| -> Result<Sample> {
        let (_, extra) = flow.tangent(&point)?;
        diagnostics.extend(extra);
        Ok(Sample { tau, p: flow.momentum_at(&point)?, point, diagnostics })
    };
    let mut start_diag = Diagnostics::new();
    residual_diagnostics(&mut start_diag, start.i(), start.j());
    start_diag.insert("drift", 0.0);
    let mut samples = vec![record(0.0, *start, start_diag)?];

    let mut y = start.to_vector();
    for step in 1..=n_steps {
        y = rk4(&y, h, |z| {
            let (x, i, j) = unpack(z);
            let point = project_to_v(x, i, j)?;
            Ok::<_, Error>(flow.tangent(&point)?.0.to_vector())
        })?;
        let (x, i, j) = unpack(&y);
        let mut diag = Diagnostics::new();
        let drift = residual_diagnostics(&mut diag, &i, &j);
        if !(drift <= MAX_STEP_DRIFT) {
            return Err(Error::StepTooLarge { drift, step });
        }
        diag.insert("drift", drift);
        let point = project_to_v(x, i, j)?;
        if step % project_every == 0 {
            y = point.to_vector();
        }
        samples.push(record(step as f64 * h, point, diag)?);
    }
    Ok(Trajectory { samples, h, kind: flow.kind() })
}

fn integrate_bmt(
    coeffs: &ModelCoefficients,
    field: &FieldModel,
    start: &EvolutionPoint,
    h: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    let sample = |tau: f64, y: &SVector<f64, 12>| -> Result<Sample> {
        let (x, p, s) = unpack(y);
        let (p2, s2) = (mink_inner(&p, &p), mink_inner(&s, &s));
        if !(p2 > 0.0) {
            return Err(Error::MomentumNotTimelike { p2 });
        }
        let mut diag = Diagnostics::new();
        residual_diagnostics(&mut diag, &(p / p2.sqrt()), &(s / (-s2).abs().sqrt()));
        diag.insert("p2", p2);
        diag.insert("s2", s2);
        diag.insert("ps", mink_inner(&p, &s));
        let point = project_to_v(x, p / p2.sqrt(), s / (-s2).abs().sqrt())?;
        Ok(Sample { tau, point, p, diagnostics: diag })
    };
    let mut y = pack(start.x(), &(start.i() * coeffs.m), &(start.j() * coeffs.s));
    let mut samples = vec![sample(0.0, &y)?];
    for step in 1..=n_steps {
        y = rk4(&y, h, |z| {
            let (x, p, s) = unpack(z);
            let f = field.field_at(&x)?;
            let (dx, dp, ds) = bmt_reference_rhs(&p, &s, &f, coeffs.q, coeffs.g)?;
            Ok::<_, Error>(pack(&dx, &dp, &ds))
        })?;
        samples.push(sample(step as f64 * h, &y)?);
    }
    Ok(Trajectory { samples, h, kind: FlowKind::BmtReference })
}

/// Least-squares slope of `log y` against `log x` over the pairs with
/// both entries positive. `None` with fewer than two such pairs.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// `(ε, deviation)` in the order given.
    pub rows: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub horizon: f64,
    pub h: f64,
    pub warning: Option<String>,
}

/// `min(1/(q‖F‖), 10/m)` with `‖F‖` the Frobenius norm at `x`.
pub fn default_horizon(coeffs: &ModelCoefficients, field: &FieldModel, x: &FourVector) -> Result<f64> {
    let strength = coeffs.q.abs() * field.field_at(x)?.norm();
    let cap = 10.0 / coeffs.m;
    Ok(if strength > 0.0 { cap.min(1.0 / strength) } else { cap })
}

/// Compares the kernel flow of `model` with the field scaled by each `ε`
/// against the starred linearized flow, both parametrized by `Ī* δX = 1`.
///
/// The horizon defaults to [`default_horizon`] for the largest `ε` and is
/// shared by all rows.
pub fn convergence_study(
    model: &TwoFormModel,
    start: &EvolutionPoint,
    eps_list: &[f64],
    horizon: Option<f64>,
    h: f64,
) -> Result<ConvergenceReport> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidInput("eps_list must hold non-negative values".into()));
    }
    let eps_max = eps_list.iter().cloned().fold(0.0, f64::max);
    let horizon = match horizon {
        Some(t) => t,
        None => default_horizon(&model.coeffs, &model.field.scaled(eps_max), start.x())?,
    };
    let n_steps = (horizon / h).ceil().max(1.0) as usize;
    let h = horizon / n_steps as f64;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let field = model.field.scaled(eps);
        let exact = integrate(
            &Flow::Kernel { model: model.with_field(field.clone()), gauge: Gauge::Momentum },
            start,
            h,
            n_steps,
            1,
        )?;
        let approx = integrate(
            &Flow::Linearized { coeffs: model.coeffs, field, form: LinearizedForm::Starred },
            start,
            h,
            n_steps,
            1,
        )?;
        let deviation = exact
            .samples
            .iter()
            .zip(&approx.samples)
            .map(|(a, b)| (a.point.to_vector() - b.point.to_vector()).norm())
            .fold(0.0, f64::max);
        rows.push((eps, deviation));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.0 > 0.0).cloned().unzip();
    let slope = log_log_slope(&xs, &ys);
    let mut sorted: Vec<(f64, f64)> = rows.iter().filter(|r| r.0 > 0.0).cloned().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[0].1 < w[1].1);
    let warning = (!monotone).then(|| "outside asymptotic regime: deviations are not monotone in eps".to_string());
    Ok(ConvergenceReport { rows, slope, horizon, h, warning })
}

/// Residuals of one multiplier relation across an `ε` scan.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantityScan {
    pub name: &'static str,
    pub residuals: Vec<f64>,
    pub slope: Option<f64>,
}

impl QuantityScan {
    /// Largest residual; relations that hold exactly sit at roundoff.
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Passes with slope at least `min_slope`, or if every residual is
    /// below `floor` (the relation then holds to roundoff).
    pub fn passes(&self, min_slope: f64, floor: f64) -> bool {
        self.max_residual() < floor || self.slope.is_some_and(|s| s >= min_slope)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierReport {
    pub eps: Vec<f64>,
    pub quantities: Vec<QuantityScan>,
}

impl MultiplierReport {
    pub fn get(&self, name: &str) -> Option<&QuantityScan> {
        self.quantities.iter().find(|q| q.name == name)
    }
}

/// Weak-field checks of the kernel multipliers of the general (Stora) form
/// at `point`, with the uniform field `ε f` for each `ε`.
///
/// Quantities: `nu`, `mu`, `lambda`, `rho`, `spin_split` (the remainder of
/// `s δJ - ρ I - μ̂ F J`), `delta_alpha` and `momentum_norm`
/// (`P² - m² + g q s α`).
pub fn multiplier_diagnostics(
    coeffs: &ModelCoefficients,
    point: &EvolutionPoint,
    f: &SkewEndomorphism,
    eps_list: &[f64],
) -> Result<MultiplierReport> {
    let names = ["nu", "mu", "lambda", "rho", "spin_split", "delta_alpha", "momentum_norm"];
    let mut table: Vec<Vec<f64>> = vec![Vec::with_capacity(eps_list.len()); names.len()];
    let (i, j) = (point.i(), point.j());
    let (m, s, q, k, l) = (coeffs.m, coeffs.s, coeffs.q, coeffs.k, coeffs.l);
    for &eps in eps_list {
        let fe = *f * eps;
        let model = TwoFormModel::new(
            crate::presymplectic::Variant::Stora,
            *coeffs,
            FieldModel::uniform(fe),
        );
        let sol = kernel(&model, point)?;
        let d = sol.delta;
        let alpha = point.alpha(&fe);
        let ix = mink_inner(i, &d.dx);
        let mu_hat = sol.mu / alpha;
        let fj = fe.apply(j);
        let ifj = mink_inner(i, &fj);
        let rho = s * mink_inner(i, &d.dj) - mu_hat * ifj;
        let rho_theory = -ifj * (k * ix + sol.lambda / m * (l + q * s / m));
        let split = d.dj * s - i * rho - fj * mu_hat;
        let star = fe.star();
        let d_alpha = mink_inner(&d.di, &star.apply(j)) + mink_inner(i, &star.apply(&d.dj));
        let p = momentum(coeffs, point, &fe);
        let rows = [
            sol.nu.abs(),
            (sol.mu - alpha * (k * ix + l * sol.lambda / m)).abs(),
            (sol.lambda - (m + 2.0 * k * alpha) * ix).abs(),
            (rho - rho_theory).abs(),
            split.norm(),
            d_alpha.abs(),
            (mink_inner(&p, &p) - m * m + coeffs.g * q * s * alpha).abs(),
        ];
        for (col, v) in table.iter_mut().zip(rows) {
            col.push(v);
        }
    }
    let quantities = names
        .iter()
        .zip(table)
        .map(|(name, residuals)| QuantityScan { name, slope: log_log_slope(eps_list, &residuals), residuals })
        .collect();
    Ok(MultiplierReport { eps: eps_list.to_vec(), quantities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::LabFrameState;
    use nalgebra::Vector3;

    fn point() -> EvolutionPoint {
        EvolutionPoint::from_lab(
            &LabFrameState::new(
                Vector3::new(0.3, 1.1, -0.2),
                0.0,
                Vector3::new(0.25, -0.1, 0.15),
                Vector3::new(0.6, 0.0, 0.8),
            )
            .unwrap(),
        )
    }

    #[test]
    fn bmt_rhs_without_field_is_free_motion() {
        let p = FourVector::new(0.1, 0.2, 0.0, 1.5);
        let s = FourVector::new(1.0, 0.0, 0.0, 0.0);
        let (dx, dp, ds) = bmt_reference_rhs(&p, &s, &SkewEndomorphism::zero(), 1.0, 2.3).unwrap();
        assert_eq!((dx, dp, ds), (p, FourVector::zeros(), FourVector::zeros()));
        assert!(bmt_reference_rhs(&s, &p, &SkewEndomorphism::zero(), 1.0, 2.0).is_err());
    }

    #[test]
    fn normal_g_spin_follows_the_field() {
        let f = SkewEndomorphism::from_fields(Vector3::new(0.2, -0.1, 0.4), Vector3::new(0.3, 0.5, -0.2));
        let p = FourVector::new(0.1, 0.2, 0.0, 1.5);
        let s = FourVector::new(1.0, 0.3, 0.0, 0.1);
        let (_, _, ds) = bmt_reference_rhs(&p, &s, &f, 0.7, 2.0).unwrap();
        assert!((ds + f.apply(&s) * 0.7).norm() < 1e-15);
    }

    #[test]
    fn linearized_without_field_moves_along_i() {
        let c = ModelCoefficients::stora(1.0, 0.5, 1.0, 2.4).unwrap();
        for form in [LinearizedForm::Starred, LinearizedForm::Provisional] {
            let d = linearized_rhs(&c, &point(), &SkewEndomorphism::zero(), form).unwrap();
            assert!((d.dx - point().i()).norm() < 1e-14);
            assert!(d.di.norm() < 1e-14 && d.dj.norm() < 1e-14);
        }
    }

    #[test]
    fn linearized_needs_bmt_compatible_coefficients() {
        let c = ModelCoefficients::custom(1.0, 1.0, 1.0, 2.0, -0.3, 0.0).unwrap();
        let err = linearized_rhs(&c, &point(), &SkewEndomorphism::zero(), LinearizedForm::Starred);
        assert!(matches!(err, Err(Error::NotBmtCompatible { .. })));
    }

    #[test]
    fn starred_flow_is_tangent_and_preserves_spin_norm() {
        let c = ModelCoefficients::stora(1.0, 1.0, 1.0, 2.6).unwrap();
        let f = SkewEndomorphism::from_fields(Vector3::new(0.02, -0.01, 0.03), Vector3::new(0.01, 0.02, -0.02));
        let d = linearized_rhs(&c, &point(), &f, LinearizedForm::Starred).unwrap();
        assert!(d.is_tangent(&point(), 1e-14), "{:?}", d.tangency_residuals(&point()));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1e-2, 1e-3, 1e-4];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn free_flow_is_a_straight_worldline() {
        let model = TwoFormModel::from_coeffs(ModelCoefficients::free(1.0, 1.0).unwrap(), FieldModel::zero());
        let start = point();
        let traj = integrate(&Flow::Kernel { model, gauge: Gauge::Inertial }, &start, 0.01, 1000, 1).unwrap();
        for s in &traj.samples {
            let line = start.x() + start.i() * s.tau;
            assert!((s.point.x() - line).norm() < 1e-12);
            assert!((s.point.i() - start.i()).norm() < 1e-12);
            assert!((s.point.j() - start.j()).norm() < 1e-12);
        }
    }

    #[test]
    fn oversized_steps_abort() {
        let c = ModelCoefficients::stora(1.0, 1.0, 1.0, 2.0).unwrap();
        let field = FieldModel::uniform(SkewEndomorphism::magnetic(Vector3::new(0.0, 0.0, 3.0)));
        let flow = Flow::Linearized { coeffs: c, field, form: LinearizedForm::Provisional };
        let err = integrate(&flow, &point(), 0.3, 3, 1).unwrap_err();
        assert!(err.to_string().contains("step size too large"), "{err}");
    }
}
