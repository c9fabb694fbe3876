//! Conserved quantities of static fields (energy, angular momentum) and the
//! extraction of the spin-orbit coefficient.
//!
//! Everything is measured by the rest observer `U = (0, 0, 0, 1)`.

use nalgebra::{Matrix4, Vector3};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::evolution_space::{EvolutionPoint, ModelCoefficients};
use crate::fields::FieldModel;
use crate::minkowski::{lab_decompose, outer_bar, unhat, FourVector, LabFrameState, SkewEndomorphism, T};
use crate::presymplectic::TwoFormModel;

pub fn observer() -> FourVector {
    FourVector::new(0.0, 0.0, 0.0, 1.0)
}

/// `H = Ū P - q φ(X)`, the moment map of time translations.
///
/// With `E = -∇φ` the field term enters with a minus sign; see the guide's
/// chapter on observables for the derivation.
pub fn energy(model: &TwoFormModel, point: &EvolutionPoint) -> Result<f64> {
    let p = model.momentum(point)?;
    let (_, _, q) = model.couplings();
    let phi = if q == 0.0 { 0.0 } else { model.field.potential_at(point.x())? };
    Ok(p[T] - q * phi)
}

/// Lab form `γ (m + k α) - q φ`; equals [`energy`] for static electric fields.
pub fn energy_lab(model: &TwoFormModel, point: &EvolutionPoint) -> Result<f64> {
    let (k, _, q) = model.couplings();
    let lab = lab_state(point)?;
    let f = model.field_at(point.x())?;
    let phi = if q == 0.0 { 0.0 } else { model.field.potential_at(point.x())? };
    Ok(lab.gamma() * (model.coeffs.m + k * point.alpha(&f)) - q * phi)
}

fn lab_state(point: &EvolutionPoint) -> Result<LabFrameState> {
    lab_decompose(point.x(), point.i(), point.j(), &observer())
}

/// `𝓜 = X P̄ - P X̄ + s Ω`, the moment map of the Lorentz group. Its spatial
/// block is `j(J)` with `J` the angular momentum.
pub fn moment_matrix(model: &TwoFormModel, point: &EvolutionPoint) -> Result<SkewEndomorphism> {
    let p = model.momentum(point)?;
    let x = point.x();
    let m: Matrix4<f64> = outer_bar(x, &p) - outer_bar(&p, x) + point.spin_tensor().matrix() * model.coeffs.s;
    Ok(SkewEndomorphism::skew_part(&m))
}

/// `J` read off the spatial block of [`moment_matrix`].
pub fn angular_momentum_from_moment(model: &TwoFormModel, point: &EvolutionPoint) -> Result<Vector3<f64>> {
    let m = moment_matrix(model, point)?;
    Ok(unhat(&m.matrix().fixed_view::<3, 3>(0, 0).into_owned()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub h: f64,
    pub jvec: Vector3<f64>,
    pub l: Vector3<f64>,
    pub s: Vector3<f64>,
    pub alpha: f64,
    /// `⟨S, L⟩`.
    pub sl: f64,
    /// `(φ'(r)/r) ⟨S, L⟩` for central fields.
    pub spin_orbit_term: Option<f64>,
}

/// Lab decomposition `J = L + S` with `L = r × (γ M v + γ̃ ℓ u × E)` and
/// `S = s γ γ̃ (u - v ⟨u, v⟩)`.
pub fn angular_momentum(model: &TwoFormModel, point: &EvolutionPoint) -> Result<MomentReport> {
    let (k, l, _) = model.couplings();
    let lab = lab_state(point)?;
    let f = model.field_at(point.x())?;
    let alpha = point.alpha(&f);
    let (gamma, gamma_t) = (lab.gamma(), lab.gamma_tilde());
    let mass = model.coeffs.m + k * alpha;
    let e = f.e_part();
    let orbital = lab.r.cross(&(lab.v * (gamma * mass) + lab.u.cross(&e) * (gamma_t * l)));
    let spin = (lab.u - lab.v * lab.u.dot(&lab.v)) * (model.coeffs.s * gamma * gamma_t);
    let sl = spin.dot(&orbital);
    let spin_orbit_term = match model.field.radial_slope_at(point.x()) {
        Ok((r, slope)) => Some(slope / r * sl),
        Err(_) => None,
    };
    Ok(MomentReport {
        h: energy(model, point)?,
        jvec: orbital + spin,
        l: orbital,
        s: spin,
        alpha,
        sl,
        spin_orbit_term,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservationReport {
    pub h0: f64,
    pub j0: Vector3<f64>,
    /// `max |H - H₀| / |H₀|`.
    pub h_drift: f64,
    /// `max |J_a - J_a(0)| / |J(0)|` per component.
    pub j_drift: [f64; 3],
}

impl ConservationReport {
    pub fn worst(&self) -> f64 {
        self.j_drift.iter().cloned().fold(self.h_drift, f64::max)
    }
}

pub fn conservation_report(trajectory: &Trajectory, model: &TwoFormModel) -> Result<ConservationReport> {
    let first = &trajectory.samples[0].point;
    let h0 = energy(model, first)?;
    let j0 = angular_momentum_from_moment(model, first)?;
    let (h_scale, j_scale) = (h0.abs().max(f64::MIN_POSITIVE), j0.norm().max(f64::MIN_POSITIVE));
    let mut report = ConservationReport { h0, j0, h_drift: 0.0, j_drift: [0.0; 3] };
    for sample in &trajectory.samples {
        let h = energy(model, &sample.point)?;
        let j = angular_momentum_from_moment(model, &sample.point)?;
        report.h_drift = report.h_drift.max((h - h0).abs() / h_scale);
        for a in 0..3 {
            report.j_drift[a] = report.j_drift[a].max((j[a] - j0[a]).abs() / j_scale);
        }
    }
    Ok(report)
}

/// Rows matching [`crate::dynamics::TRAJECTORY_HEADER`].
pub fn trajectory_rows(trajectory: &Trajectory, model: &TwoFormModel) -> Result<Vec<[f64; 24]>> {
    trajectory
        .samples
        .iter()
        .map(|s| {
            let (x, i, j) = (s.point.x(), s.point.i(), s.point.j());
            let h = energy(model, &s.point).unwrap_or(f64::NAN);
            let am = angular_momentum_from_moment(model, &s.point)?;
            let c = |name| s.diagnostics.get(name).copied().unwrap_or(f64::NAN);
            Ok([
                s.tau, x[0], x[1], x[2], x[3], i[0], i[1], i[2], i[3], j[0], j[1], j[2], j[3], s.p[0], s.p[1],
                s.p[2], s.p[3], h, am[0], am[1], am[2], c("c1"), c("c2"), c("c3"),
            ])
        })
        .collect()
}

/// Fit of the spin-orbit energy at one field scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleFit {
    pub eps: f64,
    pub coefficient: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinOrbitFit {
    pub per_scale: Vec<ScaleFit>,
    /// Extrapolation of the coefficient to `ε = 0`.
    pub coefficient: f64,
    pub std_error: f64,
    /// `k / (s m)`.
    pub theory: f64,
}

impl SpinOrbitFit {
    pub fn relative_error(&self) -> f64 {
        ((self.coefficient - self.theory) / self.theory).abs()
    }
}

/// Below this relative spread of `(φ'/r)⟨S, L⟩` the regression is refused.
pub const MIN_SPIN_ORBIT_SPREAD: f64 = 1e-9;

/// Regresses `H - m γ + q φ` against `(φ'(r)/r)⟨S, L⟩` over `family` for
/// each scaled field `ε · field`, then extrapolates the slopes linearly to
/// `ε = 0`.
pub fn spin_orbit_fit(
    coeffs: &ModelCoefficients,
    field: &FieldModel,
    family: &[LabFrameState],
    eps_list: &[f64],
) -> Result<SpinOrbitFit> {
    if family.len() < 2 {
        return Err(Error::IllConditionedFit("need at least two states".into()));
    }
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("eps_list must hold positive values".into()));
    }
    let mut per_scale = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let model = TwoFormModel::from_coeffs(*coeffs, field.scaled(eps));
        let (_, _, q) = model.couplings();
        let (mut sxx, mut sxy, mut scale2) = (0.0, 0.0, 0.0);
        let mut pairs = Vec::with_capacity(family.len());
        for state in family {
            let point = EvolutionPoint::from_lab(state);
            let report = angular_momentum(&model, &point)?;
            let (r, slope) = model.field.radial_slope_at(point.x())?;
            let x = report.spin_orbit_term.expect("central field");
            let phi = model.field.potential_at(point.x())?;
            let y = report.h - coeffs.m * state.gamma() + q * phi;
            sxx += x * x;
            sxy += x * y;
            scale2 += (slope / r * report.s.norm() * report.l.norm()).powi(2);
            pairs.push((x, y));
        }
        if !(sxx > (MIN_SPIN_ORBIT_SPREAD * MIN_SPIN_ORBIT_SPREAD) * scale2) {
            return Err(Error::IllConditionedFit(format!(
                "spin-orbit regressor has no spread at eps = {eps:e}"
            )));
        }
        let c = sxy / sxx;
        let rss: f64 = pairs.iter().map(|(x, y)| (y - c * x).powi(2)).sum();
        let std_error = (rss / (pairs.len() - 1) as f64 / sxx).sqrt();
        per_scale.push(ScaleFit { eps, coefficient: c, std_error });
    }
    let (coefficient, std_error) = extrapolate(&per_scale);
    Ok(SpinOrbitFit { per_scale, coefficient, std_error, theory: coeffs.spin_orbit_coefficient() })
}

/// Intercept and its standard error of the least-squares line through
/// `(ε, c(ε))`; a single scale is returned as is.
fn extrapolate(fits: &[ScaleFit]) -> (f64, f64) {
    if fits.len() == 1 {
        return (fits[0].coefficient, fits[0].std_error);
    }
    let n = fits.len() as f64;
    let me = fits.iter().map(|f| f.eps).sum::<f64>() / n;
    let mc = fits.iter().map(|f| f.coefficient).sum::<f64>() / n;
    let see: f64 = fits.iter().map(|f| (f.eps - me).powi(2)).sum();
    let sec: f64 = fits.iter().map(|f| (f.eps - me) * (f.coefficient - mc)).sum();
    let slope = sec / see;
    let intercept = mc - slope * me;
    let spread = if fits.len() > 2 {
        let rss: f64 = fits.iter().map(|f| (f.coefficient - intercept - slope * f.eps).powi(2)).sum();
        (rss / (n - 2.0) * (1.0 / n + me * me / see)).sqrt()
    } else {
        0.0
    };
    let inherited = fits.iter().map(|f| f.std_error).fold(0.0, f64::max);
    (intercept, spread.max(inherited))
}
