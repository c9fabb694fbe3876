//! External electromagnetic fields `F(X)` as skew endomorphisms.
//!
//! Central fields follow the static electric-like form
//! `F = [[0, E], [Eᵀ, 0]]` with `E = -φ'(r) r/r`. Directional derivatives are
//! analytic so that the kernel solver sees a gradient consistent with `F` to
//! machine precision.

use nalgebra::{Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::minkowski::{four, metric, spatial, FourVector, SkewEndomorphism};

/// Radial potential profile `φ(r)`.
#[derive(Clone, Debug, PartialEq)]
pub enum RadialProfile {
    /// `φ = κ / r`, normalized by `φ(∞) = 0`.
    Coulomb { kappa: f64 },
    /// `φ = ½ κ r²`, normalized by `φ(0) = 0`.
    Harmonic { kappa: f64 },
    /// C³ interpolant through radial samples, see [`RadialTable`].
    Tabulated(RadialTable),
}

impl RadialProfile {
    /// `(φ, φ', φ'')` at radius `r`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        match self {
            RadialProfile::Coulomb { kappa } => {
                (kappa / r, -kappa / (r * r), 2.0 * kappa / (r * r * r))
            }
            RadialProfile::Harmonic { kappa } => (0.5 * kappa * r * r, kappa * r, *kappa),
            RadialProfile::Tabulated(table) => table.eval(r),
        }
    }
}

/// Smooth interpolant `φ(r)` through strictly increasing samples.
///
/// A natural cubic spline supplies `φ'`, `φ''` and `φ'''` at the samples;
/// each interval is then the degree-7 Hermite polynomial matching `φ` and
/// those three derivatives at both ends, so the interpolant is C³. The
/// closedness audit differentiates `∇F`, which needs `φ'''`; a cubic spline
/// alone would jump there at every sample. Outside the sampled range `φ`
/// continues linearly, matching `φ'' = φ''' = 0` at the end samples.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialTable {
    r: Vec<f64>,
    /// Polynomial coefficients in `t = (x - r_k) / (r_{k+1} - r_k)`.
    pieces: Vec<[f64; 8]>,
    /// `(φ, φ')` at both ends, for the linear continuation.
    ends: [(f64, f64); 2],
}

fn natural_second_derivatives(r: &[f64], phi: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut second = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for k in 1..n - 1 {
        let h0 = r[k] - r[k - 1];
        let h1 = r[k + 1] - r[k];
        diag[k] = 2.0 * (h0 + h1);
        upper[k] = h1;
        rhs[k] = 6.0 * ((phi[k + 1] - phi[k]) / h1 - (phi[k] - phi[k - 1]) / h0);
    }
    for k in 2..n - 1 {
        let w = (r[k] - r[k - 1]) / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    for k in (1..n - 1).rev() {
        second[k] = (rhs[k] - upper[k] * second[k + 1]) / diag[k];
    }
    second
}

/// `i! / (i - n)!`, the factor of `t^(i-n)` in the `n`-th derivative of `t^i`.
fn falling(i: usize, n: usize) -> f64 {
    if n > i {
        return 0.0;
    }
    (i - n + 1..=i).map(|v| v as f64).product()
}

impl RadialTable {
    pub fn new(r: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let n = r.len();
        if n != phi.len() {
            return Err(Error::InvalidInput("table columns differ in length".into()));
        }
        if n < 4 {
            return Err(Error::InvalidInput("table needs at least 4 samples".into()));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("table radii must be strictly increasing".into()));
        }
        if r.iter().chain(phi.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("table contains non-finite values".into()));
        }

        let m = natural_second_derivatives(&r, &phi);
        let width: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
        // derivatives of the cubic spline at the samples; φ''' averaged over
        // the two neighbouring intervals, zero at the ends
        let mut d1 = vec![0.0; n];
        let mut d3 = vec![0.0; n];
        for k in 0..n - 1 {
            d1[k] = (phi[k + 1] - phi[k]) / width[k] - width[k] * (2.0 * m[k] + m[k + 1]) / 6.0;
        }
        d1[n - 1] = (phi[n - 1] - phi[n - 2]) / width[n - 2] + width[n - 2] * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
        for k in 1..n - 1 {
            d3[k] = 0.5 * ((m[k] - m[k - 1]) / width[k - 1] + (m[k + 1] - m[k]) / width[k]);
        }

        let inverse = Matrix4::from_fn(|row, col| falling(col + 4, row))
            .try_inverse()
            .expect("Hermite system is regular");
        let pieces = (0..n - 1)
            .map(|k| {
                let h = width[k];
                let at = |j: usize| [phi[j], d1[j] * h, m[j] * h * h, d3[j] * h * h * h];
                let (left, right) = (at(k), at(k + 1));
                let mut c = [0.0; 8];
                for (i, v) in left.iter().enumerate() {
                    c[i] = v / falling(i, i);
                }
                let rhs = nalgebra::Vector4::from_fn(|row, _| {
                    right[row] - (0..4).map(|i| c[i] * falling(i, row)).sum::<f64>()
                });
                c[4..].copy_from_slice((inverse * rhs).as_slice());
                c
            })
            .collect();
        let ends = [(phi[0], d1[0]), (phi[n - 1], d1[n - 1])];
        Ok(RadialTable { r, pieces, ends })
    }

    /// Parses whitespace- or comma-separated `r phi` rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Vec::new();
        let mut phi = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "table line {}: expected 2 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("table line {}: {e}", lineno + 1)))
            };
            r.push(parse(cols[0])?);
            phi.push(parse(cols[1])?);
        }
        Self::new(r, phi)
    }

    /// `(φ, φ', φ'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let r = &self.r;
        let n = r.len();
        if x <= r[0] || x >= r[n - 1] {
            let (end, (value, slope)) = if x <= r[0] { (r[0], self.ends[0]) } else { (r[n - 1], self.ends[1]) };
            return (value + slope * (x - end), slope, 0.0);
        }
        let k = match r.binary_search_by(|probe| probe.total_cmp(&x)) {
            Ok(k) => k.min(n - 2),
            Err(k) => k - 1,
        };
        let h = r[k + 1] - r[k];
        let t = (x - r[k]) / h;
        let c = &self.pieces[k];
        let (mut value, mut slope, mut curvature) = (0.0, 0.0, 0.0);
        for i in (0..8).rev() {
            value = value * t + c[i];
            if i >= 1 {
                slope = slope * t + c[i] * i as f64;
            }
            if i >= 2 {
                curvature = curvature * t + c[i] * (i * (i - 1)) as f64;
            }
        }
        (value, slope / h, curvature / (h * h))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldKind {
    /// Constant field. A static potential exists when the electric part
    /// vanishes or a gauge origin is configured.
    Uniform {
        f0: SkewEndomorphism,
        gauge_origin: Option<FourVector>,
    },
    /// Static, rotation-invariant electric-like field around the spatial origin.
    CentralElectric { profile: RadialProfile, r_min: f64 },
    /// `E = κ ẑ × r`. Violates `dF = 0`; used as a negative control for the
    /// Maxwell and closedness checks.
    Swirl { kappa: f64 },
}

/// A field model plus the static observer `U`, with an overall strength
/// multiplier used by weak-field scans.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldModel {
    pub kind: FieldKind,
    pub observer: FourVector,
    pub scale: f64,
}

pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const MAXWELL_TOL: f64 = 1e-6;

impl FieldModel {
    pub fn new(kind: FieldKind) -> Self {
        FieldModel {
            kind,
            observer: FourVector::new(0.0, 0.0, 0.0, 1.0),
            scale: 1.0,
        }
    }

    pub fn zero() -> Self {
        Self::uniform(SkewEndomorphism::zero())
    }

    pub fn uniform(f0: SkewEndomorphism) -> Self {
        Self::new(FieldKind::Uniform { f0, gauge_origin: None })
    }

    pub fn coulomb(kappa: f64) -> Self {
        Self::new(FieldKind::CentralElectric {
            profile: RadialProfile::Coulomb { kappa },
            r_min: DEFAULT_R_MIN,
        })
    }

    pub fn harmonic(kappa: f64) -> Self {
        Self::new(FieldKind::CentralElectric {
            profile: RadialProfile::Harmonic { kappa },
            r_min: DEFAULT_R_MIN,
        })
    }

    pub fn tabulated(table: RadialTable) -> Self {
        Self::new(FieldKind::CentralElectric {
            profile: RadialProfile::Tabulated(table),
            r_min: DEFAULT_R_MIN,
        })
    }

    pub fn swirl(kappa: f64) -> Self {
        Self::new(FieldKind::Swirl { kappa })
    }

    /// Same model with the field strength multiplied by `eps`.
    pub fn scaled(&self, eps: f64) -> Self {
        FieldModel {
            scale: self.scale * eps,
            ..self.clone()
        }
    }

    pub fn with_gauge_origin(mut self, origin: FourVector) -> Self {
        if let FieldKind::Uniform { gauge_origin, .. } = &mut self.kind {
            *gauge_origin = Some(origin);
        }
        self
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, FieldKind::Uniform { .. })
    }

    /// True when `F` vanishes identically.
    pub fn is_zero(&self) -> bool {
        if self.scale == 0.0 {
            return true;
        }
        match &self.kind {
            FieldKind::Uniform { f0, .. } => f0.matrix().iter().all(|&v| v == 0.0),
            FieldKind::CentralElectric { profile, .. } => match profile {
                RadialProfile::Coulomb { kappa } | RadialProfile::Harmonic { kappa } => *kappa == 0.0,
                RadialProfile::Tabulated(_) => false,
            },
            FieldKind::Swirl { kappa } => *kappa == 0.0,
        }
    }

    fn radius(&self, x: &FourVector, r_min: f64) -> Result<(Vector3<f64>, f64)> {
        let rv = spatial(x);
        let r = rv.norm();
        if !(r > r_min) {
            return Err(Error::FieldSingularity { r, r_min });
        }
        Ok((rv, r))
    }

    /// `F(X)`.
    pub fn field_at(&self, x: &FourVector) -> Result<SkewEndomorphism> {
        let f = match &self.kind {
            FieldKind::Uniform { f0, .. } => *f0,
            FieldKind::CentralElectric { profile, r_min } => {
                let (rv, r) = self.radius(x, *r_min)?;
                let (_, dphi, _) = profile.eval(r);
                SkewEndomorphism::electric(rv * (-dphi / r))
            }
            FieldKind::Swirl { kappa } => {
                SkewEndomorphism::electric(Vector3::new(-x[1], x[0], 0.0) * *kappa)
            }
        };
        Ok(f * self.scale)
    }

    /// Directional derivative `∇_dir F` at `X`.
    pub fn grad_field_at(&self, x: &FourVector, direction: &FourVector) -> Result<SkewEndomorphism> {
        let d = spatial(direction);
        let g = match &self.kind {
            FieldKind::Uniform { .. } => SkewEndomorphism::zero(),
            FieldKind::CentralElectric { profile, r_min } => {
                let (rv, r) = self.radius(x, *r_min)?;
                let (_, dphi, d2phi) = profile.eval(r);
                // E = f(r) r⃗ with f = -φ'/r, so ∂_d E = f d + (f'/r) r⃗ ⟨r⃗, d⟩.
                let f = -dphi / r;
                let fprime = -d2phi / r + dphi / (r * r);
                SkewEndomorphism::electric(d * f + rv * (fprime / r * rv.dot(&d)))
            }
            FieldKind::Swirl { kappa } => {
                SkewEndomorphism::electric(Vector3::new(-d[1], d[0], 0.0) * *kappa)
            }
        };
        Ok(g * self.scale)
    }

    /// Static scalar potential `φ(X)` of the field. For central fields this
    /// is the radial profile itself, so `E = -∇φ`.
    pub fn potential_at(&self, x: &FourVector) -> Result<f64> {
        match &self.kind {
            FieldKind::Uniform { f0, gauge_origin } => {
                let e = f0.e_part();
                if e.iter().all(|&c| c == 0.0) {
                    return Ok(0.0);
                }
                let origin = gauge_origin.ok_or(Error::NoPotential)?;
                Ok(-self.scale * e.dot(&(spatial(x) - spatial(&origin))))
            }
            FieldKind::CentralElectric { profile, r_min } => {
                let (_, r) = self.radius(x, *r_min)?;
                Ok(self.scale * profile.eval(r).0)
            }
            FieldKind::Swirl { .. } => Err(Error::NoPotential),
        }
    }

    /// `(r, φ'(r))` of a central field at `x`, with the scale applied.
    pub fn radial_slope_at(&self, x: &FourVector) -> Result<(f64, f64)> {
        match &self.kind {
            FieldKind::CentralElectric { profile, r_min } => {
                let (_, r) = self.radius(x, *r_min)?;
                Ok((r, self.scale * profile.eval(r).1))
            }
            _ => Err(Error::InvalidInput("radial slope needs a central field".into())),
        }
    }

    /// Largest component of the finite-difference exterior derivative of the
    /// 2-form `g F`; analytically zero for Maxwell fields. Returns infinity
    /// when the stencil touches a singularity.
    pub fn check_maxwell(&self, x: &FourVector) -> f64 {
        const H: f64 = 1e-4;
        let g = metric();
        let mut partials = [Matrix4::zeros(); 4];
        for (a, partial) in partials.iter_mut().enumerate() {
            let mut step = FourVector::zeros();
            step[a] = H;
            match (self.field_at(&(x + step)), self.field_at(&(x - step))) {
                (Ok(fp), Ok(fm)) => *partial = g * (fp.matrix() - fm.matrix()) / (2.0 * H),
                _ => return f64::INFINITY,
            }
        }
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in a + 1..4 {
                for c in b + 1..4 {
                    let d = partials[a][(b, c)] + partials[b][(c, a)] + partials[c][(a, b)];
                    worst = worst.max(d.abs());
                }
            }
        }
        worst
    }
}

/// Spatial rotation `R` lifted to Minkowski space as `diag(R, 1)`.
pub fn spatial_rotation(rot: &nalgebra::Matrix3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(rot);
    m
}

/// Event at the spatial point `r` and time `t`.
pub fn event(r: [f64; 3], t: f64) -> FourVector {
    four(&Vector3::from(r), t)
}
