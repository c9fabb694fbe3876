use std::fmt;

/// Which defining relation of the evolution space failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `I² = 1`
    UnitTimelike,
    /// `J² = -1`
    UnitSpacelike,
    /// `Ī J = 0`
    Orthogonal,
    /// `I` future-pointing
    FuturePointing,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::UnitTimelike => "I^2 = 1",
            Constraint::UnitSpacelike => "J^2 = -1",
            Constraint::Orthogonal => "I.J = 0",
            Constraint::FuturePointing => "I future-pointing",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not g-skew (residual {residual:.3e})")]
    NotSkew { residual: f64 },

    #[error("constraint {which} violated (residual {residual:.3e})")]
    ConstraintViolated { which: Constraint, residual: f64 },

    #[error("superluminal velocity |v| = {speed}")]
    Superluminal { speed: f64 },

    #[error("spin direction u is not a unit vector (|u| = {norm})")]
    NonUnitSpin { norm: f64 },

    #[error("observer-frame decomposition failed: I is not future-pointing")]
    NotFuturePointing,

    #[error("observer must be (0,0,0,1) for lab decomposition")]
    UnsupportedObserver,

    #[error("field singularity: r = {r:.3e} <= r_min = {r_min:.3e}")]
    FieldSingularity { r: f64, r_min: f64 },

    #[error("no global static potential for this field model")]
    NoPotential,

    #[error("state left the timelike cone (I^2 = {norm2:.3e})")]
    LeftTimelikeCone { norm2: f64 },

    #[error("degenerate spin direction (J^2 = {norm2:.3e} after orthogonalization)")]
    DegenerateSpin { norm2: f64 },

    #[error("momentum left the timelike cone (field too strong): P^2 = {p2:.3e}")]
    MomentumNotTimelike { p2: f64 },

    #[error("starred frame: |J.I*| = {residual:.3e} exceeds {bound:.3e}")]
    StarredOrthogonality { residual: f64, bound: f64 },

    #[error("kernel not one-dimensional (rank degeneracy): smallest singular values {smallest:.3e}, {second:.3e}")]
    RankDegeneracy { smallest: f64, second: f64 },

    #[error("lightlike characteristic direction, gauge fails (gauge value {gauge:.3e})")]
    LightlikeGauge { gauge: f64 },

    #[error("coefficients violate the BMT compatibility condition k + l = -(g/2) q s / m (residual {residual:.3e})")]
    NotBmtCompatible { residual: f64 },

    #[error("step size too large: constraint drift {drift:.3e} at step {step}")]
    StepTooLarge { drift: f64, step: usize },

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
