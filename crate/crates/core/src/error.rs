use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("braided topology needs at least two coupling points per atom")]
    BraidedWithSinglePoint,

    #[error("initial state is not normalized: |c1|^2 + |c2|^2 = {0}")]
    NotNormalized(f64),

    #[error("dark line n={n} requires gamma*tau = {gamma_tau} <= 0 at omega*tau = {omega_tau}")]
    NonPositiveGamma { n: u64, omega_tau: f64, gamma_tau: f64 },

    #[error("configuration is off the dark line n={n} (pole residual {residual:.3e})")]
    NotOnDarkLine { n: u64, residual: f64 },

    #[error("lines n={n1} and n={n2} do not intersect at positive gamma")]
    NoPositiveGammaIntersection { n1: u64, n2: u64 },

    #[error("no classification row for m={m}, p={p}, N={n_points}, q~={q_tilde}")]
    UnclassifiedCell { m: String, p: String, n_points: usize, q_tilde: u32 },

    #[error("pole search did not converge: {0}")]
    NonConvergence(String),

    #[error("step too coarse: h * rate = {0:.3} exceeds 0.1")]
    StepTooCoarse(f64),

    #[error("field requested at t={t} but trajectory ends at {t_end}")]
    HistoryExhausted { t: f64, t_end: f64 },

    #[error("omega*tau = {0} is a multiple of pi; decoherence-free formulas diverge")]
    DivergentAtResonance(f64),

    #[error("operation requires the braided topology")]
    RequiresBraided,

    #[error("not a decoherence-free interaction point: {0}")]
    NotDfiPoint(String),

    #[error("expected 2 dark and 2 quasi-dark modes, got {dark} and {quasi}")]
    ModeCountMismatch { dark: usize, quasi: usize },

    #[error("unsupported initial state: {0}")]
    UnsupportedInitialState(String),

    #[error("config file line {line}: {msg}")]
    ConfigSyntax { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
