use thiserror::Error;

/// Errors raised by the geometric constructions and evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} is outside its domain (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("cap construction failed: no admissible cap polynomial found down to r0 = {last_r0}")]
    CapConstruction { last_r0: f64 },

    #[error("blend construction failed: phi' stays negative on [r1, r2] up to c = {last_c}")]
    BlendConstruction { last_c: f64 },

    #[error("graph slope blows up: h/phi^(n-2) = {ratio} >= 1 at r = {r}")]
    SlopeBlowup { r: f64, ratio: f64 },

    #[error("ODE right-hand side is singular on the axis r = 0")]
    AxisSingular,

    #[error("step size underflow at s = {s}, r = {r}")]
    StepUnderflow { s: f64, r: f64 },

    #[error("reflection requires a vertical end tangent (sigma = +-pi/2), got sigma = {sigma}")]
    NotVertical { sigma: f64 },

    #[error("trajectory too short: {len} states, need at least {need}")]
    TooShort { len: usize, need: usize },

    #[error("vertical strips of half-width {eps} around l0 and l2 overlap (need eps < Lx/4 = {limit})")]
    StripOverlap { eps: f64, limit: f64 },

    #[error("grid size {name} = {value} must be a positive multiple of 4")]
    GridDivisibility { name: &'static str, value: usize },

    #[error("one-form vanishes on a leaf tangent at grid point ({i}, {j}): |omega(T)| = {value} < margin {margin}")]
    LeafwiseVanishing { i: usize, j: usize, value: f64, margin: f64 },

    #[error("omega(JN) must be positive after sign alignment, got {value} at grid column {i}")]
    NonpositiveW { i: usize, value: f64 },

    #[error("curve sample ({x}, {y}) leaves the grid chart")]
    CurveLeavesGrid { x: f64, y: f64 },

    #[error("quadrature did not converge on [{a}, {b}] (best error {err})")]
    QuadratureNoConverge { a: f64, b: f64, err: f64 },

    #[error("root bracketing failed for {what}")]
    NoBracket { what: &'static str },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
