//! Error types shared by all solver modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ScatterError>;

#[derive(Debug, Error)]
pub enum ScatterError {
    #[error("invalid energy {0}: scattering energies must be positive")]
    InvalidEnergy(f64),

    #[error("invalid constants: hbar and mass must be positive (hbar={hbar}, mass={mass})")]
    InvalidConstants { hbar: f64, mass: f64 },

    #[error("grid too coarse: K*dx = {kdx:.3e} exceeds the guard {guard}")]
    GridTooCoarse { kdx: f64, guard: f64 },

    #[error("degenerate plane-wave extraction: sin(K*dx) = {0:.3e}; K*dx is a multiple of pi, refine the grid")]
    DegenerateExtraction(f64),

    #[error("no half-range below {bound} keeps |V| under {threshold:.3e}")]
    RangeNotFound { bound: f64, threshold: f64 },

    #[error("energy grid must be strictly increasing and positive")]
    InvalidEnergyGrid,

    #[error("solutions live on mismatched grids or energies")]
    GridMismatch,

    #[error("solution does not carry wavefunction samples (solver ran with storage disabled)")]
    MissingWavefunction,

    #[error("Born order {0} unsupported: only first and second order are implemented")]
    UnsupportedBornOrder(u32),

    #[error("basis size {0} too small: need at least 2 functions")]
    InvalidBasisSize(usize),

    #[error("potential support exceeds the box: |V(+-a)| = {edge_value:.3e} > {tolerance:.3e}")]
    SupportExceedsBox { edge_value: f64, tolerance: f64 },

    #[error("dense eigensolve failed: {0}")]
    EigensolveFailure(String),

    #[error("quadratic eigenvalue problem produced a zero eigenvalue (|lambda| = {0:.3e})")]
    ZeroEigenvalue(f64),

    #[error("eigenvalue pair closer than the degeneracy tolerance (gap {gap:.3e} < {tolerance:.3e})")]
    DegeneratePencil { gap: f64, tolerance: f64 },

    #[error("eigenpair residual {residual:.3e} exceeds {tolerance:.3e}; pencil may be defective")]
    DefectivePencil { residual: f64, tolerance: f64 },

    #[error("position {x} lies outside the box [-{a}, +{a}]")]
    OutOfBox { x: f64, a: f64 },

    #[error("physical momentum within {0:.3e} of a Siegert eigenvalue; spectral sum is singular")]
    PoleProximity(f64),

    #[error("state {0} is not classified as a resonance")]
    NotAResonance(usize),

    #[error("scan curve does not cover the window [{lo}, {hi}]")]
    WindowUncovered { lo: f64, hi: f64 },

    #[error("packet momentum support [k0 - 6 sigma, ...] touches k = 0 (k0={k0}, sigma={sigma})")]
    SupportTouchesZero { k0: f64, sigma: f64 },

    #[error("stationary states were built for different momentum nodes than the packet")]
    NodeMismatch,

    #[error("branch domain violation: {0}")]
    BranchDomain(&'static str),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("solve failed at E = {energy}: {source}")]
    AtEnergy {
        energy: f64,
        #[source]
        source: Box<ScatterError>,
    },

    #[error("tabulated potential needs at least 4 samples with strictly increasing x")]
    InvalidTable,
}

impl ScatterError {
    pub(crate) fn at_energy(energy: f64, source: ScatterError) -> Self {
        ScatterError::AtEnergy {
            energy,
            source: Box::new(source),
        }
    }
}
