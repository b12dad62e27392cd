//! Central tolerance configuration. Every numerical gate in the crate reads
//! its threshold from here so the contracts stay in one place.

/// Numerical tolerances and caps used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max allowed |a_ij - a_ji| for a graph to count as symmetric.
    pub symmetry: f64,
    /// Max allowed |sum(weights) - 1| for a mass-normalized graph.
    pub mass: f64,
    /// Symmetry gate on eigensolver inputs.
    pub eigh_input_symmetry: f64,
    /// Convergence: off-diagonal Frobenius mass <= this factor times ||m||_F.
    pub eigh_offdiag_rel: f64,
    /// Eigenvector sign convention: first component with magnitude above this
    /// is made positive.
    pub eigh_sign: f64,
    /// Rotation cap factor: the cyclic Jacobi solver aborts after
    /// `eigh_rotation_cap_factor * n^2` rotations.
    pub eigh_rotation_cap_factor: usize,
    /// Class-balance gate on posterior column sums.
    pub class_balance: f64,
    /// Slack added by callers on top of the exact max degree ratio.
    pub rho_slack: f64,
    /// Bound denominators below this are rejected as degenerate.
    pub denominator: f64,
    /// Dense matrices larger than this are rejected.
    pub max_n: usize,
    /// Condition-number cap for the ridge probe normal system.
    pub probe_condition: f64,
    /// Default ridge strength for probe fitting.
    pub ridge_default: f64,
    /// Total positive mass below this cannot be sampled.
    pub sampler_mass_min: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        symmetry: 1e-12,
        mass: 1e-10,
        eigh_input_symmetry: 1e-10,
        eigh_offdiag_rel: 1e-12,
        eigh_sign: 1e-12,
        eigh_rotation_cap_factor: 100,
        class_balance: 1e-9,
        rho_slack: 1e-9,
        denominator: 1e-12,
        max_n: 2048,
        probe_condition: 1e14,
        ridge_default: 1e-8,
        sampler_mass_min: 1e-15,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
