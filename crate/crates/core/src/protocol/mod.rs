//! Classical and quantum precession scores.
//!
//! The quantum score of a state at probing angles `{φ_k}` is
//! `(1/K) Σ_k ⟨ψ|e^{−iφ_k I_z} Pos(I_x) e^{iφ_k I_z}|ψ⟩ = ⟨ψ|Q|ψ⟩`, so its maximum over
//! states is the top eigenvalue of `Q`.

mod angles;
mod closed_form;
mod score;
mod sweep;

pub use angles::{check_angle_condition, circular_set_distance, AngleSet};
pub use closed_form::{
    binomial, cat_max_score, cat_q_coefficient, closed_form_max, closed_form_max_with, mixing_angle,
    ClosedFormMax, MixingForm,
};
pub use score::{
    classical_bound, classical_positive_count, classical_score, max_quantum_score, q_matrix,
    quantum_score, score_by_rotation, symmetry_aligned_fidelity, Maximum, QMethod, ScoreReport,
};
pub use sweep::{best_uniform_offset, count_periodic_maxima, pos_at, pos_sweep, uniform_score};
pub(crate) use angles::check_k;
