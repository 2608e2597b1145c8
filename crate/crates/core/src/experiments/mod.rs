//! Demonstration drivers built on the simulator: least-action path dominance
//! in a refracting medium, period finding on a comb state, a nonunitary
//! amplifier, and a DFT with a miscalibrated phase exponent.

mod amplify;
mod fermat;
mod grating;
mod medium;
mod noise;
mod report;

pub use amplify::{amplify_demo, amplify_trajectory, marked_probabilities, steps_to_half_closed_form, AmplifyOutcome};
pub use fermat::{
    diffraction_comparison, fermat_demo, fermat_query, fermat_split_spec, least_time_path, mean_concentration,
    top_one_percent, DiffractionComparison, FermatQuery, DT, PHASE_DELAY,
};
pub use grating::{comb_distribution, comb_state, grating_demo, grating_outcome, recovered_period, GratingOutcome};
pub use medium::{MediumProfile, Roughness};
pub use noise::{distribution_fidelity, noisy_dft, phase_noise_demo, NoiseOutcome, DEFAULT_DELTA_SWEEP};
pub use report::{DemoReport, Series};
