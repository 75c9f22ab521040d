//! Network benchmarking and two-qubit randomized benchmarking over a
//! circuit-level density-matrix simulation, with decay fitting.

mod executor;
mod fit;
mod noise;
mod protocols;

pub use executor::Executor;
pub use fit::{
    decay_points, eps_from_decay, fit_exponential, fit_leakage, fit_points, interleaved_error,
    DecayFitResult, RateSummary,
};
pub use noise::{
    ideal_transfer_channel, marginal_zero, multinomial_counts, spam_apply, transfer_channel_from_dynamics, IdleParams,
    NoiseModel, SpamModel,
};
pub use protocols::{
    run_network_benchmarking, run_two_qubit_rb, Population, Protocol, RbDataset, RbRecord,
    DEFAULT_SEEDS, DEFAULT_SHOTS, LEAKAGE_LENGTHS, NB_LENGTHS, TQRB_LENGTHS,
};

#[cfg(test)]
mod tests;
