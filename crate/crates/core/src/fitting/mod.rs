//! Least-squares fitting and the model families used in the analysis.

mod hom;
mod lm;
mod models;
mod recipes;

pub use hom::{fit_hom_pair, HomFit, HomFitSetup};
pub use lm::{
    fd_step, finite_difference_jacobian, least_squares, FitProblem, FitResult, Model, COST_TOLERANCE,
    MAX_ITERATIONS,
};
pub use models::{
    exp_offset_initial_guess, jitter_for_g2_zero, model_g2, model_lorentzian_comb, BesselIntensity, ExpOffset, G2Model,
    G2ModelParams, HomPair, LorentzianComb,
};
pub use recipes::{fit_emitter, fit_lifetime, fit_sideband_comb, EmitterFit, SidebandFit};
