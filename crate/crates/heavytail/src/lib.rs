//! Heavy-tailed return distributions for high-frequency price series.
//!
//! The pipeline: extract log-returns from a price series
//! ([`timeseries`]), bin them into a normalized empirical density
//! ([`density`]), and fit the parametric families of interest -- Gaussian
//! versus Student-t / q-exponential ([`distributions`]). The same families
//! arise as stationary laws of a Langevin equation whose drift and diffusion
//! are cataloged in [`sde`]; the associated Fokker-Planck machinery
//! (stationary quadrature, explicit time evolution, the free-energy
//! functional) lives in [`fokker_planck`], giving independent routes --
//! closed form, quadrature, PDE evolution, and Monte-Carlo simulation --
//! that are cross-checked against each other in the test suites.

pub mod density;
pub mod distributions;
pub mod fokker_planck;
pub mod rng;
pub mod sde;
pub mod special;
pub mod timeseries;

pub use density::{estimate_density, log_density_points, DensitySpec, EmpiricalDensity, RangeSpec};
pub use distributions::{
    compare_fits, fit_gaussian, fit_student_t, gaussian_pdf, ks_statistic, nu_of_q, q_exponential_pdf,
    q_of_nu, student_t_pdf, CompareReport, DistParams, Family, FitResult, GaussianParams,
    QExponentialParams, StudentTParams,
};
pub use fokker_planck::{
    evolve_density, free_energy, stationary_density, EvolveOutcome, FreeEnergyReport, Grid,
    GridDensity,
};
pub use sde::{
    reconcile_naive_t, simulate, simulate_thinned, stationary_histogram, TailExponentReport, GFamily,
    SdeModel, SdeSpec, SimPath,
};
pub use timeseries::{
    load_prices, log_returns, normalize, resample, volatility, NormalizeMode, PriceSeries,
    ReturnSeries, TimeFormat,
};
