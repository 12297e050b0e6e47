//! Special-function kernel: Gaussian tails, the Hermite function, stable
//! densities, Bessel K_1, and structural densities with their moments.

mod bessel;
mod erf;
mod gamma;
mod hermite;
mod stable;
mod structural;

pub use bessel::{bessel_k1, BESSEL_K1_X_MAX, BESSEL_K1_X_MIN};
pub use erf::{erf, erfc, erfcx, gaussian_cdf, gaussian_pdf, gaussian_quantile};
pub use gamma::{gamma, gamma_p, gamma_q, ln_factorial, ln_gamma, ln_gamma_signed, ln_rising};
pub use hermite::{
    hermite_h, hermite_h_series, ln_hermite_h_neg, mills_chain, mills_ratio, HermiteEval,
    HermiteEvalMethod, HERMITE_Z_MAX,
};
pub use stable::{
    stable_density, stable_density_half, stable_density_series, STABLE_CANCELLATION_BUDGET,
};
pub(crate) use structural::stable_kernel_integral;
pub use structural::{
    c_alpha_theta, gaussian_abs_moment, structural_cdf_brownian, structural_density,
    structural_density_invgauss, structural_moment, structural_moment_brownian_closed,
    structural_moment_quadrature, structural_quantile_brownian, StructuralDensityParams,
};
