//! Deterministic kernels: the full-line and Robin heat kernels of the walk,
//! the continuum Dirichlet kernels, Green-function cancellation, exact
//! moments and the bound suite.

mod bounds;
mod continuous;
mod fullline;
mod green;
mod moments;
pub mod quad;
mod robin;
pub mod special;

pub use bounds::{
    bounds_suite, first_moment_constant, time_monotonicity_ratio, universal_kernel_constant, BoundCheck,
    BoundsGrid, BoundsReport, FIT_MARGIN,
};
pub use continuous::{
    d_dirichlet_fourier, d_dirichlet_kernel, dirichlet_eval, dirichlet_kernel, gt_bound_constant, gt_function,
    gt_quadrature, nested_contour_integral, second_moment_bound, second_moment_exact, second_moment_ratio,
    ContinuousKernelEval, GtEval, NestedIntegral, SecondMomentEval,
};
pub(crate) use continuous::d_dirichlet_unchecked;
pub use fullline::{fullline_bessel, fullline_integral, fullline_kernel, fullline_table, negligible_index};
pub use green::{
    gradient_product_sum, green_cancellation, green_cancellation_by, green_cancellation_solve, green_column,
    green_function, green_tail, GreenRoute,
};
pub use moments::{first_moment_convolution, first_moment_exact, rescaled_first_moment};
pub use robin::{
    ode_lattice_for, robin_kernel, robin_matrix, robin_ode_row, robin_uniformized, RobinKernelSpec, RobinMethod,
    RobinTable, DEFAULT_SERIES_TOL,
};
