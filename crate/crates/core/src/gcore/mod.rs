//! Generalized estimators and their slope functionals.

mod estimator;
mod expect;
mod slope;
mod submanifold;
mod tables;

pub use estimator::{
    default_grid, diff_step, grid, lift_point_estimator, lift_with_mean, score_estimator, standardize,
    EstimatorKind, GenEstimator, MeanFunction, Moments, ParamFn, SampleFn, Statistic,
};
pub use expect::{expect, expect_observation, expect_with, ExpectConfig, ExpectMethod, Expectation};
pub use slope::{
    check_identity, effective_n, lambda_efficiency, score_correlation2, slope_report, squared_slope,
    v_efficiency, SlopeReport,
};
pub use submanifold::{two_submanifold_demo, Axis, CoordinateSlope, SubmanifoldDemo};
pub use tables::{
    bernoulli_efficiency_curves, bernoulli_statistics, cauchy_table, cauchy_table_row, interior_grid,
    median_lift, BernoulliEfficiencyRow, CauchyTableRow,
};
