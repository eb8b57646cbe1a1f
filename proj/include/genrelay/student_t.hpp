#pragma once

namespace genrelay {

/// Quantile of the Student-t distribution: returns x such that
/// P(T_dof <= x) = prob. dof may be fractional (effective sample mass
/// after exponential forgetting). Cached per thread.
double t_quantile(double prob, double dof);

/// Quantile of the standard normal distribution.
double normal_quantile(double prob);

} // namespace genrelay
