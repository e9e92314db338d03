#pragma once

#include <vector>

#include "lsilab/errors.hpp"
#include "lsilab/grid_measure.hpp"

namespace lsilab {

struct NegativeArgument final : Error { using Error::Error; };
struct SingletonGrid final : Error { using Error::Error; };
struct DegenerateTestFunction final : Error { using Error::Error; };
struct NotLipschitz final : Error { using Error::Error; };

/// Values aligned index-by-index with a GridMeasure's grid.
using GridFunction = std::vector<double>;

/// Samples f at every grid point of mu.
GridFunction sample_function(const GridMeasure& mu, const std::function<double(double)>& f);

/// Ent_mu(g) = sum_i w_i g_i log g_i - (sum_i w_i g_i) log(sum_i w_i g_i),
/// with 0 log 0 = 0. Requires g >= -1e-13 entrywise (tiny negatives are
/// clamped); tiny negative results from round-off are clamped to 0.
double entropy_functional(const GridMeasure& mu, const GridFunction& g);

/// Discrete Dirichlet energy: sum over edges of
/// ((f_{i+1}-f_i)/h)^2 * (w_i + w_{i+1}) / 2.
double dirichlet(const GridMeasure& mu, const GridFunction& f);

/// Ent_mu(e^u) / (2 * dirichlet(mu, e^{u/2})), the log-Sobolev quotient of
/// the test function f^2 = e^u. Invariant under adding constants to u;
/// internally u is shifted by its maximum, so overflow cannot occur. Errors
/// with DegenerateTestFunction when the (shift-normalized) energy is below
/// 1e-300, e.g. for constant u.
double lsi_ratio(const GridMeasure& mu, const GridFunction& u);

/// Order-2 Wasserstein distance between two grid measures, computed exactly
/// through the quantile coupling on merged cumulative breakpoints.
double wasserstein2(const GridMeasure& mu, const GridMeasure& nu);

/// Sub-Gaussian tail certificate: max over t in t_values of
/// mu(f >= mean + t) / exp(-t^2 / (2c)). Values <= 1 certify the tail bound
/// on the grid. f must be 1-Lipschitz along the grid (tolerance 1e-9) and
/// every t must be positive.
double herbst_margin(const GridMeasure& mu, const GridFunction& f, double c,
                     const std::vector<double>& t_values);

}  // namespace lsilab
