#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lsilab/errors.hpp"
#include "lsilab/functionals.hpp"
#include "lsilab/grid_measure.hpp"

namespace lsilab {

struct DisconnectedSupport final : Error { using Error::Error; };

struct EstimatorOptions {
    /// Slopes a for the exponential-family probes u = a*x. Empty means the
    /// default ladder {±0.5/σ, ±1/σ, ±2/σ}.
    std::vector<double> probe_slopes;
    std::size_t random_restarts = 4;
    std::uint64_t seed = 1;
    std::size_t max_iterations = 5000;
    double relative_tolerance = 1e-8;
    /// Weights at or below support_threshold * max(weight) count as holes.
    double support_threshold = 1e-13;
};

struct LsiEstimate {
    /// Best certified quotient; +infinity when the measure has a support gap.
    double value = 0.0;
    /// Exponent u achieving value, i.e. value == lsi_ratio(mu, certificate);
    /// empty when unbounded.
    GridFunction certificate;
    std::size_t probes_tried = 0;
    std::size_t iterations = 0;
    /// False when some ascent still made progress above tolerance at the
    /// iteration cap (e.g. certificates drifting toward a domain boundary).
    bool converged = false;
    /// Running incumbent after each accepted ascent step; non-decreasing.
    std::vector<double> ratio_history;

    [[nodiscard]] bool unbounded() const;
};

/// True when some interior grid point between the first and last
/// mass-carrying points holds weight <= threshold * max(weight). Such a
/// hole disconnects the support and makes the log-Sobolev constant infinite.
bool support_gap(const GridMeasure& mu, double threshold = 1e-13);

/// Lower estimate of the log-Sobolev constant: the best lsi_ratio found by
/// monotone gradient ascent from exponential, spectral and random probes.
/// Identical inputs and seed give bit-identical results.
LsiEstimate estimate_cls(const GridMeasure& mu, const EstimatorOptions& opts = {});

/// Poincare constant 1/lambda_2 of the generalized tridiagonal eigenproblem
/// A f = lambda M f (A the Dirichlet form matrix, M = diag(weights)),
/// computed by bisection with Sturm-sequence counting after a symmetric
/// M^{-1/2} reduction. Errors with DisconnectedSupport on a support gap.
double poincare(const GridMeasure& mu);

/// Poincare constant together with the spectral-gap eigenfunction, sampled
/// on mu's grid, normalized to mean 0 and variance 1 under mu.
std::pair<double, GridFunction> poincare_mode(const GridMeasure& mu);

}  // namespace lsilab
