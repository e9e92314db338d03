#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lsilab/errors.hpp"

namespace lsilab {

struct NonFiniteDensity final : Error { using Error::Error; };
struct ZeroMass final : Error { using Error::Error; };
struct DomainTooNarrow final : Error { using Error::Error; };
struct OffLattice final : Error { using Error::Error; };
struct ZeroScale final : Error { using Error::Error; };
struct SpacingMismatch final : Error { using Error::Error; };
struct DegenerateMeasure final : Error { using Error::Error; };

/// First and second central moment of a grid measure.
struct MomentSummary {
    double mean = 0.0;
    double variance = 0.0;
};

/// Probability weights on a uniform one-dimensional grid. Grid point i sits
/// at origin + i * spacing; weights are non-negative and sum to one within
/// 1e-12. Instances are immutable; every operation returns a new measure.
class GridMeasure {
public:
    /// Validates the invariants (spacing > 0, at least one point, finite
    /// non-negative weights with total mass 1 within 1e-12).
    GridMeasure(double origin, double spacing, std::vector<double> weights);

    [[nodiscard]] double origin() const noexcept { return origin_; }
    [[nodiscard]] double spacing() const noexcept { return spacing_; }
    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

    [[nodiscard]] double point(std::size_t i) const noexcept {
        return origin_ + static_cast<double>(i) * spacing_;
    }
    [[nodiscard]] std::vector<double> points() const;

private:
    double origin_;
    double spacing_;
    std::vector<double> weights_;
};

using DensityFn = std::function<double(double)>;

/// Samples a non-negative density at the m grid points of [lo, hi]
/// (spacing (hi-lo)/(m-1)), multiplies by the cell width and normalizes.
/// No quadrature refinement: the grid is the model.
GridMeasure from_density(const DensityFn& density, double lo, double hi, std::size_t m);

/// Same sampling rule on an explicitly specified lattice. Used when the grid
/// must match another measure's lattice bit-exactly (e.g. before convolve).
GridMeasure sample_on_grid(const DensityFn& density, double origin, double spacing, std::size_t m);

/// Discretized Gaussian. Requires variance > 0 and [lo, hi] to cover
/// mean +- 4 sigma (error below that, warning to stderr below 6 sigma).
GridMeasure gaussian(double mean, double variance, double lo, double hi, std::size_t m);

/// Gaussian sampled on an explicit lattice; no coverage gate, meant for
/// constructing moment- and grid-matched references.
GridMeasure gaussian_on_grid(double mean, double variance, double origin, double spacing,
                             std::size_t m);

/// Measure from weighted atoms. All positions must lie on a common lattice
/// with the given spacing (tolerance 1e-9 * spacing); the grid spans the
/// positions' range and intermediate points get weight zero.
GridMeasure atoms(const std::vector<double>& positions, const std::vector<double>& masses,
                  double spacing);

/// Symmetric two-point measure at -1 and +1, represented on a lattice of the
/// given spacing (2/spacing must be integral).
GridMeasure rademacher(double spacing = 1.0);

/// Exact pushforward under x -> alpha * x + beta. Weights are untouched
/// (order reversed when alpha < 0); no resampling ever happens.
GridMeasure affine(const GridMeasure& mu, double alpha, double beta);

/// Distribution of the sum of independent draws from mu and nu. Requires
/// equal spacings (1e-12 relative). Uses an FFT when the output is long.
/// When prune is set, leading/trailing mass below 1e-12 total is dropped;
/// the result is renormalized either way.
GridMeasure convolve(const GridMeasure& mu, const GridMeasure& nu, bool prune = true);

/// Law of n^{-1/2} * (X_1 + ... + X_n) for X_i iid ~ mu: n-fold
/// self-convolution followed by a single affine rescale.
GridMeasure clt_measure(const GridMeasure& mu, std::size_t n);

MomentSummary moments(const GridMeasure& mu);

/// Affine image with mean 0 and variance 1. Errors when variance <= 1e-14.
GridMeasure standardize(const GridMeasure& mu);

/// CSV exchange format: header "x,w", one grid point per row, increasing x
/// on a uniform lattice (1e-9 relative tolerance). The reader renormalizes
/// and warns on stderr when the total mass deviates from 1 by more than 1e-6.
GridMeasure read_measure_csv(std::istream& in);
GridMeasure read_measure_csv_file(const std::string& path);
void write_measure_csv(std::ostream& out, const GridMeasure& mu);
void write_measure_csv_file(const std::string& path, const GridMeasure& mu);

}  // namespace lsilab
