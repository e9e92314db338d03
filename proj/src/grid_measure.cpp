#include "lsilab/grid_measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lsilab/detail/fft.hpp"
#include "lsilab/detail/numeric.hpp"

namespace lsilab {

namespace {

constexpr double kMassTol = 1e-12;

// Divides by the compensated total. Throws ZeroMass when nothing is left.
void normalize(std::vector<double>& w) {
    const double total = detail::neumaier_sum(w);
    if (!(total > 0.0)) throw ZeroMass("total mass is zero");
    for (double& x : w) x /= total;
}

// Drops leading/trailing weights as long as the mass removed from each end
// stays below half of the 1e-12 budget. Returns the index of the first kept
// point; the vector is shrunk in place.
std::size_t prune_tails(std::vector<double>& w) {
    constexpr double kBudgetPerEnd = 0.5e-12;
    std::size_t first = 0, last = w.size() - 1;
    double cum = 0.0;
    while (first < last && cum + w[first] <= kBudgetPerEnd) cum += w[first++];
    cum = 0.0;
    while (last > first && cum + w[last] <= kBudgetPerEnd) cum += w[last--];
    if (first == 0 && last == w.size() - 1) return 0;
    w = std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(first),
                            w.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return first;
}

}  // namespace

GridMeasure::GridMeasure(double origin, double spacing, std::vector<double> weights)
    : origin_(origin), spacing_(spacing), weights_(std::move(weights)) {
    if (!std::isfinite(origin_)) throw PreconditionViolation("grid origin must be finite");
    if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
        throw PreconditionViolation("grid spacing must be positive and finite");
    if (weights_.empty()) throw PreconditionViolation("a measure needs at least one grid point");
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0)
            throw PreconditionViolation("weights must be finite and non-negative");
    }
    const double total = detail::neumaier_sum(weights_);
    if (std::abs(total - 1.0) > kMassTol)
        throw PreconditionViolation("weights must sum to one within 1e-12");
}

std::vector<double> GridMeasure::points() const {
    std::vector<double> xs(weights_.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = point(i);
    return xs;
}

GridMeasure sample_on_grid(const DensityFn& density, double origin, double spacing,
                           std::size_t m) {
    if (m < 1) throw PreconditionViolation("sample_on_grid: m must be at least 1");
    if (!(spacing > 0.0)) throw PreconditionViolation("sample_on_grid: spacing must be positive");
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = origin + static_cast<double>(i) * spacing;
        const double v = density(x);
        if (!std::isfinite(v)) throw NonFiniteDensity("density sample is not finite");
        if (v < 0.0) throw PreconditionViolation("density must be non-negative");
        w[i] = v * spacing;
    }
    normalize(w);
    return {origin, spacing, std::move(w)};
}

GridMeasure from_density(const DensityFn& density, double lo, double hi, std::size_t m) {
    if (m < 2) throw PreconditionViolation("from_density: need at least two grid points");
    if (!(lo < hi)) throw PreconditionViolation("from_density: lo must be below hi");
    const double h = (hi - lo) / static_cast<double>(m - 1);
    return sample_on_grid(density, lo, h, m);
}

GridMeasure gaussian(double mean, double variance, double lo, double hi, std::size_t m) {
    if (!(variance > 0.0)) throw PreconditionViolation("gaussian: variance must be positive");
    const double sigma = std::sqrt(variance);
    if (lo > mean - 4.0 * sigma || hi < mean + 4.0 * sigma)
        throw DomainTooNarrow("gaussian: window must cover mean +- 4 sigma");
    if (lo > mean - 6.0 * sigma || hi < mean + 6.0 * sigma)
        std::cerr << "lsilab: warning: gaussian window covers less than mean +- 6 sigma\n";
    return from_density(
        [mean, sigma](double x) {
            const double z = (x - mean) / sigma;
            return std::exp(-0.5 * z * z);
        },
        lo, hi, m);
}

GridMeasure gaussian_on_grid(double mean, double variance, double origin, double spacing,
                             std::size_t m) {
    if (!(variance > 0.0)) throw PreconditionViolation("gaussian_on_grid: variance must be positive");
    const double sigma = std::sqrt(variance);
    return sample_on_grid(
        [mean, sigma](double x) {
            const double z = (x - mean) / sigma;
            return std::exp(-0.5 * z * z);
        },
        origin, spacing, m);
}

GridMeasure atoms(const std::vector<double>& positions, const std::vector<double>& masses,
                  double spacing) {
    if (positions.empty() || positions.size() != masses.size())
        throw PreconditionViolation("atoms: positions and masses must be non-empty and match");
    if (!(spacing > 0.0)) throw PreconditionViolation("atoms: spacing must be positive");
    const double lattice_tol = 1e-9 * spacing;

    double p_min = positions[0];
    for (double p : positions) {
        if (!std::isfinite(p)) throw PreconditionViolation("atoms: positions must be finite");
        p_min = std::min(p_min, p);
    }

    std::size_t m = 1;
    std::vector<std::size_t> slot(positions.size());
    for (std::size_t a = 0; a < positions.size(); ++a) {
        const double steps = (positions[a] - p_min) / spacing;
        const long long k = std::llround(steps);
        if (k < 0 || std::abs(positions[a] - (p_min + static_cast<double>(k) * spacing)) > lattice_tol)
            throw OffLattice("atoms: position is not on the lattice");
        slot[a] = static_cast<std::size_t>(k);
        m = std::max(m, slot[a] + 1);
    }

    std::vector<double> w(m, 0.0);
    for (std::size_t a = 0; a < positions.size(); ++a) {
        if (!(masses[a] >= 0.0)) throw PreconditionViolation("atoms: masses must be non-negative");
        w[slot[a]] += masses[a];
    }
    const double total = detail::neumaier_sum(w);
    if (std::abs(total - 1.0) > kMassTol)
        throw PreconditionViolation("atoms: masses must sum to one within 1e-12");
    return {p_min, spacing, std::move(w)};
}

GridMeasure rademacher(double spacing) {
    return atoms({-1.0, 1.0}, {0.5, 0.5}, spacing);
}

GridMeasure affine(const GridMeasure& mu, double alpha, double beta) {
    if (alpha == 0.0) throw ZeroScale("affine: alpha must be nonzero");
    if (!std::isfinite(alpha) || !std::isfinite(beta))
        throw PreconditionViolation("affine: coefficients must be finite");
    const double new_spacing = std::abs(alpha) * mu.spacing();
    std::vector<double> w = mu.weights();
    double new_origin;
    if (alpha > 0.0) {
        new_origin = alpha * mu.origin() + beta;
    } else {
        // alpha < 0 reverses the coordinate order; the old last point becomes
        // the new origin
        new_origin = alpha * mu.point(mu.size() - 1) + beta;
        std::reverse(w.begin(), w.end());
    }
    return {new_origin, new_spacing, std::move(w)};
}

GridMeasure convolve(const GridMeasure& mu, const GridMeasure& nu, bool prune) {
    const double h1 = mu.spacing(), h2 = nu.spacing();
    if (std::abs(h1 - h2) > 1e-12 * std::max(h1, h2))
        throw SpacingMismatch("convolve: grid spacings differ");

    const std::size_t out_len = mu.size() + nu.size() - 1;
    std::vector<double> w = (out_len > 512)
                                ? detail::fft_convolve(mu.weights(), nu.weights())
                                : detail::direct_convolve(mu.weights(), nu.weights());

    // FFT round-off can leave weights a hair below zero; clamp, but treat a
    // substantial negative as a genuine failure
    for (double& x : w) {
        if (x < 0.0) {
            if (x < -1e-9) throw Error("convolve: negative weight beyond round-off");
            x = 0.0;
        }
    }

    double origin = mu.origin() + nu.origin();
    if (prune) origin += static_cast<double>(prune_tails(w)) * h1;
    normalize(w);
    return {origin, h1, std::move(w)};
}

GridMeasure clt_measure(const GridMeasure& mu, std::size_t n) {
    if (n < 1) throw PreconditionViolation("clt_measure: n must be at least 1");
    GridMeasure acc = mu;
    for (std::size_t k = 1; k < n; ++k) acc = convolve(acc, mu);
    return affine(acc, 1.0 / std::sqrt(static_cast<double>(n)), 0.0);
}

MomentSummary moments(const GridMeasure& mu) {
    detail::NeumaierAcc mean_acc;
    for (std::size_t i = 0; i < mu.size(); ++i) mean_acc.add(mu.weights()[i] * mu.point(i));
    const double mean = mean_acc.value();
    detail::NeumaierAcc var_acc;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double d = mu.point(i) - mean;
        var_acc.add(mu.weights()[i] * d * d);
    }
    return {mean, var_acc.value()};
}

GridMeasure standardize(const GridMeasure& mu) {
    const MomentSummary mom = moments(mu);
    if (mom.variance <= 1e-14) throw DegenerateMeasure("standardize: variance is numerically zero");
    const double sd = std::sqrt(mom.variance);
    return affine(mu, 1.0 / sd, -mom.mean / sd);
}

// ---- CSV exchange ----

GridMeasure read_measure_csv(std::istream& in) {
    std::string line;
    bool header_seen = false;
    std::vector<double> xs, ws;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            std::string h = line;
            h.erase(std::remove_if(h.begin(), h.end(), [](unsigned char c) { return std::isspace(c); }),
                    h.end());
            if (h != "x,w") throw ParseError("measure CSV: expected header 'x,w'");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("measure CSV: missing comma on data row");
        char* end = nullptr;
        const char* sx = line.c_str();
        const double x = std::strtod(sx, &end);
        if (end == sx) throw ParseError("measure CSV: bad x value");
        while (*end == ' ' || *end == '\t') ++end;
        if (end != line.c_str() + comma) throw ParseError("measure CSV: bad x value");
        const char* sw = line.c_str() + comma + 1;
        const double w = std::strtod(sw, &end);
        if (end == sw) throw ParseError("measure CSV: bad weight value");
        while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
        if (*end != '\0') throw ParseError("measure CSV: bad weight value");
        if (!std::isfinite(x) || !std::isfinite(w))
            throw ParseError("measure CSV: non-finite value");
        if (w < 0.0) throw ParseError("measure CSV: negative weight");
        xs.push_back(x);
        ws.push_back(w);
    }
    if (!header_seen || xs.empty()) throw ParseError("measure CSV: no data rows");

    double spacing = 1.0;  // single atom: spacing is arbitrary
    if (xs.size() > 1) {
        spacing = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
        if (!(spacing > 0.0)) throw ParseError("measure CSV: x must be strictly increasing");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double expected = xs.front() + static_cast<double>(i) * spacing;
            if (std::abs(xs[i] - expected) > 1e-9 * spacing)
                throw ParseError("measure CSV: points do not form a uniform lattice");
        }
    }
    const double total = detail::neumaier_sum(ws);
    if (std::abs(total - 1.0) > 1e-6)
        std::cerr << "lsilab: warning: measure CSV mass " << total << " renormalized to 1\n";
    normalize(ws);
    return {xs.front(), spacing, std::move(ws)};
}

GridMeasure read_measure_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open measure CSV: " + path);
    return read_measure_csv(in);
}

void write_measure_csv(std::ostream& out, const GridMeasure& mu) {
    out << "x,w\n";
    char buf[64];
    for (std::size_t i = 0; i < mu.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", mu.point(i), mu.weights()[i]);
        out << buf;
    }
}

void write_measure_csv_file(const std::string& path, const GridMeasure& mu) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    write_measure_csv(out, mu);
}

}  // namespace lsilab
