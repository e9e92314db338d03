#include "lsilab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lsilab/detail/numeric.hpp"
#include "lsilab/detail/random.hpp"

namespace lsilab {

namespace {

struct SupportRange {
    std::size_t first;
    std::size_t last;
    bool gap;
};

SupportRange support_range(const GridMeasure& mu, double threshold) {
    const auto& w = mu.weights();
    const double cutoff = threshold * *std::max_element(w.begin(), w.end());
    std::size_t first = 0, last = w.size() - 1;
    while (first < last && w[first] <= cutoff) ++first;
    while (last > first && w[last] <= cutoff) --last;
    bool gap = false;
    for (std::size_t i = first + 1; i < last; ++i) {
        if (w[i] <= cutoff) {
            gap = true;
            break;
        }
    }
    return {first, last, gap};
}

// ---- spectral gap of the tridiagonal pencil ----

// Symmetric reduction B = M^{-1/2} A M^{-1/2} of A f = lambda M f restricted
// to the mass-carrying range [first, last]. d = diagonal, e = off-diagonal.
void build_reduced_pencil(const GridMeasure& mu, std::size_t first, std::size_t last,
                          std::vector<double>& d, std::vector<double>& e) {
    const auto& w = mu.weights();
    const double h = mu.spacing();
    const std::size_t m = last - first + 1;
    std::vector<double> edge(m - 1);  // Dirichlet edge conductances
    for (std::size_t i = 0; i < m - 1; ++i)
        edge[i] = 0.5 * (w[first + i] + w[first + i + 1]) / (h * h);
    d.assign(m, 0.0);
    e.assign(m - 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double a = (i > 0 ? edge[i - 1] : 0.0) + (i < m - 1 ? edge[i] : 0.0);
        d[i] = a / w[first + i];
    }
    for (std::size_t i = 0; i < m - 1; ++i)
        e[i] = -edge[i] / std::sqrt(w[first + i] * w[first + i + 1]);
}

// Smallest pivot magnitude the Sturm recurrence may divide by.  Sized so
// e^2 / pivmin never overflows; pivots at or below it are clamped negative
// and counted, so hitting an eigenvalue exactly cannot zero a pivot and
// erase the sign information of everything after it.
double sturm_pivmin(const std::vector<double>& e) {
    double emax2 = 1.0;
    for (double v : e) emax2 = std::max(emax2, v * v);
    return 2.23e-308 * emax2;
}

// Number of eigenvalues of the symmetric tridiagonal (d, e) below x.
std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x,
                        double pivmin) {
    std::size_t count = 0;
    double q = d[0] - x;
    if (q <= pivmin) {
        q = std::min(q, -pivmin);
        ++count;
    }
    for (std::size_t i = 1; i < d.size(); ++i) {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if (q <= pivmin) {
            q = std::min(q, -pivmin);
            ++count;
        }
    }
    return count;
}

// k-th smallest eigenvalue (k >= 1) by bisection on the Gershgorin interval.
double sturm_eigenvalue(const std::vector<double>& d, const std::vector<double>& e,
                        std::size_t k) {
    const double pivmin = sturm_pivmin(e);
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) +
                         (i < d.size() - 1 ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max({std::abs(lo), std::abs(hi), 1.0});
         ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(d, e, mid, pivmin) >= k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Solves (T - sigma I) x = rhs for symmetric tridiagonal T = (d, e) with
// partial pivoting (Gaussian elimination on the three bands plus one fill-in
// band). rhs is overwritten with the solution.
void solve_shifted_tridiag(const std::vector<double>& d, const std::vector<double>& e,
                           double sigma, std::vector<double>& rhs) {
    const std::size_t m = d.size();
    std::vector<double> dl(m, 0.0), dd(m), du(m, 0.0), du2(m, 0.0);
    double scale = std::abs(sigma);
    for (std::size_t i = 0; i < m; ++i) {
        dd[i] = d[i] - sigma;
        scale = std::max(scale, std::abs(d[i]));
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        dl[i + 1] = e[i];
        du[i] = e[i];
        scale = std::max(scale, std::abs(e[i]));
    }
    // pivot floor proportional to the matrix scale, so a division by a
    // floored pivot cannot overflow and poison the iterate with NaNs
    const double floor = 1e-32 * std::max(scale, 1.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
        if (std::abs(dl[k + 1]) > std::abs(dd[k])) {
            std::swap(dd[k], dl[k + 1]);
            std::swap(du[k], dd[k + 1]);
            std::swap(du2[k], du[k + 1]);
            std::swap(rhs[k], rhs[k + 1]);
        }
        if (std::abs(dd[k]) < floor) dd[k] = dd[k] < 0.0 ? -floor : floor;
        const double f = dl[k + 1] / dd[k];
        dd[k + 1] -= f * du[k];
        du[k + 1] -= f * du2[k];
        rhs[k + 1] -= f * rhs[k];
    }
    if (std::abs(dd[m - 1]) < floor) dd[m - 1] = dd[m - 1] < 0.0 ? -floor : floor;
    rhs[m - 1] /= dd[m - 1];
    if (m >= 2) rhs[m - 2] = (rhs[m - 2] - du[m - 2] * rhs[m - 1]) / dd[m - 2];
    for (std::size_t i = m; i-- > 2;) {
        const std::size_t k = i - 2;
        rhs[k] = (rhs[k] - du[k] * rhs[k + 1] - du2[k] * rhs[k + 2]) / dd[k];
    }
}

struct SpectralGap {
    double lambda2;
    std::vector<double> eigvec;  // in the reduced coordinates, unit length
};

SpectralGap spectral_gap(const GridMeasure& mu, std::size_t first, std::size_t last) {
    std::vector<double> d, e;
    build_reduced_pencil(mu, first, last, d, e);
    const std::size_t m = d.size();
    const double lambda2 = sturm_eigenvalue(d, e, 2);
    if (!(lambda2 > 0.0)) throw Error("poincare: nonpositive spectral gap");

    // Inverse-iteration shift pulled one part in 1e12 of the matrix scale off
    // the eigenvalue: bisection lands close enough that the solve at lambda2
    // itself is singular to roundoff.
    double tnorm = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        double row = std::abs(d[i]);
        if (i > 0) row += std::abs(e[i - 1]);
        if (i + 1 < m) row += std::abs(e[i]);
        tnorm = std::max(tnorm, row);
    }
    const double sigma = lambda2 - 1e-12 * tnorm;

    // Constant-direction eigenvector of the pencil maps to sqrt(w) after the
    // reduction; deflate it and run inverse iteration at the computed shift.
    std::vector<double> q(m);
    for (std::size_t i = 0; i < m; ++i) q[i] = std::sqrt(mu.weights()[first + i]);
    double qn = 0.0;
    for (double v : q) qn += v * v;
    qn = std::sqrt(qn);
    for (double& v : q) v /= qn;

    std::vector<double> v(m);
    const double mid = 0.5 * static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) v[i] = (static_cast<double>(i) - mid) * q[i];
    for (int it = 0; it < 4; ++it) {
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += v[i] * q[i];
        for (std::size_t i = 0; i < m; ++i) v[i] -= dot * q[i];
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw Error("poincare: inverse iteration degenerated");
        for (double& x : v) x /= norm;
        if (it == 3) break;
        solve_shifted_tridiag(d, e, sigma, v);
    }
    return {lambda2, std::move(v)};
}

// ---- log-Sobolev quotient and its gradient ----

struct RatioWorkspace {
    std::vector<double> g;  // e^{u - max u}
    std::vector<double> s;  // e^{(u - max u)/2}

    // Returns the quotient; fills grad with its gradient when non-null.
    // Returns NaN for test functions with vanishing energy.
    double eval(const GridMeasure& mu, const std::vector<double>& u,
                std::vector<double>* grad) {
        const auto& w = mu.weights();
        const double h = mu.spacing();
        const std::size_t m = u.size();
        g.resize(m);
        s.resize(m);
        const double shift = *std::max_element(u.begin(), u.end());

        detail::NeumaierAcc mass_acc, ent_acc;
        for (std::size_t i = 0; i < m; ++i) {
            const double ui = u[i] - shift;
            g[i] = std::exp(ui);
            s[i] = std::sqrt(g[i]);
            if (w[i] != 0.0 && g[i] != 0.0) {
                mass_acc.add(w[i] * g[i]);
                ent_acc.add(w[i] * g[i] * ui);
            }
        }
        const double mass = mass_acc.value();
        double ent = ent_acc.value();
        const double log_mass = mass > 0.0 ? std::log(mass) : 0.0;
        if (mass > 0.0) ent -= mass * log_mass;
        if (ent < 0.0 && ent >= -1e-13) ent = 0.0;

        detail::NeumaierAcc energy_acc;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const double slope = (s[i + 1] - s[i]) / h;
            energy_acc.add(slope * slope * (w[i] + w[i + 1]));
        }
        const double energy = energy_acc.value();  // == 2 * dirichlet(mu, e^{u/2})
        if (!(energy > 1e-300)) return std::numeric_limits<double>::quiet_NaN();
        const double ratio = ent / energy;

        if (grad) {
            grad->assign(m, 0.0);
            const double inv_h2 = 1.0 / (h * h);
            for (std::size_t i = 0; i < m; ++i) {
                const double d_ent = (w[i] != 0.0 && g[i] != 0.0)
                                         ? w[i] * g[i] * ((u[i] - shift) - log_mass)
                                         : 0.0;
                double d_energy = 0.0;
                if (i > 0) d_energy += (w[i - 1] + w[i]) * (s[i] - s[i - 1]);
                if (i + 1 < m) d_energy += (w[i] + w[i + 1]) * (s[i] - s[i + 1]);
                d_energy *= s[i] * inv_h2;
                (*grad)[i] = (d_ent - ratio * d_energy) / energy;
            }
        }
        return ratio;
    }
};

struct AscentResult {
    double value;
    std::vector<double> u;
    std::size_t iterations;
    bool converged;
};

// Monotone gradient ascent with a doubling/halving line search. history
// records the running incumbent across the whole estimate call.
AscentResult ascend(const GridMeasure& mu, std::vector<double> u, const EstimatorOptions& opts,
                    double& incumbent, std::vector<double>& history) {
    RatioWorkspace ws;
    std::vector<double> grad, trial;
    double value = ws.eval(mu, u, &grad);
    if (std::isnan(value)) return {value, std::move(u), 0, true};
    incumbent = std::max(incumbent, value);
    history.push_back(incumbent);

    double step = 0.25;
    std::size_t it = 0;
    bool converged = true;
    while (it < opts.max_iterations) {
        double gmax = 0.0;
        for (double gv : grad) gmax = std::max(gmax, std::abs(gv));
        if (!(gmax > 0.0)) break;  // stationary
        const double scale = 1.0 / gmax;

        // backtracking: halve until the quotient improves
        double trial_value = std::numeric_limits<double>::quiet_NaN();
        bool accepted = false;
        while (step >= 1e-12) {
            trial = u;
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] += step * scale * grad[i];
            trial_value = ws.eval(mu, trial, nullptr);
            if (!std::isnan(trial_value) && trial_value > value) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no improving step within resolution: stationary

        const double gain = (trial_value - value) / std::max(std::abs(value), 1e-300);
        u.swap(trial);
        value = ws.eval(mu, u, &grad);
        ++it;
        incumbent = std::max(incumbent, value);
        history.push_back(incumbent);
        step = std::min(step * 2.0, 4.0);
        if (gain < opts.relative_tolerance) break;
        if (it >= opts.max_iterations) {
            converged = false;  // still improving above tolerance at the cap
            break;
        }
    }
    return {value, std::move(u), it, converged};
}

}  // namespace

bool LsiEstimate::unbounded() const { return std::isinf(value); }

bool support_gap(const GridMeasure& mu, double threshold) {
    return support_range(mu, threshold).gap;
}

double poincare(const GridMeasure& mu) {
    return poincare_mode(mu).first;
}

std::pair<double, GridFunction> poincare_mode(const GridMeasure& mu) {
    if (mu.size() < 3) throw PreconditionViolation("poincare: need at least three grid points");
    const SupportRange range = support_range(mu, 1e-13);
    if (range.gap) throw DisconnectedSupport("poincare: support has an interior gap");
    if (range.last - range.first + 1 < 3)
        throw DegenerateMeasure("poincare: support carries fewer than three points");

    const SpectralGap gap = spectral_gap(mu, range.first, range.last);

    // Undo the M^{1/2} scaling and extend constantly outside the support
    // range; that leaves the Dirichlet energy untouched.
    GridFunction f(mu.size());
    for (std::size_t i = 0; i <= range.last - range.first; ++i)
        f[range.first + i] = gap.eigvec[i] / std::sqrt(mu.weights()[range.first + i]);
    for (std::size_t i = 0; i < range.first; ++i) f[i] = f[range.first];
    for (std::size_t i = range.last + 1; i < mu.size(); ++i) f[i] = f[range.last];

    detail::NeumaierAcc mean_acc;
    for (std::size_t i = 0; i < f.size(); ++i) mean_acc.add(mu.weights()[i] * f[i]);
    const double mean = mean_acc.value();
    detail::NeumaierAcc var_acc, orient_acc;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double c = f[i] - mean;
        var_acc.add(mu.weights()[i] * c * c);
        orient_acc.add(mu.weights()[i] * c * mu.point(i));
    }
    const double sd = std::sqrt(var_acc.value());
    if (!(sd > 0.0)) throw Error("poincare: eigenfunction is constant");
    const double sign = orient_acc.value() < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = sign * (f[i] - mean) / sd;

    return {1.0 / gap.lambda2, std::move(f)};
}

LsiEstimate estimate_cls(const GridMeasure& mu, const EstimatorOptions& opts) {
    if (mu.size() < 3)
        throw PreconditionViolation("estimate_cls: need at least three grid points");
    const SupportRange range = support_range(mu, opts.support_threshold);
    if (range.first == range.last)
        throw DegenerateMeasure("estimate_cls: measure concentrates on a single point");
    if (range.gap) {
        LsiEstimate est;
        est.value = std::numeric_limits<double>::infinity();
        est.converged = true;
        return est;
    }

    const MomentSummary mom = moments(mu);
    const double sd = std::sqrt(std::max(mom.variance, 1e-300));

    // probe set: exponential slopes, the spectral mode, random smooth starts
    std::vector<GridFunction> probes;
    std::vector<double> slopes = opts.probe_slopes;
    if (slopes.empty()) slopes = {0.5 / sd, -0.5 / sd, 1.0 / sd, -1.0 / sd, 2.0 / sd, -2.0 / sd};
    for (double a : slopes) {
        GridFunction u(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) u[i] = a * mu.point(i);
        probes.push_back(std::move(u));
    }
    try {
        auto [cp, mode] = poincare_mode(mu);
        (void)cp;
        for (double& v : mode) v *= 0.1;
        probes.push_back(std::move(mode));
    } catch (const Error&) {
        // no usable spectral probe; the remaining probes still apply
    }
    detail::Rng rng(opts.seed);
    for (std::size_t r = 0; r < opts.random_restarts; ++r) {
        GridFunction u(mu.size());
        double amp[3], phase[3];
        for (int k = 0; k < 3; ++k) {
            amp[k] = rng.uniform(-1.0, 1.0) / static_cast<double>(k + 1);
            phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
        const double denom = static_cast<double>(mu.size() - 1);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double theta = std::numbers::pi * static_cast<double>(i) / denom;
            double v = 0.0;
            for (int k = 0; k < 3; ++k) v += amp[k] * std::sin(static_cast<double>(k + 1) * theta + phase[k]);
            u[i] = v;
        }
        probes.push_back(std::move(u));
    }

    LsiEstimate est;
    est.value = -std::numeric_limits<double>::infinity();
    double incumbent = -std::numeric_limits<double>::infinity();
    for (auto& probe : probes) {
        ++est.probes_tried;
        AscentResult res = ascend(mu, std::move(probe), opts, incumbent, est.ratio_history);
        if (std::isnan(res.value)) continue;  // degenerate probe (e.g. slope 0)
        est.iterations += res.iterations;
        if (res.value > est.value) {
            est.value = res.value;
            est.certificate = std::move(res.u);
            est.converged = res.converged;
        }
    }
    if (!std::isfinite(est.value) || est.certificate.empty())
        throw Error("estimate_cls: no probe produced a usable quotient");
    return est;
}

}  // namespace lsilab
