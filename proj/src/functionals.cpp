#include "lsilab/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "lsilab/detail/numeric.hpp"

namespace lsilab {

namespace {

void require_aligned(const GridMeasure& mu, const GridFunction& f, const char* op) {
    if (f.size() != mu.size())
        throw PreconditionViolation(std::string(op) + ": grid function length must match the measure");
}

}  // namespace

GridFunction sample_function(const GridMeasure& mu, const std::function<double(double)>& f) {
    GridFunction out(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) out[i] = f(mu.point(i));
    return out;
}

double entropy_functional(const GridMeasure& mu, const GridFunction& g) {
    require_aligned(mu, g, "entropy_functional");
    const auto& w = mu.weights();
    detail::NeumaierAcc mean_acc, glogg_acc;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double gi = g[i];
        if (gi < 0.0) {
            if (gi < -1e-13) throw NegativeArgument("entropy_functional: negative argument");
            gi = 0.0;
        }
        if (w[i] == 0.0 || gi == 0.0) continue;  // 0 log 0 = 0
        mean_acc.add(w[i] * gi);
        glogg_acc.add(w[i] * gi * std::log(gi));
    }
    const double mean = mean_acc.value();
    double ent = glogg_acc.value();
    if (mean > 0.0) ent -= mean * std::log(mean);
    if (ent < 0.0 && ent >= -1e-13) ent = 0.0;  // Jensen guarantees >= 0; absorb round-off
    return ent;
}

double dirichlet(const GridMeasure& mu, const GridFunction& f) {
    require_aligned(mu, f, "dirichlet");
    if (mu.size() < 2) throw SingletonGrid("dirichlet: need at least two grid points");
    const auto& w = mu.weights();
    const double h = mu.spacing();
    detail::NeumaierAcc acc;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double slope = (f[i + 1] - f[i]) / h;
        acc.add(slope * slope * 0.5 * (w[i] + w[i + 1]));
    }
    return acc.value();
}

double lsi_ratio(const GridMeasure& mu, const GridFunction& u) {
    require_aligned(mu, u, "lsi_ratio");
    if (mu.size() < 2) throw SingletonGrid("lsi_ratio: need at least two grid points");
    for (double v : u) {
        if (!std::isfinite(v)) throw PreconditionViolation("lsi_ratio: u must be finite");
    }
    const auto& w = mu.weights();
    const double h = mu.spacing();

    // The quotient is invariant under u -> u + c (both Ent and the energy are
    // 1-homogeneous in e^u), so shift by the maximum once and work with
    // exponents in (-inf, 0].
    const double shift = *std::max_element(u.begin(), u.end());

    detail::NeumaierAcc w_exp, w_exp_u;
    std::vector<double> s(u.size());  // e^{u/2}, shifted
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ui = u[i] - shift;
        const double gi = std::exp(ui);
        s[i] = std::sqrt(gi);
        if (w[i] != 0.0 && gi != 0.0) {
            w_exp.add(w[i] * gi);
            w_exp_u.add(w[i] * gi * ui);
        }
    }
    const double mass = w_exp.value();
    double ent = w_exp_u.value();
    if (mass > 0.0) ent -= mass * std::log(mass);
    if (ent < 0.0 && ent >= -1e-13) ent = 0.0;

    detail::NeumaierAcc energy;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double slope = (s[i + 1] - s[i]) / h;
        energy.add(slope * slope * (w[i] + w[i + 1]));  // == 2 * dirichlet
    }
    const double denom = energy.value();
    if (!(denom > 1e-300))
        throw DegenerateTestFunction("lsi_ratio: test function has vanishing energy");
    return ent / denom;
}

double wasserstein2(const GridMeasure& mu, const GridMeasure& nu) {
    // Both quantile functions are step functions; integrate the squared
    // difference over the merged breakpoints of the two CDFs.
    const auto& wa = mu.weights();
    const auto& wb = nu.weights();
    std::vector<double> ca(wa.size()), cb(wb.size());
    double run = 0.0;
    for (std::size_t i = 0; i < wa.size(); ++i) ca[i] = (run += wa[i]);
    const double tot_a = run;
    run = 0.0;
    for (std::size_t j = 0; j < wb.size(); ++j) cb[j] = (run += wb[j]);
    const double tot_b = run;
    for (double& c : ca) c /= tot_a;  // pin both endpoints to exactly 1
    for (double& c : cb) c /= tot_b;

    detail::NeumaierAcc acc;
    std::size_t i = 0, j = 0;
    double level = 0.0;
    while (i < ca.size() && j < cb.size()) {
        const double next = std::min(ca[i], cb[j]);
        const double seg = next - level;
        if (seg > 0.0) {
            const double d = mu.point(i) - nu.point(j);
            acc.add(seg * d * d);
        }
        level = next;
        if (ca[i] <= level) ++i;
        if (j < cb.size() && cb[j] <= level) ++j;
    }
    return std::sqrt(std::max(acc.value(), 0.0));
}

double herbst_margin(const GridMeasure& mu, const GridFunction& f, double c,
                     const std::vector<double>& t_values) {
    require_aligned(mu, f, "herbst_margin");
    if (!(c > 0.0)) throw PreconditionViolation("herbst_margin: c must be positive");
    if (t_values.empty()) throw PreconditionViolation("herbst_margin: need at least one t");
    const double h = mu.spacing();
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        if (std::abs(f[i + 1] - f[i]) / h > 1.0 + 1e-9)
            throw NotLipschitz("herbst_margin: f is not 1-Lipschitz on the grid");
    }
    detail::NeumaierAcc mean_acc;
    for (std::size_t i = 0; i < f.size(); ++i) mean_acc.add(mu.weights()[i] * f[i]);
    const double mean = mean_acc.value();

    double worst = 0.0;
    for (double t : t_values) {
        if (!(t > 0.0)) throw PreconditionViolation("herbst_margin: t values must be positive");
        detail::NeumaierAcc tail;
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (f[i] >= mean + t) tail.add(mu.weights()[i]);
        }
        worst = std::max(worst, tail.value() / std::exp(-t * t / (2.0 * c)));
    }
    return worst;
}

}  // namespace lsilab
