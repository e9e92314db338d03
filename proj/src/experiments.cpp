#include "lsilab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"
#include "lsilab/covers.hpp"
#include "lsilab/detail/numeric.hpp"
#include "lsilab/detail/random.hpp"
#include "lsilab/functionals.hpp"
#include "lsilab/shearer.hpp"

namespace lsilab {

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr double kInf = std::numeric_limits<double>::infinity();

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::set<std::string>& known_kinds() {
  static const std::set<std::string> kinds = {
      "clt-monotone", "verify-subadd", "regularize", "herbst",
      "shearer-fuzz", "optimal-cover", "estimate"};
  return kinds;
}

[[nodiscard]] std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Wall-clock timing for one report row, formatted in seconds.  wall_time is
// the only nondeterministic column and always comes last so byte-level
// comparisons can strip it.
class RowTimer {
public:
  [[nodiscard]] std::string seconds() const {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0_;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", dt.count());
    return buf;
  }

private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

[[nodiscard]] std::vector<std::string> metadata_lines(const ExperimentSpec& spec) {
  return {
      std::string("# metadata: tool=lsilab version=") + kToolVersion,
      "# metadata: kind=" + spec.kind + " seed=" + std::to_string(spec.seed) +
          " spec_hash=" + spec_hash(spec),
      "# metadata: spec=" + canonical_spec_json(spec),
  };
}

void write_report_file(const ExperimentReport& rep, const std::string& aborted = "") {
  const std::filesystem::path path(rep.csv_path);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(rep.csv_path);
  if (!out) throw Error("cannot open " + rep.csv_path + " for writing");
  for (const auto& line : rep.metadata) out << line << '\n';
  for (std::size_t j = 0; j < rep.columns.size(); ++j)
    out << (j ? "," : "") << rep.columns[j];
  out << '\n';
  for (const auto& row : rep.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
  if (!aborted.empty()) out << "# aborted: " << aborted << '\n';
  if (!out) throw Error("failed writing " + rep.csv_path);
}

// Runs the row loop with the partial-output contract: if a row throws, what
// finished so far is flushed with an `# aborted:` marker before the error
// propagates; otherwise the complete file is written.
template <typename Fn>
ExperimentReport with_rows(ExperimentReport rep, Fn&& fill) {
  try {
    fill(rep);
  } catch (const Error& e) {
    write_report_file(rep, e.what());
    throw;
  }
  write_report_file(rep);
  return rep;
}

void require_kind(const ExperimentSpec& spec, const std::string& kind) {
  if (spec.kind != kind)
    throw InvalidSpec("spec kind is `" + spec.kind + "`, driver wants `" + kind + "`");
  validate_spec(spec);
}

[[nodiscard]] std::vector<double> default_t_values() {
  std::vector<double> ts;
  for (int i = 1; i <= 16; ++i) ts.push_back(0.25 * i);
  return ts;
}

// Random cover that is feasible-as-r with minimum element slack exactly 0:
// uniform draws on every nonempty subset, rescaled by the smallest element
// sum.  Advances rng by 2^n - 1 draws (plus redraws of degenerate covers).
[[nodiscard]] CoverCoefficients random_tight_cover(detail::Rng& rng, int n) {
  for (;;) {
    CoverCoefficients r;
    r.n = n;
    const std::uint32_t full = (1u << n) - 1u;
    for (std::uint32_t mask = 1; mask <= full; ++mask) r.entries[mask] = rng.uniform();
    const std::vector<double> slack = check_cover(r);
    const double lowest = 1.0 + *std::min_element(slack.begin(), slack.end());
    if (lowest <= 1e-9) continue;
    for (auto& [mask, val] : r.entries) {
      (void)mask;
      val /= lowest;
    }
    return r;
  }
}

// Gaussian reference sampled on mu's own lattice, window and all.
[[nodiscard]] GridMeasure matched_gaussian(const GridMeasure& mu) {
  return gaussian_on_grid(0.0, 1.0, mu.origin(), mu.spacing(), mu.size());
}

// Regularizer gamma_{v} on the lattice spacing h, centered at 0 with an
// 8-sigma window.
[[nodiscard]] GridMeasure lattice_gaussian(double variance, double h) {
  const double half_width = 8.0 * std::sqrt(variance);
  const auto half = static_cast<std::size_t>(std::ceil(half_width / h));
  return gaussian_on_grid(0.0, variance, -static_cast<double>(half) * h, h, 2 * half + 1);
}

}  // namespace

std::string format_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentSpec default_spec(const std::string& kind) {
  if (known_kinds().count(kind) == 0)
    throw InvalidSpec("unknown experiment kind `" + kind + "`");
  ExperimentSpec spec;
  spec.kind = kind;
  if (kind == "clt-monotone") {
    spec.base.family = "mixture";
    spec.base.components = {{0.5, -1.0, 0.2}, {0.5, 1.0, 0.2}};
    spec.grid = {-5.0, 5.0, 1281};
    spec.n_range = {1, 2, 3, 4, 5, 6};
  } else if (kind == "verify-subadd") {
    spec.n_range = {2, 3, 4};
    spec.trials = 1000;
  } else if (kind == "regularize") {
    spec.base.family = "rademacher";
    spec.n_range = {1, 2, 4};
  } else if (kind == "herbst") {
    spec.t_values = default_t_values();
  } else if (kind == "shearer-fuzz") {
    spec.n_range = {3};
    spec.trials = 500;
  }
  return spec;
}

namespace {

void parse_base_measure(const json& j, BaseMeasureSpec& base) {
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key != "family" && key != "mean" && key != "variance" && key != "lo" &&
        key != "hi" && key != "components" && key != "path")
      throw InvalidSpec("unknown base_measure key `" + key + "`");
  }
  if (j.contains("family")) base.family = j.at("family").get<std::string>();
  if (j.contains("mean")) base.mean = j.at("mean").get<double>();
  if (j.contains("variance")) base.variance = j.at("variance").get<double>();
  if (j.contains("lo")) base.lo = j.at("lo").get<double>();
  if (j.contains("hi")) base.hi = j.at("hi").get<double>();
  if (j.contains("path")) base.path = j.at("path").get<std::string>();
  if (j.contains("components")) {
    base.components.clear();
    for (const auto& c : j.at("components")) {
      MixtureComponent mc;
      for (const auto& item : c.items()) {
        const std::string& key = item.key();
        if (key != "weight" && key != "mean" && key != "variance")
          throw InvalidSpec("unknown mixture component key `" + key + "`");
      }
      if (c.contains("weight")) mc.weight = c.at("weight").get<double>();
      if (c.contains("mean")) mc.mean = c.at("mean").get<double>();
      if (c.contains("variance")) mc.variance = c.at("variance").get<double>();
      base.components.push_back(mc);
    }
  }
}

void parse_estimator(const json& j, EstimatorOptions& opts) {
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key != "probe_slopes" && key != "random_restarts" && key != "seed" &&
        key != "max_iterations" && key != "relative_tolerance" && key != "support_threshold")
      throw InvalidSpec("unknown estimator key `" + key + "`");
  }
  if (j.contains("probe_slopes"))
    opts.probe_slopes = j.at("probe_slopes").get<std::vector<double>>();
  if (j.contains("random_restarts"))
    opts.random_restarts = j.at("random_restarts").get<std::size_t>();
  if (j.contains("seed")) opts.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("max_iterations"))
    opts.max_iterations = j.at("max_iterations").get<std::size_t>();
  if (j.contains("relative_tolerance"))
    opts.relative_tolerance = j.at("relative_tolerance").get<double>();
  if (j.contains("support_threshold"))
    opts.support_threshold = j.at("support_threshold").get<double>();
}

}  // namespace

ExperimentSpec spec_from_json(const std::string& json_text, const std::string& kind) {
  ExperimentSpec spec = default_spec(kind);
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw InvalidSpec("config must be a JSON object");
    for (const auto& item : j.items()) {
      const std::string& key = item.key();
      if (key != "kind" && key != "base_measure" && key != "n_range" && key != "grid" &&
          key != "estimator" && key != "seed" && key != "delta" && key != "trials" &&
          key != "herbst_c" && key != "t_values" && key != "lattice" &&
          key != "values_file" && key != "output_dir")
        throw InvalidSpec("unknown config key `" + key + "`");
    }
    if (j.contains("kind") && j.at("kind").get<std::string>() != kind)
      throw InvalidSpec("config kind `" + j.at("kind").get<std::string>() +
                        "` does not match the requested kind `" + kind + "`");
    if (j.contains("base_measure")) parse_base_measure(j.at("base_measure"), spec.base);
    if (j.contains("n_range")) spec.n_range = j.at("n_range").get<std::vector<int>>();
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      for (const auto& item : g.items()) {
        const std::string& key = item.key();
        if (key != "lo" && key != "hi" && key != "m")
          throw InvalidSpec("unknown grid key `" + item.key() + "`");
      }
      if (g.contains("lo")) spec.grid.lo = g.at("lo").get<double>();
      if (g.contains("hi")) spec.grid.hi = g.at("hi").get<double>();
      if (g.contains("m")) spec.grid.m = g.at("m").get<std::size_t>();
    }
    if (j.contains("estimator")) parse_estimator(j.at("estimator"), spec.estimator);
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("delta")) spec.delta = j.at("delta").get<double>();
    if (j.contains("trials")) spec.trials = j.at("trials").get<std::size_t>();
    if (j.contains("herbst_c")) spec.herbst_c = j.at("herbst_c").get<double>();
    if (j.contains("t_values")) spec.t_values = j.at("t_values").get<std::vector<double>>();
    if (j.contains("lattice")) spec.lattice = j.at("lattice").get<int>();
    if (j.contains("values_file")) spec.values_file = j.at("values_file").get<std::string>();
    if (j.contains("output_dir")) spec.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("config: ") + e.what());
  }
  return spec;
}

void validate_spec(const ExperimentSpec& spec) {
  if (known_kinds().count(spec.kind) == 0)
    throw InvalidSpec("unknown experiment kind `" + spec.kind + "`");
  if (spec.grid.m < 3) throw InvalidSpec("grid needs m >= 3");
  if (!(spec.grid.hi > spec.grid.lo) || !std::isfinite(spec.grid.lo) || !std::isfinite(spec.grid.hi))
    throw InvalidSpec("grid needs finite lo < hi");
  if (spec.estimator.max_iterations < 1) throw InvalidSpec("estimator needs max_iterations >= 1");
  if (!(spec.estimator.relative_tolerance > 0.0))
    throw InvalidSpec("estimator needs relative_tolerance > 0");
  if (spec.estimator.support_threshold < 0.0)
    throw InvalidSpec("estimator needs support_threshold >= 0");
  for (double a : spec.estimator.probe_slopes)
    if (!std::isfinite(a)) throw InvalidSpec("probe slopes must be finite");

  const std::string& fam = spec.base.family;
  if (fam == "gaussian") {
    if (!(spec.base.variance > 0.0) || !std::isfinite(spec.base.variance) ||
        !std::isfinite(spec.base.mean))
      throw InvalidSpec("gaussian base needs finite mean and variance > 0");
  } else if (fam == "uniform") {
    if (!(spec.base.hi > spec.base.lo) || !std::isfinite(spec.base.lo) ||
        !std::isfinite(spec.base.hi))
      throw InvalidSpec("uniform base needs finite lo < hi");
  } else if (fam == "mixture") {
    if (spec.base.components.empty()) throw InvalidSpec("mixture base needs components");
    for (const auto& c : spec.base.components)
      if (!(c.weight > 0.0) || !(c.variance > 0.0) || !std::isfinite(c.mean) ||
          !std::isfinite(c.weight) || !std::isfinite(c.variance))
        throw InvalidSpec("mixture components need weight > 0, variance > 0, finite mean");
  } else if (fam == "file") {
    if (spec.base.path.empty()) throw InvalidSpec("file base needs a path");
  } else if (fam != "rademacher") {
    throw InvalidSpec("unknown base measure family `" + fam + "`");
  }

  const bool uses_n = spec.kind == "clt-monotone" || spec.kind == "verify-subadd" ||
                      spec.kind == "regularize" || spec.kind == "shearer-fuzz";
  if (uses_n && spec.n_range.empty()) throw InvalidSpec("n_range must not be empty");
  for (int n : spec.n_range) {
    if (n < 1 || n > 32) throw InvalidSpec("n_range entries must lie in [1, 32]");
    if (spec.kind == "verify-subadd" && (n < 2 || n > 10))
      throw InvalidSpec("verify-subadd needs n_range entries in [2, 10]");
    if (spec.kind == "shearer-fuzz" && n > 4)
      throw InvalidSpec("shearer-fuzz needs n_range entries in [1, 4]");
  }
  if ((spec.kind == "verify-subadd" || spec.kind == "shearer-fuzz") && spec.trials < 1)
    throw InvalidSpec("trials must be >= 1");
  if (spec.kind == "regularize") {
    if (!(spec.delta > 0.0) || !std::isfinite(spec.delta))
      throw InvalidSpec("regularize needs delta > 0");
    if (spec.lattice < 1 || spec.lattice > 4096)
      throw InvalidSpec("lattice must lie in [1, 4096]");
  }
  if (spec.kind == "herbst") {
    if (!(spec.herbst_c > 0.0) || !std::isfinite(spec.herbst_c))
      throw InvalidSpec("herbst needs c > 0");
    if (spec.t_values.empty()) throw InvalidSpec("herbst needs t values");
    for (double t : spec.t_values)
      if (!(t > 0.0) || !std::isfinite(t)) throw InvalidSpec("herbst t values must be > 0");
  }
  if (spec.kind == "optimal-cover" && spec.values_file.empty())
    throw InvalidSpec("optimal-cover needs a values file");
}

std::string canonical_spec_json(const ExperimentSpec& spec) {
  ordered_json j;
  j["kind"] = spec.kind;
  ordered_json base;
  base["family"] = spec.base.family;
  if (spec.base.family == "gaussian") {
    base["mean"] = spec.base.mean;
    base["variance"] = spec.base.variance;
  } else if (spec.base.family == "uniform") {
    base["lo"] = spec.base.lo;
    base["hi"] = spec.base.hi;
  } else if (spec.base.family == "mixture") {
    ordered_json cs = ordered_json::array();
    for (const auto& c : spec.base.components) {
      ordered_json cj;
      cj["weight"] = c.weight;
      cj["mean"] = c.mean;
      cj["variance"] = c.variance;
      cs.push_back(cj);
    }
    base["components"] = cs;
  } else if (spec.base.family == "file") {
    base["path"] = spec.base.path;
  }
  j["base_measure"] = base;
  j["n_range"] = spec.n_range;
  ordered_json grid;
  grid["lo"] = spec.grid.lo;
  grid["hi"] = spec.grid.hi;
  grid["m"] = spec.grid.m;
  j["grid"] = grid;
  ordered_json est;
  est["probe_slopes"] = spec.estimator.probe_slopes;
  est["random_restarts"] = spec.estimator.random_restarts;
  est["seed"] = spec.estimator.seed;
  est["max_iterations"] = spec.estimator.max_iterations;
  est["relative_tolerance"] = spec.estimator.relative_tolerance;
  est["support_threshold"] = spec.estimator.support_threshold;
  j["estimator"] = est;
  j["seed"] = spec.seed;
  j["delta"] = spec.delta;
  j["trials"] = spec.trials;
  j["herbst_c"] = spec.herbst_c;
  j["t_values"] = spec.t_values;
  j["lattice"] = spec.lattice;
  j["values_file"] = spec.values_file;
  return j.dump();
}

std::string spec_hash(const ExperimentSpec& spec) {
  const std::string canon = canonical_spec_json(spec);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GridMeasure build_base_measure(const ExperimentSpec& spec) {
  const BaseMeasureSpec& b = spec.base;
  if (b.family == "gaussian")
    return gaussian(b.mean, b.variance, spec.grid.lo, spec.grid.hi, spec.grid.m);
  if (b.family == "uniform")
    return from_density([](double) { return 1.0; }, b.lo, b.hi, spec.grid.m);
  if (b.family == "rademacher") return rademacher(1.0 / spec.lattice);
  if (b.family == "file") return read_measure_csv_file(b.path);

  // mixture: weights normalized here, so configs may use unnormalized ones
  detail::NeumaierAcc wsum;
  for (const auto& c : b.components) wsum.add(c.weight);
  const double total = wsum.value();
  const std::vector<MixtureComponent> comps = b.components;
  const DensityFn pdf = [comps, total](double x) {
    double p = 0.0;
    for (const auto& c : comps) {
      const double z = x - c.mean;
      p += (c.weight / total) * std::exp(-0.5 * z * z / c.variance) /
           std::sqrt(2.0 * 3.14159265358979323846 * c.variance);
    }
    return p;
  };
  return from_density(pdf, spec.grid.lo, spec.grid.hi, spec.grid.m);
}

ExperimentReport run_clt_monotone(const ExperimentSpec& spec) {
  require_kind(spec, "clt-monotone");
  ExperimentReport rep;
  rep.metadata = metadata_lines(spec);
  rep.csv_path = join_path(spec.output_dir, "monotone.csv");
  rep.columns = {"n",         "cls_estimate", "poincare", "w2_to_gaussian",
                 "rate_term", "chain_margin", "wall_time"};
  return with_rows(std::move(rep), [&spec](ExperimentReport& r) {
    const GridMeasure base = standardize(build_base_measure(spec));
    double prev = kInf;
    bool have_prev = false;
    for (int n : spec.n_range) {
      const RowTimer timer;
      const GridMeasure nu = clt_measure(base, static_cast<std::size_t>(n));
      const LsiEstimate est = estimate_cls(nu, spec.estimator);
      const double cp = poincare(nu);
      const double w2 = wasserstein2(nu, matched_gaussian(nu));
      const double rate = (est.value - 1.0) * n;
      const double chain = cp - 1.0 - w2 * w2;
      if (have_prev && est.value > 1.02 * prev) ++r.violations;
      if (chain < -1e-3) ++r.violations;
      if (est.value < 0.95 * cp) ++r.violations;
      prev = est.value;
      have_prev = true;
      r.rows.push_back({std::to_string(n), format_cell(est.value), format_cell(cp),
                        format_cell(w2), format_cell(rate), format_cell(chain),
                        timer.seconds()});
    }
  });
}

ExperimentReport run_verify_subadd(const ExperimentSpec& spec) {
  require_kind(spec, "verify-subadd");
  ExperimentReport rep;
  rep.metadata = metadata_lines(spec);
  rep.csv_path = join_path(spec.output_dir, "subadd.csv");
  rep.columns = {"trial", "n", "lhs_cls", "rhs_bound", "slack", "wall_time"};
  return with_rows(std::move(rep), [&spec](ExperimentReport& r) {
    detail::Rng rng(spec.seed);
    const bool exact = spec.base.family == "gaussian";

    // Grid mode: i.i.d. components, so the subset constant depends only on
    // the subset size.  One estimate per size, shared across trials.
    std::vector<double> by_size;
    const int n_max = *std::max_element(spec.n_range.begin(), spec.n_range.end());
    if (!exact) {
      const GridMeasure mu = build_base_measure(spec);
      by_size.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
      GridMeasure conv = mu;
      by_size[1] = estimate_cls(conv, spec.estimator).value;
      for (int k = 2; k <= n_max; ++k) {
        conv = convolve(conv, mu);
        by_size[static_cast<std::size_t>(k)] = estimate_cls(conv, spec.estimator).value;
      }
    }

    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
      const RowTimer timer;
      const int n = spec.n_range[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(spec.n_range.size()) - 1))];
      const CoverCoefficients cover = random_tight_cover(rng, n);

      SubsetValues v;
      v.n = n;
      double lhs = 0.0;
      const std::uint32_t full = (1u << n) - 1u;
      if (exact) {
        std::vector<double> sigma2(static_cast<std::size_t>(n));
        for (auto& s : sigma2) s = rng.uniform(0.25, 4.0);
        for (std::uint32_t mask = 1; mask <= full; ++mask) {
          detail::NeumaierAcc acc;
          for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) acc.add(sigma2[static_cast<std::size_t>(i)]);
          v.values[mask] = acc.value();
        }
        lhs = v.values[full];
      } else {
        for (std::uint32_t mask = 1; mask <= full; ++mask)
          v.values[mask] = by_size[static_cast<std::size_t>(__builtin_popcount(mask))];
        lhs = by_size[static_cast<std::size_t>(n)];
      }

      const double rhs = bound_rhs(cover, v);
      const double slack = rhs - lhs;
      if (exact && slack < -1e-12 * std::max(1.0, std::abs(rhs))) ++r.violations;
      r.rows.push_back({std::to_string(trial), std::to_string(n), format_cell(lhs),
                        format_cell(rhs), format_cell(slack), timer.seconds()});
    }
  });
}

ExperimentReport run_regularize(const ExperimentSpec& spec) {
  require_kind(spec, "regularize");
  ExperimentReport rep;
  rep.metadata = metadata_lines(spec);
  rep.csv_path = join_path(spec.output_dir, "regularize.csv");
  rep.columns = {"n",    "delta",       "cls_n", "cls_ref",
                 "ratio", "chen", "chen_direct", "wall_time"};
  ExperimentReport out = with_rows(std::move(rep), [&spec](ExperimentReport& r) {
    const GridMeasure base = standardize(build_base_measure(spec));
    const double d2 = spec.delta * spec.delta;
    const GridMeasure ref = convolve(base, lattice_gaussian(d2, base.spacing()));
    const double cls_ref = estimate_cls(ref, spec.estimator).value;
    for (int n : spec.n_range) {
      const RowTimer timer;
      const GridMeasure nu = clt_measure(base, static_cast<std::size_t>(n));
      const GridMeasure rho = convolve(nu, lattice_gaussian(d2 / n, nu.spacing()));
      const double cls_n = estimate_cls(rho, spec.estimator).value;
      const double chen = chen_bound(spec.delta);
      const double chen_direct = chen_bound_direct(n, spec.delta);
      if (cls_n > 1.02 * cls_ref) ++r.violations;
      if (cls_ref > chen) ++r.violations;
      r.rows.push_back({std::to_string(n), format_cell(spec.delta), format_cell(cls_n),
                        format_cell(cls_ref), format_cell(cls_n / cls_ref),
                        format_cell(chen), format_cell(chen_direct), timer.seconds()});
    }
  });

  const std::string plot_path = join_path(spec.output_dir, "regularize.gp");
  std::ofstream plot(plot_path);
  if (!plot) throw Error("cannot open " + plot_path + " for writing");
  plot << "# gnuplot script for regularize.csv\n"
          "set datafile separator ','\n"
          "set key autotitle columnhead\n"
          "set logscale y\n"
          "set xlabel 'n'\n"
          "set ylabel 'constant'\n"
          "plot 'regularize.csv' using 1:3 with linespoints, \\\n"
          "     '' using 1:4 with lines, \\\n"
          "     '' using 1:6 with lines dashtype 2, \\\n"
          "     '' using 1:7 with lines dashtype 3\n";
  out.extra_files.push_back(plot_path);
  return out;
}

ExperimentReport run_herbst(const ExperimentSpec& spec) {
  require_kind(spec, "herbst");
  ExperimentReport rep;
  rep.metadata = metadata_lines(spec);
  rep.csv_path = join_path(spec.output_dir, "herbst.csv");
  rep.columns = {"t", "tail_prob", "gauss_bound", "ratio", "wall_time"};
  return with_rows(std::move(rep), [&spec](ExperimentReport& r) {
    const GridMeasure mu = build_base_measure(spec);
    const GridFunction f = mu.points();
    for (double t : spec.t_values) {
      const RowTimer timer;
      const double ratio = herbst_margin(mu, f, spec.herbst_c, {t});
      const double bound = std::exp(-t * t / (2.0 * spec.herbst_c));
      if (ratio > 1.0 + 1e-12) ++r.violations;
      r.rows.push_back({format_cell(t), format_cell(ratio * bound), format_cell(bound),
                        format_cell(ratio), timer.seconds()});
    }
  });
}

namespace {

void write_shearer_reproducer(const std::string& path, const FiniteJoint& p,
                              const ProductReference& q, const CoverCoefficients& c) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "shape";
  for (int k : p.alphabet_sizes) out << ',' << k;
  out << '\n';
  out << "p";
  for (double w : p.probs) out << ',' << format_cell(w);
  out << '\n';
  for (std::size_t i = 0; i < q.factors.size(); ++i) {
    out << 'q' << (i + 1);
    for (double w : q.factors[i]) out << ',' << format_cell(w);
    out << '\n';
  }
  for (const auto& [mask, val] : c.entries)
    out << "c," << subset_to_string(mask, c.n) << ',' << format_cell(val) << '\n';
  if (!out) throw Error("failed writing " + path);
}

}  // namespace

ExperimentReport run_shearer_fuzz(const ExperimentSpec& spec) {
  require_kind(spec, "shearer-fuzz");
  ExperimentReport rep;
  rep.metadata = metadata_lines(spec);
  rep.csv_path = join_path(spec.output_dir, "shearer-fuzz.csv");
  rep.columns = {"trial", "margin", "wall_time"};
  return with_rows(std::move(rep), [&spec](ExperimentReport& r) {
    detail::Rng rng(spec.seed);
    const int n = spec.n_range.front();
    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
      const RowTimer timer;
      FiniteJoint p;
      for (int i = 0; i < n; ++i)
        p.alphabet_sizes.push_back(static_cast<int>(rng.uniform_int(2, 4)));
      p.probs.resize(cell_count(p.alphabet_sizes));
      detail::NeumaierAcc mass;
      for (double& w : p.probs) {
        w = rng.uniform();
        mass.add(w);
      }
      for (double& w : p.probs) w /= mass.value();

      ProductReference q;
      for (int i = 0; i < n; ++i) {
        std::vector<double> f(static_cast<std::size_t>(p.alphabet_sizes[static_cast<std::size_t>(i)]));
        detail::NeumaierAcc fm;
        for (double& w : f) {
          w = rng.uniform(0.05, 1.0);
          fm.add(w);
        }
        for (double& w : f) w /= fm.value();
        q.factors.push_back(std::move(f));
      }

      CoverCoefficients c;
      c.n = n;
      const std::uint32_t full = (1u << n) - 1u;
      for (std::uint32_t mask = 1; mask <= full; ++mask) c.entries[mask] = rng.uniform();
      const std::vector<double> slack = check_cover(c);
      const double peak = 1.0 + *std::max_element(slack.begin(), slack.end());
      for (auto& [mask, val] : c.entries) {
        (void)mask;
        val /= peak;
      }

      const double margin = shearer_margin(p, q, c);
      if (margin < -1e-9) {
        ++r.violations;
        const std::string repro =
            join_path(spec.output_dir, "shearer-repro-" + std::to_string(trial) + ".csv");
        write_shearer_reproducer(repro, p, q, c);
        r.extra_files.push_back(repro);
      }
      r.rows.push_back({std::to_string(trial), format_cell(margin), timer.seconds()});
    }
  });
}

ExperimentReport run_optimal_cover(const ExperimentSpec& spec) {
  require_kind(spec, "optimal-cover");
  ExperimentReport rep;
  rep.metadata = metadata_lines(spec);
  rep.csv_path = join_path(spec.output_dir, "optimal-cover.csv");
  rep.columns = {"subset", "coefficient", "optimal_value", "full_value", "wall_time"};
  return with_rows(std::move(rep), [&spec](ExperimentReport& r) {
    const RowTimer timer;
    const SubsetValues v = read_subset_values_file(spec.values_file);
    const OptimalCover oc = optimal_cover(v);
    const std::uint32_t full = (1u << v.n) - 1u;
    const auto it = v.values.find(full);
    const double full_value = it == v.values.end() ? kInf : it->second;
    if (oc.value > full_value + 1e-9) ++r.violations;
    const std::string wall = timer.seconds();
    for (const auto& [mask, val] : oc.cover.entries)
      r.rows.push_back({subset_to_string(mask, v.n), format_cell(val),
                        format_cell(oc.value), format_cell(full_value), wall});
  });
}

ExperimentReport run_estimate(const ExperimentSpec& spec) {
  require_kind(spec, "estimate");
  ExperimentReport rep;
  rep.metadata = metadata_lines(spec);
  rep.csv_path = join_path(spec.output_dir, "estimate.csv");
  rep.columns = {"mean",       "variance",  "poincare", "cls_estimate",
                 "iterations", "converged", "wall_time"};
  return with_rows(std::move(rep), [&spec](ExperimentReport& r) {
    const RowTimer timer;
    const GridMeasure mu = build_base_measure(spec);
    const MomentSummary mom = moments(mu);
    const double cp = poincare(mu);
    const LsiEstimate est = estimate_cls(mu, spec.estimator);
    r.rows.push_back({format_cell(mom.mean), format_cell(mom.variance), format_cell(cp),
                      format_cell(est.value), std::to_string(est.iterations),
                      est.converged ? "1" : "0", timer.seconds()});
  });
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  if (spec.kind == "clt-monotone") return run_clt_monotone(spec);
  if (spec.kind == "verify-subadd") return run_verify_subadd(spec);
  if (spec.kind == "regularize") return run_regularize(spec);
  if (spec.kind == "herbst") return run_herbst(spec);
  if (spec.kind == "shearer-fuzz") return run_shearer_fuzz(spec);
  if (spec.kind == "optimal-cover") return run_optimal_cover(spec);
  if (spec.kind == "estimate") return run_estimate(spec);
  throw InvalidSpec("unknown experiment kind `" + spec.kind + "`");
}

}  // namespace lsilab
