#include "lsilab/covers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "lsilab/detail/numeric.hpp"

namespace lsilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlackTol = 1e-12;

void require_ground_set(int n, int cap) {
  if (n < 1 || n > cap)
    throw PreconditionViolation("ground-set size must be in [1, " + std::to_string(cap) +
                                "], got " + std::to_string(n));
}

void validate(const CoverCoefficients& r) {
  require_ground_set(r.n, 16);
  const std::uint32_t full = (1u << r.n) - 1u;
  for (const auto& [mask, val] : r.entries) {
    if (mask > full)
      throw PreconditionViolation("subset mask outside the ground set");
    if (!std::isfinite(val) || val < 0.0)
      throw PreconditionViolation("cover coefficients must be finite and non-negative");
  }
}

void validate(const SubsetValues& v) {
  require_ground_set(v.n, 16);
  const std::uint32_t full = (1u << v.n) - 1u;
  for (const auto& [mask, val] : v.values) {
    if (mask == 0u || mask > full)
      throw PreconditionViolation("subset values must be indexed by nonempty subsets of the ground set");
    if (std::isnan(val) || val < 0.0)
      throw PreconditionViolation("subset values must be >= 0 (or +infinity)");
  }
}

// Sum of all stored coefficients, mask 0 included.
[[nodiscard]] double total(const CoverCoefficients& r) {
  detail::NeumaierAcc acc;
  for (const auto& [mask, val] : r.entries) {
    (void)mask;
    acc.add(val);
  }
  return acc.value();
}

// The transform is its own inverse up to which constraint side the input is
// checked against, so both directions share this core.
[[nodiscard]] CoverCoefficients complement_rescale(const CoverCoefficients& in) {
  const double s = total(in);
  if (s - 1.0 <= kSlackTol)
    throw TrivialCover("coefficient sum is 1; the transform denominator vanishes");
  const std::uint32_t full = (1u << in.n) - 1u;
  CoverCoefficients out;
  out.n = in.n;
  for (const auto& [mask, val] : in.entries) {
    if (val == 0.0) continue;
    out.entries[full ^ mask] = val / (s - 1.0);
  }
  return out;
}

}  // namespace

std::vector<double> check_cover(const CoverCoefficients& r) {
  validate(r);
  std::vector<detail::NeumaierAcc> acc(static_cast<std::size_t>(r.n));
  for (const auto& [mask, val] : r.entries)
    for (int i = 0; i < r.n; ++i)
      if (mask & (1u << i)) acc[static_cast<std::size_t>(i)].add(val);
  std::vector<double> slack(static_cast<std::size_t>(r.n));
  for (int i = 0; i < r.n; ++i) slack[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)].value() - 1.0;
  return slack;
}

bool feasible_as_r(const CoverCoefficients& r) {
  const std::vector<double> slack = check_cover(r);
  return std::all_of(slack.begin(), slack.end(), [](double s) { return s >= -kSlackTol; });
}

bool feasible_as_c(const CoverCoefficients& c) {
  const std::vector<double> slack = check_cover(c);
  return std::all_of(slack.begin(), slack.end(), [](double s) { return s <= kSlackTol; });
}

CoverCoefficients r_to_c(const CoverCoefficients& r) {
  if (!feasible_as_r(r))
    throw InfeasibleInput("coefficients do not cover every element");
  return complement_rescale(r);
}

CoverCoefficients c_to_r(const CoverCoefficients& c) {
  if (!feasible_as_c(c))
    throw InfeasibleInput("coefficients exceed 1 on some element");
  return complement_rescale(c);
}

double bound_rhs(const CoverCoefficients& r, const SubsetValues& v) {
  validate(v);
  if (r.n != v.n)
    throw PreconditionViolation("cover and values disagree on the ground-set size");
  if (!feasible_as_r(r))
    throw InfeasibleCover("coefficients do not cover every element");
  detail::NeumaierAcc acc;
  for (const auto& [mask, val] : r.entries) {
    if (mask == 0u || val == 0.0) continue;
    auto it = v.values.find(mask);
    if (it == v.values.end())
      throw PreconditionViolation("no value for subset " + subset_to_string(mask, v.n));
    if (it->second == kInf) return kInf;
    acc.add(val * it->second);
  }
  return acc.value();
}

namespace {

// Dense two-phase primal simplex, Bland's rule on both the entering and the
// leaving choice.  Minimizes c.x subject to Ax >= 1, x >= 0 where column j
// of A is the indicator of vars[j].  Small and exact enough at n <= 10.
struct Simplex {
  int rows_ = 0;
  int cols_ = 0;  // variable columns + surplus + artificial (rhs held apart)
  std::vector<std::vector<double>> t_;
  std::vector<double> rhs_;
  std::vector<double> obj_;
  double obj_rhs_ = 0.0;
  std::vector<int> basis_;

  void pivot(int pr, int pc) {
    const double p = t_[static_cast<std::size_t>(pr)][static_cast<std::size_t>(pc)];
    auto& prow = t_[static_cast<std::size_t>(pr)];
    for (double& x : prow) x /= p;
    rhs_[static_cast<std::size_t>(pr)] /= p;
    for (int i = 0; i < rows_; ++i) {
      if (i == pr) continue;
      const double f = t_[static_cast<std::size_t>(i)][static_cast<std::size_t>(pc)];
      if (f == 0.0) continue;
      auto& row = t_[static_cast<std::size_t>(i)];
      for (int j = 0; j < cols_; ++j) row[static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      row[static_cast<std::size_t>(pc)] = 0.0;
      rhs_[static_cast<std::size_t>(i)] -= f * rhs_[static_cast<std::size_t>(pr)];
    }
    const double f = obj_[static_cast<std::size_t>(pc)];
    if (f != 0.0) {
      for (int j = 0; j < cols_; ++j) obj_[static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      obj_[static_cast<std::size_t>(pc)] = 0.0;
      obj_rhs_ -= f * rhs_[static_cast<std::size_t>(pr)];
    }
    basis_[static_cast<std::size_t>(pr)] = pc;
  }

  // Runs to optimality over the columns in [0, allowed).  Bland's rule makes
  // cycling impossible, so the iteration cap only guards against NaNs.
  void solve(int allowed) {
    for (int iter = 0; iter < 20000; ++iter) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j)
        if (obj_[static_cast<std::size_t>(j)] < -1e-9) {
          enter = j;
          break;
        }
      if (enter < 0) return;
      int leave = -1;
      double best = kInf;
      for (int i = 0; i < rows_; ++i) {
        const double a = t_[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
        if (a <= 1e-9) continue;
        const double ratio = rhs_[static_cast<std::size_t>(i)] / a;
        if (ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && (leave < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]))) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) throw Error("linear program is unbounded");
      pivot(leave, enter);
    }
    throw Error("simplex failed to terminate");
  }
};

}  // namespace

OptimalCover optimal_cover(const SubsetValues& v) {
  validate(v);
  require_ground_set(v.n, 10);
  const int n = v.n;

  std::vector<std::uint32_t> vars;
  std::vector<double> cost;
  for (const auto& [mask, val] : v.values) {
    if (val == kInf) continue;
    vars.push_back(mask);
    cost.push_back(val);
  }
  for (int i = 0; i < n; ++i) {
    const bool covered = std::any_of(vars.begin(), vars.end(),
                                     [i](std::uint32_t m) { return (m & (1u << i)) != 0u; });
    if (!covered)
      throw Infeasible("every set containing element " + std::to_string(i + 1) +
                       " has an infinite or missing value");
  }

  const int nv = static_cast<int>(vars.size());
  Simplex sx;
  sx.rows_ = n;
  sx.cols_ = nv + 2 * n;
  sx.t_.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(sx.cols_), 0.0));
  sx.rhs_.assign(static_cast<std::size_t>(n), 1.0);
  sx.basis_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& row = sx.t_[static_cast<std::size_t>(i)];
    for (int j = 0; j < nv; ++j)
      if (vars[static_cast<std::size_t>(j)] & (1u << i)) row[static_cast<std::size_t>(j)] = 1.0;
    row[static_cast<std::size_t>(nv + i)] = -1.0;      // surplus
    row[static_cast<std::size_t>(nv + n + i)] = 1.0;   // artificial
    sx.basis_[static_cast<std::size_t>(i)] = nv + n + i;
  }

  // Phase 1: minimize the artificial sum.  Reduced costs under the all-
  // artificial basis are -(column sums); the artificial columns stay at 0.
  sx.obj_.assign(static_cast<std::size_t>(sx.cols_), 0.0);
  for (int j = 0; j < nv + n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += sx.t_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    sx.obj_[static_cast<std::size_t>(j)] = -s;
  }
  sx.obj_rhs_ = -static_cast<double>(n);
  sx.solve(nv + n);
  if (-sx.obj_rhs_ > 1e-7)
    throw Infeasible("phase-1 artificial sum did not reach zero");

  // Pivot any zero-level artificial out of the basis where a real column is
  // available; a row with no such column is redundant and can stay put.
  for (int i = 0; i < n; ++i) {
    if (sx.basis_[static_cast<std::size_t>(i)] < nv + n) continue;
    for (int j = 0; j < nv + n; ++j) {
      if (std::abs(sx.t_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) > 1e-9) {
        sx.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2: the real objective, artificial columns barred from entering.
  sx.obj_.assign(static_cast<std::size_t>(sx.cols_), 0.0);
  for (int j = 0; j < nv; ++j) sx.obj_[static_cast<std::size_t>(j)] = cost[static_cast<std::size_t>(j)];
  sx.obj_rhs_ = 0.0;
  for (int i = 0; i < n; ++i) {
    const int b = sx.basis_[static_cast<std::size_t>(i)];
    if (b >= nv) continue;
    const double cb = cost[static_cast<std::size_t>(b)];
    if (cb == 0.0) continue;
    for (int j = 0; j < sx.cols_; ++j)
      sx.obj_[static_cast<std::size_t>(j)] -= cb * sx.t_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    sx.obj_rhs_ -= cb * sx.rhs_[static_cast<std::size_t>(i)];
  }
  sx.solve(nv + n);

  OptimalCover out;
  out.cover.n = n;
  detail::NeumaierAcc val;
  for (int i = 0; i < n; ++i) {
    const int b = sx.basis_[static_cast<std::size_t>(i)];
    if (b >= nv) continue;
    const double x = std::max(sx.rhs_[static_cast<std::size_t>(i)], 0.0);
    if (x == 0.0) continue;
    out.cover.entries[vars[static_cast<std::size_t>(b)]] = x;
    val.add(cost[static_cast<std::size_t>(b)] * x);
  }
  out.value = val.value();
  return out;
}

double chen_bound(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw PreconditionViolation("delta must be a positive real");
  return 6.0 * (4.0 + delta * delta) * std::exp(4.0 / (delta * delta));
}

double chen_bound_direct(int n, double delta) {
  if (n < 1) throw PreconditionViolation("n must be >= 1");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw PreconditionViolation("delta must be a positive real");
  const double nn = static_cast<double>(n);
  return 6.0 * (4.0 * nn + delta * delta / nn) * std::exp(4.0 * nn * nn * nn / (delta * delta));
}

CoverCoefficients singleton_cover(int n) {
  require_ground_set(n, 16);
  CoverCoefficients r;
  r.n = n;
  for (int i = 0; i < n; ++i) r.entries[1u << i] = 1.0;
  return r;
}

CoverCoefficients leave_one_out_cover(int n) {
  if (n < 2) throw PreconditionViolation("leave-one-out covers need n >= 2");
  require_ground_set(n, 16);
  const std::uint32_t full = (1u << n) - 1u;
  CoverCoefficients r;
  r.n = n;
  for (int i = 0; i < n; ++i) r.entries[full ^ (1u << i)] = 1.0 / static_cast<double>(n - 1);
  return r;
}

std::string subset_to_string(std::uint32_t mask, int n) {
  require_ground_set(n, 16);
  if (mask >= (1u << n))
    throw PreconditionViolation("subset mask outside the ground set");
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if (mask & (1u << i)) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

std::uint32_t parse_subset(const std::string& text) {
  if (text.empty() || text.size() > 16)
    throw ParseError("subset bitstring must have between 1 and 16 characters");
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1')
      mask |= 1u << i;
    else if (text[i] != '0')
      throw ParseError("subset bitstring may contain only 0 and 1");
  }
  return mask;
}

void write_subset_values(std::ostream& out, const SubsetValues& v) {
  validate(v);
  out << "subset,value\n";
  char buf[64];
  for (const auto& [mask, val] : v.values) {
    out << subset_to_string(mask, v.n) << ',';
    if (val == kInf) {
      out << "inf";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", val);
      out << buf;
    }
    out << '\n';
  }
}

SubsetValues read_subset_values(std::istream& in) {
  SubsetValues v;
  std::string line;
  bool saw_header = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != "subset,value")
        throw ParseError("expected header `subset,value`, got `" + line + "`");
      saw_header = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError("expected exactly two fields: `" + line + "`");
    const std::string subset = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (width == 0) {
      width = subset.size();
      if (width == 0 || width > 16)
        throw ParseError("subset bitstring must have between 1 and 16 characters");
      v.n = static_cast<int>(width);
    } else if (subset.size() != width) {
      throw ParseError("subset bitstrings must all have the same length");
    }
    const std::uint32_t mask = parse_subset(subset);
    if (mask == 0u) throw ParseError("the empty subset carries no value");
    if (v.values.count(mask) != 0u)
      throw ParseError("duplicate subset " + subset);
    double val;
    if (value == "inf") {
      val = kInf;
    } else {
      char* end = nullptr;
      val = std::strtod(value.c_str(), &end);
      if (end == value.c_str() || *end != '\0')
        throw ParseError("bad value `" + value + "`");
    }
    if (std::isnan(val) || val < 0.0)
      throw ParseError("subset values must be >= 0");
    v.values[mask] = val;
  }
  if (!saw_header) throw ParseError("missing `subset,value` header");
  if (v.values.empty()) throw ParseError("no subset rows");
  return v;
}

void write_subset_values_file(const std::string& path, const SubsetValues& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_subset_values(out, v);
  if (!out) throw Error("failed writing " + path);
}

SubsetValues read_subset_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_subset_values(in);
}

}  // namespace lsilab
