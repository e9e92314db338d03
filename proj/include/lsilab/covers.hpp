// Fractional covers of [n], the r<->c complement transform, subadditivity
// bound evaluation, the optimal-cover LP, and closed-form comparison bounds.
//
// Subsets of [n] are bitmasks: element i (1-based) is bit i-1.  Mask 0 is
// never a covering variable (it contains no element) but may appear in
// `entries` because the complement transform pairs the full set with the
// empty set; every constraint and bound evaluation skips it.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lsilab/errors.hpp"

namespace lsilab {

struct TrivialCover final : Error {
  using Error::Error;
};
struct InfeasibleInput final : Error {
  using Error::Error;
};
struct InfeasibleCover final : Error {
  using Error::Error;
};
struct Infeasible final : Error {
  using Error::Error;
};

// Non-negative coefficients indexed by subsets of {1..n}.  Absent mask = 0.
// Feasible-as-r: sum over S containing i is >= 1 for every i.
// Feasible-as-c: sum over S containing i is <= 1 for every i.
struct CoverCoefficients {
  int n = 0;
  std::map<std::uint32_t, double> entries;

  [[nodiscard]] double get(std::uint32_t mask) const {
    auto it = entries.find(mask);
    return it == entries.end() ? 0.0 : it->second;
  }
};

// Per-subset reals >= 0, +infinity meaning "no finite constant is known".
struct SubsetValues {
  int n = 0;
  std::map<std::uint32_t, double> values;
};

// Per-element slacks sum_{S contains i} r_S - 1, i = 1..n.
// Feasible iff every slack >= -1e-12.
[[nodiscard]] std::vector<double> check_cover(const CoverCoefficients& r);
[[nodiscard]] bool feasible_as_r(const CoverCoefficients& r);
[[nodiscard]] bool feasible_as_c(const CoverCoefficients& c);

// c_S = r_{complement(S)} / (sum r - 1) and its exact inverse.  The sums run
// over all stored entries including mask 0, which is what makes the round
// trip exact.  Throws TrivialCover when the denominator vanishes (sum = 1)
// and InfeasibleInput when the input fails its side of the constraints.
[[nodiscard]] CoverCoefficients r_to_c(const CoverCoefficients& r);
[[nodiscard]] CoverCoefficients c_to_r(const CoverCoefficients& c);

// sum_S r_S * v_S over nonempty S.  +infinity if any S with r_S > 0 carries
// an infinite value.  Throws InfeasibleCover when r is not feasible-as-r.
[[nodiscard]] double bound_rhs(const CoverCoefficients& r, const SubsetValues& v);

// Exact minimizer of bound_rhs over feasible covers: primal simplex with
// Bland's rule on  min sum r_S v_S  s.t.  sum_{S contains i} r_S >= 1, r >= 0.
// Subsets with infinite (or missing) value are excluded from the variable
// set; if every set containing some element is excluded the LP is infeasible.
// Requires n <= 10.
struct OptimalCover {
  CoverCoefficients cover;
  double value = 0.0;
};
[[nodiscard]] OptimalCover optimal_cover(const SubsetValues& v);

// Closed-form comparison constants.  Overflow comes back as +infinity.
[[nodiscard]] double chen_bound(double delta);
[[nodiscard]] double chen_bound_direct(int n, double delta);

// Stock covers: all singletons with weight 1, and the n sets [n]\{i} with
// weight 1/(n-1) (n >= 2).  Both have every slack exactly 0.
[[nodiscard]] CoverCoefficients singleton_cover(int n);
[[nodiscard]] CoverCoefficients leave_one_out_cover(int n);

// Bitstring codec: leftmost character is element 1.  "101" = {1,3}.
[[nodiscard]] std::string subset_to_string(std::uint32_t mask, int n);
[[nodiscard]] std::uint32_t parse_subset(const std::string& text);

// CSV with header `subset,value`, one bitstring row per subset, +infinity
// spelled `inf`.  The reader takes n from the first row's string length.
void write_subset_values(std::ostream& out, const SubsetValues& v);
[[nodiscard]] SubsetValues read_subset_values(std::istream& in);
void write_subset_values_file(const std::string& path, const SubsetValues& v);
[[nodiscard]] SubsetValues read_subset_values_file(const std::string& path);

}  // namespace lsilab
