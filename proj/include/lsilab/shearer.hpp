// Exact entropy inequalities on explicit finite product spaces: subset
// marginals, relative entropy against joint or product references, the
// fractional-subadditivity margin, and the conditional entropy
// decomposition.  Everything here is brute force on dense tensors.
//
// Tensors are row major with the FIRST coordinate slowest.  Coordinate i
// (1-based) is bit i-1 of a subset mask, matching the cover encoding.
#pragma once

#include <cstdint>
#include <vector>

#include "lsilab/covers.hpp"
#include "lsilab/errors.hpp"

namespace lsilab {

struct EmptySubset final : Error {
  using Error::Error;
};
struct ShapeMismatch final : Error {
  using Error::Error;
};
struct InfeasibleC final : Error {
  using Error::Error;
};
struct InfiniteDivergence final : Error {
  using Error::Error;
};
struct ZeroConditional final : Error {
  using Error::Error;
};

// A joint distribution on a product of finite alphabets (at most 4 of them;
// this module exists to be enumerable).  probs has one cell per point of the
// product space, is >= 0, and sums to 1 within 1e-12.
struct FiniteJoint {
  std::vector<int> alphabet_sizes;
  std::vector<double> probs;
};

// An independent reference: one probability vector per coordinate.
struct ProductReference {
  std::vector<std::vector<double>> factors;
};

[[nodiscard]] std::size_t cell_count(const std::vector<int>& alphabet_sizes);

// Sums probs over the coordinates outside `mask`; the result keeps the
// selected coordinates in their original order.  Mass is preserved.
[[nodiscard]] FiniteJoint marginal(const FiniteJoint& p, std::uint32_t mask);

// Relative entropy sum p log(p/q) with 0 log(0/q) = 0, +infinity as soon as
// p puts mass on a q-null cell.
[[nodiscard]] double kl(const FiniteJoint& p, const FiniteJoint& q);
[[nodiscard]] double kl(const FiniteJoint& p, const ProductReference& q);

// D(P||Q) - sum_S c_S D(P_S||Q_S), the quantity fractional subadditivity
// asserts is >= 0.  Requires c feasible-as-c and a strictly positive
// reference so every divergence in sight is finite.
[[nodiscard]] double shearer_margin(const FiniteJoint& p, const ProductReference& q,
                                    const CoverCoefficients& c);

// |Ent(g(X)) - E[Ent(g(X)|Y)] - Ent(E[g(X)|Y])| for the coordinate split
// X = coords in x_mask, Y = the rest.  An algebraic identity, so the return
// value is pure floating-point error.  g lives on the X coordinates, row
// major in their original order.
[[nodiscard]] double ent_decomposition_residual(const FiniteJoint& p, std::uint32_t x_mask,
                                                const std::vector<double>& g);

}  // namespace lsilab
