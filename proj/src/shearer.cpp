#include "lsilab/shearer.hpp"

#include <cmath>
#include <limits>

#include "lsilab/detail/numeric.hpp"

namespace lsilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassTol = 1e-12;

void validate(const FiniteJoint& p) {
  const std::size_t n = p.alphabet_sizes.size();
  if (n < 1 || n > 4)
    throw PreconditionViolation("joint distributions carry between 1 and 4 coordinates");
  if (cell_count(p.alphabet_sizes) != p.probs.size())
    throw ShapeMismatch("probs length does not match the alphabet sizes");
  detail::NeumaierAcc mass;
  for (double w : p.probs) {
    if (!std::isfinite(w) || w < 0.0)
      throw PreconditionViolation("probabilities must be finite and non-negative");
    mass.add(w);
  }
  if (std::abs(mass.value() - 1.0) > kMassTol)
    throw PreconditionViolation("probabilities must sum to 1");
}

void validate(const ProductReference& q) {
  if (q.factors.empty())
    throw PreconditionViolation("a product reference needs at least one factor");
  for (const auto& f : q.factors) {
    if (f.empty()) throw PreconditionViolation("empty factor in product reference");
    detail::NeumaierAcc mass;
    for (double w : f) {
      if (!std::isfinite(w) || w < 0.0)
        throw PreconditionViolation("factor entries must be finite and non-negative");
      mass.add(w);
    }
    if (std::abs(mass.value() - 1.0) > kMassTol)
      throw PreconditionViolation("each factor must sum to 1");
  }
}

void require_same_ground_set(const FiniteJoint& p, const ProductReference& q) {
  if (q.factors.size() != p.alphabet_sizes.size())
    throw ShapeMismatch("joint and reference disagree on the number of coordinates");
  for (std::size_t i = 0; i < q.factors.size(); ++i)
    if (q.factors[i].size() != static_cast<std::size_t>(p.alphabet_sizes[i]))
      throw ShapeMismatch("joint and reference disagree on an alphabet size");
}

// Digits of a row-major linear index, first coordinate slowest.
void decode(std::size_t idx, const std::vector<int>& sizes, std::vector<int>& digits) {
  digits.resize(sizes.size());
  for (std::size_t i = sizes.size(); i-- > 0;) {
    const auto k = static_cast<std::size_t>(sizes[i]);
    digits[i] = static_cast<int>(idx % k);
    idx /= k;
  }
}

[[nodiscard]] double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

std::size_t cell_count(const std::vector<int>& alphabet_sizes) {
  std::size_t cells = 1;
  for (int k : alphabet_sizes) {
    if (k < 1) throw PreconditionViolation("alphabet sizes must be >= 1");
    cells *= static_cast<std::size_t>(k);
    if (cells > 100000000u) throw PreconditionViolation("tensor too large to enumerate");
  }
  return cells;
}

FiniteJoint marginal(const FiniteJoint& p, std::uint32_t mask) {
  validate(p);
  const int n = static_cast<int>(p.alphabet_sizes.size());
  if (mask == 0u) throw EmptySubset("cannot marginalize onto the empty subset");
  if (mask >= (1u << n))
    throw PreconditionViolation("subset mask outside the coordinate set");

  FiniteJoint out;
  for (int i = 0; i < n; ++i)
    if (mask & (1u << i)) out.alphabet_sizes.push_back(p.alphabet_sizes[static_cast<std::size_t>(i)]);
  std::vector<detail::NeumaierAcc> acc(cell_count(out.alphabet_sizes));
  std::vector<int> digits;
  for (std::size_t t = 0; t < p.probs.size(); ++t) {
    decode(t, p.alphabet_sizes, digits);
    std::size_t oi = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        oi = oi * static_cast<std::size_t>(p.alphabet_sizes[static_cast<std::size_t>(i)]) +
             static_cast<std::size_t>(digits[static_cast<std::size_t>(i)]);
      }
    acc[oi].add(p.probs[t]);
  }
  out.probs.resize(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out.probs[i] = acc[i].value();
  return out;
}

double kl(const FiniteJoint& p, const FiniteJoint& q) {
  validate(p);
  validate(q);
  if (p.alphabet_sizes != q.alphabet_sizes)
    throw ShapeMismatch("relative entropy needs matching shapes");
  detail::NeumaierAcc acc;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    if (pi == 0.0) continue;
    const double qi = q.probs[i];
    if (qi == 0.0) return kInf;
    acc.add(pi * std::log(pi / qi));
  }
  return acc.value();
}

double kl(const FiniteJoint& p, const ProductReference& q) {
  validate(p);
  validate(q);
  require_same_ground_set(p, q);
  detail::NeumaierAcc acc;
  std::vector<int> digits;
  for (std::size_t t = 0; t < p.probs.size(); ++t) {
    const double pt = p.probs[t];
    if (pt == 0.0) continue;
    decode(t, p.alphabet_sizes, digits);
    double qt = 1.0;
    for (std::size_t i = 0; i < q.factors.size(); ++i)
      qt *= q.factors[i][static_cast<std::size_t>(digits[i])];
    if (qt == 0.0) return kInf;
    acc.add(pt * std::log(pt / qt));
  }
  return acc.value();
}

double shearer_margin(const FiniteJoint& p, const ProductReference& q,
                      const CoverCoefficients& c) {
  validate(p);
  validate(q);
  require_same_ground_set(p, q);
  if (c.n != static_cast<int>(p.alphabet_sizes.size()))
    throw ShapeMismatch("cover and joint disagree on the number of coordinates");
  if (!feasible_as_c(c))
    throw InfeasibleC("coefficients exceed 1 on some coordinate");
  for (const auto& f : q.factors)
    for (double w : f)
      if (w == 0.0)
        throw InfiniteDivergence("the product reference must be strictly positive");

  const double full = kl(p, q);
  detail::NeumaierAcc rhs;
  for (const auto& [mask, val] : c.entries) {
    if (mask == 0u || val == 0.0) continue;
    ProductReference qs;
    for (std::size_t i = 0; i < q.factors.size(); ++i)
      if (mask & (1u << i)) qs.factors.push_back(q.factors[i]);
    rhs.add(val * kl(marginal(p, mask), qs));
  }
  return full - rhs.value();
}

double ent_decomposition_residual(const FiniteJoint& p, std::uint32_t x_mask,
                                  const std::vector<double>& g) {
  validate(p);
  const int n = static_cast<int>(p.alphabet_sizes.size());
  if (x_mask == 0u) throw EmptySubset("the X side of the split is empty");
  if (x_mask >= (1u << n))
    throw PreconditionViolation("subset mask outside the coordinate set");

  std::vector<int> x_sizes, y_sizes;
  for (int i = 0; i < n; ++i) {
    const int k = p.alphabet_sizes[static_cast<std::size_t>(i)];
    if (x_mask & (1u << i))
      x_sizes.push_back(k);
    else
      y_sizes.push_back(k);
  }
  const std::size_t nx = cell_count(x_sizes);
  const std::size_t ny = y_sizes.empty() ? 1 : cell_count(y_sizes);
  if (g.size() != nx)
    throw ShapeMismatch("g does not match the X-coordinate shape");
  for (double v : g) {
    if (!std::isfinite(v)) throw PreconditionViolation("g must be finite");
    if (v < 0.0) throw PreconditionViolation("g must be non-negative");
  }

  std::vector<detail::NeumaierAcc> p_y(ny), p_x(nx), a(ny), b(ny);
  std::vector<int> digits;
  for (std::size_t t = 0; t < p.probs.size(); ++t) {
    const double w = p.probs[t];
    decode(t, p.alphabet_sizes, digits);
    std::size_t xi = 0, yi = 0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(p.alphabet_sizes[static_cast<std::size_t>(i)]);
      const auto d = static_cast<std::size_t>(digits[static_cast<std::size_t>(i)]);
      if (x_mask & (1u << i))
        xi = xi * k + d;
      else
        yi = yi * k + d;
    }
    p_y[yi].add(w);
    p_x[xi].add(w);
    a[yi].add(w * xlogx(g[xi]));
    b[yi].add(w * g[xi]);
  }
  for (std::size_t y = 0; y < ny; ++y)
    if (p_y[y].value() <= 0.0)
      throw ZeroConditional("a Y cell has zero marginal mass; conditionals are undefined");

  // Left side: Ent of g under the X marginal.
  detail::NeumaierAcc lhs_gl, lhs_m;
  for (std::size_t x = 0; x < nx; ++x) {
    lhs_gl.add(p_x[x].value() * xlogx(g[x]));
    lhs_m.add(p_x[x].value() * g[x]);
  }
  const double lhs = lhs_gl.value() - xlogx(lhs_m.value());

  // Right side, term by term: mean conditional entropy, then the entropy of
  // the conditional mean.  Evaluated through the conditional h = B/p_Y so
  // the two sides do not share a floating-point path.
  detail::NeumaierAcc t1, t2_gl, t2_m;
  for (std::size_t y = 0; y < ny; ++y) {
    const double py = p_y[y].value();
    const double h = b[y].value() / py;
    t1.add(a[y].value() - py * xlogx(h));
    t2_gl.add(py * xlogx(h));
    t2_m.add(py * h);
  }
  const double rhs = t1.value() + t2_gl.value() - xlogx(t2_m.value());
  return std::abs(lhs - rhs);
}

}  // namespace lsilab
