// Independent reference computations for the test suite: composite Simpson
// quadrature, an implicit-QL tridiagonal eigensolver, and brute-force vertex
// enumeration for small covering LPs.  Deliberately separate algorithms from
// the library paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Eigenvalues of a symmetric tridiagonal matrix (diagonal d, subdiagonal e,
// e[i] coupling i and i+1) by the implicit QL iteration with Wilkinson
// shifts, classic tql form, values only.
inline std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> e) {
  const int n = static_cast<int>(d.size());
  e.resize(d.size());
  if (n > 0) e[static_cast<std::size_t>(n) - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 2.3e-16 * dd + 1e-300) break;
      }
      if (m != l) {
        if (++iter > 60) return {};
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

// Eigenvalues of the generalized problem A f = lambda * diag(w) f for the
// discrete Dirichlet energy on a uniform grid of spacing h: edge conductance
// (w_i + w_{i+1}) / (2 h^2), reduced symmetrically by diag(w)^{-1/2}.
inline std::vector<double> dirichlet_pencil_eigenvalues(const std::vector<double>& w, double h) {
  const std::size_t n = w.size();
  std::vector<double> cond(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) cond[i] = (w[i] + w[i + 1]) / (2.0 * h * h);
  std::vector<double> d(n, 0.0), e(n - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    if (i > 0) row += cond[i - 1];
    if (i + 1 < n) row += cond[i];
    d[i] = row / w[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = -cond[i] / std::sqrt(w[i] * w[i + 1]);
  return tridiag_eigenvalues(std::move(d), std::move(e));
}

// Gaussian elimination with partial pivoting; false when singular.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-11) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t cc = col; cc < n; ++cc) a[r][cc] -= f * a[col][cc];
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

// Exact optimum of  min cost.r  s.t.  sum_{S contains i} r_S >= 1, r >= 0
// by enumerating every basic point: each choice of nv active constraints
// among the n covering rows and nv sign constraints.  Only sane for tiny
// instances; that is the point.
inline double lp_vertex_enum(int n, const std::vector<std::uint32_t>& vars,
                             const std::vector<double>& cost) {
  const std::size_t nv = vars.size();
  const std::size_t rows = static_cast<std::size_t>(n) + nv;
  double best = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> pick(nv);
  for (std::size_t i = 0; i < nv; ++i) pick[i] = i;
  for (;;) {
    std::vector<std::vector<double>> a(nv, std::vector<double>(nv, 0.0));
    std::vector<double> b(nv, 0.0);
    for (std::size_t k = 0; k < nv; ++k) {
      const std::size_t row = pick[k];
      if (row < static_cast<std::size_t>(n)) {
        for (std::size_t j = 0; j < nv; ++j)
          a[k][j] = (vars[j] & (1u << row)) ? 1.0 : 0.0;
        b[k] = 1.0;
      } else {
        a[k][row - static_cast<std::size_t>(n)] = 1.0;
      }
    }
    std::vector<double> r;
    if (solve_linear(std::move(a), std::move(b), r)) {
      bool ok = true;
      for (double v : r)
        if (v < -1e-9) ok = false;
      for (int i = 0; ok && i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < nv; ++j)
          if (vars[j] & (1u << i)) s += r[j];
        if (s < 1.0 - 1e-9) ok = false;
      }
      if (ok) {
        double obj = 0.0;
        for (std::size_t j = 0; j < nv; ++j) obj += cost[j] * r[j];
        best = std::min(best, obj);
      }
    }

    // next combination of nv indices out of `rows`
    std::size_t k = nv;
    while (k-- > 0) {
      if (pick[k] + (nv - k) < rows) {
        ++pick[k];
        for (std::size_t j = k + 1; j < nv; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (k == 0) return best;
    }
  }
}

}  // namespace oracle
