#pragma once

// Reference solvers used only by the tests. They share no code with the
// library's engines: a dense simplex, vertex enumeration for two-variable
// LPs, and exhaustive enumeration of violation subsets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "flexbid/flexibility.hpp"

namespace oracle {

using flexbid::FlexTriple;

// Constraint a*u + b*d <= c over (u, d) >= 0.
struct HalfPlane {
  double a, b, c;
};

struct Point2 {
  double u{0.0}, d{0.0};
  double objective() const { return u + d; }
};

// Maximises u + d over the polygon; ties broken toward the larger d.
// Returns nullopt when the polygon is empty.
inline std::optional<Point2> vertex_enumeration(std::vector<HalfPlane> cons, double tol = 1e-9) {
  cons.push_back({-1.0, 0.0, 0.0});
  cons.push_back({0.0, -1.0, 0.0});
  double scale = 1.0;
  for (const auto& h : cons) scale = std::max(scale, std::abs(h.c));
  auto feasible = [&](double u, double d) {
    for (const auto& h : cons)
      if (h.a * u + h.b * d > h.c + tol * scale) return false;
    return true;
  };
  std::optional<Point2> best;
  for (std::size_t i = 0; i < cons.size(); ++i)
    for (std::size_t j = i + 1; j < cons.size(); ++j) {
      const auto& p = cons[i];
      const auto& q = cons[j];
      const double det = p.a * q.b - p.b * q.a;
      if (std::abs(det) < 1e-15) continue;
      const double u = (p.c * q.b - p.b * q.c) / det;
      const double d = (p.a * q.c - p.c * q.a) / det;
      if (!feasible(u, d)) continue;
      Point2 x{u, d};
      if (!best || x.objective() > best->objective() + tol * scale ||
          (x.objective() >= best->objective() - tol * scale && x.d > best->d))
        best = x;
    }
  return best;
}

struct Flags {
  bool reservation{true}, energy{true}, down{true};
};

// Half-planes forcing one (minute, scenario) pair to be met.
inline void add_pair(std::vector<HalfPlane>& cons, const FlexTriple& f, const Flags& m) {
  cons.push_back({1.0, m.reservation ? 0.2 : 0.0, f.f_up});
  if (m.down) cons.push_back({0.0, 1.0, f.f_down});
  if (m.energy) cons.push_back({0.0, 1.0, f.f_energy});
}

// Deterministic bid that meets every given minute.
inline std::optional<Point2> deterministic_bid(const std::vector<FlexTriple>& minutes, const Flags& m) {
  std::vector<HalfPlane> cons;
  for (const auto& f : minutes) add_pair(cons, f, m);
  return vertex_enumeration(cons);
}

// Exact chance-constrained optimum: at most `q` of the pairs may be violated.
// Enumerates every subset of pairs left unconstrained (size <= q).
inline Point2 exact_counting(const std::vector<FlexTriple>& pairs, std::size_t q, const Flags& m) {
  const std::size_t n = pairs.size();
  if (n > 20) throw std::invalid_argument("exact_counting: too many pairs");
  Point2 best{0.0, 0.0};
  bool have = false;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > q) continue;
    std::vector<HalfPlane> cons;
    for (std::size_t j = 0; j < n; ++j)
      if (!(mask >> j & 1u)) add_pair(cons, pairs[j], m);
    if (cons.empty()) continue;  // every pair dropped: unbounded, never optimal for q < n
    auto x = vertex_enumeration(cons);
    if (x && (!have || x->objective() > best.objective())) best = *x, have = true;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Dense simplex for  max c'x  s.t.  A x <= b,  x >= 0,  b >= 0.
// Bland's rule, so degenerate instances terminate.

struct LpResult {
  std::vector<double> x;
  double objective{0.0};
};

inline LpResult simplex(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                        const std::vector<double>& c) {
  const std::size_t m = A.size(), n = c.size();
  for (double v : b)
    if (v < 0.0) throw std::invalid_argument("simplex: negative right-hand side");
  // Tableau rows 0..m-1 constraints, row m objective (reduced costs).
  std::vector<std::vector<long double>> T(m + 1, std::vector<long double>(n + m + 1, 0.0L));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0L;
    T[i][n + m] = b[i];
  }
  for (std::size_t j = 0; j < n; ++j) T[m][j] = -c[j];
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;
  const long double eps = 1e-13L;
  for (int it = 0; it < 100000; ++it) {
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n + m; ++j)
      if (T[m][j] < -eps) {
        enter = j;
        break;
      }
    if (enter == n + m) break;
    std::size_t leave = m;
    long double best = 0.0L;
    for (std::size_t i = 0; i < m; ++i) {
      if (T[i][enter] <= eps) continue;
      const long double ratio = T[i][n + m] / T[i][enter];
      if (leave == m || ratio < best - eps || (ratio <= best + eps && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) throw std::runtime_error("simplex: unbounded");
    const long double piv = T[leave][enter];
    for (auto& v : T[leave]) v /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave || T[i][enter] == 0.0L) continue;
      const long double f = T[i][enter];
      for (std::size_t j = 0; j <= n + m; ++j) T[i][j] -= f * T[leave][j];
    }
    basis[leave] = enter;
  }
  LpResult r;
  r.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) r.x[basis[i]] = static_cast<double>(T[i][n + m]);
  r.objective = static_cast<double>(T[m][n + m]);
  return r;
}

// CVaR program as printed, over variables (u, d, b = -beta, z_j = zeta_j - beta):
//   max u + d
//   u + r d - z_j + b <= F_up_j
//   d - z_j + b <= F_down_j, d - z_j + b <= F_energy_j   (when enforced)
//   phi sum z_j - alpha b <= 0
inline LpResult cvar_lp(const std::vector<FlexTriple>& pairs, double alpha, const Flags& m) {
  const std::size_t N = pairs.size();
  const std::size_t nv = 3 + N;  // u, d, b, z...
  std::vector<std::vector<double>> A;
  std::vector<double> rhs;
  const double r = m.reservation ? 0.2 : 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    std::vector<double> row(nv, 0.0);
    row[0] = 1.0, row[1] = r, row[2] = 1.0, row[3 + j] = -1.0;
    A.push_back(row), rhs.push_back(pairs[j].f_up);
    if (m.down) {
      std::vector<double> rd(nv, 0.0);
      rd[1] = 1.0, rd[2] = 1.0, rd[3 + j] = -1.0;
      A.push_back(rd), rhs.push_back(pairs[j].f_down);
    }
    if (m.energy) {
      std::vector<double> re(nv, 0.0);
      re[1] = 1.0, re[2] = 1.0, re[3 + j] = -1.0;
      A.push_back(re), rhs.push_back(pairs[j].f_energy);
    }
  }
  std::vector<double> tail(nv, 0.0);
  tail[2] = -alpha;
  for (std::size_t j = 0; j < N; ++j) tail[3 + j] = 1.0 / static_cast<double>(N);
  A.push_back(tail), rhs.push_back(0.0);
  std::vector<double> c(nv, 0.0);
  c[0] = c[1] = 1.0;
  return simplex(A, rhs, c);
}

// Integrality-relaxed counting LP over (u, d, y_j) with the documented Big-M
// values and bid box.
inline LpResult relaxed_counting_lp(const std::vector<FlexTriple>& pairs, double q, const Flags& m,
                                    double margin = 1.0) {
  const std::size_t N = pairs.size();
  const double r = m.reservation ? 0.2 : 0.0;
  double max_up = 0.0, max_down = 0.0, max_energy = 0.0;
  for (const auto& f : pairs) {
    max_up = std::max(max_up, f.f_up);
    max_down = std::max(max_down, f.f_down);
    max_energy = std::max(max_energy, f.f_energy);
  }
  double dmax = std::numeric_limits<double>::infinity();
  if (m.down) dmax = std::min(dmax, max_down);
  if (m.energy) dmax = std::min(dmax, max_energy);
  if (!std::isfinite(dmax)) dmax = max_up / r;
  auto guard = [](double v) { return v > 0.0 ? v : 1.0; };
  const double M1 = guard(margin * 2.0 * max_up);
  const double M2 = guard(margin * (max_down + dmax));
  const double M3 = guard(margin * (max_energy + dmax));
  const std::size_t nv = 2 + N;
  std::vector<std::vector<double>> A;
  std::vector<double> rhs;
  for (std::size_t j = 0; j < N; ++j) {
    std::vector<double> row(nv, 0.0);
    row[0] = 1.0, row[1] = r, row[2 + j] = -M1;
    A.push_back(row), rhs.push_back(pairs[j].f_up);
    if (m.down) {
      std::vector<double> rd(nv, 0.0);
      rd[1] = 1.0, rd[2 + j] = -M2;
      A.push_back(rd), rhs.push_back(pairs[j].f_down);
    }
    if (m.energy) {
      std::vector<double> re(nv, 0.0);
      re[1] = 1.0, re[2 + j] = -M3;
      A.push_back(re), rhs.push_back(pairs[j].f_energy);
    }
    std::vector<double> cap(nv, 0.0);
    cap[2 + j] = 1.0;
    A.push_back(cap), rhs.push_back(1.0);
  }
  std::vector<double> budget(nv, 0.0);
  for (std::size_t j = 0; j < N; ++j) budget[2 + j] = 1.0;
  A.push_back(budget), rhs.push_back(q);
  std::vector<double> box1(nv, 0.0);
  box1[0] = 1.0, box1[1] = r;
  A.push_back(box1), rhs.push_back(max_up);
  std::vector<double> box2(nv, 0.0);
  box2[1] = 1.0;
  A.push_back(box2), rhs.push_back(dmax);
  std::vector<double> c(nv, 0.0);
  c[0] = c[1] = 1.0;
  return simplex(A, rhs, c);
}

}  // namespace oracle
