#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "flexbid/errors.hpp"
#include "flexbid/flexibility.hpp"
#include "flexbid/scenarios.hpp"

namespace flexbid {

enum class Engine { AlsoX, CVaR, Oracle };

inline std::string_view engine_name(Engine e) {
  switch (e) {
    case Engine::AlsoX: return "also-x";
    case Engine::CVaR: return "cvar";
    case Engine::Oracle: return "oracle";
  }
  return "?";
}

inline std::optional<Engine> parse_engine(std::string_view s) {
  if (s == "also-x" || s == "alsox" || s == "ALSO-X") return Engine::AlsoX;
  if (s == "cvar" || s == "CVaR") return Engine::CVaR;
  if (s == "oracle" || s == "Oracle") return Engine::Oracle;
  return std::nullopt;
}

// Which limited-energy-reservoir constraints a bid must respect. The upward
// constraint c_up <= F_up always applies; the flags switch the 20 % upward
// reservation for downward bids, the downward power limit and the 20-minute
// energy limit.
struct LerMask {
  bool enforce_upward_reservation{true};
  bool enforce_energy{true};
  bool enforce_down{true};

  static constexpr LerMask base() { return {true, true, true}; }
  static constexpr LerMask upwards_relaxation() { return {false, true, true}; }
  static constexpr LerMask energy_relaxation() { return {true, false, true}; }

  // Downward capacity must be bounded by something.
  bool valid() const { return enforce_upward_reservation || enforce_energy || enforce_down; }
  double reservation_ratio() const { return enforce_upward_reservation ? 0.2 : 0.0; }

  friend bool operator==(const LerMask&, const LerMask&) = default;
};

inline std::string mask_name(const LerMask& m) {
  if (m == LerMask::base()) return "base";
  if (m == LerMask::upwards_relaxation()) return "upwards_relaxation";
  if (m == LerMask::energy_relaxation()) return "energy_relaxation";
  std::string s = "custom";
  s += m.enforce_upward_reservation ? "-R" : "-r";
  s += m.enforce_down ? "D" : "d";
  s += m.enforce_energy ? "E" : "e";
  return s;
}

inline std::optional<LerMask> parse_mask(std::string_view s) {
  if (s == "base") return LerMask::base();
  if (s == "up-relax" || s == "upwards_relaxation") return LerMask::upwards_relaxation();
  if (s == "energy-relax" || s == "energy_relaxation") return LerMask::energy_relaxation();
  return std::nullopt;
}

struct RiskConfig {
  double epsilon{0.1};       // allowed overbid probability
  double alpha{0.1};         // CVaR tail parameter, used exactly as (1 - alpha) beta
  double bisection_tol{1.0}; // ALSO-X stopping gap on q, in violation counts
  double big_m_margin{1.0};  // multiplies the Big-M bound, >= 1
  bool continuous_q{false};  // bisect q over the reals instead of integers
  int max_iterations{200};

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("risk.epsilon must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("risk.alpha must lie in (0, 1)");
    if (continuous_q ? !(bisection_tol > 0.0) : !(bisection_tol >= 1.0))
      throw ConfigError("risk.bisection_tol must be >= 1 (or > 0 with continuous_q)");
    if (!(big_m_margin >= 1.0)) throw ConfigError("risk.big_m_margin must be >= 1");
    if (max_iterations < 1) throw ConfigError("risk.max_iterations must be >= 1");
  }
};

// Hourly capacity bid in kW.
struct Bid {
  double c_up{0.0};
  double c_down{0.0};
  int hour{0};
  Engine engine{Engine::AlsoX};

  double total() const { return c_up + c_down; }
};

// ---------------------------------------------------------------------------
// Constraint slacks. Every check in the project goes through these so that
// the solvers, the recount and the backtest agree bit for bit.

inline constexpr double kNoSlack = -std::numeric_limits<double>::infinity();

inline double reserved_up(double c_down, const LerMask& m) { return m.enforce_upward_reservation ? c_down / 5.0 : 0.0; }

inline double slack_up(double c_up, double c_down, const FlexTriple& f, const LerMask& m) {
  return c_up + reserved_up(c_down, m) - f.f_up;
}
inline double slack_down(double c_down, const FlexTriple& f, const LerMask& m) {
  return m.enforce_down ? c_down - f.f_down : kNoSlack;
}
inline double slack_energy(double c_down, const FlexTriple& f, const LerMask& m) {
  return m.enforce_energy ? c_down - f.f_energy : kNoSlack;
}
inline bool violates(double c_up, double c_down, const FlexTriple& f, const LerMask& m) {
  return slack_up(c_up, c_down, f, m) > 0.0 || slack_down(c_down, f, m) > 0.0 || slack_energy(c_down, f, m) > 0.0;
}

struct ViolationProfile {
  std::size_t scenarios{0};
  int minutes{0};
  // Row-major (scenario, minute).
  std::vector<double> slack_up;
  std::vector<double> slack_down;
  std::vector<double> slack_energy;
  std::vector<std::uint8_t> violated;

  std::size_t violation_count() const {
    return static_cast<std::size_t>(std::count(violated.begin(), violated.end(), std::uint8_t{1}));
  }
  double frequency() const {
    return violated.empty() ? 0.0 : static_cast<double>(violation_count()) / static_cast<double>(violated.size());
  }
};

inline ViolationProfile violation_profile(const Bid& bid, const ScenarioSet& scenarios, const LerMask& mask) {
  if (bid.hour != scenarios.hour) throw HourMismatch("bid hour differs from scenario hour");
  ViolationProfile p;
  p.scenarios = scenarios.size();
  p.minutes = scenarios.minutes;
  const auto n = scenarios.pair_count();
  p.slack_up.resize(n);
  p.slack_down.resize(n);
  p.slack_energy.resize(n);
  p.violated.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = scenarios.values[i];
    p.slack_up[i] = slack_up(bid.c_up, bid.c_down, f, mask);
    p.slack_down[i] = slack_down(bid.c_down, f, mask);
    p.slack_energy[i] = slack_energy(bid.c_down, f, mask);
    p.violated[i] = std::max({p.slack_up[i], p.slack_down[i], p.slack_energy[i]}) > 0.0 ? 1 : 0;
  }
  return p;
}

inline std::size_t count_violations(const Bid& bid, std::span<const FlexTriple> values, const LerMask& mask) {
  std::size_t k = 0;
  for (const auto& f : values) k += violates(bid.c_up, bid.c_down, f, mask) ? 1 : 0;
  return k;
}

inline double in_sample_violation_frequency(const Bid& bid, const ScenarioSet& scenarios, const LerMask& mask) {
  if (scenarios.pair_count() == 0) return 0.0;
  return static_cast<double>(count_violations(bid, scenarios.values, mask)) /
         static_cast<double>(scenarios.pair_count());
}

// Largest number of violated (minute, scenario) pairs compatible with
// P(violation) <= epsilon.
inline std::size_t violation_budget(double epsilon, std::size_t pairs) {
  return static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(pairs) + 1e-9));
}

namespace detail {

inline void require_valid(const LerMask& mask) {
  if (!mask.valid()) throw ConfigError("LER mask leaves the downward bid unbounded");
}

// Deterministic bid against fixed flexibility levels: the largest c_up + c_down
// with c_up + reserve(c_down) <= up, c_down <= down, c_down <= energy (masked),
// ties resolved toward the larger downward bid.
inline Bid envelope_bid(double up, double down, double energy, const LerMask& mask) {
  require_valid(mask);
  up = std::max(0.0, up);
  double cap = std::numeric_limits<double>::infinity();
  if (mask.enforce_down) cap = std::min(cap, std::max(0.0, down));
  if (mask.enforce_energy) cap = std::min(cap, std::max(0.0, energy));
  Bid b;
  if (mask.enforce_upward_reservation) {
    b.c_down = std::min(cap, 5.0 * up);
    b.c_up = std::max(0.0, up - b.c_down / 5.0);
  } else {
    b.c_down = cap;
    b.c_up = up;
  }
  // Rounding may leave the upward constraint a few ulps short; step back.
  const FlexTriple env{up, std::isfinite(down) ? down : 0.0, std::isfinite(energy) ? energy : 0.0};
  for (int i = 0; i < 256 && slack_up(b.c_up, b.c_down, env, mask) > 0.0; ++i) {
    if (b.c_up > 0.0)
      b.c_up = std::nextafter(b.c_up, 0.0);
    else
      b.c_down = std::nextafter(b.c_down, 0.0);
  }
  if (slack_up(b.c_up, b.c_down, env, mask) > 0.0) throw std::logic_error("envelope_bid: cannot restore feasibility");
  return b;
}

// Scenario pairs with identical triples merged into one weighted entry.
struct PairTable {
  std::vector<double> up, down, energy, weight;
  double total_weight{0.0};
  double max_up{0.0}, max_down{0.0}, max_energy{0.0};
  double min_up{0.0}, min_down{0.0}, min_energy{0.0};

  std::size_t size() const { return up.size(); }
  double scale() const { return std::max({1.0, max_up, max_down, max_energy}); }
};

inline PairTable build_pairs(std::span<const FlexTriple> values) {
  if (values.empty()) throw EmptyInput("scenario set");
  std::vector<FlexTriple> v(values.begin(), values.end());
  std::sort(v.begin(), v.end(), [](const FlexTriple& a, const FlexTriple& b) {
    return std::tie(a.f_up, a.f_down, a.f_energy) < std::tie(b.f_up, b.f_down, b.f_energy);
  });
  PairTable t;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    t.up.push_back(v[i].f_up);
    t.down.push_back(v[i].f_down);
    t.energy.push_back(v[i].f_energy);
    t.weight.push_back(static_cast<double>(j - i));
    i = j;
  }
  t.total_weight = static_cast<double>(v.size());
  auto [mnu, mxu] = std::minmax_element(t.up.begin(), t.up.end());
  auto [mnd, mxd] = std::minmax_element(t.down.begin(), t.down.end());
  auto [mne, mxe] = std::minmax_element(t.energy.begin(), t.energy.end());
  t.min_up = *mnu, t.max_up = *mxu;
  t.min_down = *mnd, t.max_down = *mxd;
  t.min_energy = *mne, t.max_energy = *mxe;
  return t;
}

inline double weighted_violations(const PairTable& t, double c_up, double c_down, const LerMask& mask) {
  double k = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j)
    if (violates(c_up, c_down, FlexTriple{t.up[j], t.down[j], t.energy[j]}, mask)) k += t.weight[j];
  return k;
}

// Bid box implied by the scenario envelope: any bid beyond it violates every
// pair, so it is never optimal for a chance constraint with epsilon < 1.
struct BidBox {
  double ratio{0.2};     // reservation ratio r, upward load is c_up + r c_down
  double load_max{0.0};  // bound on c_up + r c_down
  double down_max{0.0};  // bound on c_down
};

inline BidBox bid_box(const PairTable& t, const LerMask& mask) {
  BidBox b;
  b.ratio = mask.reservation_ratio();
  b.load_max = t.max_up;
  double cap = std::numeric_limits<double>::infinity();
  if (mask.enforce_down) cap = std::min(cap, t.max_down);
  if (mask.enforce_energy) cap = std::min(cap, t.max_energy);
  if (!std::isfinite(cap)) cap = t.max_up / b.ratio;
  b.down_max = std::max(0.0, cap);
  return b;
}

// Maximises c_up + c_down over a convex region given, for each c_down = d,
// the largest feasible c_up (nullopt when no c_up >= 0 is feasible). The
// objective d + max_up(d) is concave, so a golden-section search on d finds
// the optimum; a final pass moves along any optimal plateau to the largest d.
template <class MaxUp>
std::pair<double, double> maximize_total(MaxUp&& max_up, double d_max, double scale) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  struct Point {
    double d, u, f;
  };
  Point best{0.0, 0.0, kNegInf};
  auto eval = [&](double d) {
    auto u = max_up(d);
    Point p{d, u ? *u : 0.0, u ? d + *u : kNegInf};
    if (p.f > best.f || (p.f == best.f && p.d > best.d)) best = p;
    return p.f;
  };
  eval(0.0);
  if (best.f == kNegInf) throw std::logic_error("maximize_total: origin infeasible");
  if (d_max <= 0.0) return {best.u, best.d};
  const double f_end = eval(d_max);

  const double d_tol = 1e-13 * scale + 1e-300;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = d_max;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < 400 && b - a > d_tol; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = eval(x1);
    }
  }

  // Prefer the largest c_down among (numerically) optimal points.
  const double f_tol = 1e-11 * scale;
  const Point top = best;
  if (f_end >= top.f - f_tol) {
    auto u = max_up(d_max);
    return {*u, d_max};
  }
  const double probe = std::min(d_max, top.d + 1e-7 * scale);
  if (probe > top.d && eval(probe) >= top.f - f_tol) {
    double lo = probe, hi = d_max;
    for (int it = 0; it < 200 && hi - lo > d_tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      auto u = max_up(mid);
      if (u && mid + *u >= top.f - f_tol)
        lo = mid;
      else
        hi = mid;
    }
    auto u = max_up(lo);
    return {*u, lo};
  }
  return {top.u, top.d};
}

struct WeightedPoint {
  double t, w;
};

// Largest x with sum_j w_j (x - t_j)^+ <= budget. Expected linear time
// (quickselect on the breakpoints). Requires budget >= 0 and a nonempty set.
inline double largest_under_budget(std::vector<WeightedPoint>& pts, double budget) {
  std::size_t lo = 0, hi = pts.size();
  double acc_w = 0.0, acc_wt = 0.0;
  while (lo < hi) {
    const double p = [&] {
      double a = pts[lo].t, b = pts[lo + (hi - lo) / 2].t, c = pts[hi - 1].t;
      return std::max(std::min(a, b), std::min(std::max(a, b), c));
    }();
    // Three-way partition: [lo, lt) < p, [lt, gt) == p, [gt, hi) > p.
    std::size_t lt = lo, i = lo, gt = hi;
    while (i < gt) {
      if (pts[i].t < p)
        std::swap(pts[lt++], pts[i++]);
      else if (pts[i].t > p)
        std::swap(pts[i], pts[--gt]);
      else
        ++i;
    }
    double w_le = 0.0, wt_le = 0.0;
    for (std::size_t k = lo; k < gt; ++k) {
      w_le += pts[k].w;
      wt_le += pts[k].w * pts[k].t;
    }
    const double at_pivot = (acc_w + w_le) * p - (acc_wt + wt_le);
    if (at_pivot <= budget) {
      acc_w += w_le;
      acc_wt += wt_le;
      lo = gt;
    } else {
      hi = lt;
    }
  }
  return (budget + acc_wt) / acc_w;
}

struct TailItem {
  double g, w;
  bool rises;  // dG/dc_up = 1 (upward term active) rather than 0
};

struct TailSum {
  double value{0.0};
  double slope{0.0};  // a subgradient with respect to c_up
};

// Weighted sum of the largest `k` mass of values (fractional at the
// boundary), i.e. k * CVaR. Expected linear time.
inline TailSum top_mass_sum(std::vector<TailItem>& items, double k) {
  TailSum s;
  std::size_t lo = 0, hi = items.size();
  while (lo < hi && k > 0.0) {
    const double p = [&] {
      double a = items[lo].g, b = items[lo + (hi - lo) / 2].g, c = items[hi - 1].g;
      return std::max(std::min(a, b), std::min(std::max(a, b), c));
    }();
    // Descending partition: [lo, gt) > p, [gt, i) == p, [lt, hi) < p.
    std::size_t gt = lo, i = lo, lt = hi;
    while (i < lt) {
      if (items[i].g > p)
        std::swap(items[gt++], items[i++]);
      else if (items[i].g < p)
        std::swap(items[i], items[--lt]);
      else
        ++i;
    }
    double w_gt = 0.0;
    for (std::size_t j = lo; j < gt; ++j) w_gt += items[j].w;
    if (w_gt >= k) {
      hi = gt;
      continue;
    }
    for (std::size_t j = lo; j < gt; ++j) {
      s.value += items[j].w * items[j].g;
      if (items[j].rises) s.slope += items[j].w;
    }
    k -= w_gt;
    double w_eq = 0.0, w_eq_rising = 0.0;
    for (std::size_t j = gt; j < lt; ++j) {
      w_eq += items[j].w;
      if (items[j].rises) w_eq_rising += items[j].w;
    }
    if (w_eq >= k) {
      s.value += k * p;
      s.slope += std::min(k, w_eq_rising);
      k = 0.0;
      break;
    }
    s.value += w_eq * p;
    s.slope += w_eq_rising;
    k -= w_eq;
    lo = lt;
  }
  return s;
}

struct BigM {
  double up{1.0}, down{1.0}, energy{1.0};
};

inline BigM big_m(const PairTable& t, const BidBox& box, double margin) {
  auto guard = [](double m) { return m > 0.0 ? m : 1.0; };
  return {guard(margin * (t.max_up + box.load_max)), guard(margin * (t.max_down + box.down_max)),
          guard(margin * (t.max_energy + box.down_max))};
}

// Integrality-relaxed counting problem for a fixed budget q:
//   max c_up + c_down  s.t.  sum_j w_j y_j <= q,  0 <= y_j <= 1,
//   c_up + r c_down - F_up_j <= y_j M_up,  c_down - F_down_j <= y_j M_down,
//   c_down - F_energy_j <= y_j M_energy,  plus the envelope bid box.
// For fixed c_down the optimal y_j is max(0, slack / M), which turns the
// inner problem into a one-dimensional budget search.
class RelaxedCounting {
 public:
  RelaxedCounting(const PairTable& t, const LerMask& mask, double margin)
      : t_(t), mask_(mask), box_(bid_box(t, mask)), m_(big_m(t, box_, margin)) {}

  const BidBox& box() const { return box_; }
  const BigM& m() const { return m_; }

  std::optional<double> max_up(double d, double q) {
    if (d > box_.down_max) return std::nullopt;
    const double u_box = box_.load_max - box_.ratio * d;
    if (u_box < 0.0) return std::nullopt;
    pts_.resize(t_.size());
    double e_sum = 0.0;
    for (std::size_t j = 0; j < t_.size(); ++j) {
      double e = 0.0;
      if (mask_.enforce_down) e = std::max(e, (d - t_.down[j]) / m_.down);
      if (mask_.enforce_energy) e = std::max(e, (d - t_.energy[j]) / m_.energy);
      e_sum += t_.weight[j] * e;
      pts_[j] = {t_.up[j] - box_.ratio * d + m_.up * e, t_.weight[j]};
    }
    const double budget = m_.up * (q - e_sum);
    if (budget < 0.0) return std::nullopt;
    const double u = std::min(u_box, largest_under_budget(pts_, budget));
    if (u < 0.0) return std::nullopt;
    return u;
  }

  Bid solve(double q) {
    if (q <= 0.0) return envelope_bid(t_.min_up, t_.min_down, t_.min_energy, mask_);
    auto [u, d] = maximize_total([&](double dd) { return max_up(dd, q); }, box_.down_max, t_.scale());
    Bid b;
    b.c_up = u;
    b.c_down = d;
    check_big_m(b);
    return b;
  }

 private:
  void check_big_m(const Bid& b) const {
    const double tol = 1e-9 * t_.scale();
    for (std::size_t j = 0; j < t_.size(); ++j) {
      const FlexTriple f{t_.up[j], t_.down[j], t_.energy[j]};
      if (slack_up(b.c_up, b.c_down, f, mask_) > m_.up + tol || slack_down(b.c_down, f, mask_) > m_.down + tol ||
          slack_energy(b.c_down, f, mask_) > m_.energy + tol)
        throw std::logic_error("Big-M bound exceeded by a constraint slack");
    }
  }

  const PairTable& t_;
  LerMask mask_;
  BidBox box_;
  BigM m_;
  std::vector<WeightedPoint> pts_;
};

// CVaR-constrained problem as printed:
//   max c_up + c_down  s.t.  zeta_j >= every masked-in slack,  beta <= 0,
//   beta <= zeta_j,  phi sum_j zeta_j - (1 - alpha) beta <= 0,  phi = 1/N.
// Eliminating zeta and beta, (c_up, c_down) is feasible iff the weighted sum
// of the largest alpha*N values of G_j = max slack_j is <= 0.
class CvarProblem {
 public:
  CvarProblem(const PairTable& t, const LerMask& mask, double alpha)
      : t_(t), mask_(mask), box_(bid_box(t, mask)), k_(alpha * t.total_weight) {}

  TailSum tail(double u, double d) {
    items_.resize(t_.size());
    for (std::size_t j = 0; j < t_.size(); ++j) {
      const double up_term = u + box_.ratio * d - t_.up[j];
      double down_term = kNoSlack;
      if (mask_.enforce_down) down_term = std::max(down_term, d - t_.down[j]);
      if (mask_.enforce_energy) down_term = std::max(down_term, d - t_.energy[j]);
      items_[j] = {std::max(up_term, down_term), t_.weight[j], up_term >= down_term};
    }
    return top_mass_sum(items_, k_);
  }

  std::optional<double> max_up(double d) {
    if (d > box_.down_max) return std::nullopt;
    const double u_hi = box_.load_max - box_.ratio * d;
    if (u_hi < 0.0) return std::nullopt;
    if (tail(0.0, d).value > 0.0) return std::nullopt;
    // Newton from the right on the convex, nondecreasing tail sum: every
    // iterate stays at or above the root, and linear pieces are hit exactly.
    double u = u_hi;
    const double step_tol = 1e-15 * t_.scale();
    for (int it = 0; it < 200; ++it) {
      const auto s = tail(u, d);
      if (s.value <= 0.0) return u;
      if (!(s.slope > 0.0)) break;
      const double next = u - s.value / s.slope;
      if (next <= 0.0) return 0.0;
      if (!(next < u)) break;
      if (u - next <= step_tol) return next;
      u = next;
    }
    // Fallback bisection between 0 (feasible) and u (infeasible).
    double lo = 0.0, hi = u;
    for (int it = 0; it < 200 && hi - lo > step_tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tail(mid, d).value <= 0.0 ? lo : hi) = mid;
    }
    return lo;
  }

  Bid solve() {
    auto [u, d] = maximize_total([&](double dd) { return max_up(dd); }, box_.down_max, t_.scale());
    Bid b;
    b.c_up = u;
    b.c_down = d;
    return b;
  }

 private:
  const PairTable& t_;
  LerMask mask_;
  BidBox box_;
  double k_;
  std::vector<TailItem> items_;
};

}  // namespace detail

// Value of min over beta <= 0 of  phi sum_j max(beta, G_j) - (1 - alpha) beta,
// evaluated exactly at the breakpoints; a bid satisfies the CVaR constraint
// iff this is <= 0. G_j is the largest masked-in slack of pair j.
inline double cvar_constraint_value(const Bid& bid, const ScenarioSet& scenarios, const LerMask& mask, double alpha) {
  std::vector<double> g;
  g.reserve(scenarios.pair_count());
  for (const auto& f : scenarios.values)
    g.push_back(std::max({slack_up(bid.c_up, bid.c_down, f, mask), slack_down(bid.c_down, f, mask),
                          slack_energy(bid.c_down, f, mask)}));
  const double phi = 1.0 / static_cast<double>(g.size());
  auto h = [&](double beta) {
    double s = 0.0;
    for (double x : g) s += std::max(beta, x);
    return phi * s - (1.0 - alpha) * beta;
  };
  double best = h(0.0);
  for (double x : g)
    if (x <= 0.0) best = std::min(best, h(x));
  return best;
}

// Perfect-foresight bid for realized minutes: every minute must satisfy the
// masked-in constraints.
inline Bid oracle_bid(std::span<const FlexTriple> realized, const LerMask& mask, int hour = 0) {
  if (realized.empty()) throw EmptyInput("oracle_bid minutes");
  double up = realized.front().f_up, down = realized.front().f_down, energy = realized.front().f_energy;
  for (const auto& f : realized) {
    up = std::min(up, f.f_up);
    down = std::min(down, f.f_down);
    energy = std::min(energy, f.f_energy);
  }
  Bid b = detail::envelope_bid(up, down, energy, mask);
  b.hour = hour;
  b.engine = Engine::Oracle;
  return b;
}

// One relaxed counting LP (integrality of the violation indicators dropped)
// at violation budget q.
inline Bid solve_relaxed_counting(const ScenarioSet& scenarios, double q, const LerMask& mask,
                                  double big_m_margin = 1.0) {
  detail::require_valid(mask);
  if (q < 0.0) throw ConfigError("relaxed counting: q must be >= 0");
  const auto table = detail::build_pairs(scenarios.values);
  detail::RelaxedCounting problem(table, mask, big_m_margin);
  Bid b = problem.solve(q);
  b.hour = scenarios.hour;
  b.engine = Engine::AlsoX;
  return b;
}

struct AlsoXTrace {
  int iterations{0};
  std::vector<double> q_tried;
  std::vector<bool> accepted;
  double q_final{0.0};
  std::size_t violations{0};
  std::size_t budget{0};
};

// ALSO-X: bisection on the violation budget q of the relaxed counting LP.
// A candidate is accepted when its recounted empirical violation frequency is
// at most epsilon; the bid of the largest accepted q is returned.
inline Bid solve_also_x(const ScenarioSet& scenarios, const RiskConfig& risk, const LerMask& mask,
                        AlsoXTrace* trace = nullptr) {
  risk.validate();
  detail::require_valid(mask);
  const auto table = detail::build_pairs(scenarios.values);
  detail::RelaxedCounting problem(table, mask, risk.big_m_margin);
  const std::size_t budget = violation_budget(risk.epsilon, scenarios.pair_count());
  const double allowed = static_cast<double>(budget);

  std::optional<Bid> best;
  double lo = 0.0, hi = allowed;
  int iterations = 0;
  AlsoXTrace local;
  auto try_q = [&](double q) {
    if (++iterations > risk.max_iterations) throw NonConvergence("ALSO-X bisection exceeded the iteration cap");
    Bid b = problem.solve(q);
    const bool ok = detail::weighted_violations(table, b.c_up, b.c_down, mask) <= allowed;
    local.q_tried.push_back(q);
    local.accepted.push_back(ok);
    if (ok) best = b;
    return ok;
  };
  if (risk.continuous_q) {
    while (hi - lo >= risk.bisection_tol) {
      const double q = 0.5 * (lo + hi);
      (try_q(q) ? lo : hi) = q;
    }
  } else {
    const double tol = std::floor(risk.bisection_tol);
    while (hi - lo >= tol && hi > lo) {
      const double q = lo + std::ceil((hi - lo) / 2.0);
      if (try_q(q))
        lo = q;
      else
        hi = q - 1.0;
    }
  }
  if (!best) best = problem.solve(0.0);
  Bid b = *best;
  b.hour = scenarios.hour;
  b.engine = Engine::AlsoX;
  if (trace) {
    *trace = std::move(local);
    trace->iterations = iterations;
    trace->q_final = lo;
    trace->budget = budget;
    trace->violations = count_violations(b, scenarios.values, mask);
  }
  return b;
}

inline Bid solve_cvar(const ScenarioSet& scenarios, const RiskConfig& risk, const LerMask& mask) {
  risk.validate();
  detail::require_valid(mask);
  const auto table = detail::build_pairs(scenarios.values);
  detail::CvarProblem problem(table, mask, risk.alpha);
  Bid b = problem.solve();
  b.hour = scenarios.hour;
  b.engine = Engine::CVaR;
  return b;
}

}  // namespace flexbid
