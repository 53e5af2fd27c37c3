#pragma once

// Closed-form positive sequences with certified tail sums.
//
// A SequenceRule generates a strictly positive sequence value(0), value(1), ...
// used for ray edge weights, ray measures, and edge length assignments.
// Every summation routine here either returns an exact closed form (geometric
// data), a value with a certified error bracket (power data via integral
// comparison, mixed data via ratio-dominated remainders), or an explicit
// Divergent/NotComputable verdict. Nothing silently truncates an infinite sum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace netpot {

// value(k) = first * ratio^k
struct Geometric {
  double first = 1.0;
  double ratio = 1.0;
};

// value(k) = coeff * (k+1)^exponent
struct Power {
  double coeff = 1.0;
  double exponent = 0.0;
};

// explicit prefix, then tail.value(k - values.size())
struct TableRule {
  std::vector<double> values;
  std::variant<Geometric, Power> tail;
};

// Certified sum of a series with nonnegative terms.
// kind == Finite guarantees |true_sum - value| <= error.
struct TailSum {
  enum class Kind { Finite, Divergent, NotComputable };
  Kind kind = Kind::NotComputable;
  double value = 0.0;
  double error = 0.0;
  std::string reason;

  bool finite() const { return kind == Kind::Finite; }
  bool divergent() const { return kind == Kind::Divergent; }
  double upper() const { return value + error; }
  double lower() const { return std::max(0.0, value - error); }

  static TailSum make_finite(double v, double e) {
    TailSum s;
    s.kind = Kind::Finite;
    s.value = v;
    s.error = e;
    return s;
  }
  static TailSum make_divergent() {
    TailSum s;
    s.kind = Kind::Divergent;
    s.value = std::numeric_limits<double>::infinity();
    return s;
  }
  static TailSum not_computable(std::string why) {
    TailSum s;
    s.kind = Kind::NotComputable;
    s.reason = std::move(why);
    return s;
  }
};

namespace detail {

inline constexpr double kRelTol = 1e-13;

inline double geo_series(double x) {  // sum_{u>=1} x^u, x in [0,1)
  return x / (1.0 - x);
}
inline double geo_series_u(double x) {  // sum_{u>=1} u x^u
  const double d = 1.0 - x;
  return x / (d * d);
}
inline double geo_series_u2(double x) {  // sum_{u>=1} u^2 x^u
  const double d = 1.0 - x;
  return x * (1.0 + x) / (d * d * d);
}

}  // namespace detail

class SequenceRule {
 public:
  SequenceRule() : rep_(Geometric{1.0, 1.0}) {}
  SequenceRule(Geometric g) : rep_(g) { check(); }
  SequenceRule(Power p) : rep_(p) { check(); }
  SequenceRule(TableRule t) : rep_(std::move(t)) { check(); }

  static SequenceRule geometric(double first, double ratio) {
    return SequenceRule(Geometric{first, ratio});
  }
  static SequenceRule power(double coeff, double exponent) {
    return SequenceRule(Power{coeff, exponent});
  }
  static SequenceRule constant(double c) { return geometric(c, 1.0); }
  static SequenceRule table(std::vector<double> values,
                            std::variant<Geometric, Power> tail) {
    return SequenceRule(TableRule{std::move(values), tail});
  }

  double value(std::int64_t k) const {
    if (k < 0) throw std::invalid_argument("sequence index must be >= 0");
    if (const auto* g = std::get_if<Geometric>(&rep_))
      return g->first * std::pow(g->ratio, static_cast<double>(k));
    if (const auto* p = std::get_if<Power>(&rep_))
      return p->coeff * std::pow(static_cast<double>(k + 1), p->exponent);
    const auto& t = std::get<TableRule>(rep_);
    const auto n = static_cast<std::int64_t>(t.values.size());
    if (k < n) return t.values[static_cast<std::size_t>(k)];
    if (const auto* g = std::get_if<Geometric>(&t.tail))
      return g->first * std::pow(g->ratio, static_cast<double>(k - n));
    const auto& p = std::get<Power>(t.tail);
    return p.coeff * std::pow(static_cast<double>(k - n + 1), p.exponent);
  }

  // Reciprocal sequence 1/value(k); stays in the same rule family.
  SequenceRule inverted() const {
    if (const auto* g = std::get_if<Geometric>(&rep_))
      return geometric(1.0 / g->first, 1.0 / g->ratio);
    if (const auto* p = std::get_if<Power>(&rep_))
      return power(1.0 / p->coeff, -p->exponent);
    const auto& t = std::get<TableRule>(rep_);
    std::vector<double> inv(t.values.size());
    for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / t.values[i];
    if (const auto* g = std::get_if<Geometric>(&t.tail))
      return table(std::move(inv), Geometric{1.0 / g->first, 1.0 / g->ratio});
    const auto& p = std::get<Power>(t.tail);
    return table(std::move(inv), Power{1.0 / p.coeff, -p.exponent});
  }

  // Sequence with the first entry dropped: value'(k) = value(k + 1). Closed
  // for geometric and table rules; a power rule shifts out of the family.
  std::optional<SequenceRule> shifted() const {
    if (const auto* g = std::get_if<Geometric>(&rep_))
      return geometric(g->first * g->ratio, g->ratio);
    if (std::holds_alternative<Power>(rep_)) return std::nullopt;
    const auto& t = std::get<TableRule>(rep_);
    if (t.values.size() == 1) {
      if (const auto* g = std::get_if<Geometric>(&t.tail))
        return geometric(g->first, g->ratio);
      const auto& p = std::get<Power>(t.tail);
      return power(p.coeff, p.exponent);
    }
    return table(std::vector<double>(t.values.begin() + 1, t.values.end()),
                 t.tail);
  }

  bool is_constant() const {
    if (const auto* g = std::get_if<Geometric>(&rep_)) return g->ratio == 1.0;
    if (const auto* p = std::get_if<Power>(&rep_)) return p->exponent == 0.0;
    const auto& t = std::get<TableRule>(rep_);
    double c;
    if (const auto* g = std::get_if<Geometric>(&t.tail)) {
      if (g->ratio != 1.0) return false;
      c = g->first;
    } else {
      const auto& p = std::get<Power>(t.tail);
      if (p.exponent != 0.0) return false;
      c = p.coeff;
    }
    for (double v : t.values)
      if (v != c) return false;
    return true;
  }

  // Offset N and geometric data such that value(N + u) = first * ratio^u
  // exactly for all u >= 0. Empty when the asymptotic part is a genuine power.
  struct GeoTail {
    std::int64_t offset;
    double first;
    double ratio;
  };
  std::optional<GeoTail> geometric_tail() const {
    if (const auto* g = std::get_if<Geometric>(&rep_))
      return GeoTail{0, g->first, g->ratio};
    if (const auto* p = std::get_if<Power>(&rep_)) {
      if (p->exponent == 0.0) return GeoTail{0, p->coeff, 1.0};
      return std::nullopt;
    }
    const auto& t = std::get<TableRule>(rep_);
    const auto n = static_cast<std::int64_t>(t.values.size());
    if (const auto* g = std::get_if<Geometric>(&t.tail))
      return GeoTail{n, g->first, g->ratio};
    const auto& p = std::get<Power>(t.tail);
    if (p.exponent == 0.0) return GeoTail{n, p.coeff, 1.0};
    return std::nullopt;
  }

  // Power data beyond the table prefix: value(k) = coeff * (k - offset + 1)^e
  // for k >= offset.
  struct PowTail {
    std::int64_t offset;
    double coeff;
    double exponent;
  };
  std::optional<PowTail> power_tail() const {
    if (const auto* p = std::get_if<Power>(&rep_))
      return PowTail{0, p->coeff, p->exponent};
    if (const auto* t = std::get_if<TableRule>(&rep_)) {
      if (const auto* p = std::get_if<Power>(&t->tail))
        return PowTail{static_cast<std::int64_t>(t->values.size()), p->coeff,
                       p->exponent};
    }
    return std::nullopt;
  }

  // Certified sum_{k>=k0} value(k).
  TailSum tail_sum(std::int64_t k0) const;

  // Certified sum_{k=a}^{b} value(k); closed form for geometric data,
  // integral bracket for long power ranges.
  TailSum range_sum(std::int64_t a, std::int64_t b) const;

 private:
  void check() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) +
                                    " must be positive and finite");
    };
    if (const auto* g = std::get_if<Geometric>(&rep_)) {
      positive(g->first, "geometric first");
      positive(g->ratio, "geometric ratio");
      return;
    }
    if (const auto* p = std::get_if<Power>(&rep_)) {
      positive(p->coeff, "power coeff");
      if (!std::isfinite(p->exponent))
        throw std::invalid_argument("power exponent must be finite");
      return;
    }
    const auto& t = std::get<TableRule>(rep_);
    for (double v : t.values) positive(v, "table value");
    if (const auto* g = std::get_if<Geometric>(&t.tail)) {
      positive(g->first, "geometric first");
      positive(g->ratio, "geometric ratio");
    } else {
      const auto& p = std::get<Power>(t.tail);
      positive(p.coeff, "power coeff");
      if (!std::isfinite(p.exponent))
        throw std::invalid_argument("power exponent must be finite");
    }
  }

  std::variant<Geometric, Power, TableRule> rep_;
};

namespace detail {

// sum_{k>=k0} first * ratio^k for a pure geometric sequence.
inline TailSum geometric_tail_sum(double first, double ratio,
                                  std::int64_t k0) {
  if (ratio >= 1.0) return TailSum::make_divergent();
  const double head = first * std::pow(ratio, static_cast<double>(k0));
  const double v = head / (1.0 - ratio);
  return TailSum::make_finite(v, 8.0 * std::numeric_limits<double>::epsilon() * v);
}

// sum_{k>=k0} coeff * (k+1)^e via Euler-Maclaurin. The integrand
// h(x) = coeff*(x+1)^e is completely monotone for e < -1, so
// sum_{k>=K} h(k) = int_K^inf h + h(K)/2 - h'(K)/12 + R with |R| <= |h''(K)|/720.
inline TailSum power_tail_sum(double coeff, double e, std::int64_t k0) {
  if (e >= -1.0) return TailSum::make_divergent();
  auto h = [&](double x) { return coeff * std::pow(x + 1.0, e); };
  double partial = 0.0;
  std::int64_t K = k0;
  const std::int64_t kMax = k0 + (1 << 16);
  while (true) {
    const double x = static_cast<double>(K) + 1.0;
    const double integral = coeff * std::pow(x, e + 1.0) / (-1.0 - e);
    const double correction = 0.5 * h(static_cast<double>(K)) -
                              coeff * e * std::pow(x, e - 1.0) / 12.0;
    const double remainder =
        coeff * std::abs(e * (e - 1.0)) * std::pow(x, e - 2.0) / 720.0;
    const double v = partial + integral + correction;
    if (remainder <= kRelTol * v || K >= kMax) {
      return TailSum::make_finite(
          v, remainder + 16.0 * std::numeric_limits<double>::epsilon() * v);
    }
    partial += h(static_cast<double>(K));
    ++K;
  }
}

}  // namespace detail

inline TailSum SequenceRule::tail_sum(std::int64_t k0) const {
  if (k0 < 0) k0 = 0;
  if (auto g = geometric_tail()) {
    double explicit_part = 0.0;
    std::int64_t start = k0;
    if (k0 < g->offset) {
      for (std::int64_t k = k0; k < g->offset; ++k) explicit_part += value(k);
      start = g->offset;
    }
    auto t = detail::geometric_tail_sum(g->first, g->ratio, start - g->offset);
    if (t.divergent()) return t;
    return TailSum::make_finite(explicit_part + t.value,
                                t.error + 8.0 * std::numeric_limits<double>::epsilon() *
                                              (explicit_part + t.value));
  }
  auto p = power_tail();
  double explicit_part = 0.0;
  std::int64_t start = k0;
  if (k0 < p->offset) {
    for (std::int64_t k = k0; k < p->offset; ++k) explicit_part += value(k);
    start = p->offset;
  }
  auto t = detail::power_tail_sum(p->coeff, p->exponent, start - p->offset);
  if (t.divergent()) return t;
  return TailSum::make_finite(explicit_part + t.value,
                              t.error + 16.0 * std::numeric_limits<double>::epsilon() *
                                            (explicit_part + t.value));
}

inline TailSum SequenceRule::range_sum(std::int64_t a, std::int64_t b) const {
  if (a < 0) a = 0;
  if (b < a) return TailSum::make_finite(0.0, 0.0);
  if (b - a <= (1 << 16)) {
    double s = 0.0;
    for (std::int64_t k = a; k <= b; ++k) s += value(k);
    return TailSum::make_finite(
        s, 16.0 * std::numeric_limits<double>::epsilon() * s *
               static_cast<double>(std::max<std::int64_t>(1, b - a)));
  }
  auto whole = tail_sum(a);
  auto beyond = tail_sum(b + 1);
  if (whole.finite() && beyond.finite()) {
    // difference of two certified tails; cancellation is benign because
    // tail(a) >= tail(b+1) and both carry relative-scale errors
    const double v = whole.value - beyond.value;
    return TailSum::make_finite(std::max(0.0, v), whole.error + beyond.error);
  }
  // divergent whole tail over a huge finite range: bracket by integrals for
  // power data, closed form for geometric
  if (auto g = geometric_tail()) {
    std::int64_t start = std::max(a, g->offset);
    double head = 0.0;
    for (std::int64_t k = a; k < start; ++k) head += value(k);
    const double u0 = static_cast<double>(start - g->offset);
    const double u1 = static_cast<double>(b - g->offset);
    double s;
    if (g->ratio == 1.0) {
      s = g->first * (u1 - u0 + 1.0);
    } else {
      s = g->first * (std::pow(g->ratio, u0) - std::pow(g->ratio, u1 + 1.0)) /
          (1.0 - g->ratio);
    }
    return TailSum::make_finite(head + s,
                                32.0 * std::numeric_limits<double>::epsilon() *
                                    (head + std::abs(s)));
  }
  auto p = power_tail();
  std::int64_t start = std::max(a, p->offset);
  double head = 0.0;
  for (std::int64_t k = a; k < start; ++k) head += value(k);
  // sum_{j=j0}^{j1} coeff*(j+1)^e with j shifted to the tail's own index
  const double j0 = static_cast<double>(start - p->offset);
  const double j1 = static_cast<double>(b - p->offset);
  const double e = p->exponent;
  auto F = [&](double x) {  // antiderivative of coeff*(x+1)^e
    if (e == -1.0) return p->coeff * std::log(x + 1.0);
    return p->coeff * std::pow(x + 1.0, e + 1.0) / (e + 1.0);
  };
  const double integral = F(j1) - F(j0);
  const double h0 = p->coeff * std::pow(j0 + 1.0, e);
  const double h1 = p->coeff * std::pow(j1 + 1.0, e);
  // monotone integrand: the sum lies in integral + [min(h0,h1), max(h0,h1)]
  const double v = head + integral + 0.5 * (h0 + h1);
  return TailSum::make_finite(
      std::max(0.0, v), 0.5 * std::abs(h0 - h1) +
                            32.0 * std::numeric_limits<double>::epsilon() *
                                std::abs(v));
}

// ---------------------------------------------------------------------------
// Series built from ray data. Index conventions follow ray specs:
// w.value(0) weights the attach edge, w.value(k) the edge (x_k, x_{k+1});
// m.value(r) is the measure of x_r (index 0 of a measure rule is unused).
// ---------------------------------------------------------------------------

// sum_{k=from}^{r} 1/w(k), explicit accumulation (positive terms).
inline double cumulative_inverse(const SequenceRule& w, std::int64_t r,
                                 std::int64_t from = 1) {
  double s = 0.0;
  for (std::int64_t k = from; k <= r; ++k) s += 1.0 / w.value(k);
  return s;
}

namespace detail {

// sum_{u>=1} (alpha + beta*q^u)^2 * gamma * s^u, exact geometric algebra.
inline TailSum affine_sq_geometric_series(double alpha, double beta, double q,
                                          double gamma, double s) {
  if (gamma == 0.0) return TailSum::make_finite(0.0, 0.0);
  struct Piece {
    double coeff;
    double base;
  };
  const Piece pieces[3] = {{alpha * alpha, s},
                           {2.0 * alpha * beta, q * s},
                           {beta * beta, q * q * s}};
  double total = 0.0;
  double magnitude = 0.0;
  for (const auto& piece : pieces) {
    if (piece.coeff == 0.0) continue;
    if (piece.base >= 1.0) {
      // a term with nonzero coefficient and non-contracting base; the series
      // has nonnegative terms overall, so it diverges
      return TailSum::make_divergent();
    }
    total += piece.coeff * geo_series(piece.base);
    magnitude += std::abs(piece.coeff) * geo_series(piece.base);
  }
  total *= gamma;
  magnitude *= std::abs(gamma);
  return TailSum::make_finite(
      total, 64.0 * std::numeric_limits<double>::epsilon() * magnitude);
}

// sum_{u>=1} (alpha + beta*u)^2 * gamma * s^u  (constant-weight rays).
inline TailSum affine_linear_sq_series(double alpha, double beta, double gamma,
                                       double s) {
  if (gamma == 0.0) return TailSum::make_finite(0.0, 0.0);
  if (s >= 1.0) {
    if (alpha == 0.0 && beta == 0.0) return TailSum::make_finite(0.0, 0.0);
    return TailSum::make_divergent();
  }
  const double total = gamma * (alpha * alpha * geo_series(s) +
                                2.0 * alpha * beta * geo_series_u(s) +
                                beta * beta * geo_series_u2(s));
  const double magnitude = std::abs(gamma) *
                           (alpha * alpha * geo_series(s) +
                            2.0 * std::abs(alpha * beta) * geo_series_u(s) +
                            beta * beta * geo_series_u2(s));
  return TailSum::make_finite(
      total, 64.0 * std::numeric_limits<double>::epsilon() * magnitude);
}

// Supremum over k >= k0 of value(k+1)/value(k), for ratio-dominated
// remainder bounds. Exact for our rule families.
inline double ratio_sup_from(const SequenceRule& rule, std::int64_t k0) {
  if (auto g = rule.geometric_tail()) {
    if (k0 >= g->offset) return g->ratio;
    double sup = g->ratio;
    for (std::int64_t k = k0; k < g->offset; ++k)
      sup = std::max(sup, rule.value(k + 1) / rule.value(k));
    return sup;
  }
  auto p = rule.power_tail();
  // ((j+2)/(j+1))^e is monotone in j with limit 1
  auto tail_ratio = [&](std::int64_t j) {
    return std::pow(static_cast<double>(j + 2) / static_cast<double>(j + 1),
                    p->exponent);
  };
  double sup;
  if (p->exponent >= 0.0) {
    sup = tail_ratio(std::max<std::int64_t>(0, k0 - p->offset));
  } else {
    sup = 1.0;
  }
  for (std::int64_t k = k0; k < p->offset; ++k)
    sup = std::max(sup, rule.value(k + 1) / rule.value(k));
  return sup;
}

}  // namespace detail

// Analytic convergence verdict for sum_{n>=1} T_n^2 * m(n) where
// T_n = sum_{j=0}^{n-1} 1/w(j) is the resistance from the root to x_n,
// decided exactly from the asymptotic class of the two rules.
inline bool imw_finite(const SequenceRule& w, const SequenceRule& m) {
  if (w.inverted().tail_sum(0).finite()) return m.tail_sum(1).finite();
  // cumulative inverse t_r is unbounded
  if (auto wg = w.geometric_tail()) {
    if (wg->ratio < 1.0) {
      // t_r grows like (1/ratio)^r
      if (auto mg = m.geometric_tail())
        return mg->ratio < wg->ratio * wg->ratio;
      return false;  // a power measure cannot beat exponential growth
    }
    // ratio == 1 beyond the prefix (ratio > 1 would bound t), t_r linear
    if (auto mg = m.geometric_tail()) return mg->ratio < 1.0;
    return m.power_tail()->exponent < -3.0;
  }
  // w has a power tail with exponent <= 1, t_r ~ r^{1-e} (log r at e == 1)
  const double ew = w.power_tail()->exponent;
  if (auto mg = m.geometric_tail()) return mg->ratio < 1.0;
  const double em = m.power_tail()->exponent;
  if (ew == 1.0) return em < -1.0;  // log^2 r factor never rescues the boundary
  return 2.0 * (1.0 - ew) + em < -1.0;
}

// Certified value for the same series. Exact for eventually geometric data,
// bracketed for bounded cumulative inverse or geometric measures; the few
// remaining finite combinations report NotComputable (use imw_finite for the
// verdict).
inline TailSum imw_sum(const SequenceRule& w, const SequenceRule& m) {
  if (!imw_finite(w, m)) return TailSum::make_divergent();
  const auto wg = w.geometric_tail();
  const auto mg = m.geometric_tail();

  // exact path: both rules eventually geometric
  if (wg && mg) {
    const std::int64_t R = std::max<std::int64_t>({1, wg->offset, mg->offset});
    double partial = 0.0;
    double t = 0.0;  // T_n, resistance from the root through w(n-1)
    for (std::int64_t n = 1; n <= R; ++n) {
      t += 1.0 / w.value(n - 1);
      partial += t * t * m.value(n);
    }
    // beyond R: 1/w(R+i) = c*q^i with c = 1/w(R), m(R+u) = gamma*s^u
    const double q = 1.0 / wg->ratio;
    const double c = 1.0 / w.value(R);
    const double gamma = m.value(R);
    const double s = mg->ratio;
    TailSum tail;
    if (q == 1.0) {
      // T_{R+u} = T_R + c*u
      tail = detail::affine_linear_sq_series(t, c, gamma, s);
    } else {
      // T_{R+u} = (T_R + c/(1-q)) - (c/(1-q))*q^u
      const double a = t + c / (1.0 - q);
      const double b = -c / (1.0 - q);
      tail = detail::affine_sq_geometric_series(a, b, q, gamma, s);
    }
    if (tail.divergent()) return tail;
    return TailSum::make_finite(partial + tail.value,
                                tail.error +
                                    64.0 * std::numeric_limits<double>::epsilon() *
                                        (partial + tail.value));
  }

  const auto inv_w_tail = w.inverted().tail_sum(0);
  if (inv_w_tail.finite()) {
    // T_n increases to a finite limit; remainder after N is bracketed by
    // [T_{N+1}^2, T_inf^2] times the certified measure tail
    const double t_inf = inv_w_tail.upper();
    double partial = 0.0;
    double t = 0.0;
    std::int64_t n = 0;
    while (true) {
      ++n;
      t += 1.0 / w.value(n - 1);
      partial += t * t * m.value(n);
      if (n < 8 || (n & 63) != 0) {
        if (n <= (1 << 20)) continue;
      }
      const auto mt = m.tail_sum(n + 1);
      const double t_next = t + 1.0 / w.value(n);
      const double hi = t_inf * t_inf * mt.upper();
      const double lo = t_next * t_next * mt.lower();
      const double mid = 0.5 * (hi + lo);
      const double half = 0.5 * (hi - lo);
      if (half <= detail::kRelTol * (partial + mid) || n > (1 << 20)) {
        return TailSum::make_finite(
            partial + mid,
            half + 64.0 * std::numeric_limits<double>::epsilon() * (partial + mid));
      }
    }
  }

  if (mg) {
    // T unbounded, w nondecreasing beyond its prefix (constant geometric tail
    // or power exponent >= 0), geometric measure: ratio-dominated remainder
    const bool w_monotone_up =
        (wg && wg->ratio >= 1.0) ||
        (!wg && w.power_tail()->exponent >= 0.0);
    if (w_monotone_up) {
      const std::int64_t offsets = std::max<std::int64_t>(
          {2, wg ? wg->offset : w.power_tail()->offset, mg->offset});
      double partial = 0.0;
      double t = 0.0;
      std::int64_t n = 0;
      while (true) {
        ++n;
        t += 1.0 / w.value(n - 1);
        partial += t * t * m.value(n);
        if (n < offsets + 8) continue;
        const double m_ratio = detail::ratio_sup_from(m, n + 1);
        const double inv_next = 1.0 / w.value(n);  // sup of 1/w beyond n-1
        const double tr = 1.0 + inv_next / t;
        const double rho = tr * tr * m_ratio;
        if (rho < 1.0) {
          const double next = (t + inv_next) * (t + inv_next) * m.value(n + 1);
          const double rem = next / (1.0 - rho);
          if (rem <= detail::kRelTol * partial || n > (1 << 20)) {
            return TailSum::make_finite(
                partial + 0.5 * rem,
                0.5 * rem +
                    64.0 * std::numeric_limits<double>::epsilon() * partial);
          }
        } else if (n > (1 << 20)) {
          break;
        }
      }
    }
  }

  return TailSum::not_computable(
      "series is finite by comparison but no certified bracket is available "
      "for this rule combination");
}

// sum_{r>=r0} v_r^2 * m(r) where v_{r+1} = v_r - current / w(r).
// This is the closed-form tail of a harmonic function on a ray carrying a
// constant current (unit-flow structure); v_{r0} anchors the values.
inline TailSum ray_l2_tail(const SequenceRule& w, const SequenceRule& m,
                           double v_r0, double current, std::int64_t r0) {
  if (r0 < 1) throw std::invalid_argument("ray l2 tail starts at index >= 1");
  const auto m_tail = m.tail_sum(r0);
  if (current == 0.0) {
    if (v_r0 == 0.0) return TailSum::make_finite(0.0, 0.0);
    if (m_tail.divergent()) return TailSum::make_divergent();
    return TailSum::make_finite(v_r0 * v_r0 * m_tail.value,
                                v_r0 * v_r0 * m_tail.error +
                                    8.0 * std::numeric_limits<double>::epsilon() *
                                        v_r0 * v_r0 * m_tail.value);
  }
  const auto S = w.inverted().tail_sum(r0);  // remaining resistance from x_{r0}
  if (S.divergent())
    return TailSum::not_computable(
        "nonzero current along a ray with divergent resistance has no "
        "bounded harmonic profile");
  const double v_inf = v_r0 - current * S.value;

  const auto wg = w.geometric_tail();
  const auto mg = m.geometric_tail();
  if (wg && mg && wg->ratio > 1.0) {
    // v_{r0+u} = v_inf + current * S_{r0+u}, S with pure geometric decay q^u
    const std::int64_t R = std::max<std::int64_t>(
        {r0, wg->offset, mg->offset});
    double partial = 0.0;
    double v = v_r0;
    for (std::int64_t r = r0; r <= R; ++r) {
      partial += v * v * m.value(r);
      v -= current / w.value(r);
    }
    const double q = 1.0 / wg->ratio;
    const auto S_R1 = w.inverted().tail_sum(R + 1);
    // S_{R+u} = S_{R+1} * q^(u-1) for u >= 1
    const double alpha = v_inf;
    const double beta = current * S_R1.value / q;
    const double gamma = m.value(R + 1) / mg->ratio;
    const double s = mg->ratio;
    if (s >= 1.0 && alpha != 0.0) {
      // against a non-summable measure tail only an exactly-zero limit value
      // can keep the sum finite; a value below its own uncertainty cannot be
      // certified either way
      const double noise =
          std::numeric_limits<double>::epsilon() *
              (std::abs(v_r0) + std::abs(current) * S.value) +
          std::abs(current) * S.error;
      if (std::abs(alpha) <= noise)
        return TailSum::not_computable(
            "limit value indistinguishable from zero against a non-summable "
            "measure tail");
      return TailSum::make_divergent();
    }
    const auto tail =
        detail::affine_sq_geometric_series(alpha, beta, q, gamma, s);
    if (!tail.finite()) return tail;
    // the limit value carries the resistance-tail error; its amplification
    // through the squared terms is bounded by the first-order derivative sum
    double sensitivity;
    if (m_tail.finite()) {
      sensitivity = 2.0 * std::abs(current) * S.error *
                    (std::abs(alpha) + std::abs(beta) + 1.0) * m_tail.upper();
    } else {
      // alpha is exactly zero here; only the decaying component carries the
      // resistance-tail uncertainty, scaling the sum by (1 + dbeta/beta)^2
      const double dbeta = std::abs(current) * S_R1.error / q;
      sensitivity = beta == 0.0
                        ? 0.0
                        : 3.0 * (dbeta / std::abs(beta)) * std::abs(tail.value);
    }
    return TailSum::make_finite(
        partial + tail.value,
        tail.error + sensitivity +
            64.0 * std::numeric_limits<double>::epsilon() *
                (partial + std::abs(tail.value)));
  }

  // generic monotone bracket: |v_r| lies between |v_inf| and max endpoint
  if (m_tail.divergent()) {
    const double noise = std::numeric_limits<double>::epsilon() *
                             (std::abs(v_r0) + std::abs(current) * S.value) +
                         std::abs(current) * S.error;
    if (std::abs(v_inf) > noise) return TailSum::make_divergent();
    return TailSum::not_computable(
        "values decay to zero against an infinite measure tail; no certified "
        "bracket for this rule combination");
  }
  const double hi = std::max(std::abs(v_r0), std::abs(v_inf));
  const double lo = (v_r0 < 0.0) != (v_inf < 0.0)
                        ? 0.0
                        : std::min(std::abs(v_r0), std::abs(v_inf));
  const double upper = hi * hi * m_tail.upper();
  const double lower = lo * lo * m_tail.lower();
  return TailSum::make_finite(0.5 * (upper + lower), 0.5 * (upper - lower) +
                                                         8.0 * std::numeric_limits<double>::epsilon() *
                                                             upper);
}

}  // namespace netpot
