#pragma once

// Exact symbolic algebra for expansions in L = log m and w = log log m.
//
//   WPolynomial   polynomial in w with rational coefficients
//   AsymSeries    sum_j c_j(w) / L^j, j may be negative (positive powers of L)
//   MTermSeries   sum_{a,j} c_{a,j}(w) / (m^a L^j)
//
// The m -> m+1 forward difference is computed by Taylor expansion in m using
// dL/dm = 1/m and dw/dm = 1/(m L); every result is truncated to the series'
// declared order, never rounded.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace nrl {

using Rational = boost::multiprecision::cpp_rational;
using Numeric = boost::multiprecision::cpp_dec_float_50;

inline std::string to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  return den == 1 ? num.str() : num.str() + "/" + den.str();
}

class WPolynomial {
 public:
  WPolynomial() = default;
  WPolynomial(std::initializer_list<Rational> coeffs) : c_(coeffs) { normalize(); }
  explicit WPolynomial(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { normalize(); }
  WPolynomial(int constant) : c_{Rational(constant)} { normalize(); }  // NOLINT: implicit on purpose
  WPolynomial(const Rational& constant) : c_{constant} { normalize(); }  // NOLINT

  static WPolynomial w() { return WPolynomial{0, 1}; }

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1; }
  const std::vector<Rational>& coeffs() const { return c_; }
  Rational coeff(int i) const { return i >= 0 && i < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(i)] : Rational(0); }
  Rational leading() const { return c_.empty() ? Rational(0) : c_.back(); }

  /// d/dw
  WPolynomial derivative() const {
    std::vector<Rational> d;
    for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<int>(i));
    return WPolynomial(std::move(d));
  }

  template <typename T>
  T eval(const T& w) const {
    T acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * w + to_numeric<T>(*it);
    return acc;
  }

  friend WPolynomial operator+(const WPolynomial& a, const WPolynomial& b) {
    std::vector<Rational> r(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
    return WPolynomial(std::move(r));
  }
  friend WPolynomial operator-(const WPolynomial& a) {
    auto r = a;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  friend WPolynomial operator-(const WPolynomial& a, const WPolynomial& b) { return a + (-b); }
  friend WPolynomial operator*(const WPolynomial& a, const WPolynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return WPolynomial(std::move(r));
  }
  WPolynomial& operator+=(const WPolynomial& o) { return *this = *this + o; }
  WPolynomial& operator-=(const WPolynomial& o) { return *this = *this - o; }
  WPolynomial& operator*=(const WPolynomial& o) { return *this = *this * o; }
  friend bool operator==(const WPolynomial& a, const WPolynomial& b) { return a.c_ == b.c_; }

  /// Human-readable form, highest power first, e.g. "w^2 - 3*w + 3".
  std::string str() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
      Rational a = c_[static_cast<std::size_t>(i)];
      if (a == 0) continue;
      const bool neg = a < 0;
      if (neg) a = -a;
      os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
      first = false;
      if (i == 0) {
        os << to_string(a);
      } else {
        if (a != 1) os << to_string(a) << "*";
        os << "w";
        if (i > 1) os << "^" << i;
      }
    }
    return os.str();
  }

  template <typename T>
  static T to_numeric(const Rational& r) {
    return T(boost::multiprecision::numerator(r).str()) / T(boost::multiprecision::denominator(r).str());
  }

 private:
  void normalize() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

template <>
inline double WPolynomial::to_numeric<double>(const Rational& r) {
  return r.convert_to<double>();
}
template <>
inline long double WPolynomial::to_numeric<long double>(const Rational& r) {
  return r.convert_to<long double>();
}

/// Sign of a polynomial as w -> +infinity, and over all real w when decidable.
struct SignAnalysis {
  /// +1, -1, or 0 for the zero polynomial.
  int sign_at_infinity = 0;
  /// Set when the polynomial has one sign for every real w (degree <= 2 only).
  std::optional<int> sign_everywhere;
  std::string str() const {
    std::string s = sign_at_infinity > 0 ? "positive" : sign_at_infinity < 0 ? "negative" : "identically zero";
    s += " for large w";
    if (sign_everywhere) s += *sign_everywhere < 0 ? "; negative for every real w" : *sign_everywhere > 0 ? "; positive for every real w" : "";
    else if (sign_at_infinity != 0) s += "; changes sign or undetermined on the real line";
    return s;
  }
};

inline SignAnalysis analyze_sign(const WPolynomial& p) {
  SignAnalysis s;
  if (p.is_zero()) {
    s.sign_everywhere = 0;
    return s;
  }
  s.sign_at_infinity = p.leading() > 0 ? 1 : -1;
  if (p.degree() == 0) {
    s.sign_everywhere = s.sign_at_infinity;
  } else if (p.degree() == 2) {
    const Rational disc = p.coeff(1) * p.coeff(1) - 4 * p.coeff(2) * p.coeff(0);
    if (disc < 0) s.sign_everywhere = s.sign_at_infinity;
  }
  return s;
}

/// The unique polynomial F with k F - F' = p (k >= 1), by back-substitution
/// from the top degree: F_d = p_d / k, F_i = (p_i + (i+1) F_{i+1}) / k.
inline WPolynomial solve_kf_ode(int k, const WPolynomial& p) {
  if (k < 1) throw InvalidRange("solve_kf_ode: k must be >= 1");
  if (p.is_zero()) return {};
  const int d = p.degree();
  std::vector<Rational> f(static_cast<std::size_t>(d) + 1);
  for (int i = d; i >= 0; --i) {
    Rational next = i < d ? f[static_cast<std::size_t>(i) + 1] * (i + 1) : Rational(0);
    f[static_cast<std::size_t>(i)] = (p.coeff(i) + next) / k;
  }
  return WPolynomial(std::move(f));
}

inline WPolynomial wpoly_derivative(const WPolynomial& p) { return p.derivative(); }

/// sum_j c_j(w) / L^j, keeping only j < truncation.
class AsymSeries {
 public:
  explicit AsymSeries(int truncation = 4) : trunc_(truncation) {}

  static AsymSeries log_m(int truncation = 4) { return AsymSeries(truncation).set(-1, 1); }
  static AsymSeries constant(const WPolynomial& c, int truncation = 4) { return AsymSeries(truncation).set(0, c); }

  AsymSeries& set(int j, const WPolynomial& c) {
    if (j < trunc_) {
      if (c.is_zero())
        terms_.erase(j);
      else
        terms_[j] = c;
    }
    return *this;
  }
  AsymSeries& add(int j, const WPolynomial& c) { return set(j, coefficient(j) + c); }

  WPolynomial coefficient(int j) const {
    auto it = terms_.find(j);
    return it == terms_.end() ? WPolynomial{} : it->second;
  }
  const std::map<int, WPolynomial>& terms() const { return terms_; }
  int truncation() const { return trunc_; }
  bool is_zero() const { return terms_.empty(); }
  std::optional<int> lowest_power() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.begin()->first;
  }

  AsymSeries truncated(int truncation) const {
    AsymSeries r(truncation);
    for (const auto& [j, c] : terms_) r.set(j, c);
    return r;
  }

  friend AsymSeries operator+(const AsymSeries& a, const AsymSeries& b) {
    AsymSeries r(std::min(a.trunc_, b.trunc_));
    for (const auto& [j, c] : a.terms_) r.add(j, c);
    for (const auto& [j, c] : b.terms_) r.add(j, c);
    return r;
  }
  friend AsymSeries operator-(const AsymSeries& a) {
    AsymSeries r(a.trunc_);
    for (const auto& [j, c] : a.terms_) r.set(j, -c);
    return r;
  }
  friend AsymSeries operator-(const AsymSeries& a, const AsymSeries& b) { return a + (-b); }
  friend AsymSeries operator*(const AsymSeries& a, const AsymSeries& b) {
    // Absolute truncation is only sound when both factors start at j >= 0
    // or the caller has budgeted for the negative powers.
    AsymSeries r(std::min(a.trunc_, b.trunc_));
    for (const auto& [i, x] : a.terms_)
      for (const auto& [j, y] : b.terms_) r.add(i + j, x * y);
    return r;
  }
  friend AsymSeries operator*(const WPolynomial& k, const AsymSeries& a) { return AsymSeries::constant(k, a.trunc_) * a; }
  friend bool operator==(const AsymSeries& a, const AsymSeries& b) { return a.terms_ == b.terms_; }

  /// Multiplies by L^{-shift}.
  AsymSeries shifted(int shift) const {
    AsymSeries r(trunc_);
    for (const auto& [j, c] : terms_) r.set(j + shift, c);
    return r;
  }

  /// Inverse of a series whose lowest term is a non-zero rational constant
  /// c L^{-j0}: returns L^{j0} / c * (1 + rest)^{-1}, truncated at `truncation`.
  AsymSeries reciprocal(int truncation) const {
    const auto j0 = lowest_power();
    if (!j0) throw std::domain_error("AsymSeries::reciprocal of zero series");
    const WPolynomial lead = coefficient(*j0);
    if (!lead.is_constant()) throw std::domain_error("AsymSeries::reciprocal needs a constant leading coefficient");
    const Rational c = lead.coeff(0);
    // u = (this / (c L^{-j0})) - 1 has only powers >= 1.
    AsymSeries u(truncation + *j0);
    for (const auto& [j, x] : terms_)
      if (j != *j0) u.set(j - *j0, x * WPolynomial(Rational(1) / c));
    // (1 + u)^{-1} = sum (-u)^n; powers of u rise by >= 1 each step.
    AsymSeries acc = AsymSeries::constant(1, truncation + *j0);
    AsymSeries power = acc;
    for (int n = 1; n < truncation + *j0 + 1; ++n) {
      power = power * (-u);
      if (power.is_zero()) break;
      acc = acc + power;
    }
    AsymSeries r(truncation);
    for (const auto& [j, x] : acc.terms_) r.set(j - *j0, x * WPolynomial(Rational(1) / c));
    return r;
  }

  template <typename T>
  T eval(const T& L) const {
    using std::log;
    const T w = log(L);
    T acc = 0;
    for (const auto& [j, c] : terms_) acc += c.eval(w) * pow_int(L, -j);
    return acc;
  }

  std::string str(const char* var = "L") const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [j, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << c.str() << ")";
      if (j > 0) os << "/" << var << (j > 1 ? "^" + std::to_string(j) : "");
      if (j < 0) os << "*" << var << (j < -1 ? "^" + std::to_string(-j) : "");
    }
    return os.str();
  }

  template <typename T>
  static T pow_int(const T& x, int e) {
    T r = 1;
    const T b = e >= 0 ? x : T(1) / x;
    for (int i = 0; i < (e >= 0 ? e : -e); ++i) r *= b;
    return r;
  }

 private:
  int trunc_;
  std::map<int, WPolynomial> terms_;
};

/// log(1 + u) for a series u with only powers j >= 1.
inline AsymSeries log1p_series(const AsymSeries& u) {
  if (u.lowest_power() && *u.lowest_power() < 1) throw std::domain_error("log1p_series: u must be O(1/L)");
  AsymSeries acc(u.truncation());
  AsymSeries power = AsymSeries::constant(1, u.truncation());
  for (int n = 1; n < u.truncation() + 1; ++n) {
    power = power * u;
    if (power.is_zero()) break;
    const Rational s = Rational(n % 2 ? 1 : -1) / n;
    acc = acc + WPolynomial(s) * power;
  }
  return acc;
}

/// log s for s = L^{-j0} (1 + u) with unit leading coefficient: -j0 * w + log(1 + u).
inline AsymSeries log_series(const AsymSeries& s) {
  const auto j0 = s.lowest_power();
  if (!j0 || s.coefficient(*j0) != WPolynomial(1))
    throw std::domain_error("log_series: leading coefficient must be exactly 1");
  AsymSeries u(s.truncation() - *j0);
  for (const auto& [j, c] : s.terms())
    if (j != *j0) u.set(j - *j0, c);
  AsymSeries r = log1p_series(u).truncated(s.truncation());
  r.add(0, WPolynomial(-*j0) * WPolynomial::w());
  return r;
}

struct Truncation {
  /// Keep powers of 1/m strictly below this.
  int a_max = 2;
  /// Keep powers of 1/L strictly below this.
  int j_max = 4;
};

/// sum_{a,j} c_{a,j}(w) / (m^a L^j).
class MTermSeries {
 public:
  using Key = std::pair<int, int>;

  explicit MTermSeries(Truncation t = {}) : t_(t) {}

  MTermSeries& set(int a, int j, const WPolynomial& c) {
    if (a < t_.a_max && j < t_.j_max) {
      if (c.is_zero())
        terms_.erase({a, j});
      else
        terms_[{a, j}] = c;
    }
    return *this;
  }
  MTermSeries& add(int a, int j, const WPolynomial& c) { return set(a, j, coefficient(a, j) + c); }

  WPolynomial coefficient(int a, int j) const {
    auto it = terms_.find({a, j});
    return it == terms_.end() ? WPolynomial{} : it->second;
  }
  const std::map<Key, WPolynomial>& terms() const { return terms_; }
  const Truncation& truncation() const { return t_; }
  bool is_zero() const { return terms_.empty(); }

  /// Embeds an AsymSeries at power a of 1/m.
  static MTermSeries from(const AsymSeries& s, int a, Truncation t = {}) {
    MTermSeries r(t);
    for (const auto& [j, c] : s.terms()) r.add(a, j, c);
    return r;
  }

  /// The 1/m^a slice as an AsymSeries in 1/L.
  AsymSeries slice(int a) const {
    AsymSeries r(t_.j_max);
    for (const auto& [k, c] : terms_)
      if (k.first == a) r.set(k.second, c);
    return r;
  }

  friend MTermSeries operator+(const MTermSeries& x, const MTermSeries& y) {
    MTermSeries r(Truncation{std::min(x.t_.a_max, y.t_.a_max), std::min(x.t_.j_max, y.t_.j_max)});
    for (const auto& [k, c] : x.terms_) r.add(k.first, k.second, c);
    for (const auto& [k, c] : y.terms_) r.add(k.first, k.second, c);
    return r;
  }
  friend MTermSeries operator-(const MTermSeries& x) {
    MTermSeries r(x.t_);
    for (const auto& [k, c] : x.terms_) r.set(k.first, k.second, -c);
    return r;
  }
  friend MTermSeries operator-(const MTermSeries& x, const MTermSeries& y) { return x + (-y); }
  friend MTermSeries operator*(const MTermSeries& x, const AsymSeries& s) {
    MTermSeries r(x.t_);
    for (const auto& [k, c] : x.terms_)
      for (const auto& [j, d] : s.terms()) r.add(k.first, k.second + j, c * d);
    return r;
  }
  friend MTermSeries operator*(const AsymSeries& s, const MTermSeries& x) { return x * s; }
  friend MTermSeries operator*(const WPolynomial& k, const MTermSeries& x) {
    MTermSeries r(x.t_);
    for (const auto& [key, c] : x.terms_) r.set(key.first, key.second, k * c);
    return r;
  }
  friend bool operator==(const MTermSeries& x, const MTermSeries& y) { return x.terms_ == y.terms_; }

  /// d/dm, using dL/dm = 1/m and dw/dm = 1/(m L):
  /// d[c m^-a L^-j] = m^-(a+1) [ (c' - j c) L^-(j+1) - a c L^-j ].
  MTermSeries derivative() const {
    MTermSeries r(t_);
    for (const auto& [k, c] : terms_) {
      const auto [a, j] = k;
      r.add(a + 1, j + 1, c.derivative() - WPolynomial(j) * c);
      if (a != 0) r.add(a + 1, j, WPolynomial(-a) * c);
    }
    return r;
  }

  /// f(m+1) - f(m) = sum_{n>=1} f^(n)(m) / n!, truncated.
  MTermSeries forward_difference() const {
    MTermSeries acc(t_);
    MTermSeries d = *this;
    Rational fact = 1;
    for (int n = 1; n <= t_.a_max; ++n) {
      d = d.derivative();
      fact *= n;
      if (d.is_zero()) break;
      acc = acc + WPolynomial(Rational(1) / fact) * d;
    }
    return acc;
  }

  template <typename T>
  T eval(const T& m) const {
    using std::log;
    const T L = log(m);
    const T w = log(L);
    T acc = 0;
    for (const auto& [k, c] : terms_) acc += c.eval(w) * AsymSeries::pow_int(m, -k.first) * AsymSeries::pow_int(L, -k.second);
    return acc;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << c.str() << ")";
      std::string den;
      if (k.first > 0) den += "m" + (k.first > 1 ? "^" + std::to_string(k.first) : std::string());
      if (k.second > 0) den += (den.empty() ? "" : " ") + std::string("L") + (k.second > 1 ? "^" + std::to_string(k.second) : "");
      if (!den.empty()) os << "/(" << den << ")";
      if (k.second < 0) os << "*L" << (k.second < -1 ? "^" + std::to_string(-k.second) : "");
    }
    return os.str();
  }

 private:
  Truncation t_;
  std::map<Key, WPolynomial> terms_;
};

/// f(m+1) - f(m) for an m-free series f (a = 0 terms only).
inline MTermSeries forward_difference(const AsymSeries& s, Truncation t = {}) {
  return MTermSeries::from(s, 0, Truncation{t.a_max, std::max(t.j_max, s.truncation() + 1)}).forward_difference();
}

// ---------------------------------------------------------------------------
// Shift identities

/// Which version of a contested identity to produce.
enum class Track {
  /// The identity exactly as stated.
  DISPLAYED,
  /// What the stated proof steps produce when carried out literally.
  PROOF,
  /// Exact recomputation by this module.
  CONSISTENT,
};

inline const char* to_string(Track t) {
  switch (t) {
    case Track::DISPLAYED: return "displayed";
    case Track::PROOF: return "proof";
    case Track::CONSISTENT: return "consistent";
  }
  return "?";
}

/// log(m+1) - log m = 1/m  (mod 1/m^2).
inline MTermSeries log_shift(Truncation t = {}) { return forward_difference(AsymSeries::log_m(t.j_max), t); }

/// log log(m+1) - log log m = 1/(m L)  (mod declared truncation).
inline MTermSeries loglog_shift(Truncation t = {}) {
  return forward_difference(AsymSeries::constant(WPolynomial::w(), t.j_max), t);
}

/// C_m / L^k - C_{m+1} / L(m+1)^k = (k C - C') / (m L^{k+1})  (mod 1/m^2).
inline MTermSeries shift_difference(const WPolynomial& c, int k, Truncation t = {}) {
  if (k < 1) throw InvalidRange("shift_difference: k must be >= 1");
  t.j_max = std::max(t.j_max, k + 2);
  AsymSeries s(t.j_max);
  s.set(k, c);
  return -forward_difference(s, t);
}

/// Coefficients of p_m = m f(m), f(m) = L + P0 + P1/L + ...
struct PmCoefficients {
  WPolynomial p0 = WPolynomial{-1, 1};  // w - 1
  WPolynomial p1 = WPolynomial{-2, 1};  // w - 2
};

/// f(m) = L + sum_{i <= j_max} P_i / L^i as an AsymSeries (the leading L is the
/// j = -1 term). Only P0 and P1 are known, so j_max <= 1.
inline AsymSeries pm_expansion(int j_max, const PmCoefficients& pc = {}) {
  if (j_max < 0) throw InvalidRange("pm_expansion: j_max must be >= 0");
  if (j_max > 1) throw UnsupportedOrder("pm_expansion: only P0 and P1 are known (j_max <= 1)");
  AsymSeries f(j_max + 1);
  f.set(-1, 1).set(0, pc.p0);
  if (j_max >= 1) f.set(1, pc.p1);
  return f;
}

/// 1/p_m = (1/m) (1/f(m)) through 1/(m L^3).
inline MTermSeries reciprocal_pm(const PmCoefficients& pc = {}, Truncation t = {}) {
  const AsymSeries inv_f = pm_expansion(1, pc).truncated(t.j_max).reciprocal(t.j_max);
  return MTermSeries::from(inv_f, 1, t);
}

/// 1/p_m - 1/p_{m+1}: of order 1/(m^2 L^2), hence empty at working precision.
inline MTermSeries reciprocal_pm_shift(const PmCoefficients& pc = {}, Truncation t = {}) {
  return -reciprocal_pm(pc, t).forward_difference();
}

/// log p_m = L + w + log(1 + P0/L + P1/L^2) as an AsymSeries truncated at `truncation`.
inline AsymSeries log_pm(int truncation, const PmCoefficients& pc = {}) {
  return AsymSeries::log_m(truncation) + log_series(pm_expansion(1, pc).truncated(truncation));
}

/// log log p_m = w + log(1 + (log p_m - L) / L).
inline AsymSeries loglog_pm(int truncation, const PmCoefficients& pc = {}) {
  return log_series(log_pm(truncation, pc));
}

/// 1/log p_m. The stated form (1/L)(1 - w/L) is the truncation at 1/L^3.
inline AsymSeries inv_log_pm(int truncation = 3, const PmCoefficients& pc = {}) {
  return log_pm(truncation + 1, pc).reciprocal(truncation);
}

/// log p_{m+1} - log p_m.
///   DISPLAYED / PROOF: (1/m)(1 + 1/L) - (P0' - P0)/(m L^2)
///   CONSISTENT: exact forward difference of log p_m.
inline MTermSeries log_pm_shift(Track track, const PmCoefficients& pc = {}, Truncation t = {}) {
  if (track == Track::CONSISTENT) return forward_difference(log_pm(t.j_max - 1, pc), t);
  MTermSeries r(t);
  r.add(1, 0, 1).add(1, 1, 1).add(1, 2, -(pc.p0.derivative() - pc.p0));
  return r;
}

/// log log p_{m+1} - log log p_m.
///   DISPLAYED: (1/(mL))(1 + 1/L) + (P0' - P0)/(m L^3) - (w/(m L^2))(1 + 1/L)
///   PROOF:     (1/log p_m) * (log p_{m+1} - log p_m), using the stated forms of
///              both factors; multiplied out here rather than copied.
///   CONSISTENT: exact forward difference of log log p_m.
inline MTermSeries loglog_pm_shift(Track track, const PmCoefficients& pc = {}, Truncation t = {}) {
  switch (track) {
    case Track::DISPLAYED: {
      const WPolynomial w = WPolynomial::w();
      MTermSeries r(t);
      r.add(1, 1, 1).add(1, 2, 1).add(1, 3, pc.p0.derivative() - pc.p0);
      r.add(1, 2, -w).add(1, 3, -w);
      return r;
    }
    case Track::PROOF:
      return inv_log_pm(3, pc).truncated(t.j_max) * log_pm_shift(Track::DISPLAYED, pc, t);
    case Track::CONSISTENT:
      return forward_difference(loglog_pm(t.j_max - 1, pc), t);
  }
  return MTermSeries(t);
}

/// Smooth model p(m) = m f(m) with f = L + P0 + P1/L, evaluated numerically.
template <typename T>
T pm_model(const T& m, const PmCoefficients& pc = {}) {
  using std::log;
  const T L = log(m);
  return m * pm_expansion(1, pc).eval(L);
}

}  // namespace nrl
