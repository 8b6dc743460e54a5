#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gnnlogic/error.hpp"
#include "gnnlogic/graph.hpp"

namespace gnnlogic {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using u128 = unsigned __int128;
using i128 = __int128;

// ((p, n, beta), +, *): values +-0.d1..dp * beta^e with e in [-n, n].
struct FloatSystem {
  int p = 1;
  int n = 0;
  int beta = 2;
  bool fast_ = true;

  FloatSystem() = default;
  FloatSystem(int p_, int n_, int beta_) : p(p_), n(n_), beta(beta_) {
    if (p < 1) throw invalid_error("float system needs p >= 1");
    if (n < 0) throw invalid_error("float system needs n >= 0");
    if (beta < 2) throw invalid_error("float system needs beta >= 2");
    if (p > 60 || n > 60 || beta > 1'000'000) throw guard_error("float system parameters too large");
    fast_ = double(3 * n + 2 * p + 1) * std::log2(double(beta)) < 124.0;
  }

  friend bool operator==(const FloatSystem&, const FloatSystem&) = default;

  std::string spec() const {
    return "p=" + std::to_string(p) + ",n=" + std::to_string(n) + ",beta=" + std::to_string(beta);
  }

  static FloatSystem parse(const std::string& text) {
    int p = -1, n = -1, b = -1;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t comma = text.find(',', pos);
      std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      std::size_t eq = item.find('=');
      if (eq == std::string::npos) throw parse_error("bad float system spec '" + text + "'");
      std::string key = item.substr(0, eq);
      int value = 0;
      try {
        std::size_t used = 0;
        value = std::stoi(item.substr(eq + 1), &used);
        if (used != item.size() - eq - 1) throw parse_error("");
      } catch (...) {
        throw parse_error("bad float system spec '" + text + "'");
      }
      if (key == "p") p = value;
      else if (key == "n") n = value;
      else if (key == "beta" || key == "b") b = value;
      else throw parse_error("unknown key '" + key + "' in float system spec");
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (p < 0 || n < 0 || b < 0) throw parse_error("float system spec needs p, n and beta");
    try {
      return FloatSystem(p, n, b);
    } catch (const Error& e) {
      throw parse_error(e.what());
    }
  }

  // beta^(3n+2p+1) fits comfortably in 128 bits: add/mul stay in machine integers.
  bool fast() const { return fast_; }

  std::uint64_t beta_pow_p() const {
    u128 r = 1;
    for (int i = 0; i < p; ++i) {
      r *= u128(beta);
      if (r > u128(1) << 62) throw guard_error("beta^p exceeds 2^62");
    }
    return std::uint64_t(r);
  }
};

// Canonical element of D_S. Zero is (neg=false, mant=0, exp=-n).
// Value = (-1)^neg * mant * beta^(exp - p).
struct Float {
  FloatSystem sys;
  bool neg = false;
  std::uint64_t mant = 0;
  int exp = 0;

  bool is_zero() const { return mant == 0; }

  friend bool operator==(const Float& a, const Float& b) {
    return a.sys == b.sys && a.neg == b.neg && a.mant == b.mant && a.exp == b.exp;
  }

  std::vector<int> digits() const {
    std::vector<int> d(sys.p, 0);
    std::uint64_t m = mant;
    for (int i = sys.p - 1; i >= 0; --i) {
      d[i] = int(m % std::uint64_t(sys.beta));
      m /= std::uint64_t(sys.beta);
    }
    return d;
  }
};

namespace detail {

template <class Int>
Int ipow(Int b, int e) {
  Int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

inline void require_same(const Float& a, const Float& b) {
  if (!(a.sys == b.sys)) throw invalid_error("operands from different float systems");
}

inline Float zero_of(const FloatSystem& s) { return Float{s, false, 0, -s.n}; }

inline Float max_of(const FloatSystem& s, bool neg) {
  return Float{s, neg, s.beta_pow_p() - 1, s.n};
}

// Picks the rounded mantissa at exponent e given floor q, and whether the
// remainder is below, at or above one half ulp (cmp = -1, 0, 1).
inline Float finish_round(const FloatSystem& s, bool neg, std::uint64_t q, int e, int cmp) {
  const std::uint64_t top = s.beta_pow_p();
  const std::uint64_t B = std::uint64_t(s.beta);
  bool up = false;
  if (cmp > 0) {
    up = true;
  } else if (cmp == 0) {
    bool hi_overflow = (q + 1 == top) && e == s.n;
    if (hi_overflow) {
      up = false;
    } else {
      std::uint64_t hi_digit = (q + 1 == top) ? (top / B) % B : (q + 1) % B;
      bool lo_even = (q % B) % 2 == 0;
      bool hi_even = hi_digit % 2 == 0;
      if (lo_even != hi_even) up = hi_even;
      else up = (q % 2) != 0;  // undecided by digits: even significand at exponent e
    }
  }
  std::uint64_t m = q + (up ? 1 : 0);
  if (m == top) {
    if (e == s.n) return max_of(s, neg);
    m = top / B;
    e += 1;
  }
  if (m == 0) return zero_of(s);
  return Float{s, neg, m, e};
}

// Rounds neg * N * beta^(-K) with K >= n + p, using 128-bit integers.
inline Float round_scaled_fast(const FloatSystem& s, bool neg, u128 N, int K) {
  if (N == 0) return zero_of(s);
  const u128 B = u128(s.beta);
  int e = -s.n;
  u128 limit = ipow<u128>(B, e + K);
  while (N >= limit) {
    ++e;
    if (e > s.n) return max_of(s, neg);
    limit *= B;
  }
  int t = K + e - s.p;
  u128 d = ipow<u128>(B, t);
  u128 q = N / d;
  u128 r = N % d;
  int cmp = 0;
  if (r == 0) return finish_round(s, neg, std::uint64_t(q), e, -1);
  u128 twice = r * 2;
  cmp = twice < d ? -1 : (twice > d ? 1 : 0);
  return finish_round(s, neg, std::uint64_t(q), e, cmp);
}

// Rounds neg * num / den, num, den > 0, arbitrary precision.
inline Float round_big(const FloatSystem& s, bool neg, const BigInt& num, const BigInt& den) {
  if (num == 0) return zero_of(s);
  const BigInt B = s.beta;
  auto less_than_pow = [&](int e) {  // num/den < beta^e
    if (e >= 0) return num < den * ipow<BigInt>(B, e);
    return num * ipow<BigInt>(B, -e) < den;
  };
  int e = -s.n;
  while (!less_than_pow(e)) {
    ++e;
    if (e > s.n) return max_of(s, neg);
  }
  // mantissa = num * beta^(p - e) / den
  BigInt a = num, b = den;
  int sh = s.p - e;
  if (sh >= 0) a *= ipow<BigInt>(B, sh);
  else b *= ipow<BigInt>(B, -sh);
  BigInt q = a / b;
  BigInt r = a % b;
  int cmp = -1;
  if (r != 0) {
    BigInt twice = r * 2;
    cmp = twice < b ? -1 : (twice > b ? 1 : 0);
  }
  return finish_round(s, neg, q.convert_to<std::uint64_t>(), e, cmp);
}

// Magnitude in units of beta^-(n+p).
inline u128 units(const Float& x) {
  return u128(x.mant) * ipow<u128>(u128(x.sys.beta), x.exp + x.sys.n);
}

inline BigInt big_units(const Float& x) {
  return BigInt(x.mant) * ipow<BigInt>(BigInt(x.sys.beta), x.exp + x.sys.n);
}

}  // namespace detail

inline Float float_zero(const FloatSystem& s) { return detail::zero_of(s); }
inline Float float_max(const FloatSystem& s) { return detail::max_of(s, false); }

inline Rational to_rational(const Float& x) {
  Rational v = Rational(BigInt(x.mant));
  int sh = x.exp - x.sys.p;
  BigInt pw = detail::ipow<BigInt>(BigInt(x.sys.beta), sh >= 0 ? sh : -sh);
  if (sh >= 0) v *= Rational(pw);
  else v /= Rational(pw);
  return x.neg ? -v : v;
}

inline Float round(const FloatSystem& s, const Rational& x) {
  if (x == 0) return detail::zero_of(s);
  bool neg = x < 0;
  BigInt num = boost::multiprecision::numerator(x);
  BigInt den = boost::multiprecision::denominator(x);
  if (num < 0) num = -num;
  return detail::round_big(s, neg, num, den);
}

inline Float from_int(const FloatSystem& s, long long v) {
  if (v == 0) return detail::zero_of(s);
  if (s.fast() && v > -(1LL << 40) && v < (1LL << 40)) {
    u128 mag = u128(v < 0 ? -v : v) * detail::ipow<u128>(u128(s.beta), s.n + s.p);
    return detail::round_scaled_fast(s, v < 0, mag, s.n + s.p);
  }
  return round(s, Rational(v));
}

inline Float add(const Float& a, const Float& b) {
  detail::require_same(a, b);
  const FloatSystem& s = a.sys;
  if (b.is_zero()) return a;
  if (a.is_zero()) return b;
  if (s.fast()) {
    u128 ua = detail::units(a), ub = detail::units(b);
    if (a.neg == b.neg) return detail::round_scaled_fast(s, a.neg, ua + ub, s.n + s.p);
    if (ua == ub) return detail::zero_of(s);
    if (ua > ub) return detail::round_scaled_fast(s, a.neg, ua - ub, s.n + s.p);
    return detail::round_scaled_fast(s, b.neg, ub - ua, s.n + s.p);
  }
  return round(s, to_rational(a) + to_rational(b));
}

inline Float mul(const Float& a, const Float& b) {
  detail::require_same(a, b);
  const FloatSystem& s = a.sys;
  if (a.is_zero() || b.is_zero()) return detail::zero_of(s);
  if (s.fast()) {
    u128 prod = detail::units(a) * detail::units(b);
    return detail::round_scaled_fast(s, a.neg != b.neg, prod, 2 * (s.n + s.p));
  }
  return round(s, to_rational(a) * to_rational(b));
}

inline Float negate(const Float& a) {
  Float r = a;
  if (!r.is_zero()) r.neg = !r.neg;
  return r;
}

// Numeric three-way comparison.
inline int compare(const Float& a, const Float& b) {
  detail::require_same(a, b);
  if (a.neg != b.neg) {
    if (a.is_zero() && b.is_zero()) return 0;
    return a.neg ? -1 : 1;
  }
  int mag;
  if (a.sys.fast()) {
    u128 ua = detail::units(a), ub = detail::units(b);
    mag = ua < ub ? -1 : (ua > ub ? 1 : 0);
  } else {
    BigInt ua = detail::big_units(a), ub = detail::big_units(b);
    mag = ua < ub ? -1 : (ua > ub ? 1 : 0);
  }
  return a.neg ? -mag : mag;
}

struct FloatLess {
  bool operator()(const Float& a, const Float& b) const { return compare(a, b) < 0; }
};

inline bool operator<(const Float& a, const Float& b) { return compare(a, b) < 0; }

// Signed value in units of beta^-(n+p); exact, order preserving. Used as a
// hashable key for configurations.
inline std::int64_t scaled_key(const Float& x) {
  u128 u = detail::units(x);
  if (u > (u128(1) << 62)) throw guard_error("float value too large for configuration key");
  std::int64_t v = std::int64_t(u);
  return x.neg ? -v : v;
}

inline Float from_scaled_key(const FloatSystem& s, std::int64_t key) {
  bool neg = key < 0;
  u128 u = u128(neg ? -key : key);
  return detail::round_scaled_fast(s, neg, u, s.n + s.p);
}

// SUM_S: left fold of add in ascending numeric order.
inline Float sum_sorted(const FloatSystem& s, std::vector<Float> values) {
  std::sort(values.begin(), values.end(), FloatLess{});
  Float acc = detail::zero_of(s);
  for (const auto& v : values) acc = add(acc, v);
  return acc;
}

using FloatMultiset = BoundedMultiset<Float, FloatLess>;

inline Float sum_increasing(const FloatSystem& s, const FloatMultiset& m) {
  Float acc = detail::zero_of(s);
  for (const auto& [v, c] : m.entries()) {
    if (!(v.sys == s)) throw invalid_error("multiset element from a different float system");
    for (int i = 0; i < c; ++i) acc = add(acc, v);
  }
  return acc;
}

inline void check_value_guard(const FloatSystem& s, std::uint64_t limit = 1'000'000) {
  u128 r = 1;
  for (int i = 0; i < s.p; ++i) {
    r *= u128(s.beta);
    if (r > limit) throw guard_error("beta^p exceeds " + std::to_string(limit));
  }
}

inline long long sum_bound(const FloatSystem& s) {
  check_value_guard(s);
  long long bp = (long long)s.beta_pow_p();
  return bp * s.beta + bp + bp / s.beta;
}

inline std::vector<Float> enumerate_values(const FloatSystem& s) {
  check_value_guard(s);
  const std::uint64_t top = s.beta_pow_p();
  const std::uint64_t low = top / std::uint64_t(s.beta);
  std::vector<Float> pos;
  for (int e = -s.n; e <= s.n; ++e) {
    std::uint64_t start = (e == -s.n) ? 1 : low;
    for (std::uint64_t m = start; m < top; ++m) pos.push_back(Float{s, false, m, e});
  }
  if (pos.size() * 2 + 1 > 20'000'000) throw guard_error("float system has more than 2e7 values");
  std::vector<Float> r;
  r.reserve(pos.size() * 2 + 1);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) r.push_back(negate(*it));
  r.push_back(detail::zero_of(s));
  for (const auto& v : pos) r.push_back(v);
  return r;
}

// Least k' with s + f^k' = s + f^(k'+1) for all s, f in D_S.
inline long long sum_bound_exact(const FloatSystem& s) {
  auto values = enumerate_values(s);
  if (double(values.size()) * double(values.size()) > 5e6)
    throw guard_error("sum_bound_exact needs |D_S|^2 <= 5e6");
  long long best = 0;
  const long long cap = sum_bound(s) + 1;
  for (const auto& f : values) {
    for (const auto& start : values) {
      Float x = start;
      long long l = 0;
      while (true) {
        Float y = add(x, f);
        if (y == x) break;
        x = y;
        if (++l > cap) throw invalid_error("repeated addition did not stabilize");
      }
      best = std::max(best, l);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Text forms

inline char digit_char(int d) { return d < 10 ? char('0' + d) : char('a' + d - 10); }

// "+0.106e1"; bases above 36 write digits as "(d1:d2:...)".
inline std::string to_literal(const Float& x) {
  std::string r = x.neg ? "-0." : "+0.";
  auto d = x.digits();
  if (x.sys.beta <= 36) {
    for (int v : d) r += digit_char(v);
  } else {
    r += "(";
    for (std::size_t i = 0; i < d.size(); ++i) r += (i ? ":" : "") + std::to_string(d[i]);
    r += ")";
  }
  return r + "e" + std::to_string(x.exp);
}

inline std::string rational_to_string(const Rational& q) {
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  bool neg = num < 0;
  if (neg) num = -num;
  BigInt d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) d /= 2, ++twos;
  while (d % 5 == 0) d /= 5, ++fives;
  std::string sign = neg ? "-" : "";
  if (d != 1) return sign + num.str() + "/" + den.str();
  int digits = std::max(twos, fives);
  BigInt scaled = num * detail::ipow<BigInt>(BigInt(10), digits) / den;
  std::string s = scaled.str();
  if (digits == 0) return sign + s;
  if (int(s.size()) <= digits) s = std::string(digits - s.size() + 1, '0') + s;
  std::string out = s.substr(0, s.size() - digits) + "." + s.substr(s.size() - digits);
  while (out.back() == '0') out.pop_back();
  if (out.back() == '.') out.pop_back();
  return sign + out;
}

inline std::string to_decimal(const Float& x) { return rational_to_string(to_rational(x)); }

// Decimal "[-+]ddd[.ddd][e[-+]dd]" or fraction "a/b".
inline Rational parse_rational(const std::string& text) {
  auto fail = [&] { return parse_error("bad number '" + text + "'"); };
  if (text.empty()) throw fail();
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    Rational a = parse_rational(text.substr(0, slash));
    Rational b = parse_rational(text.substr(slash + 1));
    if (b == 0) throw fail();
    return a / b;
  }
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') neg = text[i++] == '-';
  BigInt mant = 0;
  int frac = 0;
  bool any = false, dot = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      mant = mant * 10 + (c - '0');
      any = true;
      if (dot) ++frac;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!any) throw fail();
  int ex = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') throw fail();
    try {
      std::size_t used = 0;
      ex = std::stoi(text.substr(i + 1), &used);
      if (used != text.size() - i - 1) throw fail();
    } catch (const Error&) {
      throw;
    } catch (...) {
      throw fail();
    }
  }
  int e10 = ex - frac;
  Rational v(mant);
  BigInt pw = detail::ipow<BigInt>(BigInt(10), e10 >= 0 ? e10 : -e10);
  if (e10 >= 0) v *= Rational(pw);
  else v /= Rational(pw);
  return neg ? -v : v;
}

// Inverse of to_literal. The digits must already be canonical.
inline Float parse_literal(const FloatSystem& s, const std::string& text) {
  auto fail = [&] { return parse_error("bad float literal '" + text + "' for " + s.spec()); };
  if (text.size() < 4 || (text[0] != '+' && text[0] != '-') || text.substr(1, 2) != "0.") throw fail();
  bool neg = text[0] == '-';
  std::size_t epos = text.rfind('e');
  if (epos == std::string::npos || epos < 3) throw fail();
  std::string body = text.substr(3, epos - 3);
  std::vector<int> digits;
  if (!body.empty() && body.front() == '(') {
    if (body.back() != ')') throw fail();
    std::string inner = body.substr(1, body.size() - 2);
    std::size_t pos = 0;
    while (pos <= inner.size()) {
      std::size_t c = inner.find(':', pos);
      std::string item = inner.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
      try {
        digits.push_back(std::stoi(item));
      } catch (...) {
        throw fail();
      }
      if (c == std::string::npos) break;
      pos = c + 1;
    }
  } else {
    for (char c : body) {
      int d;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (c >= 'a' && c <= 'z') d = c - 'a' + 10;
      else throw fail();
      digits.push_back(d);
    }
  }
  int ex;
  try {
    std::size_t used = 0;
    ex = std::stoi(text.substr(epos + 1), &used);
    if (used != text.size() - epos - 1) throw fail();
  } catch (const Error&) {
    throw;
  } catch (...) {
    throw fail();
  }
  if (int(digits.size()) != s.p || ex < -s.n || ex > s.n) throw fail();
  std::uint64_t m = 0;
  for (int d : digits) {
    if (d < 0 || d >= s.beta) throw fail();
    m = m * std::uint64_t(s.beta) + std::uint64_t(d);
  }
  Float x{s, neg, m, ex};
  if (m == 0) {
    if (ex != -s.n || neg) throw parse_error("zero must be written +0.0..0e-n");
    return x;
  }
  if (digits[0] == 0 && ex != -s.n) throw parse_error("non-canonical float literal '" + text + "'");
  return x;
}

// Literal if it has the "+-0.<digits>e<exp>" shape and is valid in s,
// otherwise a decimal or fraction rounded into s.
inline Float parse_value(const FloatSystem& s, const std::string& text) {
  if (text.size() >= 4 && (text[0] == '+' || text[0] == '-') && text.substr(1, 2) == "0." &&
      text.find('e') != std::string::npos) {
    try {
      return parse_literal(s, text);
    } catch (const Error&) {
    }
  }
  return round(s, parse_rational(text));
}

}  // namespace gnnlogic
