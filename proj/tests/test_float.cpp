#include <gtest/gtest.h>

#include <random>

#include "gnnlogic/gnnlogic.hpp"
#include "oracles.hpp"

using namespace gnnlogic;

namespace {

Float val(const FloatSystem& s, const std::string& t) { return parse_value(s, t); }
std::string dec(const Float& x) { return to_decimal(x); }

// Least k with s + f*k = s + f*(k+1) for all s, f, using oracle arithmetic.
long long oracle_bound_exact(int p, int n, int beta) {
  auto g = oracle::grid(p, n, beta);
  std::vector<oracle::Q> all;
  for (auto it = g.values.rbegin(); it != g.values.rend(); ++it)
    if (*it != 0) all.push_back(-*it);
  for (const auto& v : g.values) all.push_back(v);
  long long best = 0;
  for (const auto& f : all)
    for (const auto& s : all) {
      oracle::Q x = s;
      long long l = 0;
      for (;;) {
        oracle::Q y = oracle::round(g, x + f);
        if (y == x) break;
        x = y;
        ++l;
      }
      best = std::max(best, l);
    }
  return best;
}

}  // namespace

TEST(FloatSystem, ParseSpec) {
  auto s = FloatSystem::parse("p=3,n=2,beta=10");
  EXPECT_EQ(s.p, 3);
  EXPECT_EQ(s.n, 2);
  EXPECT_EQ(s.beta, 10);
  EXPECT_EQ(s.spec(), "p=3,n=2,beta=10");
  for (const char* bad : {"", "p=3", "p=0,n=1,beta=10", "p=1,n=-1,beta=2", "p=1,n=1,beta=1", "p=1,n=1,beta=x",
                          "q=1,n=1,beta=2"}) {
    try {
      FloatSystem::parse(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::parse) << bad;
    }
  }
}

TEST(FloatRound, Examples) {
  FloatSystem s(3, 2, 10);
  Float r = round(s, parse_rational("1.055"));
  EXPECT_EQ(dec(r), "1.06");
  EXPECT_EQ(to_literal(r), "+0.106e1");
  EXPECT_TRUE(round(s, Rational(0)).is_zero());
  EXPECT_FALSE(round(s, Rational(0)).neg);
  EXPECT_EQ(dec(round(FloatSystem(2, 2, 10), Rational(123))), "99");
  EXPECT_EQ(dec(round(FloatSystem(2, 2, 10), Rational(-123))), "-99");
}

TEST(FloatAdd, PaperExamples) {
  for (int n : {1, 2}) {
    FloatSystem s(3, n, 10);
    EXPECT_EQ(dec(add(val(s, "0.312"), val(s, "0.743"))), "1.06");
  }
  FloatSystem s2(2, 1, 10);
  EXPECT_EQ(dec(add(val(s2, "1"), val(s2, "0.01"))), "1");
  EXPECT_EQ(dec(add(add(val(s2, "1"), val(s2, "-1")), val(s2, "0.01"))), "0.01");
  EXPECT_EQ(dec(add(add(val(s2, "1"), val(s2, "0.01")), val(s2, "-1"))), "0");
}

TEST(FloatMul, ZeroAnnihilates) {
  FloatSystem s(2, 1, 3);
  for (const auto& x : enumerate_values(s)) EXPECT_TRUE(mul(x, float_zero(s)).is_zero());
}

TEST(FloatOps, MixedSystemsRejected) {
  EXPECT_THROW(add(from_int(FloatSystem(1, 1, 2), 1), from_int(FloatSystem(2, 1, 2), 1)), Error);
}

// Exhaustive comparison against rounding on an explicit grid.
TEST(FloatOps, MatchOracleExhaustive) {
  for (auto [p, n, b] : std::vector<std::tuple<int, int, int>>{{1, 1, 2}, {1, 0, 3}, {2, 1, 2}, {2, 1, 3}, {1, 2, 5}, {2, 0, 10}}) {
    FloatSystem s(p, n, b);
    auto g = oracle::grid(p, n, b);
    auto vs = enumerate_values(s);
    for (const auto& x : vs)
      for (const auto& y : vs) {
        ASSERT_EQ(oracle::value(add(x, y)), oracle::round(g, oracle::value(x) + oracle::value(y)))
            << s.spec() << " " << to_literal(x) << " + " << to_literal(y);
        ASSERT_EQ(oracle::value(mul(x, y)), oracle::round(g, oracle::value(x) * oracle::value(y)))
            << s.spec() << " " << to_literal(x) << " * " << to_literal(y);
      }
  }
}

TEST(FloatOps, MatchOracleSampled) {
  std::mt19937_64 rng(5);
  for (auto [p, n, b] : std::vector<std::tuple<int, int, int>>{{2, 2, 10}, {3, 1, 10}, {3, 2, 7}, {4, 3, 2}}) {
    FloatSystem s(p, n, b);
    auto g = oracle::grid(p, n, b);
    auto vs = enumerate_values(s);
    for (int i = 0; i < 20000; ++i) {
      const auto& x = vs[rng() % vs.size()];
      const auto& y = vs[rng() % vs.size()];
      ASSERT_EQ(oracle::value(add(x, y)), oracle::round(g, oracle::value(x) + oracle::value(y)))
          << s.spec() << " " << to_literal(x) << " + " << to_literal(y);
      ASSERT_EQ(oracle::value(mul(x, y)), oracle::round(g, oracle::value(x) * oracle::value(y)))
          << s.spec() << " " << to_literal(x) << " * " << to_literal(y);
    }
  }
}

TEST(FloatRound, MatchOracleOnRationals) {
  std::mt19937_64 rng(9);
  for (auto [p, n, b] : std::vector<std::tuple<int, int, int>>{{1, 1, 2}, {2, 1, 3}, {3, 2, 10}}) {
    FloatSystem s(p, n, b);
    auto g = oracle::grid(p, n, b);
    for (int i = 0; i < 5000; ++i) {
      long long num = (long long)(rng() % 200001) - 100000;
      long long den = 1 + (long long)(rng() % 999);
      Rational q(num, den);
      ASSERT_EQ(oracle::value(round(s, q)), oracle::round(g, oracle::Q(num, den))) << s.spec() << " " << num << "/" << den;
    }
  }
}

TEST(FloatSum, Examples) {
  FloatSystem s(2, 1, 10);
  EXPECT_EQ(dec(sum_sorted(s, {val(s, "1"), val(s, "-1"), val(s, "0.01")})), "0.01");
  EXPECT_TRUE(sum_sorted(s, {}).is_zero());
  Float x = val(s, "0.37");
  EXPECT_EQ(sum_sorted(s, {x}), x);
  FloatMultiset m;
  m.add(val(s, "1"));
  m.add(val(s, "-1"));
  m.add(val(s, "0.01"));
  EXPECT_EQ(dec(sum_increasing(s, m)), "0.01");
}

TEST(FloatSum, Stabilizes) {
  std::mt19937_64 rng(17);
  for (auto [p, n, b] : std::vector<std::tuple<int, int, int>>{{1, 1, 2}, {1, 0, 3}, {2, 1, 2}}) {
    FloatSystem s(p, n, b);
    long long k = sum_bound(s);
    auto vs = enumerate_values(s);
    for (int i = 0; i < 500; ++i) {
      FloatMultiset m, mk{std::optional<int>(int(k))};
      int distinct = 1 + int(rng() % 4);
      for (int j = 0; j < distinct; ++j) {
        const auto& v = vs[rng() % vs.size()];
        long long c = 1 + (long long)(rng() % (k + 4));
        m.add(v, c);
        mk.add(v, c);
      }
      EXPECT_EQ(sum_increasing(s, m), sum_increasing(s, mk));
    }
  }
}

TEST(FloatBound, Values) {
  EXPECT_EQ(sum_bound(FloatSystem(3, 1, 10)), 11100);
  EXPECT_EQ(sum_bound(FloatSystem(1, 1, 2)), 7);
  EXPECT_EQ(sum_bound(FloatSystem(1, 0, 3)), 13);
}

TEST(FloatBound, ExactMatchesOracle) {
  for (auto [p, n, b] : std::vector<std::tuple<int, int, int>>{{1, 1, 2}, {1, 0, 3}, {2, 1, 2}}) {
    FloatSystem s(p, n, b);
    long long exact = sum_bound_exact(s);
    EXPECT_EQ(exact, oracle_bound_exact(p, n, b)) << s.spec();
    EXPECT_LE(exact, sum_bound(s)) << s.spec();
  }
}

TEST(FloatValues, Enumeration) {
  FloatSystem s(1, 0, 2);
  auto vs = enumerate_values(s);
  ASSERT_EQ(vs.size(), 3u);
  EXPECT_EQ(dec(vs[0]), "-0.5");
  EXPECT_EQ(dec(vs[1]), "0");
  EXPECT_EQ(dec(vs[2]), "0.5");
  for (auto [p, n, b] : std::vector<std::tuple<int, int, int>>{{1, 1, 2}, {2, 1, 10}, {2, 2, 3}}) {
    FloatSystem t(p, n, b);
    auto all = enumerate_values(t);
    for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LT(compare(all[i - 1], all[i]), 0);
    EXPECT_EQ(all.front(), negate(float_max(t)));
    EXPECT_EQ(all.back(), float_max(t));
    EXPECT_NE(std::find(all.begin(), all.end(), float_zero(t)), all.end());
    EXPECT_EQ(all.size(), oracle::grid(p, n, b).values.size() * 2 - 1);
  }
}

TEST(FloatText, LiteralRoundTrip) {
  for (auto [p, n, b] : std::vector<std::tuple<int, int, int>>{{1, 1, 2}, {2, 1, 10}, {2, 1, 40}}) {
    FloatSystem s(p, n, b);
    for (const auto& x : enumerate_values(s)) {
      EXPECT_EQ(parse_literal(s, to_literal(x)), x) << to_literal(x);
      EXPECT_EQ(parse_value(s, to_decimal(x)), x) << to_decimal(x);
    }
  }
  FloatSystem s(3, 1, 10);
  EXPECT_THROW(parse_literal(s, "+0.012e1"), Error);
  EXPECT_THROW(parse_literal(s, "+0.12e1"), Error);
  EXPECT_THROW(parse_literal(s, "+0.120e2"), Error);
  EXPECT_THROW(parse_literal(s, "-0.000e-1"), Error);
  EXPECT_EQ(to_literal(float_zero(s)), "+0.000e-1");
}

TEST(FloatText, KeysRoundTrip) {
  FloatSystem s(2, 1, 3);
  for (const auto& x : enumerate_values(s)) EXPECT_EQ(from_scaled_key(s, scaled_key(x)), x);
}
