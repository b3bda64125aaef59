#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "concert/errors.hpp"
#include "concert/testing.hpp"
#include "oracles.hpp"

using namespace concert;
using Catch::Approx;

namespace {

const double kE = std::numbers::e;

TestSpec make_spec(double a, double a_prime, double p, double d1 = 0.05, double d2 = 0.05,
                   BPolicy policy = BPolicy::right()) {
  TestSpec s;
  s.a = a;
  s.a_prime = a_prime;
  s.p = p;
  s.delta1 = d1;
  s.delta2 = d2;
  s.b_policy = policy;
  return s;
}

}  // namespace

TEST_CASE("mean bounds") {
  const McDiarmidDiameter d(std::sqrt(2.0));
  CHECK(mean_bound(HypothesisSide::null, 5.0, 1.0 / kE, d) == Approx(4.0).epsilon(1e-15));
  CHECK(mean_bound(HypothesisSide::alternative, 5.0, 1.0 - 1.0 / kE, d) ==
        Approx(6.0).epsilon(1e-15));
  CHECK(mean_bound(HypothesisSide::null, -3.25, 0.3, McDiarmidDiameter(0.0)) == -3.25);
  CHECK_THROWS_AS(mean_bound(HypothesisSide::null, 1.0, 1.0, d), InvalidInput);
  CHECK_THROWS_AS(mean_bound(HypothesisSide::null, 1.0, 0.0, d), InvalidInput);
}

TEST_CASE("spec validation") {
  CHECK_NOTHROW(make_spec(1, 0, 0.5).validate());
  CHECK_NOTHROW(make_spec(1, 1, 0.5).validate());
  CHECK_THROWS_AS(make_spec(0, 1, 0.5).validate(), InvalidInput);
  CHECK_THROWS_AS(make_spec(1, 0, 0.0).validate(), InvalidInput);
  CHECK_THROWS_AS(make_spec(1, 0, 0.5, 1.0).validate(), InvalidInput);
  CHECK_THROWS_AS(make_spec(1, 0, 0.5, 0.1, 0.0).validate(), InvalidInput);
  CHECK_THROWS_AS(make_spec(NAN, 0, 0.5).validate(), InvalidInput);
}

TEST_CASE("feasible interval examples") {
  {
    const auto iv = feasible_interval(make_spec(1, 0, 0.5), McDiarmidDiameter(0), McDiarmidDiameter(0));
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == 1.0);
    CHECK(iv.feasible());
  }
  {
    const auto iv = feasible_interval(make_spec(3, 0, 1.0 / kE), McDiarmidDiameter(std::sqrt(2.0)),
                                      McDiarmidDiameter(0));
    const double expected_lo = std::sqrt(std::log(1.0 / (1.0 - 1.0 / kE)));
    CHECK(iv.lo == Approx(expected_lo).epsilon(1e-14));
    CHECK(iv.hi == Approx(2.0).epsilon(1e-14));
  }
  {
    const auto iv = feasible_interval(make_spec(1, 1, 0.5), McDiarmidDiameter(std::sqrt(2.0)),
                                      McDiarmidDiameter(0));
    CHECK_FALSE(iv.feasible());
    CHECK(iv.deficit() == Approx(2.0 * std::sqrt(std::log(2.0))).epsilon(1e-14));
  }
}

TEST_CASE("feasibility matches the summed-radii condition") {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::uniform_real_distribution<double> ud(0.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double a_prime = 10.0 * (u(gen) - 0.5);
    const double a = a_prime + 4.0 * u(gen);
    const TestSpec s = make_spec(a, a_prime, u(gen), u(gen), u(gen));
    const double d = ud(gen), dp = ud(gen);
    const auto iv = feasible_interval(s, McDiarmidDiameter(d), McDiarmidDiameter(dp));
    const long double need = oracle::radius(d, s.p) + oracle::radius(d, 1 - s.p) +
                             oracle::radius(dp, s.delta1) + oracle::radius(dp, s.delta2);
    const long double gap = static_cast<long double>(a) - a_prime;
    if (std::abs(gap - need) > 1e-9L) CHECK(iv.feasible() == (gap >= need));
  }
}

TEST_CASE("choose b") {
  const FeasibleInterval iv{1.0, 3.0};
  CHECK(choose_b(BPolicy::left(), iv) == 1.0);
  CHECK(choose_b(BPolicy::right(), iv) == 3.0);
  CHECK(choose_b(BPolicy::midpoint(), iv) == 2.0);
  CHECK(choose_b(BPolicy::at(2.5), iv) == 2.5);
  CHECK(choose_b(BPolicy::at(1.0), iv) == 1.0);
  CHECK_THROWS_AS(choose_b(BPolicy::at(3.5), iv), InvalidPolicy);
  CHECK_THROWS_AS(choose_b(BPolicy::at(0.999), iv), InvalidPolicy);
  CHECK(BPolicy{}.kind == BPolicyKind::right_endpoint);
}

TEST_CASE("generic test with degenerate diameters is exact") {
  const auto out = run_generic_test(make_spec(1, 0, 0.5, 0.05, 0.05, BPolicy::at(0.5)),
                                    McDiarmidDiameter(0), McDiarmidDiameter(0), 0.7);
  CHECK(out.accepted);
  CHECK(out.b == 0.5);
  CHECK(out.type1_bound == 0.0);
  CHECK(out.type2_bound == 0.0);

  const auto tie = run_generic_test(make_spec(1, 0, 0.5, 0.05, 0.05, BPolicy::at(0.5)),
                                    McDiarmidDiameter(0), McDiarmidDiameter(0), 0.5);
  CHECK(tie.accepted);
  const auto below = run_generic_test(make_spec(1, 0, 0.5, 0.05, 0.05, BPolicy::at(0.5)),
                                      McDiarmidDiameter(0), McDiarmidDiameter(0),
                                      std::nextafter(0.5, 0.0));
  CHECK_FALSE(below.accepted);
}

TEST_CASE("generic test errors") {
  const TestSpec s = make_spec(1, 1, 0.5);
  try {
    run_generic_test(s, McDiarmidDiameter(1), McDiarmidDiameter(1), 0.0);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(e.deficit() > 0.0);
  }
  CHECK_THROWS_AS(run_generic_test(make_spec(1, 0, 0.5, 0.05, 0.05, BPolicy::at(2.0)),
                                   McDiarmidDiameter(0), McDiarmidDiameter(0), 0.0),
                  InvalidPolicy);
  CHECK_THROWS_AS(run_generic_test(make_spec(1, 0, 0.5), McDiarmidDiameter(0),
                                   McDiarmidDiameter(0), NAN),
                  InvalidInput);
}

TEST_CASE("error bounds respect the deltas anywhere in the interval") {
  std::mt19937_64 gen(103);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  int checked = 0;
  while (checked < 1000) {
    const double d = 2.0 * u(gen);
    const double dp = 2.0 * u(gen);
    TestSpec s = make_spec(0, 0, u(gen), u(gen), u(gen));
    s.a = 12.0 * u(gen);
    const auto iv = feasible_interval(s, McDiarmidDiameter(d), McDiarmidDiameter(dp));
    if (!iv.feasible()) continue;
    ++checked;
    const double frac = u(gen);
    s.b_policy = BPolicy::at(iv.lo + frac * (iv.hi - iv.lo));
    const auto out = run_generic_test(s, McDiarmidDiameter(d), McDiarmidDiameter(dp), 0.0);
    const long double null_gap = (s.a - oracle::radius(d, s.p)) - out.b;
    const long double alt_gap = out.b - (s.a_prime + oracle::radius(d, 1 - s.p));
    CHECK(out.type1_bound == Approx(static_cast<double>(oracle::tail(dp, null_gap))).epsilon(1e-9));
    CHECK(out.type2_bound == Approx(static_cast<double>(oracle::tail(dp, alt_gap))).epsilon(1e-9));
    CHECK(out.type1_bound <= s.delta1 * (1 + 1e-12));
    CHECK(out.type2_bound <= s.delta2 * (1 + 1e-12));
  }
}

TEST_CASE("right endpoint puts the type I bound exactly at delta1") {
  const TestSpec s = make_spec(5, 0, 0.4, 0.05, 0.1);
  const auto out = run_generic_test(s, McDiarmidDiameter(1.0), McDiarmidDiameter(0.7), 0.0);
  CHECK(out.type1_bound == Approx(0.05).epsilon(1e-12));
  TestSpec left = s;
  left.b_policy = BPolicy::left();
  const auto out2 = run_generic_test(left, McDiarmidDiameter(1.0), McDiarmidDiameter(0.7), 0.0);
  CHECK(out2.type2_bound == Approx(0.1).epsilon(1e-12));
}

TEST_CASE("validation test") {
  const std::vector<double> xs{0.6, 0.7, 0.8};
  const auto out = validation_test(xs, make_spec(1, 0, 0.5, 0.05, 0.05, BPolicy::at(0.5)),
                                   McDiarmidDiameter(0));
  CHECK(out.accepted);
  CHECK(out.statistic == Approx(0.7).epsilon(1e-15));

  const std::vector<double> empty;
  CHECK_THROWS_AS(validation_test(empty, make_spec(1, 0, 0.5), McDiarmidDiameter(0)), InvalidInput);
  const std::vector<double> bad{1.0, INFINITY};
  CHECK_THROWS_AS(validation_test(bad, make_spec(1, 0, 0.5), McDiarmidDiameter(0)), InvalidInput);
}

TEST_CASE("validation interval converges to the population interval") {
  const TestSpec s = make_spec(4, 0, 0.3, 0.05, 0.05);
  const McDiarmidDiameter d(1.5);
  const double lo_inf = s.a_prime + deviation_radius(d, 1 - s.p);
  const double hi_inf = s.a - deviation_radius(d, s.p);
  double prev_width = -1.0;
  for (std::size_t n : {10u, 100u, 1000u, 100000u, 10000000u}) {
    const auto iv = feasible_interval(s, d, McDiarmidDiameter(d.value() / std::sqrt(double(n))));
    CHECK(iv.lo >= lo_inf);
    CHECK(iv.hi <= hi_inf);
    CHECK(iv.hi - iv.lo > prev_width);
    prev_width = iv.hi - iv.lo;
  }
  const auto far = feasible_interval(s, d, McDiarmidDiameter(d.value() / std::sqrt(1e14)));
  CHECK(far.lo == Approx(lo_inf).margin(1e-6));
  CHECK(far.hi == Approx(hi_inf).margin(1e-6));
}

TEST_CASE("validation reports the minimal feasible sample size") {
  std::mt19937_64 gen(107);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int seen = 0;
  for (int i = 0; i < 400; ++i) {
    const TestSpec s = make_spec(0, 0, u(gen), u(gen) * 0.5, u(gen) * 0.5);
    const McDiarmidDiameter d(1.0);
    const double floor_gap = deviation_radius(d, s.p) + deviation_radius(d, 1 - s.p);
    TestSpec t = s;
    t.a = floor_gap + 0.05 + u(gen);
    const std::vector<double> one{0.0};
    try {
      validation_test(one, t, d);
    } catch (const Infeasible& e) {
      REQUIRE(e.minimal_n().has_value());
      const long long n = *e.minimal_n();
      auto feasible_at = [&](long long k) {
        return feasible_interval(t, d, McDiarmidDiameter(1.0 / std::sqrt(double(k)))).feasible();
      };
      CHECK(feasible_at(n));
      CHECK((n == 1 || !feasible_at(n - 1)));
      ++seen;
    }
  }
  CHECK(seen > 100);

  const TestSpec hopeless = make_spec(1.0, 0.0, 0.5);
  const std::vector<double> one{0.0};
  try {
    validation_test(one, hopeless, McDiarmidDiameter(2.0));
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK_FALSE(e.minimal_n().has_value());
    CHECK(std::string(e.what()).find("no sample size") != std::string::npos);
  }
}

TEST_CASE("validation with one sample reproduces the generic test") {
  std::mt19937_64 gen(109);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    TestSpec s = make_spec(20 * u(gen), 0, u(gen), u(gen), u(gen), BPolicy::midpoint());
    const McDiarmidDiameter d(u(gen));
    if (!feasible_interval(s, d, d).feasible()) continue;
    const std::vector<double> one{10 * u(gen)};
    const auto v = validation_test(one, s, d);
    const auto g = run_generic_test(s, d, d, one[0]);
    CHECK(v.accepted == g.accepted);
    CHECK(v.b == g.b);
    CHECK(v.type1_bound == g.type1_bound);
    CHECK(v.type2_bound == g.type2_bound);
  }
}

TEST_CASE("validation decision is invariant under affine change of units") {
  std::mt19937_64 gen(113);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    TestSpec s = make_spec(0, 0, 0.1 + 0.8 * u(gen), 0.01 + 0.2 * u(gen), 0.01 + 0.2 * u(gen),
                           BPolicy::midpoint());
    s.a = 3.0 + 3.0 * u(gen);
    const McDiarmidDiameter d(1.0);
    std::vector<double> xs(5 + i % 30);
    for (double& x : xs) x = s.a - 1.5 + 2.0 * u(gen);
    const double scale = 0.1 + 50 * u(gen);
    const double shift = 100 * (u(gen) - 0.5);
    TestSpec t = s;
    t.a = scale * s.a + shift;
    t.a_prime = scale * s.a_prime + shift;
    std::vector<double> ys(xs);
    for (double& y : ys) y = scale * y + shift;
    try {
      const auto o1 = validation_test(xs, s, d);
      const auto o2 = validation_test(ys, t, McDiarmidDiameter(scale));
      // Only a statistic within rounding of b may flip.
      if (o1.accepted != o2.accepted && std::abs(o1.statistic - o1.b) > 1e-9) ++mismatches;
      CHECK(o2.b == Approx(scale * o1.b + shift).epsilon(1e-10));
      CHECK(o2.type1_bound == Approx(o1.type1_bound).epsilon(1e-9).margin(1e-15));
    } catch (const Infeasible&) {
      CHECK_THROWS_AS(validation_test(ys, t, McDiarmidDiameter(scale)), Infeasible);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("certification radius") {
  CHECK(certification_radius(McDiarmidDiameter(1), McDiarmidDiameter(1), 2, 2, 1.0 / kE) ==
        Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(certification_radius(McDiarmidDiameter(3), McDiarmidDiameter(0), 9, 1, 1.0 / kE) ==
        Approx(3.0 / std::sqrt(18.0)).epsilon(1e-14));
  CHECK_THROWS_AS(certification_radius(McDiarmidDiameter(1), McDiarmidDiameter(1), 0, 2, 0.5),
                  InvalidInput);
}

TEST_CASE("certification with an exact model deviation matches validation") {
  std::mt19937_64 gen(127);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    TestSpec s = make_spec(0, 0, 0.1 + 0.8 * u(gen), 0.01 + 0.3 * u(gen), 0.01 + 0.3 * u(gen),
                           i % 2 ? BPolicy::left() : BPolicy::right());
    s.a = 2.0 + 4 * u(gen);
    std::vector<double> model(3 + i % 40);
    for (double& x : model) x = 5 * u(gen);
    const std::vector<double> zeros(1 + i % 7, 0.0);
    const McDiarmidDiameter d1(1.0);
    try {
      const auto v = validation_test(model, s, d1);
      const auto c = certification_test(model, zeros, s, d1, McDiarmidDiameter(0));
      CHECK(c.outcome.accepted == v.accepted);
      CHECK(c.outcome.b == Approx(v.b).margin(1e-12));
      CHECK(c.outcome.interval.lo == Approx(v.interval.lo).margin(1e-12));
      CHECK(c.outcome.interval.hi == Approx(v.interval.hi).margin(1e-12));
      CHECK(c.outcome.type1_bound == Approx(v.type1_bound).margin(1e-12));
      CHECK(c.outcome.type2_bound == Approx(v.type2_bound).margin(1e-12));
    } catch (const Infeasible&) {
      CHECK_THROWS_AS(certification_test(model, zeros, s, d1, McDiarmidDiameter(0)), Infeasible);
    }
  }
}

TEST_CASE("certification statistic and unbalanced radius") {
  const TestSpec s = make_spec(10, 0, 0.5, 0.05, 0.05, BPolicy::midpoint());
  const std::vector<double> model(100, 6.0);
  const std::vector<double> dev(4, -0.5);
  const auto c = certification_test(model, dev, s, McDiarmidDiameter(1.0), McDiarmidDiameter(0.02));
  CHECK(c.outcome.statistic == Approx(5.5).epsilon(1e-15));
  CHECK(c.total_diameter.value() == Approx(1.02).epsilon(1e-15));
  CHECK(c.unbalanced_applicable);
  CHECK(c.rho_delta1 == Approx(certification_radius(McDiarmidDiameter(1.0), McDiarmidDiameter(0.02),
                                                     100, 4, 0.05))
                            .epsilon(1e-14));

  const auto u = certification_test(model, dev, s, McDiarmidDiameter(1.0), McDiarmidDiameter(0.02),
                                    CertificationRadius::unbalanced);
  CHECK(u.total_diameter.value() == 2.0);
  CHECK(u.rho_delta1 == Approx(std::sqrt(std::log(20.0)) / 10.0).epsilon(1e-14));
  CHECK(u.radius_used == CertificationRadius::unbalanced);

  const std::vector<double> tiny(1, 0.0);
  CHECK_FALSE(unbalanced_radius_applicable(McDiarmidDiameter(1.0), McDiarmidDiameter(0.02), 100, 1));
  CHECK_THROWS_AS(certification_test(model, tiny, s, McDiarmidDiameter(1.0), McDiarmidDiameter(0.02),
                                     CertificationRadius::unbalanced),
                  InvalidInput);
  CHECK_FALSE(unbalanced_radius_applicable(McDiarmidDiameter(1.0), McDiarmidDiameter(2.0), 1, 100));
  CHECK(unbalanced_radius_applicable(McDiarmidDiameter(0.0), McDiarmidDiameter(0.0), 5, 1));
}

TEST_CASE("unbalanced radius dominates the standard one when licensed") {
  std::mt19937_64 gen(131);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double d1 = 0.1 + u(gen), d2 = d1 * u(gen);
    const std::size_t n1 = 1 + static_cast<std::size_t>(200 * u(gen));
    const std::size_t n2 = static_cast<std::size_t>(std::ceil(d2 / d1 * n1)) + (i % 5);
    REQUIRE(unbalanced_radius_applicable(McDiarmidDiameter(d1), McDiarmidDiameter(d2), n1,
                                         std::max<std::size_t>(n2, 1)));
    const double t = 0.01 + 0.98 * u(gen);
    const double standard = certification_radius(McDiarmidDiameter(d1), McDiarmidDiameter(d2), n1,
                                                  std::max<std::size_t>(n2, 1), t);
    const double simple = d1 * std::sqrt(std::log(1 / t)) / std::sqrt(double(n1));
    CHECK(standard <= simple * (1 + 1e-12));
  }
}

TEST_CASE("qmu report") {
  const std::vector<double> one{0.0};
  const auto r = qmu_report(one, 0.0, McDiarmidDiameter(1.0), 1.0 - 1.0 / kE, 1.0 / kE);
  CHECK(r.required_ratio == Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(r.margin == 0.0);
  CHECK_FALSE(r.holds);
  CHECK(r.confidence == 1.0 / kE);

  const std::vector<double> xs{3.0, 5.0};
  const std::vector<double> xs2{6.0, 10.0};
  const auto r1 = qmu_report(xs, 1.0, McDiarmidDiameter(1.5), 0.3, 0.1);
  const auto r2 = qmu_report(xs2, 2.0, McDiarmidDiameter(3.0), 0.3, 0.1);
  CHECK(r1.ratio == Approx(r2.ratio).epsilon(1e-15));
  CHECK(r1.ratio == Approx(r1.margin / r1.uncertainty).epsilon(1e-15));
  CHECK(r1.margin == 3.0);
  CHECK(r1.holds == (r1.ratio >= r1.required_ratio));

  CHECK_THROWS_AS(qmu_report(xs, 0.0, McDiarmidDiameter(0.0), 0.3, 0.1), DegenerateInput);
  CHECK_THROWS_AS(qmu_report(xs, 0.0, McDiarmidDiameter(1.0), 1.3, 0.1), InvalidInput);
}

TEST_CASE("null and alternative are disjoint on random discrete laws") {
  std::mt19937_64 gen(137);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const int k = 1 + i % 6;
    std::vector<double> atoms(k), w(k);
    double total = 0;
    for (int j = 0; j < k; ++j) {
      atoms[j] = std::round(10 * u(gen)) / 2;
      w[j] = u(gen) + 1e-3;
      total += w[j];
    }
    auto tail = [&](double t) {
      double s = 0;
      for (int j = 0; j < k; ++j)
        if (atoms[j] >= t) s += w[j] / total;
      return s;
    };
    const double a = std::round(10 * u(gen)) / 2;
    const double a_prime = a - std::round(6 * u(gen)) / 2;
    const double p = u(gen);
    const bool in_null = tail(a) >= p;
    const bool in_alt = tail(a_prime) < p;
    CHECK_FALSE((in_null && in_alt));
  }
}
