#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "concert/errors.hpp"
#include "concert/harness.hpp"
#include "concert/testing.hpp"
#include "oracles.hpp"

using namespace concert;
using Catch::Approx;

TEST_CASE("brute force on the separable sum") {
  const auto fam = GroundTruthFamily::separable_sum(4);
  const auto rep = brute_force_mcdiarmid(fam.tabulate(0));
  for (double d : rep.partials.values()) CHECK(d == 1.0);
  CHECK(rep.mcdiarmid.value() == 2.0);
  CHECK(rep.mcdiarmid_squared == 4.0);
  CHECK(rep.usual == 4.0);
  CHECK(rep.separability.value() == 0.5);
}

TEST_CASE("brute force on the euclidean indicator") {
  const auto fam = GroundTruthFamily::euclidean_indicator(4);
  const auto table = fam.tabulate(0);
  CHECK(table.values.size() == 16);
  const auto rep = brute_force_mcdiarmid(table);
  CHECK(rep.mcdiarmid.value() == 2.0);
  CHECK(rep.usual == 1.0);
  CHECK(rep.separability.value() == 2.0);
}

TEST_CASE("brute force matches pairwise enumeration") {
  std::mt19937_64 gen(501);
  std::uniform_int_distribution<int> size(1, 4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 300; ++i) {
    FunctionTable t;
    t.shape.resize(1 + i % 3);
    std::size_t cells = 1;
    for (auto& s : t.shape) cells *= (s = static_cast<std::size_t>(size(gen)));
    t.values.resize(cells);
    for (double& v : t.values) v = u(gen);
    if (cells == 1) continue;
    const auto rep = brute_force_mcdiarmid(t);
    const auto expected = oracle::partials_by_pairs(t.shape, t.values);
    for (std::size_t j = 0; j < expected.size(); ++j) CHECK(rep.partials[j] == expected[j]);
    const auto [lo, hi] = std::minmax_element(t.values.begin(), t.values.end());
    CHECK(rep.usual == *hi - *lo);
  }
}

TEST_CASE("brute force errors") {
  FunctionTable flat{{2, 2}, {1, 1, 1, 1}};
  CHECK_THROWS_AS(brute_force_mcdiarmid(flat), DegenerateInput);
  const auto big = GroundTruthFamily::uniform_product(3).tabulate(3);  // 9^3 cells
  CHECK_THROWS_AS(brute_force_mcdiarmid(big, 100), ResourceError);
  CHECK_NOTHROW(brute_force_mcdiarmid(big));
  FunctionTable bad{{2, 2}, {1, 2, 3}};
  CHECK_THROWS_AS(brute_force_mcdiarmid(bad), InvalidInput);
}

TEST_CASE("grid diameters approach the analytic values monotonically") {
  const std::vector<GroundTruthFamily> fams{
      GroundTruthFamily::euclidean_indicator(2), GroundTruthFamily::euclidean_indicator(3),
      GroundTruthFamily::uniform_product(2, -1.0, 2.0), GroundTruthFamily::uniform_product(3),
      GroundTruthFamily::separable_sum(3, 0.5)};
  for (const auto& fam : fams) {
    double prev_mcd = 0.0, prev_usual = 0.0;
    for (std::size_t level = 0; level <= 3; ++level) {
      const auto rep = brute_force_mcdiarmid(fam.tabulate(level));
      CHECK(rep.mcdiarmid.value() >= prev_mcd);
      CHECK(rep.usual >= prev_usual);
      CHECK(rep.mcdiarmid.value() <= fam.mcdiarmid().value() * (1 + 1e-12));
      CHECK(rep.usual <= fam.usual_diameter() * (1 + 1e-12));
      prev_mcd = rep.mcdiarmid.value();
      prev_usual = rep.usual;
    }
    CHECK(prev_mcd == Approx(fam.mcdiarmid().value()).epsilon(1e-12));
    CHECK(prev_usual == Approx(fam.usual_diameter()).epsilon(1e-12));
  }
}

TEST_CASE("family closed forms") {
  const auto s = GroundTruthFamily::separable_sum(3, 2.0, 0.25);
  CHECK(s.mean() == Approx(1.5));
  CHECK(s.essential_diameter() == 6.0);
  CHECK(s.prob_at_least(4.0) == Approx(3 * 0.25 * 0.25 * 0.75 + 0.25 * 0.25 * 0.25));
  CHECK(s.separability().value() == Approx(1 / std::sqrt(3.0)));

  const auto t = GroundTruthFamily::two_atom(-1.0, 2.0, 0.3);
  CHECK(t.prob_at_least(2.0) == Approx(0.3));
  CHECK(t.prob_at_least(1.9) == Approx(0.3));
  CHECK(t.prob_at_least(-1.0) == 1.0);
  CHECK(t.mean() == Approx(-0.1));

  const auto u = GroundTruthFamily::shifted_uniform_pair(0.0, 2.0, 0.5);
  CHECK(u.shift_distance() == Approx(0.25));
  CHECK(GroundTruthFamily::shifted_uniform_pair(0.0, 1.0, 3.0).shift_distance() == 1.0);
  CHECK(cdf_at(u.shifted_law(), 0.5) == 0.0);
  CHECK(cdf_at(u.law(), 0.5) == Approx(0.25));

  CHECK_THROWS_AS(GroundTruthFamily::euclidean_indicator(0), InvalidInput);
  CHECK_THROWS_AS(GroundTruthFamily::two_atom(0, 1, 1.5), InvalidInput);
}

TEST_CASE("sampled means match the closed forms") {
  const std::vector<GroundTruthFamily> fams{
      GroundTruthFamily::separable_sum(4), GroundTruthFamily::euclidean_indicator(3),
      GroundTruthFamily::uniform_product(2, 1.0, 3.0), GroundTruthFamily::two_atom(0, 1, 0.2),
      GroundTruthFamily::shifted_uniform_pair(-1, 2)};
  for (const auto& fam : fams) {
    Rng rng(17);
    const int n = 200000;
    double sum = 0;
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i < n; ++i) {
      const double v = fam.sample(rng);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const auto supp = support(fam.law());
    CHECK(lo >= supp[0]);
    CHECK(hi <= supp[1]);
    CHECK(sum / n == Approx(fam.mean()).margin(5 * fam.usual_diameter() / std::sqrt(double(n))));
  }
}

TEST_CASE("boundary laws sit exactly on the boundary") {
  for (double p : {0.1, 0.5, 0.77}) {
    for (double a : {-2.0, 0.0, 3.5}) {
      const auto two = boundary_law(BoundarySide::null_boundary, a, p,
                                    GroundTruthFamily::two_atom(0, 1, 0.5));
      CHECK(two.prob_at_least(a) == Approx(p).margin(1e-12));
      CHECK(two.usual_diameter() == 1.0);
      const auto alt = boundary_law(BoundarySide::alternative_boundary, a, p,
                                    GroundTruthFamily::two_atom(0, 2, 0.5));
      CHECK(alt.prob_at_least(a) == Approx(p - kAlternativeMargin).margin(1e-12));
      CHECK(alt.prob_at_least(a) < p);

      const auto uni = boundary_law(BoundarySide::null_boundary, a, p,
                                    GroundTruthFamily::shifted_uniform_pair(0, 3));
      CHECK(uni.prob_at_least(a) == Approx(p).margin(1e-12));
      const auto law = std::get<UniformCdf>(uni.law());
      CHECK(law.lo == Approx(a - (1 - p) * 3).margin(1e-12));
      CHECK(law.hi == Approx(a + p * 3).margin(1e-12));
    }
  }
  CHECK_THROWS_AS(boundary_law(BoundarySide::null_boundary, 0, 0.5,
                               GroundTruthFamily::separable_sum(2)),
                  InvalidInput);
}

TEST_CASE("every ground-truth law falls in exactly one of null, alternative, neither") {
  std::mt19937_64 gen(503);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<GroundTruthFamily> fams{
      GroundTruthFamily::separable_sum(3), GroundTruthFamily::euclidean_indicator(2),
      GroundTruthFamily::uniform_product(2), GroundTruthFamily::two_atom(0, 1, 0.4),
      GroundTruthFamily::shifted_uniform_pair(0, 1)};
  for (const auto& fam : fams) {
    for (int i = 0; i < 500; ++i) {
      const double a = 3.5 * u(gen) - 0.25;
      const double a_prime = a - u(gen);
      const double p = u(gen);
      const bool null = fam.prob_at_least(a) >= p;
      const bool alt = fam.prob_at_least(a_prime) < p;
      const int classes = int(null) + int(alt) + int(!null && !alt);
      CHECK(classes == 1);
      CHECK_FALSE((null && alt));
    }
  }
}

TEST_CASE("error rate measurement is deterministic across thread counts") {
  Scenario s;
  s.name = "coin";
  s.kind = ErrorKind::type1;
  s.claimed_bound = 0.3;
  s.error_event = [](Rng& r) { return r.uniform() < 0.25; };
  const auto one = measure_error_rates(s, 5000, 123, 1);
  const auto four = measure_error_rates(s, 5000, 123, 4);
  const auto seven = measure_error_rates(s, 5000, 123, 7);
  REQUIRE(one.type1.has_value());
  CHECK_FALSE(one.type2.has_value());
  CHECK(one.type1->errors == four.type1->errors);
  CHECK(one.type1->errors == seven.type1->errors);
  CHECK(one.type1->observed == Approx(0.25).margin(0.03));
  CHECK(one.type1->std_err == Approx(std::sqrt(0.3 * 0.7 / 5000)).epsilon(1e-12));
  CHECK(one.pass);

  const auto other_seed = measure_error_rates(s, 5000, 124, 1);
  CHECK(other_seed.type1->errors != one.type1->errors);

  CHECK_THROWS_AS(measure_error_rates(s, 99, 1, 1), InvalidInput);

  Scenario never = s;
  never.claimed_bound = 0.0;
  never.error_event = [](Rng&) { return false; };
  const auto zero = measure_error_rates(never, 1000, 5, 3);
  CHECK(zero.type1->errors == 0);
  CHECK(zero.pass);

  Scenario always = s;
  always.kind = ErrorKind::type2;
  always.claimed_bound = 0.1;
  always.error_event = [](Rng&) { return true; };
  const auto bad = measure_error_rates(always, 1000, 5, 2);
  CHECK(bad.type2.has_value());
  CHECK_FALSE(bad.pass);

  const auto merged = merge_reports("joined", zero, bad);
  CHECK(merged.type1.has_value());
  CHECK(merged.type2.has_value());
  CHECK_FALSE(merged.pass);

  Scenario throwing = s;
  throwing.error_event = [](Rng&) -> bool { throw std::runtime_error("boom"); };
  CHECK_THROWS_AS(measure_error_rates(throwing, 200, 1, 4), std::runtime_error);
}

TEST_CASE("degenerate family never errs under the null") {
  const auto fam = GroundTruthFamily::two_atom(0.5, 0.5, 0.5);
  CHECK(fam.essential_diameter() == 0.0);
  Scenario s;
  s.name = "point mass";
  s.claimed_bound = 0.0;
  s.error_event = [&](Rng& r) {
    std::vector<double> xs(10);
    for (double& x : xs) x = fam.sample(r);
    TestSpec spec;
    spec.a = 0.5;
    spec.a_prime = 0.0;
    return !validation_test(xs, spec, McDiarmidDiameter(0.0)).accepted;
  };
  const auto rep = measure_error_rates(s, 1000, 9, 2);
  CHECK(rep.type1->errors == 0);
}

TEST_CASE("scenario builders pass at moderate trial counts") {
  auto run_all = [](const std::vector<Scenario>& scenarios, std::size_t trials) {
    CHECK_FALSE(scenarios.empty());
    for (const auto& s : scenarios) {
      INFO(s.name);
      const auto rep = measure_error_rates(s, trials, 77, 4);
      CHECK(rep.pass);
    }
  };
  ScenarioParams params;
  run_all(validation_scenarios(params), 2000);
  params.shape = BoundaryShape::shifted_uniform;
  run_all(validation_scenarios(params), 2000);
  run_all(certification_scenarios(ScenarioParams{}), 2000);
  run_all(extrapolation_scenarios(ScenarioParams{}, 0.1), 2000);
  run_all(estimated_validation_scenarios(ScenarioParams{}), 2000);
  run_all(estimated_certification_scenarios(ScenarioParams{}), 2000);
  run_all(stage1_zero_scenarios(ScenarioParams{}, GroundTruthFamily::separable_sum(4)), 2000);
  run_all(quantile_scenarios(GroundTruthFamily::uniform_product(1), 20), 2000);
  run_all(range_scenarios(50, 0.9, 1.0), 2000);
  run_all(dkw_scenarios(200, 50, 0.1), 1000);
  run_all(qmu_scenarios(ScenarioParams{}), 2000);
}

TEST_CASE("scenario names are distinct and describe the claim") {
  const auto v = validation_scenarios(ScenarioParams{});
  REQUIRE(v.size() == 2);
  CHECK(v[0].name != v[1].name);
  CHECK(v[0].claimed_bound == 0.05);
  CHECK(quantile_scenarios(GroundTruthFamily::two_atom(0, 1, 0.5), 20).size() == 6);
  CHECK_THROWS_AS(quantile_scenarios(GroundTruthFamily::separable_sum(2), 20), InvalidInput);
  ScenarioParams skewed;
  skewed.p = 0.7;
  CHECK_THROWS_AS(estimated_certification_scenarios(skewed), InvalidInput);
}
