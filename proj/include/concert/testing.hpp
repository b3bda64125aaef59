#pragma once

// Hypothesis tests with known diameters.
//
// The null hypothesis is P(U >= a) >= p, the alternative P(U >= a') < p with
// a' <= a; the two are disjoint. A test accepts the null when a statistic F'
// with E F' = E U clears an acceptance point b. If b lies in
//
//   [a' + r_{1-p} + r'_{delta2},  a - r_p - r'_{delta1}]
//
// (r from the diameter of U, r' from the diameter of F') the type I error is
// below delta1 and the type II error at most delta2.

#include <cstddef>
#include <optional>
#include <span>

#include "concert/concentration.hpp"

namespace concert {

enum class HypothesisSide { null, alternative };

/// P(U >= a) >= p.
struct PerformanceHypothesis {
  PerformanceHypothesis(double a, double p);
  double a;
  double p;
};

enum class BPolicyKind { left_endpoint, right_endpoint, midpoint, explicit_value };

struct BPolicy {
  BPolicyKind kind = BPolicyKind::right_endpoint;
  double value = 0.0;  // only read for explicit_value

  static BPolicy left() { return {BPolicyKind::left_endpoint, 0.0}; }
  static BPolicy right() { return {BPolicyKind::right_endpoint, 0.0}; }
  static BPolicy midpoint() { return {BPolicyKind::midpoint, 0.0}; }
  static BPolicy at(double b) { return {BPolicyKind::explicit_value, b}; }
};

struct TestSpec {
  double a = 0.0;
  double a_prime = 0.0;
  double p = 0.5;
  double delta1 = 0.05;
  double delta2 = 0.05;
  BPolicy b_policy{};

  /// Throws InvalidInput unless a' <= a and p, delta1, delta2 lie in (0,1).
  void validate() const;
};

/// Candidate acceptance interval [lo, hi]; empty when lo > hi.
struct FeasibleInterval {
  double lo;
  double hi;

  bool feasible() const noexcept { return lo <= hi; }
  /// Shortfall of a - a' against the summed radii; <= 0 when feasible.
  double deficit() const noexcept { return lo - hi; }
  bool contains(double b) const noexcept { return lo <= b && b <= hi; }
};

struct TestOutcome {
  bool accepted = false;
  double b = 0.0;
  FeasibleInterval interval{0.0, 0.0};
  double statistic = 0.0;
  // theta1 < type1_bound and theta2 <= type2_bound.
  double type1_bound = 1.0;
  double type2_bound = 1.0;
};

/// Constraint on E U implied by membership: a - r_p under the null,
/// a + r_{1-p} under the alternative.
double mean_bound(HypothesisSide side, double a, double p, McDiarmidDiameter d);

FeasibleInterval feasible_interval(const TestSpec& spec, McDiarmidDiameter d,
                                   McDiarmidDiameter d_prime);

/// Resolves the spec's b policy against an interval; throws InvalidPolicy
/// when an explicit b falls outside it.
double choose_b(const BPolicy& policy, const FeasibleInterval& interval);

/// Accept iff statistic >= b. Throws Infeasible when the interval is empty.
TestOutcome run_generic_test(const TestSpec& spec, McDiarmidDiameter d,
                             McDiarmidDiameter d_prime, double statistic);

/// Sample-mean test: statistic <F>_n, statistic diameter D / sqrt(n). On
/// infeasibility the error carries the smallest n that would restore it, or
/// none when a - a' <= r_p + r_{1-p}.
TestOutcome validation_test(std::span<const double> samples, const TestSpec& spec,
                            McDiarmidDiameter d);

enum class CertificationRadius {
  // rho_t = sqrt(D1^2/n1 + D2^2/n2) sqrt(log 1/t) / sqrt 2, D = D1 + D2.
  standard,
  // rho_t = D1 sqrt(log 1/t) / sqrt(n1), D = 2 D1; needs D2 <= D1 and
  // n2 >= (D2 / D1) n1.
  unbalanced,
};

struct CertificationOutcome {
  TestOutcome outcome;
  McDiarmidDiameter total_diameter;
  double rho_delta1 = 0.0;
  double rho_delta2 = 0.0;
  // Whether the unbalanced-sampling radius is licensed for these sizes.
  bool unbalanced_applicable = false;
  CertificationRadius radius_used = CertificationRadius::standard;
};

/// rho_t for the two-sample statistic <F1>_{n1} + <F2>_{n2}.
double certification_radius(McDiarmidDiameter d1, McDiarmidDiameter d2, std::size_t n1,
                            std::size_t n2, double t);

bool unbalanced_radius_applicable(McDiarmidDiameter d1, McDiarmidDiameter d2, std::size_t n1,
                                  std::size_t n2);

/// Tests F = F1 + F2 from separate samples of the model F1 and the model
/// deviation F2. Requesting the unbalanced radius when its preconditions
/// fail throws InvalidInput.
CertificationOutcome certification_test(std::span<const double> model_samples,
                                        std::span<const double> deviation_samples,
                                        const TestSpec& spec, McDiarmidDiameter d1,
                                        McDiarmidDiameter d2,
                                        CertificationRadius radius = CertificationRadius::standard);

/// Margin over uncertainty: (<F>_n - a') / D against
/// sqrt(log(1/(1-p)) / 2) + sqrt(log(1/delta2) / (2n)).
struct QmuReport {
  double margin = 0.0;
  double uncertainty = 0.0;
  double ratio = 0.0;
  double required_ratio = 0.0;
  // If P(F >= a') < p the chance of `holds` being true is below this.
  double confidence = 0.0;
  bool holds = false;
};

QmuReport qmu_report(std::span<const double> samples, double a_prime, McDiarmidDiameter d,
                     double p, double delta2);

}  // namespace concert
