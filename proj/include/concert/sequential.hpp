#pragma once

// Stop-option tests with estimated diameters.
//
// Stage 1 checks feasibility f_H((1+eps) D_hat) + f_K((1+eps) D_hat) <= 0
// using empirical diameters D_hat. Only if it accepts does stage 2 compare the
// statistic against -f_H((1+eps) D_hat). Because D_hat never exceeds the
// essential diameters, stage 1 cannot reject a law whose inflated essential
// diameters pass the same check (theta1 = 0). The stage-2 errors pick up
// Delta, the probability that some inflated empirical diameter still
// undershoots its essential diameter.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "concert/concentration.hpp"

namespace concert {

/// A pair of thresholds f_H, f_K over a k-vector of diameters. Both must be
/// non-decreasing in every coordinate.
struct ThresholdFunctions {
  using Fn = std::function<double(std::span<const double>)>;
  std::size_t k = 1;
  Fn f_h;
  Fn f_k;
};

/// Outcome encoding 0, (1,0), (1,1).
class StopOptionOutcome {
 public:
  static StopOptionOutcome stopped() { return StopOptionOutcome(false, std::nullopt); }
  static StopOptionOutcome continued(bool stage2) { return StopOptionOutcome(true, stage2); }

  bool stage1() const noexcept { return stage1_; }
  std::optional<bool> stage2() const noexcept { return stage2_; }
  /// "0", "(1,0)" or "(1,1)".
  const char* code() const noexcept;

  friend bool operator==(const StopOptionOutcome&, const StopOptionOutcome&) = default;

 private:
  StopOptionOutcome(bool s1, std::optional<bool> s2) : stage1_(s1), stage2_(s2) {}
  bool stage1_;
  std::optional<bool> stage2_;
};

struct ErrorTriple {
  double theta1 = 0.0;
  double theta11 = 1.0;
  double theta12 = 1.0;
};

struct EstimatedDiameterVector {
  EstimatedDiameterVector(std::vector<double> empirical, double inflation);

  std::vector<double> empirical;
  double inflation;  // eps > 0
  // Known essential diameters; harness and oracle use only.
  std::optional<std::vector<double>> essential_claimed;

  std::vector<double> inflated() const;
};

/// Per-observable tail-function values tau^j(eps) with the sample sizes
/// n_j used to form each empirical diameter.
struct TailCertificate {
  std::vector<double> tau;
  std::vector<std::size_t> sample_sizes;
};

/// Where Delta comes from.
struct DeltaSource {
  std::optional<TailCertificate> tails;  // derive Delta from tau and n_j
  std::optional<double> assumed;         // stated Delta, used when tails are absent
};

struct StopOptionResult {
  StopOptionOutcome outcome = StopOptionOutcome::stopped();
  ErrorTriple bounds;
  double f_h = 0.0;  // at the inflated empirical diameters
  double f_k = 0.0;
  std::vector<double> inflated;
  double statistic = 0.0;
  // Delta used in the bounds; nullopt means the bounds exclude Delta.
  std::optional<double> delta_inflation;
  // n_j >= max(n_j(delta1), n_j(delta2)) for every j.
  bool sample_size_certified = false;
  std::vector<std::size_t> required_sizes;
};

/// f_H = r_p(D) + r'_delta(D') - a and f_K = r_{1-p}(D) + r'_delta(D') + a'.
struct InversionThresholds {
  double f_h;
  double f_k;
};
InversionThresholds inversion_thresholds(double a, double a_prime, double p, double delta,
                                         McDiarmidDiameter d, McDiarmidDiameter d_prime);

/// min(1, sum of entries).
double delta_inflation_bound(std::span<const double> failure_probs);

/// Verifies the monotonicity contract at `point` by bumping each coordinate.
/// Throws ContractViolation on failure.
void check_monotone(const ThresholdFunctions& f, std::span<const double> point);

StopOptionResult generic_stop_option(const ThresholdFunctions& f,
                                     const EstimatedDiameterVector& diameters, double statistic,
                                     double delta1, double delta2,
                                     const DeltaSource& delta_source = {});

/// The basic admissible-test construction: accept iff statistic > -g_H,
/// licensed only when g_H + g_K <= 0 (nullopt otherwise).
std::optional<bool> basic_admissible_test(double g_h, double g_k, double statistic);

struct EstimatedValidationParams {
  double a;
  double a_prime;
  double p;
  double delta1;
  double delta2;
  double c;          // upper bound on the separability coefficient of F
  double eps = 1.0;  // inflation of the empirical diameter
  std::optional<double> tau;  // tau(eps) of F, enables the sample-size certificate
  std::optional<double> assumed_delta;
};

ThresholdFunctions validation_thresholds(const EstimatedValidationParams& params, std::size_t n);

StopOptionResult validation_test_estimated(std::span<const double> samples,
                                           const EstimatedValidationParams& params);

struct EstimatedCertificationParams {
  double a;
  double a_prime;
  double p;
  double delta1;
  double delta2;
  double c1;
  double c2;
  double eps = 1.0;
  std::optional<double> tau1;
  std::optional<double> tau2;
  std::optional<double> assumed_delta;
};

/// f_H(s1, s2) = (c1 s1 + c2 s2) sqrt(log 1/p)
///               + sqrt((c1^2 s1^2 / 2n1 + c2^2 s2^2 / 2n2) log 1/delta1) - a,
/// f_K analogous with 1 - p, delta2 and + a'.
ThresholdFunctions certification_thresholds(const EstimatedCertificationParams& params,
                                            std::size_t n1, std::size_t n2);

StopOptionResult certification_test_estimated(std::span<const double> model_samples,
                                              std::span<const double> deviation_samples,
                                              const EstimatedCertificationParams& params);

}  // namespace concert
