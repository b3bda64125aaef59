#pragma once

// Verification harness: ground-truth families with exactly known diameters,
// exact boundary laws, brute-force McDiarmid diameters on finite grids, and
// seeded Monte Carlo measurement of error rates against claimed bounds.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "concert/concentration.hpp"
#include "concert/quantiles.hpp"
#include "concert/rng.hpp"

namespace concert {

/// Values of F on a finite product grid, row-major (last coordinate fastest).
struct FunctionTable {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  std::size_t coordinates() const noexcept { return shape.size(); }
};

struct McDiarmidReport {
  PartialDiameters partials;
  McDiarmidDiameter mcdiarmid;
  double mcdiarmid_squared;  // exact for integer-valued tables
  double usual;
  SeparabilityCoefficient separability;
};

inline constexpr std::size_t kDefaultComparisonBudget = 10'000'000;

/// Exhaustive partial diameters: for each coordinate, the largest change of F
/// along any line on which all other coordinates are pinned. Throws
/// ResourceError when the number of coordinate-pinned pairs exceeds budget
/// and DegenerateInput for a constant table.
McDiarmidReport brute_force_mcdiarmid(const FunctionTable& table,
                                      std::size_t budget = kDefaultComparisonBudget);

enum class FamilyKind {
  separable_sum,
  euclidean_indicator,
  uniform_product,
  two_atom,
  shifted_uniform_pair,
};

const char* to_string(FamilyKind kind);

/// A function F on a product space together with a product law for X, for
/// which every diameter and the law of F(X) are known in closed form.
class GroundTruthFamily {
 public:
  /// F = w (x_1 + ... + x_m), x_j in {0,1} i.i.d. Bernoulli(q).
  static GroundTruthFamily separable_sum(std::size_t m, double weight = 1.0, double q = 0.5);
  /// F = |x| when |x| <= 1 and 0 otherwise, X uniform on [0,1]^m.
  static GroundTruthFamily euclidean_indicator(std::size_t m);
  /// F = lo + (hi - lo) x_1 ... x_m, X uniform on [0,1]^m. m = 1 is the
  /// uniform law on [lo, hi].
  static GroundTruthFamily uniform_product(std::size_t m, double lo = 0.0, double hi = 1.0);
  /// F in {lo, hi} with P(F = hi) = p_high.
  static GroundTruthFamily two_atom(double lo, double hi, double p_high);
  /// F uniform on [lo, lo + length]; the companion F_hat is F shifted by
  /// `shift`, at Kolmogorov distance min(|shift| / length, 1).
  static GroundTruthFamily shifted_uniform_pair(double lo, double length, double shift = 0.0);

  FamilyKind kind() const noexcept { return kind_; }
  std::size_t coordinates() const noexcept { return m_; }
  const std::vector<double>& params() const noexcept { return params_; }

  double essential_diameter() const;
  PartialDiameters partial_diameters() const;
  McDiarmidDiameter mcdiarmid() const;
  double usual_diameter() const;
  SeparabilityCoefficient separability() const;

  /// Law of F(X).
  CdfDescription law() const;
  double prob_at_least(double a) const;
  double mean() const;

  double evaluate(std::span<const double> x) const;
  double sample(Rng& rng) const;

  /// Grid restriction of F. Continuous coordinates use 2^level + 1 equally
  /// spaced points on [0, 1] (nested in level); binary coordinates use {0,1}.
  FunctionTable tabulate(std::size_t level) const;

  // Shifted companion (shifted_uniform_pair only).
  CdfDescription shifted_law() const;
  double sample_shifted(Rng& rng) const;
  double shift_distance() const;

 private:
  GroundTruthFamily(FamilyKind kind, std::size_t m, std::vector<double> params)
      : kind_(kind), m_(m), params_(std::move(params)) {}

  FamilyKind kind_;
  std::size_t m_;
  std::vector<double> params_;
};

enum class BoundarySide { null_boundary, alternative_boundary };

/// Mass taken off p to put an alternative-boundary law strictly inside the
/// alternative.
inline constexpr double kAlternativeMargin = 1e-6;

/// Moves a two-atom or shifted-uniform family (keeping its width) so that
/// P(F >= a) = p on the null boundary, or p - kAlternativeMargin on the
/// alternative boundary. Other families throw InvalidInput.
GroundTruthFamily boundary_law(BoundarySide side, double a, double p,
                               const GroundTruthFamily& family);

enum class ErrorKind { type1, type2 };

/// One Monte Carlo experiment. `error_event` draws a fresh sample set from
/// the generator, runs a test and returns true when the counted error occurs.
struct Scenario {
  std::string name;
  ErrorKind kind = ErrorKind::type1;
  double claimed_bound = 0.0;
  std::function<bool(Rng&)> error_event;
};

struct SideRate {
  std::size_t errors = 0;
  double observed = 0.0;
  double claimed = 0.0;
  double std_err = 0.0;  // binomial standard error at the claimed bound
  bool pass = false;
};

inline constexpr double kSlackSigmas = 3.0;

struct ErrorRateReport {
  std::string name;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::optional<SideRate> type1;
  std::optional<SideRate> type2;
  double slack_sigmas = kSlackSigmas;
  bool pass = false;
};

/// Runs `trials` independent trials; trial i uses Rng::for_trial(seed, i).
/// The result does not depend on `threads`. Requires trials >= 100.
ErrorRateReport measure_error_rates(const Scenario& scenario, std::size_t trials,
                                    std::uint64_t seed, unsigned threads = 1);

/// Joins the type I side of one report with the type II side of another.
ErrorRateReport merge_reports(std::string name, const ErrorRateReport& a,
                              const ErrorRateReport& b);

// ---------------------------------------------------------------------------
// Scenario builders. Each returns the scenarios checking one claimed bound.

enum class BoundaryShape { two_atom, shifted_uniform };

struct ScenarioParams {
  BoundaryShape shape = BoundaryShape::two_atom;
  std::size_t n = 25;
  std::size_t n2 = 25;  // second sample set (certification)
  double p = 0.5;
  double delta1 = 0.05;
  double delta2 = 0.05;
  double diameter = 1.0;
  double diameter2 = 0.1;
  double a_prime = 0.0;
  double eps = 1.0;
};

/// Known-diameter sample-mean test at its tightest feasible gap a - a'.
std::vector<Scenario> validation_scenarios(const ScenarioParams& params);
/// Two-sample certification test of F1 + F2.
std::vector<Scenario> certification_scenarios(const ScenarioParams& params);
/// Extrapolative test with F_hat on the boundary and F shifted by delta_p.
std::vector<Scenario> extrapolation_scenarios(const ScenarioParams& params, double delta_p);
/// Stop-option validation with estimated diameter. The law is uniform or
/// two-atom (params.shape) with c = 1; n is the planned size for its tail
/// value at params.eps, and the claimed bounds are 2 delta1 and 2 delta2.
std::vector<Scenario> estimated_validation_scenarios(const ScenarioParams& params);
/// Stop-option certification with two estimated diameters on uniform laws,
/// planned sizes for k = 2. Requires p = 1/2.
std::vector<Scenario> estimated_certification_scenarios(const ScenarioParams& params);
/// Stage-1 rejections under a law whose inflated essential diameter passes
/// the feasibility check; claimed bound 0.
std::vector<Scenario> stage1_zero_scenarios(const ScenarioParams& params,
                                            const GroundTruthFamily& family);
/// Six quantile-exceedance bounds for the law at sample size n.
std::vector<Scenario> quantile_scenarios(const GroundTruthFamily& family, std::size_t n);
/// Uniform(0,1): empirical range below xi_p - xi_{1-p}, empirical maximum
/// below xi_p, and the eps-inflated two-sided and one-sided diameter
/// underestimation events.
std::vector<Scenario> range_scenarios(std::size_t n, double p, double eps);
/// Two-sample Kolmogorov estimate against the confidence radius, F = F_hat.
std::vector<Scenario> dkw_scenarios(std::size_t n, std::size_t n_prime, double delta);
/// Margin/uncertainty statement under an alternative-boundary two-atom law;
/// claimed bound delta2.
std::vector<Scenario> qmu_scenarios(const ScenarioParams& params);

}  // namespace concert
