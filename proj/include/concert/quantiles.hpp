#pragma once

// Empirical distributions, quantile concentration, and the tail-function
// machinery that bounds how far an empirical diameter can undershoot the
// essential diameter.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace concert {

/// Sorted, immutable view of n real samples with the induced right-continuous
/// step CDF and its generalized inverse.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples);
  explicit EmpiricalDistribution(std::span<const double> samples)
      : EmpiricalDistribution(std::vector<double>(samples.begin(), samples.end())) {}

  std::size_t size() const noexcept { return sorted_.size(); }
  std::span<const double> sorted() const noexcept { return sorted_; }

  double min() const noexcept { return sorted_.front(); }
  double max() const noexcept { return sorted_.back(); }
  double range() const noexcept { return max() - min(); }
  double mean() const noexcept { return mean_; }

  /// F_n(x) = #{X_i <= x} / n.
  double cdf(double x) const;
  /// F_n(x-) = #{X_i < x} / n.
  double cdf_left(double x) const;
  /// P_n(X >= a) = 1 - F_n(a-).
  double prob_at_least(double a) const { return 1.0 - cdf_left(a); }

  /// inf{x : F_n(x) >= q}, q in (0,1).
  double quantile(double q) const;

 private:
  std::vector<double> sorted_;
  double mean_ = 0.0;
};

enum class QuantileSide { above, below };

/// Three exponential bounds on P(empirical q-quantile > xi) (side above,
/// requires F(xi) > q) or P(empirical q-quantile < xi) (side below, requires
/// F(xi) < q). Each bound is valid on its own; callers take the minimum.
std::array<double, 3> quantile_exceedance_bounds(std::size_t n, double f_xi, double q,
                                                 QuantileSide side);

/// Bound on P(empirical range < xi_p - xi_{1-p}) = 2 exp(-n (1-p) / 2),
/// clamped to 1.
double empirical_range_bound(std::size_t n, double p);

/// Bound on P(empirical supremum < xi_p) for non-negative variables.
double empirical_supremum_bound(std::size_t n, double p);

// Analytic CDF families a tail function can be evaluated against.
struct UniformCdf {
  double lo, hi;
};
// Beta(kappa, 1) rescaled to [lo, hi]: F(lo + x) = (x / D)^kappa.
struct PowerTailCdf {
  double lo, hi, kappa;
};
// Mass 1 - p_high at lo and p_high at hi.
struct TwoAtomCdf {
  double lo, hi, p_high;
};
struct DiscreteCdf {
  std::vector<double> atoms;  // strictly increasing
  std::vector<double> probs;
};
// Any right-continuous CDF supported on [lo, hi].
struct CallableCdf {
  std::function<double(double)> cdf;
  double lo, hi;
};

using CdfDescription = std::variant<UniformCdf, PowerTailCdf, TwoAtomCdf, DiscreteCdf, CallableCdf>;

double cdf_at(const CdfDescription& desc, double x);
/// Essential infimum and supremum of the described law.
std::array<double, 2> support(const CdfDescription& desc);

/// Lower bound on the two-sided tail function tau(eps) from a CDF:
/// min(F(X- + u D), 1 - F(X+ - u D)) with u = eps / (2 (1 + eps)).
/// Returns 1 when D = 0.
double tail_lower_bound(const std::function<double(double)>& cdf, double x_minus,
                        double x_plus, double eps);
double tail_lower_bound(const CdfDescription& desc, double eps);

/// Lower bound on the one-sided tail function of a non-negative variable:
/// 1 - F(X+ / (1 + eps)).
double tail_lower_bound_positive(const CdfDescription& desc, double eps);

/// P(D_n < D / (1 + eps)) <= 2 exp(-n tau / 2), or exp(-n tau / 2) for the
/// one-sided supremum variant. Clamped to 1.
double diameter_underestimate_bound(std::size_t n, double tau, bool one_sided = false);

/// ceil(2 log(2k / delta) / tau): the per-observable sample size at which the
/// summed underestimation probability of k observables drops below delta.
std::size_t required_sample_size(std::size_t k, double tau, double delta);

}  // namespace concert
