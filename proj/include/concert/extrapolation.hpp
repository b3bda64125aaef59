#pragma once

// Extrapolative validation: testing a deployment-regime variable F_hat that
// cannot be sampled, from samples of a surrogate F whose Kolmogorov distance
// to F_hat is bounded by delta_p.

#include <cstddef>
#include <span>

#include "concert/concentration.hpp"
#include "concert/quantiles.hpp"
#include "concert/testing.hpp"

namespace concert {

/// Empirical CDFs of F (n samples) and F_hat (n' samples). The smaller set
/// is always stored as `b`, so n >= n'.
class EmpiricalCdfPair {
 public:
  EmpiricalCdfPair(EmpiricalDistribution first, EmpiricalDistribution second);

  const EmpiricalDistribution& a() const noexcept { return a_; }
  const EmpiricalDistribution& b() const noexcept { return b_; }
  // True when the constructor swapped its arguments.
  bool swapped() const noexcept { return swapped_; }

 private:
  EmpiricalDistribution a_;
  EmpiricalDistribution b_;
  bool swapped_ = false;
};

/// Assumed bound on d(F, F_hat); 0 < delta_p < min(p, 1 - p).
class DistanceBudget {
 public:
  DistanceBudget(double delta_p, double p);
  double value() const noexcept { return delta_p_; }
  double p() const noexcept { return p_; }

 private:
  double delta_p_;
  double p_;
};

/// sup_x |F_A(x) - F_B(x)| for two empirical CDFs, evaluated exactly at the
/// merged jump points (both one-sided limits).
double kolmogorov_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// sqrt((2 ln 4 + 2 ln(1/delta)) / n'): with probability at least 1 - delta
/// the two-sample estimate is within this radius of the true distance.
double dkw_confidence_radius(std::size_t n_prime, double delta);

struct KolmogorovEstimate {
  double estimate;
  double radius;
  std::size_t n;
  std::size_t n_prime;
  double delta;
};

KolmogorovEstimate estimate_kolmogorov_distance(const EmpiricalCdfPair& pair, double delta);

/// Unit-diameter radii r_H and r_K of the extrapolative test.
struct ExtrapolationRadii {
  double r_h;
  double r_k;
};
ExtrapolationRadii extrapolation_radii(std::size_t n, const DistanceBudget& budget,
                                       double delta1, double delta2);

/// Tests {P(F_hat >= a) >= p} against {P(F_hat >= a') < p} using samples of
/// F only. Accepts iff <F>_n >= a - D r_H where
///   r_H = sqrt(log 1/(p - delta_p)) / sqrt 2 + sqrt(log 1/delta1) / sqrt(2n)
///   r_K = sqrt(log 1/(1 - p - delta_p)) / sqrt 2 + sqrt(log 1/delta2) / sqrt(2n)
/// and requires a - a' >= D (r_H + r_K). The acceptance point is fixed at the
/// upper end of the interval; there is no b policy.
TestOutcome extrapolative_validation_test(std::span<const double> samples, double a,
                                          double a_prime, const DistanceBudget& budget,
                                          double delta1, double delta2, McDiarmidDiameter d);

}  // namespace concert
