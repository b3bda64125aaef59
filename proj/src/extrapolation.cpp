#include "concert/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "concert/errors.hpp"

namespace concert {
namespace {

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw InvalidInput(std::string(what) + " must lie in (0,1), got " + std::to_string(v));
  }
}

}  // namespace

EmpiricalCdfPair::EmpiricalCdfPair(EmpiricalDistribution first, EmpiricalDistribution second)
    : a_(std::move(first)), b_(std::move(second)) {
  if (a_.size() < b_.size()) {
    std::swap(a_, b_);
    swapped_ = true;
  }
}

DistanceBudget::DistanceBudget(double delta_p, double p) : delta_p_(delta_p), p_(p) {
  require_open_unit(p, "p");
  if (!(delta_p > 0.0 && delta_p < std::min(p, 1.0 - p))) {
    throw InvalidInput("distance budget delta_p must lie in (0, min(p, 1-p))");
  }
}

double kolmogorov_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  // Both CDFs are constant between merged jump points, so the sup is attained
  // at a jump point from the right or the left.
  double best = 0.0;
  auto visit = [&](std::span<const double> points) {
    for (double x : points) {
      best = std::max(best, std::abs(a.cdf(x) - b.cdf(x)));
      best = std::max(best, std::abs(a.cdf_left(x) - b.cdf_left(x)));
    }
  };
  visit(a.sorted());
  visit(b.sorted());
  return std::min(best, 1.0);
}

double dkw_confidence_radius(std::size_t n_prime, double delta) {
  if (n_prime == 0) throw InvalidInput("n' must be positive");
  require_open_unit(delta, "delta");
  return std::sqrt((2.0 * std::log(4.0) + 2.0 * std::log(1.0 / delta)) /
                   static_cast<double>(n_prime));
}

KolmogorovEstimate estimate_kolmogorov_distance(const EmpiricalCdfPair& pair, double delta) {
  return {kolmogorov_distance(pair.a(), pair.b()), dkw_confidence_radius(pair.b().size(), delta),
          pair.a().size(), pair.b().size(), delta};
}

ExtrapolationRadii extrapolation_radii(std::size_t n, const DistanceBudget& budget,
                                       double delta1, double delta2) {
  if (n == 0) throw InvalidInput("sample size must be positive");
  require_open_unit(delta1, "delta1");
  require_open_unit(delta2, "delta2");
  const double nd = static_cast<double>(n);
  const double p = budget.p();
  const double dp = budget.value();
  return {std::sqrt(std::log(1.0 / (p - dp))) / std::sqrt(2.0) +
              std::sqrt(std::log(1.0 / delta1)) / std::sqrt(2.0 * nd),
          std::sqrt(std::log(1.0 / (1.0 - p - dp))) / std::sqrt(2.0) +
              std::sqrt(std::log(1.0 / delta2)) / std::sqrt(2.0 * nd)};
}

TestOutcome extrapolative_validation_test(std::span<const double> samples, double a,
                                          double a_prime, const DistanceBudget& budget,
                                          double delta1, double delta2, McDiarmidDiameter d) {
  if (samples.empty()) throw InvalidInput("extrapolative validation needs samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw InvalidInput("samples must be finite");
  }
  if (!std::isfinite(a) || !std::isfinite(a_prime)) throw InvalidInput("thresholds must be finite");
  if (a_prime > a) throw InvalidInput("a' must not exceed a");
  require_open_unit(delta1, "delta1");
  require_open_unit(delta2, "delta2");

  const double p = budget.p();
  const double dp = budget.value();
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;

  const double null_level = std::sqrt(std::log(1.0 / (p - dp))) / std::sqrt(2.0);
  const double alt_level = std::sqrt(std::log(1.0 / (1.0 - p - dp))) / std::sqrt(2.0);
  const auto [r_h, r_k] = extrapolation_radii(samples.size(), budget, delta1, delta2);

  TestOutcome out;
  out.interval = {a_prime + d.value() * r_k, a - d.value() * r_h};
  if (!out.interval.feasible()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "extrapolative test infeasible: a - a' = " << (a - a_prime) << " < D (r_H + r_K) = "
        << d.value() * (r_h + r_k);
    throw Infeasible(msg.str(), out.interval.deficit());
  }
  out.b = out.interval.hi;
  out.statistic = mean;
  out.accepted = mean >= out.b;

  // Error bounds for F follow from the shifted levels p - delta_p and
  // 1 - p - delta_p; the statistic has diameter D / sqrt(n).
  const McDiarmidDiameter d_stat(d.value() / std::sqrt(n));
  const double null_gap = (a - d.value() * null_level) - out.b;
  const double alt_gap = out.b - (a_prime + d.value() * alt_level);
  out.type1_bound = mcdiarmid_tail_bound(d_stat, std::max(0.0, null_gap));
  out.type2_bound = mcdiarmid_tail_bound(d_stat, std::max(0.0, alt_gap));
  return out;
}

}  // namespace concert
