#include "concert/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "concert/errors.hpp"

namespace concert {
namespace {

void require_finite_nonnegative(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidInput(std::string(what) + " must be finite and non-negative, got " +
                       std::to_string(v));
  }
}

void require_open_unit(double t, const char* what) {
  if (!(t > 0.0 && t < 1.0)) {
    throw InvalidInput(std::string(what) + " must lie in (0,1), got " + std::to_string(t));
  }
}

double gaussian_tail(double exponent_scale, double r, double diameter_sq) {
  if (diameter_sq == 0.0) return r > 0.0 ? 0.0 : 1.0;
  const double v = std::exp(-exponent_scale * r * r / diameter_sq);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

PartialDiameters::PartialDiameters(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("partial diameters need at least one coordinate");
  for (double v : values_) require_finite_nonnegative(v, "partial diameter");
}

McDiarmidDiameter::McDiarmidDiameter(double value) : value_(value) {
  require_finite_nonnegative(value, "McDiarmid diameter");
}

SeparabilityCoefficient::SeparabilityCoefficient(double value, std::size_t m)
    : value_(value), m_(m) {
  if (m == 0) throw InvalidInput("separability coefficient needs m >= 1");
  if (!std::isfinite(value) || value <= 0.0) {
    throw InvalidInput("separability coefficient must be positive and finite");
  }
  const double root = std::sqrt(static_cast<double>(m));
  // Computed ratios may sit a rounding error outside the closed range.
  const double slack = 1e-12;
  if (value < (1.0 / root) * (1.0 - slack) || value > root * (1.0 + slack)) {
    throw InvalidInput("separability coefficient " + std::to_string(value) +
                       " outside [1/sqrt(m), sqrt(m)] for m = " + std::to_string(m));
  }
}

LipschitzData::LipschitzData(double lip_, double space_diameter_)
    : lip(lip_), space_diameter(space_diameter_) {
  require_finite_nonnegative(lip, "Lipschitz constant");
  require_finite_nonnegative(space_diameter, "space diameter");
}

LipschitzData LipschitzData::from_coordinates(double lip,
                                              std::span<const double> coordinate_diameters) {
  double sum_sq = 0.0;
  for (double d : coordinate_diameters) {
    require_finite_nonnegative(d, "coordinate diameter");
    sum_sq += d * d;
  }
  return LipschitzData(lip, std::sqrt(sum_sq));
}

McDiarmidDiameter mcdiarmid_diameter(const PartialDiameters& partials) {
  double sum_sq = 0.0;
  for (double v : partials.values()) sum_sq += v * v;
  return McDiarmidDiameter(std::sqrt(sum_sq));
}

double deviation_radius(McDiarmidDiameter d, double t) {
  require_open_unit(t, "confidence level t");
  return d.value() / std::sqrt(2.0) * std::sqrt(-std::log(t));
}

double mcdiarmid_tail_bound(McDiarmidDiameter d, double r) {
  if (!(r >= 0.0)) throw InvalidInput("deviation r must be non-negative");
  return gaussian_tail(2.0, r, d.value() * d.value());
}

double lipschitz_tail_bound(const LipschitzData& lip, double r) {
  if (!(r >= 0.0)) throw InvalidInput("deviation r must be non-negative");
  const double scale = lip.lip * lip.space_diameter;
  return gaussian_tail(0.5, r, scale * scale);
}

McDiarmidDiameter lipschitz_effective_diameter(const LipschitzData& lip) {
  return McDiarmidDiameter(2.0 * lip.lip * lip.space_diameter);
}

DistanceTable::DistanceTable(std::size_t n, std::vector<double> entries)
    : n_(n), d_(std::move(entries)) {
  if (d_.size() != n * n) {
    throw InvalidInput("distance table must hold n*n entries");
  }
  for (double v : d_) require_finite_nonnegative(v, "distance");
}

double empirical_lipschitz(std::span<const double> values, const DistanceTable& distances) {
  const std::size_t n = values.size();
  if (n < 2) throw InvalidInput("empirical Lipschitz coefficient needs at least two samples");
  if (distances.size() != n) throw InvalidInput("distance table size does not match samples");

  bool any_distinct = false;
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) continue;
      const double d = distances(i, k);
      if (d == 0.0) continue;
      any_distinct = true;
      best = std::max(best, (values[i] - values[k]) / d);
    }
  }
  if (!any_distinct) {
    throw DegenerateInput("all sample points coincide; Lipschitz coefficient undefined");
  }
  return best;
}

SeparabilityCoefficient separability_coefficient(McDiarmidDiameter mcd, double usual,
                                                 std::size_t m) {
  if (!(usual > 0.0)) {
    throw DegenerateInput("usual diameter is zero; constant functions have no separability "
                          "coefficient");
  }
  return SeparabilityCoefficient(mcd.value() / usual, m);
}

}  // namespace concert
