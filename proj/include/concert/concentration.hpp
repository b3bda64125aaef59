#pragma once

// Diameters, concentration radii and the two concentration inequalities
// (bounded differences and Lipschitz) that every test in the library is
// built on. All logarithms are natural.

#include <cstddef>
#include <span>
#include <vector>

namespace concert {

/// Worst-case change of F when a single coordinate of the product space is
/// varied, one entry per coordinate. Entries are non-negative and finite.
class PartialDiameters {
 public:
  explicit PartialDiameters(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }

 private:
  std::vector<double> values_;
};

/// l2 norm of the partial diameters. Non-negative, same units as F.
class McDiarmidDiameter {
 public:
  McDiarmidDiameter() = default;
  explicit McDiarmidDiameter(double value);

  double value() const noexcept { return value_; }

  friend bool operator==(McDiarmidDiameter, McDiarmidDiameter) = default;

 private:
  double value_ = 0.0;
};

/// Ratio of the McDiarmid diameter to the ordinary diameter. For a function
/// on an m-fold product it always lies in [1/sqrt(m), sqrt(m)].
class SeparabilityCoefficient {
 public:
  SeparabilityCoefficient(double value, std::size_t m);

  double value() const noexcept { return value_; }
  std::size_t coordinates() const noexcept { return m_; }

 private:
  double value_;
  std::size_t m_;
};

/// Lipschitz constant of F for the l1 product metric, together with the l2
/// combination of the coordinate-space diameters.
struct LipschitzData {
  LipschitzData(double lip, double space_diameter);
  // Builds the space diameter from the per-coordinate metric diameters.
  static LipschitzData from_coordinates(double lip,
                                        std::span<const double> coordinate_diameters);

  double lip;
  double space_diameter;
};

McDiarmidDiameter mcdiarmid_diameter(const PartialDiameters& partials);

/// r_t = (D / sqrt 2) sqrt(log 1/t), the deviation exceeded with probability
/// at most t. Requires 0 < t < 1.
double deviation_radius(McDiarmidDiameter d, double t);

/// exp(-2 r^2 / D^2), clamped to [0, 1]. For D = 0 the variable is a.s.
/// constant: 1 at r = 0 and 0 for r > 0.
double mcdiarmid_tail_bound(McDiarmidDiameter d, double r);

/// exp(-r^2 / (2 |F|^2 D_X^2)) with the same zero-diameter conventions.
double lipschitz_tail_bound(const LipschitzData& lip, double r);

/// 2 |F| D_X: the diameter to plug into the McDiarmid-based tests when only
/// Lipschitz information is available.
McDiarmidDiameter lipschitz_effective_diameter(const LipschitzData& lip);

/// Square table of pairwise distances between sample points, row-major.
class DistanceTable {
 public:
  DistanceTable(std::size_t n, std::vector<double> entries);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

/// Largest difference quotient (F(x_i) - F(x_k)) / d(x_i, x_k) over pairs of
/// distinct points. Pairs at distance zero are skipped; if every pair is at
/// distance zero the coefficient is undefined and DegenerateInput is thrown.
double empirical_lipschitz(std::span<const double> values, const DistanceTable& distances);

/// c_F = D_mcd / D_usual. `m` is the number of product coordinates the
/// McDiarmid diameter was computed against.
SeparabilityCoefficient separability_coefficient(McDiarmidDiameter mcd, double usual,
                                                 std::size_t m);

}  // namespace concert
