#include "concert/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "concert/errors.hpp"

namespace concert {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw InvalidInput(std::string(what) + " must lie in (0,1), got " + std::to_string(v));
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw InvalidInput("empirical distribution needs at least one sample");
  for (double v : sorted_) {
    if (!std::isfinite(v)) throw InvalidInput("samples must be finite");
  }
  std::sort(sorted_.begin(), sorted_.end());
  mean_ = std::accumulate(sorted_.begin(), sorted_.end(), 0.0) /
          static_cast<double>(sorted_.size());
}

double EmpiricalDistribution::cdf(double x) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double EmpiricalDistribution::cdf_left(double x) const {
  const auto count = std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double EmpiricalDistribution::quantile(double q) const {
  require_open_unit(q, "quantile level");
  const std::size_t n = sorted_.size();
  const double nd = static_cast<double>(n);
  // Smallest k with k/n >= q, evaluated with the same division cdf() uses so
  // that F_n(x) >= q  <=>  x >= quantile(q) holds exactly.
  auto k = static_cast<std::size_t>(std::ceil(nd * q));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && static_cast<double>(k - 1) / nd >= q) --k;
  while (k < n && static_cast<double>(k) / nd < q) ++k;
  return sorted_[k - 1];
}

std::array<double, 3> quantile_exceedance_bounds(std::size_t n, double f_xi, double q,
                                                 QuantileSide side) {
  if (n == 0) throw InvalidInput("sample size must be positive");
  require_open_unit(q, "quantile level q");
  if (!(f_xi >= 0.0 && f_xi <= 1.0)) throw InvalidInput("F(xi) must lie in [0,1]");
  const double nd = static_cast<double>(n);

  if (side == QuantileSide::above) {
    if (!(f_xi > q)) {
      throw InvalidInput("side 'above' requires F(xi) > q (xi strictly above the q-quantile)");
    }
    const double d = f_xi - q;
    return {clamp01(std::exp(-2.0 * nd * d * d)),
            clamp01(std::exp(-nd * d * d / (2.0 * (1.0 - f_xi) + 2.0 * d / 3.0))),
            clamp01(std::exp(-nd * d * d / (2.0 * f_xi)))};
  }
  if (!(f_xi < q)) {
    throw InvalidInput("side 'below' requires F(xi) < q (xi strictly below the q-quantile)");
  }
  const double d = q - f_xi;
  return {clamp01(std::exp(-2.0 * nd * d * d)),
          clamp01(std::exp(-nd * d * d / (2.0 * f_xi + 2.0 * d / 3.0))),
          clamp01(std::exp(-nd * d * d / (2.0 * (1.0 - f_xi))))};
}

double empirical_range_bound(std::size_t n, double p) {
  if (n == 0) throw InvalidInput("sample size must be positive");
  require_open_unit(p, "p");
  return std::min(1.0, 2.0 * std::exp(-static_cast<double>(n) * (1.0 - p) / 2.0));
}

double empirical_supremum_bound(std::size_t n, double p) {
  if (n == 0) throw InvalidInput("sample size must be positive");
  require_open_unit(p, "p");
  return std::min(1.0, std::exp(-static_cast<double>(n) * (1.0 - p) / 2.0));
}

double cdf_at(const CdfDescription& desc, double x) {
  return std::visit(
      overloaded{
          [x](const UniformCdf& u) {
            if (x < u.lo) return 0.0;
            if (x >= u.hi) return 1.0;
            return (x - u.lo) / (u.hi - u.lo);
          },
          [x](const PowerTailCdf& p) {
            if (x < p.lo) return 0.0;
            if (x >= p.hi) return 1.0;
            return std::pow((x - p.lo) / (p.hi - p.lo), p.kappa);
          },
          [x](const TwoAtomCdf& t) {
            if (x < t.lo) return 0.0;
            if (x < t.hi) return 1.0 - t.p_high;
            return 1.0;
          },
          [x](const DiscreteCdf& d) {
            double acc = 0.0;
            for (std::size_t i = 0; i < d.atoms.size() && d.atoms[i] <= x; ++i) acc += d.probs[i];
            return clamp01(acc);
          },
          [x](const CallableCdf& c) { return clamp01(c.cdf(x)); },
      },
      desc);
}

std::array<double, 2> support(const CdfDescription& desc) {
  return std::visit(
      overloaded{
          [](const UniformCdf& u) { return std::array{u.lo, u.hi}; },
          [](const PowerTailCdf& p) { return std::array{p.lo, p.hi}; },
          [](const TwoAtomCdf& t) {
            if (t.p_high <= 0.0) return std::array{t.lo, t.lo};
            if (t.p_high >= 1.0) return std::array{t.hi, t.hi};
            return std::array{t.lo, t.hi};
          },
          [](const DiscreteCdf& d) {
            if (d.atoms.size() != d.probs.size() || d.atoms.empty()) {
              throw InvalidInput("discrete CDF needs matching, nonempty atoms and probs");
            }
            std::size_t first = 0;
            while (first < d.probs.size() && d.probs[first] <= 0.0) ++first;
            std::size_t last = d.probs.size();
            while (last > 0 && d.probs[last - 1] <= 0.0) --last;
            if (first >= last) throw InvalidInput("discrete CDF carries no mass");
            return std::array{d.atoms[first], d.atoms[last - 1]};
          },
          [](const CallableCdf& c) { return std::array{c.lo, c.hi}; },
      },
      desc);
}

double tail_lower_bound(const std::function<double(double)>& cdf, double x_minus,
                        double x_plus, double eps) {
  if (!std::isfinite(x_minus) || !std::isfinite(x_plus)) {
    throw InvalidInput("tail bound needs finite essential bounds");
  }
  if (x_minus > x_plus) throw InvalidInput("essential infimum exceeds essential supremum");
  if (!(eps > 0.0)) throw InvalidInput("inflation eps must be positive");
  const double d = x_plus - x_minus;
  if (d == 0.0) return 1.0;
  // eps = inf is allowed and gives u = 1/2.
  const double u = std::isinf(eps) ? 0.5 : eps / (2.0 * (1.0 + eps));
  const double lower = cdf(x_minus + u * d);
  const double upper = 1.0 - cdf(x_plus - u * d);
  return clamp01(std::min(lower, upper));
}

double tail_lower_bound(const CdfDescription& desc, double eps) {
  const auto [lo, hi] = support(desc);
  return tail_lower_bound([&desc](double x) { return cdf_at(desc, x); }, lo, hi, eps);
}

double tail_lower_bound_positive(const CdfDescription& desc, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("inflation eps must be positive");
  const auto [lo, hi] = support(desc);
  if (lo < 0.0) throw InvalidInput("one-sided tail function needs a non-negative variable");
  if (hi == 0.0) return 1.0;
  return clamp01(1.0 - cdf_at(desc, hi / (1.0 + eps)));
}

double diameter_underestimate_bound(std::size_t n, double tau, bool one_sided) {
  if (n == 0) throw InvalidInput("sample size must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw InvalidInput("tail value tau must lie in (0,1]; tau <= 0 makes the bound vacuous");
  }
  const double factor = one_sided ? 1.0 : 2.0;
  return std::min(1.0, factor * std::exp(-static_cast<double>(n) * tau / 2.0));
}

std::size_t required_sample_size(std::size_t k, double tau, double delta) {
  if (k == 0) throw InvalidInput("number of observables k must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("tail value tau must lie in (0,1]");
  require_open_unit(delta, "delta");
  const double x = 2.0 * std::log(2.0 * static_cast<double>(k) / delta) / tau;
  // Snap values that are integers up to rounding (e.g. delta = 2/e^2, tau = 1)
  // so the log/exp round trip does not add a spurious sample.
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::size_t>(std::max(1.0, nearest));
  }
  return static_cast<std::size_t>(std::max(1.0, std::ceil(x)));
}

}  // namespace concert
