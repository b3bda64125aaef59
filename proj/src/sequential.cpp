#include "concert/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "concert/errors.hpp"
#include "concert/quantiles.hpp"

namespace concert {
namespace {

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw InvalidInput(std::string(what) + " must lie in (0,1), got " + std::to_string(v));
  }
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(what) + " must be positive and finite");
  }
}

double sqrt_log_inv(double t) { return std::sqrt(std::log(1.0 / t)); }

struct SampleSummary {
  double mean;
  double range;
};

SampleSummary summarize(std::span<const double> samples, const char* what) {
  if (samples.empty()) throw InvalidInput(std::string(what) + " sample set is empty");
  for (double v : samples) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " samples must be finite");
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                      static_cast<double>(samples.size());
  return {mean, *hi - *lo};
}

void validate_common(double a, double a_prime, double p, double delta1, double delta2,
                     double eps) {
  if (!std::isfinite(a) || !std::isfinite(a_prime)) throw InvalidInput("thresholds must be finite");
  if (a_prime > a) throw InvalidInput("a' must not exceed a");
  require_open_unit(p, "p");
  require_open_unit(delta1, "delta1");
  require_open_unit(delta2, "delta2");
  require_positive(eps, "inflation eps");
}

DeltaSource delta_source_from(std::vector<std::optional<double>> taus,
                              std::vector<std::size_t> sizes, std::optional<double> assumed) {
  DeltaSource src;
  src.assumed = assumed;
  if (std::all_of(taus.begin(), taus.end(), [](const auto& t) { return t.has_value(); })) {
    TailCertificate cert;
    for (const auto& t : taus) cert.tau.push_back(*t);
    cert.sample_sizes = std::move(sizes);
    src.tails = std::move(cert);
  }
  return src;
}

}  // namespace

const char* StopOptionOutcome::code() const noexcept {
  if (!stage1_) return "0";
  return *stage2_ ? "(1,1)" : "(1,0)";
}

EstimatedDiameterVector::EstimatedDiameterVector(std::vector<double> empirical_,
                                                 double inflation_)
    : empirical(std::move(empirical_)), inflation(inflation_) {
  if (empirical.empty()) throw InvalidInput("diameter vector needs at least one entry");
  for (double v : empirical) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("empirical diameters must be finite and non-negative");
    }
  }
  require_positive(inflation, "inflation eps");
}

std::vector<double> EstimatedDiameterVector::inflated() const {
  std::vector<double> out(empirical);
  for (double& v : out) v *= 1.0 + inflation;
  return out;
}

InversionThresholds inversion_thresholds(double a, double a_prime, double p, double delta,
                                         McDiarmidDiameter d, McDiarmidDiameter d_prime) {
  require_open_unit(p, "p");
  require_open_unit(delta, "delta");
  const double shared = deviation_radius(d_prime, delta);
  return {deviation_radius(d, p) + shared - a, deviation_radius(d, 1.0 - p) + shared + a_prime};
}

double delta_inflation_bound(std::span<const double> failure_probs) {
  double sum = 0.0;
  for (double v : failure_probs) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("failure probabilities must lie in [0,1]");
    sum += v;
  }
  return std::min(1.0, sum);
}

void check_monotone(const ThresholdFunctions& f, std::span<const double> point) {
  std::vector<double> bumped(point.begin(), point.end());
  const double h0 = f.f_h(point);
  const double k0 = f.f_k(point);
  if (!std::isfinite(h0) || !std::isfinite(k0)) {
    throw ContractViolation("threshold functions returned a non-finite value");
  }
  for (std::size_t j = 0; j < bumped.size(); ++j) {
    const double original = bumped[j];
    bumped[j] = original + 1e-6 * std::max(1.0, std::abs(original));
    const double h1 = f.f_h(bumped);
    const double k1 = f.f_k(bumped);
    bumped[j] = original;
    if (h1 < h0 - 1e-12 * std::max(1.0, std::abs(h0)) ||
        k1 < k0 - 1e-12 * std::max(1.0, std::abs(k0))) {
      throw ContractViolation("threshold function decreases in diameter coordinate " +
                              std::to_string(j));
    }
  }
}

StopOptionResult generic_stop_option(const ThresholdFunctions& f,
                                     const EstimatedDiameterVector& diameters, double statistic,
                                     double delta1, double delta2,
                                     const DeltaSource& delta_source) {
  if (!f.f_h || !f.f_k) throw InvalidInput("threshold functions are not set");
  if (diameters.empirical.size() != f.k) {
    throw InvalidInput("diameter vector length does not match threshold arity");
  }
  if (!std::isfinite(statistic)) throw InvalidInput("statistic must be finite");
  require_open_unit(delta1, "delta1");
  require_open_unit(delta2, "delta2");

  StopOptionResult r;
  r.statistic = statistic;
  r.inflated = diameters.inflated();
  check_monotone(f, r.inflated);
  r.f_h = f.f_h(r.inflated);
  r.f_k = f.f_k(r.inflated);

  // Stage 1 is non-strict, stage 2 strict.
  if (r.f_h + r.f_k <= 0.0) {
    r.outcome = StopOptionOutcome::continued(statistic > -r.f_h);
  } else {
    r.outcome = StopOptionOutcome::stopped();
  }

  if (delta_source.tails) {
    const TailCertificate& cert = *delta_source.tails;
    if (cert.tau.size() != f.k || cert.sample_sizes.size() != f.k) {
      throw InvalidInput("tail certificate must list one tau and one sample size per observable");
    }
    std::vector<double> failures;
    r.sample_size_certified = true;
    for (std::size_t j = 0; j < f.k; ++j) {
      failures.push_back(diameter_underestimate_bound(cert.sample_sizes[j], cert.tau[j]));
      const std::size_t need = std::max(required_sample_size(f.k, cert.tau[j], delta1),
                                        required_sample_size(f.k, cert.tau[j], delta2));
      r.required_sizes.push_back(need);
      if (cert.sample_sizes[j] < need) r.sample_size_certified = false;
    }
    r.delta_inflation = delta_inflation_bound(failures);
  } else if (delta_source.assumed) {
    const double d = *delta_source.assumed;
    if (!(d >= 0.0 && d <= 1.0)) throw InvalidInput("assumed Delta must lie in [0,1]");
    r.delta_inflation = d;
  }

  r.bounds.theta1 = 0.0;
  if (r.delta_inflation) {
    r.bounds.theta11 = std::min(1.0, delta1 + *r.delta_inflation);
    r.bounds.theta12 = std::min(1.0, delta2 + *r.delta_inflation);
    if (r.sample_size_certified) {
      // Delta <= min(delta1, delta2) once every n_j is large enough.
      r.bounds.theta11 = std::min(r.bounds.theta11, 2.0 * delta1);
      r.bounds.theta12 = std::min(r.bounds.theta12, 2.0 * delta2);
    }
  } else {
    r.bounds.theta11 = delta1;
    r.bounds.theta12 = delta2;
  }
  return r;
}

std::optional<bool> basic_admissible_test(double g_h, double g_k, double statistic) {
  if (g_h + g_k > 0.0) return std::nullopt;
  return statistic > -g_h;
}

ThresholdFunctions validation_thresholds(const EstimatedValidationParams& q, std::size_t n) {
  validate_common(q.a, q.a_prime, q.p, q.delta1, q.delta2, q.eps);
  require_positive(q.c, "separability bound c");
  if (n == 0) throw InvalidInput("sample size must be positive");
  const double nd = static_cast<double>(n);
  const double h_scale = q.c * (sqrt_log_inv(q.p) / std::sqrt(2.0) +
                                sqrt_log_inv(q.delta1) / std::sqrt(2.0 * nd));
  const double k_scale = q.c * (sqrt_log_inv(1.0 - q.p) / std::sqrt(2.0) +
                                sqrt_log_inv(q.delta2) / std::sqrt(2.0 * nd));
  ThresholdFunctions f;
  f.k = 1;
  f.f_h = [h_scale, a = q.a](std::span<const double> r) { return h_scale * r[0] - a; };
  f.f_k = [k_scale, ap = q.a_prime](std::span<const double> r) { return k_scale * r[0] + ap; };
  return f;
}

StopOptionResult validation_test_estimated(std::span<const double> samples,
                                           const EstimatedValidationParams& params) {
  const SampleSummary s = summarize(samples, "validation");
  const ThresholdFunctions f = validation_thresholds(params, samples.size());
  const EstimatedDiameterVector dhat({s.range}, params.eps);
  return generic_stop_option(f, dhat, s.mean, params.delta1, params.delta2,
                             delta_source_from({params.tau}, {samples.size()},
                                               params.assumed_delta));
}

ThresholdFunctions certification_thresholds(const EstimatedCertificationParams& q,
                                            std::size_t n1, std::size_t n2) {
  validate_common(q.a, q.a_prime, q.p, q.delta1, q.delta2, q.eps);
  require_positive(q.c1, "separability bound c1");
  require_positive(q.c2, "separability bound c2");
  if (n1 == 0 || n2 == 0) throw InvalidInput("sample sizes must be positive");
  const double n1d = static_cast<double>(n1);
  const double n2d = static_cast<double>(n2);

  // The first term carries no 1/sqrt(2), unlike the known-diameter radius;
  // this is the larger, conservative form.
  auto make = [=](double level, double delta, double offset) {
    const double lvl = sqrt_log_inv(level);
    const double log_delta = std::log(1.0 / delta);
    return [=, c1 = q.c1, c2 = q.c2](std::span<const double> s) {
      const double t1 = c1 * s[0];
      const double t2 = c2 * s[1];
      const double spread = t1 * t1 / (2.0 * n1d) + t2 * t2 / (2.0 * n2d);
      return (t1 + t2) * lvl + std::sqrt(spread * log_delta) + offset;
    };
  };
  ThresholdFunctions f;
  f.k = 2;
  f.f_h = make(q.p, q.delta1, -q.a);
  f.f_k = make(1.0 - q.p, q.delta2, q.a_prime);
  return f;
}

StopOptionResult certification_test_estimated(std::span<const double> model_samples,
                                              std::span<const double> deviation_samples,
                                              const EstimatedCertificationParams& params) {
  const SampleSummary m = summarize(model_samples, "model");
  const SampleSummary d = summarize(deviation_samples, "deviation");
  const ThresholdFunctions f =
      certification_thresholds(params, model_samples.size(), deviation_samples.size());
  const EstimatedDiameterVector dhat({m.range, d.range}, params.eps);
  return generic_stop_option(
      f, dhat, m.mean + d.mean, params.delta1, params.delta2,
      delta_source_from({params.tau1, params.tau2},
                        {model_samples.size(), deviation_samples.size()}, params.assumed_delta));
}

}  // namespace concert
