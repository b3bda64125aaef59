#include "concert/testing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
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

double sample_mean(std::span<const double> samples, const char* what) {
  if (samples.empty()) throw InvalidInput(std::string(what) + " sample set is empty");
  for (double v : samples) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " samples must be finite");
  }
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

// Smallest n for which the interval built with statistic diameter
// unit_prime / sqrt(n) is nonempty.
std::optional<long long> minimal_feasible_n(const TestSpec& spec, McDiarmidDiameter d,
                                            McDiarmidDiameter unit_prime) {
  const double slack = spec.a - spec.a_prime - deviation_radius(d, spec.p) -
                       deviation_radius(d, 1.0 - spec.p);
  if (!(slack > 0.0)) return std::nullopt;
  const double per_unit =
      deviation_radius(unit_prime, spec.delta1) + deviation_radius(unit_prime, spec.delta2);
  auto feasible_at = [&](long long n) {
    const McDiarmidDiameter dp(unit_prime.value() / std::sqrt(static_cast<double>(n)));
    return feasible_interval(spec, d, dp).feasible();
  };
  const double guess = std::ceil((per_unit / slack) * (per_unit / slack));
  if (!(guess < 4e18)) return std::nullopt;
  long long n = std::max(1LL, static_cast<long long>(guess));
  for (int i = 0; i < 64 && !feasible_at(n); ++i) ++n;
  if (!feasible_at(n)) return std::nullopt;
  while (n > 1 && feasible_at(n - 1)) --n;
  return n;
}

[[noreturn]] void throw_infeasible(const FeasibleInterval& iv, std::optional<long long> n_hint,
                                   bool with_hint) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "acceptance interval is empty: lower end " << iv.lo << " exceeds upper end " << iv.hi
      << " (deficit " << iv.deficit() << ")";
  if (with_hint) {
    if (n_hint) {
      msg << "; feasible from n = " << *n_hint;
    } else {
      msg << "; no sample size suffices because a - a' <= r_p + r_{1-p}";
    }
  }
  throw Infeasible(msg.str(), iv.deficit(), n_hint);
}

}  // namespace

PerformanceHypothesis::PerformanceHypothesis(double a_, double p_) : a(a_), p(p_) {
  if (!std::isfinite(a)) throw InvalidInput("threshold a must be finite");
  require_open_unit(p, "p");
}

void TestSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(a_prime)) {
    throw InvalidInput("thresholds a and a' must be finite");
  }
  if (a_prime > a) throw InvalidInput("a' must not exceed a");
  require_open_unit(p, "p");
  require_open_unit(delta1, "delta1");
  require_open_unit(delta2, "delta2");
  if (b_policy.kind == BPolicyKind::explicit_value && !std::isfinite(b_policy.value)) {
    throw InvalidInput("explicit acceptance point b must be finite");
  }
}

double mean_bound(HypothesisSide side, double a, double p, McDiarmidDiameter d) {
  require_open_unit(p, "p");
  if (side == HypothesisSide::null) return a - deviation_radius(d, p);
  return a + deviation_radius(d, 1.0 - p);
}

FeasibleInterval feasible_interval(const TestSpec& spec, McDiarmidDiameter d,
                                   McDiarmidDiameter d_prime) {
  spec.validate();
  const double lo =
      spec.a_prime + deviation_radius(d, 1.0 - spec.p) + deviation_radius(d_prime, spec.delta2);
  const double hi = spec.a - deviation_radius(d, spec.p) - deviation_radius(d_prime, spec.delta1);
  return {lo, hi};
}

double choose_b(const BPolicy& policy, const FeasibleInterval& interval) {
  switch (policy.kind) {
    case BPolicyKind::left_endpoint:
      return interval.lo;
    case BPolicyKind::right_endpoint:
      return interval.hi;
    case BPolicyKind::midpoint:
      return interval.lo + (interval.hi - interval.lo) / 2.0;
    case BPolicyKind::explicit_value:
      if (!interval.contains(policy.value)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "acceptance point b = " << policy.value << " lies outside [" << interval.lo << ", "
            << interval.hi << "]";
        throw InvalidPolicy(msg.str());
      }
      return policy.value;
  }
  throw InvalidPolicy("unknown b policy");
}

TestOutcome run_generic_test(const TestSpec& spec, McDiarmidDiameter d,
                             McDiarmidDiameter d_prime, double statistic) {
  if (!std::isfinite(statistic)) throw InvalidInput("test statistic must be finite");
  const FeasibleInterval iv = feasible_interval(spec, d, d_prime);
  if (!iv.feasible()) throw_infeasible(iv, std::nullopt, false);

  TestOutcome out;
  out.interval = iv;
  out.b = choose_b(spec.b_policy, iv);
  out.statistic = statistic;
  out.accepted = statistic >= out.b;
  const double null_gap = (spec.a - deviation_radius(d, spec.p)) - out.b;
  const double alt_gap = out.b - (spec.a_prime + deviation_radius(d, 1.0 - spec.p));
  out.type1_bound = mcdiarmid_tail_bound(d_prime, std::max(0.0, null_gap));
  out.type2_bound = mcdiarmid_tail_bound(d_prime, std::max(0.0, alt_gap));
  return out;
}

TestOutcome validation_test(std::span<const double> samples, const TestSpec& spec,
                            McDiarmidDiameter d) {
  const double mean = sample_mean(samples, "validation");
  spec.validate();
  const double n = static_cast<double>(samples.size());
  const McDiarmidDiameter d_prime(d.value() / std::sqrt(n));
  const FeasibleInterval iv = feasible_interval(spec, d, d_prime);
  if (!iv.feasible()) throw_infeasible(iv, minimal_feasible_n(spec, d, d), true);
  return run_generic_test(spec, d, d_prime, mean);
}

double certification_radius(McDiarmidDiameter d1, McDiarmidDiameter d2, std::size_t n1,
                            std::size_t n2, double t) {
  if (n1 == 0 || n2 == 0) throw InvalidInput("sample sizes must be positive");
  const double v1 = d1.value() * d1.value() / static_cast<double>(n1);
  const double v2 = d2.value() * d2.value() / static_cast<double>(n2);
  return deviation_radius(McDiarmidDiameter(std::sqrt(v1 + v2)), t);
}

bool unbalanced_radius_applicable(McDiarmidDiameter d1, McDiarmidDiameter d2, std::size_t n1,
                                  std::size_t n2) {
  // n2 >= (D2 / D1) n1 written without the division so D1 = D2 = 0 passes.
  return d2.value() <= d1.value() &&
         static_cast<double>(n2) * d1.value() >= d2.value() * static_cast<double>(n1);
}

CertificationOutcome certification_test(std::span<const double> model_samples,
                                        std::span<const double> deviation_samples,
                                        const TestSpec& spec, McDiarmidDiameter d1,
                                        McDiarmidDiameter d2, CertificationRadius radius) {
  const double m1 = sample_mean(model_samples, "model");
  const double m2 = sample_mean(deviation_samples, "deviation");
  spec.validate();
  const std::size_t n1 = model_samples.size();
  const std::size_t n2 = deviation_samples.size();

  CertificationOutcome out;
  out.unbalanced_applicable = unbalanced_radius_applicable(d1, d2, n1, n2);
  out.radius_used = radius;

  McDiarmidDiameter d_prime;
  McDiarmidDiameter unit_prime;  // statistic diameter at n1 = n2 = 1
  if (radius == CertificationRadius::unbalanced) {
    if (!out.unbalanced_applicable) {
      throw InvalidInput(
          "unbalanced certification radius requires D2 <= D1 and n2 >= (D2/D1) n1");
    }
    out.total_diameter = McDiarmidDiameter(2.0 * d1.value());
    d_prime = McDiarmidDiameter(d1.value() * std::sqrt(2.0 / static_cast<double>(n1)));
    unit_prime = McDiarmidDiameter(d1.value() * std::sqrt(2.0));
  } else {
    out.total_diameter = McDiarmidDiameter(d1.value() + d2.value());
    const double v = d1.value() * d1.value() / static_cast<double>(n1) +
                     d2.value() * d2.value() / static_cast<double>(n2);
    d_prime = McDiarmidDiameter(std::sqrt(v));
    unit_prime = McDiarmidDiameter(std::hypot(d1.value(), d2.value()));
  }
  out.rho_delta1 = deviation_radius(d_prime, spec.delta1);
  out.rho_delta2 = deviation_radius(d_prime, spec.delta2);

  const FeasibleInterval iv = feasible_interval(spec, out.total_diameter, d_prime);
  if (!iv.feasible()) {
    // The sample-size hint assumes balanced sampling n1 = n2 = n.
    throw_infeasible(iv, minimal_feasible_n(spec, out.total_diameter, unit_prime), true);
  }
  out.outcome = run_generic_test(spec, out.total_diameter, d_prime, m1 + m2);
  return out;
}

QmuReport qmu_report(std::span<const double> samples, double a_prime, McDiarmidDiameter d,
                     double p, double delta2) {
  const double mean = sample_mean(samples, "QMU");
  if (!(d.value() > 0.0)) throw DegenerateInput("QMU uncertainty needs a positive diameter");
  if (!std::isfinite(a_prime)) throw InvalidInput("a' must be finite");
  require_open_unit(p, "p");
  require_open_unit(delta2, "delta2");
  const double n = static_cast<double>(samples.size());

  QmuReport r;
  r.margin = mean - a_prime;
  r.uncertainty = d.value();
  r.ratio = r.margin / r.uncertainty;
  r.required_ratio = std::sqrt(0.5 * -std::log(1.0 - p)) +
                     std::sqrt(-std::log(delta2)) / std::sqrt(2.0 * n);
  r.confidence = delta2;
  r.holds = r.ratio >= r.required_ratio;
  return r;
}

}  // namespace concert
