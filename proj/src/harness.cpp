#include "concert/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "concert/errors.hpp"
#include "concert/extrapolation.hpp"
#include "concert/sequential.hpp"
#include "concert/testing.hpp"

namespace concert {
namespace {

constexpr std::size_t kMaxTableCells = 100'000'000;
constexpr double kGapSlack = 1.0 + 1e-9;

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw InvalidInput(std::string(what) + " must lie in (0,1), got " + std::to_string(v));
  }
}

double unit_ball_orthant_volume(std::size_t m) {
  const double md = static_cast<double>(m);
  return std::pow(std::numbers::pi, md / 2.0) / std::tgamma(md / 2.0 + 1.0) / std::pow(2.0, md);
}

// P(U_1 ... U_m <= t) for i.i.d. uniforms.
double uniform_product_cdf(std::size_t m, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double l = -std::log(t);
  double term = 1.0;
  double sum = 1.0;
  for (std::size_t k = 1; k < m; ++k) {
    term *= l / static_cast<double>(k);
    sum += term;
  }
  return std::min(1.0, t * sum);
}

std::size_t checked_cells(std::size_t side, std::size_t m) {
  std::size_t cells = 1;
  for (std::size_t j = 0; j < m; ++j) {
    if (cells > kMaxTableCells / side) throw ResourceError("grid too large to tabulate");
    cells *= side;
  }
  return cells;
}

// Digits of a row-major index on a cube grid, last coordinate fastest.
void decode(std::size_t index, std::size_t side, std::vector<std::size_t>& digits) {
  for (std::size_t j = digits.size(); j-- > 0;) {
    digits[j] = index % side;
    index /= side;
  }
}

std::vector<double> draw(const GroundTruthFamily& f, Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = f.sample(rng);
  return out;
}

std::vector<double> draw_uniform(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> out(n);
  for (double& v : out) v = rng.uniform(lo, hi);
  return out;
}

// a - a' at which the acceptance interval shrinks to (nearly) a point.
double tight_gap(double p, double delta1, double delta2, McDiarmidDiameter d,
                 McDiarmidDiameter d_prime) {
  TestSpec probe;
  probe.p = p;
  probe.delta1 = delta1;
  probe.delta2 = delta2;
  return feasible_interval(probe, d, d_prime).deficit() * kGapSlack;
}

GroundTruthFamily shaped_law(BoundaryShape shape, double width) {
  return shape == BoundaryShape::two_atom ? GroundTruthFamily::two_atom(0.0, width, 0.5)
                                          : GroundTruthFamily::shifted_uniform_pair(0.0, width);
}

const char* shape_name(BoundaryShape shape) {
  return shape == BoundaryShape::two_atom ? "two-atom" : "shifted-uniform";
}

std::string suffix(const ScenarioParams& q) {
  return std::string("/") + shape_name(q.shape) + "/n=" + std::to_string(q.n);
}

SideRate rate(std::size_t errors, std::size_t trials, double claimed) {
  SideRate s;
  s.errors = errors;
  s.observed = static_cast<double>(errors) / static_cast<double>(trials);
  s.claimed = claimed;
  const double c = std::clamp(claimed, 0.0, 1.0);
  s.std_err = std::sqrt(c * (1.0 - c) / static_cast<double>(trials));
  s.pass = s.observed <= claimed + kSlackSigmas * s.std_err;
  return s;
}

}  // namespace

const char* to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::separable_sum: return "separable-sum";
    case FamilyKind::euclidean_indicator: return "euclidean-indicator";
    case FamilyKind::uniform_product: return "uniform-product";
    case FamilyKind::two_atom: return "two-atom";
    case FamilyKind::shifted_uniform_pair: return "shifted-uniform-pair";
  }
  return "unknown";
}

McDiarmidReport brute_force_mcdiarmid(const FunctionTable& table, std::size_t budget) {
  const std::size_t m = table.shape.size();
  if (m == 0) throw InvalidInput("function table needs at least one coordinate");
  std::size_t cells = 1;
  for (std::size_t s : table.shape) {
    if (s == 0) throw InvalidInput("every grid axis needs at least one point");
    cells *= s;
  }
  if (cells != table.values.size()) {
    throw InvalidInput("function table holds " + std::to_string(table.values.size()) +
                       " values for a grid of " + std::to_string(cells) + " cells");
  }
  for (double v : table.values) {
    if (!std::isfinite(v)) throw InvalidInput("function table values must be finite");
  }

  // Pairs that differ in exactly coordinate j: N (s_j - 1) / 2 per coordinate.
  double pairs = 0.0;
  for (std::size_t s : table.shape) {
    pairs += static_cast<double>(cells) * static_cast<double>(s - 1) / 2.0;
  }
  if (pairs > static_cast<double>(budget)) {
    throw ResourceError("brute-force diameter needs " + std::to_string(pairs) +
                        " comparisons, budget is " + std::to_string(budget));
  }

  std::vector<double> partials(m, 0.0);
  std::size_t stride = 1;
  for (std::size_t j = m; j-- > 0;) {
    const std::size_t s = table.shape[j];
    const std::size_t block = stride * s;
    double worst = 0.0;
    // Each line along j starts at an index whose j-th digit is zero. The
    // largest pairwise change on a line is its max minus its min.
    for (std::size_t outer = 0; outer < cells; outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t start = outer + inner;
        double lo = table.values[start];
        double hi = lo;
        for (std::size_t t = 1; t < s; ++t) {
          const double v = table.values[start + t * stride];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        worst = std::max(worst, hi - lo);
      }
    }
    partials[j] = worst;
    stride = block;
  }

  const auto [lo, hi] = std::minmax_element(table.values.begin(), table.values.end());
  const double usual = *hi - *lo;
  if (usual == 0.0) throw DegenerateInput("constant table: separability coefficient undefined");

  double squared = 0.0;
  for (double v : partials) squared += v * v;
  PartialDiameters pd(partials);
  const McDiarmidDiameter mcd = mcdiarmid_diameter(pd);
  return {std::move(pd), mcd, squared, usual, separability_coefficient(mcd, usual, m)};
}

GroundTruthFamily GroundTruthFamily::separable_sum(std::size_t m, double weight, double q) {
  if (m == 0) throw InvalidInput("separable sum needs m >= 1");
  if (!(weight > 0.0) || !std::isfinite(weight)) throw InvalidInput("weight must be positive");
  require_open_unit(q, "Bernoulli parameter q");
  return GroundTruthFamily(FamilyKind::separable_sum, m, {weight, q});
}

GroundTruthFamily GroundTruthFamily::euclidean_indicator(std::size_t m) {
  if (m == 0) throw InvalidInput("Euclidean indicator needs m >= 1");
  return GroundTruthFamily(FamilyKind::euclidean_indicator, m, {});
}

GroundTruthFamily GroundTruthFamily::uniform_product(std::size_t m, double lo, double hi) {
  if (m == 0) throw InvalidInput("uniform product needs m >= 1");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidInput("uniform product needs finite lo < hi");
  }
  return GroundTruthFamily(FamilyKind::uniform_product, m, {lo, hi});
}

GroundTruthFamily GroundTruthFamily::two_atom(double lo, double hi, double p_high) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidInput("two-atom law needs finite lo <= hi");
  }
  if (!(p_high >= 0.0 && p_high <= 1.0)) throw InvalidInput("p_high must lie in [0,1]");
  return GroundTruthFamily(FamilyKind::two_atom, 1, {lo, hi, p_high});
}

GroundTruthFamily GroundTruthFamily::shifted_uniform_pair(double lo, double length,
                                                          double shift) {
  if (!(length > 0.0) || !std::isfinite(lo) || !std::isfinite(length) || !std::isfinite(shift)) {
    throw InvalidInput("shifted uniform pair needs finite lo, shift and positive length");
  }
  return GroundTruthFamily(FamilyKind::shifted_uniform_pair, 1, {lo, length, shift});
}

double GroundTruthFamily::essential_diameter() const {
  switch (kind_) {
    case FamilyKind::separable_sum: return params_[0] * static_cast<double>(m_);
    case FamilyKind::euclidean_indicator: return 1.0;
    case FamilyKind::uniform_product: return params_[1] - params_[0];
    case FamilyKind::two_atom: {
      const double p = params_[2];
      return (p > 0.0 && p < 1.0) ? params_[1] - params_[0] : 0.0;
    }
    case FamilyKind::shifted_uniform_pair: return params_[1];
  }
  return 0.0;
}

PartialDiameters GroundTruthFamily::partial_diameters() const {
  switch (kind_) {
    case FamilyKind::separable_sum: return PartialDiameters(std::vector<double>(m_, params_[0]));
    case FamilyKind::euclidean_indicator: return PartialDiameters(std::vector<double>(m_, 1.0));
    case FamilyKind::uniform_product:
      return PartialDiameters(std::vector<double>(m_, params_[1] - params_[0]));
    case FamilyKind::two_atom: return PartialDiameters({params_[1] - params_[0]});
    case FamilyKind::shifted_uniform_pair: return PartialDiameters({params_[1]});
  }
  return PartialDiameters({0.0});
}

McDiarmidDiameter GroundTruthFamily::mcdiarmid() const {
  return mcdiarmid_diameter(partial_diameters());
}

double GroundTruthFamily::usual_diameter() const {
  switch (kind_) {
    case FamilyKind::separable_sum: return params_[0] * static_cast<double>(m_);
    case FamilyKind::euclidean_indicator: return 1.0;
    case FamilyKind::uniform_product: return params_[1] - params_[0];
    case FamilyKind::two_atom: return params_[1] - params_[0];
    case FamilyKind::shifted_uniform_pair: return params_[1];
  }
  return 0.0;
}

SeparabilityCoefficient GroundTruthFamily::separability() const {
  const double m = static_cast<double>(m_);
  switch (kind_) {
    case FamilyKind::separable_sum: return SeparabilityCoefficient(1.0 / std::sqrt(m), m_);
    case FamilyKind::euclidean_indicator:
    case FamilyKind::uniform_product: return SeparabilityCoefficient(std::sqrt(m), m_);
    case FamilyKind::two_atom:
      if (params_[1] == params_[0]) throw DegenerateInput("constant law has no separability");
      return SeparabilityCoefficient(1.0, 1);
    case FamilyKind::shifted_uniform_pair: return SeparabilityCoefficient(1.0, 1);
  }
  return SeparabilityCoefficient(1.0, 1);
}

CdfDescription GroundTruthFamily::law() const {
  switch (kind_) {
    case FamilyKind::separable_sum: {
      const double w = params_[0];
      const double q = params_[1];
      DiscreteCdf d;
      for (std::size_t k = 0; k <= m_; ++k) {
        const double kd = static_cast<double>(k);
        const double md = static_cast<double>(m_);
        const double log_choose =
            std::lgamma(md + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(md - kd + 1.0);
        d.atoms.push_back(w * kd);
        d.probs.push_back(std::exp(log_choose + kd * std::log(q) + (md - kd) * std::log1p(-q)));
      }
      return d;
    }
    case FamilyKind::euclidean_indicator: {
      const std::size_t m = m_;
      const double v = unit_ball_orthant_volume(m);
      return CallableCdf{[m, v](double t) {
                           if (t < 0.0) return 0.0;
                           if (t >= 1.0) return 1.0;
                           return (1.0 - v) + v * std::pow(t, static_cast<double>(m));
                         },
                         0.0, 1.0};
    }
    case FamilyKind::uniform_product: {
      if (m_ == 1) return UniformCdf{params_[0], params_[1]};
      const std::size_t m = m_;
      const double lo = params_[0];
      const double width = params_[1] - params_[0];
      return CallableCdf{[m, lo, width](double x) { return uniform_product_cdf(m, (x - lo) / width); },
                         params_[0], params_[1]};
    }
    case FamilyKind::two_atom: return TwoAtomCdf{params_[0], params_[1], params_[2]};
    case FamilyKind::shifted_uniform_pair: return UniformCdf{params_[0], params_[0] + params_[1]};
  }
  return UniformCdf{0.0, 1.0};
}

double GroundTruthFamily::prob_at_least(double a) const {
  switch (kind_) {
    case FamilyKind::separable_sum: {
      const auto d = std::get<DiscreteCdf>(law());
      double acc = 0.0;
      for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        if (d.atoms[i] >= a) acc += d.probs[i];
      }
      return std::min(1.0, acc);
    }
    case FamilyKind::euclidean_indicator: {
      if (a <= 0.0) return 1.0;
      if (a > 1.0) return 0.0;
      return unit_ball_orthant_volume(m_) * (1.0 - std::pow(a, static_cast<double>(m_)));
    }
    case FamilyKind::uniform_product:
      return 1.0 - uniform_product_cdf(m_, (a - params_[0]) / (params_[1] - params_[0]));
    case FamilyKind::two_atom:
      if (a <= params_[0]) return 1.0;
      if (a <= params_[1]) return params_[2];
      return 0.0;
    case FamilyKind::shifted_uniform_pair:
      return std::clamp((params_[0] + params_[1] - a) / params_[1], 0.0, 1.0);
  }
  return 0.0;
}

double GroundTruthFamily::mean() const {
  const double md = static_cast<double>(m_);
  switch (kind_) {
    case FamilyKind::separable_sum: return params_[0] * md * params_[1];
    case FamilyKind::euclidean_indicator: return unit_ball_orthant_volume(m_) * md / (md + 1.0);
    case FamilyKind::uniform_product:
      return params_[0] + (params_[1] - params_[0]) * std::pow(0.5, md);
    case FamilyKind::two_atom: return params_[0] + (params_[1] - params_[0]) * params_[2];
    case FamilyKind::shifted_uniform_pair: return params_[0] + params_[1] / 2.0;
  }
  return 0.0;
}

double GroundTruthFamily::evaluate(std::span<const double> x) const {
  if (x.size() != m_) throw InvalidInput("point has the wrong number of coordinates");
  switch (kind_) {
    case FamilyKind::separable_sum:
      return params_[0] * std::accumulate(x.begin(), x.end(), 0.0);
    case FamilyKind::euclidean_indicator: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s <= 1.0 ? std::sqrt(s) : 0.0;
    }
    case FamilyKind::uniform_product: {
      double prod = 1.0;
      for (double v : x) prod *= v;
      return params_[0] + (params_[1] - params_[0]) * prod;
    }
    case FamilyKind::two_atom: return x[0] >= 0.5 ? params_[1] : params_[0];
    case FamilyKind::shifted_uniform_pair: return params_[0] + params_[1] * x[0];
  }
  return 0.0;
}

double GroundTruthFamily::sample(Rng& rng) const {
  switch (kind_) {
    case FamilyKind::separable_sum: {
      double s = 0.0;
      for (std::size_t j = 0; j < m_; ++j) s += rng.bernoulli(params_[1]) ? 1.0 : 0.0;
      return params_[0] * s;
    }
    case FamilyKind::euclidean_indicator:
    case FamilyKind::uniform_product: {
      std::vector<double> x(m_);
      for (double& v : x) v = rng.uniform();
      return evaluate(x);
    }
    case FamilyKind::two_atom: return rng.bernoulli(params_[2]) ? params_[1] : params_[0];
    case FamilyKind::shifted_uniform_pair: return params_[0] + params_[1] * rng.uniform();
  }
  return 0.0;
}

FunctionTable GroundTruthFamily::tabulate(std::size_t level) const {
  FunctionTable t;
  if (kind_ == FamilyKind::separable_sum || kind_ == FamilyKind::two_atom) {
    const std::size_t cells = checked_cells(2, m_);
    t.shape.assign(m_, 2);
    t.values.resize(cells);
    std::vector<std::size_t> digits(m_);
    for (std::size_t i = 0; i < cells; ++i) {
      decode(i, 2, digits);
      if (kind_ == FamilyKind::two_atom) {
        t.values[i] = digits[0] ? params_[1] : params_[0];
      } else {
        const auto ones = std::accumulate(digits.begin(), digits.end(), std::size_t{0});
        t.values[i] = params_[0] * static_cast<double>(ones);
      }
    }
    return t;
  }

  if (level > 20) throw ResourceError("grid refinement level too large");
  const std::size_t steps = std::size_t{1} << level;
  const std::size_t side = steps + 1;
  const std::size_t cells = checked_cells(side, m_);
  t.shape.assign(m_, side);
  t.values.resize(cells);
  std::vector<std::size_t> digits(m_);
  const double scale = static_cast<double>(steps);
  for (std::size_t i = 0; i < cells; ++i) {
    decode(i, side, digits);
    switch (kind_) {
      case FamilyKind::euclidean_indicator: {
        // Integer squared norm so that |x| <= 1 is decided exactly.
        std::uint64_t s = 0;
        for (std::size_t d : digits) s += static_cast<std::uint64_t>(d) * d;
        const std::uint64_t r2 = static_cast<std::uint64_t>(steps) * steps;
        t.values[i] = s <= r2 ? std::sqrt(static_cast<double>(s)) / scale : 0.0;
        break;
      }
      case FamilyKind::uniform_product: {
        double prod = 1.0;
        for (std::size_t d : digits) prod *= static_cast<double>(d) / scale;
        t.values[i] = params_[0] + (params_[1] - params_[0]) * prod;
        break;
      }
      case FamilyKind::shifted_uniform_pair:
        t.values[i] = params_[0] + params_[1] * static_cast<double>(digits[0]) / scale;
        break;
      default: break;
    }
  }
  return t;
}

CdfDescription GroundTruthFamily::shifted_law() const {
  if (kind_ != FamilyKind::shifted_uniform_pair) {
    throw InvalidInput("only the shifted uniform pair has a shifted companion");
  }
  const double lo = params_[0] + params_[2];
  return UniformCdf{lo, lo + params_[1]};
}

double GroundTruthFamily::sample_shifted(Rng& rng) const {
  if (kind_ != FamilyKind::shifted_uniform_pair) {
    throw InvalidInput("only the shifted uniform pair has a shifted companion");
  }
  return params_[0] + params_[2] + params_[1] * rng.uniform();
}

double GroundTruthFamily::shift_distance() const {
  if (kind_ != FamilyKind::shifted_uniform_pair) {
    throw InvalidInput("only the shifted uniform pair has a shifted companion");
  }
  return std::min(std::abs(params_[2]) / params_[1], 1.0);
}

GroundTruthFamily boundary_law(BoundarySide side, double a, double p,
                               const GroundTruthFamily& family) {
  require_open_unit(p, "p");
  if (!std::isfinite(a)) throw InvalidInput("threshold must be finite");
  const double mass = side == BoundarySide::null_boundary ? p : p - kAlternativeMargin;
  if (!(mass > 0.0)) throw InvalidInput("p too small to place an alternative-boundary law");

  switch (family.kind()) {
    case FamilyKind::two_atom: {
      const double width = family.params()[1] - family.params()[0];
      if (!(width > 0.0)) throw InvalidInput("two-atom boundary law needs distinct atoms");
      return GroundTruthFamily::two_atom(a - width, a, mass);
    }
    case FamilyKind::shifted_uniform_pair: {
      const double length = family.params()[1];
      return GroundTruthFamily::shifted_uniform_pair(a - (1.0 - mass) * length, length,
                                                     family.params()[2]);
    }
    default:
      throw InvalidInput(std::string("cannot place a boundary law for family ") +
                         to_string(family.kind()));
  }
}

ErrorRateReport measure_error_rates(const Scenario& scenario, std::size_t trials,
                                    std::uint64_t seed, unsigned threads) {
  if (trials < 100) throw InvalidInput("error-rate measurement needs at least 100 trials");
  if (!scenario.error_event) throw InvalidInput("scenario has no error event");
  const std::size_t workers =
      std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, std::min<std::size_t>(trials, 256));

  // Static partition; per-trial streams make the count schedule-independent.
  std::vector<std::size_t> counts(workers, 0);
  std::vector<std::exception_ptr> failures(workers);
  auto run = [&](std::size_t w) {
    try {
      const std::size_t begin = trials * w / workers;
      const std::size_t end = trials * (w + 1) / workers;
      std::size_t errors = 0;
      for (std::size_t i = begin; i < end; ++i) {
        Rng rng = Rng::for_trial(seed, i);
        if (scenario.error_event(rng)) ++errors;
      }
      counts[w] = errors;
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  const std::size_t errors = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  ErrorRateReport r;
  r.name = scenario.name;
  r.trials = trials;
  r.seed = seed;
  const SideRate side = rate(errors, trials, scenario.claimed_bound);
  if (scenario.kind == ErrorKind::type1) {
    r.type1 = side;
  } else {
    r.type2 = side;
  }
  r.pass = side.pass;
  return r;
}

ErrorRateReport merge_reports(std::string name, const ErrorRateReport& a,
                              const ErrorRateReport& b) {
  if (a.trials != b.trials) throw InvalidInput("merged reports must use the same trial count");
  ErrorRateReport r;
  r.name = std::move(name);
  r.trials = a.trials;
  r.seed = a.seed;
  r.type1 = a.type1;
  r.type2 = b.type2;
  r.pass = (!r.type1 || r.type1->pass) && (!r.type2 || r.type2->pass);
  return r;
}

std::vector<Scenario> validation_scenarios(const ScenarioParams& q) {
  if (q.n == 0) throw InvalidInput("sample size must be positive");
  const McDiarmidDiameter d(q.diameter);
  const McDiarmidDiameter d_stat(q.diameter / std::sqrt(static_cast<double>(q.n)));
  TestSpec spec;
  spec.a_prime = q.a_prime;
  spec.a = q.a_prime + tight_gap(q.p, q.delta1, q.delta2, d, d_stat);
  spec.p = q.p;
  spec.delta1 = q.delta1;
  spec.delta2 = q.delta2;

  const GroundTruthFamily shape = shaped_law(q.shape, q.diameter);
  const GroundTruthFamily null_law =
      boundary_law(BoundarySide::null_boundary, spec.a, q.p, shape);
  const GroundTruthFamily alt_law =
      boundary_law(BoundarySide::alternative_boundary, spec.a_prime, q.p, shape);

  // Type I is largest at the right endpoint, type II at the left one.
  TestSpec spec1 = spec;
  spec1.b_policy = BPolicy::right();
  TestSpec spec2 = spec;
  spec2.b_policy = BPolicy::left();
  const std::size_t n = q.n;
  return {
      {"validation/type1" + suffix(q), ErrorKind::type1, q.delta1,
       [=](Rng& rng) { return !validation_test(draw(null_law, rng, n), spec1, d).accepted; }},
      {"validation/type2" + suffix(q), ErrorKind::type2, q.delta2,
       [=](Rng& rng) { return validation_test(draw(alt_law, rng, n), spec2, d).accepted; }},
  };
}

std::vector<Scenario> certification_scenarios(const ScenarioParams& q) {
  if (q.n == 0 || q.n2 == 0) throw InvalidInput("sample sizes must be positive");
  const double d1 = q.diameter;
  const double d2 = q.diameter2;
  if (!(d1 > 0.0) || !(d2 >= 0.0) || d2 >= d1) {
    throw InvalidInput("certification scenarios need 0 <= D2 < D1");
  }
  const double n1 = static_cast<double>(q.n);
  const double n2 = static_cast<double>(q.n2);

  std::vector<Scenario> out;
  for (CertificationRadius radius : {CertificationRadius::standard, CertificationRadius::unbalanced}) {
    McDiarmidDiameter total(d1 + d2);
    McDiarmidDiameter d_prime(std::sqrt(d1 * d1 / n1 + d2 * d2 / n2));
    if (radius == CertificationRadius::unbalanced) {
      if (!unbalanced_radius_applicable(McDiarmidDiameter(d1), McDiarmidDiameter(d2), q.n, q.n2)) {
        continue;
      }
      total = McDiarmidDiameter(2.0 * d1);
      d_prime = McDiarmidDiameter(d1 * std::sqrt(2.0 / n1));
    }
    TestSpec spec;
    spec.a_prime = q.a_prime;
    spec.a = q.a_prime + tight_gap(q.p, q.delta1, q.delta2, total, d_prime);
    spec.p = q.p;
    spec.delta1 = q.delta1;
    spec.delta2 = q.delta2;

    // F2 = D2 B with B ~ Bernoulli(1/2). For two atoms F1 jumps by D1 > D2
    // at the threshold, so P(F1 + F2 >= t) = P(F1 = high). For uniform F1
    // the upper-tail mass x at t satisfies x + D2 / (2 D1) = target.
    auto model_law = [&](double threshold, double target) {
      if (q.shape == BoundaryShape::two_atom) {
        return GroundTruthFamily::two_atom(threshold - d1, threshold, target);
      }
      const double x = target - d2 / (2.0 * d1);
      if (!(x >= 0.0 && x + d2 / d1 <= 1.0)) {
        throw InvalidInput("cannot place a uniform certification boundary law for this p");
      }
      return GroundTruthFamily::shifted_uniform_pair(threshold - (1.0 - x) * d1, d1);
    };
    const GroundTruthFamily null_model = model_law(spec.a, q.p);
    const GroundTruthFamily alt_model = model_law(spec.a_prime, q.p - kAlternativeMargin);
    const std::string tag = std::string(radius == CertificationRadius::standard ? "" : "/unbalanced") +
                            suffix(q) + ",n2=" + std::to_string(q.n2);

    auto deviations = [d2, m = q.n2](Rng& rng) {
      std::vector<double> v(m);
      for (double& x : v) x = rng.bernoulli(0.5) ? d2 : 0.0;
      return v;
    };
    TestSpec spec1 = spec;
    spec1.b_policy = BPolicy::right();
    TestSpec spec2 = spec;
    spec2.b_policy = BPolicy::left();
    const McDiarmidDiameter md1(d1);
    const McDiarmidDiameter md2(d2);
    const std::size_t n = q.n;
    out.push_back({"certification/type1" + tag, ErrorKind::type1, q.delta1, [=](Rng& rng) {
                     const auto model = draw(null_model, rng, n);
                     const auto dev = deviations(rng);
                     return !certification_test(model, dev, spec1, md1, md2, radius)
                                 .outcome.accepted;
                   }});
    out.push_back({"certification/type2" + tag, ErrorKind::type2, q.delta2, [=](Rng& rng) {
                     const auto model = draw(alt_model, rng, n);
                     const auto dev = deviations(rng);
                     return certification_test(model, dev, spec2, md1, md2, radius)
                         .outcome.accepted;
                   }});
  }
  return out;
}

std::vector<Scenario> extrapolation_scenarios(const ScenarioParams& q, double delta_p) {
  if (q.n == 0) throw InvalidInput("sample size must be positive");
  const DistanceBudget budget(delta_p, q.p);
  const double length = q.diameter;
  const auto [r_h, r_k] = extrapolation_radii(q.n, budget, q.delta1, q.delta2);
  const double a_prime = q.a_prime;
  const double a = a_prime + length * (r_h + r_k) * kGapSlack;
  const McDiarmidDiameter d(length);

  // F_hat sits on the boundary; the sampled surrogate F is F_hat moved by
  // delta_p * length towards the wrong side, so d_K(F, F_hat) = delta_p.
  const GroundTruthFamily hat_null = boundary_law(
      BoundarySide::null_boundary, a, q.p,
      GroundTruthFamily::shifted_uniform_pair(0.0, length, -delta_p * length));
  const GroundTruthFamily hat_alt = boundary_law(
      BoundarySide::alternative_boundary, a_prime, q.p,
      GroundTruthFamily::shifted_uniform_pair(0.0, length, delta_p * length));
  const std::size_t n = q.n;
  auto surrogate = [n](const GroundTruthFamily& f, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = f.sample_shifted(rng);
    return v;
  };
  const std::string tag = "/n=" + std::to_string(q.n);
  return {
      {"extrapolation/type1" + tag, ErrorKind::type1, q.delta1,
       [=](Rng& rng) {
         return !extrapolative_validation_test(surrogate(hat_null, rng), a, a_prime, budget,
                                               q.delta1, q.delta2, d)
                     .accepted;
       }},
      {"extrapolation/type2" + tag, ErrorKind::type2, q.delta2,
       [=](Rng& rng) {
         return extrapolative_validation_test(surrogate(hat_alt, rng), a, a_prime, budget,
                                              q.delta1, q.delta2, d)
             .accepted;
       }},
  };
}

std::vector<Scenario> estimated_validation_scenarios(const ScenarioParams& q) {
  const GroundTruthFamily shape = shaped_law(q.shape, q.diameter);
  const double tau = tail_lower_bound(shape.law(), q.eps);
  const std::size_t n = std::max(required_sample_size(1, tau, q.delta1),
                                 required_sample_size(1, tau, q.delta2));

  EstimatedValidationParams params{0.0, q.a_prime, q.p, q.delta1, q.delta2, 1.0, q.eps, tau,
                                   std::nullopt};
  // Gap at which stage 1 passes even when (1 + eps) D_hat reaches (1 + eps) D,
  // the largest value it can take: stage 2 then always runs.
  const ThresholdFunctions f = validation_thresholds({1.0, 0.0, q.p, q.delta1, q.delta2, 1.0,
                                                      q.eps, std::nullopt, std::nullopt},
                                                     n);
  const double top = (1.0 + q.eps) * q.diameter;
  const std::vector<double> point{top};
  const double gap = (f.f_h(point) + 1.0 + f.f_k(point)) * kGapSlack;
  params.a = q.a_prime + gap;

  const GroundTruthFamily null_law = boundary_law(BoundarySide::null_boundary, params.a, q.p, shape);
  const GroundTruthFamily alt_law =
      boundary_law(BoundarySide::alternative_boundary, params.a_prime, q.p, shape);
  const std::string tag = std::string("/") + shape_name(q.shape) + "/n=" + std::to_string(n);
  return {
      {"validation-est/theta11" + tag, ErrorKind::type1, 2.0 * q.delta1,
       [=](Rng& rng) {
         const auto r = validation_test_estimated(draw(null_law, rng, n), params);
         return r.outcome.stage1() && !*r.outcome.stage2();
       }},
      {"validation-est/theta12" + tag, ErrorKind::type2, 2.0 * q.delta2,
       [=](Rng& rng) {
         const auto r = validation_test_estimated(draw(alt_law, rng, n), params);
         return r.outcome.stage1() && *r.outcome.stage2();
       }},
  };
}

std::vector<Scenario> estimated_certification_scenarios(const ScenarioParams& q) {
  if (q.p != 0.5) throw InvalidInput("estimated certification scenarios need p = 1/2");
  const double d1 = q.diameter;
  const double d2 = q.diameter2;
  if (!(d1 > 0.0) || !(d2 > 0.0) || d2 >= d1) {
    throw InvalidInput("estimated certification scenarios need 0 < D2 < D1");
  }
  const double tau = tail_lower_bound(UniformCdf{0.0, 1.0}, q.eps);
  const std::size_t n = std::max(required_sample_size(2, tau, q.delta1),
                                 required_sample_size(2, tau, q.delta2));

  EstimatedCertificationParams params{0.0,  q.a_prime, q.p, q.delta1,    q.delta2,    1.0,
                                      1.0,  q.eps,     tau, tau,         std::nullopt};
  EstimatedCertificationParams probe = params;
  probe.a = 1.0;
  probe.a_prime = 0.0;
  const ThresholdFunctions f = certification_thresholds(probe, n, n);
  const std::vector<double> top{(1.0 + q.eps) * d1, (1.0 + q.eps) * d2};
  params.a = q.a_prime + (f.f_h(top) + 1.0 + f.f_k(top)) * kGapSlack;

  // F1 uniform of width D1 centred at c, F2 uniform of width D2 centred at 0.
  // The sum is symmetric about c with density 1/D1 on its flat top, so
  // centring at a' - 1e-6 D1 puts P(F >= a') at 1/2 - 1e-6 exactly.
  const double null_centre = params.a;
  const double alt_centre = params.a_prime - kAlternativeMargin * d1;
  auto run = [=](double centre, Rng& rng) {
    auto model = draw_uniform(rng, n, centre - d1 / 2.0, centre + d1 / 2.0);
    auto dev = draw_uniform(rng, n, -d2 / 2.0, d2 / 2.0);
    return certification_test_estimated(model, dev, params);
  };
  const std::string tag = "/n=" + std::to_string(n);
  return {
      {"certification-est/theta11" + tag, ErrorKind::type1, 2.0 * q.delta1,
       [=](Rng& rng) {
         const auto r = run(null_centre, rng);
         return r.outcome.stage1() && !*r.outcome.stage2();
       }},
      {"certification-est/theta12" + tag, ErrorKind::type2, 2.0 * q.delta2,
       [=](Rng& rng) {
         const auto r = run(alt_centre, rng);
         return r.outcome.stage1() && *r.outcome.stage2();
       }},
  };
}

std::vector<Scenario> stage1_zero_scenarios(const ScenarioParams& q,
                                            const GroundTruthFamily& family) {
  if (q.n == 0) throw InvalidInput("sample size must be positive");
  const double c = family.separability().value();
  const double d = family.essential_diameter();
  const std::size_t n = q.n;
  // Gap at which the inflated essential diameter passes stage 1 with almost
  // no room: f_H + f_K = -1e-9 (a - a') at (1 + eps) D.
  const ThresholdFunctions f = validation_thresholds(
      {1.0, 0.0, q.p, q.delta1, q.delta2, c, q.eps, std::nullopt, std::nullopt}, n);
  const std::vector<double> top{(1.0 + q.eps) * d};
  const double gap = (f.f_h(top) + 1.0 + f.f_k(top)) * kGapSlack;
  const EstimatedValidationParams params{q.a_prime + gap, q.a_prime, q.p, q.delta1, q.delta2,
                                         c, q.eps, std::nullopt, std::nullopt};
  const GroundTruthFamily law = family;
  return {{std::string("stage1-zero/") + to_string(family.kind()) + "/n=" + std::to_string(n),
           ErrorKind::type1, 0.0, [=](Rng& rng) {
             return !validation_test_estimated(draw(law, rng, n), params).outcome.stage1();
           }}};
}

std::vector<Scenario> quantile_scenarios(const GroundTruthFamily& family, std::size_t n) {
  if (n == 0) throw InvalidInput("sample size must be positive");
  // xi at a point with F(xi) = f_xi, and quantile levels f_xi -/+ 0.1.
  double xi = 0.0;
  double f_xi = 0.0;
  switch (family.kind()) {
    case FamilyKind::two_atom: {
      const auto& prm = family.params();
      if (!(prm[2] > 0.1 && prm[2] < 0.9)) {
        throw InvalidInput("two-atom quantile scenarios need 0.1 < p_high < 0.9");
      }
      xi = (prm[0] + prm[1]) / 2.0;
      f_xi = 1.0 - prm[2];
      break;
    }
    case FamilyKind::shifted_uniform_pair:
    case FamilyKind::uniform_product:
      if (family.kind() == FamilyKind::uniform_product && family.coordinates() != 1) {
        throw InvalidInput("quantile scenarios need a one-coordinate uniform law");
      }
      f_xi = 0.5;
      xi = support(family.law())[0] + 0.5 * family.essential_diameter();
      break;
    default: throw InvalidInput("quantile scenarios need a uniform or two-atom law");
  }
  const double q_above = f_xi - 0.1;
  const double q_below = f_xi + 0.1;
  const auto above = quantile_exceedance_bounds(n, f_xi, q_above, QuantileSide::above);
  const auto below = quantile_exceedance_bounds(n, f_xi, q_below, QuantileSide::below);
  const GroundTruthFamily law = family;
  const std::string tag = std::string("/") + to_string(family.kind()) + "/n=" + std::to_string(n);

  std::vector<Scenario> out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back({"quantile/above" + std::to_string(i + 1) + tag, ErrorKind::type1, above[i],
                   [=](Rng& rng) {
                     return EmpiricalDistribution(draw(law, rng, n)).quantile(q_above) > xi;
                   }});
  }
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back({"quantile/below" + std::to_string(i + 1) + tag, ErrorKind::type1, below[i],
                   [=](Rng& rng) {
                     return EmpiricalDistribution(draw(law, rng, n)).quantile(q_below) < xi;
                   }});
  }
  return out;
}

std::vector<Scenario> range_scenarios(std::size_t n, double p, double eps) {
  if (n == 0) throw InvalidInput("sample size must be positive");
  require_open_unit(p, "p");
  if (!(eps > 0.0)) throw InvalidInput("inflation eps must be positive");
  const double spread = p - (1.0 - p);  // xi_p - xi_{1-p} for uniform(0,1)
  const double tau = tail_lower_bound(UniformCdf{0.0, 1.0}, eps);
  const double tau_pos = tail_lower_bound_positive(UniformCdf{0.0, 1.0}, eps);
  const std::string tag = "/n=" + std::to_string(n);
  auto range = [n](Rng& rng) {
    const EmpiricalDistribution e(draw_uniform(rng, n, 0.0, 1.0));
    return e;
  };
  return {
      {"range/quantile-spread" + tag, ErrorKind::type1, empirical_range_bound(n, p),
       [=](Rng& rng) { return range(rng).range() < spread; }},
      {"range/supremum" + tag, ErrorKind::type1, empirical_supremum_bound(n, p),
       [=](Rng& rng) { return range(rng).max() < p; }},
      {"range/diameter-underestimate" + tag, ErrorKind::type1,
       diameter_underestimate_bound(n, tau),
       [=](Rng& rng) { return (1.0 + eps) * range(rng).range() < 1.0; }},
      {"range/supremum-underestimate" + tag, ErrorKind::type1,
       diameter_underestimate_bound(n, tau_pos, true),
       [=](Rng& rng) { return (1.0 + eps) * range(rng).max() < 1.0; }},
  };
}

std::vector<Scenario> dkw_scenarios(std::size_t n, std::size_t n_prime, double delta) {
  if (n == 0 || n_prime == 0) throw InvalidInput("sample sizes must be positive");
  const double radius = dkw_confidence_radius(std::min(n, n_prime), delta);
  return {{"dkw/n=" + std::to_string(n) + ",n'=" + std::to_string(n_prime), ErrorKind::type1,
           delta, [=](Rng& rng) {
             const EmpiricalCdfPair pair(EmpiricalDistribution(draw_uniform(rng, n, 0.0, 1.0)),
                                         EmpiricalDistribution(draw_uniform(rng, n_prime, 0.0, 1.0)));
             return estimate_kolmogorov_distance(pair, delta).estimate > radius;
           }}};
}

std::vector<Scenario> qmu_scenarios(const ScenarioParams& q) {
  if (q.n == 0) throw InvalidInput("sample size must be positive");
  const GroundTruthFamily alt_law = boundary_law(BoundarySide::alternative_boundary, q.a_prime,
                                                 q.p, shaped_law(q.shape, q.diameter));
  const McDiarmidDiameter d(q.diameter);
  const std::size_t n = q.n;
  return {{"qmu/type2" + suffix(q), ErrorKind::type2, q.delta2, [=](Rng& rng) {
             return qmu_report(draw(alt_law, rng, n), q.a_prime, d, q.p, q.delta2).holds;
           }}};
}

}  // namespace concert
