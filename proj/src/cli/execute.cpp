#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "concert/cli/ingest.hpp"
#include "concert/cli/report.hpp"
#include "concert/errors.hpp"
#include "concert/extrapolation.hpp"
#include "concert/harness.hpp"
#include "concert/quantiles.hpp"
#include "concert/sequential.hpp"
#include "concert/testing.hpp"

namespace concert::cli {
namespace {

using json = nlohmann::ordered_json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json config_json(const RunConfig& c) {
  // Thread count and output path do not change any result and are left out
  // so reports compare byte-for-byte across machines.
  json j;
  j["command"] = to_string(c.command);
  j["a"] = optional_number(c.a);
  j["a_prime"] = optional_number(c.a_prime);
  j["p"] = c.p;
  j["delta1"] = c.delta1;
  j["delta2"] = c.delta2;
  j["b_policy"] = c.b_policy;
  j["diameter"] = optional_number(c.diameter);
  j["diameter2"] = optional_number(c.diameter2);
  j["radius"] = c.radius;
  j["c"] = optional_number(c.c);
  j["c2"] = optional_number(c.c2);
  j["eps"] = c.eps;
  j["tau"] = optional_number(c.tau);
  j["tau2"] = optional_number(c.tau2);
  j["assumed_delta"] = optional_number(c.assumed_delta);
  j["delta_p"] = optional_number(c.delta_p);
  j["data"] = c.data ? json(*c.data) : json(nullptr);
  j["reference"] = c.reference ? json(*c.reference) : json(nullptr);
  if (c.command == Command::simulate) {
    j["scenario"] = c.scenario;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["n"] = c.n ? json(*c.n) : json(nullptr);
  }
  return j;
}

BPolicy parse_policy(const std::string& s) {
  if (s == "left") return BPolicy::left();
  if (s == "right") return BPolicy::right();
  if (s == "midpoint") return BPolicy::midpoint();
  double b = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), b);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InvalidInput("b_policy must be left, right, midpoint or a number");
  }
  return BPolicy::at(b);
}

TestSpec make_spec(const RunConfig& c) {
  TestSpec spec;
  spec.a = *c.a;
  spec.a_prime = *c.a_prime;
  spec.p = c.p;
  spec.delta1 = c.delta1;
  spec.delta2 = c.delta2;
  spec.b_policy = parse_policy(c.b_policy);
  spec.validate();
  return spec;
}

json interval_json(const FeasibleInterval& iv) {
  return json{{"lo", iv.lo}, {"hi", iv.hi}, {"deficit", iv.deficit()}};
}

std::string fmt(double v) { return format_double(v); }

void decide(Report& r, const TestOutcome& o) {
  r.body["decision"] = o.accepted ? "accept" : "reject";
  r.body["b"] = o.b;
  r.body["interval"] = interval_json(o.interval);
  r.body["statistic"] = o.statistic;
  r.body["type1_bound"] = o.type1_bound;
  r.body["type2_bound"] = o.type2_bound;
  r.exit_status = o.accepted ? kAccepted : kRejected;
  r.summary += std::string(o.accepted ? "ACCEPT" : "REJECT") + ": statistic " + fmt(o.statistic) +
               (o.accepted ? " >= " : " < ") + "b " + fmt(o.b) + ", interval [" +
               fmt(o.interval.lo) + ", " + fmt(o.interval.hi) + "]\n" +
               "  type I <= " + fmt(o.type1_bound) + ", type II <= " + fmt(o.type2_bound) + "\n";
}

void mark_infeasible(Report& r, const Infeasible& e, const FeasibleInterval& iv) {
  r.body["decision"] = "infeasible";
  r.body["interval"] = interval_json(iv);
  r.body["deficit"] = e.deficit();
  r.body["minimal_n"] = e.minimal_n() ? json(*e.minimal_n()) : json(nullptr);
  r.exit_status = kInfeasible;
  r.summary += "INFEASIBLE: " + std::string(e.what()) + "\n";
  if (e.minimal_n()) r.summary += "  smallest feasible n: " + std::to_string(*e.minimal_n()) + "\n";
}

std::vector<double> single_column(const RunConfig& c) {
  return ingest_samples(*c.data, {"value"}).front().values;
}

void run_validate(const RunConfig& c, Report& r) {
  const TestSpec spec = make_spec(c);
  const auto samples = single_column(c);
  const McDiarmidDiameter d(*c.diameter);
  const McDiarmidDiameter d_stat(d.value() / std::sqrt(static_cast<double>(samples.size())));
  r.body["n"] = samples.size();
  r.body["radii"] = json{{"r_p", deviation_radius(d, spec.p)},
                         {"r_1mp", deviation_radius(d, 1.0 - spec.p)},
                         {"r_prime_delta1", deviation_radius(d_stat, spec.delta1)},
                         {"r_prime_delta2", deviation_radius(d_stat, spec.delta2)}};
  try {
    decide(r, validation_test(samples, spec, d));
  } catch (const Infeasible& e) {
    mark_infeasible(r, e, feasible_interval(spec, d, d_stat));
  }
}

void run_certify(const RunConfig& c, Report& r) {
  const TestSpec spec = make_spec(c);
  const auto sets = ingest_samples(*c.data, {"model", "deviation"}, true);
  const McDiarmidDiameter d1(*c.diameter);
  const McDiarmidDiameter d2(*c.diameter2);
  const auto radius =
      c.radius == "unbalanced" ? CertificationRadius::unbalanced : CertificationRadius::standard;
  const std::size_t n1 = sets[0].values.size();
  const std::size_t n2 = sets[1].values.size();
  r.body["n1"] = n1;
  r.body["n2"] = n2;
  r.body["unbalanced_applicable"] = unbalanced_radius_applicable(d1, d2, n1, n2);
  try {
    const CertificationOutcome o = certification_test(sets[0].values, sets[1].values, spec, d1,
                                                      d2, radius);
    r.body["total_diameter"] = o.total_diameter.value();
    r.body["radii"] = json{{"r_p", deviation_radius(o.total_diameter, spec.p)},
                           {"r_1mp", deviation_radius(o.total_diameter, 1.0 - spec.p)},
                           {"rho_delta1", o.rho_delta1},
                           {"rho_delta2", o.rho_delta2}};
    decide(r, o.outcome);
  } catch (const Infeasible& e) {
    r.body["decision"] = "infeasible";
    r.body["deficit"] = e.deficit();
    r.body["minimal_n"] = e.minimal_n() ? json(*e.minimal_n()) : json(nullptr);
    r.exit_status = kInfeasible;
    r.summary += "INFEASIBLE: " + std::string(e.what()) + "\n";
  }
}

void run_xvalidate(const RunConfig& c, Report& r) {
  const auto samples = single_column(c);
  const DistanceBudget budget(*c.delta_p, c.p);
  const McDiarmidDiameter d(*c.diameter);
  const auto [r_h, r_k] = extrapolation_radii(samples.size(), budget, c.delta1, c.delta2);
  r.body["n"] = samples.size();
  r.body["radii"] = json{{"r_H", r_h}, {"r_K", r_k}};
  try {
    decide(r, extrapolative_validation_test(samples, *c.a, *c.a_prime, budget, c.delta1,
                                            c.delta2, d));
  } catch (const Infeasible& e) {
    mark_infeasible(r, e, {*c.a_prime + d.value() * r_k, *c.a - d.value() * r_h});
  }
}

void stop_option(const StopOptionResult& s, const std::vector<double>& empirical, double eps,
                 Report& r) {
  r.body["empirical_diameters"] = empirical;
  r.body["eps"] = eps;
  r.body["inflated_diameters"] = s.inflated;
  r.body["f_H"] = s.f_h;
  r.body["f_K"] = s.f_k;
  r.body["threshold"] = -s.f_h;
  r.body["statistic"] = s.statistic;
  r.body["outcome"] = s.outcome.code();
  r.body["theta1"] = s.bounds.theta1;
  r.body["theta11"] = s.bounds.theta11;
  r.body["theta12"] = s.bounds.theta12;
  r.body["delta_inflation"] =
      s.delta_inflation ? json(*s.delta_inflation) : json(nullptr);
  r.body["bounds_include_delta"] = s.delta_inflation.has_value();
  r.body["sample_size_certified"] = s.sample_size_certified;
  r.body["required_sizes"] = s.required_sizes;

  std::string detail = "outcome " + std::string(s.outcome.code()) + ", f_H + f_K = " +
                       fmt(s.f_h + s.f_k) + ", statistic " + fmt(s.statistic) +
                       " vs threshold " + fmt(-s.f_h) + "\n";
  if (!s.outcome.stage1()) {
    r.body["decision"] = "stop";
    r.exit_status = kInfeasible;
    r.summary += "STOP at stage 1: " + detail;
  } else {
    const bool accepted = *s.outcome.stage2();
    r.body["decision"] = accepted ? "accept" : "reject";
    r.exit_status = accepted ? kAccepted : kRejected;
    r.summary += std::string(accepted ? "ACCEPT: " : "REJECT: ") + detail;
  }
  r.summary += "  theta11 <= " + fmt(s.bounds.theta11) + ", theta12 <= " + fmt(s.bounds.theta12) +
               (s.delta_inflation ? "" : " (excluding Delta)") + "\n";
}

double range_of(const std::vector<double>& v) {
  return EmpiricalDistribution(std::span<const double>(v)).range();
}

void run_validate_est(const RunConfig& c, Report& r) {
  const auto samples = single_column(c);
  const EstimatedValidationParams params{*c.a,  *c.a_prime, c.p, c.delta1, c.delta2,
                                         *c.c,  c.eps,      c.tau, c.assumed_delta};
  r.body["n"] = samples.size();
  stop_option(validation_test_estimated(samples, params), {range_of(samples)}, c.eps, r);
}

void run_certify_est(const RunConfig& c, Report& r) {
  const auto sets = ingest_samples(*c.data, {"model", "deviation"}, true);
  const EstimatedCertificationParams params{*c.a,   *c.a_prime, c.p,    c.delta1,
                                            c.delta2, *c.c,     *c.c2,  c.eps,
                                            c.tau,  c.tau2,     c.assumed_delta};
  r.body["n1"] = sets[0].values.size();
  r.body["n2"] = sets[1].values.size();
  stop_option(certification_test_estimated(sets[0].values, sets[1].values, params),
              {range_of(sets[0].values), range_of(sets[1].values)}, c.eps, r);
}

void run_estimate_diameter(const RunConfig& c, Report& r) {
  const EmpiricalDistribution e(single_column(c));
  r.body["n"] = e.size();
  r.body["min"] = e.min();
  r.body["max"] = e.max();
  r.body["empirical_diameter"] = e.range();
  r.body["eps"] = c.eps;
  r.body["inflated_diameter"] = (1.0 + c.eps) * e.range();
  r.summary += "empirical diameter " + fmt(e.range()) + ", inflated " +
               fmt((1.0 + c.eps) * e.range()) + " (eps " + fmt(c.eps) + ")\n";
  if (c.tau) {
    const double bound = diameter_underestimate_bound(e.size(), *c.tau);
    const std::size_t need = std::max(required_sample_size(1, *c.tau, c.delta1),
                                      required_sample_size(1, *c.tau, c.delta2));
    r.body["underestimate_bound"] = bound;
    r.body["required_n"] = need;
    r.summary += "  P(inflated < essential) <= " + fmt(bound) + "; n needed " +
                 std::to_string(need) + "\n";
  }
  if (c.reference) {
    const EmpiricalDistribution ref(ingest_samples(*c.reference, {"value"}).front().values);
    const KolmogorovEstimate k = estimate_kolmogorov_distance(EmpiricalCdfPair(e, ref), c.delta1);
    r.body["kolmogorov"] = json{{"estimate", k.estimate},
                                {"radius", k.radius},
                                {"n", k.n},
                                {"n_prime", k.n_prime},
                                {"delta", k.delta}};
    r.summary += "  Kolmogorov distance " + fmt(k.estimate) + " +/- " + fmt(k.radius) +
                 " at confidence " + fmt(1.0 - k.delta) + "\n";
  }
  r.body["decision"] = "estimated";
  r.exit_status = kAccepted;
}

void run_qmu(const RunConfig& c, Report& r) {
  const auto samples = single_column(c);
  const QmuReport q =
      qmu_report(samples, *c.a_prime, McDiarmidDiameter(*c.diameter), c.p, c.delta2);
  r.body["n"] = samples.size();
  r.body["margin"] = q.margin;
  r.body["uncertainty"] = q.uncertainty;
  r.body["ratio"] = q.ratio;
  r.body["required_ratio"] = q.required_ratio;
  r.body["confidence"] = q.confidence;
  r.body["decision"] = q.holds ? "accept" : "reject";
  r.exit_status = q.holds ? kAccepted : kRejected;
  r.summary += std::string(q.holds ? "HOLDS" : "DOES NOT HOLD") + ": M/U = " + fmt(q.ratio) +
               " vs required " + fmt(q.required_ratio) + "\n";
}

using Catalog = std::map<std::string, std::function<std::vector<Scenario>(const RunConfig&)>>;

ScenarioParams base_params(const RunConfig& c) {
  ScenarioParams q;
  q.p = c.p;
  q.delta1 = c.delta1;
  q.delta2 = c.delta2;
  q.diameter = c.diameter.value_or(1.0);
  q.diameter2 = c.diameter2.value_or(0.1);
  q.a_prime = c.a_prime.value_or(0.0);
  q.eps = c.eps;
  return q;
}

std::vector<std::size_t> sizes(const RunConfig& c, std::vector<std::size_t> defaults) {
  return c.n ? std::vector<std::size_t>{*c.n} : defaults;
}

template <class F>
void for_shapes(std::vector<Scenario>& out, const F& build) {
  for (BoundaryShape s : {BoundaryShape::two_atom, BoundaryShape::shifted_uniform}) {
    for (auto& sc : build(s)) out.push_back(std::move(sc));
  }
}

const Catalog& catalog() {
  static const Catalog cat{
      {"validation",
       [](const RunConfig& c) {
         std::vector<Scenario> out;
         for (std::size_t n : sizes(c, {10, 25, 100})) {
           for_shapes(out, [&](BoundaryShape s) {
             ScenarioParams q = base_params(c);
             q.shape = s;
             q.n = n;
             return validation_scenarios(q);
           });
         }
         return out;
       }},
      {"certification",
       [](const RunConfig& c) {
         std::vector<Scenario> out;
         for_shapes(out, [&](BoundaryShape s) {
           ScenarioParams q = base_params(c);
           q.shape = s;
           q.n = q.n2 = c.n.value_or(25);
           return certification_scenarios(q);
         });
         return out;
       }},
      {"extrapolation",
       [](const RunConfig& c) {
         std::vector<Scenario> out;
         for (std::size_t n : sizes(c, {25, 100})) {
           ScenarioParams q = base_params(c);
           q.n = n;
           for (auto& s : extrapolation_scenarios(q, c.delta_p.value_or(0.1))) {
             out.push_back(std::move(s));
           }
         }
         return out;
       }},
      {"validation-est",
       [](const RunConfig& c) {
         std::vector<Scenario> out;
         for_shapes(out, [&](BoundaryShape s) {
           ScenarioParams q = base_params(c);
           q.shape = s;
           return estimated_validation_scenarios(q);
         });
         return out;
       }},
      {"certification-est",
       [](const RunConfig& c) { return estimated_certification_scenarios(base_params(c)); }},
      {"stage1-zero",
       [](const RunConfig& c) {
         std::vector<Scenario> out;
         ScenarioParams q = base_params(c);
         q.n = c.n.value_or(30);
         for (const auto& f : {GroundTruthFamily::separable_sum(4),
                               GroundTruthFamily::euclidean_indicator(3),
                               GroundTruthFamily::uniform_product(1)}) {
           for (auto& s : stage1_zero_scenarios(q, f)) out.push_back(std::move(s));
         }
         return out;
       }},
      {"quantile",
       [](const RunConfig& c) {
         std::vector<Scenario> out;
         for (std::size_t n : sizes(c, {20, 100})) {
           for (const auto& f : {GroundTruthFamily::uniform_product(1),
                                 GroundTruthFamily::two_atom(0.0, 1.0, 0.5)}) {
             for (auto& s : quantile_scenarios(f, n)) out.push_back(std::move(s));
           }
         }
         return out;
       }},
      {"range",
       [](const RunConfig& c) {
         std::vector<Scenario> out;
         for (std::size_t n : sizes(c, {50, 100})) {
           for (auto& s : range_scenarios(n, 0.9, c.eps)) out.push_back(std::move(s));
         }
         return out;
       }},
      {"dkw", [](const RunConfig&) { return dkw_scenarios(200, 50, 0.1); }},
      {"qmu",
       [](const RunConfig& c) {
         std::vector<Scenario> out;
         for_shapes(out, [&](BoundaryShape s) {
           ScenarioParams q = base_params(c);
           q.shape = s;
           q.n = c.n.value_or(25);
           return qmu_scenarios(q);
         });
         return out;
       }},
  };
  return cat;
}

// Per-scenario seed from the master seed and the scenario name, so a
// scenario draws the same numbers whichever subset is run.
std::uint64_t scenario_seed(std::uint64_t master, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return Rng::mix(master ^ h);
}

json side_json(const SideRate& s) {
  return json{{"errors", s.errors}, {"observed", s.observed}, {"claimed", s.claimed},
              {"std_err", s.std_err}, {"pass", s.pass}};
}

void run_simulate(const RunConfig& c, Report& r) {
  if (c.trials < 100) throw InvalidInput("simulate needs at least 100 trials");
  std::vector<Scenario> scenarios;
  if (c.scenario == "all") {
    for (const auto& [name, build] : catalog()) {
      for (auto& s : build(c)) scenarios.push_back(std::move(s));
    }
  } else {
    const auto it = catalog().find(c.scenario);
    if (it == catalog().end()) {
      std::string known;
      for (const auto& [name, build] : catalog()) known += " " + name;
      throw InvalidInput("unknown scenario '" + c.scenario + "'; known: all" + known);
    }
    scenarios = it->second(c);
  }

  json list = json::array();
  bool all_pass = true;
  std::string lines;
  for (const auto& s : scenarios) {
    const ErrorRateReport e =
        measure_error_rates(s, c.trials, scenario_seed(c.seed, s.name), c.threads);
    json item{{"name", e.name}, {"trials", e.trials}, {"seed", e.seed},
              {"slack_sigmas", e.slack_sigmas}};
    if (e.type1) item["type1"] = side_json(*e.type1);
    if (e.type2) item["type2"] = side_json(*e.type2);
    item["pass"] = e.pass;
    list.push_back(std::move(item));
    all_pass = all_pass && e.pass;
    const SideRate& side = e.type1 ? *e.type1 : *e.type2;
    lines += std::string(e.pass ? "  pass " : "  FAIL ") + e.name + ": observed " +
                 fmt(side.observed) + " vs claimed " + fmt(side.claimed) + " (+3 s.e. " +
                 fmt(kSlackSigmas * side.std_err) + ")\n";
  }
  r.body["scenarios"] = std::move(list);
  r.body["all_pass"] = all_pass;
  r.body["decision"] = all_pass ? "pass" : "fail";
  r.exit_status = all_pass ? kAccepted : kRejected;
  r.summary += std::to_string(scenarios.size()) + " scenarios, " +
               (all_pass ? "all within claimed bounds" : "SOME EXCEED claimed bounds") + "\n" +
               lines;
}

void check_finite(const json& j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw std::logic_error("report holds a non-finite number");
  }
  if (j.is_structured()) {
    for (const auto& v : j) check_finite(v);
  }
}

}  // namespace

std::string serialize_report(const Report& report) {
  check_finite(report.body);
  return report.body.dump(2) + "\n";
}

Report parse_report(const std::string& text) {
  Report r;
  r.body = json::parse(text);
  r.exit_status = r.body.at("exit_status").get<int>();
  return r;
}

Report execute(const RunConfig& config) {
  Report r;
  r.body["schema_version"] = kSchemaVersion;
  r.body["config"] = config_json(config);
  r.summary = std::string(to_string(config.command)) + ": ";
  const json prefix = r.body;
  try {
    require_fields(config);
    switch (config.command) {
      case Command::validate: run_validate(config, r); break;
      case Command::certify: run_certify(config, r); break;
      case Command::xvalidate: run_xvalidate(config, r); break;
      case Command::validate_est: run_validate_est(config, r); break;
      case Command::certify_est: run_certify_est(config, r); break;
      case Command::estimate_diameter: run_estimate_diameter(config, r); break;
      case Command::qmu: run_qmu(config, r); break;
      case Command::simulate: run_simulate(config, r); break;
    }
    check_finite(r.body);
  } catch (const std::exception& e) {
    r.body = prefix;
    json err{{"message", e.what()}};
    if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
      err["row"] = pe->row();
      err["column"] = pe->column();
      err["kind"] = "parse";
    } else if (dynamic_cast<const ContractViolation*>(&e)) {
      err["kind"] = "contract";
    } else if (dynamic_cast<const InvalidPolicy*>(&e)) {
      err["kind"] = "policy";
    } else if (dynamic_cast<const Error*>(&e)) {
      err["kind"] = "input";
    } else {
      err["kind"] = "internal";
    }
    r.body["decision"] = "error";
    r.body["error"] = std::move(err);
    r.exit_status = kInputError;
    r.summary = std::string(to_string(config.command)) + ": ERROR: " + e.what() + "\n";
  }
  r.body["exit_status"] = r.exit_status;
  return r;
}

}  // namespace concert::cli
