#include "pjinv/reports.hpp"

#include "pjinv/hadamard.hpp"
#include "pjinv/indices.hpp"
#include "pjinv/inverter.hpp"
#include "pjinv/map_models.hpp"
#include "pjinv/property_checks.hpp"
#include "pjinv/pseudojacobian.hpp"
#include "pjinv/sampling.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pjinv {

using nlohmann::json;

double RunConfig::tol(const std::string& name, double fallback) const {
  const auto it = tolerances.find(name);
  return it == tolerances.end() ? fallback : it->second;
}

int RunConfig::grid(const std::string& name, int fallback) const {
  const auto it = grids.find(name);
  return it == grids.end() ? fallback : it->second;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v))
    throw ConfigError("config: '" + key + "' needs a real number");
  return v;
}

long long to_integer(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) throw ConfigError("config: '" + key + "' needs an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config: '" + key + "' needs true or false");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "map") map_id = value;
  else if (key == "provider") provider = value;
  else if (key == "seed") {
    const long long s = to_integer(key, value);
    if (s < 0) throw ConfigError("config: seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "out") out_path = value;
  else if (key == "csv") csv_path = value;
  else if (key == "analytic_beta") analytic_beta = to_bool(key, value);
  else if (key == "negative_control") negative_control = to_bool(key, value);
  else if (key == "timing") timing = to_bool(key, value);
  else if (key == "method") method = value;
  else if (key == "suite") suite = value;
  else if (key == "target") target = value;
  else if (key == "x0") x0 = value;
  else if (key == "point") point = value;
  else if (key == "t_max") t_max = to_real(key, value);
  else if (key == "delta") delta = to_real(key, value);
  else if (key == "lambda") lambda = to_real(key, value);
  else if (key == "eps") eps = to_real(key, value);
  else if (key.rfind("tol.", 0) == 0 && key.size() > 4) tolerances[key.substr(4)] = to_real(key, value);
  else if (key.rfind("grid.", 0) == 0 && key.size() > 5) {
    const long long g = to_integer(key, value);
    if (g < 1) throw ConfigError("config: '" + key + "' must be positive");
    grids[key.substr(5)] = static_cast<int>(g);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(to_real("vector", trim(item)));
  if (values.empty()) throw ConfigError("empty vector");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

double round12(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return std::strtod(buf, nullptr);
}

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v == 0.0 ? 0.0 : round12(v);
}

json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number(v(i)));
  return arr;
}

json to_json(const Operator& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) rows.push_back(to_json(Vector(a.row(i).transpose())));
  return rows;
}

json config_echo(const RunConfig& cfg, const std::string& command) {
  json c;
  c["command"] = command;
  c["map"] = cfg.map_id;
  c["provider"] = cfg.provider;
  c["seed"] = cfg.seed;
  json tols = json::object();
  for (const auto& [k, v] : cfg.tolerances) tols[k] = number(v);
  json grids = json::object();
  for (const auto& [k, v] : cfg.grids) grids[k] = v;
  c["tolerances"] = tols;
  c["grids"] = grids;
  return c;
}

struct Context {
  MapModel map;
  ProviderSpec provider;
};

Context resolve(const RunConfig& cfg) {
  return Context{make_map(cfg.map_id), ProviderSpec::parse(cfg.provider)};
}

Vector vector_or_zero(const std::string& text, Eigen::Index dim, const char* what) {
  if (text.empty()) return Vector::Zero(dim);
  Vector v = parse_vector(text);
  if (v.size() != dim)
    throw ConfigError(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                      std::to_string(dim));
  return v;
}

RegularityOptions regularity_options(const RunConfig& cfg) {
  RegularityOptions r;
  r.net = cfg.tol("net", -1.0);
  r.samples_per_radius = cfg.grid("ball_samples", 32);
  r.seed = cfg.seed;
  return r;
}

InverterOptions inverter_options(const RunConfig& cfg) {
  InverterOptions o;
  o.tol = cfg.tol("invert", 1e-10);
  o.max_iter = cfg.grid("max_iter", 100);
  o.corrector_iter = cfg.grid("corrector_iter", 50);
  o.seed = cfg.seed;
  return o;
}

BetaProfile build_profile(const RunConfig& cfg, const Context& ctx, const Vector& center, double t_max) {
  BetaOptions bo;
  bo.grid_n = cfg.grid("profile", 128);
  bo.samples_per_shell = cfg.grid("shell", 64);
  bo.regularity = regularity_options(cfg);
  std::optional<AnalyticBeta> analytic;
  if (cfg.analytic_beta) {
    if (!ctx.map.analytic_beta) throw ConfigError(cfg.map_id + " has no analytic regularity profile");
    if (center.norm() != 0.0) throw ConfigError("analytic profiles are centered at the origin");
    analytic = ctx.map.analytic_beta;
  }
  return beta_profile(ctx.map, ctx.provider, center, t_max, bo, analytic);
}

void write_csv_if_requested(const RunConfig& cfg, const BetaProfile& profile) {
  if (cfg.csv_path.empty()) return;
  std::ofstream csv(cfg.csv_path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write '" + cfg.csv_path + "'");
  write_profile_csv(csv, profile);
}

void emit(std::ostream& out, const json& record) { out << record.dump() << '\n'; }

int cmd_catalog(std::ostream& out) {
  for (const auto& e : catalog_listing()) out << e.id << '\t' << e.dims << '\t' << e.description << '\n';
  return kSuccess;
}

int cmd_certify(const RunConfig& cfg, json& report) {
  const Context ctx = resolve(cfg);
  const Vector center = vector_or_zero(cfg.point, ctx.map.dim_in, "point");
  if (!(cfg.t_max > 0.0)) throw ConfigError("t_max must be positive");
  const BetaProfile profile = build_profile(cfg, ctx, center, cfg.t_max);
  const RegularityReport at_center = regularity_index(ctx.map, ctx.provider, center, regularity_options(cfg));
  const HadamardResult hv = hadamard_verdict(profile);
  write_csv_if_requested(cfg, profile);

  const double net = cfg.tol("net", -1.0);
  const double margin = 10.0 * (net > 0.0 ? net : 1e-9);
  const double alpha_min = profile.beta.back();
  const bool certified = (profile.mode == BetaProfile::Mode::analytic || profile.all_certified) &&
                         at_center.bound_kind == RegularityReport::BoundKind::certified;
  std::string verdict;
  if (hv.verdict == HadamardVerdict::fails || alpha_min <= margin || !at_center.regular) verdict = "not-regular";
  else if (hv.verdict == HadamardVerdict::inconclusive_flat ||
           (profile.mode == BetaProfile::Mode::analytic && !profile.divergent))
    verdict = "inconclusive";
  else verdict = certified ? "regular-certified" : "regular-sampled";

  report["config"]["analytic_beta"] = cfg.analytic_beta;
  report["config"]["t_max"] = number(cfg.t_max);
  report["config"]["grid_n"] = static_cast<int>(profile.grid.size());
  report["config"]["point"] = to_json(center);
  report["verdict"] = verdict;
  report["alpha_min"] = number(alpha_min);
  report["alpha_center"] = number(at_center.alpha);
  report["bound_kind"] = profile.mode == BetaProfile::Mode::analytic ? "analytic" : (certified ? "certified" : "sampled");
  report["rho_at_tmax"] = number(hv.rho_at_tmax);
  report["hadamard"] = to_string(hv.verdict);
  json witnesses = json::array();
  if (!profile.witnesses.empty())
    witnesses.push_back({{"kind", "beta_argmin"}, {"point", to_json(profile.witnesses.back())}});
  witnesses.push_back({{"kind", "center_conorm_witness"}, {"operator", to_json(at_center.witness)}});
  report["witnesses"] = witnesses;
  return verdict.rfind("regular-", 0) == 0 ? kSuccess : kNegative;
}

int cmd_invert(const RunConfig& cfg, std::ostream& out, json& report) {
  const Context ctx = resolve(cfg);
  if (cfg.target.empty()) throw ConfigError("invert needs a target");
  const Vector target = vector_or_zero(cfg.target, ctx.map.dim_out, "target");
  const Vector x0 = vector_or_zero(cfg.x0, ctx.map.dim_in, "x0");
  const InversionMethod method = parse_method(cfg.method);
  const InversionTrace trace = invert(ctx.map, ctx.provider, method, target, x0, inverter_options(cfg),
                                      cfg.grid("path_steps", 16), cfg.lambda, cfg.eps);
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    json it;
    it["kind"] = "iterate";
    it["index"] = k;
    it["t"] = number(trace.t_grid[k]);
    it["x"] = to_json(trace.iterates[k]);
    it["residual"] = number(trace.residuals[k]);
    emit(out, it);
  }
  report["kind"] = "summary";
  report["config"]["method"] = to_string(method);
  report["config"]["target"] = to_json(target);
  report["config"]["x0"] = to_json(x0);
  report["method"] = to_string(trace.method);
  report["status"] = to_string(trace.status);
  report["final_x"] = to_json(trace.final_x);
  report["final_residual"] = number(trace.final_residual);
  report["iterations"] = trace.iterates.size() - 1;
  report["used_pseudo_inverse"] = trace.used_pseudo_inverse;
  report["note"] = trace.note;
  report["witness"] = trace.witness ? to_json(*trace.witness) : json(nullptr);
  return trace.converged() ? kSuccess : kNegative;
}

int cmd_ball_check(const RunConfig& cfg, json& report) {
  const Context ctx = resolve(cfg);
  const Vector x0 = vector_or_zero(cfg.x0, ctx.map.dim_in, "x0");
  if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
  const BetaProfile profile = build_profile(cfg, ctx, x0, cfg.delta);
  BallInclusionOptions bo;
  bo.margin = cfg.tol("margin", 0.02);
  bo.method = parse_method(cfg.method);
  bo.provider = ctx.provider;
  bo.inverter = inverter_options(cfg);
  bo.path_steps = cfg.grid("path_steps", 16);
  bo.seed = cfg.seed;
  const BallInclusionResult res = ball_inclusion_test(ctx.map, x0, cfg.delta, profile, cfg.grid("samples", 50), bo);
  report["config"]["x0"] = to_json(x0);
  report["config"]["delta"] = number(cfg.delta);
  report["config"]["analytic_beta"] = cfg.analytic_beta;
  report["rho"] = number(res.rho);
  report["pass_rate"] = number(res.pass_rate);
  report["passed"] = res.passed;
  report["samples"] = res.samples;
  json failures = json::array();
  for (const auto& y : res.failures) failures.push_back(to_json(y));
  report["failures"] = failures;
  return res.passed == res.samples ? kSuccess : kNegative;
}

int cmd_profile(const RunConfig& cfg, std::ostream& out, json& report) {
  const Context ctx = resolve(cfg);
  const Vector center = vector_or_zero(cfg.point, ctx.map.dim_in, "point");
  if (!(cfg.t_max > 0.0)) throw ConfigError("t_max must be positive");
  const BetaProfile profile = build_profile(cfg, ctx, center, cfg.t_max);
  if (cfg.csv_path.empty()) {
    write_profile_csv(out, profile);
    report = nullptr;  // the CSV is the whole output
    return kSuccess;
  }
  write_csv_if_requested(cfg, profile);
  const HadamardResult hv = hadamard_verdict(profile);
  report["config"]["t_max"] = number(cfg.t_max);
  report["config"]["analytic_beta"] = cfg.analytic_beta;
  report["hadamard"] = to_string(hv.verdict);
  report["rho_at_tmax"] = number(hv.rho_at_tmax);
  report["beta_at_tmax"] = number(hv.beta_at_tmax);
  return kSuccess;
}

PseudoJacobianSet shrink_toward_centroid(const PseudoJacobianSet& j, double factor) {
  Operator centroid = Operator::Zero(j.rows(), j.cols());
  for (const auto& v : j.vertices) centroid += v;
  centroid /= static_cast<double>(j.vertices.size());
  PseudoJacobianSet out;
  for (const auto& v : j.vertices) out.vertices.push_back(centroid + factor * (v - centroid));
  out.radius = factor * j.radius;
  return out;
}

int cmd_check(const RunConfig& cfg, json& report) {
  const Context ctx = resolve(cfg);
  const Vector point = vector_or_zero(cfg.point, ctx.map.dim_in, "point");
  const double pass_rate_needed = cfg.tol("pass_rate", 0.99);
  ValidityOptions vo;
  vo.trials = cfg.grid("trials", 1000);
  vo.tol = cfg.tol("check", -1.0);
  vo.seed = cfg.seed;
  bool pass = false;
  report["config"]["suite"] = cfg.suite;
  report["config"]["point"] = to_json(point);
  report["negative_control"] = cfg.negative_control;

  if (cfg.suite == "validity") {
    PseudoJacobianSet j = pseudo_jacobian(ctx.map, point, ctx.provider, cfg.seed);
    if (cfg.negative_control) j = shrink_toward_centroid(j, 0.5);
    const ValidityReport v = validity_check(ctx.map, point, j, vo);
    pass = v.pass_rate >= pass_rate_needed;
    report["pass_rate"] = number(v.pass_rate);
    report["worst_excess"] = number(v.worst_excess);
    report["trials"] = v.trials;
  } else if (cfg.suite == "chain") {
    const Vector fx = evaluate(ctx.map, point);
    const MapModel outer = make_distance(fx + Vector::Unit(fx.size(), 0));
    const ValidityReport v = chain_rule_check(ctx.map, outer, ctx.provider, point, vo);
    pass = v.pass_rate >= pass_rate_needed;
    report["pass_rate"] = number(v.pass_rate);
    report["worst_excess"] = number(v.worst_excess);
    report["trials"] = v.trials;
  } else if (cfg.suite == "mvt") {
    const bool clarke = ctx.provider.kind == ProviderSpec::Kind::clarke;
    const double tol = cfg.tol("check", clarke ? 1e-3 : 1e-6);
    const int pairs = cfg.grid("pairs", 20);
    const int segment = cfg.grid("segment", 64);
    Rng rng = make_rng(cfg.seed, 0x3f7);
    double worst = 0.0;
    int passed = 0;
    for (int p = 0; p < pairs; ++p) {
      const Vector u = random_in_ball(rng, point, cfg.tol("box", 1.0));
      const Vector v = random_in_ball(rng, point, cfg.tol("box", 1.0));
      const CheckResult r = mvt_check(ctx.map, ctx.provider, u, v, segment, tol, cfg.seed + static_cast<std::uint64_t>(p));
      worst = std::max(worst, r.distance);
      passed += r.pass ? 1 : 0;
    }
    pass = passed == pairs;
    report["passed"] = passed;
    report["pairs"] = pairs;
    report["max_distance"] = number(worst);
  } else if (cfg.suite == "optimality") {
    const double tol = cfg.tol("check", 1e-6 + ctx.provider.eps);
    const CheckResult r = optimality_check(ctx.map, ctx.provider, point, tol, cfg.seed);
    pass = r.pass;
    report["distance"] = number(r.distance);
  } else {
    throw ConfigError("unknown check suite '" + cfg.suite + "' (mvt, optimality, validity, chain)");
  }
  report["pass"] = pass;
  return pass ? kSuccess : kNegative;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if (command == "catalog") return cmd_catalog(out);
    json report;
    report["command"] = command;
    report["config"] = config_echo(cfg, command);
    std::ostringstream body;
    int code = kConfigError;
    if (command == "certify") code = cmd_certify(cfg, report);
    else if (command == "invert") code = cmd_invert(cfg, body, report);
    else if (command == "ball-check") code = cmd_ball_check(cfg, report);
    else if (command == "profile") code = cmd_profile(cfg, body, report);
    else if (command == "check") code = cmd_check(cfg, report);
    else throw ConfigError("unknown command '" + command + "'");
    // Wall time is opt-in so that default reports stay byte-identical.
    if (cfg.timing && !report.is_null())
      report["timing_ms"] =
          number(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    out << body.str();
    if (!report.is_null()) emit(out, report);
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InversionFailure& e) {
    err << "computation failure: " << e.what() << '\n';
    return kComputationError;
  } catch (const std::exception& e) {
    err << "computation failure: " << e.what() << '\n';
    return kComputationError;
  }
}

}  // namespace pjinv
