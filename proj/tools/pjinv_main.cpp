#include "pjinv/reports.hpp"
#include "pjinv/types.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>
#include <vector>

namespace {

// Flags given on the command line override the config file, so they are
// collected as key/value pairs and applied after it.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> raw_sets;
};

void add_common(CLI::App* sub, Overrides& o, std::string& config_path) {
  auto string_opt = [&](const char* flag, const char* key, const char* help) {
    sub->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.pairs.emplace_back(key, v); }, help);
  };
  sub->add_option("--config", config_path, "key = value config file");
  string_opt("--map", "map", "catalog identifier");
  string_opt("--provider", "provider", "exact | ball:r=,m= | sum | clarke:delta=,m=,eps=");
  string_opt("--seed", "seed", "non-negative integer seed");
  string_opt("--out", "out", "report path (default stdout)");
  string_opt("--csv", "csv", "profile CSV path");
  sub->add_option("--set", o.raw_sets, "extra key=value pairs, e.g. tol.net=1e-3");
  sub->add_flag_function("--timing", [&o](std::int64_t) { o.pairs.emplace_back("timing", "true"); },
                         "add timing_ms to the report");
}

void add_string(CLI::App* sub, Overrides& o, const char* flag, const char* key, const char* help) {
  sub->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.pairs.emplace_back(key, v); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularity certification and inversion of nonsmooth maps"};
  app.require_subcommand(1);
  Overrides o;
  std::string config_path;

  auto* catalog = app.add_subcommand("catalog", "list map identifiers");
  (void)catalog;

  auto* certify = app.add_subcommand("certify", "regularity profile and Hadamard verdict");
  add_common(certify, o, config_path);
  add_string(certify, o, "--point", "point", "profile center");
  add_string(certify, o, "--t-max", "t_max", "profile radius");
  certify->add_flag_function("--analytic-beta", [&o](std::int64_t) { o.pairs.emplace_back("analytic_beta", "true"); },
                             "use the map's analytic beta");

  auto* inv = app.add_subcommand("invert", "solve f(x) = y");
  add_common(inv, o, config_path);
  add_string(inv, o, "--target", "target", "y as comma-separated floats");
  add_string(inv, o, "--x0", "x0", "start point");
  add_string(inv, o, "--method", "method", "newton | path | ekeland");
  add_string(inv, o, "--lambda", "lambda", "Ekeland lambda");
  add_string(inv, o, "--eps", "eps", "Ekeland epsilon");

  auto* ball = app.add_subcommand("ball-check", "empirical ball inclusion");
  add_common(ball, o, config_path);
  add_string(ball, o, "--x0", "x0", "center");
  add_string(ball, o, "--delta", "delta", "domain radius");
  add_string(ball, o, "--method", "method", "inversion method");
  ball->add_flag_function("--analytic-beta", [&o](std::int64_t) { o.pairs.emplace_back("analytic_beta", "true"); },
                          "use the map's analytic beta");

  auto* profile = app.add_subcommand("profile", "write the beta/rho profile as CSV");
  add_common(profile, o, config_path);
  add_string(profile, o, "--point", "point", "profile center");
  add_string(profile, o, "--t-max", "t_max", "profile radius");
  profile->add_flag_function("--analytic-beta", [&o](std::int64_t) { o.pairs.emplace_back("analytic_beta", "true"); },
                             "use the map's analytic beta");

  auto* check = app.add_subcommand("check", "property suites");
  add_common(check, o, config_path);
  add_string(check, o, "--suite", "suite", "mvt | optimality | validity | chain");
  add_string(check, o, "--point", "point", "base point");
  check->add_flag_function("--negative-control",
                           [&o](std::int64_t) { o.pairs.emplace_back("negative_control", "true"); },
                           "shrink the set to show the check can fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pjinv::kSuccess : pjinv::kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  pjinv::RunConfig cfg;
  try {
    if (!config_path.empty()) pjinv::load_config_file(config_path, cfg);
    for (const auto& [k, v] : o.pairs) cfg.set(k, v);
    for (const auto& s : o.raw_sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw pjinv::ConfigError("--set expects key=value");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
  } catch (const pjinv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return pjinv::kConfigError;
  }

  if (cfg.out_path.empty()) return pjinv::run_command(command, cfg, std::cout, std::cerr);
  std::ostringstream buffer;
  const int code = pjinv::run_command(command, cfg, buffer, std::cerr);
  std::ofstream out(cfg.out_path, std::ios::binary);
  if (!out) {
    std::cerr << "config error: cannot write '" << cfg.out_path << "'\n";
    return pjinv::kConfigError;
  }
  out << buffer.str();
  return code;
}
