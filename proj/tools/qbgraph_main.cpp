// qbgraph: command-line front end for the experiment drivers.
//
// Exit status: 0 success, 1 input error, 2 numeric error, 3 failed --check.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "qbgraph/qbgraph.hpp"

namespace {

const std::vector<std::string> kCharge = {"n", "h", "kappa", "omega", "charger-modes", "dt", "t-max"};

const std::map<std::string, std::vector<std::string>>& subcommand_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = [] {
    std::map<std::string, std::vector<std::string>> k;
    k["enumerate"] = {"n", "h", "all"};
    k["sweep-atlas"] = kCharge;
    k["bench-ratios"] = {"n", "model", "samples", "check"};
    k["scaling"] = kCharge;
    k["correlate"] = kCharge;
    k["dynamics"] = kCharge;
    k["dynamics"].insert(k["dynamics"].end(), {"preset", "topology"});
    k["independence"] = kCharge;
    k["conjecture"] = {"n", "spot-samples", "spot-n", "spot-model", "check"};
    return k;
  }();
  return keys;
}

const char* describe(const std::string& cmd) {
  if (cmd == "enumerate") return "list non-isomorphic graphs with spectral metrics";
  if (cmd == "sweep-atlas") return "exhaustive charging sweep over connected graphs";
  if (cmd == "bench-ratios") return "envelope ratio over random ensembles";
  if (cmd == "scaling") return "star P_max versus size with a power-law fit";
  if (cmd == "correlate") return "P_init versus P_max correlation grid";
  if (cmd == "dynamics") return "work and power traces";
  if (cmd == "independence") return "independence number versus P_max";
  if (cmd == "conjecture") return "exhaustive and sampled minimal-mode overlap check";
  return "";
}

bool is_flag(const std::string& key) { return key == "all" || key == "check"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and dynamical analysis of graph-structured fermionic batteries", "qbgraph"};
  // --h is the local field, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", qbg::kVersion);

  std::map<std::string, std::string> given;
  std::map<std::string, bool> flags;
  std::string config_path;
  app.add_option("--config", config_path, "key = value run config; flags override it");
  for (const char* key : {"out", "seed", "format", "jobs"})
    app.add_option(std::string("--") + key, given[key], qbg::schema_key(key).help);

  std::map<std::string, CLI::App*> subs;
  for (const auto& [cmd, keys] : subcommand_keys()) {
    auto* sub = app.add_subcommand(cmd, describe(cmd));
    for (const auto& key : keys) {
      if (is_flag(key))
        sub->add_flag("--" + key, flags[key], qbg::schema_key(key).help);
      else
        sub->add_option("--" + key, given[key], qbg::schema_key(key).help);
    }
    subs[cmd] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    qbg::RunConfig cfg;
    if (!config_path.empty()) cfg = qbg::RunConfig::load(config_path);
    for (const auto& [key, value] : given)
      if (!value.empty()) cfg.set(key, value);
    for (const auto& [key, on] : flags)
      if (on) cfg.set(key, "true");

    std::string cmd;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) cmd = name;

    const auto out = qbg::run_command(cmd, cfg);
    std::cout << out.summary.dump(2) << "\n";
    if (out.check_failed) {
      std::cerr << "qbgraph " << cmd << ": check failed\n";
      return 3;
    }
    return 0;
  } catch (const qbg::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const qbg::UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 1;
  } catch (const qbg::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  }
}
