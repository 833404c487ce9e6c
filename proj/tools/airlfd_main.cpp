#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "airlfd/error.hpp"
#include "airlfd/pipeline.hpp"
#include "airlfd/runconfig.hpp"

namespace {

std::string flag_name(const std::string& key) {
  std::string out = "--";
  for (char c : key) out += c == '_' ? '-' : c;
  return out;
}

int dispatch(const std::string& command, const airlfd::RunConfig& cfg) {
  using namespace airlfd::pipeline;
  if (command == "synth") {
    run_synth(cfg);
    std::printf("wrote %s (%d files)\n", cfg.manifest_file().c_str(), cfg.n_files);
  } else if (command == "train") {
    run_train(cfg);
    std::printf("wrote %s\n", cfg.model_file().c_str());
  } else if (command == "score") {
    run_score(cfg);
    std::printf("wrote %s\n", cfg.scores_file().c_str());
  } else if (command == "baseline") {
    run_baseline(cfg);
    std::printf("wrote %s\n", cfg.scores_file().c_str());
  } else if (command == "detect") {
    run_detect(cfg);
    std::printf("wrote %s\n", cfg.detect_file().c_str());
  } else if (command == "eval") {
    run_eval(cfg);
    std::printf("wrote %s\n", cfg.report_file().c_str());
  } else if (command == "plot") {
    run_plot(cfg);
    std::printf("wrote %s\n", cfg.plot_file().c_str());
  } else if (command == "gradcheck") {
    const auto rows = run_gradcheck(cfg);
    bool ok = true;
    for (const auto& row : rows) {
      const bool pass = row.max_rel_err <= 1e-4;
      ok = ok && pass;
      std::printf("%-12s max_rel_err=%.3e %s\n", row.name.c_str(), row.max_rel_err,
                  pass ? "ok" : "FAIL");
    }
    if (!ok) airlfd::fail(airlfd::ErrorCode::NumericFailure, "gradcheck exceeded 1e-4");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial transition-plausibility fault detection pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (keys = documented parameters)");

  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> opts;
  for (const std::string& key : airlfd::config_keys()) {
    opts[key] = app.add_option(flag_name(key), raw[key]);
  }

  for (const char* name : {"synth", "train", "score", "detect", "baseline", "eval", "gradcheck",
                           "plot"}) {
    app.add_subcommand(name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) overrides.emplace_back(key, raw[key]);
    const airlfd::RunConfig cfg = airlfd::parse_config(config_path, overrides);
    return dispatch(app.get_subcommands().front()->get_name(), cfg);
  } catch (const airlfd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(airlfd::category(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
