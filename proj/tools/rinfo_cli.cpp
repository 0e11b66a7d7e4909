#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "rinfo/csv.hpp"
#include "rinfo/error.hpp"
#include "rinfo/experiment.hpp"

namespace fs = std::filesystem;
using namespace rinfo;

namespace {

enum Exit { kOk = 0, kConfig = 1, kDegenerate = 2, kIo = 3 };

// Flags shared by run and eval: profile, config file and one flag per key.
struct ConfigFlags {
  std::string profile = "default";
  std::string config_file;
  bool print_config = false;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--profile", profile, "Base settings: default, paper or reduced")
        ->check(CLI::IsMember({"default", "paper", "reduced"}));
    app->add_option("--config", config_file, "INI file applied over the profile")
        ->check(CLI::ExistingFile);
    app->add_flag("--print-config", print_config, "Print the resolved configuration and exit");
    for (const auto& key : config_keys()) app->add_option("--" + key, values[key], "Overrides " + key);
  }

  // profile < config file < RINFO_OUT_DIR < explicit flags
  ExperimentConfig resolve(CLI::App* app) const {
    ExperimentConfig cfg;
    if (profile == "paper") cfg = ExperimentConfig::paper_profile();
    if (profile == "reduced") cfg = ExperimentConfig::reduced_profile();
    if (!config_file.empty()) load_config_file(cfg, config_file);
    if (const char* env = std::getenv("RINFO_OUT_DIR"); env && *env) cfg.out_dir = env;
    for (const auto& key : config_keys())
      if (app->count("--" + key) > 0) apply_setting(cfg, key, values.at(key));
    cfg.validate();
    return cfg;
  }
};

EvaluationSettings settings_of(const ExperimentConfig& cfg) {
  return {cfg.tasks, cfg.phases, cfg.tau_max, cfg.mi_steps, cfg.top_k};
}

void print_evaluation(const EvaluationResult& r) {
  if (r.memory) std::cout << "MC  " << csv::format_double(r.memory->total) << '\n';
  if (r.bool2) std::cout << "BC2 " << csv::format_double(r.bool2->score.total) << '\n';
  if (r.bool3) std::cout << "BC3 " << csv::format_double(r.bool3->score.total) << '\n';
  std::cout << "top50 " << csv::format_double(r.weights.mean_abs_internal_top50) << " input "
            << csv::format_double(r.weights.mean_abs_input) << '\n';
}

std::string rules_csv(const std::vector<int>& arities) {
  std::ostringstream s;
  s << "arity,rule_id,truth_table,separable\n";
  for (int n : arities) {
    for (const auto& r : enumerate_rules(n)) {
      s << n << ',' << r.rule_id << ',';
      for (auto b : r.truth_table) s << static_cast<int>(b);
      s << ',' << (r.separable ? 1 : 0) << '\n';
    }
  }
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrent infomax reservoir experiments"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "Run RI training with periodic benchmark evaluation");
  run_flags.attach(run);

  ConfigFlags eval_flags;
  std::string snapshot, eval_out;
  std::uint64_t eval_seed = 1;
  auto* eval = app.add_subcommand("eval", "Evaluate one checkpoint with frozen learning");
  eval->add_option("snapshot", snapshot, "Checkpoint directory")->required();
  eval->add_option("--seed", eval_seed, "Benchmark seed");
  eval->add_option("--out", eval_out, "Directory for benchmark.csv, analysis.csv and the summary");
  eval_flags.attach(eval);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Aggregate a run directory across trials");
  report->add_option("run_dir", report_dir, "Run directory")->required();

  std::vector<int> arities{2, 3};
  std::string rules_out;
  auto* rules = app.add_subcommand("rules", "Enumerate Boolean rules with separability tags");
  rules->add_option("--arity", arities, "Arities to list")->check(CLI::IsMember({2, 3}));
  rules->add_option("--out", rules_out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) {
      const ExperimentConfig cfg = run_flags.resolve(run);
      if (run_flags.print_config) {
        std::cout << format_config(cfg);
        return kOk;
      }
      const RunTrace trace = run_experiment(cfg);
      int skipped = 0;
      for (const auto& j : trace.jobs) skipped += j.skipped_updates;
      std::cout << trace.jobs.size() << " jobs written to " << cfg.out_dir.string() << ", "
                << skipped << " skipped updates\n";
    } else if (*eval) {
      const ExperimentConfig cfg = eval_flags.resolve(eval);
      if (eval_flags.print_config) {
        std::cout << format_config(cfg);
        return kOk;
      }
      std::optional<fs::path> out;
      if (!eval_out.empty()) out = eval_out;
      print_evaluation(evaluate_checkpoint(snapshot, settings_of(cfg), eval_seed, out));
    } else if (*report) {
      for (const auto& p : sweep_report(report_dir)) std::cout << p.string() << '\n';
    } else if (*rules) {
      const std::string text = rules_csv(arities);
      if (rules_out.empty())
        std::cout << text;
      else
        csv::write_text(rules_out, text);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DegenerateStatsError& e) {
    std::cerr << "degenerate statistics (" << e.matrix() << "): " << e.what() << '\n';
    return kDegenerate;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
