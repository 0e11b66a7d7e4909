#include "rinfo/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "rinfo/csv.hpp"
#include "rinfo/error.hpp"
#include "rinfo/snapshot.hpp"

namespace rinfo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRiTraceHeader =
    "block,mi_nats,logdet_c,logdet_d,jitter,mean_abs_w_internal_top50,mean_abs_w_input";
constexpr const char* kBenchmarkHeader =
    "block,task,K_multiplicity,rule_id,separable,tau,score_train,score_test";
constexpr const char* kAnalysisHeader = "block,stat,neuron_or_edge,value";
constexpr const char* kEdgeHeader = "src,dst,weight,abs_rank";

std::mutex log_mutex;

void log_line(const std::string& s) {
  std::lock_guard lock(log_mutex);
  std::cerr << s << '\n';
}

std::string block_name(int block) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "block_%06d", block);
  return buf;
}

std::string fmt(double v) { return csv::format_double(v); }

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  try {
    if constexpr (std::is_floating_point_v<T>) {
      return static_cast<T>(csv::parse_double(value));
    } else {
      const long long v = csv::parse_int(value);
      if constexpr (std::is_unsigned_v<T>) {
        if (v < 0) throw ParseError("negative");
      }
      return static_cast<T>(v);
    }
  } catch (const ParseError&) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t[]");
  const auto e = s.find_last_not_of(" \t[]");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  for (auto& part : csv::split(trim(value), ',')) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(v) + "' for " + std::string(key));
}

// Setters and getters for every config key, in file order.
struct KeySpec {
  std::string key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = [] {
    std::vector<KeySpec> s;
    auto int_key = [&](std::string key, auto member) {
      s.push_back({key,
                   [key, member](ExperimentConfig& c, std::string_view v) {
                     std::invoke(member, c) = parse_number<std::remove_reference_t<
                         decltype(std::invoke(member, c))>>(key, v);
                   },
                   [member](const ExperimentConfig& c) {
                     std::ostringstream o;
                     o << std::invoke(member, c);
                     return o.str();
                   }});
    };
    int_key("n_neurons", [](auto& c) -> auto& { return c.n_neurons; });
    s.push_back({"sigma2_init",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.sigma2_init = parse_number<double>("sigma2_init", v);
                 },
                 [](const ExperimentConfig& c) { return fmt(c.sigma2_init); }});
    s.push_back({"k_sweep",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.k_sweep.clear();
                   for (const auto& k : split_list(v)) c.k_sweep.push_back(parse_number<int>("k_sweep", k));
                 },
                 [](const ExperimentConfig& c) {
                   std::string o;
                   for (std::size_t k = 0; k < c.k_sweep.size(); ++k)
                     o += (k ? "," : "") + std::to_string(c.k_sweep[k]);
                   return o;
                 }});
    int_key("n_trials", [](auto& c) -> auto& { return c.n_trials; });
    int_key("eval_every", [](auto& c) -> auto& { return c.eval_every; });
    int_key("checkpoint_every", [](auto& c) -> auto& { return c.checkpoint_every; });
    int_key("tau_max", [](auto& c) -> auto& { return c.tau_max; });
    s.push_back({"tasks",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.tasks.clear();
                   for (const auto& t : split_list(v)) c.tasks.push_back(parse_task(t));
                 },
                 [](const ExperimentConfig& c) {
                   std::string o;
                   for (std::size_t k = 0; k < c.tasks.size(); ++k)
                     o += (k ? "," : "") + std::string(task_name(c.tasks[k]));
                   return o;
                 }});
    int_key("mi_steps", [](auto& c) -> auto& { return c.mi_steps; });
    int_key("top_k", [](auto& c) -> auto& { return c.top_k; });
    s.push_back({"out_dir", [](ExperimentConfig& c, std::string_view v) { c.out_dir = std::string(v); },
                 [](const ExperimentConfig& c) { return c.out_dir.string(); }});
    int_key("master_seed", [](auto& c) -> auto& { return c.master_seed; });
    int_key("threads", [](auto& c) -> auto& { return c.threads; });
    int_key("stop_at_block", [](auto& c) -> auto& { return c.stop_at_block; });
    s.push_back({"evaluate",
                 [](ExperimentConfig& c, std::string_view v) { c.evaluate = parse_bool("evaluate", v); },
                 [](const ExperimentConfig& c) { return std::string(c.evaluate ? "true" : "false"); }});
    s.push_back({"ri.eta",
                 [](ExperimentConfig& c, std::string_view v) { c.ri.eta = parse_number<double>("ri.eta", v); },
                 [](const ExperimentConfig& c) { return fmt(c.ri.eta); }});
    int_key("ri.block_steps", [](auto& c) -> auto& { return c.ri.block_steps; });
    int_key("ri.settle_steps", [](auto& c) -> auto& { return c.ri.settle_steps; });
    int_key("ri.n_blocks", [](auto& c) -> auto& { return c.ri.n_blocks; });
    int_key("phases.washout", [](auto& c) -> auto& { return c.phases.washout; });
    int_key("phases.learning", [](auto& c) -> auto& { return c.phases.learning; });
    int_key("phases.testing", [](auto& c) -> auto& { return c.phases.testing; });
    return s;
  }();
  return specs;
}

// ---------------------------------------------------------------------------
// Job execution

std::optional<std::pair<int, fs::path>> latest_checkpoint(const fs::path& dir) {
  const auto root = dir / "checkpoints";
  if (!fs::exists(root)) return std::nullopt;
  static const std::regex name(R"(block_(\d+))");
  std::optional<std::pair<int, fs::path>> best;
  for (const auto& entry : fs::directory_iterator(root)) {
    std::smatch m;
    const auto fname = entry.path().filename().string();
    if (!entry.is_directory() || !std::regex_match(fname, m, name)) continue;
    if (!fs::exists(entry.path() / "manifest.json")) continue;
    const int block = std::stoi(m[1]);
    if (!best || block > best->first) best = {{block, entry.path()}};
  }
  return best;
}

void save_checkpoint(const fs::path& dir, const NetworkParams& params, const NetworkState& state,
                     const SnapshotMeta& meta) {
  const auto root = dir / "checkpoints";
  const auto target = root / block_name(meta.block);
  const auto tmp = root / (".tmp_" + block_name(meta.block));
  fs::remove_all(tmp);
  save_snapshot(tmp, params, state, meta);
  fs::remove_all(target);
  fs::rename(tmp, target);
}

// Removes per-evaluation files at or after `block` so a resumed run rewrites them.
void drop_files_from(const fs::path& dir, int block) {
  static const std::regex name(R"(block_(\d+)\.(json|csv))");
  for (const auto* sub : {"summaries", "top_connections"}) {
    if (!fs::exists(dir / sub)) continue;
    for (const auto& entry : fs::directory_iterator(dir / sub)) {
      std::smatch m;
      const auto fname = entry.path().filename().string();
      if (std::regex_match(fname, m, name) && std::stoi(m[1]) >= block) fs::remove(entry.path());
    }
  }
}

void write_status(const fs::path& dir, bool completed, int last_block, int skipped) {
  const json status = {{"completed", completed}, {"last_block", last_block}, {"skipped_updates", skipped}};
  csv::write_text(dir / "status.json", status.dump(2) + "\n");
}

EvaluationSettings settings_of(const ExperimentConfig& cfg) {
  return {cfg.tasks, cfg.phases, cfg.tau_max, cfg.mi_steps, cfg.top_k};
}

void run_job(const ExperimentConfig& cfg, int trial, int k) {
  const fs::path dir = job_dir(cfg.out_dir, trial, k);
  fs::create_directories(dir);
  RIConfig ri = cfg.ri;
  ri.input_multiplicity = k;

  NetworkParams params;
  NetworkState state;
  SnapshotMeta meta;
  meta.seed = cfg.master_seed;
  meta.trial = trial;
  meta.input_multiplicity = k;
  int start = 0;
  if (const auto latest = latest_checkpoint(dir)) {
    Snapshot snap = load_snapshot(latest->second);
    if (snap.params.n_neurons() != cfg.n_neurons)
      throw ConfigError("checkpoint in " + dir.string() + " has N = " +
                        std::to_string(snap.params.n_neurons()) + ", config says " +
                        std::to_string(cfg.n_neurons));
    params = std::move(snap.params);
    state = std::move(snap.state);
    meta.skipped_updates = snap.meta.skipped_updates;
    start = latest->first;
  } else {
    params = init_network(cfg.n_neurons, cfg.sigma2_init, derive_seed(cfg.master_seed, {std::uint64_t(trial)}, "init"));
    state = NetworkState::zeros(cfg.n_neurons);
  }
  csv::truncate_rows(dir / "ri_trace.csv", "block", start);
  csv::truncate_rows(dir / "benchmark.csv", "block", start);
  csv::truncate_rows(dir / "analysis.csv", "block", start);
  drop_files_from(dir, start);

  csv::Appender ri_trace(dir / "ri_trace.csv", kRiTraceHeader);
  const EvaluationSettings settings = settings_of(cfg);
  const auto tk = static_cast<std::uint64_t>(trial), kk = static_cast<std::uint64_t>(k);
  const std::string tag = "[trial " + std::to_string(trial) + " K " + std::to_string(k) + "] ";

  int b = start;
  for (;; ++b) {
    const auto bb = static_cast<std::uint64_t>(b);
    const bool eval_block = b % cfg.eval_every == 0 || b == ri.n_blocks;
    const bool stopping = cfg.stop_at_block >= 0 && b >= cfg.stop_at_block && b < ri.n_blocks;
    if (eval_block || stopping || b % cfg.checkpoint_every == 0) {
      meta.block = b;
      ri_trace.flush();
      save_checkpoint(dir, params, state, meta);
    }
    if (stopping) {
      write_status(dir, false, b, meta.skipped_updates);
      log_line(tag + "stopped at block " + std::to_string(b));
      return;
    }
    if (cfg.evaluate && eval_block) {
      const auto result = evaluate_params(params, settings, derive_seed(cfg.master_seed, {tk, kk, bb}, "eval"), b);
      export_evaluation(dir, result, k);
      std::string line = tag + "block " + std::to_string(b);
      if (result.memory) line += " MC=" + fmt(result.memory->total);
      log_line(line);
    }
    if (b >= ri.n_blocks) break;

    Rng rng(derive_seed(cfg.master_seed, {tk, kk, bb}, "ri"));
    InputSource input = InputSource::bernoulli(params.p0_bar, derive_seed(cfg.master_seed, {tk, kk, bb}, "ri-input"));
    BlockSimulation sim = simulate_block(params, state, ri, input, rng);
    const WeightSummary ws = weight_summary(params, b);
    std::vector<std::string> row{std::to_string(b)};
    try {
      const MiReport mi = gaussian_mi(sim.stats);
      const GradientMatrix grad = mi_gradient(sim.stats, centering_rates(sim.params));
      params = apply_ri_update(sim.params, grad, ri);
      row.insert(row.end(), {fmt(mi.mi), fmt(mi.log_det_c), fmt(mi.log_det_d), fmt(mi.jitter_applied)});
      if (mi.jitter_applied > 0.0)
        log_line(tag + "block " + std::to_string(b) + ": jitter " + fmt(mi.jitter_applied) + " applied");
    } catch (const DegenerateStatsError& e) {
      ++meta.skipped_updates;
      params = std::move(sim.params);
      row.insert(row.end(), {"nan", "nan", "nan", "nan"});
      log_line(tag + "block " + std::to_string(b) + ": update skipped (" + e.what() + ")");
    }
    state = std::move(sim.state);
    row.push_back(fmt(ws.mean_abs_internal_top50));
    row.push_back(fmt(ws.mean_abs_input));
    ri_trace.row(row);
  }
  ri_trace.flush();
  write_status(dir, true, b, meta.skipped_updates);
}

}  // namespace

std::string_view task_name(Task t) {
  switch (t) {
    case Task::memory: return "memory";
    case Task::bool2: return "bool2";
    case Task::bool3: return "bool3";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  if (name == "memory") return Task::memory;
  if (name == "bool2") return Task::bool2;
  if (name == "bool3") return Task::bool3;
  throw ConfigError("unknown task '" + std::string(name) + "' (memory, bool2, bool3)");
}

void ExperimentConfig::validate() const {
  if (n_neurons < 1) throw ConfigError("n_neurons must be >= 1");
  if (!(sigma2_init > 0.0)) throw ConfigError("sigma2_init must be > 0");
  ri.validate();
  if (k_sweep.empty()) throw ConfigError("k_sweep must not be empty");
  for (int k : k_sweep)
    if (k < 1 || k > 35) throw ConfigError("k_sweep values must lie in [1, 35]");
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
  phases.validate();
  if (tau_max < 1) throw ConfigError("tau_max must be >= 1");
  if (phases.washout < tau_max + 2) throw ConfigError("phases.washout must be at least tau_max + 2");
  if (mi_steps < 2) throw ConfigError("mi_steps must be >= 2");
  if (top_k < 1 || top_k > n_neurons * (n_neurons + 1)) throw ConfigError("top_k must lie in [1, N(N+1)]");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (out_dir.empty()) throw ConfigError("out_dir must be set");
}

ExperimentConfig ExperimentConfig::paper_profile() {
  ExperimentConfig c;
  c.k_sweep.clear();
  for (int k = 1; k <= 35; ++k) c.k_sweep.push_back(k);
  c.out_dir = "runs/paper";
  return c;
}

ExperimentConfig ExperimentConfig::reduced_profile() {
  ExperimentConfig c;
  c.n_neurons = 30;
  c.ri.block_steps = 20'000;
  c.ri.settle_steps = 10'000;
  c.ri.n_blocks = 1500;
  c.eval_every = 250;
  c.checkpoint_every = 250;
  c.tau_max = 20;
  c.n_trials = 5;
  c.k_sweep = {1, 5, 30};
  c.out_dir = "runs/reduced";
  return c;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : key_specs()) k.push_back(s.key);
    return k;
  }();
  return keys;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& s : key_specs()) {
    if (s.key == key) {
      s.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void load_config_file(ExperimentConfig& cfg, const fs::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      apply_setting(cfg, key, node.data());
      continue;
    }
    for (const auto& [sub, leaf] : node) apply_setting(cfg, key + "." + sub, leaf.data());
  }
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& s : key_specs()) {
    std::string key = s.key;
    std::string sec;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      sec = key.substr(0, dot);
      key = key.substr(dot + 1);
    }
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << key << " = " << s.get(cfg) << '\n';
  }
  return out.str();
}

fs::path job_dir(const fs::path& out_dir, int trial, int k) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "trial_%02d_K%02d", trial, k);
  return out_dir / buf;
}

RunTrace run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());
  csv::write_text(cfg.out_dir / "config.ini", format_config(cfg));

  std::vector<std::pair<int, int>> jobs;
  for (int t = 0; t < cfg.n_trials; ++t)
    for (int k : cfg.k_sweep) jobs.emplace_back(t, k);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(jobs.size(), cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs.size());
  auto work = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        run_job(cfg, jobs[j].first, jobs[j].second);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunTrace trace;
  for (const auto& [t, k] : jobs) trace.jobs.push_back(load_job_trace(job_dir(cfg.out_dir, t, k)));
  return trace;
}

JobTrace load_job_trace(const fs::path& dir) {
  JobTrace jt;
  jt.dir = dir;
  static const std::regex name(R"(trial_(\d+)_K(\d+))");
  std::smatch m;
  const auto fname = dir.filename().string();
  if (!std::regex_match(fname, m, name)) throw ParseError(dir.string() + ": not a job directory");
  jt.trial = std::stoi(m[1]);
  jt.input_multiplicity = std::stoi(m[2]);

  if (fs::exists(dir / "ri_trace.csv")) {
    const auto t = csv::read_table(dir / "ri_trace.csv");
    const auto cb = t.column("block"), cm = t.column("mi_nats"), cc = t.column("logdet_c"),
               cd = t.column("logdet_d"), cj = t.column("jitter"),
               ct = t.column("mean_abs_w_internal_top50"), ci = t.column("mean_abs_w_input");
    for (const auto& r : t.rows) {
      BlockRecord br;
      br.block = static_cast<int>(csv::parse_int(r[cb]));
      br.mi = {csv::parse_double(r[cm]), csv::parse_double(r[cc]), csv::parse_double(r[cd]),
               csv::parse_double(r[cj])};
      br.skipped = std::isnan(br.mi.mi);
      br.mean_abs_internal_top50 = csv::parse_double(r[ct]);
      br.mean_abs_input = csv::parse_double(r[ci]);
      if (!jt.blocks.empty() && br.block <= jt.blocks.back().block)
        throw ParseError(dir.string() + "/ri_trace.csv: block indices must increase");
      jt.blocks.push_back(br);
    }
  }
  if (fs::exists(dir / "summaries")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / "summaries"))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f);
      const json j = json::parse(in);
      EvaluationRecord er;
      er.block = j.at("block").get<int>();
      for (const auto* key : {"MC", "BC2", "BC3"})
        if (j.contains(key)) er.totals[key] = j.at(key).get<double>();
      er.checkpoint = dir / "checkpoints" / block_name(er.block);
      jt.evaluations.push_back(std::move(er));
    }
  }
  if (const auto latest = latest_checkpoint(dir)) jt.last_checkpoint = latest->first;
  if (fs::exists(dir / "status.json")) {
    std::ifstream in(dir / "status.json");
    const json s = json::parse(in);
    jt.completed = s.value("completed", false);
    jt.skipped_updates = s.value("skipped_updates", 0);
  }
  return jt;
}

// ---------------------------------------------------------------------------
// Evaluation

EvaluationResult evaluate_params(const NetworkParams& params, const EvaluationSettings& settings,
                                 std::uint64_t seed, int block) {
  EvaluationResult r;
  r.block = block;
  r.weights = weight_summary(params, block);
  r.top = top_connections(params, std::min(settings.top_k, params.n_neurons() * (params.n_neurons() + 1)));

  const bool any_task = !settings.tasks.empty();
  if (any_task) {
    const BenchmarkRun run = simulate_benchmark(params, settings.phases, derive_seed(seed, {}, "benchmark"));
    for (Task t : settings.tasks) {
      switch (t) {
        case Task::memory: r.memory = memory_capacity(run, settings.tau_max); break;
        case Task::bool2: {
          const auto rules = enumerate_rules(2);
          r.bool2 = boolean_capacity(run, rules, settings.tau_max);
          break;
        }
        case Task::bool3: {
          const auto rules = enumerate_rules(3);
          r.bool3 = boolean_capacity(run, rules, settings.tau_max);
          break;
        }
      }
    }
  }

  // Lag-1 neuron-input MI on a fresh run: washout with adaptation, then frozen sampling.
  Rng rng(derive_seed(seed, {}, "mi"));
  InputSource input = InputSource::bernoulli(params.p0_bar, derive_seed(seed, {}, "mi-input"));
  NetworkParams p = params;
  NetworkState state = NetworkState::zeros(params.n_neurons());
  if (settings.phases.washout > 0) {
    auto washed = run_phase(std::move(p), std::move(state), settings.phases.washout, input, rng,
                            {.adapt_bias = true, .record = false});
    p = std::move(washed.params);
    state = std::move(washed.state);
  }
  const auto sampled = run_phase(std::move(p), std::move(state), settings.mi_steps, input, rng,
                                 {.adapt_bias = false, .record = true});
  r.neuron_input_mi = neuron_input_mi(sampled.trace);
  return r;
}

void export_evaluation(const fs::path& dir, const EvaluationResult& r, int input_multiplicity) {
  fs::create_directories(dir / "summaries");
  fs::create_directories(dir / "top_connections");
  const std::string block = std::to_string(r.block);
  const std::string kstr = std::to_string(input_multiplicity);

  json summary = {{"block", r.block}, {"K", input_multiplicity}};
  {
    csv::Appender bench(dir / "benchmark.csv", kBenchmarkHeader);
    if (r.memory) {
      for (std::size_t t = 0; t < r.memory->per_delay.size(); ++t)
        bench.row({block, "memory", kstr, "-1", "-1", std::to_string(t + 1),
                   fmt(r.memory->per_delay_train[t]), fmt(r.memory->per_delay[t])});
      summary["MC"] = r.memory->total;
      summary["per_delay"]["memory"] = r.memory->per_delay;
      summary["degenerate_targets"]["memory"] = r.memory->degenerate_targets;
    }
    auto boolean = [&](const char* task, const char* total_key, const BooleanCapacityResult& res) {
      json per_rule = json::array();
      for (const auto& rs : res.per_rule) {
        for (std::size_t t = 0; t < rs.per_delay.size(); ++t)
          bench.row({block, task, kstr, std::to_string(rs.rule.rule_id), rs.rule.separable ? "1" : "0",
                     std::to_string(t + 1), fmt(rs.per_delay_train[t]), fmt(rs.per_delay[t])});
        per_rule.push_back({{"rule_id", rs.rule.rule_id}, {"separable", rs.rule.separable}, {"total", rs.total}});
      }
      summary[total_key] = res.score.total;
      summary["per_delay"][task] = res.score.per_delay;
      summary["per_rule"][task] = per_rule;
      summary["degenerate_targets"][task] = res.score.degenerate_targets;
    };
    if (r.bool2) boolean("bool2", "BC2", *r.bool2);
    if (r.bool3) boolean("bool3", "BC3", *r.bool3);
    bench.flush();
  }
  {
    csv::Appender analysis(dir / "analysis.csv", kAnalysisHeader);
    for (std::size_t i = 0; i < r.neuron_input_mi.size(); ++i)
      analysis.row({block, "neuron_input_mi", std::to_string(i + 1), fmt(r.neuron_input_mi[i])});
    analysis.row({block, "mean_abs_internal_top50", "all", fmt(r.weights.mean_abs_internal_top50)});
    analysis.row({block, "mean_abs_internal_all", "all", fmt(r.weights.mean_abs_internal_all)});
    analysis.row({block, "mean_abs_input", "all", fmt(r.weights.mean_abs_input)});
    for (const auto& c : r.top)
      analysis.row({block, "top_connection", std::to_string(c.src) + "-" + std::to_string(c.dst), fmt(c.weight)});
    analysis.flush();
  }
  std::ostringstream edges;
  edges << kEdgeHeader << '\n';
  for (const auto& c : r.top) edges << c.src << ',' << c.dst << ',' << fmt(c.weight) << ',' << c.abs_rank << '\n';
  csv::write_text(dir / "top_connections" / (block_name(r.block) + ".csv"), edges.str());

  summary["neuron_input_mi"] = r.neuron_input_mi;
  summary["weights"] = {{"mean_abs_internal_top50", r.weights.mean_abs_internal_top50},
                        {"mean_abs_internal_all", r.weights.mean_abs_internal_all},
                        {"mean_abs_input", r.weights.mean_abs_input},
                        {"top50_truncated", r.weights.top50_truncated}};
  summary["estimators"] = {{"neuron_input_mi", "plug-in, nats"}, {"readout", "least squares with intercept, minimum norm"}};
  csv::write_text(dir / "summaries" / (block_name(r.block) + ".json"), summary.dump(2) + "\n");
}

EvaluationResult evaluate_checkpoint(const fs::path& snapshot, const EvaluationSettings& settings,
                                     std::uint64_t seed, const std::optional<fs::path>& out_dir) {
  const Snapshot snap = load_snapshot(snapshot);
  EvaluationResult r = evaluate_params(snap.params, settings, seed, snap.meta.block);
  if (out_dir) {
    fs::create_directories(*out_dir);
    export_evaluation(*out_dir, r, snap.meta.input_multiplicity);
  }
  return r;
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd m;
  m.n = static_cast<int>(values.size());
  if (values.empty()) return m;
  double acc = 0.0;
  for (double v : values) acc += v;
  m.mean = acc / m.n;
  if (m.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / (m.n - 1));
  }
  return m;
}

}  // namespace rinfo
