#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <tuple>

#include "rinfo/csv.hpp"
#include "rinfo/error.hpp"
#include "rinfo/experiment.hpp"

namespace rinfo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) { return csv::format_double(v); }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Collected {
  // (K, block) -> per-trial values
  std::map<std::pair<int, int>, std::vector<double>> mi, top50, input;
  // (K, block, task) -> per-trial totals
  std::map<std::tuple<int, int, std::string>, std::vector<double>> totals;
  // (K, block, task, tau) -> per-trial values
  std::map<std::tuple<int, int, std::string, int>, std::vector<double>> per_delay;
  // (K, block, task, rule_id) -> per-trial totals; separability on the side
  std::map<std::tuple<int, int, std::string, int>, std::vector<double>> per_rule;
  std::map<std::pair<std::string, int>, bool> separable;
  // (K, block) -> neuron-input MI pooled over neurons and trials
  std::map<std::pair<int, int>, std::vector<double>> neuron_mi;
};

void collect_job(const fs::path& dir, Collected& c) {
  const JobTrace jt = load_job_trace(dir);
  const int k = jt.input_multiplicity;
  for (const auto& b : jt.blocks) {
    if (!b.skipped) c.mi[{k, b.block}].push_back(b.mi.mi);
    c.top50[{k, b.block}].push_back(b.mean_abs_internal_top50);
    c.input[{k, b.block}].push_back(b.mean_abs_input);
  }
  if (!fs::exists(dir / "summaries")) return;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir / "summaries"))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    const json j = json::parse(in);
    const int block = j.at("block").get<int>();
    const std::pair<const char*, const char*> tasks[] = {{"memory", "MC"}, {"bool2", "BC2"}, {"bool3", "BC3"}};
    for (const auto& [task, key] : tasks) {
      if (!j.contains(key)) continue;
      c.totals[{k, block, key}].push_back(j.at(key).get<double>());
      const auto delays = j.at("per_delay").at(task).get<std::vector<double>>();
      for (std::size_t t = 0; t < delays.size(); ++t)
        c.per_delay[{k, block, task, static_cast<int>(t + 1)}].push_back(delays[t]);
      if (j.contains("per_rule") && j.at("per_rule").contains(task)) {
        for (const auto& r : j.at("per_rule").at(task)) {
          const int id = r.at("rule_id").get<int>();
          c.per_rule[{k, block, task, id}].push_back(r.at("total").get<double>());
          c.separable[{task, id}] = r.at("separable").get<bool>();
        }
      }
    }
    if (j.contains("neuron_input_mi")) {
      auto& pool = c.neuron_mi[{k, block}];
      for (double v : j.at("neuron_input_mi").get<std::vector<double>>()) pool.push_back(v);
    }
  }
}

}  // namespace

std::vector<fs::path> sweep_report(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw IoError(run_dir.string() + " is not a directory");
  static const std::regex job(R"(trial_\d+_K\d+)");
  std::vector<fs::path> jobs;
  for (const auto& e : fs::directory_iterator(run_dir))
    if (e.is_directory() && std::regex_match(e.path().filename().string(), job)) jobs.push_back(e.path());
  if (jobs.empty()) throw IoError("no job directories under " + run_dir.string());
  std::sort(jobs.begin(), jobs.end());

  Collected c;
  for (const auto& j : jobs) collect_job(j, c);

  const fs::path out = run_dir / "report";
  fs::create_directories(out);
  std::vector<fs::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    csv::write_text(out / name, text);
    written.push_back(out / name);
  };

  {
    std::ostringstream s;
    s << "K,block,n,mi_mean,mi_sd,top50_mean,top50_sd,input_mean,input_sd\n";
    for (const auto& [key, top] : c.top50) {
      const auto mi = c.mi.count(key) ? mean_sd(c.mi.at(key)) : MeanSd{};
      const auto t = mean_sd(top), in = mean_sd(c.input.at(key));
      s << key.first << ',' << key.second << ',' << t.n << ',' << fmt(mi.mean) << ',' << fmt(mi.sd) << ','
        << fmt(t.mean) << ',' << fmt(t.sd) << ',' << fmt(in.mean) << ',' << fmt(in.sd) << '\n';
    }
    emit("mi_by_block.csv", s.str());
  }
  {
    std::ostringstream s;
    s << "K,block,task,n,mean,sd\n";
    for (const auto& [key, v] : c.totals) {
      const auto m = mean_sd(v);
      s << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << m.n << ','
        << fmt(m.mean) << ',' << fmt(m.sd) << '\n';
    }
    emit("scores_by_block.csv", s.str());
  }
  {
    std::ostringstream s;
    s << "K,block,task,tau,n,mean,sd\n";
    for (const auto& [key, v] : c.per_delay) {
      const auto m = mean_sd(v);
      s << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << std::get<3>(key)
        << ',' << m.n << ',' << fmt(m.mean) << ',' << fmt(m.sd) << '\n';
    }
    emit("per_delay.csv", s.str());
  }
  {
    // Sorted by mean score within each (K, block, task).
    std::map<std::tuple<int, int, std::string>, std::vector<std::pair<int, MeanSd>>> groups;
    for (const auto& [key, v] : c.per_rule)
      groups[{std::get<0>(key), std::get<1>(key), std::get<2>(key)}].emplace_back(std::get<3>(key), mean_sd(v));
    std::ostringstream s;
    s << "K,block,task,rank,rule_id,separable,n,mean,sd\n";
    for (auto& [key, rows] : groups) {
      std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second.mean != b.second.mean) return a.second.mean > b.second.mean;
        return a.first < b.first;
      });
      int rank = 1;
      for (const auto& [id, m] : rows)
        s << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << rank++ << ',' << id
          << ',' << (c.separable.at({std::get<2>(key), id}) ? 1 : 0) << ',' << m.n << ',' << fmt(m.mean) << ','
          << fmt(m.sd) << '\n';
    }
    emit("per_rule.csv", s.str());
  }
  {
    std::ostringstream s;
    s << "K,block,n,min,q1,median,q3,max,mean\n";
    for (const auto& [key, v] : c.neuron_mi) {
      s << key.first << ',' << key.second << ',' << v.size() << ',' << fmt(quantile(v, 0.0)) << ','
        << fmt(quantile(v, 0.25)) << ',' << fmt(quantile(v, 0.5)) << ',' << fmt(quantile(v, 0.75)) << ','
        << fmt(quantile(v, 1.0)) << ',' << fmt(mean_sd(v).mean) << '\n';
    }
    emit("neuron_input_mi.csv", s.str());
  }
  return written;
}

}  // namespace rinfo
