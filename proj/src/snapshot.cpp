#include "rinfo/snapshot.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

#include "rinfo/csv.hpp"
#include "rinfo/error.hpp"

namespace rinfo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string matrix_csv(const Matrix& m) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << csv::format_double(m(i, j));
    }
    out << '\n';
  }
  return out.str();
}

Matrix read_matrix(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
  const auto name = path.filename().string();
  if (!fs::exists(path)) throw ParseError(name + ": file missing");
  const auto table = csv::read_table(path, false);
  if (static_cast<Eigen::Index>(table.rows.size()) != rows)
    throw ParseError(name + ": expected " + std::to_string(rows) + " rows, found " +
                     std::to_string(table.rows.size()));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = table.rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.size()) != cols)
      throw ParseError(name + ": row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) +
                       " columns, expected " + std::to_string(cols));
    for (Eigen::Index j = 0; j < cols; ++j) {
      try {
        m(i, j) = csv::parse_double(r[static_cast<std::size_t>(j)]);
      } catch (const ParseError& e) {
        throw ParseError(name + ": " + e.what());
      }
    }
  }
  return m;
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("manifest.json: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("manifest.json: field '") + key + "' has the wrong type");
  }
}

}  // namespace

void save_snapshot(const fs::path& dir, const NetworkParams& params, const NetworkState& state,
                   const SnapshotMeta& meta) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const int n = params.n_neurons();
  csv::write_text(dir / "w_recurrent.csv", matrix_csv(params.w_recurrent));
  csv::write_text(dir / "w_input.csv", matrix_csv(params.w_input));
  csv::write_text(dir / "bias.csv", matrix_csv(params.bias));
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = state.x[static_cast<std::size_t>(i)];
  csv::write_text(dir / "state.csv", matrix_csv(x));

  // Doubles travel as shortest round-trip strings so restores are exact.
  json p_bar = json::array();
  for (int i = 0; i < n; ++i) p_bar.push_back(csv::format_double(params.p_bar[i]));
  json manifest = {
      {"n_neurons", n},
      {"p_max", csv::format_double(params.p_max)},
      {"p_bar", p_bar},
      {"p0_bar", csv::format_double(params.p0_bar)},
      {"epsilon", csv::format_double(params.epsilon)},
      {"deterministic", params.deterministic},
      {"seed", meta.seed},
      {"block", meta.block},
      {"trial", meta.trial},
      {"input_multiplicity", meta.input_multiplicity},
      {"skipped_updates", meta.skipped_updates},
      {"t", state.t},
  };
  csv::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Snapshot load_snapshot(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw ParseError("manifest.json: file missing in " + dir.string());
  json manifest;
  try {
    std::ifstream in(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest.json: ") + e.what());
  }
  auto num = [&](const char* key) {
    try {
      return csv::parse_double(field<std::string>(manifest, key));
    } catch (const ParseError& e) {
      throw ParseError(std::string("manifest.json: field '") + key + "': " + e.what());
    }
  };

  Snapshot s;
  const int n = field<int>(manifest, "n_neurons");
  if (n < 1) throw ParseError("manifest.json: field 'n_neurons' must be >= 1");
  auto& p = s.params;
  p.p_max = num("p_max");
  p.p0_bar = num("p0_bar");
  p.epsilon = num("epsilon");
  p.deterministic = field<bool>(manifest, "deterministic");
  const auto p_bar = field<std::vector<std::string>>(manifest, "p_bar");
  if (static_cast<int>(p_bar.size()) != n)
    throw ParseError("manifest.json: field 'p_bar' length does not match n_neurons");
  p.p_bar.resize(n);
  for (int i = 0; i < n; ++i) p.p_bar[i] = csv::parse_double(p_bar[static_cast<std::size_t>(i)]);

  p.w_recurrent = read_matrix(dir / "w_recurrent.csv", n, n);
  p.w_input = read_matrix(dir / "w_input.csv", n, 1).col(0);
  p.bias = read_matrix(dir / "bias.csv", n, 1).col(0);
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("snapshot: ") + e.what());
  }

  s.state = NetworkState::zeros(n);
  if (fs::exists(dir / "state.csv")) {
    const Matrix x = read_matrix(dir / "state.csv", n, 1);
    for (int i = 0; i < n; ++i) {
      if (x(i, 0) != 0.0 && x(i, 0) != 1.0) throw ParseError("state.csv: entries must be 0 or 1");
      s.state.x[static_cast<std::size_t>(i)] = x(i, 0) != 0.0;
    }
  }
  s.state.t = manifest.value("t", std::int64_t{0});
  s.meta.seed = field<std::uint64_t>(manifest, "seed");
  s.meta.block = field<int>(manifest, "block");
  s.meta.trial = manifest.value("trial", 0);
  s.meta.input_multiplicity = manifest.value("input_multiplicity", 1);
  s.meta.skipped_updates = manifest.value("skipped_updates", 0);
  return s;
}

void write_trace_csv(const fs::path& path, const StateTrace& trace) {
  std::ostringstream out;
  out << "t,u";
  char name[32];
  for (int i = 1; i <= trace.n_neurons; ++i) {
    std::snprintf(name, sizeof name, ",x_%04d", i);
    out << name;
  }
  out << '\n';
  for (std::size_t k = 0; k < trace.length(); ++k) {
    out << trace.t_start + static_cast<std::int64_t>(k) << ',' << int(trace.inputs[k]);
    for (Bit b : trace.row(k)) out << ',' << int(b);
    out << '\n';
  }
  csv::write_text(path, out.str());
}

StateTrace read_trace_csv(const fs::path& path) {
  const auto table = csv::read_table(path);
  if (table.header.size() < 3 || table.header[0] != "t" || table.header[1] != "u")
    throw ParseError(path.filename().string() + ": header must start with t,u,x_0001");
  StateTrace trace;
  trace.n_neurons = static_cast<int>(table.header.size()) - 2;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& r = table.rows[k];
    if (k == 0) trace.t_start = csv::parse_int(r[0]);
    auto bit = [&](const std::string& cell) -> Bit {
      if (cell == "0") return 0;
      if (cell == "1") return 1;
      throw ParseError(path.filename().string() + ": non-binary cell '" + cell + "'");
    };
    trace.inputs.push_back(bit(r[1]));
    for (std::size_t c = 2; c < r.size(); ++c) trace.states.push_back(bit(r[c]));
  }
  return trace;
}

}  // namespace rinfo
