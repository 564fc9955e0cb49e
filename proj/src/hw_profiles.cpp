#include "hurricane/hw_profiles.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hurricane/errors.hpp"
#include "hurricane/random.hpp"

namespace hurricane {

std::optional<double> LatencyTable::find(int layer, const std::string& op_id) const {
  const auto it = entries.find({layer, op_id});
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

double LatencyTable::at(int layer, const std::string& op_id) const {
  const auto v = find(layer, op_id);
  if (!v) {
    throw Error(ErrorCode::MissingLatency,
                "no latency for (layer " + std::to_string(layer) + ", " + op_id + ")", layer);
  }
  return *v;
}

void LatencyTable::insert(int layer, const std::string& op_id, double latency_ms) {
  if (!(latency_ms > 0.0) || !std::isfinite(latency_ms)) {
    throw Error(ErrorCode::NonPositiveLatency,
                "latency for (layer " + std::to_string(layer) + ", " + op_id +
                    ") must be positive and finite",
                layer);
  }
  if (!entries.emplace(Key{layer, op_id}, latency_ms).second) {
    throw Error(ErrorCode::DuplicateKey,
                "duplicate entry for (layer " + std::to_string(layer) + ", " + op_id + ")", layer);
  }
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

LatencyTable parse_latency_csv(std::istream& in) {
  LatencyTable table;
  table.source = "measured";
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "hardware,layer,operator,latency_ms") {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": expected header hardware,layer,operator,latency_ms");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(row);
    const auto bad = [&](const std::string& why) {
      return Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 4) throw bad("expected 4 fields");
    const auto hw = trim(fields[0]);
    const auto layer_s = trim(fields[1]);
    const auto op = trim(fields[2]);
    const auto lat_s = trim(fields[3]);
    int layer = 0;
    if (auto [p, ec] = std::from_chars(layer_s.data(), layer_s.data() + layer_s.size(), layer);
        ec != std::errc{} || p != layer_s.data() + layer_s.size() || layer < 1) {
      throw bad("invalid layer '" + std::string(layer_s) + "'");
    }
    double latency = 0.0;
    if (auto [p, ec] = std::from_chars(lat_s.data(), lat_s.data() + lat_s.size(), latency);
        ec != std::errc{} || p != lat_s.data() + lat_s.size()) {
      throw bad("invalid latency '" + std::string(lat_s) + "'");
    }
    if (op.empty()) throw bad("empty operator id");
    if (table.hardware.empty()) {
      table.hardware = std::string(hw);
    } else if (table.hardware != hw) {
      throw bad("mixed hardware ids in one table");
    }
    table.insert(layer, std::string(op), latency);
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "line 1: missing header");
  return table;
}

LatencyTable load_latency_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_latency_csv(in);
}

void write_latency_csv(std::ostream& out, const LatencyTable& table) {
  out << "hardware,layer,operator,latency_ms\n";
  for (const auto& [key, latency] : table.entries) {
    out << table.hardware << ',' << key.first << ',' << key.second << ',' << format_double(latency)
        << '\n';
  }
}

void save_latency_table(const std::filesystem::path& path, const LatencyTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_latency_csv(out, table);
}

std::string_view to_string(HardwareKind kind) {
  switch (kind) {
    case HardwareKind::DSP: return "dsp";
    case HardwareKind::CPU: return "cpu";
    case HardwareKind::VPU: return "vpu";
    case HardwareKind::Custom: return "custom";
  }
  return "?";
}

HardwareKind parse_hardware_kind(std::string_view name) {
  if (name == "dsp" || name == "DSP") return HardwareKind::DSP;
  if (name == "cpu" || name == "CPU") return HardwareKind::CPU;
  if (name == "vpu" || name == "VPU") return HardwareKind::VPU;
  throw Error(ErrorCode::InvalidConfig, "unknown hardware kind '" + std::string(name) + "'");
}

CostRules builtin_rules(HardwareKind kind) {
  CostRules r;
  r.name = std::string(to_string(kind));
  switch (kind) {
    case HardwareKind::DSP:
      // Compute bound; large depthwise kernels fall off the fast path.
      r.base_ms = 4.4e-9;
      r.flops_weight = 1.0;
      r.memory_weight = {0.1, 0.1, 0.1, 0.1};
      r.kernel_penalty = {1.0, 3.0, 6.0};
      r.se_penalty = 1.1;
      break;
    case HardwareKind::CPU:
      // Memory bound except for the shuffle units, whose split/concat path is tuned.
      r.base_ms = 3.2e-8;
      r.flops_weight = 1.0;
      r.memory_weight = {8.0, 8.0, 0.5, 0.5};
      r.kernel_penalty = {1.0, 1.3, 1.7};
      r.se_penalty = 1.2;
      break;
    case HardwareKind::VPU:
      // SE falls back to the host; kernel size is nearly free.
      r.base_ms = 9.0e-9;
      r.flops_weight = 1.0;
      r.memory_weight = {0.3, 0.3, 0.3, 0.3};
      r.kernel_penalty = {1.0, 1.05, 1.1};
      r.se_penalty = 15.0;
      break;
    case HardwareKind::Custom:
      throw Error(ErrorCode::InvalidConfig, "custom hardware needs explicit CostRules");
  }
  return r;
}

namespace {

int kernel_slot(int k) { return k == 3 ? 0 : (k == 5 ? 1 : 2); }

}  // namespace

LatencyTable synth_profile(const CostRules& rules, const Backbone& backbone,
                           const std::vector<OperatorSpec>& pool, std::uint64_t seed) {
  LatencyTable table;
  table.hardware = rules.name;
  table.source = "synthetic";
  table.seed = seed;
  for (int i = 0; i < backbone.n_layers(); ++i) {
    const int layer = i + 1;
    for (const auto& op : pool) {
      const auto cost = cost_of(op, backbone.contexts[i]);
      const auto id = op.id();
      const double work = rules.flops_weight * static_cast<double>(cost.flops) +
                          rules.memory_weight[static_cast<int>(op.family)] *
                              static_cast<double>(cost.mem_bytes);
      const double jitter = rules.jitter * (2.0 * hash_unit(seed, static_cast<std::uint64_t>(layer), id) - 1.0);
      const double latency = rules.base_ms * work * rules.kernel_penalty[kernel_slot(op.kernel)] *
                             (op.se ? rules.se_penalty : 1.0) * (1.0 + jitter);
      table.insert(layer, id, latency);
    }
  }
  return table;
}

LatencyTable synth_profile(HardwareKind kind, const Backbone& backbone,
                           const std::vector<OperatorSpec>& pool, std::uint64_t seed) {
  return synth_profile(builtin_rules(kind), backbone, pool, seed);
}

std::vector<LatencyTable::Key> coverage_check(const LatencyTable& table, const Backbone& backbone,
                                              const std::vector<OperatorSpec>& pool) {
  std::vector<LatencyTable::Key> missing;
  for (int layer = 1; layer <= backbone.n_layers(); ++layer) {
    for (const auto& op : pool) {
      auto id = op.id();
      if (!table.find(layer, id)) missing.emplace_back(layer, std::move(id));
    }
  }
  return missing;
}

}  // namespace hurricane
