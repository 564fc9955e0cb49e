#include "hurricane/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "hurricane/errors.hpp"
#include "hurricane/random.hpp"

namespace hurricane {

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ';';
    out += ids[i];
  }
  return out;
}

SynthOracle::SynthOracle(SynthOracleConfig config) : config_(config) {
  if (!(config_.rho > 0.0)) throw Error(ErrorCode::InvalidConfig, "rho must be positive");
  if (config_.epsilon < 0.0) throw Error(ErrorCode::InvalidConfig, "epsilon must be non-negative");
}

void SynthOracle::prepare(const SearchSpace& space) {
  const int n = space.n_layers();
  weights_.assign(n, 0.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    weights_[i] = std::pow(config_.rho, n - 1 - i);
    total += weights_[i];
  }
  for (auto& w : weights_) w /= total;
  ids_.assign(n, {});
  for (int i = 0; i < n; ++i) {
    for (const auto& op : space.candidates[i]) ids_[i].push_back(op.id());
  }
  unary_.assign(n, {});
  pair_.assign(n > 0 ? n - 1 : 0, {});
  for (int i = 0; i < n; ++i) {
    for (const auto& id : ids_[i]) unary_[i].push_back(unary(i + 1, id));
    if (i + 1 == n) continue;
    for (const auto& left : ids_[i]) {
      for (const auto& right : ids_[i + 1]) pair_[i].push_back(pair(i + 1, left, right));
    }
  }
  space_ = space;
}

double SynthOracle::unary(int layer, const std::string& op_id) const {
  return hash_unit(config_.seed, static_cast<std::uint64_t>(layer), "q:" + op_id);
}

double SynthOracle::pair(int layer, const std::string& left, const std::string& right) const {
  return 2.0 * hash_unit(config_.seed, static_cast<std::uint64_t>(layer), "p:" + left + "|" + right) - 1.0;
}

double SynthOracle::evaluate(const Architecture& arch) const {
  if (!space_) throw Error(ErrorCode::UnpreparedEvaluator, "SynthOracle used before prepare()");
  validate_architecture(*space_, arch);
  const int n = static_cast<int>(ids_.size());
  double raw = 0.0;
  for (int i = 0; i < n; ++i) raw += weights_[i] * unary_[i][arch.choices[i]];
  if (config_.epsilon > 0.0) {
    for (int i = 0; i + 1 < n; ++i) {
      const double scale = 0.5 * (weights_[i] + weights_[i + 1]);
      const auto width = ids_[i + 1].size();
      raw += config_.epsilon * scale * pair_[i][arch.choices[i] * width + arch.choices[i + 1]];
    }
  }
  return std::clamp(raw, 0.0, 1.0);
}

std::string SynthOracle::describe() const {
  std::ostringstream os;
  os << "synth:seed=" << config_.seed << ",rho=" << config_.rho << ",eps=" << config_.epsilon;
  return os.str();
}

FileOracle::FileOracle(std::map<std::string, double> table) : table_(std::move(table)) {}

FileOracle FileOracle::parse(std::istream& in) {
  std::map<std::string, double> table;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "choices,accuracy") {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected header choices,accuracy");
      }
      header = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 2 fields");
    }
    const std::string key = line.substr(0, comma);
    const std::string_view acc_s(line.data() + comma + 1, line.size() - comma - 1);
    double acc = 0.0;
    if (auto [p, ec] = std::from_chars(acc_s.data(), acc_s.data() + acc_s.size(), acc);
        ec != std::errc{} || p != acc_s.data() + acc_s.size() || acc < 0.0 || acc > 1.0) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": accuracy must be in [0,1]");
    }
    if (!table.emplace(key, acc).second) {
      throw Error(ErrorCode::DuplicateKey, "line " + std::to_string(line_no) + ": duplicate architecture");
    }
  }
  if (!header) throw Error(ErrorCode::ParseError, "line 1: missing header");
  return FileOracle(std::move(table));
}

FileOracle FileOracle::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse(in);
}

void FileOracle::prepare(const SearchSpace& space) { space_ = space; }

double FileOracle::evaluate(const Architecture& arch) const {
  if (!space_) throw Error(ErrorCode::UnpreparedEvaluator, "FileOracle used before prepare()");
  const auto key = join_ids(architecture_ids(*space_, arch));
  const auto it = table_.find(key);
  if (it == table_.end()) {
    throw Error(ErrorCode::EvaluatorFailure, "no accuracy recorded for " + key);
  }
  return it->second;
}

std::string FileOracle::describe() const { return "file:" + std::to_string(table_.size()) + " entries"; }

std::unique_ptr<Evaluator> make_evaluator(const std::string& spec) {
  if (spec.rfind("file:", 0) == 0) {
    return std::make_unique<FileOracle>(FileOracle::load(spec.substr(5)));
  }
  if (spec.rfind("synth", 0) != 0) {
    throw Error(ErrorCode::InvalidConfig, "unknown evaluator '" + spec + "'");
  }
  SynthOracleConfig cfg;
  std::string rest = spec.size() > 5 && spec[5] == ':' ? spec.substr(6) : "";
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "bad evaluator option '" + item + "'");
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    try {
      if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "rho") {
        cfg.rho = std::stod(value);
      } else if (key == "eps" || key == "epsilon") {
        cfg.epsilon = std::stod(value);
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown evaluator option '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidConfig, "bad value for evaluator option '" + key + "'");
    }
  }
  return std::make_unique<SynthOracle>(cfg);
}

BruteForceResult brute_force_best(const SearchSpace& space, const Evaluator& evaluator,
                                  const LatencyFn& latency, double tau_c) {
  const auto size = space_size(space);
  if (size > kBruteForceLimit) {
    throw Error(ErrorCode::SpaceTooLarge, "space has " + size.str() + " architectures; limit is " +
                                              std::to_string(kBruteForceLimit));
  }
  const int n = space.n_layers();
  Architecture arch{std::vector<int>(n, 0)};
  BruteForceResult result;
  bool found = false;
  // Odometer with the last layer fastest visits choices in lexicographic order,
  // so a strict comparison keeps the smallest tie.
  while (true) {
    ++result.enumerated;
    const double lat = latency(space, arch);
    if (lat <= tau_c) {
      ++result.feasible;
      const double acc = evaluator.evaluate(arch);
      if (!found || acc > result.accuracy) {
        result.best = arch;
        result.accuracy = acc;
        result.latency_ms = lat;
        found = true;
      }
    }
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++arch.choices[i] < static_cast<int>(space.candidates[i].size())) break;
      arch.choices[i] = 0;
    }
    if (i < 0) break;
  }
  if (!found) throw Error(ErrorCode::InfeasibleConstraint, "no architecture satisfies the latency constraint");
  return result;
}

}  // namespace hurricane
