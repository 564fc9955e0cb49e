#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "hurricane/backbone.hpp"
#include "hurricane/errors.hpp"
#include "hurricane/evaluator.hpp"
#include "hurricane/hw_profiles.hpp"
#include "hurricane/latency_model.hpp"
#include "hurricane/ops_catalog.hpp"
#include "hurricane/random.hpp"
#include "hurricane/spacegen.hpp"

#ifndef HURRICANE_VERSION
#define HURRICANE_VERSION "dev"
#endif

namespace hurricane::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::atoll(epoch));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int env_threads() {
  const char* v = std::getenv("HURRICANE_THREADS");
  if (!v || !*v) return 0;
  const int n = std::atoi(v);
  return n < 0 ? 0 : n;
}

Json make_manifest(const std::string& command, const Json& config, const std::vector<fs::path>& inputs,
                   std::optional<std::uint64_t> seed) {
  Json hashes = Json::object();
  for (const auto& p : inputs) {
    if (!p.empty()) hashes[p.string()] = hex64(fnv1a64(read_file(p)));
  }
  Json m{{"command", command},
         {"config", config},
         {"inputs", std::move(hashes)},
         {"seed", seed ? Json(*seed) : Json(nullptr)},
         {"tool_version", HURRICANE_VERSION},
         {"created_at", timestamp_utc()}};
  return m;
}

/// Embeds `manifest` in `doc` and seals it with the content hash.
void stamp(Json& doc, Json manifest) {
  doc["manifest"] = std::move(manifest);
  doc["manifest"]["manifest_hash"] = manifest_hash(doc);
}

/// Writes a sidecar `<file>.manifest.json` for artifacts that cannot carry one inline.
void write_sidecar(const fs::path& artifact, Json manifest) {
  manifest["artifact_hash"] = hex64(fnv1a64(read_file(artifact)));
  Json doc{{"artifact", artifact.filename().string()}};
  stamp(doc, std::move(manifest));
  write_json_file(fs::path(artifact.string() + ".manifest.json"), doc);
}

std::string format_ms(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

struct Options {
  // ops dump
  std::int64_t h = 56, w = 56, c_in = 64, c_out = 64;
  int stride = 1, bytes = kDefaultBytesPerElement, layer = 0;
  // fixtures
  std::string kind = "cpu";
  std::uint64_t seed = 0;
  std::string out;
  int n_samples = 700;
  double perturb = 0.0;
  // gen-space
  std::string profile;
  double alpha = 1.0;
  int p = 4, explore_last = 4;
  double kappa = 2.0;
  // fit-predictor
  std::string space, dataset;
  int n_train = 500, n_test = 200, max_iters = 300;
  double tol = 1e-6;
  // search
  double constraint_ms = 0.0;
  std::string latency = "additive", evaluator = "synth:seed=0", report;
  bool two_stage = false, split = false;
  int t = 8, budget = 1000, population = 50, parents = 10, crossover = 25, mutation = 25;
  double mutation_prob = 0.1;
  int max_sample_attempts = 1000;
  // report
  std::string in, format = "text";
};

std::vector<LatencySample> load_dataset(const fs::path& csv, const SearchSpace& space) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + csv.string());
  std::vector<LatencySample> out;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "arch_file,latency_ms" && line != "arch_json_path,latency_ms") {
        throw Error(ErrorCode::ParseError, csv.string() + ": expected header arch_json_path,latency_ms");
      }
      header = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::ParseError, csv.string() + ": line " + std::to_string(line_no) + ": expected 2 fields");
    }
    fs::path arch_path = line.substr(0, comma);
    if (arch_path.is_relative()) arch_path = csv.parent_path() / arch_path;
    double latency = 0.0;
    try {
      latency = std::stod(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, csv.string() + ": line " + std::to_string(line_no) + ": bad latency");
    }
    if (!(latency > 0.0)) throw Error(ErrorCode::NonPositiveLatency, csv.string() + ": line " + std::to_string(line_no));
    out.push_back({architecture_from_json(space, read_json_file(arch_path)), latency});
  }
  return out;
}

std::vector<LatencySample> synth_dataset(const SearchSpace& space, const LatencyTable& table, int count,
                                         std::uint64_t seed, double perturb) {
  Rng rng(seed);
  const auto any = [](const SearchSpace&, const Architecture&) { return 0.0; };
  std::vector<LatencySample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    auto arch = sample_constrained(space, any, 1.0, rng);
    const double lat = perturb > 0.0 ? interaction_latency(arch, space, table, perturb, seed)
                                     : additive_latency(arch, space, table);
    out.push_back({std::move(arch), lat});
  }
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_ops_dump(const Options& o, std::ostream& out) {
  LayerContext ctx{o.h, o.w, o.c_in, o.c_out, o.stride};
  if (o.layer > 0) {
    const auto bb = default_backbone();
    if (o.layer > bb.n_layers()) throw Error(ErrorCode::InvalidConfig, "layer out of range", o.layer);
    ctx = bb.contexts[o.layer - 1];
  }
  Json arr = Json::array();
  for (const auto& op : enumerate_pool()) {
    const auto cost = cost_of(op, ctx, o.bytes);
    arr.push_back(Json{{"id", op.id()},
                       {"family", to_string(op.family)},
                       {"kernel", op.kernel},
                       {"expansion", op.expansion ? Json(*op.expansion) : Json(nullptr)},
                       {"se", op.se},
                       {"flops", cost.flops},
                       {"params", cost.params},
                       {"mem_bytes", cost.mem_bytes}});
  }
  if (o.out.empty()) {
    out << arr.dump(2) << '\n';
    return 0;
  }
  write_json_file(o.out, arr);
  Json config{{"h_in", ctx.h_in}, {"w_in", ctx.w_in}, {"c_in", ctx.c_in}, {"c_out", ctx.c_out},
              {"stride", ctx.stride}, {"bytes_per_element", o.bytes}};
  write_sidecar(o.out, make_manifest("ops dump", config, {}, std::nullopt));
  return 0;
}

int cmd_gen_profile(const Options& o, std::ostream& out) {
  const auto kind = parse_hardware_kind(o.kind);
  const auto table = synth_profile(kind, default_backbone(), enumerate_pool(), o.seed);
  save_latency_table(o.out, table);
  Json config{{"kind", o.kind}, {"seed", o.seed}};
  write_sidecar(o.out, make_manifest("fixtures gen-profile", config, {}, o.seed));
  out << "wrote " << table.entries.size() << " latencies for " << table.hardware << " to " << o.out << '\n';
  return 0;
}

int cmd_gen_dataset(const Options& o, std::ostream& out) {
  const auto space = space_from_json(read_json_file(o.space));
  const auto table = load_latency_table(o.profile);
  const auto samples = synth_dataset(space, table, o.n_samples, o.seed, o.perturb);
  const fs::path dir = o.out;
  fs::create_directories(dir / "archs");
  std::ofstream csv(dir / "dataset.csv", std::ios::binary);
  if (!csv) throw Error(ErrorCode::Io, "cannot write " + (dir / "dataset.csv").string());
  csv << "arch_json_path,latency_ms\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::ostringstream name;
    name << "archs/arch_" << std::setw(5) << std::setfill('0') << i << ".json";
    write_json_file(dir / name.str(), architecture_to_json(space, samples[i].arch));
    csv << name.str() << ',' << std::setprecision(17) << samples[i].latency_ms << '\n';
  }
  csv.close();
  Json config{{"space", o.space}, {"profile", o.profile}, {"n", o.n_samples}, {"seed", o.seed},
              {"perturb", o.perturb}};
  write_sidecar(dir / "dataset.csv",
                make_manifest("fixtures gen-dataset", config, {o.space, o.profile}, o.seed));
  out << "wrote " << samples.size() << " samples to " << (dir / "dataset.csv").string() << '\n';
  return 0;
}

int cmd_gen_space(const Options& o, std::ostream& out) {
  const auto table = load_latency_table(o.profile);
  const auto bb = default_backbone();
  SpaceGenConfig cfg;
  cfg.alpha = o.alpha;
  cfg.p = o.p;
  cfg.kappa = o.kappa;
  cfg.explore_layers = last_layers(bb.n_layers(), o.explore_last);
  const auto space = generate_space(bb, enumerate_pool(), table, cfg);
  auto doc = space_to_json(space);
  Json config{{"profile", o.profile}, {"alpha", o.alpha}, {"p", o.p}, {"explore_last", o.explore_last},
              {"kappa", o.kappa}};
  stamp(doc, make_manifest("gen-space", config, {o.profile}, std::nullopt));
  write_json_file(o.out, doc);
  out << "search space for " << table.hardware << ": " << space_size(space).str() << " architectures -> "
      << o.out << '\n';
  return 0;
}

int cmd_fit_predictor(const Options& o, std::ostream& out) {
  const auto space = space_from_json(read_json_file(o.space));
  std::vector<LatencySample> train, test;
  std::vector<fs::path> inputs{o.space};
  if (!o.dataset.empty()) {
    auto all = load_dataset(o.dataset, space);
    inputs.emplace_back(o.dataset);
    const auto n_train = std::min<std::size_t>(static_cast<std::size_t>(o.n_train), all.size());
    train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    const auto n_test = std::min<std::size_t>(static_cast<std::size_t>(o.n_test), all.size() - n_train);
    test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train),
                all.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  } else if (!o.profile.empty()) {
    const auto table = load_latency_table(o.profile);
    inputs.emplace_back(o.profile);
    auto all = synth_dataset(space, table, o.n_train + o.n_test, o.seed, o.perturb);
    train.assign(all.begin(), all.begin() + o.n_train);
    test.assign(all.begin() + o.n_train, all.end());
  } else {
    throw Error(ErrorCode::InvalidConfig, "fit-predictor needs --dataset or --profile");
  }
  const auto model = fit_predictor(space, train, BrrConfig{o.max_iters, o.tol});
  auto doc = model_to_json(model);
  Json metrics{{"n_train", train.size()}, {"n_test", test.size()}, {"train_mape", mape(model, space, train)}};
  if (!test.empty()) metrics["test_mape"] = mape(model, space, test);
  doc["metrics"] = metrics;
  Json config{{"space", o.space}, {"profile", o.profile}, {"dataset", o.dataset}, {"perturb", o.perturb},
              {"n_train", o.n_train}, {"n_test", o.n_test}, {"seed", o.seed}, {"max_iters", o.max_iters},
              {"tol", o.tol}};
  stamp(doc, make_manifest("fit-predictor", config, inputs, o.seed));
  write_json_file(o.out, doc);
  out << "fitted on " << train.size() << " samples (" << model.stats.iterations << " iterations, "
      << (model.stats.converged ? "converged" : "not converged") << "); train MAPE "
      << format_ms(metrics["train_mape"].get<double>()) << "%";
  if (!test.empty()) out << ", test MAPE " << format_ms(metrics["test_mape"].get<double>()) << "%";
  out << '\n';
  return 0;
}

int cmd_search(const Options& o, std::ostream& out) {
  const auto space = space_from_json(read_json_file(o.space));
  std::vector<fs::path> inputs{o.space};
  std::shared_ptr<const LatencyTable> table;
  if (!o.profile.empty()) {
    table = std::make_shared<const LatencyTable>(load_latency_table(o.profile));
    inputs.emplace_back(o.profile);
  }

  SearchRequest request;
  request.space = space;
  request.tau_c = o.constraint_ms;
  request.two_stage = o.two_stage;
  request.t = o.t;
  request.split_budget = o.split;
  if (o.latency == "additive") {
    if (!table) throw Error(ErrorCode::InvalidConfig, "--latency additive needs --profile");
    request.latency = additive_latency_fn(table);
  } else if (o.latency.rfind("predictor:", 0) == 0) {
    const fs::path model_path = o.latency.substr(10);
    auto model = std::make_shared<const PredictorModel>(model_from_json(read_json_file(model_path)));
    inputs.push_back(model_path);
    request.latency = predictor_latency_fn(std::move(model), space);
    if (table) request.audit_latency = additive_latency_fn(table);
  } else {
    throw Error(ErrorCode::InvalidConfig, "--latency must be 'additive' or 'predictor:<model.json>'");
  }

  if (o.evaluator.rfind("file:", 0) == 0) inputs.emplace_back(o.evaluator.substr(5));
  auto evaluator = make_evaluator(o.evaluator);

  EvolutionConfig cfg;
  cfg.population = o.population;
  cfg.parents_topk = o.parents;
  cfg.n_crossover = o.crossover;
  cfg.n_mutation = o.mutation;
  cfg.mutation_prob = o.mutation_prob;
  cfg.max_sample_attempts = o.max_sample_attempts;
  cfg.seed = o.seed;
  cfg.max_evaluations = o.budget;
  cfg.iterations = std::max(1, (o.budget + o.population - 1) / o.population);
  cfg.threads = env_threads();

  const auto report = two_stage_search(request, *evaluator, cfg);
  auto doc = report_to_json(report);
  doc["space_hash"] = space_hash(space);
  doc["evaluator"] = evaluator->describe();
  Json config{{"space", o.space}, {"profile", o.profile}, {"constraint_ms", o.constraint_ms},
              {"latency", o.latency}, {"evaluator", o.evaluator}, {"two_stage", o.two_stage},
              {"t", o.t}, {"budget", o.budget}, {"split", o.split}, {"population", o.population},
              {"parents", o.parents}, {"crossover", o.crossover}, {"mutation", o.mutation},
              {"mutation_prob", o.mutation_prob}, {"max_sample_attempts", o.max_sample_attempts},
              {"seed", o.seed}};
  stamp(doc, make_manifest("search", config, inputs, o.seed));
  write_json_file(o.report, doc);
  out << to_string(report.mode) << " search: accuracy " << format_ms(report.best_accuracy) << ", latency "
      << format_ms(report.best_latency) << " ms (constraint " << format_ms(report.tau_c) << " ms), "
      << report.evaluations_used << " evaluations -> " << o.report << '\n';
  return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
  const auto report = report_from_json(read_json_file(o.in));
  const auto text = render_report(report, parse_report_format(o.format));
  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + o.out);
    f << text;
  }
  return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
  bool ok = true;
  const auto line = [&](const std::string& what, bool pass) {
    out << what << ' ' << (pass ? "PASS" : "FAIL") << '\n';
    ok = ok && pass;
  };
  const auto pool = enumerate_pool();
  line("pool=" + std::to_string(pool.size()), pool.size() == 32);

  SearchSpace space;
  BigInt expected_size;
  if (!o.space.empty()) {
    space = space_from_json(read_json_file(o.space));
    expected_size = 1;
    for (const auto& layer : space.candidates) expected_size *= static_cast<unsigned>(layer.size());
  } else {
    const auto bb = default_backbone();
    const auto table = synth_profile(HardwareKind::CPU, bb, pool, o.seed);
    SpaceGenConfig cfg;
    cfg.explore_layers = last_layers(bb.n_layers(), 4);
    space = generate_space(bb, pool, table, cfg);
    expected_size = boost::multiprecision::pow(BigInt(4), 16) * boost::multiprecision::pow(BigInt(5), 4);
  }
  const auto size = space_size(space);
  line("size=" + size.str(), size == expected_size);

  const int t = std::min(o.t, space.n_layers());
  const double factor = to_double(reduction_factor(space, t));
  std::ostringstream label;
  label << "reduction(t=" << t << ")≈" << std::llround(factor);
  if (o.space.empty()) {
    line(label.str(), factor >= 65000.0 && factor <= 66000.0);
  } else {
    line(label.str(), factor >= 1.0 || t == 0 || t == space.n_layers());
  }
  return ok ? 0 : 1;
}

void emit_error(std::ostream& err, bool json, const std::string& code, const std::string& message,
                std::optional<int> layer = std::nullopt) {
  if (json) {
    Json j{{"error", code}, {"message", message}};
    if (layer) j["layer"] = *layer;
    err << j.dump() << '\n';
  } else {
    err << "error: " << message << '\n';
  }
}

/// Strips --json-errors and --config from `args`; appends config-file values
/// for options not given explicitly.
std::vector<std::string> preprocess(std::vector<std::string> args, bool& json_errors) {
  std::vector<std::string> kept;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--json-errors") {
      json_errors = true;
    } else if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!config_path) return kept;
  const auto config = read_json_file(*config_path);
  if (!config.is_object()) throw Error(ErrorCode::InvalidConfig, "config file must hold a JSON object");
  const auto given = [&](const std::string& flag) {
    for (const auto& a : kept) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  for (const auto& [key, value] : config.items()) {
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) kept.push_back(flag);
    } else if (value.is_string()) {
      kept.push_back(flag);
      kept.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      kept.push_back(flag);
      kept.push_back(value.dump());
    } else {
      throw Error(ErrorCode::InvalidConfig, "config value for '" + key + "' must be a scalar");
    }
  }
  return kept;
}

}  // namespace

std::string manifest_hash(const Json& document) {
  Json copy = document;
  if (copy.contains("manifest")) {
    copy["manifest"].erase("created_at");
    copy["manifest"].erase("manifest_hash");
  }
  return hex64(fnv1a64(copy.dump()));
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorCode::InvalidConfig, "unknown report format '" + name + "'");
}

std::string render_report(const SearchReport& r, ReportFormat format) {
  std::ostringstream os;
  os << std::setprecision(6);
  switch (format) {
    case ReportFormat::Csv:
      os << "stage,iteration,best_accuracy,mean_accuracy,population,new_evaluations,best_latency,constraint\n";
      for (const auto& h : r.history) {
        os << h.stage << ',' << h.iteration << ',' << std::setprecision(10) << h.best_accuracy << ','
           << h.mean_accuracy << ',' << h.population << ',' << h.new_evaluations << ',' << r.best_latency
           << ',' << r.tau_c << '\n';
      }
      break;
    case ReportFormat::Markdown:
      os << "# Search report\n\n";
      os << "| field | value |\n|---|---|\n";
      os << "| mode | " << to_string(r.mode) << " |\n";
      os << "| t | " << r.t << " |\n";
      os << "| best accuracy | " << r.best_accuracy << " |\n";
      os << "| best latency (ms) | " << r.best_latency << " |\n";
      os << "| constraint (ms) | " << r.tau_c << " |\n";
      if (r.audit_latency) os << "| audit latency (ms) | " << *r.audit_latency << " |\n";
      os << "| evaluations | " << r.evaluations_used << " |\n\n";
      os << "## Architecture\n\n| layer | operator |\n|---|---|\n";
      for (std::size_t i = 0; i < r.best_ids.size(); ++i) os << "| " << i + 1 << " | " << r.best_ids[i] << " |\n";
      os << "\n## Stages\n\n| stage | active layers | space size | evaluations |\n|---|---|---|---|\n";
      for (const auto& s : r.stages) {
        os << "| " << s.stage << " | " << s.first_layer << "-" << s.last_layer << " | " << s.space_size << " | "
           << s.evaluations << " |\n";
      }
      os << "\n## History\n\n| stage | iteration | best accuracy | mean accuracy |\n|---|---|---|---|\n";
      for (const auto& h : r.history) {
        os << "| " << h.stage << " | " << h.iteration << " | " << h.best_accuracy << " | " << h.mean_accuracy << " |\n";
      }
      break;
    case ReportFormat::Text:
      os << "mode:        " << to_string(r.mode) << " (t=" << r.t << ")\n";
      os << "accuracy:    " << r.best_accuracy << '\n';
      os << "latency:     " << r.best_latency << " ms (constraint " << r.tau_c << " ms)\n";
      if (r.audit_latency) os << "audit:       " << *r.audit_latency << " ms (additive table)\n";
      os << "evaluations: " << r.evaluations_used << '\n';
      os << "architecture:\n";
      for (std::size_t i = 0; i < r.best_ids.size(); ++i) {
        os << "  " << std::setw(2) << i + 1 << "  " << r.best_ids[i] << '\n';
      }
      for (const auto& s : r.stages) {
        os << "stage " << s.stage << ": layers " << s.first_layer << "-" << s.last_layer << ", " << s.space_size
           << " architectures, " << s.evaluations << " evaluations\n";
      }
      os << "history:\n  stage iter  best      mean\n";
      int last_stage = r.history.empty() ? 0 : r.history.front().stage;
      for (const auto& h : r.history) {
        if (h.stage != last_stage) {
          os << "  ---- stage boundary ----\n";
          last_stage = h.stage;
        }
        os << "  " << std::setw(5) << h.stage << ' ' << std::setw(4) << h.iteration << "  " << std::setw(8)
           << h.best_accuracy << "  " << std::setw(8) << h.mean_accuracy << '\n';
      }
      break;
  }
  return os.str();
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  bool json_errors = std::find(raw_args.begin(), raw_args.end(), "--json-errors") != raw_args.end();
  Options o;
  CLI::App app{"hurricane: hardware-aware search spaces, latency prediction and two-stage evolutionary search"};
  app.name("hurricane");
  app.require_subcommand(1);

  auto* ops = app.add_subcommand("ops", "Operator pool utilities");
  ops->require_subcommand(1);
  auto* dump = ops->add_subcommand("dump", "Export the 32-operator pool with costs for one layer context");
  dump->add_option("--h-in", o.h, "Input height")->capture_default_str();
  dump->add_option("--w-in", o.w, "Input width")->capture_default_str();
  dump->add_option("--c-in", o.c_in, "Input channels")->capture_default_str();
  dump->add_option("--c-out", o.c_out, "Output channels")->capture_default_str();
  dump->add_option("--stride", o.stride, "Stride (1 or 2)")->capture_default_str();
  dump->add_option("--bytes", o.bytes, "Bytes per element")->capture_default_str();
  dump->add_option("--layer", o.layer, "Use the context of this default-backbone layer (1-based)");
  dump->add_option("--out", o.out, "Write JSON here instead of stdout");

  auto* fixtures = app.add_subcommand("fixtures", "Synthetic fixtures");
  fixtures->require_subcommand(1);
  auto* gen_profile = fixtures->add_subcommand("gen-profile", "Generate a synthetic latency table");
  gen_profile->add_option("--kind", o.kind, "dsp | cpu | vpu")->required();
  gen_profile->add_option("--seed", o.seed, "Jitter seed")->capture_default_str();
  gen_profile->add_option("--out", o.out, "Output CSV")->required();
  auto* gen_dataset = fixtures->add_subcommand("gen-dataset", "Generate an end-to-end latency dataset");
  gen_dataset->add_option("--space", o.space, "Search space JSON")->required();
  gen_dataset->add_option("--profile", o.profile, "Latency table CSV")->required();
  gen_dataset->add_option("--n", o.n_samples, "Number of architectures")->capture_default_str();
  gen_dataset->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  gen_dataset->add_option("--perturb", o.perturb, "Pairwise interaction amplitude")->capture_default_str();
  gen_dataset->add_option("--out-dir", o.out, "Output directory")->required();

  auto* gen_space = app.add_subcommand("gen-space", "Generate a hardware-aware search space");
  gen_space->add_option("--profile", o.profile, "Latency table CSV")->required();
  gen_space->add_option("--alpha", o.alpha, "Capacity exponent")->capture_default_str();
  gen_space->add_option("--p", o.p, "Operators kept per layer")->capture_default_str();
  gen_space->add_option("--explore-last", o.explore_last, "Layers (from the end) given an exploring operator")
      ->capture_default_str();
  gen_space->add_option("--kappa", o.kappa, "Exploring-operator latency cap ratio")->capture_default_str();
  gen_space->add_option("--out", o.out, "Output JSON")->required();

  auto* fit = app.add_subcommand("fit-predictor", "Fit the Bayesian ridge latency predictor");
  fit->add_option("--space", o.space, "Search space JSON")->required();
  fit->add_option("--profile", o.profile, "Latency table CSV (synthetic additive targets)");
  fit->add_option("--dataset", o.dataset, "End-to-end dataset CSV arch_json_path,latency_ms");
  fit->add_option("--perturb", o.perturb, "Pairwise interaction amplitude for --profile targets")
      ->capture_default_str();
  fit->add_option("--n-train", o.n_train, "Training samples")->capture_default_str();
  fit->add_option("--n-test", o.n_test, "Held-out samples")->capture_default_str();
  fit->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  fit->add_option("--max-iters", o.max_iters, "Evidence iterations")->capture_default_str();
  fit->add_option("--tol", o.tol, "Convergence tolerance")->capture_default_str();
  fit->add_option("--out", o.out, "Output model JSON")->required();

  auto* search = app.add_subcommand("search", "Constrained (two-stage) evolutionary search");
  search->add_option("--space", o.space, "Search space JSON")->required();
  search->add_option("--constraint-ms", o.constraint_ms, "Latency constraint in ms")->required();
  search->add_option("--latency", o.latency, "additive | predictor:<model.json>")->capture_default_str();
  search->add_option("--profile", o.profile, "Latency table CSV (additive latency / audit)");
  search->add_option("--evaluator", o.evaluator, "synth:seed=N[,rho=R,eps=E] | file:<csv>")->capture_default_str();
  search->add_flag("--two-stage", o.two_stage, "Run the two-stage search");
  search->add_option("--t", o.t, "Layer grouping boundary")->capture_default_str();
  search->add_option("--budget", o.budget, "Unique evaluations (per stage unless --split)")->capture_default_str();
  search->add_flag("--split", o.split, "Split one budget across stages by log space size");
  search->add_option("--population", o.population)->capture_default_str();
  search->add_option("--parents", o.parents)->capture_default_str();
  search->add_option("--crossover", o.crossover)->capture_default_str();
  search->add_option("--mutation", o.mutation)->capture_default_str();
  search->add_option("--mutation-prob", o.mutation_prob)->capture_default_str();
  search->add_option("--max-sample-attempts", o.max_sample_attempts)->capture_default_str();
  search->add_option("--seed", o.seed, "Search seed")->capture_default_str();
  search->add_option("--report", o.report, "Output report JSON")->required();

  auto* report = app.add_subcommand("report", "Render a search report");
  report->add_option("--in", o.in, "Report JSON")->required();
  report->add_option("--format", o.format, "text | markdown | csv")->capture_default_str();
  report->add_option("--out", o.out, "Write here instead of stdout");

  auto* verify = app.add_subcommand("verify", "Built-in arithmetic checks");
  verify->add_option("--space", o.space, "Check this space instead of the default synthetic one");
  verify->add_option("--t", o.t, "Layer grouping boundary")->capture_default_str();
  verify->add_option("--seed", o.seed, "Profile seed for the default space")->capture_default_str();

  try {
    auto args = preprocess(raw_args, json_errors);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    emit_error(err, json_errors, "UsageError", e.what());
    return 2;
  } catch (const Error& e) {
    emit_error(err, json_errors, std::string(to_string(e.code())), e.what(), e.layer());
    return 1;
  }

  try {
    if (dump->parsed()) return cmd_ops_dump(o, out);
    if (gen_profile->parsed()) return cmd_gen_profile(o, out);
    if (gen_dataset->parsed()) return cmd_gen_dataset(o, out);
    if (gen_space->parsed()) return cmd_gen_space(o, out);
    if (fit->parsed()) return cmd_fit_predictor(o, out);
    if (search->parsed()) return cmd_search(o, out);
    if (report->parsed()) return cmd_report(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
  } catch (const Error& e) {
    emit_error(err, json_errors, std::string(to_string(e.code())), e.what(), e.layer());
    return 1;
  } catch (const std::exception& e) {
    emit_error(err, json_errors, "RuntimeError", e.what());
    return 1;
  }
  emit_error(err, json_errors, "UsageError", "no command given");
  return 2;
}

}  // namespace hurricane::cli
