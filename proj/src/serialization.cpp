#include "hurricane/serialization.hpp"

#include <fstream>

#include "hurricane/errors.hpp"
#include "hurricane/random.hpp"

namespace hurricane {

namespace {

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed ") + what + ": " + e.what());
  }
}

Json context_to_json(const LayerContext& c) {
  return Json{{"h_in", c.h_in}, {"w_in", c.w_in}, {"c_in", c.c_in}, {"c_out", c.c_out}, {"stride", c.stride}};
}

LayerContext context_from_json(const Json& j) {
  return {j.at("h_in").get<std::int64_t>(), j.at("w_in").get<std::int64_t>(),
          j.at("c_in").get<std::int64_t>(), j.at("c_out").get<std::int64_t>(), j.at("stride").get<int>()};
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

Json space_to_json(const SearchSpace& space) {
  Json layers = Json::array();
  for (int i = 0; i < space.n_layers(); ++i) {
    Json ids = Json::array();
    for (const auto& op : space.candidates[i]) ids.push_back(op.id());
    layers.push_back(Json{{"index", i + 1},
                          {"stage", space.backbone.stage_of[i]},
                          {"context", context_to_json(space.backbone.contexts[i])},
                          {"candidates", std::move(ids)},
                          {"exploring", space.exploring[i] ? Json(*space.exploring[i]) : Json(nullptr)}});
  }
  const auto& p = space.provenance;
  return Json{{"hardware", p.hardware},
              {"alpha", p.alpha},
              {"p", p.p},
              {"kappa", p.kappa},
              {"explore_layers", p.explore_layers},
              {"stem", space.backbone.stem},
              {"tail", space.backbone.tail},
              {"layers", std::move(layers)}};
}

SearchSpace space_from_json(const Json& j) {
  return guarded("search space", [&] {
    Backbone bb;
    std::vector<std::vector<OperatorSpec>> candidates;
    std::vector<std::optional<std::string>> exploring;
    const auto& layers = j.at("layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.at("index").get<int>() != static_cast<int>(i) + 1) {
        throw Error(ErrorCode::ParseError, "layers must be listed in index order");
      }
      bb.contexts.push_back(context_from_json(l.at("context")));
      bb.stage_of.push_back(l.at("stage").get<int>());
      std::vector<OperatorSpec> ops;
      for (const auto& id : l.at("candidates")) ops.push_back(parse_operator_id(id.get<std::string>()));
      candidates.push_back(std::move(ops));
      const auto& e = l.value("exploring", Json(nullptr));
      exploring.push_back(e.is_null() ? std::nullopt : std::optional<std::string>(e.get<std::string>()));
    }
    if (j.contains("stem")) bb.stem = j.at("stem").get<std::string>();
    if (j.contains("tail")) bb.tail = j.at("tail").get<std::string>();
    SpaceProvenance prov;
    prov.hardware = j.value("hardware", std::string{});
    prov.alpha = j.value("alpha", 1.0);
    prov.p = j.value("p", 4);
    prov.kappa = j.value("kappa", 2.0);
    prov.explore_layers = j.value("explore_layers", std::vector<int>{});
    return make_space(std::move(bb), std::move(candidates), std::move(prov), std::move(exploring));
  });
}

std::string space_hash(const SearchSpace& space) { return hex64(fnv1a64(space_to_json(space).dump())); }

Json architecture_to_json(const SearchSpace& space, const Architecture& arch) {
  return Json{{"space_hash", space_hash(space)}, {"choices", architecture_ids(space, arch)}};
}

Architecture architecture_from_json(const SearchSpace& space, const Json& j) {
  const auto ids = guarded("architecture", [&] { return j.at("choices").get<std::vector<std::string>>(); });
  return architecture_from_ids(space, ids);
}

Json model_to_json(const PredictorModel& model) {
  Json cov = Json::array();
  for (Eigen::Index r = 0; r < model.covariance.rows(); ++r) cov.push_back(vector_json(model.covariance.row(r)));
  return Json{{"layout_hash", model.layout_hash},
              {"lambda", model.lambda},
              {"beta", model.beta},
              {"weight_mean", vector_json(model.weight_mean)},
              {"covariance", std::move(cov)},
              {"training_stats",
               {{"n_samples", model.stats.n_samples},
                {"iterations", model.stats.iterations},
                {"converged", model.stats.converged},
                {"log_evidence", model.stats.log_evidence}}}};
}

PredictorModel model_from_json(const Json& j) {
  return guarded("predictor model", [&] {
    PredictorModel m;
    m.layout_hash = j.at("layout_hash").get<std::string>();
    m.lambda = j.at("lambda").get<double>();
    m.beta = j.at("beta").get<double>();
    m.weight_mean = vector_from(j.at("weight_mean"));
    const auto& cov = j.at("covariance");
    const auto d = m.weight_mean.size();
    if (static_cast<Eigen::Index>(cov.size()) != d) throw Error(ErrorCode::ParseError, "covariance shape mismatch");
    m.covariance.resize(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      const auto row = vector_from(cov[static_cast<std::size_t>(r)]);
      if (row.size() != d) throw Error(ErrorCode::ParseError, "covariance shape mismatch");
      m.covariance.row(r) = row.transpose();
    }
    if (!(m.lambda > 0.0) || !(m.beta > 0.0)) throw Error(ErrorCode::ParseError, "precisions must be positive");
    if (j.contains("training_stats")) {
      const auto& s = j.at("training_stats");
      m.stats.n_samples = s.value("n_samples", 0);
      m.stats.iterations = s.value("iterations", 0);
      m.stats.converged = s.value("converged", false);
      m.stats.log_evidence = s.value("log_evidence", std::vector<double>{});
    }
    return m;
  });
}

Json report_to_json(const SearchReport& r) {
  Json history = Json::array();
  for (const auto& h : r.history) {
    history.push_back(Json{{"stage", h.stage},
                           {"iteration", h.iteration},
                           {"best_accuracy", h.best_accuracy},
                           {"mean_accuracy", h.mean_accuracy},
                           {"population", h.population},
                           {"new_evaluations", h.new_evaluations}});
  }
  Json stages = Json::array();
  for (const auto& s : r.stages) {
    stages.push_back(Json{{"stage", s.stage},
                          {"first_layer", s.first_layer},
                          {"last_layer", s.last_layer},
                          {"space_size", s.space_size},
                          {"evaluations", s.evaluations},
                          {"budget", s.budget},
                          {"winner", s.winner}});
  }
  return Json{{"mode", to_string(r.mode)},
              {"t", r.t},
              {"tau_c", r.tau_c},
              {"best", {{"choices", r.best_ids}, {"indices", r.best.choices}}},
              {"best_accuracy", r.best_accuracy},
              {"best_latency", r.best_latency},
              {"audit_latency", r.audit_latency ? Json(*r.audit_latency) : Json(nullptr)},
              {"evaluations_used", r.evaluations_used},
              {"stages", std::move(stages)},
              {"history", std::move(history)}};
}

SearchReport report_from_json(const Json& j) {
  return guarded("search report", [&] {
    SearchReport r;
    r.mode = parse_search_mode(j.at("mode").get<std::string>());
    r.t = j.at("t").get<int>();
    r.tau_c = j.at("tau_c").get<double>();
    r.best_ids = j.at("best").at("choices").get<std::vector<std::string>>();
    r.best.choices = j.at("best").at("indices").get<std::vector<int>>();
    r.best_accuracy = j.at("best_accuracy").get<double>();
    r.best_latency = j.at("best_latency").get<double>();
    if (const auto& a = j.value("audit_latency", Json(nullptr)); !a.is_null()) r.audit_latency = a.get<double>();
    r.evaluations_used = j.at("evaluations_used").get<int>();
    for (const auto& s : j.at("stages")) {
      r.stages.push_back({s.at("stage").get<int>(), s.at("first_layer").get<int>(), s.at("last_layer").get<int>(),
                          s.at("space_size").get<std::string>(), s.at("evaluations").get<int>(),
                          s.at("budget").get<int>(), s.at("winner").get<std::vector<std::string>>()});
    }
    for (const auto& h : j.at("history")) {
      r.history.push_back({h.at("stage").get<int>(), h.at("iteration").get<int>(),
                           h.at("best_accuracy").get<double>(), h.at("mean_accuracy").get<double>(),
                           h.at("population").get<int>(), h.at("new_evaluations").get<int>()});
    }
    return r;
  });
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace hurricane
