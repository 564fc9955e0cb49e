#include "hurricane/backbone.hpp"

#include <set>

#include "hurricane/errors.hpp"

namespace hurricane {

Backbone default_backbone() {
  struct StageDef {
    int layers;
    std::int64_t size_out;
    std::int64_t channels;
  };
  constexpr StageDef stages[] = {{4, 56, 64}, {4, 28, 160}, {8, 14, 320}, {4, 7, 640}};
  Backbone bb;
  std::int64_t channels = 16;  // stem output
  std::int64_t size = 112;     // 224 input, stride-2 stem
  int stage_id = 1;
  for (const auto& st : stages) {
    for (int i = 0; i < st.layers; ++i) {
      LayerContext ctx;
      if (i == 0) {
        ctx = {size, size, channels, st.channels, 2};
      } else {
        ctx = {st.size_out, st.size_out, st.channels, st.channels, 1};
      }
      bb.contexts.push_back(ctx);
      bb.stage_of.push_back(stage_id);
    }
    channels = st.channels;
    size = st.size_out;
    ++stage_id;
  }
  return bb;
}

Backbone uniform_backbone(int n, LayerContext ctx) {
  Backbone bb;
  bb.contexts.assign(n, ctx);
  bb.stage_of.assign(n, 1);
  return bb;
}

SearchSpace make_space(Backbone backbone, std::vector<std::vector<OperatorSpec>> candidates,
                       SpaceProvenance provenance,
                       std::vector<std::optional<std::string>> exploring) {
  if (static_cast<int>(candidates.size()) != backbone.n_layers()) {
    throw Error(ErrorCode::LengthMismatch, "candidate lists do not match backbone depth");
  }
  if (exploring.empty()) exploring.resize(candidates.size());
  if (exploring.size() != candidates.size()) {
    throw Error(ErrorCode::LengthMismatch, "exploring markers do not match backbone depth");
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const int layer = static_cast<int>(i) + 1;
    if (candidates[i].empty()) {
      throw Error(ErrorCode::InvalidConfig, "layer has no candidates", layer);
    }
    std::set<std::string> seen;
    for (const auto& op : candidates[i]) {
      if (!seen.insert(op.id()).second) {
        throw Error(ErrorCode::DuplicateKey, "duplicate candidate " + op.id(), layer);
      }
    }
    if (exploring[i] && candidates[i].back().id() != *exploring[i]) {
      throw Error(ErrorCode::InvalidConfig, "exploring operator must be the last candidate", layer);
    }
  }
  return SearchSpace{std::move(backbone), std::move(candidates), std::move(exploring),
                     std::move(provenance)};
}

BigInt space_size(const SearchSpace& space) {
  BigInt size = 1;
  for (const auto& layer : space.candidates) size *= layer.size();
  return size;
}

BigRational reduction_factor(const SearchSpace& space, int t) {
  const int n = space.n_layers();
  if (t < 0 || t > n) {
    throw Error(ErrorCode::InvalidConfig, "t must lie in [0, n_layers]");
  }
  if (t == 0) return BigRational(1);
  BigInt early = 1, late = 1;
  for (int i = 0; i < n; ++i) {
    (i < t ? early : late) *= space.candidates[i].size();
  }
  return BigRational(early * late) / BigRational(early + late);
}

void validate_architecture(const SearchSpace& space, const Architecture& arch) {
  if (arch.choices.size() != space.candidates.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "architecture has " + std::to_string(arch.choices.size()) + " layers, space has " +
                    std::to_string(space.candidates.size()));
  }
  for (std::size_t i = 0; i < arch.choices.size(); ++i) {
    const int c = arch.choices[i];
    if (c < 0 || c >= static_cast<int>(space.candidates[i].size())) {
      const int layer = static_cast<int>(i) + 1;
      throw Error(ErrorCode::IndexOutOfRange,
                  "choice " + std::to_string(c) + " out of range at layer " + std::to_string(layer),
                  layer);
    }
  }
}

std::vector<std::string> architecture_ids(const SearchSpace& space, const Architecture& arch) {
  validate_architecture(space, arch);
  std::vector<std::string> ids;
  ids.reserve(arch.choices.size());
  for (std::size_t i = 0; i < arch.choices.size(); ++i) {
    ids.push_back(space.candidates[i][arch.choices[i]].id());
  }
  return ids;
}

Architecture architecture_from_ids(const SearchSpace& space, const std::vector<std::string>& ids) {
  if (ids.size() != space.candidates.size()) {
    throw Error(ErrorCode::LengthMismatch, "architecture id list does not match space depth");
  }
  Architecture arch;
  arch.choices.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& layer = space.candidates[i];
    int found = -1;
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (layer[j].id() == ids[i]) {
        found = static_cast<int>(j);
        break;
      }
    }
    if (found < 0) {
      const int n = static_cast<int>(i) + 1;
      throw Error(ErrorCode::IndexOutOfRange,
                  "operator " + ids[i] + " is not a candidate of layer " + std::to_string(n), n);
    }
    arch.choices.push_back(found);
  }
  return arch;
}

Architecture lift_architecture(const SearchSpace& from, const Architecture& arch,
                               const SearchSpace& to) {
  return architecture_from_ids(to, architecture_ids(from, arch));
}

double to_double(const BigRational& value) { return value.convert_to<double>(); }

}  // namespace hurricane
