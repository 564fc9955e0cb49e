#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hurricane/ops_catalog.hpp"

namespace hurricane {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// Fixed macro-structure: learnable layers grouped into resolution stages.
/// Vectors are indexed by 0-based position; user-facing layer numbers are 1-based.
struct Backbone {
  std::vector<LayerContext> contexts;
  std::vector<int> stage_of;  // 1..4
  std::string stem = "conv3x3 s2 3->16";
  std::string tail = "conv1x1 ->1024, avgpool, fc";

  int n_layers() const { return static_cast<int>(contexts.size()); }

  friend bool operator==(const Backbone&, const Backbone&) = default;
};

/// 20 layers: 4 x 56^2x64, 4 x 28^2x160, 8 x 14^2x320, 4 x 7^2x640 on a 224^2 input.
Backbone default_backbone();

struct SpaceProvenance {
  std::string hardware;
  double alpha = 1.0;
  int p = 4;
  std::vector<int> explore_layers;  // 1-based
  double kappa = 2.0;

  friend bool operator==(const SpaceProvenance&, const SpaceProvenance&) = default;
};

/// Per-layer rank-ordered candidates. A layer's exploring operator, if any, is
/// the last entry of its candidate list and is also named in `exploring`.
struct SearchSpace {
  Backbone backbone;
  std::vector<std::vector<OperatorSpec>> candidates;
  std::vector<std::optional<std::string>> exploring;
  SpaceProvenance provenance;

  int n_layers() const { return static_cast<int>(candidates.size()); }

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

/// One candidate index per layer.
struct Architecture {
  std::vector<int> choices;

  friend bool operator==(const Architecture&, const Architecture&) = default;
  friend auto operator<=>(const Architecture&, const Architecture&) = default;
};

/// Builds a space from explicit candidate lists, checking its invariants.
SearchSpace make_space(Backbone backbone, std::vector<std::vector<OperatorSpec>> candidates,
                       SpaceProvenance provenance = {},
                       std::vector<std::optional<std::string>> exploring = {});

/// A backbone of `n` identical stride-1 layers; handy for small synthetic spaces.
Backbone uniform_backbone(int n, LayerContext ctx);

BigInt space_size(const SearchSpace& space);

/// |space| / (|stage-1 sub-space| + |stage-2 sub-space|) where stage 1 frees
/// layers t+1..n and stage 2 frees layers 1..t. Defined as 1 for t = 0.
BigRational reduction_factor(const SearchSpace& space, int t);

/// Throws LengthMismatch or IndexOutOfRange (naming the first bad layer).
void validate_architecture(const SearchSpace& space, const Architecture& arch);

/// Operator ids chosen by `arch`, one per layer.
std::vector<std::string> architecture_ids(const SearchSpace& space, const Architecture& arch);

/// Resolves per-layer operator ids back to indices in `space`.
Architecture architecture_from_ids(const SearchSpace& space, const std::vector<std::string>& ids);

/// Re-expresses `arch` (valid in `from`) as indices of `to` via operator ids.
Architecture lift_architecture(const SearchSpace& from, const Architecture& arch,
                               const SearchSpace& to);

double to_double(const BigRational& value);

}  // namespace hurricane
