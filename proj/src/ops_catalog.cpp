#include "hurricane/ops_catalog.hpp"

#include <algorithm>
#include <array>
#include <charconv>

#include "hurricane/errors.hpp"

namespace hurricane {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::SEP: return "SEP";
    case Family::MB: return "MB";
    case Family::Choice: return "Choice";
    case Family::ChoiceX: return "ChoiceX";
  }
  return "?";
}

std::string OperatorSpec::id() const {
  std::string out{to_string(family)};
  if (family != Family::ChoiceX) out += "_" + std::to_string(kernel);
  if (expansion) out += "_" + std::to_string(*expansion);
  if (se) out += "_SE";
  return out;
}

namespace {

bool valid_spec(const OperatorSpec& op) {
  if (op.family == Family::ChoiceX) return op.kernel == 3 && !op.expansion;
  if (op.kernel != 3 && op.kernel != 5 && op.kernel != 7) return false;
  if (op.family == Family::MB) {
    return op.expansion && (*op.expansion == 1 || *op.expansion == 3 || *op.expansion == 6);
  }
  return !op.expansion;
}

std::vector<std::string_view> split_id(std::string_view id) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = id.find('_', start);
    parts.push_back(id.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace

OperatorSpec parse_operator_id(std::string_view id) {
  auto parts = split_id(id);
  const auto fail = [&] {
    return Error(ErrorCode::UnknownOperator, "unknown operator id '" + std::string(id) + "'");
  };
  OperatorSpec op;
  if (!parts.empty() && parts.back() == "SE") {
    op.se = true;
    parts.pop_back();
  }
  if (parts.empty()) throw fail();
  const auto family = parts.front();
  std::vector<int> numbers;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto n = parse_int(parts[i]);
    if (!n) throw fail();
    numbers.push_back(*n);
  }
  if (family == "SEP" || family == "Choice") {
    if (numbers.size() != 1) throw fail();
    op.family = family == "SEP" ? Family::SEP : Family::Choice;
    op.kernel = numbers[0];
  } else if (family == "MB") {
    if (numbers.size() != 2) throw fail();
    op.family = Family::MB;
    op.kernel = numbers[0];
    op.expansion = numbers[1];
  } else if (family == "ChoiceX") {
    if (!numbers.empty()) throw fail();
    op.family = Family::ChoiceX;
    op.kernel = 3;
  } else {
    throw fail();
  }
  if (!valid_spec(op) || op.id() != id) throw fail();
  return op;
}

std::vector<OperatorSpec> enumerate_pool() {
  std::vector<OperatorSpec> pool;
  pool.reserve(32);
  constexpr std::array kernels{3, 5, 7};
  constexpr std::array expansions{1, 3, 6};
  for (const int k : kernels) {
    for (const bool se : {false, true}) pool.push_back({Family::SEP, k, std::nullopt, se});
  }
  for (const int k : kernels) {
    for (const int e : expansions) {
      for (const bool se : {false, true}) pool.push_back({Family::MB, k, e, se});
    }
  }
  for (const int k : kernels) {
    for (const bool se : {false, true}) pool.push_back({Family::Choice, k, std::nullopt, se});
  }
  for (const bool se : {false, true}) pool.push_back({Family::ChoiceX, 3, std::nullopt, se});
  return pool;
}

std::int64_t Stage::flops() const {
  switch (kind) {
    case StageKind::Depthwise:
      return (h / stride) * (w / stride) * c_in * kernel * kernel;
    case StageKind::Pointwise:
      return h * w * c_in * c_out;
    case StageKind::FullyConnected:
      return c_in * c_out;
    case StageKind::ChannelScale:
      return h * w * c_in;
    case StageKind::GlobalPool:
    case StageKind::Split:
    case StageKind::Concat:
    case StageKind::Shuffle:
    case StageKind::ResidualAdd:
      return 0;
  }
  return 0;
}

std::int64_t Stage::params() const {
  switch (kind) {
    case StageKind::Depthwise: return c_in * kernel * kernel;
    case StageKind::Pointwise:
    case StageKind::FullyConnected: return c_in * c_out;
    default: return 0;
  }
}

std::int64_t Stage::elements_read() const {
  switch (kind) {
    case StageKind::Depthwise:
    case StageKind::Pointwise:
      return c_in * h * w + params();
    case StageKind::FullyConnected:
      return c_in + params();
    case StageKind::ChannelScale:
      return c_in * h * w + c_in;
    case StageKind::GlobalPool:
    case StageKind::Split:
    case StageKind::Shuffle:
    case StageKind::Concat:
      return c_in * h * w;
    case StageKind::ResidualAdd:
      return 2 * c_in * h * w;
  }
  return 0;
}

std::int64_t Stage::elements_written() const {
  switch (kind) {
    case StageKind::Depthwise:
      return c_out * (h / stride) * (w / stride);
    case StageKind::Pointwise:
    case StageKind::ChannelScale:
    case StageKind::Split:
    case StageKind::Shuffle:
    case StageKind::Concat:
    case StageKind::ResidualAdd:
      return c_out * h * w;
    case StageKind::GlobalPool:
    case StageKind::FullyConnected:
      return c_out;
  }
  return 0;
}

void check_context(const OperatorSpec& op, const LayerContext& ctx) {
  if (!valid_spec(op)) {
    throw Error(ErrorCode::UnknownOperator, "malformed operator spec " + op.id());
  }
  if (ctx.stride != 1 && ctx.stride != 2) {
    throw Error(ErrorCode::InvalidContext, "stride must be 1 or 2");
  }
  if (ctx.c_in <= 0 || ctx.c_out <= 0) {
    throw Error(ErrorCode::InvalidContext, "channel counts must be positive");
  }
  if (ctx.h_in <= 0 || ctx.w_in <= 0 || ctx.h_in % ctx.stride != 0 || ctx.w_in % ctx.stride != 0) {
    throw Error(ErrorCode::DegenerateGeometry,
                "spatial size " + std::to_string(ctx.h_in) + "x" + std::to_string(ctx.w_in) +
                    " incompatible with stride " + std::to_string(ctx.stride));
  }
  const bool splits = op.family == Family::Choice || op.family == Family::ChoiceX;
  if (splits && (ctx.c_in % 2 != 0 || ctx.c_out % 2 != 0)) {
    throw Error(ErrorCode::InvalidContext, op.id() + " requires even channel counts");
  }
}

namespace {

Stage dw(std::int64_t c, std::int64_t h, std::int64_t w, int k, int s) {
  return {StageKind::Depthwise, c, c, h, w, k, s};
}

Stage pw(std::int64_t c_in, std::int64_t c_out, std::int64_t h, std::int64_t w) {
  return {StageKind::Pointwise, c_in, c_out, h, w, 1, 1};
}

Stage same_shape(StageKind kind, std::int64_t c, std::int64_t h, std::int64_t w) {
  return {kind, c, c, h, w, 1, 1};
}

void append_se(std::vector<Stage>& out, std::int64_t c, std::int64_t h, std::int64_t w) {
  const std::int64_t squeeze = std::max<std::int64_t>(1, c / kSeReduction);
  out.push_back({StageKind::GlobalPool, c, c, h, w, 1, 1});
  out.push_back({StageKind::FullyConnected, c, squeeze, 1, 1, 1, 1});
  out.push_back({StageKind::FullyConnected, squeeze, c, 1, 1, 1, 1});
  out.push_back(same_shape(StageKind::ChannelScale, c, h, w));
}

// Shared topology of Choice (ShuffleNetV2 unit) and ChoiceX.
void plan_shuffle_unit(std::vector<Stage>& out, const OperatorSpec& op, const LayerContext& ctx) {
  const std::int64_t H = ctx.h_in, W = ctx.w_in, Ho = ctx.h_out(), Wo = ctx.w_out();
  const std::int64_t half_out = ctx.c_out / 2;
  const int s = ctx.stride;
  const bool x = op.family == Family::ChoiceX;
  const int k = x ? 3 : op.kernel;

  std::int64_t merged = 0;
  if (s == 1) {
    const std::int64_t half_in = ctx.c_in / 2;
    out.push_back(same_shape(StageKind::Split, ctx.c_in, H, W));
    if (x) {
      out.push_back(dw(half_in, H, W, k, 1));
      out.push_back(pw(half_in, half_out, H, W));
      out.push_back(dw(half_out, H, W, k, 1));
      out.push_back(pw(half_out, half_out, H, W));
      out.push_back(dw(half_out, H, W, k, 1));
      out.push_back(pw(half_out, half_out, H, W));
    } else {
      out.push_back(pw(half_in, half_out, H, W));
      out.push_back(dw(half_out, H, W, k, 1));
      out.push_back(pw(half_out, half_out, H, W));
    }
    merged = half_in + half_out;
  } else {
    // projection branch
    out.push_back(dw(ctx.c_in, H, W, k, s));
    out.push_back(pw(ctx.c_in, half_out, Ho, Wo));
    // main branch
    if (x) {
      out.push_back(dw(ctx.c_in, H, W, k, s));
      out.push_back(pw(ctx.c_in, half_out, Ho, Wo));
      out.push_back(dw(half_out, Ho, Wo, k, 1));
      out.push_back(pw(half_out, half_out, Ho, Wo));
      out.push_back(dw(half_out, Ho, Wo, k, 1));
      out.push_back(pw(half_out, half_out, Ho, Wo));
    } else {
      out.push_back(pw(ctx.c_in, half_out, H, W));
      out.push_back(dw(half_out, H, W, k, s));
      out.push_back(pw(half_out, half_out, Ho, Wo));
    }
    merged = 2 * half_out;
  }
  out.push_back({StageKind::Concat, merged, ctx.c_out, Ho, Wo, 1, 1});
  if (op.se) append_se(out, ctx.c_out, Ho, Wo);
  out.push_back(same_shape(StageKind::Shuffle, ctx.c_out, Ho, Wo));
}

}  // namespace

std::vector<Stage> plan_block(const OperatorSpec& op, const LayerContext& ctx) {
  check_context(op, ctx);
  const std::int64_t H = ctx.h_in, W = ctx.w_in, Ho = ctx.h_out(), Wo = ctx.w_out();
  std::vector<Stage> out;
  switch (op.family) {
    case Family::SEP:
      out.push_back(dw(ctx.c_in, H, W, op.kernel, ctx.stride));
      out.push_back(pw(ctx.c_in, ctx.c_out, Ho, Wo));
      out.push_back(dw(ctx.c_out, Ho, Wo, op.kernel, 1));
      out.push_back(pw(ctx.c_out, ctx.c_out, Ho, Wo));
      if (op.se) append_se(out, ctx.c_out, Ho, Wo);
      break;
    case Family::MB: {
      const std::int64_t mid = *op.expansion * ctx.c_in;
      if (*op.expansion != 1) out.push_back(pw(ctx.c_in, mid, H, W));
      out.push_back(dw(mid, H, W, op.kernel, ctx.stride));
      out.push_back(pw(mid, ctx.c_out, Ho, Wo));
      if (op.se) append_se(out, ctx.c_out, Ho, Wo);
      if (ctx.stride == 1 && ctx.c_in == ctx.c_out) {
        out.push_back(same_shape(StageKind::ResidualAdd, ctx.c_out, Ho, Wo));
      }
      break;
    }
    case Family::Choice:
    case Family::ChoiceX:
      plan_shuffle_unit(out, op, ctx);
      break;
  }
  return out;
}

std::int64_t flops_of(const OperatorSpec& op, const LayerContext& ctx) {
  std::int64_t total = 0;
  for (const auto& s : plan_block(op, ctx)) total += s.flops();
  return total;
}

std::int64_t params_of(const OperatorSpec& op, const LayerContext& ctx) {
  std::int64_t total = 0;
  for (const auto& s : plan_block(op, ctx)) total += s.params();
  return total;
}

std::int64_t memory_access_of(const std::vector<Stage>& stages, int bytes_per_element) {
  std::int64_t elements = 0;
  for (const auto& s : stages) elements += s.elements_read() + s.elements_written();
  return elements * bytes_per_element;
}

std::int64_t memory_access_of(const OperatorSpec& op, const LayerContext& ctx, int bytes_per_element) {
  return memory_access_of(plan_block(op, ctx), bytes_per_element);
}

OpCost cost_of(const OperatorSpec& op, const LayerContext& ctx, int bytes_per_element) {
  const auto stages = plan_block(op, ctx);
  OpCost cost;
  for (const auto& s : stages) {
    cost.flops += s.flops();
    cost.params += s.params();
  }
  cost.mem_bytes = memory_access_of(stages, bytes_per_element);
  return cost;
}

}  // namespace hurricane
