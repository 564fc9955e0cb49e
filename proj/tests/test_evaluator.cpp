#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hurricane/errors.hpp"
#include "hurricane/evaluator.hpp"
#include "hurricane/random.hpp"

using namespace hurricane;

namespace {

SearchSpace grid_space(int layers, int width, int offset = 0) {
  const auto pool = enumerate_pool();
  std::vector<std::vector<OperatorSpec>> c(layers);
  for (int i = 0; i < layers; ++i) {
    for (int j = 0; j < width; ++j) c[i].push_back(pool[(offset + i + 3 * j) % 32]);
  }
  return make_space(uniform_backbone(layers, {14, 14, 32, 32, 1}), std::move(c));
}

// Latency rises with the candidate index; sum of (1 + choice) per layer.
double index_latency(const SearchSpace&, const Architecture& a) {
  double s = 0.0;
  for (const int c : a.choices) s += 1.0 + c;
  return s;
}

Architecture random_arch(const SearchSpace& space, Rng& rng) {
  Architecture a;
  for (const auto& layer : space.candidates) a.choices.push_back(rng.index(static_cast<int>(layer.size())));
  return a;
}

}  // namespace

TEST_CASE("synthetic oracle is deterministic and bounded") {
  const auto space = grid_space(20, 4);
  SynthOracle oracle({7, 0.8, 0.05});
  CHECK_THROWS_AS(oracle.evaluate(Architecture{std::vector<int>(20, 0)}), Error);
  oracle.prepare(space);
  SynthOracle twin({7, 0.8, 0.05});
  twin.prepare(space);
  SynthOracle other({8, 0.8, 0.05});
  other.prepare(space);

  Rng rng(1);
  int differs = 0;
  for (int i = 0; i < 10'000; ++i) {
    const auto a = random_arch(space, rng);
    const double v = oracle.evaluate(a);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(oracle.evaluate(a) == v);
    CHECK(twin.evaluate(a) == v);
    if (other.evaluate(a) != v) ++differs;
  }
  CHECK(differs > 9'000);
  CHECK_THROWS_AS(oracle.evaluate(Architecture{std::vector<int>(19, 0)}), Error);
}

TEST_CASE("layer weights decay geometrically towards the input") {
  const auto space = grid_space(12, 3);
  SynthOracle oracle({1, 0.8, 0.05});
  oracle.prepare(space);
  const auto& w = oracle.layer_weights();
  REQUIRE(w.size() == 12);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    total += w[i];
    if (i > 0) CHECK(w[i - 1] / w[i] == doctest::Approx(0.8));
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("with no interaction the last-layer difference is w_n |dq|") {
  const auto space = grid_space(8, 4);
  SynthOracle oracle({3, 0.8, 0.0});
  oracle.prepare(space);
  const double wn = oracle.layer_weights().back();
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    auto a = random_arch(space, rng);
    auto b = a;
    b.choices.back() = (a.choices.back() + 1 + rng.index(3)) % 4;
    const double qa = oracle.unary(8, space.candidates[7][a.choices.back()].id());
    const double qb = oracle.unary(8, space.candidates[7][b.choices.back()].id());
    CHECK(std::abs(oracle.evaluate(a) - oracle.evaluate(b)) == doctest::Approx(wn * std::abs(qa - qb)).epsilon(1e-12));
  }
}

TEST_CASE("oracle matches its formula") {
  const auto space = grid_space(6, 3);
  SynthOracle oracle({9, 0.7, 0.2});
  oracle.prepare(space);
  const auto& w = oracle.layer_weights();
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_arch(space, rng);
    const auto ids = architecture_ids(space, a);
    double raw = 0.0;
    for (int i = 0; i < 6; ++i) raw += w[i] * oracle.unary(i + 1, ids[i]);
    for (int i = 0; i < 5; ++i) raw += 0.2 * 0.5 * (w[i] + w[i + 1]) * oracle.pair(i + 1, ids[i], ids[i + 1]);
    CHECK(oracle.evaluate(a) == doctest::Approx(std::clamp(raw, 0.0, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("brute force on a single-candidate space") {
  const auto space = grid_space(5, 1);
  SynthOracle oracle({1});
  oracle.prepare(space);
  const auto r = brute_force_best(space, oracle, index_latency, 100.0);
  CHECK(r.best == Architecture{std::vector<int>(5, 0)});
  CHECK(r.enumerated == 1);
}

TEST_CASE("brute force on 2 x 2 equals hand enumeration") {
  const auto space = grid_space(2, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthOracle oracle({seed, 0.8, 0.05});
    oracle.prepare(space);
    const std::vector<Architecture> all{{{0, 0}}, {{0, 1}}, {{1, 0}}, {{1, 1}}};
    Architecture best = all[0];
    for (const auto& a : all) {
      if (oracle.evaluate(a) > oracle.evaluate(best)) best = a;
    }
    const auto r = brute_force_best(space, oracle, index_latency, 100.0);
    CHECK(r.best == best);
    CHECK(r.accuracy == oracle.evaluate(best));
    CHECK(r.enumerated == 4);
    CHECK(r.feasible == 4);

    // Only (0,0) and (0,1)/(1,0) fit under 3.
    const auto c = brute_force_best(space, oracle, index_latency, 3.0);
    CHECK(index_latency(space, c.best) <= 3.0);
    CHECK(c.feasible == 3);
    double best_ok = -1;
    for (const auto& a : all) {
      if (index_latency(space, a) <= 3.0) best_ok = std::max(best_ok, oracle.evaluate(a));
    }
    CHECK(c.accuracy == best_ok);
  }
}

TEST_CASE("brute force ties go to the smallest choices") {
  const auto space = grid_space(3, 3);
  FileOracle flat = [&] {
    std::map<std::string, double> table;
    Architecture a{{0, 0, 0}};
    for (a.choices[0] = 0; a.choices[0] < 3; ++a.choices[0])
      for (a.choices[1] = 0; a.choices[1] < 3; ++a.choices[1])
        for (a.choices[2] = 0; a.choices[2] < 3; ++a.choices[2]) {
          const bool top = a.choices[0] == 2 || a.choices[2] == 1;
          table[join_ids(architecture_ids(space, a))] = top ? 0.9 : 0.1;
        }
    return FileOracle(table);
  }();
  flat.prepare(space);
  const auto r = brute_force_best(space, flat, index_latency, 100.0);
  CHECK(r.best == Architecture{{0, 0, 1}});
}

TEST_CASE("separable optimum without interaction") {
  const auto space = grid_space(6, 4, 5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SynthOracle oracle({seed, 0.8, 0.0});
    oracle.prepare(space);
    const auto r = brute_force_best(space, oracle, index_latency, 1e9);
    for (int i = 0; i < 6; ++i) {
      int arg = 0;
      for (int j = 1; j < 4; ++j) {
        if (oracle.unary(i + 1, space.candidates[i][j].id()) > oracle.unary(i + 1, space.candidates[i][arg].id())) arg = j;
      }
      CHECK(r.best.choices[i] == arg);
    }
  }
}

TEST_CASE("brute force respects the constraint and its guards") {
  const auto space = grid_space(6, 3);
  SynthOracle oracle({5});
  oracle.prepare(space);
  for (const double tau : {6.0, 8.0, 10.0, 12.0, 18.0}) {
    const auto r = brute_force_best(space, oracle, index_latency, tau);
    CHECK(index_latency(space, r.best) <= tau);
    CHECK(r.enumerated == 729);
  }
  CHECK_THROWS_AS(brute_force_best(space, oracle, index_latency, 5.0), Error);
  const auto big = grid_space(13, 3);
  oracle.prepare(big);
  try {
    brute_force_best(big, oracle, index_latency, 100.0);
    FAIL("expected SpaceTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpaceTooLarge);
  }
}

TEST_CASE("file oracle parsing and lookup") {
  const auto space = grid_space(2, 2);
  const auto a = join_ids(architecture_ids(space, Architecture{{0, 1}}));
  std::istringstream in("choices,accuracy\n" + a + ",0.75\n");
  auto oracle = FileOracle::parse(in);
  CHECK(oracle.size() == 1);
  CHECK_THROWS_AS(oracle.evaluate(Architecture{{0, 1}}), Error);
  oracle.prepare(space);
  CHECK(oracle.evaluate(Architecture{{0, 1}}) == 0.75);
  try {
    oracle.evaluate(Architecture{{1, 1}});
    FAIL("expected EvaluatorFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EvaluatorFailure);
  }

  const auto code = [](const std::string& text) {
    std::istringstream s(text);
    try {
      FileOracle::parse(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code("arch,acc\nx,0.5\n") == ErrorCode::ParseError);
  CHECK(code("choices,accuracy\nx;y,1.5\n") == ErrorCode::ParseError);
  CHECK(code("choices,accuracy\nx;y,0.5\nx;y,0.4\n") == ErrorCode::DuplicateKey);
}

TEST_CASE("evaluator specs") {
  auto e = make_evaluator("synth:seed=7,rho=0.5,eps=0");
  CHECK(e->describe() == "synth:seed=7,rho=0.5,eps=0");
  CHECK(e->capabilities().concurrent_safe);
  CHECK_THROWS_AS(make_evaluator("magic"), Error);
  CHECK_THROWS_AS(make_evaluator("synth:seed=x"), Error);
  CHECK_THROWS_AS(make_evaluator("synth:colour=1"), Error);
  CHECK_THROWS_AS(make_evaluator("file:/nonexistent/file.csv"), Error);
}
