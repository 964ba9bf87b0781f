#include "doctest.h"

#include <string>

#include "vortexlab/config.hpp"
#include "vortexlab/error.hpp"

using namespace vortexlab;
using namespace vortexlab::config;

namespace {

const char* kMinimal = "target: {n: 1, k: 1, weights: [[1]], tau: [1.0]}\n";

std::string error_of(const std::string& yaml) {
  try {
    parse_config_text(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kTwo = R"(
target: {n: 2, k: 1, weights: [[1, 1]], tau: [1.0]}
surface: {R: 10, h_r: 0.1, n_theta: 32}
quasimap:
  graph:
    vertices: [{id: 0}, {id: 1}]
    edges: [[0, 1]]
    legs: [{index: 1, vertex: 0}, {index: 2, vertex: 1}]
  vertices:
    - {id: 0, coefficients: [1, 1], zeros: [[[0, 0]], []], lower: {leg: 1}, upper: {edge: 0}}
    - {id: 1, coefficients: [-1, 1], zeros: [[[-1, 0]], [[1, 0]]], lower: {edge: 0}, upper: {leg: 2}}
)";

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  auto c = parse_config_text(kMinimal);
  CHECK(c.target.n == 1);
  CHECK(c.surface.R == 20);
  CHECK(c.surface.n_theta == 64);
  CHECK(c.solve.newton_tol == 1e-8);
  CHECK(c.threads == 1);
  CHECK_FALSE(c.quasimap);
  auto q = default_quasimap(c);
  CHECK(q.vertices.size() == 1);
  CHECK(q.vertices.at(0).r_min == -20);
  CHECK(q.vertices.at(0).zeros[0].size() == 1);
}

TEST_CASE("full blocks parse") {
  auto c = parse_config_text(std::string(kTwo) + R"(
seed: 42
threads: 3
solve: {newton_tol: 1.0e-9, preconditioner: patched, sleeve_width: 4}
decay: {end: lower, window: [2, 6]}
neck: {edge: 0, L: [20, 40], rho_c: 4}
ev: {leg: 2, vertex: 1, coordinate: 1, zero: 0, steps: [0, 0.1]}
quantize: {count: 5, epsilon0: 1.0e-7}
)");
  CHECK(c.seed == 42);
  CHECK(c.threads == 3);
  CHECK(c.solve.preconditioner == solver::Preconditioner::patched);
  CHECK(c.decay.end == fields::End::lower);
  CHECK(c.decay.r1 == 6);
  REQUIRE(c.quasimap);
  CHECK(c.quasimap->vertices.at(1).coefficients[0] == Complex(-1, 0));
  CHECK(c.quasimap->vertices.at(0).upper.kind == quasimap::EndRef::Kind::edge);
  REQUIRE(c.graph);
  CHECK(c.graph->edge_count() == 1);
  CHECK(c.neck.L == RVec{20, 40});
  CHECK(c.ev.steps.size() == 2);
  CHECK(c.quantize.count == 5);
}

TEST_CASE("unknown vertex ids are named") {
  std::string y = kTwo;
  y += "    - {id: 7, coefficients: [1, 1], zeros: [[], []], lower: {leg: 1}, upper: {leg: 2}}\n";
  auto msg = error_of(y);
  CHECK(msg.find("unknown vertex id 7") != std::string::npos);
}

TEST_CASE("chamber and free action problems") {
  auto msg = error_of("target: {n: 1, k: 1, weights: [[1]], tau: [0.0]}\n");
  CHECK(msg.find("chamber") != std::string::npos);
  msg = error_of("target: {n: 2, k: 1, weights: [[2, 2]], tau: [1.0]}\n");
  CHECK(msg.find("free action") != std::string::npos);
}

TEST_CASE("every problem is reported") {
  auto msg = error_of(R"(
target: {n: 1, k: 1, weights: [[1]], tau: [1.0]}
surface: {R: -1, n_theta: 4, colour: blue}
solve: {newton_tol: 0}
bogus: 1
)");
  CHECK(msg.find("problem(s)") != std::string::npos);
  CHECK(msg.find("colour") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);
  CHECK(msg.find("newton_tol") != std::string::npos);
  CHECK(msg.find("n_theta") != std::string::npos);
  int lines = 0;
  for (char ch : msg) lines += ch == '\n';
  CHECK(lines >= 4);
}

TEST_CASE("malformed input") {
  CHECK_FALSE(error_of("target: [").empty());
  CHECK(error_of("surface: {R: 10}\n").find("target") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "neck: {L: [2]}\n").find("sleeve") != std::string::npos);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("content hash") {
  auto a = parse_config_text(kMinimal);
  auto b = parse_config_text(std::string("# comment\n") + kMinimal);
  CHECK(content_hash(a, "solve") == content_hash(b, "solve"));
  CHECK(content_hash(a, "solve") != content_hash(a, "decay"));
  auto c = a;
  c.seed = 9;
  CHECK(content_hash(a, "solve") != content_hash(c, "solve"));
  auto d = a;
  d.threads = 8;
  CHECK(content_hash(a, "solve") == content_hash(d, "solve"));
  auto e = parse_config_text(std::string(kMinimal) + "surface: {R: 10}\n");
  CHECK(content_hash(a, "solve") != content_hash(e, "solve"));
}
