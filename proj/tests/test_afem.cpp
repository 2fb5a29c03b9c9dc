#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fracopt/afem.hpp"
#include "fracopt/config.hpp"

using namespace fracopt;

namespace {

AfemConfig small_config(const char* extra = "") {
  const std::string text = std::string("domain = l-shape\n"
                                       "s = 0.5\n"
                                       "sigma = 0.1\n"
                                       "nu = 0.5\n"
                                       "u_d = 1\n"
                                       "max_iterations = 4\n"
                                       "initial_refinements = 1\n") +
                           extra;
  return parse_config_text(text);
}

}  // namespace

TEST_CASE("maximum marking thresholds, ties, and monotonicity") {
  const std::vector<double> ind{4.0, 2.0, 1.0};
  CHECK(mark_maximum(ind, 0.5) == std::vector<int>{0, 1});
  CHECK(mark_maximum(ind, 1.0) == std::vector<int>{0});
  CHECK(mark_maximum(ind, 0.0) == std::vector<int>{0, 1, 2});

  const std::vector<double> ties{3.0, 3.0, 0.5};
  CHECK(mark_maximum(ties, 1.0) == std::vector<int>{0, 1});

  CHECK_THROWS_AS(mark_maximum(std::vector<double>{0.0, 0.0}, 0.5), AllZeroIndicators);

  // marked(theta1) contains marked(theta2) whenever theta1 <= theta2
  const std::vector<double> rnd{0.9, 0.1, 0.5, 0.77, 0.3};
  for (double t1 : {0.0, 0.3, 0.6}) {
    for (double t2 : {0.6, 0.8, 1.0}) {
      if (t1 > t2) continue;
      const auto m1 = mark_maximum(rnd, t1);
      const auto m2 = mark_maximum(rnd, t2);
      for (int k : m2) CHECK(std::find(m1.begin(), m1.end(), k) != m1.end());
    }
  }
}

TEST_CASE("extrusion rules: truncation, interval count, grading exponent") {
  AfemConfig cfg = small_config();
  cfg.problem.s = 0.5;
  const ExtrusionRule r = extrusion_rule(100, cfg);
  CHECK(r.Y == doctest::Approx(1.0 + std::log(100.0) / 3.0).epsilon(1e-15));
  CHECK(r.M == 10);
  CHECK(r.gamma == doctest::Approx(3.0 / (2.0 * 0.5) * 1.1).epsilon(1e-15));

  cfg.y_rule_log10 = true;
  CHECK(extrusion_rule(100, cfg).Y == doctest::Approx(1.0 + 2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("grading enforcement grows M") {
  AfemConfig cfg = small_config();
  cfg.enforce_grading = true;
  cfg.grading_constant = 0.05;  // deliberately strict
  BaseMesh base = initial_mesh(cfg.domain);
  base = uniform_refine(base);
  const ExtrudedMesh mesh = build_extrusion(base, cfg);
  CHECK(check_grading(mesh, cfg.grading_constant));
  const ExtrusionRule r = extrusion_rule(base.triangle_count(), cfg);
  CHECK(mesh.interval.size() > r.M);

  cfg.enforce_grading = false;
  const ExtrudedMesh lax = build_extrusion(base, cfg);
  CHECK(lax.interval.size() == r.M);
}

TEST_CASE("zero desired state stops the loop immediately") {
  AfemConfig cfg = small_config();
  cfg.ud_expression = "0";
  cfg.problem.u_d = nullptr;
  const RunResult res = run_afem(cfg);
  CHECK(res.trace.size() == 1);
  CHECK(res.all_zero_stop);
  CHECK(res.trace[0].total <= 1e-12);
}

TEST_CASE("short adaptive run: trace bookkeeping invariants") {
  const AfemConfig cfg = small_config();
  const RunResult res = run_afem(cfg);
  REQUIRE(res.trace.size() == 4);
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const auto& row = res.trace[i];
    CHECK(row.iter == static_cast<int>(i));
    CHECK(row.nT_cyl == static_cast<long>(row.nT_base) * row.M);
    CHECK(row.total > 0.0);
    CHECK(row.J > 0.0);
    CHECK(row.as_iters >= 1);
    if (i > 0) CHECK(row.nT_base > res.trace[i - 1].nT_base);
  }
  CHECK(res.final_base.triangle_count() == res.trace.back().nT_base);
  CHECK_NOTHROW(res.final_base.check_conforming());
}

TEST_CASE("adaptive runs are deterministic") {
  const AfemConfig cfg = small_config();
  const RunResult a = run_afem(cfg);
  const RunResult b = run_afem(cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].total == b.trace[i].total);
    CHECK(a.trace[i].J == b.trace[i].J);
    CHECK(a.trace[i].nT_base == b.trace[i].nT_base);
  }
  for (std::size_t t = 0; t < a.final_quad.Z.size(); ++t)
    CHECK(a.final_quad.Z[t] == b.final_quad.Z[t]);
}

TEST_CASE("fit_rate recovers exact power laws") {
  std::vector<double> n, e;
  for (int i = 1; i <= 10; ++i) {
    n.push_back(100.0 * std::pow(1.7, i));
    e.push_back(std::pow(n.back(), -1.0 / 3.0));
  }
  CHECK(fit_rate(n, e, 5) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

  std::vector<double> c(e.size(), 2.0);
  CHECK(fit_rate(n, c, 5) == doctest::Approx(0.0));
}

TEST_CASE("refine_step rejects an empty marked set") {
  AfemConfig cfg = small_config();
  BaseMesh base = initial_mesh(cfg.domain);
  const ExtrudedMesh mesh = build_extrusion(base, cfg);
  CHECK_THROWS_AS(refine_step(mesh, std::vector<int>{}, cfg), ValidationError);
  const ExtrudedMesh next = refine_step(mesh, std::vector<int>{0}, cfg);
  CHECK(next.base.triangle_count() > mesh.base.triangle_count());
  CHECK(next.interval.size() ==
        extrusion_rule(next.base.triangle_count(), cfg).M);
}
