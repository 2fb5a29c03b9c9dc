#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fracopt/config.hpp"
#include "fracopt/driver.hpp"

using namespace fracopt;

TEST_CASE("expression grammar covers constants, coordinates, sin, products, sums") {
  const Expr one = Expr::parse("1");
  CHECK(one(0.3, 0.7) == 1.0);

  const Expr e = Expr::parse("sin(pi*x1)*sin(pi*x2) + 2*x2 - 0.5");
  const double pi = std::numbers::pi;
  CHECK(e(0.25, 0.5) ==
        doctest::Approx(std::sin(pi * 0.25) * std::sin(pi * 0.5) + 1.0 - 0.5).epsilon(1e-15));

  const Expr neg = Expr::parse("-x + y*(1 - x)");
  CHECK(neg(0.5, 2.0) == doctest::Approx(-0.5 + 2.0 * 0.5));

  CHECK_THROWS_AS(Expr::parse("cos(x)"), ValidationError);
  CHECK_THROWS_AS(Expr::parse("1 +"), ValidationError);
  CHECK_THROWS_AS(Expr::parse("sin x"), ValidationError);
}

TEST_CASE("paper experiment file parses and round-trips through its echo") {
  const std::string text =
      "# L-shape experiment\n"
      "domain = l-shape\n"
      "s = 0.3\n"
      "sigma = 0.1\n"
      "nu = 0.5\n"
      "u_d = 1\n"
      "max_iterations = 12\n";
  const AfemConfig cfg = parse_config_text(text);
  CHECK(cfg.problem.s == 0.3);
  CHECK(cfg.problem.sigma == 0.1);
  CHECK(cfg.problem.nu == 0.5);
  CHECK(cfg.domain.kind == DomainSpec::Kind::LShape);
  CHECK(cfg.max_iterations == 12);

  const AfemConfig again = parse_config_text(config_echo(cfg));
  CHECK(config_echo(again) == config_echo(cfg));
}

TEST_CASE("defaults follow the experiment setup") {
  const AfemConfig cfg = parse_config_text("domain = l-shape\ns = 0.4\nu_d = 1\n");
  CHECK(cfg.problem.theta == 0.5);
  CHECK(cfg.problem.a == -0.3);
  CHECK(cfg.problem.b == 0.3);
}

TEST_CASE("validation errors cite the violated invariant") {
  CHECK_THROWS_WITH_AS(parse_config_text("domain = l-shape\ns = 0.4\nu_d = 1\na = 0.1\n"),
                       doctest::Contains("a < 0 < b"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("domain = l-shape\ns = 1.4\nu_d = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("domain = l-shape\nu_d = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("s = 0.4\nu_d = 1\n"), ValidationError);
}

TEST_CASE("parse errors carry the offending line") {
  try {
    parse_config_text("domain = l-shape\nwhat is this\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  try {
    parse_config_text("domain = l-shape\ns = fast\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config_text("mystery = 1\n"), ParseError);
}

TEST_CASE("trace csv round-trips exactly") {
  AfemTrace trace;
  AfemIterate r;
  r.iter = 0;
  r.nT_base = 96;
  r.nT_cyl = 960;
  r.dofs = 350;
  r.Y = 2.5218374652187346;
  r.M = 10;
  r.E_V = 0.1234567890123456789;
  r.E_P = 2.2e-3;
  r.E_Z = 1.0 / 3.0;
  r.E_Lambda = 1e-17;
  r.osc = 0.25;
  r.total = 0.5;
  r.J = 1.2345678901234567;
  r.as_iters = 7;
  r.seconds = 1.5;
  trace.push_back(r);
  r.iter = 1;
  r.total = 0.25;
  trace.push_back(r);

  std::stringstream ss;
  write_trace_csv(ss, trace, true);
  const AfemTrace back = read_trace_csv(ss);
  REQUIRE(back.size() == trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(back[i].iter == trace[i].iter);
    CHECK(back[i].nT_cyl == trace[i].nT_cyl);
    CHECK(back[i].Y == trace[i].Y);
    CHECK(back[i].E_V == trace[i].E_V);
    CHECK(back[i].E_Lambda == trace[i].E_Lambda);
    CHECK(back[i].J == trace[i].J);
    CHECK(back[i].seconds == trace[i].seconds);
  }

  // timing off: the seconds column reads back zero
  std::stringstream ss2;
  write_trace_csv(ss2, trace, false);
  const AfemTrace no_timing = read_trace_csv(ss2);
  for (const auto& row : no_timing) CHECK(row.seconds == 0.0);
}

TEST_CASE("report on synthetic power-law traces") {
  AfemTrace trace;
  for (int i = 0; i < 8; ++i) {
    AfemIterate r;
    r.iter = i;
    r.nT_cyl = 100 * (i + 1) * (i + 1);
    const double n = static_cast<double>(r.nT_cyl);
    r.total = std::pow(n, -1.0 / 3.0);
    r.E_V = 0.5 * std::pow(n, -1.0 / 3.0);
    r.E_P = 0.25 * std::pow(n, -1.0 / 3.0);
    r.E_Z = 0.1 * std::pow(n, -1.0 / 3.0);
    r.E_Lambda = 0.05 * std::pow(n, -1.0 / 3.0);
    trace.push_back(r);
  }
  const RateReport rep = report_trace(trace, 5);
  CHECK(rep.pass);
  for (const auto& row : rep.rows) {
    CHECK(row.defined);
    CHECK(row.slope == doctest::Approx(-1.0 / 3.0).epsilon(1e-10));
  }
  CHECK(rep.text().find("PASS") != std::string::npos);

  // constant indicator: slope 0, verdict FAIL
  for (auto& row : trace) {
    row.total = 1.0;
    row.E_V = row.E_P = row.E_Z = row.E_Lambda = 1.0;
  }
  const RateReport flat = report_trace(trace, 5);
  CHECK_FALSE(flat.pass);
  CHECK(flat.rows[0].slope == doctest::Approx(0.0));

  AfemTrace empty;
  CHECK_THROWS_AS(report_trace(empty, 5), InsufficientData);
}

TEST_CASE("fit_rate slope recovery with noise") {
  std::vector<double> n, e;
  // multiplicative noise of 1 percent around an exact -1/3 law
  std::uint64_t state = 12345;
  auto next_noise = [&]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return 1.0 + 0.01 * (static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5);
  };
  for (int i = 1; i <= 12; ++i) {
    const double ni = 50.0 * std::pow(1.9, i);
    n.push_back(ni);
    e.push_back(std::pow(ni, -1.0 / 3.0) * next_noise());
  }
  const double slope = fit_rate(n, e, 12);
  CHECK(std::abs(slope + 1.0 / 3.0) <= 0.02);

  CHECK_THROWS_AS(fit_rate(n, e, 2), InsufficientData);
  std::vector<double> bad = e;
  bad.back() = 0.0;
  CHECK_THROWS_AS(fit_rate(n, bad, 5), InsufficientData);
}
