#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "fracopt/optimizer.hpp"
#include "fracopt/oracle.hpp"

using namespace fracopt;

namespace {

ProblemData basic_data(double s = 0.5) {
  ProblemData d;
  d.s = s;
  d.sigma = 0.1;
  d.nu = 0.5;
  d.a = -0.3;
  d.b = 0.3;
  d.u_d = nullptr;
  return d;
}

DiscreteSystem make_system(const char* domain, int refinements, double s) {
  BaseMesh base = initial_mesh(DomainSpec::parse(domain));
  for (int r = 0; r < refinements; ++r) base = uniform_refine(base);
  const int M = static_cast<int>(std::ceil(std::sqrt(base.triangle_count())));
  const double Y = 1.0 + std::log(base.triangle_count()) / 3.0;
  const double gamma = 3.0 / (2.0 * s) * 1.1;
  return DiscreteSystem(extrude(base, graded_interval(Y, M, gamma), 1.0 - 2.0 * s), s);
}

}  // namespace

TEST_CASE("projection formulas on spelled-out inputs") {
  CHECK(project_subgradient(0.2, 0.5) == doctest::Approx(-0.4));
  CHECK(project_subgradient(1.0, 0.5) == -1.0);
  CHECK(project_subgradient(-1.0, 0.5) == 1.0);

  ProblemData d = basic_data();
  CHECK(project_control(0.2, -0.4, d) == doctest::Approx(0.0));
  CHECK(project_control(1.0, -1.0, d) == doctest::Approx(-0.3));
  CHECK(project_control(-1.0, 1.0, d) == doctest::Approx(0.3));
}

TEST_CASE("sparsity band: control vanishes exactly when |q| <= nu") {
  ProblemData d = basic_data();
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double q = u(rng);
    const double lam = project_subgradient(q, d.nu);
    const double z = project_control(q, lam, d);
    if (std::abs(q) <= d.nu)
      CHECK(z == 0.0);
    else
      CHECK(z != 0.0);
    CHECK(z >= d.a);
    CHECK(z <= d.b);
    CHECK(lam >= -1.0);
    CHECK(lam <= 1.0);
    // subgradient sign structure
    if (z > 0.0) CHECK(lam == 1.0);
    if (z < 0.0) CHECK(lam == -1.0);
  }
}

TEST_CASE("cell averages of P1 traces") {
  const DiscreteSystem sys = make_system("unit-square", 2, 0.5);
  const BaseMesh& base = sys.space.base();

  std::vector<double> tr(base.vertex_count(), 3.25);
  CHECK(cell_average_trace(sys.space, tr, 0) == doctest::Approx(3.25));

  // vertex values (0,1,2) average to 1
  std::vector<double> lin(base.vertex_count(), 0.0);
  const auto& v = base.triangles[0].v;
  lin[v[0]] = 0.0;
  lin[v[1]] = 1.0;
  lin[v[2]] = 2.0;
  CHECK(cell_average_trace(sys.space, lin, 0) == doctest::Approx(1.0));

  // additivity: sum |K| q_K = integral of the trace
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& t : tr) t = u(rng);
  double sum = 0.0;
  for (int t = 0; t < base.triangle_count(); ++t)
    sum += base.area(t) * cell_average_trace(sys.space, tr, t);
  const TraceFn f = [&](int t, double x, double y) { return p1_eval(base, t, tr, x, y); };
  CHECK(sum == doctest::Approx(integrate(base, f, 4)).epsilon(1e-12));
}

TEST_CASE("state solve: zero control gives zero state; linearity") {
  const DiscreteSystem sys = make_system("unit-square", 2, 0.6);
  const int nT = sys.space.base().triangle_count();

  const auto v0 = solve_state(sys, std::vector<double>(nT, 0.0));
  for (double v : v0) CHECK(v == 0.0);

  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> z1(nT), z2(nT), z12(nT);
  for (int t = 0; t < nT; ++t) {
    z1[t] = u(rng);
    z2[t] = u(rng);
    z12[t] = z1[t] + z2[t];
  }
  const auto va = solve_state(sys, z1);
  const auto vb = solve_state(sys, z2);
  const auto vab = solve_state(sys, z12);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] + vb[i] - vab[i];
    num += d * d;
    den += vab[i] * vab[i];
  }
  CHECK(std::sqrt(num) <= 1e-8 * std::max(1.0, std::sqrt(den)));
}

TEST_CASE("adjoint solve: tr V equal to the target gives a zero adjoint") {
  DiscreteSystem sys = make_system("unit-square", 2, 0.5);
  ProblemData d = basic_data();
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> z(sys.space.base().triangle_count());
  for (auto& v : z) v = u(rng);
  const auto V = solve_state(sys, z);
  const auto trV = sys.space.trace(V);

  // u_d equal to the P1 trace field
  const BaseMesh* base = &sys.space.base();
  std::vector<double> tr_copy = trV;
  d.u_d = [base, tr_copy](int t, double x, double y) { return p1_eval(*base, t, tr_copy, x, y); };
  const auto P = solve_adjoint(sys, V, d);
  for (double p : P) CHECK(std::abs(p) <= 1e-12);
}

TEST_CASE("adjoint identity: (tr S z, g) = (z, tr S* g)") {
  DiscreteSystem sys = make_system("unit-square", 2, 0.4);
  ProblemData d = basic_data(0.4);
  d.u_d = nullptr;
  const BaseMesh& base = sys.space.base();
  const int nT = base.triangle_count();
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> z(nT), g(nT);
  for (auto& v : z) v = u(rng);
  for (auto& v : g) v = u(rng);

  // state with control z, adjoint-type solve with load g (u_d = 0 adjoint of
  // a state whose trace is g-projected): use solve_state for both sides since
  // the matrix is symmetric
  const auto Vz = solve_state(sys, z);
  const auto Vg = solve_state(sys, g);
  const auto trVz = sys.space.trace(Vz);
  const auto trVg = sys.space.trace(Vg);
  double lhs = 0.0, rhs = 0.0;
  for (int t = 0; t < nT; ++t) {
    lhs += base.area(t) * g[t] * cell_average_trace(sys.space, trVz, t) * 3.0 / 3.0;
    rhs += base.area(t) * z[t] * cell_average_trace(sys.space, trVg, t);
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("adjoint equals a reassembled state solve when u_d vanishes") {
  DiscreteSystem sys = make_system("unit-square", 2, 0.5);
  ProblemData d = basic_data();
  d.u_d = nullptr;
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> z(sys.space.base().triangle_count());
  for (auto& v : z) v = u(rng);
  const auto V = solve_state(sys, z);
  const auto P = solve_adjoint(sys, V, d);

  // direct reassembly: same matrix, mass-weighted trace load
  const auto load = assemble_trace_load_p1(sys.space, sys.space.trace(V));
  const auto P2 = cg_solve(sys.A, load).x;
  for (std::size_t i = 0; i < P.size(); ++i)
    CHECK(P[i] == doctest::Approx(P2[i]).epsilon(1e-9));
}

TEST_CASE("active set solve: zero desired state gives the zero quadruple") {
  DiscreteSystem sys = make_system("l-shape", 1, 0.5);
  ProblemData d = basic_data();
  d.u_d = nullptr;
  const auto res = active_set_solve(sys, d);
  for (double v : res.quad.V) CHECK(v == 0.0);
  for (double v : res.quad.P) CHECK(std::abs(v) <= 1e-14);
  for (double v : res.quad.Z) CHECK(v == 0.0);
  for (auto l : res.labels) CHECK(l == CellLabel::Zero);
}

TEST_CASE("active set solve meets the discrete variational inequality") {
  DiscreteSystem sys = make_system("l-shape", 2, 0.5);
  ProblemData d = basic_data();
  d.u_d = [](int, double, double) { return 1.0; };
  const auto res = active_set_solve(sys, d);

  const auto trP = sys.space.trace(res.quad.P);
  const BaseMesh& base = sys.space.base();
  for (int t = 0; t < base.triangle_count(); ++t) {
    const double q = cell_average_trace(sys.space, trP, t);
    const double Z = res.quad.Z[t];
    const double L = res.quad.Lambda[t];
    CHECK(Z >= d.a);
    CHECK(Z <= d.b);
    CHECK(L >= -1.0);
    CHECK(L <= 1.0);
    if (Z > 0.0) CHECK(L == 1.0);
    if (Z < 0.0) CHECK(L == -1.0);
    const double g = q + d.sigma * Z + d.nu * L;
    for (double zc : {d.a, 0.0, d.b})
      CHECK(g * (zc - Z) >= -1e-8 * (1.0 + std::abs(q)));
  }
}

TEST_CASE("large nu forces the zero control") {
  DiscreteSystem sys = make_system("l-shape", 1, 0.5);
  ProblemData d = basic_data();
  d.u_d = [](int, double, double) { return 1.0; };

  // find the q range of the unconstrained-by-sparsity solve, then double nu
  // until the sparsity band swallows every cell
  d.nu = 0.05;
  for (int doubling = 0; doubling < 12; ++doubling) {
    const auto res = active_set_solve(sys, d);
    bool all_zero = true;
    for (double z : res.quad.Z) all_zero = all_zero && z == 0.0;
    if (all_zero) {
      // nu >= max |q| at the zero solution confirms the band criterion
      const auto trP = sys.space.trace(res.quad.P);
      double qmax = 0.0;
      for (int t = 0; t < sys.space.base().triangle_count(); ++t)
        qmax = std::max(qmax, std::abs(cell_average_trace(sys.space, trP, t)));
      CHECK(d.nu >= qmax);
      return;
    }
    d.nu *= 2.0;
  }
  FAIL("control never vanished while doubling nu");
}

TEST_CASE("objective values on closed-form quadruples") {
  DiscreteSystem sys = make_system("unit-square", 2, 0.5);
  ProblemData d = basic_data();
  d.u_d = [](int, double, double) { return 1.0; };

  ControlQuadruple zero;
  zero.V.assign(sys.space.dof_count(), 0.0);
  zero.P.assign(sys.space.dof_count(), 0.0);
  zero.Z.assign(sys.space.base().triangle_count(), 0.0);
  zero.Lambda = zero.Z;
  CHECK(objective(sys, zero, d) == doctest::Approx(0.5).epsilon(1e-12));

  ControlQuadruple constant = zero;
  constant.Z.assign(constant.Z.size(), 0.2);
  d.u_d = nullptr;
  CHECK(objective(sys, constant, d) ==
        doctest::Approx(0.5 * d.sigma * 0.04 + d.nu * 0.2).epsilon(1e-12));
}

TEST_CASE("solver output beats the zero control") {
  DiscreteSystem sys = make_system("l-shape", 2, 0.5);
  ProblemData d = basic_data();
  d.u_d = [](int, double, double) { return 1.0; };
  const auto res = active_set_solve(sys, d);

  ControlQuadruple zero;
  zero.V.assign(sys.space.dof_count(), 0.0);
  zero.P.assign(sys.space.dof_count(), 0.0);
  zero.Z.assign(sys.space.base().triangle_count(), 0.0);
  zero.Lambda = zero.Z;
  CHECK(objective(sys, res.quad, d) <= objective(sys, zero, d) + 1e-12);
}

TEST_CASE("objective is monotone along the damped iteration") {
  // s = 0.3 with sigma = 0.1 is the configuration whose plain sweep
  // oscillates; once under-relaxation engages the objective must descend
  DiscreteSystem sys = make_system("l-shape", 2, 0.3);
  ProblemData d = basic_data(0.3);
  d.u_d = [](int, double, double) { return 1.0; };
  const auto res = active_set_solve(sys, d);
  REQUIRE(res.first_damped_sweep >= 0);
  REQUIRE(res.omega < 1.0);
  for (std::size_t i = res.first_damped_sweep + 1; i < res.objective_history.size(); ++i) {
    const double prev = res.objective_history[i - 1];
    CHECK(res.objective_history[i] <= prev + 1e-11 * (1.0 + std::abs(prev)));
  }

  // a configuration that converges without damping descends throughout
  DiscreteSystem sys8 = make_system("l-shape", 1, 0.8);
  ProblemData d8 = basic_data(0.8);
  d8.sigma = 0.05;
  d8.nu = 0.1;
  d8.u_d = [](int, double, double) { return 1.0; };
  const auto res8 = active_set_solve(sys8, d8);
  CHECK(res8.omega == 1.0);
  for (std::size_t i = 1; i < res8.objective_history.size(); ++i) {
    const double prev = res8.objective_history[i - 1];
    CHECK(res8.objective_history[i] <= prev + 1e-11 * (1.0 + std::abs(prev)));
  }
}

TEST_CASE("state trace converges to the eigen-series solution under refinement") {
  const double pi = std::numbers::pi;
  for (double s : {0.5}) {
    double prev_err = -1.0;
    for (int lvl = 2; lvl <= 4; ++lvl) {
      DiscreteSystem sys = make_system("unit-square", lvl, s);
      const BaseMesh& base = sys.space.base();
      // P0 projection of sin(pi x) sin(pi y)
      std::vector<double> z(base.triangle_count());
      const TraceFn f = [&](int, double x, double y) {
        return std::sin(pi * x) * std::sin(pi * y);
      };
      for (int t = 0; t < base.triangle_count(); ++t)
        z[t] = cell_integral(base, t, f, 7) / base.area(t);
      const auto V = solve_state(sys, z);
      const auto trV = sys.space.trace(V);
      const double factor = std::pow(2.0 * pi * pi, -s);
      const TraceFn err2 = [&](int t, double x, double y) {
        const double e = p1_eval(base, t, trV, x, y) - factor * std::sin(pi * x) * std::sin(pi * y);
        return e * e;
      };
      const double err = std::sqrt(integrate(base, err2, 7));
      if (prev_err >= 0.0) CHECK(err < prev_err);
      prev_err = err;
    }
  }
}
