#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "psym/integrators.hpp"
#include "psym/rng.hpp"
#include "psym/systems.hpp"

using namespace psym;
using Catch::Approx;

TEST_CASE("tableau consistency") {
  const auto& tab = ButcherTableau::pseudo_symplectic7();
  double sum_b = 0.0;
  for (double b : tab.b) sum_b += b;
  REQUIRE(std::fabs(sum_b - 1.0) <= 1e-15);
  for (int i = 0; i < 7; ++i) {
    double row = 0.0;
    for (int j = 0; j < 7; ++j) row += tab.a[i][j];
    REQUIRE(std::fabs(row - tab.c[i]) <= 1e-15);
  }
  // strictly lower triangular
  for (int i = 0; i < 7; ++i)
    for (int j = i; j < 7; ++j) REQUIRE(tab.a[i][j] == 0.0);
}

TEST_CASE("gamma coefficient") {
  REQUIRE(ps_gamma() == Approx(0.33780179798991444).epsilon(1e-16));
}

TEST_CASE("zero field leaves the state unchanged") {
  auto zero = [](std::span<const double> y) { return std::vector<double>(y.size(), 0.0); };
  const std::vector<double> y{1.5, -2.5};
  REQUIRE(ps_rk_step<double>(zero, y, 0.3) == y);
}

TEST_CASE("step size must lie in (0,1)") {
  auto zero = [](std::span<const double> y) { return std::vector<double>(y.size(), 0.0); };
  const std::vector<double> y{1.0, 0.0};
  REQUIRE_THROWS_AS(ps_rk_step<double>(zero, y, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ps_rk_step<double>(zero, y, -0.1), std::invalid_argument);
}

TEST_CASE("the field is evaluated exactly once per stage") {
  int calls = 0;
  auto counting = [&calls](std::span<const double> y) {
    ++calls;
    return std::vector<double>(y.size(), 0.0);
  };
  ps_rk_step<double>(counting, std::vector<double>{1.0, 0.0}, 0.1);
  REQUIRE(calls == 7);
}

TEST_CASE("one step on the harmonic oscillator matches the rotation flow") {
  const auto sys = HamiltonianSystem::builtin("harmonic");
  auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
  const auto y1 = ps_rk_step<double>(field, std::vector<double>{1.0, 0.0}, 0.01);
  REQUIRE(y1[0] == Approx(std::cos(0.01)).margin(1e-10));
  REQUIRE(y1[1] == Approx(std::sin(0.01)).margin(1e-10));
}

TEST_CASE("compose_flow") {
  const auto sys = HamiltonianSystem::builtin("harmonic");
  auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
  const std::vector<double> y0{1.0, 0.0};

  SECTION("K=1 equals a single step") {
    const auto traj = compose_flow<double>(field, y0, 0.01, 1);
    REQUIRE(traj.size() == 2);
    REQUIRE(traj[0] == y0);
    REQUIRE(traj[1] == ps_rk_step<double>(field, y0, 0.01));
  }

  SECTION("zero field gives a constant trajectory") {
    auto zero = [](std::span<const double> y) { return std::vector<double>(y.size(), 0.0); };
    const auto traj = compose_flow<double>(zero, y0, 0.01, 100);
    REQUIRE(traj.size() == 101);
    for (const auto& y : traj) REQUIRE(y == y0);
  }

  SECTION("100 steps reach the rotation flow at t=1") {
    const auto traj = compose_flow<double>(field, y0, 0.01, 100);
    const auto exact = harmonic_rotation(y0, 1.0);
    REQUIRE(traj.back()[0] == Approx(exact[0]).margin(1e-9));
    REQUIRE(traj.back()[1] == Approx(exact[1]).margin(1e-9));
  }
}

TEST_CASE("implicit midpoint") {
  SECTION("zero field converges immediately") {
    auto zero = [](std::span<const double> y) { return std::vector<double>(y.size(), 0.0); };
    int iters = 0;
    const std::vector<double> y{2.0, -1.0};
    const auto y1 = implicit_midpoint_step(zero, y, 0.01, 1e-12, 100, &iters);
    REQUIRE(y1 == y);
    REQUIRE(iters == 1);
  }

  SECTION("conserves the quadratic harmonic energy") {
    const auto sys = HamiltonianSystem::builtin("harmonic");
    auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
    std::vector<double> y{1.0, 0.0};
    const double h0 = sys.hamiltonian_at(y);
    for (int k = 0; k < 100; ++k)
      y = implicit_midpoint_step(field, y, 0.05, 1e-12);
    REQUIRE(std::fabs(sys.hamiltonian_at(y) - h0) < 1e-10);
  }

  SECTION("pendulum converges in a few iterations") {
    const auto sys = HamiltonianSystem::builtin("pendulum");
    auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
    int iters = 0;
    implicit_midpoint_step(field, std::vector<double>{0.0, 1.0}, 0.01, 1e-12, 100, &iters);
    REQUIRE(iters <= 10);
  }

  SECTION("iteration budget is enforced") {
    const auto sys = HamiltonianSystem::builtin("pendulum");
    auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
    try {
      implicit_midpoint_step(field, std::vector<double>{0.0, 1.0}, 0.01, 1e-15, 1);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      REQUIRE(e.residual() > 0.0);
    }
  }
}

TEST_CASE("reference solution") {
  const auto harmonic = HamiltonianSystem::builtin("harmonic");
  const std::vector<double> y0{1.0, 0.0};

  SECTION("t=0 returns the start state") {
    REQUIRE(reference_solution(harmonic, y0, 0.0) == y0);
  }

  SECTION("matches the rotation flow at t=1") {
    const auto y = reference_solution(harmonic, y0, 1.0);
    const auto exact = harmonic_rotation(y0, 1.0);
    REQUIRE(y[0] == Approx(exact[0]).margin(1e-8));
    REQUIRE(y[1] == Approx(exact[1]).margin(1e-8));
  }

  SECTION("pendulum energy drift over t=60 stays tiny") {
    const auto sys = HamiltonianSystem::builtin("pendulum");
    const auto y = reference_solution(sys, y0, 60.0);
    REQUIRE(std::fabs(sys.hamiltonian_at(y) - sys.hamiltonian_at(y0)) < 1e-8);
  }
}

TEST_CASE("symplecticity residual of exactly symplectic maps") {
  SECTION("identity") {
    auto id = [](std::span<const Dual> y) { return std::vector<Dual>(y.begin(), y.end()); };
    REQUIRE(symplecticity_residual(id, std::vector<double>{0.4, 0.6}) == 0.0);
  }
  SECTION("rotation") {
    const RotationMap rot{0.37};
    REQUIRE(symplecticity_residual(rot, std::vector<double>{1.0, -0.5}) < 1e-14);
  }
}

TEST_CASE("one-step residual drops steeply under step halving") {
  const auto sys = HamiltonianSystem::builtin("modified_pendulum");
  const std::vector<double> y{1.0, 1.0};
  const double r4 = symplecticity_residual(FlowMap{&sys, 0.4, 1}, y);
  const double r2 = symplecticity_residual(FlowMap{&sys, 0.2, 1}, y);
  // measured ratio ~165; any low-order defect would give ~16 or less
  REQUIRE(r4 / r2 > 120.0);
  REQUIRE(r4 / r2 < 220.0);
}

TEST_CASE("observed convergence order is four") {
  const auto sys = HamiltonianSystem::builtin("pendulum");
  const std::vector<double> steps{0.1, 0.05, 0.025, 0.0125};
  const auto fit =
      observed_order(sys, std::vector<double>{1.0, 0.0}, steps, OrderMode::Convergence);
  REQUIRE(fit.slope > 3.8);
  REQUIRE(fit.slope < 4.2);
}

TEST_CASE("observed_order rejects bad inputs") {
  const auto sys = HamiltonianSystem::builtin("pendulum");
  const std::vector<double> y0{1.0, 0.0};
  REQUIRE_THROWS_AS(
      observed_order(sys, y0, std::vector<double>{0.1, 0.05}, OrderMode::Convergence),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      observed_order(sys, y0, std::vector<double>{0.5, 0.25, 1.5}, OrderMode::Symplecticity),
      std::invalid_argument);
}

TEST_CASE("exactly symplectic maps sit below the noise floor") {
  const std::vector<double> steps{0.5, 0.35, 0.25};
  std::vector<double> residuals;
  for (double h : steps)
    residuals.push_back(symplecticity_residual(RotationMap{h}, std::vector<double>{1.0, 0.0}));
  REQUIRE_THROWS_AS(fit_loglog(steps, residuals), NoiseFloorError);
}

TEST_CASE("composition preserves the residual decay rate") {
  const auto sys = HamiltonianSystem::builtin("pendulum");
  const std::vector<double> y{1.0, 1.0};
  const std::vector<double> steps{0.4, 0.3, 0.2};
  OrderCheckOptions opts;
  const auto fit1 = observed_order(sys, y, steps, OrderMode::Symplecticity, opts);
  opts.compose = 10;
  const auto fit10 = observed_order(sys, y, steps, OrderMode::Symplecticity, opts);
  REQUIRE(std::fabs(fit10.slope - fit1.slope) <= 0.5);
}

TEST_CASE("step-map jacobians stay bounded") {
  RandomStream rng(5);
  for (const auto& name : builtin_system_names()) {
    const auto sys = HamiltonianSystem::builtin(name);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> y(sys.dim());
      for (auto& v : y) v = rng.uniform(-2.0, 2.0);
      FlowMap flow{&sys, 0.01, 1};
      const Mat m = jacobian([&flow](std::span<const Dual> z) { return flow(z); }, y);
      INFO(name);
      REQUIRE(frobenius_norm(m) < 10.0);
    }
  }
}

TEST_CASE("global error constant is stable across step halvings") {
  const auto sys = HamiltonianSystem::builtin("harmonic");
  auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
  const std::vector<double> y0{1.0, 0.0};
  const auto exact = harmonic_rotation(y0, 1.0);
  std::vector<double> constants;
  for (double h : {0.1, 0.05, 0.025}) {
    std::vector<double> y = y0;
    const long n = std::lround(1.0 / h);
    for (long k = 0; k < n; ++k) y = ps_rk_step<double>(field, y, h);
    double err = 0.0;
    for (int k = 0; k < 2; ++k) err += (y[k] - exact[k]) * (y[k] - exact[k]);
    constants.push_back(std::sqrt(err) / std::pow(h, 4));
  }
  for (double c : constants) {
    REQUIRE(c > constants[0] * 0.7);
    REQUIRE(c < constants[0] * 1.3);
  }
}
