#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "psym/ad.hpp"
#include "psym/integrators.hpp"
#include "psym/rng.hpp"
#include "psym/systems.hpp"

using namespace psym;
using Catch::Approx;

TEST_CASE("builtin hamiltonian values") {
  const auto pendulum = HamiltonianSystem::builtin("pendulum");
  REQUIRE(pendulum.hamiltonian_at(std::vector<double>{0.0, 0.0}) == -1.0);

  const auto galactic = HamiltonianSystem::builtin("galactic");
  REQUIRE(galactic.hamiltonian_at(std::vector<double>{0.0, 0.0, 0.0, 0.0}) == 0.0);

  const auto bead = HamiltonianSystem::builtin("bead_on_wire");
  REQUIRE(bead.hamiltonian_at(std::vector<double>{1.0, 0.0}) ==
          Approx(0.49504950495049505).epsilon(1e-15));

  const auto harmonic = HamiltonianSystem::builtin("harmonic");
  REQUIRE(harmonic.hamiltonian_at(std::vector<double>{1.0, 0.0}) == 0.5);
}

TEST_CASE("unknown system name is rejected") {
  REQUIRE_THROWS_AS(HamiltonianSystem::builtin("lorenz"), std::invalid_argument);
}

TEST_CASE("state dimension is checked") {
  const auto sys = HamiltonianSystem::builtin("galactic");
  REQUIRE_THROWS_AS(sys.hamiltonian_at(std::vector<double>{1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("vector field values") {
  const auto harmonic = HamiltonianSystem::builtin("harmonic");
  REQUIRE(harmonic.field_at(std::vector<double>{1.0, 0.0}) == std::vector<double>{0.0, 1.0});

  const auto pendulum = HamiltonianSystem::builtin("pendulum");
  const auto f = pendulum.field_at(std::vector<double>{0.0, std::numbers::pi / 2});
  REQUIRE(f[0] == Approx(-1.0).epsilon(1e-15));
  REQUIRE(f[1] == 0.0);

  const auto mp = HamiltonianSystem::builtin("modified_pendulum");
  const auto g = mp.field_at(std::vector<double>{1.0, 0.0});
  REQUIRE(g[0] == 0.0);
  REQUIRE(g[1] == Approx(7.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("analytic gradient matches central differences") {
  RandomStream rng(11);
  for (const auto& name : builtin_system_names()) {
    const auto sys = HamiltonianSystem::builtin(name);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> y(sys.dim());
      for (auto& v : y) v = rng.uniform(-2.0, 2.0);
      const auto grad = sys.gradient_at(y);
      const auto fd = fd_gradient(
          [&sys](std::span<const double> z) { return sys.hamiltonian_at(z); }, y, 1e-6);
      for (int k = 0; k < sys.dim(); ++k) {
        const double scale = std::max(1.0, std::fabs(fd[k]));
        REQUIRE(std::fabs(grad[k] - fd[k]) / scale < 1e-6);
      }
    }
  }
}

TEST_CASE("field equals J^{-1} applied to the gradient, exactly") {
  RandomStream rng(17);
  for (const auto& name : builtin_system_names()) {
    const auto sys = HamiltonianSystem::builtin(name);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> y(sys.dim());
      for (auto& v : y) v = rng.uniform(-2.0, 2.0);
      const auto grad = sys.gradient_at(y);
      const auto field = sys.field_at(y);
      const auto expect = sys.structure().apply_inverse<double>(grad);
      REQUIRE(field == expect);
    }
  }
}

TEST_CASE("symplectic structure matrix identities") {
  const SymplecticMatrix j{2};
  const Mat jd = j.dense();

  const Mat j2 = matmul(jd, jd);
  const Mat jt = transpose(jd);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      REQUIRE(j2.at(r, c) == (r == c ? -1.0 : 0.0));  // J^2 = -I
      REQUIRE(jt.at(r, c) == -jd.at(r, c));           // J^T = -J
    }

  const std::vector<double> y{1.0, -2.0, 3.0, 0.5};
  const auto inv = j.apply_inverse<double>(y);
  const auto neg = j.apply<double>(y);
  for (int k = 0; k < 4; ++k) REQUIRE(inv[k] == -neg[k]);  // J^{-1} = -J
}

TEST_CASE("energy is conserved along reference trajectories") {
  struct Case {
    const char* name;
    std::vector<double> y0;
  };
  const std::vector<Case> cases = {
      {"harmonic", {1.0, 0.0}},
      {"pendulum", {1.0, 0.0}},
      {"modified_pendulum", {1.0, 0.0}},
      {"bead_on_wire", {1.0, 0.0}},
      {"galactic", {0.5, 0.0, 0.5, 0.0}},
  };
  for (const auto& c : cases) {
    const auto sys = HamiltonianSystem::builtin(c.name);
    const double h0 = sys.hamiltonian_at(c.y0);
    auto field = [&sys](std::span<const double> y) { return sys.field_at(y); };
    std::vector<double> y = c.y0;
    double drift = 0.0;
    for (int k = 0; k < 100000; ++k) {  // t in [0, 10] at the reference step
      y = implicit_midpoint_step(field, y, 1e-4);
      if (k % 5000 == 4999) drift = std::max(drift, std::fabs(sys.hamiltonian_at(y) - h0));
    }
    drift = std::max(drift, std::fabs(sys.hamiltonian_at(y) - h0));
    INFO(c.name);
    REQUIRE(drift < 1e-8);
  }
}
