#include <doctest.h>

#include <cmath>

#include "coevo/dynamics.hpp"
#include "coevo/error.hpp"
#include "coevo/rng.hpp"
#include "oracles.hpp"

using namespace coevo;

namespace {

JointState random_joint(const PairShape& shape, Rng& rng) {
  JointState s(shape);
  for (Agent x = 0; x < shape.num_agents(); ++x) {
    const auto p = random_simplex_point(rng, shape.block_size());
    std::copy(p.begin(), p.end(), s.agent_block(x).begin());
  }
  return s;
}

LinkState3 random_links(Rng& rng) { return {rng.uniform(), rng.uniform(), rng.uniform()}; }

OdeSystem decay_system() {
  return OdeSystem{StateLayout::unconstrained(1),
                   [](std::span<const double> x, std::span<double> d) { d[0] = -x[0]; },
                   {"x"}};
}

}  // namespace

TEST_CASE("joint replicator at the uniform point") {
  const GameSpec g = build_coordination_game(3);
  const JointState u = uniform_joint_state(PairShape(g));
  for (double T : {0.0, 0.3, 2.0}) {
    const JointState d = full_replicator_rhs(u, g, T);
    for (Agent x = 0; x < 3; ++x)
      for (Agent y = 0; y < 3; ++y)
        if (x != y) {
          CHECK(d(x, y, 0) == doctest::Approx(1.0 / 32.0).epsilon(1e-14));
          CHECK(d(x, y, 1) == doctest::Approx(-1.0 / 32.0).epsilon(1e-14));
        }
  }
}

TEST_CASE("joint replicator matches scalar oracle") {
  Rng rng(21);
  for (const GameSpec& g : {build_coordination_game(3), build_rps_game(4, RpsParams{-0.3}),
                            build_matrix_game(3, {{0.5, -2.0}, {1.5, 0.25}})}) {
    const PairShape shape(g);
    for (int trial = 0; trial < 50; ++trial) {
      const JointState s = random_joint(shape, rng);
      const double T = 2.0 * rng.uniform();
      const auto ours = full_replicator_rhs(s, g, T).values();
      const auto ref = oracle::joint_rhs(s, g, T);
      for (std::size_t k = 0; k < ours.size(); ++k) CHECK(std::abs(ours[k] - ref[k]) < 1e-13);
    }
  }
}

TEST_CASE("tangency on random states") {
  Rng rng(3);
  const GameSpec rps = build_rps_game(3, RpsParams{0.4});
  const GameSpec coord = build_coordination_game(4);
  for (int trial = 0; trial < 100; ++trial) {
    const double T = rng.uniform();
    for (const GameSpec* g : {&rps, &coord}) {
      const OdeSystem joint = joint_system(*g, T);
      const auto xj = random_state(joint.layout, rng);
      CHECK(joint.layout.max_tangent_defect(joint(xj)) < 1e-12);

      const OdeSystem fac = factored_system(*g, T);
      const auto xf = random_state(fac.layout, rng);
      CHECK(fac.layout.max_tangent_defect(fac(xf)) < 1e-12);
    }
  }
}

TEST_CASE("faces are invariant") {
  const GameSpec g = build_rps_game(3, RpsParams{0.2});
  Rng rng(8);
  JointState s = random_joint(PairShape(g), rng);
  s(1, 2, 1) = 0.0;
  s(1, 0, 0) += s(1, 2, 1);
  for (double T : {0.0, 0.7}) CHECK(full_replicator_rhs(s, g, T)(1, 2, 1) == 0.0);

  for (double T : {0.0, 0.4}) {
    const auto d = link_rhs_coordination({1.0, 0.3, 0.0}, T);
    CHECK(d[0] == 0.0);
    CHECK(d[2] == 0.0);
    const auto e = link_rhs_rps({0.0, 1.0, 0.6}, T, -0.5);
    CHECK(e[0] == 0.0);
    CHECK(e[1] == 0.0);
  }
  CHECK(binary_entropy_drift(0.0) == 0.0);
  CHECK(binary_entropy_drift(1.0) == 0.0);
  CHECK(binary_entropy_drift(0.5) == 0.0);
  CHECK(binary_entropy_drift(0.25) == doctest::Approx(0.1875 * std::log(3.0)));
}

TEST_CASE("factored rhs") {
  SUBCASE("interior coordination point is at rest") {
    const GameSpec g = build_coordination_game(3);
    FactoredState f(3, 2);
    set_links3(f, {0.5, 0.5, 0.5});
    for (Agent x = 0; x < 3; ++x) f.action(x, 0) = 1.0;
    for (double T : {0.0, 0.5}) {
      const auto d = factored_rhs(f, g, T).flat();
      for (double v : d) CHECK(std::abs(v) < 1e-15);
    }
  }
  SUBCASE("pure NE action profile at T = 0") {
    const GameSpec g = build_coordination_game(3);
    FactoredState f(3, 2);
    set_links3(f, {0.3, 0.8, 0.45});
    for (Agent x = 0; x < 3; ++x) f.action(x, 1) = 1.0;
    const FactoredState d = factored_rhs(f, g, 0.0);
    for (Agent x = 0; x < 3; ++x)
      for (Action i = 0; i < 2; ++i) CHECK(d.action(x, i) == 0.0);
  }
}

TEST_CASE("specialization to the link systems") {
  Rng rng(99);
  const GameSpec coord = build_coordination_game(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const LinkState3 c = random_links(rng);
    const double T = trial % 4 == 0 ? 0.0 : rng.uniform();
    FactoredState f(3, 2);
    set_links3(f, c);
    for (Agent x = 0; x < 3; ++x) f.action(x, 0) = 1.0;
    const FactoredState d = factored_rhs(f, coord, T);
    const LinkState3 lc = links_of_factored(d);
    const LinkState3 ref = link_rhs_coordination(c, T);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(lc[k] - ref[k]) < 1e-12);
    CHECK(std::abs(d.link(0, 2) + ref[0]) < 1e-12);
    CHECK(std::abs(d.link(1, 0) + ref[1]) < 1e-12);
    CHECK(std::abs(d.link(2, 1) + ref[2]) < 1e-12);
  }
  for (double eps : {0.6, -0.5}) {
    const GameSpec rps = build_rps_game(3, RpsParams{eps});
    for (int trial = 0; trial < 1000; ++trial) {
      const LinkState3 c = random_links(rng);
      const double T = rng.uniform();
      FactoredState f(3, 3);
      set_links3(f, c);
      for (Agent x = 0; x < 3; ++x)
        for (Action i = 0; i < 3; ++i) f.action(x, i) = 1.0 / 3.0;
      const LinkState3 lc = links_of_factored(factored_rhs(f, rps, T));
      const LinkState3 ref = link_rhs_rps(c, T, eps);
      for (int k = 0; k < 3; ++k) CHECK(std::abs(lc[k] - ref[k]) < 1e-12);
    }
  }
}

TEST_CASE("link rhs values") {
  for (double T : {0.0, 0.2, 1.0}) {
    for (double v : link_rhs_coordination({0.5, 0.5, 0.5}, T)) CHECK(v == 0.0);
    for (double v : link_rhs_rps({0.5, 0.5, 0.5}, T, 0.3)) CHECK(v == 0.0);
  }
  const auto a = link_rhs_coordination({1.0, 0.0, 0.7}, 0.0);
  for (double v : a) CHECK(v == 0.0);
  const auto b = link_rhs_coordination({0.6, 0.5, 0.5}, 0.0);
  CHECK(b[0] == doctest::Approx(0.0));
  CHECK(b[1] == doctest::Approx(-0.025).epsilon(1e-14));
  CHECK(b[2] == doctest::Approx(-0.025).epsilon(1e-14));
  for (double v : link_rhs_rps({1.0, 1.0, 1.0}, 0.0, -0.5)) CHECK(v == 0.0);
  // (0.6/3) * 0.25 * (1 - 0.5 - 0.6) = -0.005
  const auto r = link_rhs_rps({0.6, 0.5, 0.5}, 0.0, 0.6);
  CHECK(r[0] == doctest::Approx(0.0));
  CHECK(r[1] == doctest::Approx(-0.005).epsilon(1e-14));
  CHECK(r[2] == doctest::Approx(-0.005).epsilon(1e-14));

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const LinkState3 c = random_links(rng);
    const double T = rng.uniform(), eps = 1.8 * rng.uniform() - 0.9;
    const auto ours = link_rhs_rps(c, T, eps);
    const auto ref = oracle::link_rhs(c, T, eps / 3.0);
    const auto oc = link_rhs_coordination(c, T);
    const auto rc = oracle::link_rhs(c, T, 1.0);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(ours[k] - ref[k]) < 1e-15);
      CHECK(std::abs(oc[k] - rc[k]) < 1e-15);
    }
  }
  CHECK_THROWS_AS(link_rhs_coordination({1.2, 0.5, 0.5}, 0.1), InvalidArgument);
  CHECK_THROWS_AS(link_rhs_rps({0.5, 0.5, 0.5}, 0.1, 1.5), InvalidArgument);
  CHECK_THROWS_AS(link_rhs_coordination({0.5, 0.5, 0.5}, -0.1), InvalidArgument);
}

TEST_CASE("cyclic relabeling permutes the rhs") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const LinkState3 c = random_links(rng);
    const double T = rng.uniform();
    const LinkState3 rotated{c[1], c[2], c[0]};
    const auto d = link_rhs_coordination(c, T), dr = link_rhs_coordination(rotated, T);
    const auto e = link_rhs_rps(c, T, 0.4), er = link_rhs_rps(rotated, T, 0.4);
    for (int k = 0; k < 3; ++k) {
      CHECK(dr[k] == doctest::Approx(d[(k + 1) % 3]).epsilon(1e-14));
      CHECK(er[k] == doctest::Approx(e[(k + 1) % 3]).epsilon(1e-14));
    }
  }
  // Agent relabeling x -> x+1 mod 3 on the joint system.
  const GameSpec g = build_rps_game(3, RpsParams{0.1});
  const PairShape shape(g);
  for (int trial = 0; trial < 50; ++trial) {
    const JointState s = random_joint(shape, rng);
    JointState p(shape);
    for (Agent x = 0; x < 3; ++x)
      for (Agent y = 0; y < 3; ++y)
        if (x != y)
          for (Action i = 0; i < 3; ++i) p((x + 1) % 3, (y + 1) % 3, i) = s(x, y, i);
    const JointState d = full_replicator_rhs(s, g, 0.3), dp = full_replicator_rhs(p, g, 0.3);
    for (Agent x = 0; x < 3; ++x)
      for (Agent y = 0; y < 3; ++y)
        if (x != y)
          for (Action i = 0; i < 3; ++i)
            CHECK(std::abs(dp((x + 1) % 3, (y + 1) % 3, i) - d(x, y, i)) < 1e-15);
  }
}

TEST_CASE("coordinate names") {
  CHECK(coordination_link_system(0.1).names == std::vector<std::string>{"c_xy", "c_yz", "c_zx"});
  const OdeSystem f = factored_system(build_coordination_game(3), 0.1);
  CHECK(f.names.front() == "c_x_y");
  CHECK(f.names.back() == "p_z_2");
  CHECK(f.names.size() == f.dim());
  const OdeSystem j = joint_system(build_coordination_game(4), 0.1);
  CHECK(j.names.front() == "p_1_2_1");
  CHECK(j.names.size() == 24);
}

TEST_CASE("integrator") {
  SUBCASE("exponential decay rk4") {
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    const Trajectory t = integrate(decay_system(), {1.0}, cfg);
    CHECK(t.times.back() == 1.0);
    CHECK(std::abs(t.states.back()[0] - std::exp(-1.0)) < 1e-8);
    CHECK(t.size() == 101);
  }
  SUBCASE("exponential decay rk45") {
    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::rk45;
    cfg.t_end = 3.0;
    const Trajectory t = integrate(decay_system(), {1.0}, cfg);
    CHECK(t.times.back() == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(std::abs(t.states.back()[0] - std::exp(-3.0)) < 1e-8);
  }
  SUBCASE("zero field keeps the state") {
    const OdeSystem zero{StateLayout::link3(),
                         [](std::span<const double>, std::span<double> d) {
                           std::fill(d.begin(), d.end(), 0.0);
                         },
                         {"a", "b", "c"}};
    IntegratorConfig cfg;
    cfg.t_end = 5.0;
    const Trajectory t = integrate(zero, {0.2, 0.4, 0.9}, cfg);
    for (const auto& s : t.states) CHECK(s == std::vector<double>{0.2, 0.4, 0.9});
  }
  SUBCASE("record_every counting") {
    IntegratorConfig cfg;
    cfg.t_end = 100.0;
    cfg.record_every = 10;
    const Trajectory t = integrate(coordination_link_system(0.5), {0.5, 0.5, 0.5}, cfg);
    CHECK(t.size() == 1001);
    CHECK(t.steps.back() == 10000);
    for (std::size_t k = 1; k < t.size(); ++k) CHECK(t.times[k] > t.times[k - 1]);
  }
  SUBCASE("stable regime converges to the interior point") {
    Rng rng(12);
    IntegratorConfig cfg;
    cfg.t_end = 200.0;
    cfg.record_every = 1000;
    for (int trial = 0; trial < 10; ++trial) {
      const auto x0 = random_state(StateLayout::link3(), rng);
      const Trajectory t = integrate(coordination_link_system(0.5), x0, cfg);
      for (double v : t.states.back()) CHECK(std::abs(v - 0.5) < 1e-6);
    }
  }
  SUBCASE("simplex drift on the factored system") {
    Rng rng(2);
    const OdeSystem sys = factored_system(build_coordination_game(3), 0.5);
    IntegratorConfig cfg;
    cfg.t_end = 100.0;
    cfg.record_every = 100;
    const Trajectory t = integrate(sys, random_state(sys.layout, rng), cfg);
    for (const auto& s : t.states) CHECK(sys.layout.max_simplex_drift(s) < 1e-9);
  }
  SUBCASE("numerical failure is reported with a partial trajectory") {
    const OdeSystem blowup{StateLayout::unconstrained(1),
                           [](std::span<const double> x, std::span<double> d) {
                             d[0] = x[0] > 2.0 ? std::nan("") : 1.0;
                           },
                           {"x"}};
    IntegratorConfig cfg;
    cfg.t_end = 5.0;
    const auto out = integrate_checked(blowup, {0.0}, cfg);
    REQUIRE(out.failure.has_value());
    CHECK(out.failure_time == doctest::Approx(2.0).epsilon(0.02));
    CHECK(out.trajectory.size() > 100);
    CHECK_THROWS_AS(integrate(blowup, {0.0}, cfg), NumericalFailure);
  }
  SUBCASE("invalid configuration") {
    IntegratorConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(integrate(decay_system(), {1.0}, cfg), InvalidArgument);
    cfg = IntegratorConfig{};
    cfg.record_every = 0;
    CHECK_THROWS_AS(integrate(decay_system(), {1.0}, cfg), InvalidArgument);
    CHECK_THROWS_AS(integrate(decay_system(), {1.0, 2.0}, IntegratorConfig{}), InvalidArgument);
  }
}
