#include <doctest.h>

#include <cmath>

#include "coevo/error.hpp"
#include "coevo/games.hpp"

using namespace coevo;

TEST_CASE("coordination payoffs") {
  const GameSpec g = build_coordination_game(3);
  CHECK(g.num_agents() == 3);
  CHECK(g.num_actions() == 2);
  CHECK(g.payoff(0, 1, 0, 0) == 1.0);
  CHECK(g.payoff(0, 1, 0, 1) == 0.0);
  CHECK(g.payoff(0, 1, 1, 0) == 0.0);
  CHECK(g.payoff(0, 1, 1, 1) == 0.0);
  for (Agent x = 0; x < 3; ++x)
    for (Agent y = 0; y < 3; ++y)
      if (x != y)
        for (Action i = 0; i < 2; ++i)
          for (Action j = 0; j < 2; ++j) CHECK(g.payoff(x, y, i, j) == g.payoff(y, x, i, j));
}

TEST_CASE("rps payoffs") {
  const GameSpec g = build_rps_game(3, RpsParams{0.2});
  CHECK(g.payoff(0, 1, 0, 0) == doctest::Approx(0.2));
  CHECK(g.payoff(0, 1, 0, 1) == -1.0);
  CHECK(g.payoff(0, 1, 0, 2) == 1.0);
  CHECK(g.payoff(0, 1, 1, 0) == 1.0);
  CHECK(g.payoff(0, 1, 2, 1) == 1.0);

  CHECK(build_rps_game(3, RpsParams{-0.5}).payoff(1, 2, 2, 2) == -0.5);

  const GameSpec zs = build_rps_game(3, RpsParams{0.0});
  for (Agent x = 0; x < 3; ++x)
    for (Agent y = 0; y < 3; ++y)
      if (x != y)
        for (Action i = 0; i < 3; ++i)
          for (Action j = 0; j < 3; ++j) CHECK(zs.payoff(x, y, i, j) + zs.payoff(y, x, j, i) == 0.0);
}

TEST_CASE("rps rows sum to epsilon") {
  const double eps = 0.35;
  const GameSpec g = build_rps_game(4, RpsParams{eps});
  for (Action i = 0; i < 3; ++i) {
    double s = 0.0;
    for (Action j = 0; j < 3; ++j) s += g.payoff(2, 3, i, j);
    CHECK(s == doctest::Approx(eps).epsilon(1e-14));
  }
}

TEST_CASE("built-in games are pair homogeneous") {
  for (const GameSpec& g : {build_coordination_game(5), build_rps_game(4, RpsParams{0.3})}) {
    const std::size_t n = g.num_agents(), m = g.num_actions();
    for (Agent x = 0; x < n; ++x)
      for (Agent y = 0; y < n; ++y)
        if (x != y)
          for (Action i = 0; i < m; ++i)
            for (Action j = 0; j < m; ++j) CHECK(g.payoff(x, y, i, j) == g.payoff(0, 1, i, j));
  }
}

TEST_CASE("matrix game") {
  const GameSpec g = build_matrix_game(3, {{2, 0}, {3, 1}});
  CHECK(g.payoff(2, 0, 1, 0) == 3.0);
  CHECK(g.payoff(0, 2, 0, 1) == 0.0);
  CHECK_THROWS_AS(build_matrix_game(3, {{1, 2}, {3}}), InvalidArgument);
  CHECK_THROWS_AS(build_matrix_game(3, {}), InvalidArgument);
}

TEST_CASE("invalid game arguments") {
  CHECK_THROWS_AS(build_coordination_game(1), InvalidArgument);
  CHECK_THROWS_AS(build_rps_game(3, RpsParams{1.0}), InvalidArgument);
  CHECK_THROWS_AS(build_rps_game(3, RpsParams{-1.0}), InvalidArgument);
  CHECK_THROWS_AS(build_rps_game(3, RpsParams{std::nan("")}), InvalidArgument);

  const GameSpec g = build_coordination_game(3);
  CHECK_THROWS_AS(g.payoff(1, 1, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(g.payoff(0, 3, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(g.payoff(0, 1, 2, 0), InvalidArgument);
}
