#include <gtest/gtest.h>

#include <cmath>

#include "ogda/equilibrium.hpp"
#include "ogda/problems.hpp"
#include "oracles.hpp"

using namespace ogda;

namespace {

// Frozen from oracle::grid_cx_2x2 on [[0,-1],[1,0]] at step 1e-3.
constexpr double kCx2x2Grid = 0.5;

const DenseMatrix kPureSaddle{{0, -1}, {1, 0}};

Vector random_simplex(SplitMix64& rng, std::size_t d) { return sample_point(FeasibleSet::simplex(d), rng); }

}  // namespace

TEST(SolveMatrixGame, RockPaperScissors) {
  const auto info = solve_matrix_game(*rock_paper_scissors().matrix());
  EXPECT_NEAR(info.rho, 0.0, 1e-12);
  for (double v : info.x_star) EXPECT_NEAR(v, 1.0 / 3, 1e-12);
  for (double v : info.y_star) EXPECT_NEAR(v, 1.0 / 3, 1e-12);
  EXPECT_TRUE(info.unique);
  ASSERT_TRUE(info.xi);
  EXPECT_EQ(*info.xi, 1.0);
}

TEST(SolveMatrixGame, MultiNe) {
  const auto info = solve_matrix_game(*multi_ne_game().matrix());
  EXPECT_NEAR(info.rho, 0.0, 1e-9);
  const Vector xs{1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(info.x_star[i], xs[i], 1e-9);
  EXPECT_FALSE(info.unique);
  EXPECT_FALSE(info.xi);
}

TEST(SolveMatrixGame, Singleton) {
  const auto info = solve_matrix_game(DenseMatrix{{1.0}});
  EXPECT_NEAR(info.rho, 1.0, 1e-12);
  EXPECT_EQ(info.x_star, Vector{1.0});
  EXPECT_EQ(info.y_star, Vector{1.0});
}

TEST(IsUnique, Examples) {
  EXPECT_TRUE(is_unique(*rock_paper_scissors().matrix(), 0.0));
  EXPECT_FALSE(is_unique(*multi_ne_game().matrix(), 0.0));
  EXPECT_FALSE(is_unique(DenseMatrix(2, 2, 0.0), 0.0));
}

TEST(Xi, PureSaddle) {
  // Brute-force: (e1, e1) is a saddle point since G e1 = (0, 1) >= 0 and G^T e1 = (0, -1) <= 0.
  const Vector gy = kPureSaddle.apply(Vector{1, 0}), gtx = kPureSaddle.apply_transposed(Vector{1, 0});
  ASSERT_GE(std::min(gy[0], gy[1]), 0.0);
  ASSERT_LE(std::max(gtx[0], gtx[1]), 0.0);
  const double expected = std::min(gy[1] - 0.0, 0.0 - gtx[1]);
  const auto info = solve_matrix_game(kPureSaddle);
  EXPECT_EQ(info.supp_x, std::vector<std::size_t>{0});
  EXPECT_EQ(info.supp_y, std::vector<std::size_t>{0});
  ASSERT_TRUE(info.xi);
  EXPECT_NEAR(*info.xi, expected, 1e-12);
  EXPECT_NEAR(*info.xi, 1.0, 1e-12);
}

TEST(Xi, PositiveOnUniqueRandomGames) {
  int seen = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto info = solve_matrix_game(*random_matrix_game(3, 3, seed).matrix());
    if (!info.unique) continue;
    ++seen;
    ASSERT_TRUE(info.xi);
    EXPECT_GT(*info.xi, 0.0);
    EXPECT_LE(*info.xi, 1.0);
  }
  EXPECT_GT(seen, 10);
}

TEST(Epsilon, Examples) {
  EXPECT_NEAR(epsilon_constant(uniform_joint(3, 3), 3, 3), 1.0 / 729, 1e-15);
  EXPECT_EQ(epsilon_constant({{1.0}, {1.0}}, 1, 1), 1.0);
  for (std::size_t m : {2, 3, 4}) {
    EXPECT_NEAR(epsilon_constant(uniform_joint(m, m), m, m), std::pow(double(m * m), -double(m)), 1e-15);
  }
}

TEST(CxCy, Examples) {
  const Problem game = rock_paper_scissors();
  const DenseMatrix& rps = *game.matrix();
  const auto info = solve_matrix_game(rps);
  std::vector<Vector> pts;
  for (double d : {1e-3, 1e-2, 0.1}) pts.push_back({1.0 / 3 + d, 1.0 / 3 - d, 1.0 / 3});
  EXPECT_LE(cx_over_points(rps, info, pts), 1.0);
  const auto [cx, cy] = estimate_cx_cy(rps, info, 1000, 3);
  EXPECT_GT(cx, 0.0);
  EXPECT_LE(cx, 1.0);
  EXPECT_GT(cy, 0.0);
  EXPECT_LE(cy, 1.0);

  try {
    estimate_cx_cy(DenseMatrix{{1.0}}, solve_matrix_game(DenseMatrix{{1.0}}), 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSample);
  }

  const auto sinfo = solve_matrix_game(kPureSaddle);
  const double grid = oracle::grid_cx_2x2({{0, -1}, {1, 0}}, sinfo.x_star, sinfo.supp_y, 1e-3);
  EXPECT_NEAR(grid, kCx2x2Grid, 1e-12);
  EXPECT_GE(estimate_cx_cy(kPureSaddle, sinfo, 500, 5).first, grid - 1e-3);
}

TEST(DistanceToEquilibria, UniqueGame) {
  const Problem game = rock_paper_scissors();
  const DenseMatrix& g = *game.matrix();
  const auto info = solve_matrix_game(g);
  const JointPoint z{{0.5, 0.25, 0.25}, {0.1, 0.1, 0.8}};
  EXPECT_NEAR(distance_to_equilibria(g, info, z), dist_sq(z.x, info.x_star) + dist_sq(z.y, info.y_star), 1e-15);
}

TEST(DistanceToEquilibria, MultiNe) {
  const Problem game = multi_ne_game();
  const DenseMatrix& g = *game.matrix();
  const auto info = solve_matrix_game(g);
  const Vector xs{1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0};
  EXPECT_NEAR(distance_to_equilibria(g, info, {xs, xs}), 0.0, 1e-15);
  SplitMix64 rng(8);
  for (int i = 0; i < 40; ++i) {
    const JointPoint z{xs, random_simplex(rng, 5)};
    const auto ref = oracle::grid_project_multi_ne_y(z.y, 2e-3);
    EquilibriumSet set(info);
    const auto proj = set.project(z);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(proj.y[k], ref[k], 5e-3);
    EXPECT_NEAR(distance_to_equilibria(g, info, z), oracle::sq(std::sqrt(dist_sq(z.y, ref))), 5e-3);
  }
}

TEST(DerivedConstants, Examples) {
  const auto a = derived_constants(1.0, 1.0, 1.0, 0.3);
  EXPECT_DOUBLE_EQ(a.c1, 1.0 / 64);
  EXPECT_DOUBLE_EQ(a.c2, 1.0 / 128);
  const auto b = derived_constants(1.0, 1.0, 0.0, 0.3);
  EXPECT_EQ(b.c1, 0.0);
  EXPECT_EQ(b.c2, 0.0);
  EXPECT_EQ(b.c5, 0.0);
  EXPECT_EQ(derived_constants(1.0, 1.0, 1.0, 10.0).c5, 0.5);
}

TEST(SolveMatrixGame, StrongDualityAndOptimality) {
  SplitMix64 rng(12);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t m = 2 + seed % 6, n = 2 + (seed / 6) % 6;
    const Problem game = random_matrix_game(m, n, seed);
    const DenseMatrix& g = *game.matrix();
    const auto info = solve_matrix_game(g);
    const Vector gtx = g.apply_transposed(info.x_star), gy = g.apply(info.y_star);
    const double upper = *std::max_element(gtx.begin(), gtx.end());
    const double lower = *std::min_element(gy.begin(), gy.end());
    ASSERT_NEAR(upper, lower, 1e-8) << "seed " << seed;
    ASSERT_LE(upper, info.rho + 1e-9);
    ASSERT_GE(lower, info.rho - 1e-9);
    for (int k = 0; k < 10; ++k) {
      const Vector x = random_simplex(rng, m), y = random_simplex(rng, n);
      ASSERT_LE(dot(info.x_star, g.apply(y)), info.rho + 1e-9);
      ASSERT_LE(info.rho + 1e-9, dot(x, g.apply(info.y_star)) + 2e-9);
    }
  }
}

TEST(SolveMatrixGame, SupportStructureOnUniqueGames) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Problem game = random_matrix_game(3 + seed % 4, 3 + seed % 5, seed);
    const DenseMatrix& g = *game.matrix();
    const auto info = solve_matrix_game(g);
    if (!info.unique) continue;
    const Vector gy = g.apply(info.y_star);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const bool in = std::find(info.supp_x.begin(), info.supp_x.end(), i) != info.supp_x.end();
      if (in) EXPECT_NEAR(gy[i], info.rho, 1e-8);
      else EXPECT_GT(gy[i], info.rho + 1e-10);
    }
  }
}
