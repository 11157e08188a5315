#include <gtest/gtest.h>

#include <cmath>

#include "ogda/analysis.hpp"
#include "oracles.hpp"

using namespace ogda;

namespace {

// Frozen from an independent evaluation of the beta > 0 closed form at
// beta = 2, C5 = 1/2, d0 = 1, t = 100:
//   32 * ((1 + 4 * sqrt(2)) + 2 * sqrt(2)) / 10.
constexpr double kBoundBeta2 = 30.352900397563428;

SolverConfig config(Regularizer reg, double eta, std::size_t steps, JointPoint z0) {
  SolverConfig c;
  c.regularizer = reg;
  c.eta = eta;
  c.steps = steps;
  c.initial = std::move(z0);
  return c;
}

// max over vertex pairs z' of F(z)^T (z - z').
double brute_force_gap(const Problem& p, const JointPoint& z) {
  const auto f = gradient_field(p, z);
  const double fz = dot(f.x, z.x) + dot(f.y, z.y);
  double best = -INFINITY;
  for (std::size_t i = 0; i < z.x.size(); ++i)
    for (std::size_t j = 0; j < z.y.size(); ++j) best = std::max(best, fz - f.x[i] - f.y[j]);
  return best;
}

}  // namespace

TEST(DualityGap, Examples) {
  const auto p = rock_paper_scissors();
  const DenseMatrix& g = *p.matrix();
  EXPECT_NEAR(duality_gap_matrix(g, uniform_joint(3, 3)), 0.0, 1e-12);
  EXPECT_NEAR(duality_gap_matrix(g, {{1, 0, 0}, {1, 0, 0}}), 2.0, 1e-15);
  EXPECT_THROW(duality_gap_matrix(g, uniform_joint(2, 3)), Error);
}

TEST(DualityGap, MatchesVertexBruteForce) {
  SplitMix64 rng(41);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_matrix_game(2 + seed % 5, 2 + seed % 4, seed);
    for (int k = 0; k < 20; ++k) {
      const JointPoint z{sample_point(p.x_set, rng), sample_point(p.y_set, rng)};
      const double gap = duality_gap_matrix(*p.matrix(), z);
      ASSERT_NEAR(gap, brute_force_gap(p, z), 1e-12);
      ASSERT_GE(gap, -1e-12);
    }
  }
}

TEST(ThetaZeta, FirstValueAndRecursion) {
  const auto p = rock_paper_scissors();
  const auto info = solve_matrix_game(*p.matrix());
  const JointPoint z0{{0.6, 0.3, 0.1}, {0.2, 0.2, 0.6}};
  const auto omwu = run(p, config(Regularizer::kEntropy, 0.125, 1000, z0));
  const auto tr = theta_zeta_trace(omwu, info.z_star());
  ASSERT_EQ(tr.theta.size(), 1001u);
  ASSERT_EQ(tr.zeta.size(), 1000u);
  EXPECT_DOUBLE_EQ(tr.theta[0], kl_joint(info.z_star(), z0));
  EXPECT_LE(tr.max_recursion_excess(), 1e-9);
  for (double v : tr.zeta) EXPECT_GE(v, 0.0);

  // Euclidean steps need eta <= 1/(8L) with L = ||G|| = sqrt(3).
  const auto ogda = run(p, config(Regularizer::kEuclidean, 1.0 / (8.0 * smoothness(p, NormPair::kL2)), 1000, z0));
  const auto te = theta_zeta_trace(ogda, info);
  EXPECT_DOUBLE_EQ(te.theta[0], dist_sq(info.z_star(), z0));
  EXPECT_LE(te.max_recursion_excess(), 1e-9);
}

TEST(ThetaZeta, ConvergedTailIsStationary) {
  const auto p = rock_paper_scissors();
  const auto info = solve_matrix_game(*p.matrix());
  const auto traj = run(p, config(Regularizer::kEuclidean, 0.125, 10000, {{0.6, 0.3, 0.1}, {0.2, 0.2, 0.6}}));
  const auto tr = theta_zeta_trace(traj, info);
  EXPECT_LE(tr.zeta.back(), 1e-12);
}

TEST(ThetaZeta, MultipleEquilibriaUseSetDistance) {
  const auto p = multi_ne_game();
  const auto info = solve_matrix_game(*p.matrix());
  const double eta = 1.0 / (8.0 * smoothness(p, NormPair::kL2));
  const auto traj = run(p, config(Regularizer::kEuclidean, eta, 500, {{0.5, 0.1, 0.1, 0.2, 0.1}, {0.1, 0.1, 0.2, 0.3, 0.3}}));
  const auto tr = theta_zeta_trace(traj, info);
  EXPECT_LE(tr.max_recursion_excess(), 1e-9);
}

TEST(ThetaZeta, MissingSecondary) {
  auto c = config(Regularizer::kEntropy, 0.125, 10, uniform_joint(3, 3));
  c.record_secondary = false;
  const auto traj = run(rock_paper_scissors(), c);
  try {
    theta_zeta_trace(traj, uniform_joint(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingSecondary);
  }
  EXPECT_THROW(lemma1_check(traj, rock_paper_scissors(), uniform_joint(3, 3)), Error);
}

TEST(OneStepInequality, RpsOmwu) {
  const auto p = rock_paper_scissors();
  const auto traj = run(p, config(Regularizer::kEntropy, 0.125, 1000, {{0.6, 0.3, 0.1}, {0.2, 0.2, 0.6}}));
  EXPECT_LE(lemma1_check(traj, p, uniform_joint(3, 3)), 1e-9);
}

TEST(OneStepInequality, RandomGameOgda) {
  const auto p = random_matrix_game(32, 32, 1);
  const auto info = solve_matrix_game(*p.matrix());
  const auto traj = run(p, config(Regularizer::kEuclidean, 0.125, 1000, uniform_joint(32, 32)));
  EXPECT_LE(lemma1_check(traj, p, info.z_star()), 1e-9);
  SplitMix64 rng(6);
  for (int k = 0; k < 3; ++k) {
    const JointPoint ref{sample_point(p.x_set, rng), sample_point(p.y_set, rng)};
    EXPECT_LE(lemma1_check(traj, p, ref), 1e-9);
  }
}

TEST(OneStepInequality, SingleStep) {
  const auto p = rock_paper_scissors();
  for (Regularizer reg : {Regularizer::kEuclidean, Regularizer::kEntropy}) {
    const double eta = reg == Regularizer::kEntropy ? 0.125 : 1.0 / (8.0 * smoothness(p, NormPair::kL2));
    const auto traj = run(p, config(reg, eta, 1, {{0.6, 0.3, 0.1}, {0.2, 0.2, 0.6}}));
    ASSERT_EQ(traj.z.size(), 2u);
    EXPECT_LE(lemma1_check(traj, p, uniform_joint(3, 3)), 1e-9);
  }
}

TEST(OgdaGapLowerBound, HoldsAlongOgda) {
  SplitMix64 rng(13);
  const std::vector<Problem> problems{random_matrix_game(6, 5, 3), strongly_convex_toy(), curved_bilinear(2)};
  for (const auto& p : problems) {
    const double eta = 1.0 / (8.0 * smoothness(p, NormPair::kL2));
    const JointPoint z0{sample_point(p.x_set, rng), sample_point(p.y_set, rng)};
    const auto traj = run(p, config(Regularizer::kEuclidean, eta, 300, z0));
    for (std::size_t t = 1; t < traj.z.size(); ++t) {
      for (int k = 0; k < 5; ++k) {
        const JointPoint zp{sample_point(p.x_set, rng), sample_point(p.y_set, rng)};
        ASSERT_LE(gap_lower_bound_excess(p, eta, traj.z[t], traj.z_hat[t - 1], traj.z_hat[t], zp), 1e-9) << "t " << t;
      }
    }
  }
}

TEST(OmwuKlLowerBound, FirstInequalityOnMatchingPennies) {
  const auto p = matching_pennies();
  const DenseMatrix& g = *p.matrix();
  const auto info = solve_matrix_game(g);
  ASSERT_TRUE(info.unique && info.xi);
  oracle::Mat rows{{g(0, 0), g(0, 1)}, {g(1, 0), g(1, 1)}};
  oracle::Mat neg_t{{-g(0, 0), -g(1, 0)}, {-g(0, 1), -g(1, 1)}};
  const auto [cx, cy] = estimate_cx_cy(g, info, 500, 2);
  const double c = std::min({cx, cy, oracle::grid_cx_2x2(rows, info.x_star, info.supp_y, 1e-3),
                             oracle::grid_cx_2x2(neg_t, info.y_star, info.supp_x, 1e-3)});
  ASSERT_GT(c, 0.0);
  const double eta = 0.125;
  const auto k = derived_constants(*info.xi, info.epsilon, c, eta);
  const auto traj = run(p, config(Regularizer::kEntropy, eta, 2000, {{0.8, 0.2}, {0.3, 0.7}}));
  for (std::size_t t = 1; t < traj.z.size(); ++t) {
    const auto& hat_t = traj.z_hat[t - 1];
    const auto& hat_next = traj.z_hat[t];
    const double lhs = kl_joint(hat_next, traj.z[t]) + kl_joint(traj.z[t], hat_t);
    const double d = kl_joint(info.z_star(), hat_next);
    ASSERT_GE(lhs, eta * eta * k.c1 * d * d - 1e-9) << "t " << t;
  }
}

TEST(Spms, PowerToyLowerBound) {
  const auto p = power_toy(2);
  const JointPoint star = *p.known_equilibrium;
  SplitMix64 rng(21);
  for (int k = 0; k < 200; ++k) {
    const JointPoint z{sample_point(p.x_set, rng), sample_point(p.y_set, rng)};
    if (std::sqrt(dist_sq(z, star)) <= 1e-10) continue;
    const auto s = spms_ratio(p, z, star, 20, k);
    ASSERT_GE(s.ratio, 0.5 * std::pow(s.distance, 3) - 1e-9);
    const auto f = gradient_field(p, z);
    const double direct = (dot(f.x, z.x) - dot(f.x, star.x) + dot(f.y, z.y) - dot(f.y, star.y)) / s.distance;
    ASSERT_GE(s.ratio, direct - 1e-12);
  }
}

TEST(Spms, StronglyConvexIsLinear) {
  const auto p = strongly_convex_toy();
  const JointPoint star = *p.known_equilibrium;
  SplitMix64 rng(22);
  double worst = INFINITY;
  for (int k = 0; k < 200; ++k) {
    const JointPoint z{sample_point(p.x_set, rng), sample_point(p.y_set, rng)};
    const auto s = spms_ratio(p, z, star, 20, k);
    worst = std::min(worst, s.ratio / s.distance);
  }
  EXPECT_GT(worst, 1e-3);
}

TEST(Spms, AtEquilibrium) {
  const auto p = rock_paper_scissors();
  try {
    spms_ratio(p, uniform_joint(3, 3), uniform_joint(3, 3), 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAtEquilibrium);
  }
}

TEST(FitSpms, SyntheticPowerLaws) {
  std::vector<SpmsSample> a, b;
  for (int k = 1; k <= 20; ++k) {
    const double d = 0.05 * k;
    a.push_back({2.0 * d * d, d});
    b.push_back({3.0 * d, d});
  }
  const auto fa = fit_spms(a), fb = fit_spms(b);
  EXPECT_NEAR(fa.fitted_beta, 1.0, 1e-9);
  EXPECT_NEAR(fa.fitted_C, 2.0, 1e-9);
  EXPECT_NEAR(fb.fitted_beta, 0.0, 1e-9);
  EXPECT_NEAR(fb.fitted_C, 3.0, 1e-9);
  try {
    fit_spms(std::vector<SpmsSample>(a.begin(), a.begin() + 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewPoints);
  }
}

TEST(PredictedBound, Examples) {
  EXPECT_EQ(predicted_bound(0.0, 0.5, 1.0, 0.0), 64.0);
  for (double t : {1.0, 10.0, 1e4}) EXPECT_EQ(predicted_bound(0.0, 0.5, 0.0, t), 0.0);
  const double independent = 32.0 * ((1.0 + 4.0 * std::sqrt(4.0 / 2.0)) * 1.0 + 2.0 * std::sqrt(2.0 / (0.5 * 2.0))) *
                             (1.0 / std::sqrt(100.0));
  EXPECT_NEAR(independent, kBoundBeta2, 1e-12);
  EXPECT_NEAR(predicted_bound(2.0, 0.5, 1.0, 100.0), kBoundBeta2, 1e-12);
  try {
    predicted_bound(-1.0, 0.5, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidBeta);
  }
}

TEST(RecursionBound, Examples) {
  EXPECT_LE(recursion_bound_check(1.0, 1.0, 0.1, 10000), 1.0 + 1e-9);
  EXPECT_EQ(recursion_bound_check(0.0, 2.0, 0.3, 100), 0.0);
  try {
    // q (1 + p) B1^p = 0.75 * 2 * 1 = 1.5
    recursion_bound_check(1.0, 1.0, 0.75, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPreconditionViolated);
  }
}

TEST(RecursionBound, TightSequenceSatisfiesRecursion) {
  // Re-simulate independently with Newton's method and compare the ratio.
  const double b1 = 0.4, p = 2.0, q = 0.5;
  const double c = std::max(b1, std::pow(2.0 / (q * p), 1.0 / p));
  double b = b1, worst = 0.0;
  for (int t = 1; t <= 2000; ++t) {
    worst = std::max(worst, b / (c * std::pow(t, -1.0 / p)));
    double x = b;
    for (int it = 0; it < 100; ++it) x -= (x + q * std::pow(x, p + 1) - b) / (1 + q * (p + 1) * std::pow(x, p));
    b = x;
  }
  EXPECT_NEAR(recursion_bound_check(b1, p, q, 2000), worst, 1e-10);
  EXPECT_LE(worst, 1.0);
}

TEST(AverageGap, FrozenAtEquilibrium) {
  const auto p = rock_paper_scissors();
  const auto traj = run(p, config(Regularizer::kEuclidean, 0.125, 50, uniform_joint(3, 3)));
  const auto s = average_duality_gap(*p.matrix(), traj);
  ASSERT_EQ(s.values.size(), 50u);
  EXPECT_EQ(s.t_offset, 1u);
  for (double v : s.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(AverageGap, PrefixMeans) {
  const auto p = random_matrix_game(4, 4, 5);
  const auto traj = run(p, config(Regularizer::kEuclidean, 0.125, 30, uniform_joint(4, 4)));
  const auto s = average_duality_gap(*p.matrix(), traj);
  double acc = 0.0;
  for (std::size_t t = 1; t <= 30; ++t) {
    acc += brute_force_gap(p, traj.z[t]);
    EXPECT_NEAR(s.values[t - 1], acc / t, 1e-12);
  }
}

TEST(GapEnergy, BoundHoldsAlongOgda) {
  const auto p = random_matrix_game(8, 8, 4);
  const auto info = solve_matrix_game(*p.matrix());
  const auto traj = run(p, config(Regularizer::kEuclidean, 0.125, 3000, uniform_joint(8, 8)));
  const auto tr = theta_zeta_trace(traj, info);
  const auto e = gap_energy(*p.matrix(), traj, tr, diameter(p.joint_set()));
  ASSERT_EQ(e.partial_sums.size(), 3000u);
  EXPECT_LE(e.max_excess(), 1e-6);
}
