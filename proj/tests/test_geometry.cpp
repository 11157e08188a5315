#include <gtest/gtest.h>

#include <cmath>

#include "ogda/geometry.hpp"
#include "oracles.hpp"

using namespace ogda;

namespace {

// Frozen from oracle::project_curved on (0.3, 0.04).
constexpr double kCurvedProjU = 0.27891688082535226;
// Frozen from pairwise distances over 1e4 boundary samples of CurvedRegion(2).
constexpr double kCurvedDiameterSampled = 0.55901699437494745;

Vector random_point(SplitMix64& rng, std::size_t d, double scale) {
  Vector v(d);
  for (double& e : v) e = scale * rng.uniform_pm1();
  return v;
}

// {x in Delta_3 : x1 <= 0.5}
FeasibleSet capped_simplex() {
  return FeasibleSet::polytope(DenseMatrix{{1, 0, 0}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}, {1, 1, 1}},
                               {0.5, 0, 0, 0, 1}, {false, false, false, false, true});
}

std::vector<FeasibleSet> catalog() {
  return {FeasibleSet::simplex(2),
          FeasibleSet::simplex(3),
          FeasibleSet::simplex(6),
          FeasibleSet::box({0, -1}, {1, 2}),
          FeasibleSet::curved(2),
          FeasibleSet::curved(3),
          capped_simplex(),
          FeasibleSet::product({FeasibleSet::simplex(3), FeasibleSet::curved(2)})};
}

}  // namespace

TEST(Project, SimplexExamples) {
  const Vector a{0.5, 0.5};
  EXPECT_EQ(project(FeasibleSet::simplex(2), a), a);
  const Vector p = project(FeasibleSet::simplex(2), Vector{2, 0});
  const auto ref = oracle::grid_project_simplex2({2, 0}, 1e-4);
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_NEAR(p[1], 0.0, 1e-15);
  EXPECT_NEAR(p[0], ref[0], 1e-4);
}

TEST(Project, SimplexMatchesGridOracle) {
  SplitMix64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vector p2 = random_point(rng, 2, 1.5);
    const Vector p3 = random_point(rng, 3, 1.5);
    const auto r2 = oracle::grid_project_simplex2(p2, 1e-4);
    const auto r3 = oracle::grid_project_simplex3(p3, 2e-3);
    const auto q2 = project(FeasibleSet::simplex(2), p2);
    const auto q3 = project(FeasibleSet::simplex(3), p3);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(q2[k], r2[k], 2e-3);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(q3[k], r3[k], 2e-3);
    const auto b = oracle::bisect_project_simplex(p3);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(q3[k], b[k], 1e-12);
  }
}

TEST(Project, CurvedExamples) {
  const auto set = FeasibleSet::curved(2);
  const Vector inside{0.2, 0.1};
  EXPECT_EQ(project(set, inside), inside);
  const auto ref = oracle::project_curved(2, {0.3, 0.04});
  EXPECT_NEAR(ref[0], kCurvedProjU, 1e-12);
  const auto p = project(set, Vector{0.3, 0.04});
  EXPECT_NEAR(p[0], kCurvedProjU, 1e-9);
  EXPECT_NEAR(p[1], kCurvedProjU * kCurvedProjU, 1e-9);
}

TEST(Project, CurvedMatchesBoundaryOracle) {
  SplitMix64 rng(4);
  for (int n : {2, 3}) {
    const auto set = FeasibleSet::curved(n);
    for (int i = 0; i < 60; ++i) {
      const Vector p{rng.uniform(-0.3, 0.9), rng.uniform(-0.3, 0.6)};
      const auto ref = oracle::project_curved(n, p);
      const auto got = project(set, p);
      EXPECT_NEAR(got[0], ref[0], 1e-5) << p[0] << "," << p[1];
      EXPECT_NEAR(got[1], ref[1], 1e-5) << p[0] << "," << p[1];
    }
  }
}

TEST(Project, CappedSimplexAgainstGrid) {
  const auto set = capped_simplex();
  SplitMix64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const Vector p = random_point(rng, 3, 1.2);
    double best = INFINITY;
    Vector ref;
    for (int a = 0; a <= 250; ++a)
      for (int b = 0; a + b <= 500; ++b) {
        const Vector c{a * 2e-3, b * 2e-3, 1 - a * 2e-3 - b * 2e-3};
        const double d = dist_sq(c, p);
        if (d < best) best = d, ref = c;
      }
    const auto got = project(set, p);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(got[k], ref[k], 3e-3);
  }
}

TEST(Project, Properties) {
  SplitMix64 rng(5);
  for (const auto& set : catalog()) {
    const std::size_t d = set.dim();
    for (int i = 0; i < 200; ++i) {
      const Vector p = random_point(rng, d, 1.5), q = random_point(rng, d, 1.5);
      const Vector pp = project(set, p), pq = project(set, q);
      EXPECT_TRUE(contains(set, pp, 1e-9));
      const Vector again = project(set, pp);
      EXPECT_LE(std::sqrt(dist_sq(again, pp)), 1e-10);
      EXPECT_LE(std::sqrt(dist_sq(pp, pq)), std::sqrt(dist_sq(p, q)) + 1e-10);
      for (int k = 0; k < 5; ++k) {
        const Vector v = sample_point(set, rng);
        double vi = 0.0;
        for (std::size_t j = 0; j < d; ++j) vi += (p[j] - pp[j]) * (v[j] - pp[j]);
        EXPECT_LE(vi, 1e-8);
      }
    }
  }
}

TEST(Project, DimensionMismatch) {
  try {
    project(FeasibleSet::simplex(3), Vector{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Polytope, EmptyIsDetected) {
  // x1 >= 0.6 and x1 <= 0.5.
  try {
    const auto set = FeasibleSet::polytope(DenseMatrix{{1, 0}, {-1, 0}, {1, 1}}, {0.5, -0.6, 1}, {false, false, true});
    project(set, Vector{0.2, 0.8});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleSet);
  }
}

TEST(Contains, Examples) {
  EXPECT_TRUE(contains(FeasibleSet::simplex(3), Vector{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-12));
  EXPECT_FALSE(contains(FeasibleSet::simplex(3), Vector{0.5, 0.5, 0.1}, 1e-9));
  EXPECT_FALSE(contains(FeasibleSet::curved(2), Vector{0.4, 0.15}, 1e-12));
  EXPECT_TRUE(contains(FeasibleSet::curved(2), Vector{0.4, 0.16}, 1e-12));
}

TEST(Diameter, Examples) {
  EXPECT_NEAR(diameter(FeasibleSet::simplex(2)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(diameter(FeasibleSet::box({0, 0}, {1, 1})), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(diameter(FeasibleSet::curved(2)), kCurvedDiameterSampled, 1e-4);
  EXPECT_NEAR(diameter(FeasibleSet::product({FeasibleSet::simplex(3), FeasibleSet::simplex(4)})), 2.0, 1e-15);
  // Vertices (1/2,1/2,0), (1/2,0,1/2), (0,1,0), (0,0,1); e2 and e3 are farthest apart.
  EXPECT_NEAR(diameter(capped_simplex()), std::sqrt(2.0), 1e-9);
}

TEST(Vertices, SimplexAndCurved) {
  const auto vs = vertices(FeasibleSet::simplex(3));
  ASSERT_TRUE(vs);
  EXPECT_EQ(vs->size(), 3u);
  EXPECT_FALSE(vertices(FeasibleSet::curved(2)));
  const auto cv = vertices(capped_simplex());
  ASSERT_TRUE(cv);
  EXPECT_EQ(cv->size(), 4u);
  const auto pv = vertices(FeasibleSet::product({FeasibleSet::simplex(2), FeasibleSet::simplex(3)}));
  ASSERT_TRUE(pv);
  EXPECT_EQ(pv->size(), 6u);
}

TEST(Bregman, Examples) {
  const Vector h{0.5, 0.5};
  EXPECT_NEAR(bregman(Regularizer::kEntropy, h, h), 0.0, 1e-15);
  EXPECT_NEAR(bregman(Regularizer::kEntropy, Vector{1, 0}, h), std::log(2.0), 1e-15);
  EXPECT_NEAR(bregman(Regularizer::kEuclidean, Vector{1, 0}, Vector{0, 1}), 1.0, 1e-15);
  // Subnormal second argument: u / v overflows but the divergence is finite.
  const double sub = 5e-324;
  EXPECT_NEAR(bregman(Regularizer::kEntropy, Vector{0.5, 0.5}, Vector{sub, 1.0}),
              0.5 * (std::log(0.5) - std::log(sub)) + 0.5 * std::log(0.5) - 1.0 + 1.0 + sub, 1e-12);
  try {
    bregman(Regularizer::kEntropy, Vector{0.5, 0.5}, Vector{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomainError);
  }
}

TEST(KlJoint, Examples) {
  const JointPoint u{{0.5, 0.5}, {0.5, 0.5}};
  EXPECT_NEAR(kl_joint(u, u), 0.0, 1e-15);
  EXPECT_NEAR(kl_joint({{1, 0}, {1, 0}}, u), 2 * std::log(2.0), 1e-15);
  SplitMix64 rng(3);
  const auto s = FeasibleSet::simplex(4);
  const JointPoint a{sample_point(s, rng), sample_point(s, rng)};
  const JointPoint b{sample_point(s, rng), sample_point(s, rng)};
  EXPECT_NEAR(kl_joint(a, b), bregman(Regularizer::kEntropy, a.x, b.x) + bregman(Regularizer::kEntropy, a.y, b.y),
              1e-15);
}
