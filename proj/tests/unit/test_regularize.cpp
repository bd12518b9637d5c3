#include "carnot/calculus.hpp"
#include "carnot/error.hpp"
#include "carnot/regularize.hpp"

#include "support/supconv_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace carnot {
namespace {

Grid h1_grid(int res, double half = 1.0) { return Grid(symmetric_box(heisenberg(1), half), res); }

GridField random_field(const Grid& grid, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amplitude, amplitude);
  std::vector<double> v(grid.size());
  for (double& x : v) x = U(rng);
  return GridField(grid, v, {{"source", "random"}});
}

void expect_matches_oracle(const GridField& u, double eps, PenaltyOrientation orientation, std::size_t stride) {
  const SupConvParams params = SupConvParams::make(eps, u, orientation);
  const SupConvResult pruned = sup_convolution(u, params, true);
  const SupConvResult full = sup_convolution(u, params, false);
  EXPECT_EQ(pruned.field.values(), full.field.values());
  const std::vector<int> bound = oracle::offset_bounds(u.grid());
  for (std::size_t x = 0; x < u.grid().size(); x += stride) {
    const oracle::OracleResult r = oracle::exhaustive_at(u, x, eps, bound, orientation);
    ASSERT_FALSE(r.edge_hit) << "oracle range too small";
    ASSERT_EQ(pruned.field.value(x), r.value) << "node " << x;
    EXPECT_EQ(pruned.maximizer[x].coords, r.y.coords) << "node " << x;
    EXPECT_EQ(pruned.offset[x].coords, r.offset.coords) << "node " << x;
  }
  // Every in-domain candidate is either evaluated or counted as skipped.
  EXPECT_EQ(pruned.candidates_examined + pruned.candidates_skipped, full.candidates_examined);
  EXPECT_EQ(full.candidates_skipped, 0u);
}

TEST(SupConv, ConstantFieldIsFixedWithArgmaxAtX) {
  const Grid grid = h1_grid(7);
  const GridField u(grid, std::vector<double>(grid.size(), 0.75));
  const SupConvResult r = sup_convolution(u, SupConvParams::make(0.1, u));
  for (std::size_t x = 0; x < grid.size(); ++x) {
    EXPECT_EQ(r.field.value(x), 0.75);
    EXPECT_EQ(r.maximizer[x].coords, grid.node(x).coords);
    EXPECT_EQ(r.offset[x].coords.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(SupConv, MatchesExhaustiveOracleOnHeisenberg) {
  for (int res : {5, 7}) {
    const Grid grid = h1_grid(res);
    for (double eps : {0.02, 0.2, 1.0}) {
      const GridField u = random_field(grid, 100 + res, 0.5);
      expect_matches_oracle(u, eps, PenaltyOrientation::inverted, 1);
      expect_matches_oracle(u, eps, PenaltyOrientation::direct, 3);
    }
  }
}

TEST(SupConv, MatchesExhaustiveOracleOnEngelAndFree) {
  const Grid engel_grid(symmetric_box(engel(), 1.0), 5);
  expect_matches_oracle(random_field(engel_grid, 7, 0.05), 0.05, PenaltyOrientation::inverted, 37);
  const Grid free_grid(symmetric_box(free_step2(3), 1.0), 3);
  expect_matches_oracle(random_field(free_grid, 8, 0.2), 0.1, PenaltyOrientation::inverted, 11);
}

TEST(SupConv, GaugeSpikeMatchesOracleWithAndWithoutPruning) {
  const Grid grid = h1_grid(7, 0.5);
  std::vector<double> v(grid.size(), -1.0);
  v[grid.ravel(std::vector<int>{3, 3, 3})] = 0.0;
  const GridField u(grid, v);
  expect_matches_oracle(u, 0.01, PenaltyOrientation::inverted, 1);
}

TEST(SupConv, AgreesWithNaiveGroupLawFormula) {
  const Grid grid = h1_grid(5);
  const GridField u = sample({"wave", [](const GroupPoint& p) { return std::sin(2 * p[0] + p[2]) * p[1]; }}, grid);
  const double eps = 0.15;
  const SupConvResult r = sup_convolution(u, SupConvParams::make(eps, u));
  const std::vector<int> bound = oracle::offset_bounds(grid);
  for (std::size_t x = 0; x < grid.size(); ++x) {
    EXPECT_NEAR(r.field.value(x), oracle::naive_at(u, x, eps, bound), 1e-12) << "node " << x;
  }
}

TEST(SupConv, SandwichAndMonotonicityHoldExactly) {
  const Grid grid = h1_grid(9);
  for (std::uint64_t seed : {1, 2, 3}) {
    const GridField u = random_field(grid, seed, 0.1);
    std::vector<double> prev = u.values();
    for (double eps : {0.01, 0.05, 0.2, 0.8}) {
      const GridField ue = sup_convolution(u, SupConvParams::make(eps, u)).field;
      for (std::size_t x = 0; x < grid.size(); ++x) {
        ASSERT_LE(u.value(x), ue.value(x));
        ASSERT_LE(ue.value(x), u.max_value());
        ASSERT_LE(prev[x], ue.value(x)) << "not monotone in eps at node " << x;
      }
      prev = ue.values();
    }
  }
}

TEST(SupConv, ParamsAndMetadata) {
  const Grid grid = h1_grid(5);
  const GridField u = random_field(grid, 4, 0.3);
  const SupConvParams p = SupConvParams::make(0.1, u);
  EXPECT_EQ(p.exponent, 4);
  EXPECT_DOUBLE_EQ(p.pruning_radius, std::pow(0.4 * u.sup_norm(), 0.25));
  const SupConvResult r = sup_convolution(u, p);
  EXPECT_EQ(r.field.metadata().at("supconv.eps"), "0.1");
  EXPECT_EQ(r.field.metadata().at("supconv.orientation"), "inverted");
  EXPECT_EQ(r.field.metadata().at("supconv.candidates_examined"), std::to_string(r.candidates_examined));
  EXPECT_EQ(r.field.metadata().at("supconv.candidates_skipped"), std::to_string(r.candidates_skipped));
  EXPECT_GT(r.candidates_skipped, 0u);
  EXPECT_THROW(SupConvParams::make(0.0, u), InvalidArgumentError);
  EXPECT_THROW(SupConvParams::make(-1.0, u), InvalidArgumentError);
}

TEST(SupConv, PenaltyOrientations) {
  auto g = heisenberg(1);
  const GroupPoint x = make_point({0.5, 0.0, 0.0});
  const GroupPoint y = make_point({0.0, 0.5, 0.0});
  // x y^{-1} = (0.5, -0.5, -0.125), x^{-1} y = (-0.5, 0.5, -0.125): same gauge here.
  EXPECT_DOUBLE_EQ(sup_conv_penalty(*g, x, y, 0.5, PenaltyOrientation::inverted),
                   g->gauge_power(g->multiply(x, g->inverse(y))));
  const GroupPoint z = make_point({0.5, 0.0, 0.3});
  EXPECT_NE(sup_conv_penalty(*g, z, y, 0.5, PenaltyOrientation::inverted),
            sup_conv_penalty(*g, z, y, 0.5, PenaltyOrientation::direct));
}

TEST(SupConv, StepFourIsRejected) {
  CarnotGroupSpec spec;
  spec.name = "filiform4";
  spec.step = 4;
  spec.layer_dims = {2, 1, 1, 1};
  spec.brackets = {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}, {0, 3, 4, 1.0}};
  auto g = std::make_shared<const CarnotGroup>(spec);
  const Grid grid(symmetric_box(g, 1.0), 3);
  const GridField u(grid, std::vector<double>(grid.size(), 0.0));
  EXPECT_THROW(sup_convolution(u, SupConvParams::make(0.1, u)), UnsupportedStepError);
}

TEST(Mollifier, WeightsAndProfile) {
  auto g = heisenberg(1);
  const MollifierSpec spec = MollifierSpec::make(*g, 0.3);
  ASSERT_FALSE(spec.offsets.empty());
  double total = 0.0;
  for (std::size_t i = 0; i < spec.weights.size(); ++i) {
    EXPECT_GT(spec.weights[i], 0.0);
    EXPECT_LT(g->gauge_norm(g->dilate(1.0 / 0.3, spec.offsets[i])), 1.0);
    total += spec.weights[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_GT(spec.discrete_mass, 0.0);
  EXPECT_EQ(mollifier_profile(*g, make_point({1.0, 0, 0})), 0.0);
  EXPECT_EQ(mollifier_profile(*g, make_point({0, 0, 2.0})), 0.0);
  EXPECT_EQ(mollifier_profile(*g, GroupPoint::identity(3)), 1.0);
  EXPECT_NEAR(mollifier_profile(*g, make_point({0.5, 0, 0})), std::pow(0.75, 4), 1e-15);
  EXPECT_THROW(MollifierSpec::make(*g, 0.0), InvalidArgumentError);
}

TEST(Mollifier, ConstantAffineAndBounds) {
  const Grid grid = h1_grid(11);
  const MollifierSpec spec = MollifierSpec::make(grid.group(), 0.3);
  const GridField c(grid, std::vector<double>(grid.size(), -2.5));
  const MollifyResult mc = mollify(c, spec);
  for (double v : mc.field.values()) EXPECT_NEAR(v, -2.5, 1e-14);

  const GridField x = sample({"x", [](const GroupPoint& p) { return 0.2 + p[0]; }}, grid);
  const MollifyResult mx = mollify(x, spec);
  ASSERT_GT(mx.valid.count(), 0u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (mx.valid[i]) {
      EXPECT_NEAR(mx.field.value(i), x.value(i), 1e-10);
    } else {
      EXPECT_EQ(mx.field.value(i), x.value(i));
    }
  }
  EXPECT_EQ(mx.field.metadata().at("mollify.delta"), "0.3");

  const GridField r = random_field(grid, 5, 1.0);
  const MollifyResult mr = mollify(r, spec);
  for (double v : mr.field.values()) {
    EXPECT_GE(v, r.min_value());
    EXPECT_LE(v, r.max_value());
  }
}

TEST(Mollifier, SupportLargerThanDomainIsDegenerate) {
  const Grid grid = h1_grid(5);
  const GridField c(grid, std::vector<double>(grid.size(), 1.0));
  EXPECT_THROW(mollify(c, MollifierSpec::make(grid.group(), 3.0)), DegenerateInputError);
}

TEST(Semiconvexity, Examples) {
  const Grid grid = h1_grid(9);
  const InnerDomainMask mask = inner_domain(grid, 0.0);
  const double h = grid.min_spacing();
  const GridField sq = sample({"sq", [](const GroupPoint& p) { return p.coords.squaredNorm(); }}, grid);
  EXPECT_NEAR(semiconvexity_certificate(sq, mask, h), 0.0, 1e-9);
  const GridField neg = sample({"neg", [](const GroupPoint& p) { return -p.coords.squaredNorm(); }}, grid);
  EXPECT_NEAR(semiconvexity_certificate(neg, mask, h), 1.0, 1e-9);
  EXPECT_THROW(semiconvexity_certificate(neg, inner_domain(grid, 9.0), h), DegenerateInputError);
}

TEST(Semiconvexity, SupConvolutionRespectsCOmegaBound) {
  const Grid grid = h1_grid(9);
  const double c = c_omega_d(grid, 1e-2 * grid.min_spacing());
  const GridField u = sample({"max", [](const GroupPoint& p) { return std::max(p[0], p[1]) / 32; }}, grid);
  for (double eps : {0.2, 0.05}) {
    const GridField ue = sup_convolution(u, SupConvParams::make(eps, u)).field;
    const double cert = semiconvexity_certificate(ue, inner_domain(grid, 0.0), grid.min_spacing());
    EXPECT_LE(cert, 1.1 * c / (2 * eps));
  }
}

TEST(COmegaD, AbelianClosedFormAndMonotoneInDomain) {
  const Grid ab(symmetric_box(abelian(2), 1.0), 5);
  EXPECT_NEAR(c_omega_d(ab, 1e-3), 2.0, 1e-6);
  // Nodes of the small box are nodes of the large one.
  const Grid small = h1_grid(5, 0.5);
  const Grid large = h1_grid(9, 1.0);
  const double cs = c_omega_d(small, 1e-3);
  const double cl = c_omega_d(large, 1e-3);
  EXPECT_LE(cs, cl + 1e-9);
  // d^{2r!} is a quartic, so the central-difference error is O(h^2).
  EXPECT_NEAR(c_omega_d(small, 2e-3), cs, 1e-5 * cs);
}

TEST(COmegaD, StableUnderRefinement) {
  // Spectral norms of a degree-4 polynomial Hessian peak at box corners here;
  // refining the lattice adds no larger value.
  const double c5 = c_omega_d(h1_grid(5), 1e-3);
  const double c7 = c_omega_d(h1_grid(7), 1e-3);
  EXPECT_NEAR(c5, c7, 1e-6 * c5);
}

TEST(ShrunkMask, Examples) {
  const Grid grid = h1_grid(11);
  const BoundaryDistance dist(grid);
  for (double eps : {0.05, 0.1, 0.3}) {
    EXPECT_EQ(shrunk_mask_for_vconvexity(dist, eps, 0.0).inside, dist.mask(eps).inside);
    for (double R0 : {0.0, 0.01, 0.5, 2.0}) {
      const InnerDomainMask m = shrunk_mask_for_vconvexity(dist, eps, R0);
      EXPECT_TRUE(m.subset_of(dist.mask(eps)));
      EXPECT_TRUE(m.subset_of(dist.mask((2 * R0 + 1) * eps)));
    }
  }
  EXPECT_EQ(shrunk_mask_for_vconvexity(dist, 0.0, 1.0).inside, dist.mask(0.0).inside);
  EXPECT_EQ(shrunk_mask_for_vconvexity(grid, 0.1, 0.5).inside, shrunk_mask_for_vconvexity(dist, 0.1, 0.5).inside);
}

TEST(ShrunkMask, RadiusDominatesBothBounds) {
  EXPECT_DOUBLE_EQ(vconvexity_shrink(0.1, 0.0, 4), 0.1);
  EXPECT_DOUBLE_EQ(vconvexity_shrink(0.1, 1.0, 4), std::max(0.3, std::pow(0.4, 0.25)));
  EXPECT_DOUBLE_EQ(vconvexity_shrink(2.0, 0.01, 4), 2.0 * 1.02);
  EXPECT_EQ(vconvexity_shrink(0.0, 1.0, 4), 0.0);
}

}  // namespace
}  // namespace carnot
