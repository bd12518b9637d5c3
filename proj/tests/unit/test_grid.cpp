#include "carnot/error.hpp"
#include "carnot/grid.hpp"
#include "carnot/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

namespace carnot {
namespace {

Grid h1_grid(int res, double half = 1.0) { return Grid(symmetric_box(heisenberg(1), half), res); }

TEST(Box, ValidatesBounds) {
  auto g = heisenberg(1);
  EXPECT_THROW(BoxDomain(g, make_point({0, 0, 0}).coords, make_point({1, 1, 0}).coords), InvalidArgumentError);
  EXPECT_THROW(BoxDomain(g, make_point({0, 0}).coords, make_point({1, 1}).coords), InvalidArgumentError);
  const BoxDomain box = symmetric_box(g, 1.0);
  EXPECT_TRUE(box.contains(make_point({1, -1, 0.5})));
  EXPECT_FALSE(box.contains(make_point({1.001, 0, 0})));
}

TEST(Grid, LayoutIsRowMajorLastAxisFastest) {
  const Grid grid = h1_grid(5);
  EXPECT_EQ(grid.size(), 125u);
  EXPECT_DOUBLE_EQ(grid.spacing(0), 0.5);
  const std::vector<int> idx = {1, 2, 3};
  EXPECT_EQ(grid.ravel(idx), 1u * 25 + 2 * 5 + 3);
  EXPECT_EQ(grid.unravel(grid.ravel(idx)), idx);
  EXPECT_EQ(grid.node(1)[2], -0.5);
  EXPECT_TRUE(grid.is_boundary(0));
  EXPECT_FALSE(grid.is_boundary(grid.ravel(std::vector<int>{2, 2, 2})));
  EXPECT_THROW(h1_grid(1), InvalidArgumentError);
}

TEST(Sample, Examples) {
  auto g = heisenberg(1);
  const Grid grid = h1_grid(3);
  const GridField zero = sample({"zero", [](const GroupPoint&) { return 0.0; }}, grid);
  EXPECT_EQ(zero.sup_norm(), 0.0);
  const GridField x = sample({"x", [](const GroupPoint& p) { return p[0]; }}, grid);
  EXPECT_EQ(x.value(grid.ravel(std::vector<int>{0, 0, 0})), -1.0);
  EXPECT_EQ(x.value(grid.ravel(std::vector<int>{2, 2, 2})), 1.0);
  EXPECT_EQ(x.metadata().at("source"), "x");
  const GridField t2 = sample({"t2", [](const GroupPoint& p) { return p[2] * p[2]; }}, h1_grid(7));
  for (std::size_t i = 0; i < t2.grid().size(); ++i) {
    const double t = t2.grid().node(i)[2];
    EXPECT_EQ(t2.value(i), t * t);
  }
}

TEST(Sample, NonFiniteValueNamesTheNode) {
  const Grid grid = h1_grid(3);
  try {
    sample({"bad", [](const GroupPoint& p) { return p[0] > 0.5 ? std::nan("") : 0.0; }}, grid);
    FAIL();
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos);
  }
}

TEST(GridField, SupNormIsRecomputedExactly) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 3.0);
  const Grid grid = h1_grid(6);
  std::vector<double> v(grid.size());
  for (double& x : v) x = N(rng);
  const GridField f(grid, v);
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  EXPECT_EQ(f.sup_norm(), m);
  EXPECT_EQ(f.min_value(), *std::min_element(v.begin(), v.end()));
  EXPECT_EQ(f.max_value(), *std::max_element(v.begin(), v.end()));
  EXPECT_THROW(GridField(grid, std::vector<double>(3)), InvalidArgumentError);
}

TEST(Evaluate, ExactAtNodesAndOnAffineFunctions) {
  const Grid grid = h1_grid(9);
  auto affine = [](const GroupPoint& p) { return 0.3 + 1.7 * p[0] - 0.4 * p[1] + 2.5 * p[2]; };
  const GridField f = sample({"affine", affine}, grid);
  for (std::size_t i = 0; i < grid.size(); i += 7) EXPECT_EQ(f.evaluate(grid.node(i)), f.value(i));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const GroupPoint p = make_point({U(rng), U(rng), U(rng)});
    EXPECT_NEAR(f.evaluate(p), affine(p), 1e-12);
  }
}

TEST(Evaluate, CellCentreErrorOfTSquaredIsQuadratic) {
  // For t^2 the multilinear error at a cell centre is exactly h_t^2 / 4.
  for (int res : {5, 9, 17}) {
    const Grid grid = h1_grid(res);
    const GridField f = sample({"t2", [](const GroupPoint& p) { return p[2] * p[2]; }}, grid);
    const double h = grid.spacing(2);
    const GroupPoint c = make_point({0.5 * h - 1.0, 0.5 * h - 1.0, 0.5 * h});
    EXPECT_NEAR(f.evaluate(c) - c[2] * c[2], h * h / 4.0, 1e-14);
  }
}

TEST(Evaluate, OutsideBoxThrows) {
  const GridField f = sample({"x", [](const GroupPoint& p) { return p[0]; }}, h1_grid(5));
  EXPECT_THROW(f.evaluate(make_point({1.5, 0, 0})), DomainError);
}

TEST(Evaluate, SupportedByChecksEveryWeightedCorner) {
  const Grid grid = h1_grid(5);
  const GridField f = sample({"x", [](const GroupPoint& p) { return p[0]; }}, grid);
  std::vector<std::uint8_t> inside(grid.size(), 0);
  inside[grid.ravel(std::vector<int>{2, 2, 2})] = 1;
  EXPECT_TRUE(f.supported_by(inside, grid.node(grid.ravel(std::vector<int>{2, 2, 2}))));
  EXPECT_FALSE(f.supported_by(inside, make_point({0.1, 0.0, 0.0})));
  inside[grid.ravel(std::vector<int>{3, 2, 2})] = 1;
  EXPECT_TRUE(f.supported_by(inside, make_point({0.1, 0.0, 0.0})));
  EXPECT_FALSE(f.supported_by(inside, make_point({0.1, 0.1, 0.0})));
}

double brute_force_distance(const Grid& grid, std::size_t xi) {
  const CarnotGroup& g = grid.group();
  const GroupPoint xinv = g.inverse(grid.node(xi));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t yi = 0; yi < grid.size(); ++yi) {
    if (!grid.is_boundary(yi)) continue;
    best = std::min(best, g.distance(xinv, g.inverse(grid.node(yi))));
  }
  return best;
}

TEST(InnerDomain, MatchesBruteForceOverBoundarySamples) {
  for (int res : {7, 9}) {
    const Grid grid = h1_grid(res);
    for (double eps : {0.0, 0.25, 0.5, 0.8}) {
      const InnerDomainMask mask = inner_domain(grid, eps);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool expect = !grid.is_boundary(i) && brute_force_distance(grid, i) >= eps;
        EXPECT_EQ(mask[i], expect) << "res " << res << " eps " << eps << " node " << i;
      }
    }
  }
}

TEST(InnerDomain, EngelMatchesBruteForce) {
  const Grid grid(symmetric_box(engel(), 1.0), 5);
  const InnerDomainMask mask = inner_domain(grid, 0.6);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(mask[i], !grid.is_boundary(i) && brute_force_distance(grid, i) >= 0.6);
  }
}

TEST(InnerDomain, EdgeCases) {
  const Grid grid = h1_grid(9);
  const InnerDomainMask all = inner_domain(grid, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(all[i], !grid.is_boundary(i));
  EXPECT_TRUE(inner_domain(grid, 5.0).empty());
  EXPECT_THROW(inner_domain(grid, -0.1), InvalidArgumentError);
}

TEST(InnerDomain, ShrinksMonotonically) {
  const Grid grid = h1_grid(11);
  const BoundaryDistance dist(grid);
  double prev = 0.0;
  for (double eps = 0.05; eps < 1.2; eps += 0.05) {
    EXPECT_TRUE(dist.mask(eps).subset_of(dist.mask(prev)));
    prev = eps;
  }
}

TEST(FieldDump, ReloadIsBitExact) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Grid grid(BoxDomain(engel(), make_point({-1, -0.5, -2, -1}).coords, make_point({1, 0.5, 2, 3}).coords),
                  std::vector<int>{5, 4, 3, 6});
  std::vector<double> v(grid.size());
  for (double& x : v) x = U(rng) * 1e-3 + U(rng);
  const GridField f(grid, v, {{"source", "random"}, {"note", "a,b \"quoted\""}});
  const auto dir = std::filesystem::temp_directory_path() / "carnot_test_dump";
  std::filesystem::remove_all(dir);
  write_field_dump(f, dir, "f");
  for (const char* name : {"f.csv", "f.json"}) {
    const GridField back = read_field_dump(dir / name);
    EXPECT_EQ(back.values(), f.values());
    EXPECT_TRUE(back.grid() == f.grid());
    EXPECT_EQ(back.metadata(), f.metadata());
    EXPECT_EQ(back.group().name(), "engel");
  }
  std::filesystem::remove_all(dir);
}

TEST(Evaluable, RestrictionComposes) {
  auto g = heisenberg(1);
  const Evaluable f(g, [](const GroupPoint& p) { return p[0]; }, symmetric_box(g, 1.0));
  const Evaluable r = f.restricted([](const GroupPoint& p) { return p[0] > 0.0; }, "right");
  const Evaluable rr = r.restricted([](const GroupPoint& p) { return p[1] > 0.0; }, "quadrant");
  EXPECT_TRUE(rr.contains(make_point({0.5, 0.5, 0})));
  EXPECT_FALSE(rr.contains(make_point({0.5, -0.5, 0})));
  EXPECT_FALSE(rr.contains(make_point({-0.5, 0.5, 0})));
  EXPECT_FALSE(rr.contains(make_point({1.5, 0.5, 0})));
  EXPECT_THROW(rr(make_point({-0.5, 0.5, 0})), DomainError);
}

}  // namespace
}  // namespace carnot
