#include "vmsns/errors.hpp"
#include "vmsns/mesh.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace vmsns;

namespace {

// Facet -> number of cells containing it.
std::map<std::vector<int>, int> facet_counts(const Mesh& m) {
  std::map<std::vector<int>, int> out;
  const int n = m.dim() + 1;
  for (const auto& c : m.cells())
    for (int skip = 0; skip < n; ++skip) {
      std::vector<int> f;
      for (int i = 0; i < n; ++i)
        if (i != skip) f.push_back(c[i]);
      std::sort(f.begin(), f.end());
      ++out[f];
    }
  return out;
}

void expect_conforming(const Mesh& m) {
  int boundary = 0;
  for (const auto& [f, count] : facet_counts(m)) {
    EXPECT_LE(count, 2);
    if (count == 1) ++boundary;
  }
  EXPECT_EQ(boundary, static_cast<int>(m.boundary_facets().size()));
}

}  // namespace

TEST(Mesh, MinimalSquare) {
  const Mesh m = Mesh::structured(2, 1);
  EXPECT_EQ(m.n_cells(), 2);
  EXPECT_EQ(m.n_vertices(), 4);
}

TEST(Mesh, MinimalCubeIsKuhn) {
  const Mesh m = Mesh::structured(3, 1);
  EXPECT_EQ(m.n_cells(), 6);
  EXPECT_EQ(m.n_vertices(), 8);
  EXPECT_NEAR(m.total_volume(), 1.0, 1e-14);
}

TEST(Mesh, StructuredCountsAndSize) {
  const Mesh m = Mesh::structured(2, 4);
  EXPECT_EQ(m.n_cells(), 32);
  EXPECT_NEAR(m.h_max(), std::sqrt(2.0) / 4.0, 1e-15);
  EXPECT_NEAR(m.total_volume(), 1.0, 1e-14);
}

TEST(Mesh, PositiveOrientationAndConformity) {
  for (int dim : {2, 3}) {
    const Mesh m = Mesh::structured(dim, 3, Box{{-1.0, 0.0, 2.0}, {1.0, 0.5, 3.0}});
    for (int c = 0; c < m.n_cells(); ++c) EXPECT_GT(m.geometry(c).signed_volume, 0.0);
    expect_conforming(m);
    EXPECT_TRUE(m.validate().empty());
    EXPECT_NEAR(m.total_volume(), 1.0, 1e-13);
  }
}

TEST(Mesh, BoundaryTagsFollowAxisAndSide) {
  const Mesh m = Mesh::structured(2, 2);
  for (const auto& f : m.boundary_facets()) {
    const int axis = (f.tag - 1) / 2;
    const double side = (f.tag - 1) % 2 == 0 ? 0.0 : 1.0;
    for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(m.vertices()[f.vertices[i]][axis], side);
  }
}

TEST(Mesh, RejectsBadInput) {
  EXPECT_THROW(Mesh::structured(2, 0), ConfigError);
  EXPECT_THROW(Mesh::structured(4, 2), ConfigError);
  EXPECT_THROW(Mesh::structured(2, 2, Box{{0, 0, 0}, {1, 0, 1}}), ConfigError);
}

TEST(Mesh, RefineSquare) {
  const Mesh coarse = Mesh::structured(2, 1);
  const Mesh fine = refine_uniform(coarse);
  EXPECT_EQ(fine.n_cells(), 8);
  EXPECT_NEAR(fine.h_max(), coarse.h_max() / 2.0, 1e-15);
  EXPECT_NEAR(fine.total_volume(), coarse.total_volume(), 1e-14);
  expect_conforming(fine);
}

TEST(Mesh, RefineCubeKeepsQuality) {
  Mesh m = Mesh::structured(3, 1);
  const double ratio0 = mesh_quality(m).min_shape_ratio;
  for (int level = 0; level < 2; ++level) {
    const Mesh next = refine_uniform(m);
    EXPECT_EQ(next.n_cells(), 8 * m.n_cells());
    EXPECT_NEAR(next.h_max(), m.h_max() / 2.0, 1e-14);
    EXPECT_NEAR(next.total_volume(), 1.0, 1e-13);
    for (int c = 0; c < next.n_cells(); ++c) EXPECT_GT(next.geometry(c).signed_volume, 0.0);
    expect_conforming(next);
    EXPECT_TRUE(mesh_quality(next).ok());
    m = next;
  }
  EXPECT_GT(mesh_quality(m).min_shape_ratio, 0.5 * ratio0);
}

TEST(Mesh, StructuredQualityIsLevelIndependent) {
  const auto q4 = mesh_quality(Mesh::structured(2, 4));
  const auto q8 = mesh_quality(Mesh::structured(2, 8));
  EXPECT_NEAR(q4.quasi_uniformity, 1.0, 1e-12);
  EXPECT_NEAR(q8.quasi_uniformity, 1.0, 1e-12);
  EXPECT_NEAR(q4.min_shape_ratio, q8.min_shape_ratio, 1e-12);
  EXPECT_TRUE(q4.ok());
}

TEST(Mesh, EquilateralShapeRatio) {
  const Mesh m = Mesh::from_cells(2, {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2.0, 0}}, {{0, 1, 2, 0}});
  EXPECT_NEAR(mesh_quality(m).min_shape_ratio, 1.0 / (2.0 * std::sqrt(3.0)), 1e-14);
}

TEST(Mesh, DegenerateCellIsReported) {
  const Mesh m = Mesh::from_cells(2, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2, 0}});
  EXPECT_FALSE(mesh_quality(m).ok());
}
