#include "doctest.h"

#include <cstdio>
#include <unordered_set>

#include "cascade/mesh.hpp"

using namespace cascade;
using Eigen::Vector2d;

namespace {

CascadeDomain channel() {
  return build_domain(1.0, 1.0, ProfileCurve::empty(), Gamma0Curve::line(0.0, 0.0));
}

CascadeDomain cascade_circle() {
  return build_domain(2.0, 1.0, ProfileCurve::circle({1.0, 0.5}, 0.2), Gamma0Curve::line(0.0, 0.0));
}

}  // namespace

TEST_CASE("channel smoke mesh") {
  const auto mesh = generate_mesh(channel(), 0.5);
  CHECK(mesh.num_triangles() >= 8);
  CHECK(!mesh.periodic_pairs.empty());
  CHECK_NOTHROW(mesh.validate());
  CHECK(mesh.area() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cascade mesh resolves the circular profile") {
  const auto dom = cascade_circle();
  const auto mesh = generate_mesh(dom, 0.1);
  CHECK_NOTHROW(mesh.validate());

  int profile_edges = 0;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != SegTag::PROFILE) continue;
    ++profile_edges;
    for (int v : {e.a, e.b}) {
      const Vector2d x = mesh.vertices.row(v);
      CHECK(std::abs((x - Vector2d(1.0, 0.5)).norm() - 0.2) < 1e-10);
    }
  }
  CHECK(profile_edges >= 16);
  CHECK(mesh.area() == doctest::Approx(2.0 - M_PI * 0.04).epsilon(2e-3));
}

TEST_CASE("unresolved profile fails") {
  CHECK_THROWS_AS(generate_mesh(cascade_circle(), 10.0), MeshFailure);
}

TEST_CASE("refinement quadruples triangles and halves h") {
  auto mesh = generate_mesh(cascade_circle(), 0.15);
  const int n0 = mesh.num_triangles();
  const double h0 = mesh.h_max;
  const auto fine = refine(mesh);
  CHECK(fine.num_triangles() == 4 * n0);
  CHECK(fine.h_max <= 0.55 * h0);
  CHECK(fine.h_max >= 0.4 * h0);
  CHECK_NOTHROW(fine.validate());

  // projected profile midpoints lie on the circle
  for (const auto& e : fine.boundary_edges) {
    if (e.tag != SegTag::PROFILE) continue;
    for (int v : {e.a, e.b}) {
      const Vector2d x = fine.vertices.row(v);
      CHECK(std::abs((x - Vector2d(1.0, 0.5)).norm() - 0.2) < 1e-10);
    }
  }

  // repeated refinement keeps every invariant
  const auto finer = refine(fine);
  CHECK_NOTHROW(finer.validate());
  CHECK(finer.h_max / mesh.h_max == doctest::Approx(0.25).epsilon(0.2));
}

TEST_CASE("periodic pairs stay exact translates under refinement") {
  auto mesh = refine(generate_mesh(channel(), 0.3));
  for (const auto& [i, j] : mesh.periodic_pairs) {
    CHECK(mesh.vertices(j, 0) == mesh.vertices(i, 0));
    CHECK(mesh.vertices(j, 1) == mesh.vertices(i, 1) + 1.0);
  }
}

TEST_CASE("mesh file round trip is bit exact") {
  const auto mesh = generate_mesh(cascade_circle(), 0.2);
  const std::string path = "roundtrip.mesh";
  save_mesh(mesh, path);
  const auto loaded = load_mesh(path);
  REQUIRE(loaded.num_vertices() == mesh.num_vertices());
  REQUIRE(loaded.num_triangles() == mesh.num_triangles());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    CHECK(loaded.vertices(i, 0) == mesh.vertices(i, 0));
    CHECK(loaded.vertices(i, 1) == mesh.vertices(i, 1));
  }
  CHECK(loaded.triangles == mesh.triangles);
  REQUIRE(loaded.boundary_edges.size() == mesh.boundary_edges.size());
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    CHECK(loaded.boundary_edges[k].a == mesh.boundary_edges[k].a);
    CHECK(loaded.boundary_edges[k].tag == mesh.boundary_edges[k].tag);
  }
  CHECK(loaded.periodic_pairs == mesh.periodic_pairs);
  std::remove(path.c_str());
}

TEST_CASE("shift window: identity at delta=0") {
  const auto mesh = generate_mesh(channel(), 0.25, 0.5);
  const auto same = shift_window(mesh, channel(), 0.0);
  CHECK(same.num_vertices() == mesh.num_vertices());
  CHECK(same.triangles == mesh.triangles);
}

TEST_CASE("shift window: half-period shift of the channel") {
  const auto dom = channel();
  const auto mesh = generate_mesh(dom, 0.25, 0.5);
  const auto shifted = shift_window(mesh, dom, 0.5);
  CHECK(shifted.num_triangles() == mesh.num_triangles());
  CHECK(shifted.num_vertices() == mesh.num_vertices());
  CHECK_NOTHROW(shifted.validate());

  // the shifted mesh covers [0,1] x [0.5, 1.5]
  CHECK(shifted.vertices.col(1).minCoeff() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(shifted.vertices.col(1).maxCoeff() == doctest::Approx(1.5).epsilon(1e-12));

  // vertex multiset: original vertices with the lower strip translated by +tau
  std::unordered_set<std::uint64_t> want, got;
  auto key = [](const Vector2d& v) {
    const float x = float(v.x()), y = float(v.y());
    std::uint64_t k = 0;
    std::uint32_t xi, yi;
    std::memcpy(&xi, &x, 4);
    std::memcpy(&yi, &y, 4);
    k = (std::uint64_t(xi) << 32) | yi;
    return k;
  };
  // vertices strictly above the cut stay; those at or below reappear
  // translated; the cut row itself lives on both sides of the new period
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vector2d x = mesh.vertices.row(v);
    if (x.y() > 0.5 - 1e-12) want.insert(key(x));
    if (x.y() < 0.5 + 1e-12) want.insert(key(Vector2d(x.x(), x.y() + 1.0)));
  }
  for (int v = 0; v < shifted.num_vertices(); ++v)
    got.insert(key(shifted.vertices.row(v)));
  CHECK(want == got);
}

TEST_CASE("shift window requires the cut polyline and a clear profile") {
  const auto dom = channel();
  const auto plain = generate_mesh(dom, 0.25);
  CHECK_THROWS_AS(shift_window(plain, dom, 0.5), NoCutLine);

  const auto cdom = cascade_circle();
  // circle occupies x2 in [0.3, 0.7]; a cut at 0.5 intersects it
  CHECK_THROWS_AS(generate_mesh(cdom, 0.1, 0.5), MeshFailure);
  const auto cmesh = generate_mesh(cdom, 0.1, 0.15);
  const auto cshift = shift_window(cmesh, cdom, 0.15);
  CHECK(cshift.num_triangles() == cmesh.num_triangles());
  CHECK_NOTHROW(cshift.validate());
  // profile above the cut is required
  CHECK_THROWS_AS(shift_window(cmesh, cdom, 0.4), NoCutLine);
}

TEST_CASE("refinement preserves the cut polyline for later shifts") {
  const auto dom = channel();
  const auto mesh = refine(generate_mesh(dom, 0.3, 0.5));
  const auto shifted = shift_window(mesh, dom, 0.5);
  CHECK(shifted.num_triangles() == mesh.num_triangles());
}

TEST_CASE("sine-shaped periodic boundary meshes cleanly") {
  const auto dom = build_domain(2.0, 1.0, ProfileCurve::empty(),
                                Gamma0Curve::sine(0.0, 0.2, 0.07, 2));
  const auto mesh = generate_mesh(dom, 0.2);
  CHECK_NOTHROW(mesh.validate());
  const auto fine = refine(mesh);
  CHECK_NOTHROW(fine.validate());
}
