#include "fmqm/error.hpp"
#include "fmqm/primitives.hpp"
#include "fmqm/spatial_index.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace fmqm;

namespace {

SurfaceHit exhaustive_nearest(const TexturedMesh& m, const Vec3& p) {
  SurfaceHit best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto c = m.corners(f);
    const TrianglePoint tp = closest_point_on_triangle(p, c[0], c[1], c[2]);
    const double d2 = (p - tp.point).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best.face_id = f;
      best.point = tp.point;
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

TexturedMesh unit_cube() { return primitives::cube(1, primitives::constant_texture(2, {0.5, 0.5, 0.5})); }

}  // namespace

TEST_CASE("closest point: interior projection and vertex region") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  const TrianglePoint in = closest_point_on_triangle({0.2, 0.3, 2.0}, a, b, c);
  CHECK((in.point - Vec3(0.2, 0.3, 0)).norm() < 1e-15);
  CHECK(in.barycentric.minCoeff() > 0.0);
  CHECK(in.barycentric.sum() == doctest::Approx(1.0));
  const TrianglePoint v0 = closest_point_on_triangle({-1, -1, 0.5}, a, b, c);
  CHECK(v0.point == a);
  CHECK(v0.barycentric == Vec3(1, 0, 0));
}

TEST_CASE("closest point agrees with grid search and a projection oracle on random pairs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  int grid_fail = 0;
  int proj_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    const Vec3 p = 2.0 * Vec3(u(rng), u(rng), u(rng));
    const TrianglePoint tp = closest_point_on_triangle(p, a, b, c);
    const double d = (p - tp.point).norm();
    const Vec3 recon = tp.barycentric[0] * a + tp.barycentric[1] * b + tp.barycentric[2] * c;
    CHECK((recon - tp.point).norm() < 1e-12);
    const double scale = 1.0;
    // grid points lie on the triangle, so they can only be farther
    const double g = oracle::grid_distance(p, a, b, c);
    if (!(d <= g + 1e-12 && g - d <= 1e-4 * scale)) ++grid_fail;
    if (std::abs((p - oracle::closest_on_triangle(p, a, b, c)).norm() - d) > 1e-12) ++proj_fail;
  }
  CHECK(grid_fail == 0);
  CHECK(proj_fail == 0);
}

TEST_CASE("degenerate triangles fall back to the nearest edge") {
  const TrianglePoint tp = closest_point_on_triangle({0.5, 1, 0}, {0, 0, 0}, {1, 0, 0}, {2, 0, 0});
  CHECK((tp.point - Vec3(0.5, 0, 0)).norm() < 1e-15);
  const TrianglePoint pt = closest_point_on_triangle({1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0});
  CHECK(pt.point == Vec3::Zero());
}

TEST_CASE("index structure") {
  TexturedMesh one;
  one.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  one.uvs = {{0, 0}};
  one.faces = {{{0, 1, 2}, {0, 0, 0}}};
  one.texture = TextureImage(1, 1);
  const TriangleIndex idx(one);
  CHECK(idx.nodes().size() == 1);
  CHECK(idx.leaves().size() == 1);

  const TexturedMesh sphere = primitives::icosphere(5, primitives::constant_texture(2, {}));
  const TriangleIndex big(sphere);
  std::set<std::size_t> seen;
  for (const auto& leaf : big.leaves()) {
    CHECK(leaf.size() <= TriangleIndex::kLeafSize);
    seen.insert(leaf.begin(), leaf.end());
  }
  CHECK(seen.size() == sphere.faces.size());

  TexturedMesh empty;
  CHECK_THROWS_AS(TriangleIndex{empty}, Error);
}

TEST_CASE("nearest matches the exhaustive scan") {
  const auto tex = primitives::constant_texture(2, {});
  for (const TexturedMesh& m : {unit_cube(), primitives::icosphere(2, tex), primitives::torus(16, 12, tex)}) {
    const TriangleIndex idx(m);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 p(u(rng), u(rng), u(rng));
      const SurfaceHit h = idx.nearest(p);
      const SurfaceHit o = exhaustive_nearest(m, p);
      CHECK(h.face_id == o.face_id);
      CHECK(std::abs(h.distance - o.distance) <= 1e-12 * std::max(1.0, o.distance));
    }
  }
}

TEST_CASE("nearest on and inside a sphere") {
  const TexturedMesh m = primitives::icosphere(4, primitives::constant_texture(2, {}));
  const TriangleIndex idx(m);
  const Vec3 on = (m.vertices[0] + m.vertices[m.faces[0].v[1]]) * 0.5;
  const Vec3 face_pt = (m.vertices[m.faces[7].v[0]] + m.vertices[m.faces[7].v[1]] + m.vertices[m.faces[7].v[2]]) / 3;
  const SurfaceHit h = idx.nearest(face_pt);
  CHECK(h.distance < 1e-15);
  CHECK((h.point - face_pt).norm() < 1e-15);
  (void)on;
  const SurfaceHit c = idx.nearest(Vec3::Zero());
  CHECK(c.distance == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("ray crossings on a cube") {
  const TexturedMesh m = unit_cube();
  const TriangleIndex idx(m);
  // directions chosen off the diagonals so no edge is grazed
  const RayCount through = idx.count_crossings({-1, 0.31, 0.43}, Vec3(1, 0.1, 0.05).normalized());
  CHECK(through.count == 2);
  CHECK(through.reliable);
  const RayCount out = idx.count_crossings({0.5, 0.5, 0.5}, {1, 0, 0});
  CHECK(out.count == 1);
  CHECK_THROWS_AS(idx.count_crossings({0, 0, 0}, Vec3::Zero()), Error);
}

TEST_CASE("ray parity agrees with analytic sphere containment") {
  const TexturedMesh m = primitives::icosphere(3, primitives::constant_texture(2, {}));
  const TriangleIndex idx(m);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::normal_distribution<double> n01;
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    // stay clear of the tessellation band between the inscribed and circumscribed spheres
    if (std::abs(p.norm() - 1.0) < 0.05) continue;
    const Vec3 dir(n01(rng), n01(rng), n01(rng));
    const RayCount rc = idx.count_crossings(p, dir);
    if (!rc.reliable) continue;
    CHECK((rc.count % 2 == 1) == (p.norm() < 1.0));
    ++checked;
  }
  CHECK(checked > 400);
}

TEST_CASE("grazing a shared edge triggers a jittered retry") {
  const TexturedMesh m = unit_cube();
  const TriangleIndex idx(m);
  // the ray runs exactly through the diagonal shared by two triangles of the x = 1 side
  const Vec3 origin(0.5, 0.25, 0.25);
  const RayCount rc = idx.count_crossings(origin, Vec3(0.5, 0.25, 0.25));
  CHECK(rc.retries >= 1);
  CHECK(rc.count == 1);
}
