#include "fmqm/error.hpp"
#include "fmqm/patching.hpp"
#include "fmqm/primitives.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <map>
#include <queue>
#include <random>
#include <set>

using namespace fmqm;

namespace {

TexturedMesh single_face(const Vec3& a, const Vec3& b, const Vec3& c) {
  TexturedMesh m;
  m.vertices = {a, b, c};
  m.uvs = {{0, 0}};
  m.faces = {{{0, 1, 2}, {0, 0, 0}}};
  m.texture = TextureImage(1, 1);
  return m;
}

LocalPatch whole_patch(const TexturedMesh& m, const MeshStats& s) {
  LocalPatch p;
  for (std::size_t f = 0; f < m.faces.size(); ++f) p.faces.push_back(f);
  p.area = s.total_area;
  return p;
}

// Faces whose vertices include one within `ring` hops of the center.
std::set<std::size_t> bfs_faces(const TexturedMesh& m, std::size_t center, int ring) {
  std::vector<std::set<std::size_t>> adj(m.vertices.size());
  for (const auto& f : m.faces)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b) adj[f.v[a]].insert(f.v[b]);
  std::vector<int> hop(m.vertices.size(), -1);
  std::queue<std::size_t> q;
  hop[center] = 0;
  q.push(center);
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (std::size_t w : adj[v])
      if (hop[w] < 0) {
        hop[w] = hop[v] + 1;
        q.push(w);
      }
  }
  std::set<std::size_t> out;
  for (std::size_t f = 0; f < m.faces.size(); ++f)
    for (int k = 0; k < 3; ++k)
      if (hop[m.faces[f].v[k]] >= 0 && hop[m.faces[f].v[k]] <= ring) out.insert(f);
  return out;
}

FieldSample at(const Vec3& pos, const Vec3& foot) {
  FieldSample s;
  s.position = pos;
  s.ref_hit.point = foot;
  return s;
}

}  // namespace

TEST_CASE("farthest point sampling") {
  const std::vector<Vec3> square = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  CHECK(farthest_point_sample(square, 2) == std::vector<std::size_t>{0, 2});
  const auto all = farthest_point_sample(square, 4);
  CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 4);
  CHECK(all == farthest_point_sample(square, 4));
  CHECK_THROWS_AS(farthest_point_sample(square, 5), InvalidArgument);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Vec3> pts(1000);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  const auto chosen = farthest_point_sample(pts, 50);
  CHECK(chosen == oracle::fps(pts, 50));
  auto min_pair = [&](const std::vector<std::size_t>& ids) {
    double d = 1e300;
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) d = std::min(d, (pts[ids[i]] - pts[ids[j]]).norm());
    return d;
  };
  CHECK(min_pair(chosen) >= min_pair(random_sample(pts.size(), 50, 3)));
}

TEST_CASE("patch growth matches a breadth-first ring oracle") {
  const TexturedMesh m = primitives::icosphere(3, primitives::constant_texture(2, {}));
  const MeshTopology topo(m);
  const MeshStats s = compute_stats(m);
  const std::size_t n_patch = m.faces.size() / 20;
  for (std::size_t center : {0u, 17u, 100u, 641u}) {
    const LocalPatch p = build_local_patch(m, topo, s, center, n_patch, 0.05);
    CHECK(p.faces.size() >= 20);
    CHECK(p.expansions >= 1);
    // oracle: smallest ring whose faces reach the area share
    int ring = 0;
    std::set<std::size_t> faces;
    for (;; ++ring) {
      faces = bfs_faces(m, center, ring);
      double area = 0;
      for (std::size_t f : faces) area += s.face_areas[f];
      if (area >= s.total_area / n_patch) break;
    }
    CHECK(p.expansions == ring);
    CHECK(std::set<std::size_t>(p.faces.begin(), p.faces.end()) == faces);
    CHECK(p.sigma == doctest::Approx(0.05 * p.diagonal));
  }
}

TEST_CASE("patch growth with n_patch = 1 covers the component; boundaries stop it") {
  const TexturedMesh m = primitives::torus(12, 8, primitives::constant_texture(2, {}));
  const MeshTopology topo(m);
  const MeshStats s = compute_stats(m);
  const LocalPatch p = build_local_patch(m, topo, s, 3, 1, 0.05);
  CHECK(p.faces.size() == m.faces.size());

  const TexturedMesh plane = primitives::plane(6, primitives::constant_texture(2, {}));
  const MeshTopology ptopo(plane);
  const LocalPatch corner = build_local_patch(plane, ptopo, compute_stats(plane), 0, 1, 0.05);
  CHECK(corner.faces.size() == plane.faces.size());

  // a lone triangle next to a big plane can never reach the area share
  TexturedMesh island = plane;
  const int base = static_cast<int>(island.vertices.size());
  island.vertices.insert(island.vertices.end(), {{3, 0, 0}, {3.1, 0, 0}, {3, 0.1, 0}});
  island.faces.push_back({{base, base + 1, base + 2}, {0, 0, 0}});
  const MeshTopology itopo(island);
  const LocalPatch small = build_local_patch(island, itopo, compute_stats(island), base, 2, 0.05);
  CHECK(small.exhausted);
  CHECK(small.faces == std::vector<std::size_t>{island.faces.size() - 1});

  TexturedMesh lonely = plane;
  lonely.vertices.emplace_back(5, 5, 5);
  const MeshTopology ltopo(lonely);
  CHECK_THROWS_AS(build_local_patch(lonely, ltopo, compute_stats(lonely), lonely.vertices.size() - 1, 4, 0.05),
                  InvalidArgument);
}

TEST_CASE("largest remainder sample plans") {
  TexturedMesh m;
  m.texture = TextureImage(1, 1);
  m.uvs = {{0, 0}};
  // three unit-area faces, then areas 1 and 3
  m.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 1}, {0, 1, 1}, {0, 0, 2}, {2, 0, 2}, {0, 1, 2}};
  m.faces = {{{0, 1, 2}, {0, 0, 0}}, {{3, 4, 5}, {0, 0, 0}}, {{6, 7, 8}, {0, 0, 0}}};
  MeshStats s = compute_stats(m);
  SamplePlan plan = plan_samples(whole_patch(m, s), s, 4);
  CHECK(plan.counts == std::vector<std::size_t>{2, 1, 1});
  CHECK(plan.total == 4);

  TexturedMesh two = m;
  two.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1}, {6, 0, 1}, {0, 1, 1}};
  two.faces = {{{0, 1, 2}, {0, 0, 0}}, {{3, 4, 5}, {0, 0, 0}}};
  s = compute_stats(two);
  plan = plan_samples(whole_patch(two, s), s, 4);
  CHECK(plan.counts == std::vector<std::size_t>{1, 3});

  const TexturedMesh sphere = primitives::icosphere(2, primitives::constant_texture(2, {}));
  s = compute_stats(sphere);
  plan = plan_samples(whole_patch(sphere, s), s, 12345);
  CHECK(plan.total == 12345);
  std::size_t sum = 0;
  for (auto c : plan.counts) sum += c;
  CHECK(sum == 12345);
}

TEST_CASE("sample generation statistics") {
  const TexturedMesh m = single_face({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  const MeshStats s = compute_stats(m);
  LocalPatch p = whole_patch(m, s);
  SamplePlan plan;
  plan.counts = {100000};
  plan.total = 100000;

  SUBCASE("zero offset stays on the plane and is uniform over the triangle") {
    const auto pts = generate_samples(m, p, plan, 0.0, 42);
    REQUIRE(pts.size() == 100000);
    // 10 x 10 grid over the unit square; the triangle covers 45 whole cells and 10 half cells
    std::vector<double> count(100, 0.0);
    for (const auto& q : pts) {
      CHECK(std::abs(q.z()) < 1e-12);
      const int i = std::min(9, static_cast<int>(q.x() * 10));
      const int j = std::min(9, static_cast<int>(q.y() * 10));
      count[j * 10 + i] += 1;
    }
    double chi2 = 0;
    int bins = 0;
    for (int j = 0; j < 10; ++j)
      for (int i = 0; i < 10; ++i) {
        const double share = i + j < 9 ? 1.0 : (i + j == 9 ? 0.5 : 0.0);
        if (share == 0.0) {
          CHECK(count[j * 10 + i] == 0);
          continue;
        }
        const double expected = 100000 * share * 0.01 / 0.5;
        chi2 += (count[j * 10 + i] - expected) * (count[j * 10 + i] - expected) / expected;
        ++bins;
      }
    // 54 degrees of freedom, critical value at alpha = 0.001
    CHECK(bins == 55);
    CHECK(chi2 < 91.87);
  }
  SUBCASE("normal offsets have the requested moments") {
    const double sigma = 0.3;
    const auto pts = generate_samples(m, p, plan, sigma, 43);
    double mean = 0, sq = 0;
    for (const auto& q : pts) mean += q.z();
    mean /= pts.size();
    for (const auto& q : pts) sq += (q.z() - mean) * (q.z() - mean);
    const double sd = std::sqrt(sq / (pts.size() - 1));
    CHECK(std::abs(mean) < 3 * sigma / std::sqrt(100000.0));
    CHECK(std::abs(sd - sigma) < 0.02 * sigma);
  }
  SUBCASE("same seed, same samples") {
    CHECK(generate_samples(m, p, plan, 0.1, 5) == generate_samples(m, p, plan, 0.1, 5));
  }
}

TEST_CASE("color center selection") {
  CHECK(select_color_centers(5, 10, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(select_color_centers(1000, 100, 9) == select_color_centers(1000, 100, 9));
  const auto sub = select_color_centers(1000, 100, 9);
  CHECK(std::is_sorted(sub.begin(), sub.end()));
  CHECK(std::set<std::size_t>(sub.begin(), sub.end()).size() == 100);
  std::map<std::size_t, int> freq;
  for (std::uint64_t k = 0; k < 10000; ++k) ++freq[select_color_centers(4, 1, derive_seed(77, k))[0]];
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(freq[i] / 10000.0 - 0.25) <= 0.02);
}

TEST_CASE("normal and tangent units against a hand-computed cosine table") {
  // center at the origin, nearest surface point straight below on -z
  std::vector<FieldSample> s;
  s.push_back(at({0, 0, 0}, {0, 0, -1}));
  s.push_back(at({0, 0, 0.5}, {0, 0, -0.5}));      // cos 1
  s.push_back(at({0.1, 0, 0.9}, {0, 0, 0}));       // cos 0.99388
  s.push_back(at({0.35, 0, 1}, {0, 0, 0}));        // cos 0.94388
  s.push_back(at({1, 0, 0}, {0, 0, 0}));           // cos 0
  s.push_back(at({1, 0, 0.04}, {0, 0, 0}));        // cos 0.03997
  s.push_back(at({1, 0, 0.06}, {0, 0, 0}));        // cos 0.05989
  s.push_back(at({0, 0, -5}, {0, 0, 0}));          // cos 1 but outside the radius
  CHECK(gather_normal_unit(s, 0, 0.95, 2.0) == std::vector<std::size_t>{1, 2});
  CHECK(gather_tangent_unit(s, 0, 0.05, 2.0) == std::vector<std::size_t>{4, 5});
  CHECK(gather_normal_unit(s, 0, 0.5, 10.0) == std::vector<std::size_t>{1, 2, 3, 7});
}

TEST_CASE("seed derivation separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 100; ++a)
    for (std::uint64_t b = 0; b < 3; ++b) seen.insert(derive_seed(1, a, b));
  CHECK(seen.size() == 300);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}
