#include "fmqm/error.hpp"
#include "fmqm/mesh_io.hpp"
#include "fmqm/primitives.hpp"
#include "support/test_util.hpp"

#include <doctest.h>

#include <random>

using namespace fmqm;
using testutil::TempDir;
using testutil::write_file;

namespace {

void write_texture(const std::filesystem::path& p, int w = 2, int h = 2) {
  TextureImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = {(x + y) % 2 ? 1.0 : 0.0, x / double(w), y / double(h)};
  save_png(img, p);
}

void write_mtl(const TempDir& dir, const std::string& name = "m.mtl") {
  write_file(dir / name, "newmtl a\nmap_Kd tex.png\n");
  write_texture(dir / "tex.png");
}

const char* kCube =
    "mtllib m.mtl\nusemtl a\n"
    "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n"
    "vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\n"
    "f 1/1 3/3 2/2\nf 1/1 4/4 3/3\nf 5/1 6/2 7/3\nf 5/1 7/3 8/4\n"
    "f 1/1 2/2 6/3\nf 1/1 6/3 5/4\nf 2/1 3/2 7/3\nf 2/1 7/3 6/4\n"
    "f 3/1 4/2 8/3\nf 3/1 8/3 7/4\nf 4/1 1/2 5/3\nf 4/1 5/3 8/4\n";

}  // namespace

TEST_CASE("single triangle OBJ loads with its texture") {
  TempDir dir("io1");
  write_mtl(dir);
  write_file(dir / "t.obj", "mtllib m.mtl\nusemtl a\nv 0 0 0\nv 2 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n");
  const TexturedMesh m = load_mesh(dir / "t.obj");
  CHECK(m.faces.size() == 1);
  CHECK(m.texture.width() == 2);
  CHECK(compute_stats(m).total_area == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("unit cube area and diagonal") {
  TempDir dir("io2");
  write_mtl(dir);
  write_file(dir / "c.obj", kCube);
  const MeshStats s = compute_stats(load_mesh(dir / "c.obj"));
  CHECK(std::abs(s.total_area - 6.0) < 1e-12);
  CHECK(std::abs(s.bbox_diagonal - std::sqrt(3.0)) < 1e-15);
  CHECK(s.degenerate_faces.empty());
}

TEST_CASE("triangle area of a unit right triangle") {
  CHECK(triangle_area({0, 0, 0}, {1, 0, 0}, {0, 1, 0}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("total area matches an independent re-summation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  TexturedMesh m;
  m.texture = TextureImage(1, 1);
  m.uvs.emplace_back(0, 0);
  double expected = 0.0;
  for (int f = 0; f < 100; ++f) {
    Vec3 p[3];
    for (auto& q : p) {
      q = {u(rng), u(rng), u(rng)};
      m.vertices.push_back(q);
    }
    const int b = 3 * f;
    m.faces.push_back({{b, b + 1, b + 2}, {0, 0, 0}});
    // Heron's formula
    const double a = (p[1] - p[0]).norm(), c = (p[2] - p[1]).norm(), d = (p[0] - p[2]).norm();
    const double s = (a + c + d) / 2;
    expected += std::sqrt(std::max(0.0, s * (s - a) * (s - c) * (s - d)));
  }
  CHECK(std::abs(compute_stats(m).total_area - expected) < 1e-12 * std::max(1.0, expected) * 100);
}

TEST_CASE("quads and polygons are fan triangulated; negative indices resolve") {
  TempDir dir("io3");
  write_mtl(dir);
  write_file(dir / "q.obj",
             "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\n"
             "f -4/-4 -3/-3 -2/-2 -1/-1\n");
  const TexturedMesh m = load_mesh(dir / "q.obj");
  REQUIRE(m.faces.size() == 2);
  CHECK(m.faces[1].v == std::array<int, 3>{0, 2, 3});
  CHECK(compute_stats(m).total_area == doctest::Approx(1.0));
}

TEST_CASE("malformed input is rejected with the offending line") {
  TempDir dir("io4");
  write_mtl(dir);
  SUBCASE("face index out of range names the face") {
    write_file(dir / "x.obj", "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 9/1\n");
    try {
      load_mesh(dir / "x.obj");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 6);
      CHECK(std::string(e.what()).find("face 0") != std::string::npos);
    }
  }
  SUBCASE("bad number") {
    write_file(dir / "x.obj", "mtllib m.mtl\nv 0 zero 0\n");
    CHECK_THROWS_AS(load_mesh(dir / "x.obj"), ParseError);
  }
  SUBCASE("face without uv") {
    write_file(dir / "x.obj", "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    CHECK_THROWS_AS(load_mesh(dir / "x.obj"), ParseError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_mesh(dir / "none.obj"), IoError); }
  SUBCASE("missing texture") {
    write_file(dir / "n.mtl", "newmtl a\nmap_Kd absent.png\n");
    write_file(dir / "x.obj", "mtllib n.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1\n");
    CHECK_THROWS_AS(load_mesh(dir / "x.obj"), IoError);
  }
}

TEST_CASE("save then load reproduces geometry, uvs and 8-bit texture exactly") {
  TempDir dir("io5");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 5; ++trial) {
    TexturedMesh m = primitives::torus(6 + trial, 5, primitives::multiscale_checker(16));
    for (auto& v : m.vertices) v += Vec3(u(rng), u(rng), u(rng)) * 1e-3;
    const auto path = dir / ("rt" + std::to_string(trial) + ".obj");
    save_mesh(m, path);
    const TexturedMesh back = load_mesh(path);
    REQUIRE(back.vertices.size() == m.vertices.size());
    REQUIRE(back.faces.size() == m.faces.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK(back.vertices[i] == m.vertices[i]);
    for (std::size_t i = 0; i < m.uvs.size(); ++i) CHECK(back.uvs[i] == m.uvs[i]);
    for (std::size_t i = 0; i < m.faces.size(); ++i) {
      CHECK(back.faces[i].v == m.faces[i].v);
      CHECK(back.faces[i].vt == m.faces[i].vt);
    }
    CHECK(back.texture.pixels() == m.texture.pixels());
  }
}

TEST_CASE("image signature detection rejects unknown formats") {
  TempDir dir("io6");
  write_file(dir / "bogus.png", "not an image");
  CHECK_THROWS_AS(load_image(dir / "bogus.png"), Error);
}
