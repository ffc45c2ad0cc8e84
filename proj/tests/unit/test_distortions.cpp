#include "fmqm/distortions.hpp"
#include "fmqm/error.hpp"
#include "fmqm/primitives.hpp"

#include <doctest.h>

#include <random>

using namespace fmqm;

TEST_CASE("gaussian vertex noise") {
  const TexturedMesh cube = primitives::cube(1, primitives::constant_texture(2, {}));
  const TexturedMesh same = vertex_gaussian_noise(cube, 0.0, 1);
  CHECK(same.vertices == cube.vertices);
  const TexturedMesh moved = vertex_gaussian_noise(cube, 0.05, 1);
  CHECK(moved.vertices.size() == 8);
  CHECK(moved.faces.size() == 12);
  CHECK(moved.vertices != cube.vertices);

  TexturedMesh cloud;
  cloud.texture = TextureImage(1, 1);
  cloud.uvs = {{0, 0}};
  cloud.vertices.assign(10000, Vec3::Zero());
  cloud.vertices.push_back({1, 1, 1});
  cloud.faces = {{{0, 1, 10000}, {0, 0, 0}}};
  const double target = 0.01 * std::sqrt(3.0);
  const TexturedMesh noisy = vertex_gaussian_noise(cloud, 0.01, 3);
  for (int axis = 0; axis < 3; ++axis) {
    double m = 0, s = 0;
    for (int i = 0; i < 10000; ++i) m += noisy.vertices[i][axis] / 10000;
    for (int i = 0; i < 10000; ++i) s += (noisy.vertices[i][axis] - m) * (noisy.vertices[i][axis] - m) / 9999;
    CHECK(std::abs(std::sqrt(s) - target) < 0.02 * target);
  }
}

TEST_CASE("position quantisation") {
  TexturedMesh seg;
  seg.texture = TextureImage(1, 1);
  seg.uvs = {{0, 0}};
  seg.vertices = {{0, 0, 0}, {0.3, 0.3, 0.3}, {0.7, 0.7, 0.7}, {1, 1, 1}};
  seg.faces = {{{0, 1, 3}, {0, 0, 0}}, {{1, 2, 3}, {0, 0, 0}}};
  const TexturedMesh q = quantize_positions(seg, 2);
  const double expected[4] = {0, 1.0 / 3, 2.0 / 3, 1};
  for (int i = 0; i < 4; ++i) CHECK(q.vertices[i].x() == doctest::Approx(expected[i]).epsilon(1e-15));

  const TexturedMesh sphere = primitives::icosphere(2, primitives::constant_texture(2, {}));
  const double diag = compute_stats(sphere).bbox_diagonal;
  const TexturedMesh fine = quantize_positions(sphere, 24);
  for (std::size_t i = 0; i < sphere.vertices.size(); ++i)
    CHECK((fine.vertices[i] - sphere.vertices[i]).norm() <= diag / (1 << 24));
  for (int bits : {3, 8, 12}) {
    const TexturedMesh once = quantize_positions(sphere, bits);
    CHECK(quantize_positions(once, bits).vertices == once.vertices);
  }
  CHECK_THROWS_AS(quantize_positions(sphere, 0), InvalidArgument);
  CHECK_THROWS_AS(quantize_positions(sphere, 25), InvalidArgument);
}

TEST_CASE("texture downsampling") {
  TextureImage checker(2, 2);
  checker.at(0, 0) = checker.at(1, 1) = {1, 1, 1};
  const TextureImage gray = downsample_texture(checker, 2);
  CHECK(gray.width() == 2);
  for (const Rgb& p : gray.pixels()) CHECK(p.r == doctest::Approx(0.5));
  CHECK(downsample_texture(checker, 1).pixels() == checker.pixels());

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int t = 0; t < 10; ++t) {
    TextureImage tex(64, 48);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x) tex.at(x, y) = {byte(rng) / 255.0, byte(rng) / 255.0, byte(rng) / 255.0};
    for (int f : {2, 4, 8, 16}) {
      const TextureImage d = downsample_texture(tex, f);
      CHECK(d.width() == 64);
      CHECK(d.height() == 48);
      double ma = 0, mb = 0;
      for (const Rgb& p : tex.pixels()) ma += p.g;
      for (const Rgb& p : d.pixels()) mb += p.g;
      CHECK(std::abs(ma - mb) / tex.pixels().size() <= 1.0 / 255);
    }
  }
  CHECK_THROWS_AS(downsample_texture(checker, 0), InvalidArgument);
}
