#include "fmqm/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace fmqm::primitives {

namespace {

constexpr double kPi = std::numbers::pi;

double to_byte_grid(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

int add_uv(TexturedMesh& m, double u, double v) {
  m.uvs.emplace_back(u, v);
  return static_cast<int>(m.uvs.size()) - 1;
}

void add_face(TexturedMesh& m, std::array<int, 3> v, std::array<int, 3> vt) { m.faces.push_back({v, vt}); }

}  // namespace

TextureImage multiscale_checker(int size) {
  TextureImage tex(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double r = 0.5;
      double g = 0.5;
      double b = 0.5;
      for (int s = 0; s <= 6; ++s) {
        const int bs = 1 << s;
        const int cx = x / bs;
        const int cy = y / bs;
        const double checker = ((cx + cy) % 2 == 0) ? 1.0 : -1.0;
        const double stripe_x = (cx % 2 == 0) ? 1.0 : -1.0;
        const double stripe_y = (cy % 2 == 0) ? 1.0 : -1.0;
        r += 0.07 * checker;
        g += 0.07 * (s % 2 == 0 ? stripe_x : checker);
        b += 0.07 * (s % 2 == 0 ? checker : stripe_y);
      }
      tex.at(x, y) = {to_byte_grid(r), to_byte_grid(g), to_byte_grid(b)};
    }
  }
  return tex;
}

TextureImage constant_texture(int size, Rgb color) { return TextureImage(size, size, color); }

TexturedMesh plane(int n, const TextureImage& texture) {
  TexturedMesh m;
  m.texture = texture;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double y = static_cast<double>(j) / n;
      m.vertices.emplace_back(x, y, 0.0);
      m.uvs.emplace_back(x, y);
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      add_face(m, {a, b, c}, {a, b, c});
      add_face(m, {a, c, d}, {a, c, d});
    }
  }
  return m;
}

TexturedMesh cube(int n, const TextureImage& texture) {
  TexturedMesh m;
  m.texture = texture;
  struct Side {
    Vec3 origin, a, b;
  };
  const Side sides[6] = {
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}},
      {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}, {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}},
      {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}, {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}},
  };
  std::map<std::tuple<long, long, long>, int> welded;
  auto vertex = [&](const Vec3& p) {
    const auto key = std::make_tuple(std::lround(p.x() * n), std::lround(p.y() * n), std::lround(p.z() * n));
    auto [it, inserted] = welded.emplace(key, static_cast<int>(m.vertices.size()));
    if (inserted) m.vertices.push_back(p);
    return it->second;
  };
  for (int s = 0; s < 6; ++s) {
    const double tu = s % 3;
    const double tv = s / 3;
    std::vector<int> vid((n + 1) * (n + 1));
    std::vector<int> tid((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        const double fu = static_cast<double>(i) / n;
        const double fv = static_cast<double>(j) / n;
        vid[j * (n + 1) + i] = vertex(sides[s].origin + fu * sides[s].a + fv * sides[s].b);
        // small inset keeps each side's tile away from its neighbours
        tid[j * (n + 1) + i] = add_uv(m, (tu + 0.02 + 0.96 * fu) / 3.0, (tv + 0.02 + 0.96 * fv) / 2.0);
      }
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const int a = j * (n + 1) + i, b = a + 1, c = a + n + 2, d = a + n + 1;
        add_face(m, {vid[a], vid[b], vid[c]}, {tid[a], tid[b], tid[c]});
        add_face(m, {vid[a], vid[c], vid[d]}, {tid[a], tid[c], tid[d]});
      }
    }
  }
  return m;
}

TexturedMesh icosphere(int level, const TextureImage& texture) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                             {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TexturedMesh m;
  m.texture = texture;
  m.vertices = verts;
  for (const auto& f : faces) {
    std::array<double, 3> u{};
    std::array<double, 3> v{};
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = verts[f[k]];
      u[k] = std::atan2(p.z(), p.x()) / (2.0 * kPi) + 0.5;
      v[k] = std::asin(std::clamp(p.y(), -1.0, 1.0)) / kPi + 0.5;
    }
    // faces straddling the seam get their small u values shifted by one period
    const double umax = std::max({u[0], u[1], u[2]});
    for (int k = 0; k < 3; ++k) {
      if (umax - u[k] > 0.5) u[k] += 1.0;
    }
    add_face(m, f, {add_uv(m, u[0], v[0]), add_uv(m, u[1], v[1]), add_uv(m, u[2], v[2])});
  }
  return m;
}

TexturedMesh torus(int n_major, int n_minor, const TextureImage& texture) {
  constexpr double R = 1.0;
  constexpr double r = 0.35;
  TexturedMesh m;
  m.texture = texture;
  for (int i = 0; i < n_major; ++i) {
    const double theta = 2.0 * kPi * i / n_major;
    for (int j = 0; j < n_minor; ++j) {
      const double phi = 2.0 * kPi * j / n_minor;
      m.vertices.emplace_back((R + r * std::cos(phi)) * std::cos(theta), r * std::sin(phi),
                              (R + r * std::cos(phi)) * std::sin(theta));
    }
  }
  for (int i = 0; i <= n_major; ++i) {
    for (int j = 0; j <= n_minor; ++j) m.uvs.emplace_back(static_cast<double>(i) / n_major, static_cast<double>(j) / n_minor);
  }
  auto vid = [&](int i, int j) { return (i % n_major) * n_minor + (j % n_minor); };
  auto tid = [&](int i, int j) { return i * (n_minor + 1) + j; };
  for (int i = 0; i < n_major; ++i) {
    for (int j = 0; j < n_minor; ++j) {
      add_face(m, {vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)}, {tid(i, j), tid(i, j + 1), tid(i + 1, j + 1)});
      add_face(m, {vid(i, j), vid(i + 1, j + 1), vid(i + 1, j)}, {tid(i, j), tid(i + 1, j + 1), tid(i + 1, j)});
    }
  }
  return m;
}

TexturedMesh checker_vase(int n_around, int n_along, const TextureImage& texture) {
  TexturedMesh m;
  m.texture = texture;
  auto radius = [](double y) { return (0.3 + 0.1 * std::sin(3.0 * kPi * y)) * std::sqrt(std::sin(kPi * y)); };
  m.vertices.emplace_back(0.0, 0.0, 0.0);
  for (int k = 1; k < n_along; ++k) {
    const double y = static_cast<double>(k) / n_along;
    const double rr = radius(y);
    for (int i = 0; i < n_around; ++i) {
      const double theta = 2.0 * kPi * i / n_around;
      m.vertices.emplace_back(rr * std::cos(theta), y, rr * std::sin(theta));
    }
  }
  m.vertices.emplace_back(0.0, 1.0, 0.0);
  const int bottom = 0;
  const int top = static_cast<int>(m.vertices.size()) - 1;
  auto vid = [&](int k, int i) { return 1 + (k - 1) * n_around + (i % n_around); };

  for (int k = 1; k < n_along; ++k) {
    for (int i = 0; i <= n_around; ++i) m.uvs.emplace_back(static_cast<double>(i) / n_around, static_cast<double>(k) / n_along);
  }
  auto tid = [&](int k, int i) { return (k - 1) * (n_around + 1) + i; };

  for (int i = 0; i < n_around; ++i) {
    const int apex = add_uv(m, (i + 0.5) / n_around, 0.0);
    add_face(m, {bottom, vid(1, i), vid(1, i + 1)}, {apex, tid(1, i), tid(1, i + 1)});
  }
  for (int k = 1; k + 1 < n_along; ++k) {
    for (int i = 0; i < n_around; ++i) {
      add_face(m, {vid(k, i), vid(k + 1, i), vid(k + 1, i + 1)}, {tid(k, i), tid(k + 1, i), tid(k + 1, i + 1)});
      add_face(m, {vid(k, i), vid(k + 1, i + 1), vid(k, i + 1)}, {tid(k, i), tid(k + 1, i + 1), tid(k, i + 1)});
    }
  }
  for (int i = 0; i < n_around; ++i) {
    const int apex = add_uv(m, (i + 0.5) / n_around, 1.0);
    add_face(m, {top, vid(n_along - 1, i + 1), vid(n_along - 1, i)},
             {apex, tid(n_along - 1, i + 1), tid(n_along - 1, i)});
  }
  return m;
}

}  // namespace fmqm::primitives
