#include "fmqm/fields.hpp"

#include <algorithm>
#include <cmath>

namespace fmqm {

SignedDistance sdf_value(const TriangleIndex& index, const Vec3& p) {
  SignedDistance sd;
  sd.hit = index.nearest(p);
  sd.value = sd.hit.distance;
  // points on (or numerically on) the surface have no usable ray direction
  if (sd.hit.distance <= 1e-9 * index.bbox_diagonal()) return sd;
  const RayCount rc = index.count_crossings(p, sd.hit.point - p);
  if (!rc.reliable) {
    sd.sign_reliable = false;
    return sd;
  }
  if (rc.count % 2 == 1) sd.value = -sd.hit.distance;
  return sd;
}

namespace {

int wrap(long k, int n) {
  const long m = k % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

}  // namespace

Rgb bilinear_sample(const TextureImage& tex, double i, double j) {
  const double fi = std::floor(i);
  const double fj = std::floor(j);
  const double ti = i - fi;
  const double tj = j - fj;
  const int x0 = wrap(static_cast<long>(fi), tex.width());
  const int x1 = wrap(static_cast<long>(fi) + 1, tex.width());
  const int y0 = wrap(static_cast<long>(fj), tex.height());
  const int y1 = wrap(static_cast<long>(fj) + 1, tex.height());
  const Rgb& c00 = tex.at(x0, y0);
  const Rgb& c10 = tex.at(x1, y0);
  const Rgb& c01 = tex.at(x0, y1);
  const Rgb& c11 = tex.at(x1, y1);
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    const double top = (1.0 - ti) * c00[c] + ti * c10[c];
    const double bottom = (1.0 - ti) * c01[c] + ti * c11[c];
    out[c] = std::clamp((1.0 - tj) * top + tj * bottom, 0.0, 1.0);
  }
  return out;
}

Vec2 hit_uv(const TexturedMesh& mesh, const SurfaceHit& hit) {
  const Face& f = mesh.faces[hit.face_id];
  return hit.barycentric[0] * mesh.uvs[f.vt[0]] + hit.barycentric[1] * mesh.uvs[f.vt[1]] +
         hit.barycentric[2] * mesh.uvs[f.vt[2]];
}

Rgb ncf_value(const TexturedMesh& mesh, const SurfaceHit& hit) {
  const Vec2 uv = hit_uv(mesh, hit);
  const double i = uv.x() * mesh.texture.width() - 0.5;
  const double j = (1.0 - uv.y()) * mesh.texture.height() - 0.5;
  return bilinear_sample(mesh.texture, i, j);
}

std::optional<Vec3> sdf_gradient(const Vec3& p, const SignedDistance& sd, double bbox_diagonal) {
  const Vec3 d = p - sd.hit.point;
  const double len = d.norm();
  if (!(len > 1e-12 * bbox_diagonal) || sd.value == 0.0) return std::nullopt;
  return (sd.value < 0.0 ? -1.0 : 1.0) * d / len;
}

namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

Lab rgb_to_lab(const Rgb& rgb) {
  const double r = srgb_to_linear(rgb.r);
  const double g = srgb_to_linear(rgb.g);
  const double b = srgb_to_linear(rgb.b);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  // D65 reference white, normalised so that sRGB white maps to L = 100
  constexpr double xn = 0.4124564 + 0.3575761 + 0.1804375;
  constexpr double yn = 0.2126729 + 0.7151522 + 0.0721750;
  constexpr double zn = 0.0193339 + 0.1191920 + 0.9503041;
  const double fx = lab_f(x / xn);
  const double fy = lab_f(y / yn);
  const double fz = lab_f(z / zn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

}  // namespace fmqm
