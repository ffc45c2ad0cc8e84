#pragma once

#include "fmqm/mesh_io.hpp"
#include "fmqm/spatial_index.hpp"

#include <optional>

namespace fmqm {

struct SignedDistance {
  double value = 0.0;  // negative inside
  SurfaceHit hit;
  bool sign_reliable = true;
};

/// Signed distance by ray parity: a ray from p toward its nearest surface point
/// is intersected with the mesh; an odd crossing count means p is inside.
/// When parity cannot be decided the magnitude is kept with a positive sign.
SignedDistance sdf_value(const TriangleIndex& index, const Vec3& p);

/// Texture sample with bilinear weights over the four surrounding texels.
/// Integer texel coordinates wrap modulo the image size.
Rgb bilinear_sample(const TextureImage& tex, double i, double j);

/// Interpolated uv of the hit (wrapped into texel space by bilinear_sample).
Vec2 hit_uv(const TexturedMesh& mesh, const SurfaceHit& hit);

/// Nearest-surface-point color: texture color at the hit's interpolated uv,
/// with texel coordinates i = u*W - 0.5 and j = (1 - v)*H - 0.5.
Rgb ncf_value(const TexturedMesh& mesh, const SurfaceHit& hit);

/// Unit SDF gradient sign(f) * (p - q) / |p - q|, where q is the nearest surface
/// point. Returns nullopt for samples within 1e-12 * diagonal of the surface.
std::optional<Vec3> sdf_gradient(const Vec3& p, const SignedDistance& sd, double bbox_diagonal);

struct Lab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// sRGB (D65) to CIELAB.
Lab rgb_to_lab(const Rgb& rgb);

}  // namespace fmqm
