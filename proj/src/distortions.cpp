#include "fmqm/distortions.hpp"

#include "fmqm/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fmqm {

TexturedMesh vertex_gaussian_noise(const TexturedMesh& mesh, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  TexturedMesh out = mesh;
  if (sigma == 0.0) return out;
  const double scale = sigma * compute_stats(mesh).bbox_diagonal;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, scale);
  for (auto& v : out.vertices) {
    for (int k = 0; k < 3; ++k) v[k] += noise(rng);
  }
  return out;
}

TexturedMesh quantize_positions(const TexturedMesh& mesh, int bits) {
  if (bits < 1 || bits > 24) throw InvalidArgument("quantization bits must be in [1, 24]");
  TexturedMesh out = mesh;
  const MeshStats stats = compute_stats(mesh);
  const double steps = std::ldexp(1.0, bits) - 1.0;
  for (auto& v : out.vertices) {
    for (int k = 0; k < 3; ++k) {
      const double lo = stats.bbox_min[k];
      const double extent = stats.bbox_max[k] - lo;
      if (!(extent > 0.0)) continue;
      const double level = std::round((v[k] - lo) / extent * steps);
      // the top level maps onto the box exactly so a second pass is a no-op
      v[k] = level == steps ? stats.bbox_max[k] : lo + level / steps * extent;
    }
  }
  return out;
}

TextureImage downsample_texture(const TextureImage& tex, int factor) {
  if (factor < 1) throw InvalidArgument("downsample factor must be at least 1");
  if (factor == 1) return tex;
  const int w = tex.width();
  const int h = tex.height();
  const int bw = (w + factor - 1) / factor;
  const int bh = (h + factor - 1) / factor;
  std::vector<Rgb> blocks(static_cast<std::size_t>(bw) * bh);
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      Rgb sum;
      int n = 0;
      for (int y = by * factor; y < std::min(h, (by + 1) * factor); ++y) {
        for (int x = bx * factor; x < std::min(w, (bx + 1) * factor); ++x) {
          for (int c = 0; c < 3; ++c) sum[c] += tex.at(x, y)[c];
          ++n;
        }
      }
      for (int c = 0; c < 3; ++c) sum[c] /= n;
      blocks[static_cast<std::size_t>(by) * bw + bx] = sum;
    }
  }
  TextureImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = blocks[static_cast<std::size_t>(y / factor) * bw + x / factor];
  }
  return out;
}

TexturedMesh downsample_mesh_texture(const TexturedMesh& mesh, int factor) {
  TexturedMesh out = mesh;
  out.texture = downsample_texture(mesh.texture, factor);
  return out;
}

}  // namespace fmqm
