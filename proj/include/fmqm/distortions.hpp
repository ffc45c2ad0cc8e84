#pragma once

#include "fmqm/mesh_io.hpp"

#include <cstdint>

namespace fmqm {

// Synthetic distortions for tests and demos. Each one changes either geometry or
// texture and keeps the face/uv index structure intact.

/// Adds i.i.d. Normal(0, (sigma * bbox_diagonal)^2) noise to every vertex coordinate.
TexturedMesh vertex_gaussian_noise(const TexturedMesh& mesh, double sigma, std::uint64_t seed);

/// Snaps each coordinate to the nearest of 2^bits levels spanning the bounding box on that axis.
TexturedMesh quantize_positions(const TexturedMesh& mesh, int bits);

/// Box-filters by `factor` (edge blocks clamp to the image) and scales back up
/// with nearest-neighbour replication to the original size.
TextureImage downsample_texture(const TextureImage& tex, int factor);

/// Convenience: mesh with its texture replaced by downsample_texture(texture, factor).
TexturedMesh downsample_mesh_texture(const TexturedMesh& mesh, int factor);

}  // namespace fmqm
