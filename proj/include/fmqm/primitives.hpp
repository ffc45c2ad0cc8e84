#pragma once

#include "fmqm/mesh_io.hpp"

namespace fmqm::primitives {

// Procedural textured meshes with watertight topology (except the plane).
// Every mesh gets `texture` unless noted; uvs are laid out per primitive.

/// Sum of checkerboards with block sizes 1, 2, 4, ..., 64 texels, a different
/// mix per channel. Values are multiples of 1/255 so they survive PNG.
TextureImage multiscale_checker(int size);

TextureImage constant_texture(int size, Rgb color);

/// Unit square in the z = 0 plane, n x n quads, uv = (x, y).
TexturedMesh plane(int n, const TextureImage& texture);

/// Unit cube [0,1]^3 with n x n quads per side, welded along edges.
TexturedMesh cube(int n, const TextureImage& texture);

/// Icosahedron subdivided `level` times and projected to the unit sphere.
TexturedMesh icosphere(int level, const TextureImage& texture);

/// Torus around the y axis, major radius 1, minor radius 0.35.
TexturedMesh torus(int n_major, int n_minor, const TextureImage& texture);

/// Closed surface of revolution with a vase-like profile and apex vertices at
/// both ends; u runs around the axis and v along it.
TexturedMesh checker_vase(int n_around, int n_along, const TextureImage& texture);

}  // namespace fmqm::primitives
