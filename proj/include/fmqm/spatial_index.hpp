#pragma once

#include "fmqm/mesh_io.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fmqm {

struct SurfaceHit {
  std::size_t face_id = 0;
  Vec3 barycentric = Vec3::Zero();  // weights of the face's corners v0, v1, v2
  Vec3 point = Vec3::Zero();
  double distance = 0.0;
};

struct TrianglePoint {
  Vec3 point;
  Vec3 barycentric;
};

/// Closest point of the closed triangle (v0, v1, v2) to p.
///
/// Degenerate triangles collapse to their nearest edge or vertex, with the
/// barycentric weights still reproducing the returned point.
TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& v0, const Vec3& v1, const Vec3& v2);

/// Ray-crossing count with an ambiguity-resolving retry.
struct RayCount {
  int count = 0;
  bool reliable = true;  // false when every jittered direction still grazed an edge
  int retries = 0;
};

/// Median-split bounding volume hierarchy over face centroids.
///
/// Immutable after construction. Queries are const and may run concurrently.
class TriangleIndex {
 public:
  struct Node {
    Vec3 lo;
    Vec3 hi;
    std::uint32_t first = 0;  // leaf: offset into face order; inner: right child
    std::uint32_t count = 0;  // leaf: number of faces; inner: 0
  };

  static constexpr std::uint32_t kLeafSize = 4;

  explicit TriangleIndex(const TexturedMesh& mesh);

  const TexturedMesh& mesh() const { return *mesh_; }
  double bbox_diagonal() const { return diagonal_; }
  std::size_t face_count() const { return order_.size(); }

  /// Nearest surface point over all faces; equal distances go to the lowest face id.
  SurfaceHit nearest(const Vec3& p) const;

  /// Number of distinct faces crossed by origin + t*direction for t > 1e-9 * diagonal.
  RayCount count_crossings(const Vec3& origin, const Vec3& direction) const;

  // Introspection for tests.
  const std::vector<Node>& nodes() const { return nodes_; }
  std::vector<std::vector<std::size_t>> leaves() const;

 private:
  enum class Crossing { Hit, Miss, Ambiguous };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  Crossing cross_face(std::size_t face, const Vec3& origin, const Vec3& dir, double t_min) const;
  std::optional<int> count_once(const Vec3& origin, const Vec3& dir) const;

  const TexturedMesh* mesh_;
  double diagonal_ = 0.0;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

inline TriangleIndex build_index(const TexturedMesh& mesh) { return TriangleIndex(mesh); }

inline SurfaceHit nearest_surface_point(const TriangleIndex& index, const Vec3& p) { return index.nearest(p); }

inline RayCount ray_intersection_count(const TriangleIndex& index, const Vec3& origin, const Vec3& direction) {
  return index.count_crossings(origin, direction);
}

}  // namespace fmqm
