#pragma once

#include "fmqm/fields.hpp"
#include "fmqm/mesh_io.hpp"
#include "fmqm/spatial_index.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fmqm {

// Vertex-to-face incidence in compressed row form.
class MeshTopology {
 public:
  explicit MeshTopology(const TexturedMesh& mesh);

  std::span<const std::uint32_t> faces_of(std::size_t vertex) const {
    return {faces_.data() + offsets_[vertex], faces_.data() + offsets_[vertex + 1]};
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> faces_;
};

struct LocalPatch {
  std::size_t center_vertex = 0;
  std::vector<std::size_t> vertices;  // sorted
  std::vector<std::size_t> faces;     // sorted
  double area = 0.0;
  double diagonal = 0.0;  // bounding box diagonal of `vertices`
  double sigma = 0.0;     // sigma_base * diagonal
  int expansions = 0;     // ring expansions beyond the initial one-ring
  bool exhausted = false;  // stopped because no neighbours were left
};

struct SamplePlan {
  std::vector<std::size_t> counts;  // aligned with LocalPatch::faces
  std::size_t total = 0;
};

struct FieldSample {
  Vec3 position = Vec3::Zero();
  SurfaceHit ref_hit;
  SurfaceHit dist_hit;
  double sdf_ref = 0.0;
  double sdf_dist = 0.0;
  bool sign_reliable_ref = true;
  bool sign_reliable_dist = true;
  Rgb ncf_ref;
  Rgb ncf_dist;
  std::optional<Vec3> grad_ref;  // nullopt on the surface
  std::optional<Vec3> grad_dist;
};

/// Greedy farthest point sampling. The first pick is the vertex farthest from the
/// centroid; later picks maximise the distance to the chosen set. Ties go to the
/// lowest index.
std::vector<std::size_t> farthest_point_sample(std::span<const Vec3> points, std::size_t n);

/// n distinct indices drawn uniformly without replacement, in draw order.
std::vector<std::size_t> random_sample(std::size_t count, std::size_t n, std::uint64_t seed);

/// Grows a patch from the one-ring of `center` until it covers 1/n_patch of the
/// mesh area or its connected component is exhausted.
LocalPatch build_local_patch(const TexturedMesh& mesh, const MeshTopology& topology, const MeshStats& stats,
                             std::size_t center, std::size_t n_patch, double sigma_base);

/// Area-proportional sample allocation with largest-remainder rounding.
SamplePlan plan_samples(const LocalPatch& patch, const MeshStats& stats, std::size_t n_target);

/// Near-surface positions: a uniform point on each face offset along the face
/// normal by a Normal(0, sigma^2) distance. Deterministic for a given seed.
std::vector<Vec3> generate_samples(const TexturedMesh& mesh, const LocalPatch& patch, const SamplePlan& plan,
                                   double sigma, std::uint64_t seed);

/// Sorted subset of min(n_color_patch, sample_count) distinct sample indices.
std::vector<std::size_t> select_color_centers(std::size_t sample_count, std::size_t n_color_patch,
                                              std::uint64_t seed);

/// Samples within `radius` of the center whose offset is (anti)parallel to the
/// center's direction toward its reference nearest point: |cos| > nor_thre.
std::vector<std::size_t> gather_normal_unit(std::span<const FieldSample> samples, std::size_t center,
                                            double nor_thre, double radius);

/// As gather_normal_unit, but keeps offsets nearly orthogonal: |cos| < tan_thre.
std::vector<std::size_t> gather_tangent_unit(std::span<const FieldSample> samples, std::size_t center,
                                             double tan_thre, double radius);

/// Deterministic per-stream seed derived from a master seed and stream indices.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace fmqm
