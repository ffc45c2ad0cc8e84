#pragma once

#include "fmqm/features.hpp"
#include "fmqm/mesh_io.hpp"
#include "fmqm/patching.hpp"
#include "fmqm/spatial_index.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fmqm {

enum class CenterMode { Fps, Random };

struct FmqmConfig {
  std::size_t n_target = 200000;
  std::size_t n_patch = 250;
  double sigma_base = 0.05;
  double nor_thre = 0.95;
  double tan_thre = 0.05;
  double radius_factor = 0.125;
  std::size_t n_color_patch = 100;
  std::uint64_t seed = 1;
  CenterMode center_mode = CenterMode::Fps;
  PoolingMode pooling = PoolingMode::Geometric;
  ColorSpace color_space = ColorSpace::Rgb;
  double stabilizer = 1e-6;
  double eps = 1e-12;
  bool grad_all_samples = false;
  unsigned threads = 1;  // 0 picks the hardware concurrency

  void validate() const;
  ChannelWeights channel_weights() const {
    return color_space == ColorSpace::Lab ? ChannelWeights::lab_default() : ChannelWeights::uniform();
  }
};

struct PatchRecord {
  std::size_t center_vertex = 0;
  std::size_t face_count = 0;
  double area = 0.0;
  double diagonal = 0.0;
  std::size_t samples = 0;
  std::size_t color_centers = 0;
  std::size_t gradient_centers = 0;
  bool skipped = false;
  PatchFeatures features;
};

struct Diagnostics {
  std::size_t patches_requested = 0;
  std::size_t patches_evaluated = 0;
  std::size_t patches_skipped = 0;
  std::size_t total_samples = 0;
  std::size_t unreliable_sign_ref = 0;
  std::size_t unreliable_sign_dist = 0;
  std::size_t on_surface_samples = 0;
  std::size_t degenerate_faces = 0;
  std::size_t undefined_geo = 0;
  std::size_t undefined_geo_gra = 0;
  std::size_t undefined_color = 0;
  std::size_t undefined_color_gra = 0;
};

struct Timings {
  double load_ms = 0.0;
  double index_ms = 0.0;
  double patches_ms = 0.0;
  double total_ms = 0.0;
};

struct FmqmResult {
  double final_score = 0.0;
  PooledFeatures pooled;
  std::vector<PatchRecord> patches;
  Diagnostics diagnostics;
  Timings timings;
};

/// Everything needed to evaluate one mesh's fields. The index points into `mesh`,
/// so the object is pinned in place.
struct MeshAssets {
  explicit MeshAssets(TexturedMesh m);
  MeshAssets(const MeshAssets&) = delete;
  MeshAssets& operator=(const MeshAssets&) = delete;

  TexturedMesh mesh;
  MeshStats stats;
  TriangleIndex index;
};

/// Both fields at identical positions; gradients are left empty on the surface.
std::vector<FieldSample> compute_field_samples(const MeshAssets& ref, const MeshAssets& dist,
                                               std::span<const Vec3> positions);

/// Patch centers on the reference mesh (vertices with at least one incident face).
std::vector<std::size_t> select_patch_centers(const TexturedMesh& mesh, const MeshTopology& topology,
                                              const FmqmConfig& config);

FmqmResult compute_fmqm(const MeshAssets& ref, const MeshAssets& dist, const FmqmConfig& config);
FmqmResult compute_fmqm(const TexturedMesh& ref, const TexturedMesh& dist, const FmqmConfig& config);
FmqmResult compute_fmqm(const std::filesystem::path& ref_path, const std::filesystem::path& dist_path,
                        const FmqmConfig& config);

inline constexpr int kResultSchemaVersion = 1;

nlohmann::ordered_json config_to_json(const FmqmConfig& config);

/// Result document. Everything except "runtime" is reproducible bit for bit.
nlohmann::ordered_json result_to_json(const FmqmResult& result, const FmqmConfig& config);

std::string to_string(CenterMode m);
std::string to_string(PoolingMode m);
std::string to_string(ColorSpace s);

}  // namespace fmqm
