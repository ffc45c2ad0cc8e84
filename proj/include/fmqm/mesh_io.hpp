#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace fmqm {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
  double& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }
  bool operator==(const Rgb&) const = default;
};

// Row-major RGB raster. Row 0 is the top row of the image, channels in [0,1].
class TextureImage {
 public:
  TextureImage() = default;
  TextureImage(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  const std::vector<Rgb>& pixels() const { return pixels_; }

  // Throws InvalidArgument when a channel is outside [0,1] or the size is zero.
  void validate() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

struct Face {
  std::array<int, 3> v{};   // vertex indices
  std::array<int, 3> vt{};  // uv indices
};

struct TexturedMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec2> uvs;
  std::vector<Face> faces;
  TextureImage texture;

  std::array<Vec3, 3> corners(std::size_t face) const {
    const auto& f = faces[face];
    return {vertices[f.v[0]], vertices[f.v[1]], vertices[f.v[2]]};
  }

  // Index ranges, at least one face of positive area, valid texture.
  void validate() const;
};

struct MeshStats {
  double total_area = 0.0;
  double bbox_diagonal = 0.0;
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Zero();
  std::vector<double> face_areas;
  std::vector<std::size_t> degenerate_faces;
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

MeshStats compute_stats(const TexturedMesh& mesh);

/// Loads an OBJ file together with the single map_Kd texture named by its MTL.
///
/// Supported directives are v, vt, f (polygons are fan-triangulated), mtllib and
/// usemtl. Anything else is skipped with one warning per directive on stderr.
/// Relative paths are resolved against the OBJ's directory.
TexturedMesh load_mesh(const std::filesystem::path& path);

/// Writes `<stem>.obj`, `<stem>.mtl` and `<stem>.png` next to each other.
void save_mesh(const TexturedMesh& mesh, const std::filesystem::path& obj_path);

// Raster IO. PNG and JPEG are detected from the file signature.
TextureImage load_image(const std::filesystem::path& path);
void save_png(const TextureImage& image, const std::filesystem::path& path);

}  // namespace fmqm
