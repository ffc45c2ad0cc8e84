#include "fmqm/mesh_io.hpp"

#include "fmqm/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace fmqm {

namespace fs = std::filesystem;

TextureImage::TextureImage(int width, int height, Rgb fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {}

void TextureImage::validate() const {
  if (width_ < 1 || height_ < 1) throw InvalidArgument("texture must be at least 1x1");
  for (const auto& p : pixels_) {
    for (int c = 0; c < 3; ++c) {
      if (!(p[c] >= 0.0 && p[c] <= 1.0)) throw InvalidArgument("texture channel outside [0,1]");
    }
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

void TexturedMesh::validate() const {
  const auto nv = static_cast<int>(vertices.size());
  const auto nt = static_cast<int>(uvs.size());
  bool any_area = false;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (faces[i].v[k] < 0 || faces[i].v[k] >= nv)
        throw InvalidArgument("face " + std::to_string(i) + " references vertex " +
                              std::to_string(faces[i].v[k]) + " out of range");
      if (faces[i].vt[k] < 0 || faces[i].vt[k] >= nt)
        throw InvalidArgument("face " + std::to_string(i) + " references uv " +
                              std::to_string(faces[i].vt[k]) + " out of range");
    }
    const auto c = corners(i);
    if (triangle_area(c[0], c[1], c[2]) > 0.0) any_area = true;
  }
  if (!any_area) throw InvalidArgument("mesh has no face with positive area");
  texture.validate();
}

MeshStats compute_stats(const TexturedMesh& mesh) {
  MeshStats s;
  s.face_areas.resize(mesh.faces.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto c = mesh.corners(i);
    s.face_areas[i] = triangle_area(c[0], c[1], c[2]);
    s.total_area += s.face_areas[i];
    if (s.face_areas[i] == 0.0) s.degenerate_faces.push_back(i);
  }
  if (!mesh.vertices.empty()) {
    s.bbox_min = s.bbox_max = mesh.vertices.front();
    for (const auto& v : mesh.vertices) {
      s.bbox_min = s.bbox_min.cwiseMin(v);
      s.bbox_max = s.bbox_max.cwiseMax(v);
    }
  }
  s.bbox_diagonal = (s.bbox_max - s.bbox_min).norm();
  return s;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& tok, const std::string& file, std::size_t line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(file, line, "bad number '" + tok + "'");
  return v;
}

// OBJ indices are 1-based; negative values count back from the current end.
int resolve_index(const std::string& tok, std::size_t count, const std::string& file, std::size_t line) {
  long v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || v == 0) throw ParseError(file, line, "bad index '" + tok + "'");
  return static_cast<int>(v > 0 ? v - 1 : static_cast<long>(count) + v);
}

fs::path texture_from_mtl(const fs::path& mtl_path, const std::string& material) {
  std::ifstream in(mtl_path);
  if (!in) throw IoError("cannot open material library " + mtl_path.string());
  std::string line;
  std::string current;
  fs::path first_texture;
  fs::path chosen;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "newmtl") {
      ls >> current;
    } else if (key == "map_Kd") {
      // options such as -s/-o may precede the file name; the name is the rest after them
      std::vector<std::string> toks;
      for (std::string t; ls >> t;) toks.push_back(t);
      if (toks.empty()) continue;
      fs::path tex = toks.back();
      if (first_texture.empty()) first_texture = tex;
      if (!material.empty() && current == material && chosen.empty()) chosen = tex;
    }
  }
  fs::path tex = chosen.empty() ? first_texture : chosen;
  if (tex.empty()) return {};
  return tex.is_absolute() ? tex : mtl_path.parent_path() / tex;
}

}  // namespace

TexturedMesh load_mesh(const fs::path& path) {
  std::ifstream in(path);
  if (!fs::exists(path)) throw IoError("file not found: " + path.string());
  if (!in) throw IoError("cannot open " + path.string());

  const std::string file = path.string();
  TexturedMesh mesh;
  std::vector<fs::path> mtllibs;
  std::string material;
  std::set<std::string> warned;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);

    if (key == "v") {
      if (toks.size() < 3) throw ParseError(file, line_no, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(parse_double(toks[0], file, line_no), parse_double(toks[1], file, line_no),
                                 parse_double(toks[2], file, line_no));
    } else if (key == "vt") {
      if (toks.size() < 2) throw ParseError(file, line_no, "texture coordinate needs 2 values");
      mesh.uvs.emplace_back(parse_double(toks[0], file, line_no), parse_double(toks[1], file, line_no));
    } else if (key == "f") {
      if (toks.size() < 3) throw ParseError(file, line_no, "face needs at least 3 corners");
      std::vector<std::pair<int, int>> corners;
      for (const auto& t : toks) {
        const auto s1 = t.find('/');
        if (s1 == std::string::npos) throw ParseError(file, line_no, "face corner '" + t + "' has no uv index");
        const auto s2 = t.find('/', s1 + 1);
        const std::string vt = t.substr(s1 + 1, s2 == std::string::npos ? std::string::npos : s2 - s1 - 1);
        if (vt.empty()) throw ParseError(file, line_no, "face corner '" + t + "' has no uv index");
        corners.emplace_back(resolve_index(t.substr(0, s1), mesh.vertices.size(), file, line_no),
                             resolve_index(vt, mesh.uvs.size(), file, line_no));
      }
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        Face f;
        f.v = {corners[0].first, corners[k].first, corners[k + 1].first};
        f.vt = {corners[0].second, corners[k].second, corners[k + 1].second};
        for (int c = 0; c < 3; ++c) {
          if (f.v[c] < 0 || f.v[c] >= static_cast<int>(mesh.vertices.size()) || f.vt[c] < 0 ||
              f.vt[c] >= static_cast<int>(mesh.uvs.size())) {
            throw ParseError(file, line_no,
                             "face " + std::to_string(mesh.faces.size()) + " references an index out of range");
          }
        }
        mesh.faces.push_back(f);
      }
    } else if (key == "mtllib") {
      for (const auto& t : toks) mtllibs.push_back(path.parent_path() / t);
    } else if (key == "usemtl") {
      if (!toks.empty() && material.empty()) material = toks[0];
    } else if (warned.insert(key).second) {
      std::cerr << "warning: " << file << ": ignoring '" << key << "' directives\n";
    }
  }

  fs::path texture;
  for (const auto& lib : mtllibs) {
    texture = texture_from_mtl(lib, material);
    if (!texture.empty()) break;
  }
  if (texture.empty()) throw IoError("missing texture: " + file + " names no map_Kd image");
  if (!fs::exists(texture)) throw IoError("missing texture: " + texture.string());
  mesh.texture = load_image(texture);
  mesh.validate();
  return mesh;
}

void save_mesh(const TexturedMesh& mesh, const fs::path& obj_path) {
  const fs::path dir = obj_path.parent_path();
  const std::string stem = obj_path.stem().string();
  if (!dir.empty()) fs::create_directories(dir);
  const fs::path mtl = dir / (stem + ".mtl");
  const fs::path png = dir / (stem + ".png");

  {
    std::ofstream out(mtl);
    if (!out) throw IoError("cannot write " + mtl.string());
    out << "newmtl material0\nKd 1 1 1\nmap_Kd " << png.filename().string() << "\n";
  }
  save_png(mesh.texture, png);

  std::ofstream out(obj_path);
  if (!out) throw IoError("cannot write " + obj_path.string());
  out << "mtllib " << mtl.filename().string() << "\n";
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : mesh.uvs) {
    std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", t.x(), t.y());
    out << buf;
  }
  out << "usemtl material0\n";
  for (const auto& f : mesh.faces) {
    out << "f";
    for (int k = 0; k < 3; ++k) out << ' ' << f.v[k] + 1 << '/' << f.vt[k] + 1;
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + obj_path.string());
}

}  // namespace fmqm
