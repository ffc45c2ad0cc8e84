#include "fmqm/spatial_index.hpp"

#include "fmqm/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fmqm {

namespace {

TrianglePoint closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return {(1.0 - t) * a + t * b, Vec3(1.0 - t, t, 0.0)};
}

TrianglePoint from_weights(const Vec3& w, const Vec3& a, const Vec3& b, const Vec3& c) {
  return {w[0] * a + w[1] * b + w[2] * c, w};
}

// Nearest of the three edges, for triangles with no usable plane.
TrianglePoint closest_on_degenerate(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const TrianglePoint e0 = closest_on_segment(p, a, b);
  const TrianglePoint e1 = closest_on_segment(p, b, c);
  const TrianglePoint e2 = closest_on_segment(p, c, a);
  const double d0 = (p - e0.point).squaredNorm();
  const double d1 = (p - e1.point).squaredNorm();
  const double d2 = (p - e2.point).squaredNorm();
  if (d0 <= d1 && d0 <= d2) return from_weights(Vec3(e0.barycentric[0], e0.barycentric[1], 0.0), a, b, c);
  if (d1 <= d2) return from_weights(Vec3(0.0, e1.barycentric[0], e1.barycentric[1]), a, b, c);
  return from_weights(Vec3(e2.barycentric[1], 0.0, e2.barycentric[0]), a, b, c);
}

double box_distance2(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  const Vec3 d = (lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - hi);
  return d.squaredNorm();
}

bool ray_hits_box(const Vec3& origin, const Vec3& inv_dir, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    double a = (lo[k] - origin[k]) * inv_dir[k];
    double b = (hi[k] - origin[k]) * inv_dir[k];
    if (std::isnan(a) || std::isnan(b)) {
      // direction component is zero: inside the slab or never
      if (origin[k] < lo[k] || origin[k] > hi[k]) return false;
      continue;
    }
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return false;
  }
  return true;
}

constexpr double kEdgeTolerance = 1e-7;
constexpr double kJitterAngle = 1e-4;
constexpr int kMaxRetries = 8;

const std::array<Vec3, kMaxRetries>& jitter_axes() {
  static const std::array<Vec3, kMaxRetries> axes = {
      Vec3(1, 0, 0),           Vec3(0, 1, 0),           Vec3(0, 0, 1),           Vec3(1, 1, 1).normalized(),
      Vec3(1, -1, 0).normalized(), Vec3(0, 1, -1).normalized(), Vec3(1, 0, -1).normalized(),
      Vec3(1, 2, 3).normalized()};
  return axes;
}

}  // namespace

TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 bc = c - b;
  const double scale2 = std::max({ab.squaredNorm(), ac.squaredNorm(), bc.squaredNorm()});
  if (scale2 == 0.0) return {a, Vec3(1.0, 0.0, 0.0)};
  if (ab.cross(ac).squaredNorm() <= 1e-24 * scale2 * scale2) return closest_on_degenerate(p, a, b, c);

  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {a, Vec3(1.0, 0.0, 0.0)};

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {b, Vec3(0.0, 1.0, 0.0)};

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return from_weights(Vec3(1.0 - v, v, 0.0), a, b, c);
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {c, Vec3(0.0, 0.0, 1.0)};

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return from_weights(Vec3(1.0 - w, 0.0, w), a, b, c);
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return from_weights(Vec3(0.0, 1.0 - w, w), a, b, c);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return from_weights(Vec3(1.0 - v - w, v, w), a, b, c);
}

TriangleIndex::TriangleIndex(const TexturedMesh& mesh) : mesh_(&mesh) {
  if (mesh.faces.empty()) throw InvalidArgument("cannot index an empty mesh");
  const MeshStats stats = compute_stats(mesh);
  diagonal_ = stats.bbox_diagonal;

  order_.resize(mesh.faces.size());
  std::iota(order_.begin(), order_.end(), 0u);
  centroids_.resize(mesh.faces.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto c = mesh.corners(i);
    centroids_[i] = (c[0] + c[1] + c[2]) / 3.0;
  }
  nodes_.reserve(2 * mesh.faces.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(order_.size()));
  centroids_.clear();
  centroids_.shrink_to_fit();
}

std::uint32_t TriangleIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  Vec3 clo = lo;
  Vec3 chi = hi;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (const auto& v : mesh_->corners(order_[i])) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    clo = clo.cwiseMin(centroids_[order_[i]]);
    chi = chi.cwiseMax(centroids_[order_[i]]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;

  if (end - begin <= kLeafSize) {
    nodes_[id].first = begin;
    nodes_[id].count = end - begin;
    return id;
  }

  int axis = 0;
  (chi - clo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  // ties on the centroid coordinate fall back to face id so the split is deterministic
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) {
                     const double cx = centroids_[x][axis];
                     const double cy = centroids_[y][axis];
                     return cx < cy || (cx == cy && x < y);
                   });
  build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].first = right;
  nodes_[id].count = 0;
  return id;
}

std::vector<std::vector<std::size_t>> TriangleIndex::leaves() const {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& n : nodes_) {
    if (n.count == 0) continue;
    out.emplace_back(order_.begin() + n.first, order_.begin() + n.first + n.count);
  }
  return out;
}

SurfaceHit TriangleIndex::nearest(const Vec3& p) const {
  SurfaceHit best;
  double best_d2 = std::numeric_limits<double>::infinity();
  bool found = false;

  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance2(p, node.lo, node.hi) > best_d2) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::size_t f = order_[i];
        const auto c = mesh_->corners(f);
        const TrianglePoint tp = closest_point_on_triangle(p, c[0], c[1], c[2]);
        const double d2 = (p - tp.point).squaredNorm();
        if (!found || d2 < best_d2 || (d2 == best_d2 && f < best.face_id)) {
          found = true;
          best_d2 = d2;
          best.face_id = f;
          best.barycentric = tp.barycentric;
          best.point = tp.point;
        }
      }
      continue;
    }
    const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    const std::uint32_t right = node.first;
    const double dl = box_distance2(p, nodes_[left].lo, nodes_[left].hi);
    const double dr = box_distance2(p, nodes_[right].lo, nodes_[right].hi);
    // push the farther child first so the nearer one is visited next
    if (dl <= dr) {
      stack[top++] = right;
      stack[top++] = left;
    } else {
      stack[top++] = left;
      stack[top++] = right;
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

TriangleIndex::Crossing TriangleIndex::cross_face(std::size_t face, const Vec3& origin, const Vec3& dir,
                                                  double t_min) const {
  const auto c = mesh_->corners(face);
  const Vec3 e1 = c[1] - c[0];
  const Vec3 e2 = c[2] - c[0];
  const Vec3 h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) <= 1e-14 * e1.norm() * e2.norm()) return Crossing::Miss;
  const double inv = 1.0 / det;
  const Vec3 s = origin - c[0];
  const double u = inv * s.dot(h);
  if (u < -kEdgeTolerance || u > 1.0 + kEdgeTolerance) return Crossing::Miss;
  const Vec3 q = s.cross(e1);
  const double v = inv * dir.dot(q);
  if (v < -kEdgeTolerance || u + v > 1.0 + kEdgeTolerance) return Crossing::Miss;
  const double t = inv * e2.dot(q);
  if (t <= t_min) return Crossing::Miss;
  if (u < kEdgeTolerance || v < kEdgeTolerance || 1.0 - u - v < kEdgeTolerance) return Crossing::Ambiguous;
  return Crossing::Hit;
}

std::optional<int> TriangleIndex::count_once(const Vec3& origin, const Vec3& dir) const {
  const double t_min = 1e-9 * diagonal_;
  const Vec3 inv_dir = dir.cwiseInverse();
  int count = 0;
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t id = stack[--top];
    const Node& node = nodes_[id];
    if (!ray_hits_box(origin, inv_dir, node.lo, node.hi)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        switch (cross_face(order_[i], origin, dir, t_min)) {
          case Crossing::Hit: ++count; break;
          case Crossing::Ambiguous: return std::nullopt;
          case Crossing::Miss: break;
        }
      }
      continue;
    }
    stack[top++] = node.first;
    stack[top++] = id + 1;
  }
  return count;
}

RayCount TriangleIndex::count_crossings(const Vec3& origin, const Vec3& direction) const {
  if (!(direction.squaredNorm() > 0.0)) throw InvalidArgument("ray direction must be non-zero");
  Vec3 dir = direction.normalized();
  RayCount out;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    if (auto n = count_once(origin, dir)) {
      out.count = *n;
      out.retries = attempt;
      return out;
    }
    if (attempt < kMaxRetries) dir = Eigen::AngleAxisd(kJitterAngle, jitter_axes()[attempt]) * dir;
  }
  out.reliable = false;
  out.retries = kMaxRetries;
  return out;
}

}  // namespace fmqm
