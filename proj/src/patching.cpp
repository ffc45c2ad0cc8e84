#include "fmqm/patching.hpp"

#include "fmqm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace fmqm {

MeshTopology::MeshTopology(const TexturedMesh& mesh) : offsets_(mesh.vertices.size() + 1, 0) {
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      // a face listing the same vertex twice is still incident once
      if (k > 0 && f.v[k] == f.v[0]) continue;
      if (k > 1 && f.v[k] == f.v[1]) continue;
      ++offsets_[f.v[k] + 1];
    }
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  faces_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    for (int k = 0; k < 3; ++k) {
      if (k > 0 && f.v[k] == f.v[0]) continue;
      if (k > 1 && f.v[k] == f.v[1]) continue;
      faces_[cursor[f.v[k]]++] = static_cast<std::uint32_t>(i);
    }
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over the combined inputs
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

std::vector<std::size_t> farthest_point_sample(std::span<const Vec3> points, std::size_t n) {
  if (n > points.size())
    throw InvalidArgument("farthest point sampling asked for " + std::to_string(n) + " of " +
                          std::to_string(points.size()) + " points");
  std::vector<std::size_t> chosen;
  if (n == 0) return chosen;
  chosen.reserve(n);

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  std::size_t first = 0;
  double far = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - centroid).squaredNorm();
    if (d > far) {
      far = d;
      first = i;
    }
  }
  chosen.push_back(first);

  std::vector<double> min_d(points.size(), std::numeric_limits<double>::infinity());
  std::size_t last = first;
  while (chosen.size() < n) {
    std::size_t next = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      min_d[i] = std::min(min_d[i], (points[i] - points[last]).squaredNorm());
      if (min_d[i] > best) {
        best = min_d[i];
        next = i;
      }
    }
    chosen.push_back(next);
    last = next;
  }
  return chosen;
}

std::vector<std::size_t> random_sample(std::size_t count, std::size_t n, std::uint64_t seed) {
  if (n > count) throw InvalidArgument("cannot draw " + std::to_string(n) + " of " + std::to_string(count));
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, count - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  return idx;
}

LocalPatch build_local_patch(const TexturedMesh& mesh, const MeshTopology& topology, const MeshStats& stats,
                             std::size_t center, std::size_t n_patch, double sigma_base) {
  if (center >= mesh.vertices.size()) throw InvalidArgument("patch center out of range");
  if (n_patch == 0) throw InvalidArgument("n_patch must be at least 1");
  if (topology.faces_of(center).empty())
    throw InvalidArgument("empty patch: vertex " + std::to_string(center) + " has no incident faces");

  LocalPatch patch;
  patch.center_vertex = center;
  std::vector<char> in_face(mesh.faces.size(), 0);
  std::vector<char> in_vertex(mesh.vertices.size(), 0);
  std::vector<std::size_t> frontier{center};
  in_vertex[center] = 1;
  patch.vertices.push_back(center);
  const double threshold = stats.total_area / static_cast<double>(n_patch);

  for (int ring = 0;; ++ring) {
    std::vector<std::size_t> next;
    for (std::size_t v : frontier) {
      for (std::uint32_t f : topology.faces_of(v)) {
        if (in_face[f]) continue;
        in_face[f] = 1;
        patch.faces.push_back(f);
        patch.area += stats.face_areas[f];
        for (int k = 0; k < 3; ++k) {
          const auto w = static_cast<std::size_t>(mesh.faces[f].v[k]);
          if (!in_vertex[w]) {
            in_vertex[w] = 1;
            patch.vertices.push_back(w);
            next.push_back(w);
          }
        }
      }
    }
    patch.expansions = ring;
    // the one-ring (ring 0) is always taken; further rings only while below the share
    if (patch.area >= threshold) break;
    if (next.empty()) {
      patch.exhausted = true;
      break;
    }
    frontier = std::move(next);
  }

  std::sort(patch.faces.begin(), patch.faces.end());
  std::sort(patch.vertices.begin(), patch.vertices.end());
  Vec3 lo = mesh.vertices[patch.vertices.front()];
  Vec3 hi = lo;
  for (std::size_t v : patch.vertices) {
    lo = lo.cwiseMin(mesh.vertices[v]);
    hi = hi.cwiseMax(mesh.vertices[v]);
  }
  patch.diagonal = (hi - lo).norm();
  patch.sigma = sigma_base * patch.diagonal;
  // sum in sorted order so the area does not depend on traversal order
  patch.area = 0.0;
  for (std::size_t f : patch.faces) patch.area += stats.face_areas[f];
  return patch;
}

SamplePlan plan_samples(const LocalPatch& patch, const MeshStats& stats, std::size_t n_target) {
  SamplePlan plan;
  plan.counts.assign(patch.faces.size(), 0);
  if (!(patch.area > 0.0)) return plan;
  plan.total = static_cast<std::size_t>(std::llround(patch.area / stats.total_area * static_cast<double>(n_target)));

  std::vector<double> frac(patch.faces.size());
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < patch.faces.size(); ++k) {
    const double exact = stats.face_areas[patch.faces[k]] / patch.area * static_cast<double>(plan.total);
    const double whole = std::floor(exact);
    plan.counts[k] = static_cast<std::size_t>(whole);
    frac[k] = exact - whole;
    assigned += plan.counts[k];
  }
  std::vector<std::size_t> order(patch.faces.size());
  std::iota(order.begin(), order.end(), 0);
  // faces are sorted by id, so a stable sort keeps the lowest id first on ties
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < plan.total; k = (k + 1) % order.size()) {
    ++plan.counts[order[k]];
    ++assigned;
  }
  // floor() of a value a hair above an integer can overshoot by one
  for (std::size_t k = order.size(); assigned > plan.total && k-- > 0;) {
    if (plan.counts[order[k]] > 0) {
      --plan.counts[order[k]];
      --assigned;
    }
  }
  return plan;
}

std::vector<Vec3> generate_samples(const TexturedMesh& mesh, const LocalPatch& patch, const SamplePlan& plan,
                                   double sigma, std::uint64_t seed) {
  if (plan.counts.size() != patch.faces.size()) throw InvalidArgument("sample plan does not match patch");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> offset(0.0, 1.0);

  std::vector<Vec3> out;
  out.reserve(plan.total);
  for (std::size_t k = 0; k < patch.faces.size(); ++k) {
    const std::size_t n = plan.counts[k];
    if (n == 0) continue;
    const auto c = mesh.corners(patch.faces[k]);
    const Vec3 cross = (c[1] - c[0]).cross(c[2] - c[0]);
    const double len = cross.norm();
    if (len > 0.0) {
      const Vec3 normal = cross / len;
      for (std::size_t s = 0; s < n; ++s) {
        const double r1 = std::sqrt(uniform(rng));
        const double r2 = uniform(rng);
        const double dd = sigma * offset(rng);
        out.push_back((1.0 - r1) * c[0] + r1 * (1.0 - r2) * c[1] + r1 * r2 * c[2] + dd * normal);
      }
      continue;
    }
    // degenerate face: place samples on the longest edge, offset along a fixed perpendicular
    int e = 0;
    double longest = -1.0;
    for (int i = 0; i < 3; ++i) {
      const double l = (c[(i + 1) % 3] - c[i]).squaredNorm();
      if (l > longest) {
        longest = l;
        e = i;
      }
    }
    const Vec3 a = c[e];
    const Vec3 b = c[(e + 1) % 3];
    Vec3 perp = Vec3::UnitX();
    if (longest > 0.0) {
      const Vec3 dir = (b - a).normalized();
      int axis = 0;
      dir.cwiseAbs().minCoeff(&axis);
      perp = dir.cross(Vec3::Unit(axis)).normalized();
    }
    for (std::size_t s = 0; s < n; ++s) {
      const double t = uniform(rng);
      const double dd = sigma * offset(rng);
      out.push_back((1.0 - t) * a + t * b + dd * perp);
    }
  }
  return out;
}

std::vector<std::size_t> select_color_centers(std::size_t sample_count, std::size_t n_color_patch,
                                              std::uint64_t seed) {
  if (n_color_patch >= sample_count) {
    std::vector<std::size_t> all(sample_count);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  auto picked = random_sample(sample_count, n_color_patch, seed);
  std::sort(picked.begin(), picked.end());
  return picked;
}

namespace {

template <typename Keep>
std::vector<std::size_t> gather_unit(std::span<const FieldSample> samples, std::size_t center, double radius,
                                     Keep keep) {
  std::vector<std::size_t> out;
  const FieldSample& c = samples[center];
  const Vec3 axis = c.ref_hit.point - c.position;
  const double axis_len = axis.norm();
  if (!(axis_len > 0.0)) return out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i == center) continue;
    const Vec3 w = samples[i].position - c.position;
    const double len = w.norm();
    if (!(len > 0.0) || !(len < radius)) continue;
    if (keep(std::abs(axis.dot(w)) / (axis_len * len))) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> gather_normal_unit(std::span<const FieldSample> samples, std::size_t center,
                                            double nor_thre, double radius) {
  return gather_unit(samples, center, radius, [&](double cosine) { return cosine > nor_thre; });
}

std::vector<std::size_t> gather_tangent_unit(std::span<const FieldSample> samples, std::size_t center,
                                             double tan_thre, double radius) {
  return gather_unit(samples, center, radius, [&](double cosine) { return cosine < tan_thre; });
}

}  // namespace fmqm
