#include "fmqm/pipeline.hpp"

#include "fmqm/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace fmqm {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

constexpr std::uint64_t kSampleStream = 0;
constexpr std::uint64_t kColorStream = 1;
constexpr std::uint64_t kCenterStream = 0x63656e74;  // "cent"

struct PatchOutcome {
  PatchRecord record;
  Diagnostics diag;
};

PatchOutcome evaluate_patch(const MeshAssets& ref, const MeshAssets& dist, const MeshTopology& topology,
                            const FmqmConfig& cfg, std::size_t patch_index, std::size_t center) {
  PatchOutcome out;
  PatchRecord& rec = out.record;
  const LocalPatch patch = build_local_patch(ref.mesh, topology, ref.stats, center, cfg.n_patch, cfg.sigma_base);
  rec.center_vertex = center;
  rec.face_count = patch.faces.size();
  rec.area = patch.area;
  rec.diagonal = patch.diagonal;

  const SamplePlan plan = plan_samples(patch, ref.stats, cfg.n_target);
  if (plan.total < 2) {
    rec.skipped = true;
    out.diag.patches_skipped = 1;
    return out;
  }
  const auto positions =
      generate_samples(ref.mesh, patch, plan, patch.sigma, derive_seed(cfg.seed, patch_index, kSampleStream));
  const auto samples = compute_field_samples(ref, dist, positions);
  rec.samples = samples.size();
  out.diag.patches_evaluated = 1;
  out.diag.total_samples = samples.size();
  for (const auto& s : samples) {
    if (!s.sign_reliable_ref) ++out.diag.unreliable_sign_ref;
    if (!s.sign_reliable_dist) ++out.diag.unreliable_sign_dist;
    if (!s.grad_ref || !s.grad_dist) ++out.diag.on_surface_samples;
  }

  PatchFeatures& f = rec.features;
  f.geo = geo_ssim(samples, patch.diagonal, cfg.stabilizer);
  f.geo_gra = geo_gradient_ssim(samples);

  const ColorSamples colors = color_samples(samples, cfg.color_space);
  const ChannelWeights weights = cfg.channel_weights();
  const double radius = cfg.radius_factor * patch.diagonal;
  const auto centers =
      select_color_centers(samples.size(), cfg.n_color_patch, derive_seed(cfg.seed, patch_index, kColorStream));
  const auto units = gather_units(samples, centers, cfg.nor_thre, cfg.tan_thre, radius);
  rec.color_centers = centers.size();
  f.color = color_ssim(colors, units, cfg.stabilizer, weights);

  std::vector<GradientPair> gradients;
  auto add_gradient = [&](std::size_t center_idx, std::span<const std::size_t> tangent_neighbours) {
    auto gr = estimate_color_gradient(samples, colors.ref, center_idx, tangent_neighbours);
    auto gd = estimate_color_gradient(samples, colors.dist, center_idx, tangent_neighbours);
    if (gr && gd) gradients.push_back({*gr, *gd});
  };
  if (cfg.grad_all_samples) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto tangent = gather_tangent_unit(samples, i, cfg.tan_thre, radius);
      add_gradient(i, tangent);
    }
  } else {
    for (const auto& u : units) {
      // units list the center first; the gradient only looks at the neighbours
      add_gradient(u.tangent.front(), std::span<const std::size_t>(u.tangent).subspan(1));
    }
  }
  rec.gradient_centers = gradients.size();
  f.color_gra = color_gradient_ssim(gradients, cfg.eps, weights);

  out.diag.undefined_geo = f.geo ? 0 : 1;
  out.diag.undefined_geo_gra = f.geo_gra ? 0 : 1;
  out.diag.undefined_color = f.color ? 0 : 1;
  out.diag.undefined_color_gra = f.color_gra ? 0 : 1;
  return out;
}

void accumulate(Diagnostics& into, const Diagnostics& d) {
  into.patches_evaluated += d.patches_evaluated;
  into.patches_skipped += d.patches_skipped;
  into.total_samples += d.total_samples;
  into.unreliable_sign_ref += d.unreliable_sign_ref;
  into.unreliable_sign_dist += d.unreliable_sign_dist;
  into.on_surface_samples += d.on_surface_samples;
  into.undefined_geo += d.undefined_geo;
  into.undefined_geo_gra += d.undefined_geo_gra;
  into.undefined_color += d.undefined_color;
  into.undefined_color_gra += d.undefined_color_gra;
}

}  // namespace

void FmqmConfig::validate() const {
  if (n_target < 1 || n_patch < 1 || n_color_patch < 1) throw InvalidArgument("counts must be at least 1");
  for (double t : {nor_thre, tan_thre}) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("thresholds must lie in [0,1]");
  }
  if (!(sigma_base >= 0.0)) throw InvalidArgument("sigma_base must be non-negative");
  if (!(radius_factor > 0.0)) throw InvalidArgument("radius_factor must be positive");
  if (!(stabilizer >= 0.0) || !(eps >= 0.0)) throw InvalidArgument("stabilizers must be non-negative");
}

MeshAssets::MeshAssets(TexturedMesh m) : mesh(std::move(m)), stats(compute_stats(mesh)), index(mesh) {}

std::vector<FieldSample> compute_field_samples(const MeshAssets& ref, const MeshAssets& dist,
                                               std::span<const Vec3> positions) {
  std::vector<FieldSample> out(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec3& p = positions[i];
    if (!p.allFinite()) throw NumericError("non-finite sample position");
    FieldSample& s = out[i];
    s.position = p;
    const SignedDistance r = sdf_value(ref.index, p);
    const SignedDistance d = sdf_value(dist.index, p);
    s.ref_hit = r.hit;
    s.dist_hit = d.hit;
    s.sdf_ref = r.value;
    s.sdf_dist = d.value;
    s.sign_reliable_ref = r.sign_reliable;
    s.sign_reliable_dist = d.sign_reliable;
    s.ncf_ref = ncf_value(ref.mesh, r.hit);
    s.ncf_dist = ncf_value(dist.mesh, d.hit);
    s.grad_ref = sdf_gradient(p, r, ref.stats.bbox_diagonal);
    s.grad_dist = sdf_gradient(p, d, dist.stats.bbox_diagonal);
  }
  return out;
}

std::vector<std::size_t> select_patch_centers(const TexturedMesh& mesh, const MeshTopology& topology,
                                              const FmqmConfig& config) {
  std::vector<std::size_t> candidates;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (!topology.faces_of(v).empty()) candidates.push_back(v);
  }
  const std::size_t n = std::min(config.n_patch, candidates.size());
  std::vector<std::size_t> picks;
  if (config.center_mode == CenterMode::Fps) {
    std::vector<Vec3> points;
    points.reserve(candidates.size());
    for (std::size_t v : candidates) points.push_back(mesh.vertices[v]);
    picks = farthest_point_sample(points, n);
  } else {
    picks = random_sample(candidates.size(), n, derive_seed(config.seed, kCenterStream));
  }
  for (auto& p : picks) p = candidates[p];
  return picks;
}

FmqmResult compute_fmqm(const MeshAssets& ref, const MeshAssets& dist, const FmqmConfig& config) {
  config.validate();
  const auto start = Clock::now();
  FmqmResult result;
  const MeshTopology topology(ref.mesh);
  const auto centers = select_patch_centers(ref.mesh, topology, config);

  std::vector<PatchOutcome> outcomes(centers.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < centers.size(); i = next++) {
      try {
        try {
          outcomes[i] = evaluate_patch(ref, dist, topology, config, i, centers[i]);
        } catch (const Error& e) {
          throw Error(e.kind(), "patch " + std::to_string(i) + " (center vertex " + std::to_string(centers[i]) +
                                    "): " + e.what());
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = centers.size();
      }
    }
  };
  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(centers.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  result.diagnostics.patches_requested = config.n_patch;
  result.diagnostics.degenerate_faces = ref.stats.degenerate_faces.size();
  std::vector<PatchFeatures> features;
  for (auto& o : outcomes) {
    accumulate(result.diagnostics, o.diag);
    if (!o.record.skipped) features.push_back(o.record.features);
    result.patches.push_back(std::move(o.record));
  }
  if (features.empty()) throw NumericError("no patch received enough samples; increase n_target");
  result.pooled = pool(features, config.pooling);
  result.final_score = result.pooled.final_score;
  result.timings.patches_ms = elapsed_ms(start);
  result.timings.total_ms = result.timings.patches_ms;
  return result;
}

FmqmResult compute_fmqm(const TexturedMesh& ref, const TexturedMesh& dist, const FmqmConfig& config) {
  const auto start = Clock::now();
  const MeshAssets ref_assets(ref);
  const MeshAssets dist_assets(dist);
  const double index_ms = elapsed_ms(start);
  FmqmResult result = compute_fmqm(ref_assets, dist_assets, config);
  result.timings.index_ms = index_ms;
  result.timings.total_ms = elapsed_ms(start);
  return result;
}

FmqmResult compute_fmqm(const std::filesystem::path& ref_path, const std::filesystem::path& dist_path,
                        const FmqmConfig& config) {
  const auto start = Clock::now();
  auto load = [](const std::filesystem::path& p, const char* role) {
    try {
      return load_mesh(p);
    } catch (const Error& e) {
      // keep the error category; add which input failed
      if (e.kind() == Error::Kind::Io) throw IoError(std::string(role) + " mesh: " + e.what());
      throw Error(e.kind(), std::string(role) + " mesh: " + e.what());
    }
  };
  TexturedMesh ref = load(ref_path, "reference");
  TexturedMesh dist = load(dist_path, "distorted");
  const double load_ms = elapsed_ms(start);
  FmqmResult result = compute_fmqm(ref, dist, config);
  result.timings.load_ms = load_ms;
  result.timings.total_ms = elapsed_ms(start);
  return result;
}

std::string to_string(CenterMode m) { return m == CenterMode::Fps ? "fps" : "random"; }
std::string to_string(PoolingMode m) { return m == PoolingMode::Geometric ? "geometric" : "arithmetic"; }
std::string to_string(ColorSpace s) { return s == ColorSpace::Rgb ? "rgb" : "lab"; }

namespace {

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json config_to_json(const FmqmConfig& c) {
  nlohmann::ordered_json j;
  j["n_target"] = c.n_target;
  j["n_patch"] = c.n_patch;
  j["sigma_base"] = c.sigma_base;
  j["nor_thre"] = c.nor_thre;
  j["tan_thre"] = c.tan_thre;
  j["radius_factor"] = c.radius_factor;
  j["n_color_patch"] = c.n_color_patch;
  j["seed"] = c.seed;
  j["center_mode"] = to_string(c.center_mode);
  j["pooling"] = to_string(c.pooling);
  j["color_space"] = to_string(c.color_space);
  j["stabilizer"] = c.stabilizer;
  j["eps"] = c.eps;
  j["grad_all_samples"] = c.grad_all_samples;
  return j;
}

nlohmann::ordered_json result_to_json(const FmqmResult& r, const FmqmConfig& config) {
  nlohmann::ordered_json det;
  det["final"] = r.final_score;
  det["pooled"] = {{"geo", optional_json(r.pooled.geo)},
                   {"geoGra", optional_json(r.pooled.geo_gra)},
                   {"color", optional_json(r.pooled.color)},
                   {"colorGra", optional_json(r.pooled.color_gra)}};
  det["config"] = config_to_json(config);
  const auto& d = r.diagnostics;
  det["diagnostics"] = {{"patches_requested", d.patches_requested},
                        {"patches_evaluated", d.patches_evaluated},
                        {"patches_skipped", d.patches_skipped},
                        {"total_samples", d.total_samples},
                        {"unreliable_sign_ref", d.unreliable_sign_ref},
                        {"unreliable_sign_dist", d.unreliable_sign_dist},
                        {"on_surface_samples", d.on_surface_samples},
                        {"degenerate_faces", d.degenerate_faces},
                        {"undefined_geo", d.undefined_geo},
                        {"undefined_geoGra", d.undefined_geo_gra},
                        {"undefined_color", d.undefined_color},
                        {"undefined_colorGra", d.undefined_color_gra}};
  auto patches = nlohmann::ordered_json::array();
  for (const auto& p : r.patches) {
    patches.push_back({{"center", p.center_vertex},
                       {"faces", p.face_count},
                       {"area", p.area},
                       {"diagonal", p.diagonal},
                       {"samples", p.samples},
                       {"color_centers", p.color_centers},
                       {"gradient_centers", p.gradient_centers},
                       {"skipped", p.skipped},
                       {"geo", optional_json(p.features.geo)},
                       {"geoGra", optional_json(p.features.geo_gra)},
                       {"color", optional_json(p.features.color)},
                       {"colorGra", optional_json(p.features.color_gra)}});
  }
  det["patches"] = std::move(patches);

  nlohmann::ordered_json doc;
  doc["schema"] = "fmqm-result";
  doc["schema_version"] = kResultSchemaVersion;
  doc["deterministic"] = std::move(det);
  doc["runtime"] = {{"threads", config.threads},
                    {"timings_ms",
                     {{"load", r.timings.load_ms},
                      {"index", r.timings.index_ms},
                      {"patches", r.timings.patches_ms},
                      {"total", r.timings.total_ms}}}};
  return doc;
}

}  // namespace fmqm
