#include "fmqm/features.hpp"

#include "fmqm/error.hpp"

#include <algorithm>
#include <cmath>

namespace fmqm {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

MomentStats moment_stats(std::span<const double> ref, std::span<const double> dist) {
  if (ref.size() != dist.size()) throw InvalidArgument("moment statistics need equal-length series");
  if (ref.empty()) throw InvalidArgument("moment statistics need at least one value");
  const double n = static_cast<double>(ref.size());
  MomentStats m;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    m.mean_ref += ref[i];
    m.mean_dist += dist[i];
  }
  m.mean_ref /= n;
  m.mean_dist /= n;
  double var_r = 0.0;
  double var_d = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double a = ref[i] - m.mean_ref;
    const double b = dist[i] - m.mean_dist;
    var_r += a * a;
    var_d += b * b;
    m.cross_cov += a * b;
  }
  m.std_ref = std::sqrt(var_r / n);
  m.std_dist = std::sqrt(var_d / n);
  m.cross_cov /= n;
  return m;
}

SsimTerms moment_ssim_terms(std::span<const double> ref, std::span<const double> dist, double c) {
  if (ref.size() != dist.size()) throw InvalidArgument("moment_ssim: length mismatch");
  if (ref.size() < 2) throw InvalidArgument("moment_ssim: need at least 2 values");
  const MomentStats m = moment_stats(ref, dist);
  SsimTerms t;
  t.mean = clamp01((2.0 * m.mean_ref * m.mean_dist + c) / (m.mean_ref * m.mean_ref + m.mean_dist * m.mean_dist + c));
  t.std = clamp01((2.0 * m.std_ref * m.std_dist + c) / (m.std_ref * m.std_ref + m.std_dist * m.std_dist + c));
  t.cov = clamp01((m.cross_cov + c) / (m.std_ref * m.std_dist + c));
  t.score = std::cbrt(t.mean * t.std * t.cov);
  return t;
}

double moment_ssim(std::span<const double> ref, std::span<const double> dist, double c) {
  return moment_ssim_terms(ref, dist, c).score;
}

ColorTriple to_feature_space(const Rgb& rgb, ColorSpace space) {
  if (space == ColorSpace::Rgb) return {rgb.r, rgb.g, rgb.b};
  const Lab lab = rgb_to_lab(rgb);
  return {clamp01(lab.l / 100.0), clamp01((lab.a + 128.0) / 255.0), clamp01((lab.b + 128.0) / 255.0)};
}

ColorSamples color_samples(std::span<const FieldSample> samples, ColorSpace space) {
  ColorSamples out;
  out.ref.reserve(samples.size());
  out.dist.reserve(samples.size());
  for (const auto& s : samples) {
    out.ref.push_back(to_feature_space(s.ncf_ref, space));
    out.dist.push_back(to_feature_space(s.ncf_dist, space));
  }
  return out;
}

std::optional<double> geo_ssim(std::span<const FieldSample> samples, double normaliser, double c) {
  if (samples.size() < 2 || !(normaliser > 0.0)) return std::nullopt;
  std::vector<double> ref(samples.size());
  std::vector<double> dist(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ref[i] = samples[i].sdf_ref / normaliser;
    dist[i] = samples[i].sdf_dist / normaliser;
  }
  return moment_ssim(ref, dist, c);
}

std::optional<double> geo_gradient_ssim(std::span<const FieldSample> samples) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (!s.grad_ref || !s.grad_dist) continue;
    const double d = s.grad_ref->dot(*s.grad_dist);
    sum += d * d;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return clamp01(std::sqrt(sum / static_cast<double>(n)));
}

std::optional<std::array<double, 3>> color_unit_ssim(const ColorSamples& colors, std::span<const std::size_t> unit,
                                                     double c) {
  if (unit.size() < 2) return std::nullopt;
  std::array<double, 3> out{};
  std::vector<double> ref(unit.size());
  std::vector<double> dist(unit.size());
  for (int ch = 0; ch < 3; ++ch) {
    for (std::size_t k = 0; k < unit.size(); ++k) {
      ref[k] = colors.ref[unit[k]][ch];
      dist[k] = colors.dist[unit[k]][ch];
    }
    out[ch] = moment_ssim(ref, dist, c);
  }
  return out;
}

std::vector<ColorUnits> gather_units(std::span<const FieldSample> samples, std::span<const std::size_t> centers,
                                     double nor_thre, double tan_thre, double radius) {
  std::vector<ColorUnits> units;
  units.reserve(centers.size());
  for (std::size_t center : centers) {
    ColorUnits u;
    u.normal = gather_normal_unit(samples, center, nor_thre, radius);
    u.tangent = gather_tangent_unit(samples, center, tan_thre, radius);
    u.normal.insert(u.normal.begin(), center);
    u.tangent.insert(u.tangent.begin(), center);
    units.push_back(std::move(u));
  }
  return units;
}

std::optional<double> color_ssim(const ColorSamples& colors, std::span<const ColorUnits> units, double c,
                                 const ChannelWeights& weights) {
  double sum = 0.0;
  std::size_t valid = 0;
  for (const auto& u : units) {
    const auto nor = color_unit_ssim(colors, u.normal, c);
    const auto tan = color_unit_ssim(colors, u.tangent, c);
    if (!nor || !tan) continue;
    double nor_mean = 0.0;
    double tan_mean = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      nor_mean += weights.w[ch] * (*nor)[ch];
      tan_mean += weights.w[ch] * (*tan)[ch];
    }
    sum += std::sqrt(clamp01(nor_mean) * clamp01(tan_mean));
    ++valid;
  }
  if (valid == 0) return std::nullopt;
  return clamp01(sum / static_cast<double>(valid));
}

std::optional<ColorGradient> estimate_color_gradient(std::span<const FieldSample> samples,
                                                     std::span<const ColorTriple> colors, std::size_t center,
                                                     std::span<const std::size_t> tangent_unit) {
  if (tangent_unit.empty()) return std::nullopt;
  ColorGradient g;
  const Vec3& p = samples[center].position;
  for (int ch = 0; ch < 3; ++ch) {
    double best = -1.0;
    std::size_t arg = tangent_unit.front();
    for (std::size_t idx : tangent_unit) {
      const double len = (samples[idx].position - p).norm();
      if (!(len > 0.0)) continue;
      const double q = std::abs(colors[idx][ch] - colors[center][ch]) / len;
      if (q > best || (q == best && idx < arg)) {
        best = q;
        arg = idx;
      }
    }
    if (best <= 0.0) continue;
    g.magnitude[ch] = best;
    const double delta = colors[arg][ch] - colors[center][ch];
    g.direction[ch] = (delta < 0.0 ? -1.0 : 1.0) * (samples[arg].position - p).normalized();
  }
  return g;
}

std::optional<double> color_gradient_ssim(std::span<const GradientPair> gradients, double eps,
                                          const ChannelWeights& weights) {
  if (gradients.empty()) return std::nullopt;
  const double n = static_cast<double>(gradients.size());
  double angular = 0.0;
  double magnitude = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    double dot2 = 0.0;
    double ratio = 0.0;
    for (const auto& gp : gradients) {
      const double mr = gp.ref.magnitude[ch];
      const double md = gp.dist.magnitude[ch];
      double dot = 0.0;
      if (mr > 0.0 && md > 0.0) {
        dot = gp.ref.direction[ch].dot(gp.dist.direction[ch]);
      } else if (mr == 0.0 && md == 0.0) {
        dot = 1.0;
      }
      dot2 += dot * dot;
      ratio += std::abs(mr * mr - md * md) / (mr * mr + md * md + eps);
    }
    angular += weights.w[ch] * clamp01(std::sqrt(dot2 / n));
    magnitude += weights.w[ch] * clamp01(1.0 - std::sqrt(ratio / n));
  }
  return clamp01(std::sqrt(clamp01(angular) * clamp01(magnitude)));
}

PooledFeatures pool(std::span<const PatchFeatures> patches, PoolingMode mode) {
  if (patches.empty()) throw InvalidArgument("pooling needs at least one patch");
  auto mean_of = [&](auto member) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : patches) {
      if (const auto& v = p.*member) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return clamp01(sum / static_cast<double>(n));
  };
  PooledFeatures out;
  out.geo = mean_of(&PatchFeatures::geo);
  out.geo_gra = mean_of(&PatchFeatures::geo_gra);
  out.color = mean_of(&PatchFeatures::color);
  out.color_gra = mean_of(&PatchFeatures::color_gra);

  std::vector<double> defined;
  for (const auto& f : {out.geo, out.geo_gra, out.color, out.color_gra}) {
    if (f) defined.push_back(*f);
  }
  if (defined.empty()) throw NumericError("every feature is undefined on every patch");
  const double k = static_cast<double>(defined.size());
  if (mode == PoolingMode::Geometric) {
    double prod = 1.0;
    for (double v : defined) prod *= v;
    out.final_score = clamp01(std::pow(prod, 1.0 / k));
  } else {
    double sum = 0.0;
    for (double v : defined) sum += v;
    out.final_score = clamp01(sum / k);
  }
  return out;
}

}  // namespace fmqm
