#pragma once

#include "fmqm/patching.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace fmqm {

enum class ColorSpace { Rgb, Lab };
enum class PoolingMode { Geometric, Arithmetic };

struct MomentStats {
  double mean_ref = 0.0;
  double mean_dist = 0.0;
  double std_ref = 0.0;
  double std_dist = 0.0;
  double cross_cov = 0.0;
};

/// Population mean, standard deviation and cross covariance of two equal-length series.
MomentStats moment_stats(std::span<const double> ref, std::span<const double> dist);

struct SsimTerms {
  double mean = 1.0;
  double std = 1.0;
  double cov = 1.0;
  double score = 1.0;  // cube root of the product of the clamped terms
};

/// SSIM-style comparison of two value series from their first and second moments.
/// Each term is stabilised by `c` and clamped to [0,1].
SsimTerms moment_ssim_terms(std::span<const double> ref, std::span<const double> dist, double c);
double moment_ssim(std::span<const double> ref, std::span<const double> dist, double c);

// Channel values fed to the color features: RGB as-is, or CIELAB rescaled so
// that every channel lies in [0,1] (L / 100, (a + 128) / 255, (b + 128) / 255).
using ColorTriple = std::array<double, 3>;
ColorTriple to_feature_space(const Rgb& rgb, ColorSpace space);

struct ChannelWeights {
  std::array<double, 3> w{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  static ChannelWeights uniform() { return {}; }
  static ChannelWeights lab_default() { return {{6.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0}}; }
};

// Per-sample colors of both fields in feature space, aligned with the sample list.
struct ColorSamples {
  std::vector<ColorTriple> ref;
  std::vector<ColorTriple> dist;
};
ColorSamples color_samples(std::span<const FieldSample> samples, ColorSpace space);

/// SDF moments compared after dividing the values by `normaliser` (patch diagonal).
std::optional<double> geo_ssim(std::span<const FieldSample> samples, double normaliser, double c);

/// Root mean square of the gradient cosines over samples where both gradients exist.
std::optional<double> geo_gradient_ssim(std::span<const FieldSample> samples);

/// Per-channel moment SSIM restricted to `unit` (which must include the center).
std::optional<std::array<double, 3>> color_unit_ssim(const ColorSamples& colors, std::span<const std::size_t> unit,
                                                     double c);

struct ColorUnits {
  std::vector<std::size_t> normal;   // includes the center
  std::vector<std::size_t> tangent;  // includes the center
};

/// Normal and tangent units of every center, built from reference nearest points.
std::vector<ColorUnits> gather_units(std::span<const FieldSample> samples, std::span<const std::size_t> centers,
                                     double nor_thre, double tan_thre, double radius);

/// Mean over centers of sqrt(ColorNorSSIM * ColorTanSSIM); centers lacking a
/// usable unit are skipped.
std::optional<double> color_ssim(const ColorSamples& colors, std::span<const ColorUnits> units, double c,
                                 const ChannelWeights& weights);

struct ColorGradient {
  std::array<double, 3> magnitude{};
  std::array<Vec3, 3> direction{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};  // zero when magnitude is 0
};

/// Largest color difference quotient toward the tangent neighbours, per channel.
std::optional<ColorGradient> estimate_color_gradient(std::span<const FieldSample> samples,
                                                     std::span<const ColorTriple> colors, std::size_t center,
                                                     std::span<const std::size_t> tangent_unit);

struct GradientPair {
  ColorGradient ref;
  ColorGradient dist;
};

/// Angular and magnitude agreement of color gradients, combined as sqrt(A * L).
std::optional<double> color_gradient_ssim(std::span<const GradientPair> gradients, double eps,
                                          const ChannelWeights& weights);

struct PatchFeatures {
  std::optional<double> geo;
  std::optional<double> geo_gra;
  std::optional<double> color;
  std::optional<double> color_gra;
};

struct PooledFeatures {
  std::optional<double> geo;
  std::optional<double> geo_gra;
  std::optional<double> color;
  std::optional<double> color_gra;
  double final_score = 0.0;
};

/// Arithmetic mean of each feature over the patches where it is defined, then a
/// geometric (or arithmetic) mean across the features that are defined anywhere.
PooledFeatures pool(std::span<const PatchFeatures> patches, PoolingMode mode);

}  // namespace fmqm
