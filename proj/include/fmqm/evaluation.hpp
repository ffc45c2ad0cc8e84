#pragma once

#include <json.hpp>

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fmqm {

double pearson(std::span<const double> x, std::span<const double> y);

/// Fractional ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> fractional_ranks(std::span<const double> x);

double spearman(std::span<const double> x, std::span<const double> y);

double rmse(std::span<const double> pred, std::span<const double> target);

/// s = b1 + (b2 - b1) / (1 + exp(-(x - b3) / |b4|))
struct LogisticFit {
  std::array<double, 4> beta{};
  double sse = 0.0;
  std::vector<double> mapped;

  double operator()(double x) const;
};

/// Least-squares 4-parameter logistic via multi-start Gauss-Newton.
LogisticFit fit_logistic(std::span<const double> objective, std::span<const double> mos);

struct EvaluationReport {
  std::size_t n = 0;
  double plcc = 0.0;      // after logistic mapping
  double srocc = 0.0;     // on raw scores
  double rmse = 0.0;      // after logistic mapping
  double plcc_raw = 0.0;  // before mapping
  LogisticFit fit;
};

EvaluationReport evaluate(std::span<const double> objective, std::span<const double> mos);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
std::string report_to_table(const EvaluationReport& report);

struct ScoredSample {
  std::string id;
  double objective = 0.0;
  double mos = 0.0;
};

// CSV ingestion. A first row whose numeric columns do not parse is a header.

/// Rows `sample_id,objective_score,mos`.
std::vector<ScoredSample> read_score_table(const std::filesystem::path& path);

/// Joins a score file (`id,<score>[,...]`, using the `column` header when present,
/// otherwise the second column) with a MOS file (`id,mos`) on the id.
std::vector<ScoredSample> read_scores_and_mos(const std::filesystem::path& scores, const std::filesystem::path& mos,
                                              const std::string& column = "fmqm");

}  // namespace fmqm
