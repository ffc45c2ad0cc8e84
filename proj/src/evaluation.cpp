#include "fmqm/evaluation.hpp"

#include "fmqm/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace fmqm {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> y, std::size_t min_len,
                         const char* what) {
  if (x.size() != y.size()) throw InvalidArgument(std::string(what) + ": length mismatch");
  if (x.size() < min_len)
    throw InvalidArgument(std::string(what) + ": need at least " + std::to_string(min_len) + " pairs");
}

double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 3, "pearson");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i] - mx;
    const double b = y[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw NumericError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> fractional_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 3, "spearman");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pearson(rx, ry);
}

double rmse(std::span<const double> pred, std::span<const double> target) {
  require_same_length(pred, target, 1, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

namespace {

using Beta = Eigen::Vector4d;

double logistic(const Beta& b, double x) {
  const double z = (x - b[2]) / std::abs(b[3]);
  return b[0] + (b[1] - b[0]) / (1.0 + std::exp(-z));
}

double sum_sq(const Beta& b, std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - logistic(b, x[i]);
    s += r * r;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

// Gauss-Newton with step halving; stops once the step norm falls below 1e-10.
Beta gauss_newton(Beta b, std::span<const double> x, std::span<const double> y) {
  constexpr int kIterations = 200;
  const auto n = static_cast<Eigen::Index>(x.size());
  double sse = sum_sq(b, x, y);
  for (int it = 0; it < kIterations; ++it) {
    Eigen::MatrixXd jac(n, 4);
    Eigen::VectorXd res(n);
    const double s = std::abs(b[3]);
    const double sgn = b[3] < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = (x[i] - b[2]) / s;
      const double g = 1.0 / (1.0 + std::exp(-z));
      const double dg = g * (1.0 - g);
      jac(i, 0) = 1.0 - g;
      jac(i, 1) = g;
      jac(i, 2) = (b[1] - b[0]) * dg * (-1.0 / s);
      jac(i, 3) = (b[1] - b[0]) * dg * (-z / s) * sgn;
      res[i] = y[i] - (b[0] + (b[1] - b[0]) * g);
    }
    Eigen::Matrix4d jtj = jac.transpose() * jac;
    // a trace-scaled ridge keeps flat directions solvable
    jtj.diagonal().array() += 1e-12 * (jtj.trace() + 1.0);
    const Beta step = jtj.ldlt().solve(jac.transpose() * res);
    if (!step.allFinite()) break;

    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40 && !accepted; ++h, scale *= 0.5) {
      const Beta trial = b + scale * step;
      if (trial[3] == 0.0) continue;
      const double t = sum_sq(trial, x, y);
      if (t <= sse) {
        b = trial;
        sse = t;
        accepted = true;
      }
    }
    if (!accepted || scale * step.norm() < 1e-10) break;
  }
  return b;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double stddev(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace

double LogisticFit::operator()(double x) const { return logistic(Beta(beta[0], beta[1], beta[2], beta[3]), x); }

LogisticFit fit_logistic(std::span<const double> objective, std::span<const double> mos) {
  require_same_length(objective, mos, 5, "fit_logistic");
  const double sx = stddev(objective);
  const double sy = stddev(mos);
  if (!(sx > 0.0)) throw NumericError("fit_logistic: objective scores are constant");
  if (!(sy > 0.0)) throw NumericError("fit_logistic: subjective scores are constant");

  const std::vector<double> xs(objective.begin(), objective.end());
  const double ymin = *std::min_element(mos.begin(), mos.end());
  const double ymax = *std::max_element(mos.begin(), mos.end());
  const bool increasing = pearson(objective, mos) >= 0.0;

  Beta best = Beta::Zero();
  double best_sse = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 8; ++k) {
    Beta start(increasing ? ymin : ymax, increasing ? ymax : ymin, quantile(xs, k / 9.0), sx);
    const Beta b = gauss_newton(start, objective, mos);
    const double sse = sum_sq(b, objective, mos);
    if (sse < best_sse) {
      best_sse = sse;
      best = b;
    }
  }
  LogisticFit fit;
  fit.beta = {best[0], best[1], best[2], std::abs(best[3])};
  fit.sse = best_sse;
  fit.mapped.reserve(objective.size());
  for (double x : objective) fit.mapped.push_back(fit(x));
  return fit;
}

EvaluationReport evaluate(std::span<const double> objective, std::span<const double> mos) {
  EvaluationReport r;
  r.n = objective.size();
  r.plcc_raw = pearson(objective, mos);
  r.srocc = spearman(objective, mos);
  r.fit = fit_logistic(objective, mos);
  r.plcc = pearson(r.fit.mapped, mos);
  r.rmse = rmse(r.fit.mapped, mos);
  return r;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["plcc"] = r.plcc;
  j["srocc"] = r.srocc;
  j["rmse"] = r.rmse;
  j["plcc_raw"] = r.plcc_raw;
  j["logistic"] = {{"b1", r.fit.beta[0]}, {"b2", r.fit.beta[1]}, {"b3", r.fit.beta[2]}, {"b4", r.fit.beta[3]}};
  return j;
}

std::string report_to_table(const EvaluationReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "metric" << std::right << std::setw(12) << "value" << '\n';
  os << std::fixed << std::setprecision(6);
  os << std::left << std::setw(10) << "n" << std::right << std::setw(12) << r.n << '\n';
  os << std::left << std::setw(10) << "PLCC" << std::right << std::setw(12) << r.plcc << '\n';
  os << std::left << std::setw(10) << "SROCC" << std::right << std::setw(12) << r.srocc << '\n';
  os << std::left << std::setw(10) << "RMSE" << std::right << std::setw(12) << r.rmse << '\n';
  return os.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ls(line);
  while (std::getline(ls, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& v) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end && std::isfinite(v);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

CsvTable read_csv(const std::filesystem::path& path, std::size_t min_columns) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv(line);
    if (fields.size() < min_columns)
      throw ParseError(path.string(), line_no,
                       "expected at least " + std::to_string(min_columns) + " columns, got " +
                           std::to_string(fields.size()));
    if (first) {
      first = false;
      double v = 0.0;
      if (!parse_number(fields[1], v)) {
        t.header = std::move(fields);
        continue;
      }
    }
    t.rows.emplace_back(line_no, std::move(fields));
  }
  return t;
}

double number_at(const std::filesystem::path& path, std::size_t line, const std::vector<std::string>& fields,
                 std::size_t col) {
  double v = 0.0;
  if (col >= fields.size() || !parse_number(fields[col], v))
    throw ParseError(path.string(), line, "column " + std::to_string(col + 1) + " is not a number");
  return v;
}

}  // namespace

std::vector<ScoredSample> read_score_table(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path, 3);
  std::vector<ScoredSample> out;
  for (const auto& [line, f] : t.rows) out.push_back({f[0], number_at(path, line, f, 1), number_at(path, line, f, 2)});
  return out;
}

std::vector<ScoredSample> read_scores_and_mos(const std::filesystem::path& scores, const std::filesystem::path& mos,
                                              const std::string& column) {
  const CsvTable st = read_csv(scores, 2);
  std::size_t col = 1;
  if (!st.header.empty()) {
    const auto it = std::find(st.header.begin(), st.header.end(), column);
    if (it != st.header.end()) col = static_cast<std::size_t>(it - st.header.begin());
  }
  const CsvTable mt = read_csv(mos, 2);
  std::map<std::string, double> mos_by_id;
  for (const auto& [line, f] : mt.rows) {
    // a three-column file is `id,objective,mos`
    const std::size_t mcol = f.size() >= 3 ? 2 : 1;
    if (!mos_by_id.emplace(f[0], number_at(mos, line, f, mcol)).second)
      throw ParseError(mos.string(), line, "duplicate id '" + f[0] + "'");
  }
  std::vector<ScoredSample> out;
  for (const auto& [line, f] : st.rows) {
    const auto it = mos_by_id.find(f[0]);
    if (it == mos_by_id.end()) throw ParseError(scores.string(), line, "id '" + f[0] + "' has no MOS entry");
    out.push_back({f[0], number_at(scores, line, f, col), it->second});
  }
  return out;
}

}  // namespace fmqm
