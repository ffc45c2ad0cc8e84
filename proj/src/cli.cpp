#include "fmqm/cli.hpp"

#include "fmqm/distortions.hpp"
#include "fmqm/error.hpp"
#include "fmqm/evaluation.hpp"
#include "fmqm/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fmqm::cli {

namespace fs = std::filesystem;

namespace {

void add_config_options(CLI::App& cmd, FmqmConfig& cfg, std::string& pooling, std::string& color_space,
                        std::string& center_mode) {
  cmd.add_option("--n-target", cfg.n_target, "target number of field samples")->capture_default_str();
  cmd.add_option("--n-patch", cfg.n_patch, "number of local patches")->capture_default_str();
  cmd.add_option("--sigma-base", cfg.sigma_base, "offset spread relative to the patch diagonal")
      ->capture_default_str();
  cmd.add_option("--nor-thre", cfg.nor_thre, "normal unit cosine threshold")->capture_default_str();
  cmd.add_option("--tan-thre", cfg.tan_thre, "tangent unit cosine threshold")->capture_default_str();
  cmd.add_option("--radius-factor", cfg.radius_factor, "unit radius relative to the patch diagonal")
      ->capture_default_str();
  cmd.add_option("--n-color-patch", cfg.n_color_patch, "color unit centers per patch")->capture_default_str();
  cmd.add_option("--pool", pooling, "feature pooling")
      ->check(CLI::IsMember({"geometric", "arithmetic"}))
      ->capture_default_str();
  cmd.add_option("--color-space", color_space, "color space of the color features")
      ->check(CLI::IsMember({"rgb", "lab"}))
      ->capture_default_str();
  cmd.add_option("--centers", center_mode, "patch center selection")
      ->check(CLI::IsMember({"fps", "random"}))
      ->capture_default_str();
  cmd.add_flag("--grad-all-samples", cfg.grad_all_samples, "estimate color gradients at every sample");
  cmd.add_option("--threads", cfg.threads, "worker threads (0 = all cores)")->capture_default_str();
}

void finish_config(FmqmConfig& cfg, const std::string& pooling, const std::string& color_space,
                   const std::string& center_mode, const CLI::Option* seed_opt) {
  cfg.pooling = pooling == "arithmetic" ? PoolingMode::Arithmetic : PoolingMode::Geometric;
  cfg.color_space = color_space == "lab" ? ColorSpace::Lab : ColorSpace::Rgb;
  cfg.center_mode = center_mode == "random" ? CenterMode::Random : CenterMode::Fps;
  if (seed_opt->count() == 0) {
    if (const char* env = std::getenv("FMQM_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw InvalidArgument(std::string("FMQM_SEED is not an unsigned integer: ") + env);
      }
    }
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_value(const std::optional<double>& v) { return v ? fixed(*v, 9) : "nan"; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

struct PairRow {
  std::string id;
  fs::path ref;
  fs::path dist;
};

std::vector<PairRow> read_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<PairRow> rows;
  std::string line;
  std::size_t line_no = 0;
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path candidate(p);
    return candidate.is_absolute() ? candidate : base / candidate;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string s; std::getline(ls, s, ',');) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      f.push_back(b == std::string::npos ? "" : s.substr(b, e - b + 1));
    }
    if (f.size() != 3) throw ParseError(path.string(), line_no, "expected id,ref_path,dist_path");
    if (rows.empty() && f[0] == "id" && f[1] == "ref_path") continue;
    rows.push_back({f[0], resolve(f[1]), resolve(f[2])});
  }
  return rows;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::Usage:
    case Error::Kind::Invalid: return kUsage;
    case Error::Kind::Io:
    case Error::Kind::Parse: return kIo;
    case Error::Kind::Numeric: return kNumeric;
  }
  return kNumeric;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Field-based textured mesh quality metric"};
  app.name("fmqm");
  app.require_subcommand(1);

  FmqmConfig cfg;
  std::string pooling = "geometric";
  std::string color_space = "rgb";
  std::string center_mode = "fps";

  // compare
  auto* compare = app.add_subcommand("compare", "score a distorted mesh against a reference");
  fs::path ref_path;
  fs::path dist_path;
  fs::path result_path;
  compare->add_option("--ref", ref_path, "reference OBJ")->required();
  compare->add_option("--dist", dist_path, "distorted OBJ")->required();
  compare->add_option("--out", result_path, "write the full result as JSON");
  auto* compare_seed = compare->add_option("--seed", cfg.seed, "sampling seed (falls back to FMQM_SEED)");
  add_config_options(*compare, cfg, pooling, color_space, center_mode);

  // batch
  auto* batch = app.add_subcommand("batch", "score every pair listed in a CSV file");
  fs::path pairs_path;
  fs::path scores_out;
  batch->add_option("--pairs", pairs_path, "CSV rows id,ref_path,dist_path")->required();
  batch->add_option("--out", scores_out, "output CSV")->required();
  auto* batch_seed = batch->add_option("--seed", cfg.seed, "sampling seed (falls back to FMQM_SEED)");
  add_config_options(*batch, cfg, pooling, color_space, center_mode);

  // distort
  auto* distort = app.add_subcommand("distort", "write a synthetically distorted copy of a mesh");
  distort->require_subcommand(1);
  fs::path distort_in;
  fs::path distort_out;
  double gn_sigma = 0.01;
  std::uint64_t gn_seed = 1;
  int qp_bits = 10;
  int ds_factor = 4;
  auto* gn = distort->add_subcommand("gn", "vertex Gaussian noise");
  gn->add_option("--sigma", gn_sigma, "noise std as a fraction of the bounding box diagonal")->capture_default_str();
  gn->add_option("--seed", gn_seed, "noise seed")->capture_default_str();
  auto* qp = distort->add_subcommand("qp", "position quantization");
  qp->add_option("--bits", qp_bits, "bits per coordinate")->check(CLI::Range(1, 24))->capture_default_str();
  auto* ds = distort->add_subcommand("ds", "texture downsampling");
  ds->add_option("--factor", ds_factor, "box filter factor")->check(CLI::PositiveNumber)->capture_default_str();
  for (auto* sub : {gn, qp, ds}) {
    sub->add_option("--in", distort_in, "input OBJ")->required();
    sub->add_option("--out", distort_out, "output OBJ (MTL and PNG are written alongside)")->required();
  }

  // eval
  auto* eval = app.add_subcommand("eval", "correlate objective scores with subjective scores");
  fs::path eval_scores;
  fs::path eval_mos;
  fs::path eval_out;
  std::string eval_column = "fmqm";
  eval->add_option("--scores", eval_scores, "scores CSV (id,score,...) or id,objective_score,mos")->required();
  eval->add_option("--mos", eval_mos, "MOS CSV (id,mos); omit when --scores already holds the mos column");
  eval->add_option("--column", eval_column, "score column to evaluate")->capture_default_str();
  eval->add_option("--out", eval_out, "report JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*compare) {
      finish_config(cfg, pooling, color_space, center_mode, compare_seed);
      const FmqmResult result = compute_fmqm(ref_path, dist_path, cfg);
      out << fixed(result.final_score, 9) << '\n';
      if (!result_path.empty()) write_text(result_path, result_to_json(result, cfg).dump(2) + "\n");
      if (result.diagnostics.unreliable_sign_ref + result.diagnostics.unreliable_sign_dist > 0) {
        err << "note: " << result.diagnostics.unreliable_sign_ref + result.diagnostics.unreliable_sign_dist
            << " samples had an undetermined SDF sign\n";
      }
    } else if (*batch) {
      finish_config(cfg, pooling, color_space, center_mode, batch_seed);
      const auto rows = read_pairs(pairs_path);
      std::ostringstream csv;
      csv << "id,fmqm,geo,geoGra,color,colorGra\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const FmqmResult r = compute_fmqm(rows[i].ref, rows[i].dist, cfg);
        csv << rows[i].id << ',' << fixed(r.final_score, 9) << ',' << csv_value(r.pooled.geo) << ','
            << csv_value(r.pooled.geo_gra) << ',' << csv_value(r.pooled.color) << ','
            << csv_value(r.pooled.color_gra) << '\n';
        err << "[" << i + 1 << "/" << rows.size() << "] " << rows[i].id << '\n';
      }
      write_text(scores_out, csv.str());
    } else if (*distort) {
      TexturedMesh mesh = load_mesh(distort_in);
      if (*gn) {
        mesh = vertex_gaussian_noise(mesh, gn_sigma, gn_seed);
      } else if (*qp) {
        mesh = quantize_positions(mesh, qp_bits);
      } else {
        mesh.texture = downsample_texture(mesh.texture, ds_factor);
      }
      save_mesh(mesh, distort_out);
    } else if (*eval) {
      const auto table =
          eval_mos.empty() ? read_score_table(eval_scores) : read_scores_and_mos(eval_scores, eval_mos, eval_column);
      std::vector<double> obj;
      std::vector<double> mos;
      for (const auto& s : table) {
        obj.push_back(s.objective);
        mos.push_back(s.mos);
      }
      const EvaluationReport report = evaluate(obj, mos);
      out << report_to_table(report);
      if (!eval_out.empty()) write_text(eval_out, report_to_json(report).dump(2) + "\n");
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace fmqm::cli
