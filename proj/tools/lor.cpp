// Command-line harness: synthetic data, registration and the experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lor/cli/csv.hpp"
#include "lor/cli/experiments.hpp"
#include "lor/cli/plot.hpp"
#include "lor/error.hpp"
#include "lor/image_io.hpp"
#include "lor/parallel.hpp"
#include "lor/registration.hpp"
#include "lor/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lor;
using namespace lor::cli;

namespace {

struct Common {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
  }
}

ExperimentConfig experiment_config(const std::string& id, const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? default_config(id)
                                          : experiment_config_from_json(load_json(c.config), id);
  if (cfg.id != id) {
    throw Error(ErrorKind::InvalidArgument,
                "config is for experiment '" + cfg.id + "', not '" + id + "'");
  }
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

void save(const fs::path& p, const CsvTable& t) {
  write_csv_file(p, t);
  std::cout << "wrote " << p.string() << '\n';
}

Extent parse_dims(const std::vector<std::size_t>& d) {
  if (d.size() == 2) return Extent::make2(d[0], d[1]);
  if (d.size() == 3) return Extent::make3(d[0], d[1], d[2]);
  throw Error(ErrorKind::InvalidArgument, "--dims takes 2 or 3 values");
}

ImageGrid load_image(const std::string& path) {
  if (fs::path(path).extension() == ".pgm") return read_pgm(path);
  return read_image(path);
}

void write_output_image(const fs::path& header, const ImageGrid& img, bool pgm) {
  write_image(header, img);
  std::cout << "wrote " << header.string() << '\n';
  if (pgm && img.ndim() == 2) {
    auto p = header;
    p.replace_extension(".pgm");
    write_pgm(p, img);
    std::cout << "wrote " << p.string() << '\n';
  }
}

int run_asymmetry(const ExperimentConfig& cfg) {
  const auto rep = run_asymmetry_sweep(cfg);
  save(cfg.out_dir / "asymmetry.csv", rep.table());
  save(cfg.out_dir / "asymmetry_summary.csv", rep.summary_table());
  for (Estimator e : cfg.estimators) {
    if (e != Estimator::GPV || cfg.alphas.size() < 2) continue;
    const auto law = fit_asymmetry_law(rep, e);
    std::printf("gpv: alpha slope %.4f voxel/voxel, R^2 %.3f, max |sigma slope| / alpha slope %.3f\n",
                law.alpha_slope, law.alpha_r2, law.max_sigma_ratio);
  }
  return 0;
}

int run_scales(const ExperimentConfig& cfg) {
  const auto rep = run_scale_sweep(cfg);
  save(cfg.out_dir / "scales.csv", rep.table());
  save(cfg.out_dir / "scales_summary.csv", rep.summary_table());
  return 0;
}

int run_jointreport(const ExperimentConfig& cfg) {
  const auto rep = run_joint_density_report(cfg);
  for (const auto& p : write_joint_density_report(rep, cfg.out_dir)) {
    std::cout << "wrote " << p.string() << '\n';
  }
  for (const auto& e : rep.entries) {
    std::printf("%s sigma=%g alpha=%g JSD=%.6g\n", to_string(e.estimator).c_str(), e.sigma,
                e.alpha, e.jsd);
  }
  return 0;
}

int run_benchmark(const ExperimentConfig& cfg) {
  const auto rep = run_bench(cfg);
  save(cfg.out_dir / "bench.csv", rep.table());
  std::printf("N=%zu M=%zu threads=%d evaluations=%d\n", cfg.samples, cfg.bins, rep.threads,
              cfg.evaluations);
  std::printf("%-8s %12s %10s %12s %9s\n", "measure", "seconds", "ratio", "theoretical", "overhead");
  for (const auto& t : rep.timings) {
    std::printf("%-8s %12.5f %10.3f %12.3f %9.3f\n", t.name.c_str(), t.seconds, t.ratio,
                t.theoretical, t.overhead);
  }
  std::printf("memory model: GPV %.0f bytes, PW %.0f bytes; PW pair cache here %.0f bytes\n",
              rep.gpv_model_bytes, rep.pw_model_bytes, rep.pw_cache_bytes);
  return 0;
}

int dispatch_experiment(const std::string& id, const Common& c) {
  const ExperimentConfig cfg = experiment_config(id, c);
  if (id == "asymmetry") return run_asymmetry(cfg);
  if (id == "scales") return run_scales(cfg);
  if (id == "jointreport") return run_jointreport(cfg);
  if (id == "bench") return run_benchmark(cfg);
  throw Error(ErrorKind::InvalidArgument, "unknown experiment '" + id + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally orderless registration toolkit"};
  app.require_subcommand(0, 1);
  Common common;
  std::string experiment;
  app.add_option("--experiment", experiment,
                 "Experiment to run without a subcommand (asymmetry, scales, jointreport, bench)");
  app.add_option("--config", common.config, "JSON configuration file");
  app.add_option("--out", common.out, "Output directory or file");
  app.add_option("--threads", common.threads, "Worker threads (0 = hardware)");
  app.add_option("--seed", common.seed, "Random seed override");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic image or image pair");
  std::string kind = "blob", pair_kind = "remap";
  std::vector<std::size_t> dims{64, 64};
  std::vector<double> center, direction{1.0, 0.0, 0.0};
  double std_dev = 5.0, magnitude = 1.0, smoothing = 10.0;
  bool pgm = false;
  gen->add_option("--kind", kind, "blob | gradient | random | smooth | pair")
      ->check(CLI::IsMember({"blob", "gradient", "random", "smooth", "pair"}));
  gen->add_option("--dims", dims, "Grid size, 2 or 3 values")->delimiter(',');
  gen->add_option("--center", center, "Blob centre in voxels (default: grid centre)")->delimiter(',');
  gen->add_option("--std", std_dev, "Blob standard deviation in voxels");
  gen->add_option("--direction", direction, "Gradient direction")->delimiter(',');
  gen->add_option("--magnitude", magnitude, "Gradient magnitude");
  gen->add_option("--smoothing", smoothing, "Smoothing of random fields in voxels");
  gen->add_option("--pair-kind", pair_kind, "remap | gradient | blobs | ramps (with --kind pair)");
  gen->add_flag("--pgm", pgm, "Also write 8-bit PGM for 2D images");

  // register
  auto* reg = app.add_subcommand("register", "Register a moving image onto a fixed image");
  std::string moving, fixed, transform = "translation";
  std::size_t intervals = 4;
  reg->add_option("--moving", moving, "Moving image (.json header or .pgm)")->required();
  reg->add_option("--fixed", fixed, "Fixed image (.json header or .pgm)")->required();
  reg->add_option("--transform", transform, "translation | rigid | ffd")
      ->check(CLI::IsMember({"translation", "rigid", "ffd"}));
  reg->add_option("--intervals", intervals, "FFD cells per axis");

  // experiments
  auto* asym = app.add_subcommand("asymmetry", "Optimum offsets of M(A o phi, B) and M(B, A o phi)");
  auto* scales = app.add_subcommand("scales", "Measure along a translation sweep per scale triple");
  auto* joint = app.add_subcommand("jointreport", "Joint densities of both argument orders and their JSD");
  auto* bench = app.add_subcommand("bench", "Per-evaluation timing against SSD and the flop model");

  // plot
  auto* plot = app.add_subcommand("plot", "Render SVG plots from experiment or histogram CSVs");
  std::vector<std::string> csvs;
  plot->add_option("csv", csvs, "CSV files")->required();

  for (auto* sub : {gen, reg, asym, scales, joint, bench, plot}) {
    sub->add_option("--config", common.config, "JSON configuration file");
    sub->add_option("--out", common.out, "Output directory or file");
    sub->add_option("--threads", common.threads, "Worker threads (0 = hardware)");
    sub->add_option("--seed", common.seed, "Random seed override");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (common.threads > 0) set_thread_count(common.threads);

    if (*gen) {
      const Extent e = parse_dims(dims);
      const fs::path out = common.out.empty() ? fs::path("image.json") : fs::path(common.out);
      const std::uint64_t seed = common.seed.value_or(1);
      if (kind == "pair") {
        PairSpec spec;
        spec.kind = pair_kind_from_string(pair_kind);
        spec.dims = {e.n[0], e.n[1], e.n[2]};
        spec.smoothing = smoothing;
        const ImagePair p = make_pair(spec, seed);
        write_output_image(out / "a.json", p.a, pgm);
        write_output_image(out / "b.json", p.b, pgm);
        return 0;
      }
      ImageGrid img;
      if (kind == "blob") {
        Vec3 c{0.5 * static_cast<double>(e.n[0] - 1), 0.5 * static_cast<double>(e.n[1] - 1),
               0.5 * static_cast<double>(e.n[2] - 1)};
        for (std::size_t k = 0; k < center.size() && k < 3; ++k) c[k] = center[k];
        img = gen_gaussian_blob(e, c, std_dev);
      } else if (kind == "gradient") {
        Vec3 d{0.0, 0.0, 0.0};
        for (std::size_t k = 0; k < direction.size() && k < 3; ++k) d[k] = direction[k];
        img = gen_linear_gradient(e, d, magnitude);
      } else if (kind == "random") {
        img = gen_random_image(e, seed);
      } else {
        img = gen_smooth_random(e, seed, smoothing);
      }
      write_output_image(out, img, pgm);
      return 0;
    }

    if (*reg) {
      ObjectiveConfig oc;
      OptimizerOptions opts;
      if (!common.config.empty()) {
        const auto j = load_json(common.config);
        oc = objective_config_from_json(j.contains("objective") ? j["objective"] : j);
        if (j.contains("optimizer")) opts = optimizer_options_from_json(j["optimizer"]);
      }
      const ImageGrid m = load_image(moving), f = load_image(fixed);
      Transform init = transform == "translation" ? Transform::translation(f.ndim())
                       : transform == "rigid"     ? Transform::rigid(f.extent())
                                                  : Transform::ffd(f.extent(), {intervals, intervals, intervals});
      const RegistrationResult r = register_images(oc, m, f, init, opts);
      const std::string text = to_json(r, oc).dump(2);
      if (common.out.empty()) {
        std::cout << text << '\n';
      } else {
        const fs::path p(common.out);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream(p) << text << '\n';
        std::cout << "wrote " << p.string() << '\n';
      }
      return 0;
    }

    if (*plot) {
      const fs::path out = common.out.empty() ? fs::path("plots") : fs::path(common.out);
      for (const auto& csv : csvs) {
        for (const auto& p : emit_plots(csv, out)) std::cout << "wrote " << p.string() << '\n';
      }
      return 0;
    }

    if (*asym) return dispatch_experiment("asymmetry", common);
    if (*scales) return dispatch_experiment("scales", common);
    if (*joint) return dispatch_experiment("jointreport", common);
    if (*bench) return dispatch_experiment("bench", common);

    if (!experiment.empty()) return dispatch_experiment(experiment, common);
    if (!common.config.empty()) {
      const auto j = load_json(common.config);
      if (j.contains("experiment")) return dispatch_experiment(j["experiment"], common);
    }
    std::cerr << app.help() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
