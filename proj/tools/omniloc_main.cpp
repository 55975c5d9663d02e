#include "omniloc/geometry.hpp"
#include "omniloc/io.hpp"
#include "omniloc/optimizer.hpp"
#include "omniloc/parallel.hpp"
#include "omniloc/pipeline.hpp"
#include "omniloc/random.hpp"
#include "omniloc/render.hpp"
#include "omniloc/sampler.hpp"

#include <CLI11.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace omniloc;

constexpr int kExitBadInput = 2;
constexpr int kExitLocalizationFailed = 3;

double time_call(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median_time(int repeat, const std::function<void()>& fn) {
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(repeat));
  for (int i = 0; i < repeat; ++i) times.push_back(time_call(fn));
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

struct LocalizeArgs {
  std::string cloud_path;
  std::string image_path;
  std::string config_path;
  std::string out_path = "result.json";
  std::string dump_projection;
  std::string dump_surface;
  int surface_res = 32;
  double surface_z = std::numeric_limits<double>::quiet_NaN();
  bool gravity_known = false;
  bool omit_timings = false;
  bool seed_given = false;
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_localize(const LocalizeArgs& args) {
  set_max_threads(args.threads);

  PointCloud cloud;
  Panorama image;
  LocalizeConfig config = LocalizeConfig::defaults(args.gravity_known);
  try {
    cloud = load_ply(args.cloud_path);
    image = load_png(args.image_path);
    if (!args.config_path.empty()) config = load_config(args.config_path, config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  if (args.gravity_known) config.gravity_known = true;
  if (args.seed_given) config.seed = args.seed;

  LocalizationResult result;
  try {
    result = localize(cloud, image, config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }

  try {
    save_result_json(args.out_path, result, config, args.omit_timings);
    if (!args.dump_projection.empty()) {
      const RenderOutput view = render(cloud, result.best_pose, image.height, image.width, 1);
      save_png(args.dump_projection, view.image);
    }
    if (!args.dump_surface.empty()) {
      const double z = std::isnan(args.surface_z)
                           ? 0.5 * (cloud.bbox_min()[2] + cloud.bbox_max()[2])
                           : args.surface_z;
      const Eigen::MatrixXd surface = dump_loss_surface(
          cloud, image, z, args.surface_res, config.gravity_known, config.n_r, config.seed);
      std::ofstream out(args.dump_surface);
      if (!out) throw std::runtime_error(args.dump_surface + ": cannot open for writing");
      for (Eigen::Index r = 0; r < surface.rows(); ++r) {
        for (Eigen::Index c = 0; c < surface.cols(); ++c) {
          if (c > 0) out << ',';
          out << surface(r, c);
        }
        out << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }

  const Eigen::Quaterniond q(result.best_pose.rotation);
  std::cout << "final_loss " << result.best_loss << '\n';
  std::cout << "translation " << result.best_pose.translation.transpose() << '\n';
  std::cout << "quaternion_wxyz " << q.w() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z()
            << '\n';
  std::cout << "candidates " << result.candidate_count << '\n';
  if (!args.omit_timings) {
    std::cout << "init_seconds " << result.init_seconds << '\n';
    std::cout << "refine_seconds " << result.refine_seconds << '\n';
  }
  std::cout << "result_file " << args.out_path << '\n';
  if (result.failed) {
    std::cerr << "localization failed: no candidate saw a valid projection\n";
    return kExitLocalizationFailed;
  }
  return 0;
}

struct SynthArgs {
  std::uint64_t seed = 0;
  std::vector<double> extent{4.0, 3.0, 2.5};
  double density = 500.0;
  std::string texture = "checker";
  double noise_step = 0.5;
  int splat_radius = 1;
  bool gravity_aligned = true;
  bool augment = false;
  bool augment_seed_given = false;
  std::uint64_t augment_seed = 0;
  int pano_height = 256;
  int pano_width = 512;
  std::string out_dir = ".";
};

int run_synth(const SynthArgs& args) {
  SceneParams params;
  params.seed = args.seed;
  params.room_extent = Vec3(args.extent[0], args.extent[1], args.extent[2]);
  params.points_per_m2 = args.density;
  params.gravity_aligned = args.gravity_aligned;
  params.pano_height = args.pano_height;
  params.pano_width = args.pano_width;
  params.noise_step = args.noise_step;
  params.splat_radius_px = args.splat_radius;
  if (args.texture == "checker") {
    params.texture = TextureMode::kChecker;
  } else if (args.texture == "noise") {
    params.texture = TextureMode::kNoise;
  } else if (args.texture == "semantic_flat") {
    params.texture = TextureMode::kSemanticFlat;
  } else {
    std::cerr << "error: unknown texture '" << args.texture << "'\n";
    return kExitBadInput;
  }

  try {
    SyntheticScene scene = generate_scene(params);
    Pose oracle = scene.oracle_pose;
    PointCloud cloud = std::move(scene.cloud);
    if (args.augment) {
      const std::uint64_t aug_seed = args.augment_seed_given ? args.augment_seed : args.seed + 1;
      auto [augmented, transform] = augment_pose(cloud, aug_seed);
      cloud = std::move(augmented);
      oracle = adjust_pose(oracle, transform);
    }
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    save_ply((dir / "cloud.ply").string(), cloud);
    save_png((dir / "pano.png").string(), scene.panorama);
    save_oracle_json((dir / "oracle.json").string(), oracle, cloud.bbox_min(), cloud.bbox_max());
    save_descriptor_json((dir / "descriptor.json").string(), scene.descriptor);
    std::cout << "points " << cloud.count() << '\n';
    std::cout << "area_m2 " << scene.descriptor.total_area << '\n';
    std::cout << "out_dir " << fs::absolute(dir).string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return 0;
}

struct EvalArgs {
  std::string results_dir;
  std::string truth_dir;
  std::string out_path;
};

int run_eval(const EvalArgs& args) {
  try {
    std::vector<fs::path> result_files;
    for (const auto& entry : fs::directory_iterator(args.results_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        result_files.push_back(entry.path());
      }
    }
    std::sort(result_files.begin(), result_files.end());
    if (result_files.empty()) {
      std::cerr << "error: no result files in " << args.results_dir << '\n';
      return kExitBadInput;
    }

    std::vector<std::pair<Pose, Pose>> pairs;
    int excluded = 0;
    for (const fs::path& result_path : result_files) {
      const fs::path truth_path = fs::path(args.truth_dir) / result_path.filename();
      if (!fs::exists(truth_path)) {
        std::cerr << "error: no matching truth file for " << result_path.filename().string()
                  << '\n';
        return kExitBadInput;
      }
      const ResultFileData result = load_result_json(result_path.string());
      const OracleFileData truth = load_oracle_json(truth_path.string());
      const bool inside =
          (truth.pose.translation.array() >= truth.bbox_min.array()).all() &&
          (truth.pose.translation.array() <= truth.bbox_max.array()).all();
      if (!inside) {
        ++excluded;
        continue;
      }
      pairs.emplace_back(result.pose, truth.pose);
    }
    if (pairs.empty()) {
      std::cerr << "error: every ground truth was outside its cloud bounding box\n";
      return kExitBadInput;
    }

    const BatchSummary summary = evaluate_batch(pairs);
    std::cout << "count " << summary.count << '\n';
    if (excluded > 0) std::cout << "excluded_out_of_bbox " << excluded << '\n';
    std::cout << "t_error_quartiles_m " << summary.t_quartiles[0] << ' ' << summary.t_quartiles[1]
              << ' ' << summary.t_quartiles[2] << '\n';
    std::cout << "r_error_quartiles_deg " << summary.r_quartiles[0] << ' '
              << summary.r_quartiles[1] << ' ' << summary.r_quartiles[2] << '\n';
    std::cout << "accuracy " << summary.accuracy << '\n';
    if (!args.out_path.empty()) save_summary_json(args.out_path, summary);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return 0;
}

struct BenchArgs {
  std::vector<double> points{1e5};
  int repeat = 5;
  std::uint64_t seed = 0;
  int init_candidate_translations = 50;
  int init_candidate_rotations = 32;
};

int run_bench(const BenchArgs& args) {
  std::cout << "n_points loss_s grad_s init_s refine1_s loss_Mpts_per_s\n";
  double previous_loss_s = 0.0;
  long previous_n = 0;
  for (double n_req : args.points) {
    const long n = std::lround(n_req);
    if (n < 1) {
      std::cerr << "error: point counts must be positive\n";
      return kExitBadInput;
    }
    Rng rng(args.seed);
    PointMatrix positions(n, 3);
    PointMatrix colors(n, 3);
    for (long i = 0; i < n; ++i) {
      for (int a = 0; a < 3; ++a) {
        positions(i, a) = rng.uniform(-2.0, 2.0);
        colors(i, a) = rng.uniform(0.0, 1.0);
      }
    }
    const PointCloud cloud(std::move(positions), std::move(colors));
    Panorama image(256, 512);
    for (double& v : image.data) v = rng.uniform(0.0, 1.0);
    const Pose pose;
    LocalPoseParam param;

    const double loss_s = median_time(args.repeat, [&] {
      volatile double sink = sampling_loss(cloud, image, pose);
      (void)sink;
    });
    const double grad_s = median_time(args.repeat, [&] {
      const LossGradient g = sampling_loss_grad(cloud, image, param);
      volatile double sink = g.loss;
      (void)sink;
    });
    const double init_s = time_call([&] {
      const CandidateSet candidates =
          generate_candidates(cloud, args.init_candidate_translations,
                              args.init_candidate_rotations, false, args.seed);
      const CandidateSet stage1 = filter_by_loss(cloud, image, candidates, 50);
      const CandidateSet stage2 = filter_by_histogram(cloud, image, stage1, 6);
      volatile double sink = stage2.scores.empty() ? 0.0 : stage2.scores.front();
      (void)sink;
    });
    const double refine1_s = time_call([&] {
      const RefinementTrace trace = refine(cloud, image, pose, 1, 0.1, false);
      volatile double sink = trace.final_loss;
      (void)sink;
    });

    std::cout << n << ' ' << loss_s << ' ' << grad_s << ' ' << init_s << ' ' << refine1_s << ' '
              << (static_cast<double>(n) / loss_s / 1e6) << '\n';

    if (previous_n > 0) {
      const double size_ratio = static_cast<double>(n) / static_cast<double>(previous_n);
      if (size_ratio > 1.9 && size_ratio < 2.1) {
        const double time_ratio = loss_s / previous_loss_s;
        std::cout << "doubling_ratio " << previous_n << "->" << n << " " << time_ratio;
        if (time_ratio < 1.2 || time_ratio > 3.5) std::cout << " (outside linear-scaling band)";
        std::cout << '\n';
      }
    }
    previous_loss_s = loss_s;
    previous_n = n;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud / 360 panorama localization toolkit"};
  app.require_subcommand(1);

  LocalizeArgs loc;
  CLI::App* localize_cmd =
      app.add_subcommand("localize", "Estimate the camera pose of a panorama in a point cloud");
  localize_cmd->add_option("--cloud", loc.cloud_path, "Point cloud (.ply)")->required();
  localize_cmd->add_option("--image", loc.image_path, "Equirectangular panorama (.png)")
      ->required();
  localize_cmd->add_option("--config", loc.config_path, "key=value config overrides");
  localize_cmd->add_option("--out", loc.out_path, "Result JSON path");
  localize_cmd->add_option("--dump-projection", loc.dump_projection,
                           "Render the cloud at the estimated pose to this PNG");
  localize_cmd->add_option("--dump-surface", loc.dump_surface,
                           "Write a loss-surface slice (CSV) over the bbox footprint");
  localize_cmd->add_option("--surface-res", loc.surface_res, "Loss-surface grid resolution");
  localize_cmd->add_option("--surface-z", loc.surface_z,
                           "Loss-surface slice height (default: bbox center)");
  localize_cmd->add_flag("--gravity-known", loc.gravity_known,
                         "Vertical axes are aligned; search yaw only (n_r drops to 8)");
  localize_cmd->add_flag("--omit-timings", loc.omit_timings,
                         "Zero the timing fields in the result file");
  CLI::Option* seed_opt = localize_cmd->add_option("--seed", loc.seed, "Candidate sampling seed");
  localize_cmd->add_option("--threads", loc.threads, "Worker thread cap (results don't depend on it)");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
  synth_cmd->add_option("--seed", synth.seed, "Scene seed");
  synth_cmd->add_option("--extent", synth.extent, "Room extent in meters (x y z)")
      ->expected(3);
  synth_cmd->add_option("--density", synth.density, "Points per square meter");
  synth_cmd->add_option("--texture", synth.texture, "checker | noise | semantic_flat");
  synth_cmd->add_option("--noise-step", synth.noise_step,
                        "Value-noise lattice spacing in meters (noise texture)");
  synth_cmd->add_option("--splat-radius", synth.splat_radius,
                        "Splat radius in pixels for the rendered panorama");
  synth_cmd->add_flag("--gravity-aligned,!--free-rotation", synth.gravity_aligned,
                      "Yaw-only oracle rotation (default) vs full rotation");
  synth_cmd->add_flag("--augment", synth.augment,
                      "Apply a random z-rotation and shift to the cloud (oracle adjusted)");
  CLI::Option* aug_seed_opt =
      synth_cmd->add_option("--augment-seed", synth.augment_seed, "Seed for --augment");
  synth_cmd->add_option("--pano-height", synth.pano_height, "Panorama height in pixels");
  synth_cmd->add_option("--pano-width", synth.pano_width, "Panorama width in pixels");
  synth_cmd->add_option("--out-dir", synth.out_dir,
                        "Directory for cloud.ply, pano.png, oracle.json, descriptor.json");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score result files against ground truth");
  eval_cmd->add_option("--results", eval.results_dir, "Directory of result JSON files")
      ->required();
  eval_cmd->add_option("--truth", eval.truth_dir, "Directory of matching oracle JSON files")
      ->required();
  eval_cmd->add_option("--out", eval.out_path, "Write the summary JSON here too");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time the core kernels at several sizes");
  bench_cmd->add_option("--points", bench.points, "Point counts to benchmark");
  bench_cmd->add_option("--repeat", bench.repeat, "Timing repetitions (median reported)");
  bench_cmd->add_option("--seed", bench.seed, "Input generation seed");
  bench_cmd->add_option("--init-translations", bench.init_candidate_translations,
                        "Candidate translations for the initialization timing");
  bench_cmd->add_option("--init-rotations", bench.init_candidate_rotations,
                        "Candidate rotations for the initialization timing");

  CLI11_PARSE(app, argc, argv);

  loc.seed_given = seed_opt->count() > 0;
  synth.augment_seed_given = aug_seed_opt->count() > 0;

  if (localize_cmd->parsed()) return run_localize(loc);
  if (synth_cmd->parsed()) return run_synth(synth);
  if (eval_cmd->parsed()) return run_eval(eval);
  if (bench_cmd->parsed()) return run_bench(bench);
  return 0;
}
