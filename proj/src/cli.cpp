#include "rowtracker/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include "rowtracker/dataset.hpp"
#include "rowtracker/error.hpp"
#include "rowtracker/eval.hpp"
#include "rowtracker/log.hpp"
#include "rowtracker/rowmap.hpp"
#include "rowtracker/sim.hpp"
#include "rowtracker/track.hpp"

namespace rowtracker {

namespace fs = std::filesystem;

namespace {

struct LayoutFlags {
  RowLayout layout;

  void attach(CLI::App* cmd) {
    cmd->add_option("--fg", layout.foreground, "foreground fruits of a random row")
        ->capture_default_str();
    cmd->add_option("--bg", layout.background, "background fruits of a random row")
        ->capture_default_str();
    cmd->add_option("--rail-length", layout.rail_length, "rail length of a random row (m)")
        ->capture_default_str();
    cmd->add_option("--occluders", layout.occluders, "leaf-like occluders of a random row")
        ->capture_default_str();
    cmd->add_flag("--disjoint", layout.disjoint_in_image,
                  "keep random fruits apart in the image");
  }
};

struct NoiseFlags {
  NoiseSpec noise;
  bool noise_free = false;

  void attach(CLI::App* cmd) {
    cmd->add_flag("--noise-free", noise_free, "emit the clean rendering");
    cmd->add_option("--odometry-sigma", noise.odometry_sigma, "odometry random walk sigma (m/frame)")
        ->capture_default_str();
    cmd->add_option("--dropout", noise.dropout_prob, "per-detection dropout probability")
        ->capture_default_str();
    cmd->add_option("--false-positive-rate", noise.false_positive_rate,
                    "expected spurious detections per frame")
        ->capture_default_str();
    cmd->add_option("--mask-jitter", noise.mask_jitter, "mask boundary jitter (px)")
        ->capture_default_str();
  }

  std::optional<NoiseSpec> resolve(std::uint64_t seed) const {
    if (noise_free) return std::nullopt;
    NoiseSpec n = noise;
    n.seed = seed;
    n.validate();
    return n;
  }
};

Calibration load_calibration_or_default(const std::string& path) {
  return path.empty() ? Calibration{} : read_calibration(path);
}

void write_text_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, fmt::format("cannot write {}", tmp.string()));
    out << text;
    if (!out) throw Error(ErrorCode::IoFailure, fmt::format("failed writing {}", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, fmt::format("cannot move {} into place", path.string()));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"Fruit counting by tracking-via-segmentation along a pipe-rail row", "rowtracker"};
  app.require_subcommand(1);

  // simulate
  CLI::App* simulate = app.add_subcommand("simulate", "render a synthetic row into a dataset");
  std::string sim_scene, sim_out, sim_calib, sim_camera = "cam0";
  std::uint64_t sim_seed = 0;
  LayoutFlags sim_layout;
  NoiseFlags sim_noise;
  simulate->add_option("--scene", sim_scene, "scene spec file; a random row when omitted");
  simulate->add_option("--out", sim_out, "output dataset directory")->required();
  simulate->add_option("--seed", sim_seed, "seed for noise and random layout")->capture_default_str();
  simulate->add_option("--calib", sim_calib, "calibration file; default rig when omitted");
  simulate->add_option("--camera", sim_camera, "camera id recorded in the manifest")
      ->capture_default_str();
  sim_layout.attach(simulate);
  sim_noise.attach(simulate);

  // scene
  CLI::App* scene = app.add_subcommand("scene", "write a random scene spec");
  std::string scene_out, scene_calib;
  std::uint64_t scene_seed = 0;
  LayoutFlags scene_layout;
  scene->add_option("--out", scene_out, "scene spec file to write")->required();
  scene->add_option("--seed", scene_seed, "layout seed")->capture_default_str();
  scene->add_option("--calib", scene_calib, "calibration file; default rig when omitted");
  scene_layout.attach(scene);

  // track
  CLI::App* track = app.add_subcommand("track", "count fruits in one dataset");
  std::string track_data, track_config, track_variant;
  std::optional<double> track_iou;
  track->add_option("--data", track_data, "dataset directory")->required();
  track->add_option("--variant", track_variant, "bl, rp or df (default df)");
  track->add_option("--iou", track_iou, "association IoU threshold (default 0.3)");
  track->add_option("--config", track_config, "tracker config file");

  // map
  CLI::App* map = app.add_subcommand("map", "build a row point cloud");
  std::string map_data, map_out;
  MapConfig map_cfg;
  bool map_binary = false;
  map->add_option("--data", map_data, "dataset directory")->required();
  map->add_option("--out", map_out, "output .ply file")->required();
  map->add_option("--skip", map_cfg.skip, "keep every N-th frame")->capture_default_str();
  map->add_option("--dmin", map_cfg.d_min, "nearest kept depth (m)")->capture_default_str();
  map->add_option("--dmax", map_cfg.d_max, "farthest kept depth (m)")->capture_default_str();
  map->add_flag("--binary", map_binary, "binary little-endian PLY");

  // sweep
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "count every dataset under a variant/IoU grid");
  std::vector<std::string> sweep_data;
  std::string sweep_out, sweep_config, sweep_variants = "bl,rp,df",
                                       sweep_ious = "0.1,0.2,0.3,0.4,0.5";
  int sweep_bench = 0;
  std::uint64_t sweep_seed = 0;
  bool sweep_clean = false;
  sweep_cmd->add_option("--data", sweep_data, "dataset directories");
  sweep_cmd->add_option("--bench", sweep_bench, "simulate this many benchmark rows instead");
  sweep_cmd->add_option("--seed", sweep_seed, "benchmark seed")->capture_default_str();
  sweep_cmd->add_flag("--noise-free", sweep_clean, "noise-free benchmark rows");
  sweep_cmd->add_option("--variants", sweep_variants, "comma-separated variants")
      ->capture_default_str();
  sweep_cmd->add_option("--iou", sweep_ious, "comma-separated IoU thresholds")
      ->capture_default_str();
  sweep_cmd->add_option("--config", sweep_config, "tracker config file for the other settings");
  sweep_cmd->add_option("--out", sweep_out, "CSV report path; stdout when omitted");

  if (!args.empty() && !args.front().starts_with("-") && !app.get_subcommand_no_throw(args.front())) {
    err << "rowtracker: error: " << to_string(ErrorCode::UsageError) << ": unknown subcommand '"
        << args.front() << "'\n";
    return kExitUsage;
  }
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "rowtracker: error: " << to_string(ErrorCode::UsageError) << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      const Calibration calib = load_calibration_or_default(sim_calib);
      const SceneSpec spec =
          sim_scene.empty() ? random_scene(sim_layout.layout, sim_seed, calib) : read_scene_spec(sim_scene);
      const SimulatedRow row(fs::path(sim_out).lexically_normal().filename().string(),
                             generate_scene(spec, calib), sim_noise.resolve(sim_seed));
      write_dataset(sim_out, row, sim_camera);
      out << fmt::format("frames {}\ngt {}\n", row.size(), *row.gt_count());
    } else if (scene->parsed()) {
      const Calibration calib = load_calibration_or_default(scene_calib);
      std::ostringstream text;
      write_scene_spec(text, random_scene(scene_layout.layout, scene_seed, calib));
      write_text_atomically(scene_out, text.str());
    } else if (track->parsed()) {
      TrackerConfig cfg = track_config.empty() ? TrackerConfig{} : read_tracker_config(track_config);
      if (!track_variant.empty()) cfg.variant = parse_variant(track_variant);
      if (track_iou) cfg.iou_threshold = *track_iou;
      cfg.validate();
      const RowDataset row = load_dataset(track_data);
      const int count = count_row(row, cfg);
      out << "count " << count << '\n';
      if (row.gt_count()) {
        out << "gt " << *row.gt_count() << '\n';
        if (*row.gt_count() > 0) {
          out << fmt::format("ne {:.6f}\n", normalized_error(*row.gt_count(), count));
        }
      }
    } else if (map->parsed()) {
      const RowDataset row = load_dataset(map_data);
      const PointCloud cloud = build_map(row, map_cfg);
      write_ply(fs::path(map_out), cloud, map_binary ? PlyFormat::BinaryLittleEndian : PlyFormat::Ascii);
      out << "points " << cloud.size() << '\n';
    } else if (sweep_cmd->parsed()) {
      if (sweep_data.empty() == (sweep_bench == 0)) {
        throw Error(ErrorCode::UsageError, "sweep needs either --data or --bench");
      }
      std::vector<Variant> variants;
      for (const std::string& v : split_list(sweep_variants)) variants.push_back(parse_variant(v));
      std::vector<double> ious;
      for (const std::string& t : split_list(sweep_ious)) {
        try {
          ious.push_back(std::stod(t));
        } catch (const std::exception&) {
          throw Error(ErrorCode::UsageError, "bad IoU threshold '" + t + "'");
        }
      }
      const TrackerConfig base =
          sweep_config.empty() ? TrackerConfig{} : read_tracker_config(sweep_config);

      std::vector<RowDataset> datasets;
      std::vector<SimulatedRow> bench;
      std::vector<const FrameSource*> rows;
      if (sweep_bench > 0) {
        BenchmarkSpec spec;
        spec.rows = sweep_bench;
        spec.seed = sweep_seed;
        if (sweep_clean) spec.noise.reset();
        bench = make_benchmark(spec);
        for (const SimulatedRow& r : bench) rows.push_back(&r);
      } else {
        for (const std::string& d : sweep_data) datasets.push_back(load_dataset(d));
        for (const RowDataset& r : datasets) rows.push_back(&r);
      }
      const CountReport report = sweep(rows, variants, ious, base);
      std::ostringstream csv;
      write_report_csv(csv, report);
      if (sweep_out.empty()) {
        out << csv.str();
      } else {
        write_text_atomically(sweep_out, csv.str());
      }
    }
  } catch (const Error& e) {
    err << "rowtracker: error: " << e.what() << '\n';
    return e.code() == ErrorCode::UsageError ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "rowtracker: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace rowtracker
