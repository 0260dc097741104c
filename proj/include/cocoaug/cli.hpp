#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cocoaug/cocoaug.hpp"

namespace cocoaug::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

namespace detail {

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

inline std::vector<double> parse_weights(const std::string& csv) {
  std::vector<double> weights;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      weights.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(ErrorKind::InvalidConfig, "bad weight '" + item + "'");
    }
  }
  return weights;
}

inline TargetPolicy parse_target(const std::string& v) {
  if (v == "median") return TargetPolicy::median();
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used == v.size() && n > 0) return TargetPolicy::fixed(n);
  } catch (const std::exception&) {
  }
  throw ValidationError(ErrorKind::InvalidConfig, "target must be 'median' or a positive integer, got '" + v + "'");
}

inline CropSpec crop_spec_from_json(const Json& j, CropKind kind) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(ErrorKind::InvalidConfig, "crop ranges must be [lower, upper] pairs");
  return CropSpec(kind, j[0].get<double>(), j[1].get<double>());
}

/// Reads the flat JSON config document into `config`. Unknown keys are an
/// error so typos do not silently fall back to defaults.
inline void apply_config_file(const std::string& path, PipelineConfig& config) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw ValidationError(ErrorKind::MalformedJson, path + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError(ErrorKind::InvalidConfig, "config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    try {
      if (key == "seed") {
        config.seed = v.get<std::uint64_t>();
      } else if (key == "jobs") {
        config.jobs = v.get<unsigned>();
      } else if (key == "iou_keep") {
        config.iou_keep = v.get<double>();
      } else if (key == "r_min") {
        config.r_min = v.get<double>();
      } else if (key == "center_crop_ranges" || key == "random_crop_ranges") {
        const CropKind kind = key == "center_crop_ranges" ? CropKind::Center : CropKind::RandomSized;
        if (!v.is_array() || v.size() != 2)
          throw ValidationError(ErrorKind::InvalidConfig, key + " needs exactly two ranges");
        auto& dst = kind == CropKind::Center ? config.center_crops : config.random_crops;
        dst = {crop_spec_from_json(v[0], kind), crop_spec_from_json(v[1], kind)};
      } else if (key == "balance") {
        if (v.is_null() || (v.is_boolean() && !v.get<bool>())) {
          config.balance.reset();
        } else {
          BalanceOptions opts;
          if (v.is_object()) {
            if (v.contains("cap")) opts.cap = v["cap"].get<int>();
            if (v.contains("target"))
              opts.target = v["target"].is_string() ? parse_target(v["target"].get<std::string>())
                                                    : parse_target(std::to_string(v["target"].get<long long>()));
          } else if (!v.is_boolean()) {
            throw ValidationError(ErrorKind::InvalidConfig, "balance must be null, a boolean or an object");
          }
          config.balance = opts;
        }
      } else {
        throw ValidationError(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
      }
    } catch (const Json::exception& e) {
      throw ValidationError(ErrorKind::InvalidConfig, key + ": " + e.what());
    }
  }
}

inline SoftNmsConfig soft_nms_config(double sigma, double floor, const std::string& mode, double linear_iou) {
  SoftNmsConfig c;
  c.sigma = sigma;
  c.score_floor = floor;
  c.linear_iou_threshold = linear_iou;
  if (mode == "gaussian") {
    c.mode = DecayMode::Gaussian;
  } else if (mode == "linear") {
    c.mode = DecayMode::Linear;
  } else {
    throw ValidationError(ErrorKind::InvalidConfig, "mode must be gaussian or linear");
  }
  c.validate();
  return c;
}

}  // namespace detail

/// Entry point shared by the binary and the tests. Returns the process exit
/// code: 0 success, 1 invalid input or usage, 2 I/O failure.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"COCO dataset augmentation and detection post-processing", "cocoaug"};
  app.require_subcommand(1);
  app.fallthrough();

  bool strict_bounds = false;
  app.add_flag("--strict-bounds", strict_bounds, "Reject boxes that leave their image instead of clipping them");
  unsigned jobs = default_jobs();
  app.add_option("-j,--jobs", jobs, "Worker threads (output does not depend on this)")->check(CLI::PositiveNumber);

  // stats
  auto* stats = app.add_subcommand("stats", "Per-category box counts as CSV");
  std::string stats_in, stats_after, stats_out, stats_summary, stats_plot;
  std::vector<std::string> stats_exclude = default_plot_exclusions();
  stats->add_option("annotations", stats_in, "COCO instances JSON")->required();
  stats->add_option("--after", stats_after, "Second manifest to compare against (default: the same file)");
  stats->add_option("--out", stats_out, "Report CSV path (default: stdout)");
  stats->add_option("--summary-out", stats_summary, "Write min/max/imbalance summary CSV here");
  stats->add_option("--plot-out", stats_plot, "Write plot data CSV (excluded categories removed) here");
  stats->add_option("--exclude", stats_exclude, "Category names left out of plot data")->delimiter(',');

  // merge
  auto* merge = app.add_subcommand("merge", "Merge two manifests with the same categories");
  std::string merge_a, merge_b, merge_out;
  merge->add_option("first", merge_a)->required();
  merge->add_option("second", merge_b)->required();
  merge->add_option("--out", merge_out)->required();

  // balance
  auto* balance = app.add_subcommand("balance", "Category-balance oversampling with light jitter");
  std::string bal_in, bal_images, bal_out_dir, bal_target = "median";
  std::uint64_t bal_seed = 0;
  int bal_cap = kDefaultCopyCap;
  balance->add_option("annotations", bal_in)->required();
  balance->add_option("--images", bal_images, "Source image directory")->required();
  balance->add_option("--out-dir", bal_out_dir)->required();
  balance->add_option("--seed", bal_seed);
  balance->add_option("--cap", bal_cap, "Maximum extra copies per image")->check(CLI::PositiveNumber);
  balance->add_option("--target", bal_target, "'median' or a fixed per-category box count");

  // build
  auto* build = app.add_subcommand("build", "Six-fold dataset build: original, pixel, 2 center crops, 2 random crops");
  std::string build_in, build_images, build_out_dir, build_config;
  std::uint64_t build_seed = 0;
  int build_cap = kDefaultCopyCap;
  std::string build_target = "median";
  build->add_option("annotations", build_in)->required();
  build->add_option("--images", build_images)->required();
  build->add_option("--out-dir", build_out_dir)->required();
  auto* build_seed_opt = build->add_option("--seed", build_seed);
  build->add_option("--config", build_config, "Flat JSON config; flags override its values");
  auto* build_balance_flag = build->add_flag("--balance", "Category-balance the source before expanding");
  auto* build_cap_opt = build->add_option("--cap", build_cap)->check(CLI::PositiveNumber);
  auto* build_target_opt = build->add_option("--target", build_target);

  // softnms
  auto* softnms = app.add_subcommand("softnms", "Class-agnostic soft-NMS over a COCO results file");
  std::string snms_in, snms_out, snms_mode = "gaussian";
  double snms_sigma = 0.5, snms_floor = 0.001, snms_linear_iou = 0.3;
  softnms->add_option("results", snms_in)->required();
  softnms->add_option("--sigma", snms_sigma);
  softnms->add_option("--floor", snms_floor);
  softnms->add_option("--mode", snms_mode)->check(CLI::IsMember({"gaussian", "linear"}));
  softnms->add_option("--linear-iou", snms_linear_iou);
  softnms->add_option("--out", snms_out);

  // nms
  auto* nms = app.add_subcommand("nms", "Greedy hard NMS");
  std::string nms_in, nms_out;
  double nms_iou = 0.5;
  bool nms_class_aware = false;
  nms->add_option("results", nms_in)->required();
  nms->add_option("--iou", nms_iou);
  nms->add_flag("--class-aware", nms_class_aware, "Only suppress within a category");
  nms->add_option("--out", nms_out);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Weighted multi-model fusion followed by class-agnostic soft-NMS");
  std::vector<std::string> fuse_in;
  std::string fuse_weights, fuse_out, fuse_mode = "gaussian";
  double fuse_sigma = 0.5, fuse_floor = 0.001, fuse_linear_iou = 0.3;
  fuse->add_option("results", fuse_in)->required();
  fuse->add_option("--weights", fuse_weights, "Comma-separated, one per results file (default: all 1.0)");
  fuse->add_option("--sigma", fuse_sigma);
  fuse->add_option("--floor", fuse_floor);
  fuse->add_option("--mode", fuse_mode)->check(CLI::IsMember({"gaussian", "linear"}));
  fuse->add_option("--linear-iou", fuse_linear_iou);
  fuse->add_option("--out", fuse_out);

  // augment
  auto* augment = app.add_subcommand("augment", "Apply one pixel transform to a single image");
  std::string aug_in, aug_out;
  int aug_index = -1;
  std::uint64_t aug_seed = 0;
  bool aug_list = false;
  augment->add_option("image", aug_in);
  augment->add_option("--pixel", aug_index, "Transform index 0-29 (random when omitted)");
  augment->add_option("--seed", aug_seed);
  augment->add_option("--out", aug_out);
  augment->add_flag("--list", aug_list, "Print the transform registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  const ClampPolicy clamp = strict_bounds ? ClampPolicy::Reject : ClampPolicy::Clamp;
  try {
    if (stats->parsed()) {
      const DatasetManifest before = load_manifest(stats_in, clamp);
      const DatasetManifest after = stats_after.empty() ? before : load_manifest(stats_after, clamp);
      const CategoryReport report = category_report(before, after);
      detail::emit(report_csv(report), stats_out, out);
      if (!stats_summary.empty()) write_file_atomic(stats_summary, summary_csv(report));
      if (!stats_plot.empty()) write_file_atomic(stats_plot, plot_data_csv(report, stats_exclude));
    } else if (merge->parsed()) {
      const DatasetManifest merged = merge_manifests(load_manifest(merge_a, clamp), load_manifest(merge_b, clamp));
      save_manifest(merged, merge_out);
      err << "merged " << merged.images.size() << " images, " << merged.annotations.size() << " annotations\n";
    } else if (balance->parsed()) {
      const DatasetManifest source = load_manifest(bal_in, clamp);
      const ReplicationPlan plan = plan_replication(source, bal_cap, detail::parse_target(bal_target));
      const fs::path out_dir(bal_out_dir);
      const BalanceResult result = apply_replication(source, plan, bal_seed, bal_images, out_dir / "images", jobs);
      save_manifest(result.manifest, out_dir / "annotations.json");
      write_file_atomic(out_dir / "plan.json", plan_to_json(plan).dump() + "\n");
      err << "balance: target " << plan.target_count << ", " << result.copies.size() << " copies, "
          << result.manifest.images.size() << " images\n";
    } else if (build->parsed()) {
      PipelineConfig config;
      config.jobs = jobs;
      if (!build_config.empty()) detail::apply_config_file(build_config, config);
      if (build_seed_opt->count() > 0) config.seed = build_seed;
      if (app.get_option("--jobs")->count() > 0) config.jobs = jobs;
      if (build_balance_flag->count() > 0 || build_cap_opt->count() > 0 || build_target_opt->count() > 0) {
        BalanceOptions opts = config.balance.value_or(BalanceOptions{});
        if (build_cap_opt->count() > 0) opts.cap = build_cap;
        if (build_target_opt->count() > 0) opts.target = detail::parse_target(build_target);
        config.balance = opts;
      }
      const DatasetManifest source = load_manifest(build_in, clamp);
      const fs::path out_dir(build_out_dir);
      const BuildResult result = build_augmented_dataset(source, build_images, out_dir / "images", config);
      save_manifest(result.manifest, out_dir / "annotations.json");
      write_file_atomic(out_dir / "provenance.json", provenance_json(result.provenance, config.seed).dump() + "\n");
      write_file_atomic(out_dir / "stats.csv", report_csv(category_report(source, result.manifest)));
      err << "build: " << source.images.size() << " sources -> " << result.manifest.images.size() << " images, "
          << result.manifest.annotations.size() << " annotations\n";
    } else if (softnms->parsed()) {
      const auto config = detail::soft_nms_config(snms_sigma, snms_floor, snms_mode, snms_linear_iou);
      detail::emit(serialize_detections(soft_nms_all(load_detections(snms_in), config, jobs)), snms_out, out);
    } else if (nms->parsed()) {
      detail::emit(serialize_detections(hard_nms_all(load_detections(nms_in), nms_iou, !nms_class_aware, jobs)),
                   nms_out, out);
    } else if (fuse->parsed()) {
      const auto config = detail::soft_nms_config(fuse_sigma, fuse_floor, fuse_mode, fuse_linear_iou);
      std::vector<std::vector<Detection>> runs;
      for (const auto& path : fuse_in) runs.push_back(load_detections(path));
      const std::vector<double> weights =
          fuse_weights.empty() ? std::vector<double>(runs.size(), 1.0) : detail::parse_weights(fuse_weights);
      detail::emit(serialize_detections(fuse_results(runs, weights, config, jobs)), fuse_out, out);
    } else if (augment->parsed()) {
      if (aug_list) {
        for (const auto& spec : registry()) {
          out << spec.index << ' ' << spec.name;
          for (const auto& p : spec.params) out << ' ' << p.name << "=[" << p.lo << ',' << p.hi << ']';
          out << '\n';
        }
        return kExitOk;
      }
      if (aug_in.empty() || aug_out.empty())
        throw ValidationError(ErrorKind::InvalidConfig, "augment needs an input image and --out");
      Rng rng = derive_rng(aug_seed, {0x617567});
      const PixelTransformId id = aug_index < 0 ? pick(rng) : PixelTransformId(aug_index);
      write_image(aug_out, apply(read_image(aug_in), id, rng));
      err << "applied " << registry()[static_cast<std::size_t>(id.index())].name << '\n';
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::MissingSourceImage ? kExitIo : kExitValidation;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace cocoaug::cli
