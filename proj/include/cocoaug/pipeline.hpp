#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cocoaug/balance.hpp"
#include "cocoaug/coco_io.hpp"
#include "cocoaug/error.hpp"
#include "cocoaug/fs_util.hpp"
#include "cocoaug/geometry.hpp"
#include "cocoaug/image_io.hpp"
#include "cocoaug/parallel.hpp"
#include "cocoaug/pixel_aug.hpp"
#include "cocoaug/random.hpp"
#include "cocoaug/spatial_aug.hpp"

namespace cocoaug {

// ---- merge -----------------------------------------------------------------

inline bool same_categories(const DatasetManifest& a, const DatasetManifest& b) {
  auto key = [](const DatasetManifest& m) {
    std::vector<std::pair<std::int64_t, std::string>> k;
    for (const auto& c : m.categories) k.emplace_back(c.id, c.name);
    std::sort(k.begin(), k.end());
    return k;
  };
  return key(a) == key(b);
}

/// Union of two manifests sharing one category list. When b's ids could
/// collide with a's, b's image and annotation ids are shifted to start right
/// above a's maxima; references follow the shift.
inline DatasetManifest merge_manifests(const DatasetManifest& a, const DatasetManifest& b) {
  if (!same_categories(a, b)) throw ValidationError(ErrorKind::CategoryMismatch, "manifests declare different categories");
  auto offset = [](auto const& xs_a, auto const& xs_b) -> std::int64_t {
    if (xs_a.empty() || xs_b.empty()) return 0;
    std::int64_t max_a = xs_a.front().id, min_b = xs_b.front().id;
    for (const auto& x : xs_a) max_a = std::max(max_a, x.id);
    for (const auto& x : xs_b) min_b = std::min(min_b, x.id);
    return min_b <= max_a ? max_a - min_b + 1 : 0;
  };
  const std::int64_t image_shift = offset(a.images, b.images);
  const std::int64_t ann_shift = offset(a.annotations, b.annotations);

  DatasetManifest out = a;
  if (a.images.empty() && a.annotations.empty() && a.extra.empty()) out.extra = b.extra;
  out.images.reserve(a.images.size() + b.images.size());
  out.annotations.reserve(a.annotations.size() + b.annotations.size());
  for (ImageRecord im : b.images) {
    im.id += image_shift;
    out.images.push_back(std::move(im));
  }
  for (Annotation ann : b.annotations) {
    ann.id += ann_shift;
    ann.image_id += image_shift;
    out.annotations.push_back(std::move(ann));
  }
  validate_manifest(out, ClampPolicy::Reject);
  return out;
}

// ---- build -----------------------------------------------------------------

enum class Stage { Original, Pixel, CenterCrop1, CenterCrop2, RandomCrop1, RandomCrop2, BalanceCopy };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::Original: return "ORIGINAL";
    case Stage::Pixel: return "PIXEL";
    case Stage::CenterCrop1: return "CENTER_CROP_1";
    case Stage::CenterCrop2: return "CENTER_CROP_2";
    case Stage::RandomCrop1: return "RANDOM_CROP_1";
    case Stage::RandomCrop2: return "RANDOM_CROP_2";
    case Stage::BalanceCopy: return "BALANCE_COPY";
  }
  return "?";
}

/// File-name suffix and RNG stream tag per derived stage.
inline const char* stage_suffix(Stage s) {
  switch (s) {
    case Stage::Pixel: return "pix";
    case Stage::CenterCrop1: return "cc1";
    case Stage::CenterCrop2: return "cc2";
    case Stage::RandomCrop1: return "rc1";
    case Stage::RandomCrop2: return "rc2";
    default: return "";
  }
}

struct BalanceOptions {
  int cap = kDefaultCopyCap;
  TargetPolicy target = TargetPolicy::median();
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::array<CropSpec, 2> center_crops = {CropSpec(CropKind::Center, 0.80, 0.99),
                                          CropSpec(CropKind::Center, 0.60, 0.80)};
  std::array<CropSpec, 2> random_crops = {CropSpec(CropKind::RandomSized, 0.80, 0.99),
                                          CropSpec(CropKind::RandomSized, 0.60, 0.80)};
  double iou_keep = 0.5;
  double r_min = 0.01;
  std::optional<BalanceOptions> balance;  // off: the build expands sources 6x exactly
  unsigned jobs = default_jobs();

  void validate() const {
    for (const auto& s : center_crops)
      if (s.kind != CropKind::Center) throw ValidationError(ErrorKind::InvalidConfig, "center_crops must be CENTER specs");
    for (const auto& s : random_crops)
      if (s.kind != CropKind::RandomSized)
        throw ValidationError(ErrorKind::InvalidConfig, "random_crops must be RANDOM_SIZED specs");
    if (!(iou_keep > 0 && iou_keep < 1) || !(r_min > 0 && r_min < 1))
      throw ValidationError(ErrorKind::InvalidConfig, "thresholds must lie in (0, 1)");
    if (balance && balance->cap < 1) throw ValidationError(ErrorKind::InvalidConfig, "balance cap must be at least 1");
  }
};

/// Where one output image came from.
struct Provenance {
  std::int64_t image_id = 0;
  Stage stage = Stage::Original;
  std::int64_t source_image_id = 0;
  std::string file_name;
  std::optional<int> transform;           // pixel and balance stages
  std::optional<CropWindow> window;       // crop stages, source frame
  std::optional<double> fraction;         // crop stages
};

struct BuildResult {
  DatasetManifest manifest;
  std::vector<Provenance> provenance;  // sorted by image id
};

inline constexpr std::array<Stage, 5> kDerivedStages = {Stage::Pixel, Stage::CenterCrop1, Stage::CenterCrop2,
                                                        Stage::RandomCrop1, Stage::RandomCrop2};

inline Rng stage_rng(std::uint64_t seed, std::int64_t image_id, Stage stage) {
  return derive_rng(seed, {static_cast<std::int64_t>(stage) + 1, image_id});
}

inline Json provenance_json(const std::vector<Provenance>& records, std::uint64_t seed) {
  Json arr = Json::array();
  for (const auto& p : records) {
    Json j = {{"image_id", p.image_id},
              {"stage", to_string(p.stage)},
              {"source_image_id", p.source_image_id},
              {"file_name", p.file_name}};
    if (p.transform) {
      j["transform"] = {{"index", *p.transform},
                        {"name", registry()[static_cast<std::size_t>(*p.transform)].name}};
    }
    if (p.window) j["window"] = Json::array({p.window->x_min, p.window->y_min, p.window->x_max, p.window->y_max});
    if (p.fraction) j["fraction"] = *p.fraction;
    arr.push_back(std::move(j));
  }
  return Json{{"seed", seed}, {"records", std::move(arr)}};
}

namespace detail {

struct StageOutput {
  ImageRecord record;
  std::vector<Annotation> annotations;  // ids assigned later
  Provenance provenance;
};

inline void check_sources(const DatasetManifest& m, const fs::path& image_root) {
  for (const auto& im : m.images) {
    std::error_code ec;
    if (!fs::is_regular_file(image_root / im.file_name, ec))
      throw ValidationError(ErrorKind::MissingSourceImage, (image_root / im.file_name).string());
  }
}

}  // namespace detail

/// Expands every source image into six: the original, one pixel-augmented
/// copy, two center crops and two random-sized crops. Images are written under
/// `out_root` (originals are copied). With config.balance set, the source is
/// first category-balanced and the copies then flow through the expansion.
inline BuildResult build_augmented_dataset(const DatasetManifest& source, const fs::path& image_root,
                                           const fs::path& out_root, const PipelineConfig& config) {
  config.validate();
  detail::check_sources(source, image_root);

  DatasetManifest sources = source;
  fs::path sources_root = image_root;
  std::unordered_map<std::int64_t, BalanceCopy> balance_copies;
  if (config.balance) {
    const auto plan = plan_replication(source, config.balance->cap, config.balance->target);
    BalanceResult balanced = apply_replication(source, plan, config.seed, image_root, out_root, config.jobs);
    for (const auto& c : balanced.copies) balance_copies.emplace(c.image_id, c);
    sources = std::move(balanced.manifest);
    sources_root = out_root;
  }

  std::unordered_map<std::int64_t, std::vector<Annotation>> by_image;
  for (const auto& a : sources.annotations) by_image[a.image_id].push_back(a);

  std::int64_t max_image = 0, max_ann = 0;
  for (const auto& im : sources.images) max_image = std::max(max_image, im.id);
  for (const auto& a : sources.annotations) max_ann = std::max(max_ann, a.id);

  const std::size_t n = sources.images.size();
  std::vector<std::array<detail::StageOutput, 6>> work(n);
  const RetentionThresholds thresholds{config.iou_keep, config.r_min};

  parallel_for(n, config.jobs, [&](std::size_t i) {
    const ImageRecord& src = sources.images[i];
    static const std::vector<Annotation> kNone;
    const auto found = by_image.find(src.id);
    const auto& anns = found == by_image.end() ? kNone : found->second;
    auto& slots = work[i];

    const fs::path src_path = sources_root / src.file_name;
    if (sources_root != out_root) copy_file_atomic(src_path, out_root / src.file_name);
    slots[0].record = src;
    slots[0].annotations = anns;
    slots[0].provenance = {src.id, Stage::Original, src.id, src.file_name, std::nullopt, std::nullopt, std::nullopt};
    if (auto it = balance_copies.find(src.id); it != balance_copies.end()) {
      slots[0].provenance.stage = Stage::BalanceCopy;
      slots[0].provenance.source_image_id = it->second.source_image_id;
      slots[0].provenance.transform = it->second.transform;
    }

    const Image pixels = read_image(src_path);
    if (pixels.cols != src.width || pixels.rows != src.height)
      throw ValidationError(ErrorKind::UnsupportedImage, src_path.string() + " does not match its declared size");

    for (std::size_t s = 0; s < kDerivedStages.size(); ++s) {
      const Stage stage = kDerivedStages[s];
      auto& slot = slots[s + 1];
      const std::int64_t new_id = max_image + 1 + static_cast<std::int64_t>(i * kDerivedStages.size() + s);
      Rng rng = stage_rng(config.seed, src.id, stage);
      ImageRecord rec;
      rec.id = new_id;
      rec.file_name = suffixed_name(src.file_name, stage_suffix(stage));
      slot.provenance = {new_id, stage, src.id, rec.file_name, std::nullopt, std::nullopt, std::nullopt};

      if (stage == Stage::Pixel) {
        const PixelTransformId t = pick(rng);
        write_image(out_root / rec.file_name, apply(pixels, t, rng));
        rec.width = src.width;
        rec.height = src.height;
        slot.annotations = anns;
        slot.provenance.transform = t.index();
      } else {
        const CropSpec& spec = stage == Stage::CenterCrop1   ? config.center_crops[0]
                               : stage == Stage::CenterCrop2 ? config.center_crops[1]
                               : stage == Stage::RandomCrop1 ? config.random_crops[0]
                                                             : config.random_crops[1];
        const SampledCrop crop = sample_crop(rng, src, spec);
        CropResult cropped = crop_with_annotations(src, pixels, anns, crop.window, thresholds);
        write_image(out_root / rec.file_name, cropped.pixels);
        rec.width = cropped.record.width;
        rec.height = cropped.record.height;
        slot.annotations = std::move(cropped.annotations);
        slot.provenance.window = crop.window;
        slot.provenance.fraction = crop.fraction;
      }
      for (auto& a : slot.annotations) a.image_id = new_id;
      slot.record = std::move(rec);
    }
  });

  BuildResult out;
  out.manifest.categories = sources.categories;
  out.manifest.extra = sources.extra;
  out.manifest.images.reserve(n * 6);
  std::int64_t next_ann = max_ann;
  for (auto& slots : work) {
    for (std::size_t s = 0; s < slots.size(); ++s) {
      auto& slot = slots[s];
      out.manifest.images.push_back(std::move(slot.record));
      for (auto& a : slot.annotations) {
        if (s > 0) a.id = ++next_ann;
        out.manifest.annotations.push_back(std::move(a));
      }
      out.provenance.push_back(std::move(slot.provenance));
    }
  }
  std::sort(out.manifest.images.begin(), out.manifest.images.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(out.manifest.annotations.begin(), out.manifest.annotations.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(out.provenance.begin(), out.provenance.end(),
            [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return out;
}

// ---- category report ---------------------------------------------------------

struct ReportRow {
  std::int64_t category_id = 0;
  std::string name;
  std::int64_t count_before = 0;
  std::int64_t count_after = 0;
  std::optional<double> ratio;  // after / before; empty when before is 0
};

struct ReportSummary {
  std::int64_t min_before = 0, max_before = 0;
  std::int64_t min_after = 0, max_after = 0;
  std::optional<double> imbalance_before;  // min / max
  std::optional<double> imbalance_after;
};

struct CategoryReport {
  std::vector<ReportRow> rows;
  ReportSummary summary;
};

/// Categories omitted from plot data by default: the handful whose counts
/// dwarf the rest.
inline const std::vector<std::string>& default_plot_exclusions() {
  static const std::vector<std::string> names = {"person", "car", "bottle", "book", "cup", "chair"};
  return names;
}

inline CategoryReport category_report(const DatasetManifest& before, const DatasetManifest& after) {
  if (!same_categories(before, after))
    throw ValidationError(ErrorKind::CategoryMismatch, "reports need identical category lists");
  const auto b = count_categories(before);
  const auto a = count_categories(after);
  CategoryReport report;
  for (std::size_t i = 0; i < b.size(); ++i) {
    ReportRow row{b[i].category_id, b[i].name, b[i].box_count, a[i].box_count, std::nullopt};
    if (row.count_before > 0) row.ratio = static_cast<double>(row.count_after) / static_cast<double>(row.count_before);
    report.rows.push_back(std::move(row));
  }
  auto& s = report.summary;
  if (!report.rows.empty()) {
    auto [bmin, bmax] = std::minmax_element(report.rows.begin(), report.rows.end(),
                                            [](const auto& x, const auto& y) { return x.count_before < y.count_before; });
    auto [amin, amax] = std::minmax_element(report.rows.begin(), report.rows.end(),
                                            [](const auto& x, const auto& y) { return x.count_after < y.count_after; });
    s.min_before = bmin->count_before;
    s.max_before = bmax->count_before;
    s.min_after = amin->count_after;
    s.max_after = amax->count_after;
    if (s.max_before > 0) s.imbalance_before = static_cast<double>(s.min_before) / static_cast<double>(s.max_before);
    if (s.max_after > 0) s.imbalance_after = static_cast<double>(s.min_after) / static_cast<double>(s.max_after);
  }
  return report;
}

namespace detail {

inline std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string fixed6(std::optional<double> v) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace detail

inline std::string report_csv(const CategoryReport& report) {
  std::ostringstream out;
  out << "category_id,name,count_before,count_after,ratio\n";
  for (const auto& r : report.rows)
    out << r.category_id << ',' << detail::csv_field(r.name) << ',' << r.count_before << ',' << r.count_after << ','
        << detail::fixed6(r.ratio) << '\n';
  return out.str();
}

inline std::string summary_csv(const CategoryReport& report) {
  const auto& s = report.summary;
  std::ostringstream out;
  out << "metric,before,after\n";
  out << "min_count," << s.min_before << ',' << s.min_after << '\n';
  out << "max_count," << s.max_before << ',' << s.max_after << '\n';
  out << "imbalance_ratio," << detail::fixed6(s.imbalance_before) << ',' << detail::fixed6(s.imbalance_after) << '\n';
  return out.str();
}

/// Bar-chart data: per-category counts minus the excluded names.
inline std::string plot_data_csv(const CategoryReport& report,
                                 const std::vector<std::string>& exclude = default_plot_exclusions()) {
  const std::set<std::string> skip(exclude.begin(), exclude.end());
  std::ostringstream out;
  out << "category_id,name,count_before,count_after\n";
  for (const auto& r : report.rows) {
    if (skip.contains(r.name)) continue;
    out << r.category_id << ',' << detail::csv_field(r.name) << ',' << r.count_before << ',' << r.count_after << '\n';
  }
  return out.str();
}

}  // namespace cocoaug
