#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cocoaug/coco_io.hpp"
#include "cocoaug/error.hpp"
#include "cocoaug/fs_util.hpp"
#include "cocoaug/image_io.hpp"
#include "cocoaug/parallel.hpp"
#include "cocoaug/pixel_aug.hpp"
#include "cocoaug/random.hpp"

namespace cocoaug {

struct CategoryStat {
  std::int64_t category_id = 0;
  std::string name;
  std::int64_t box_count = 0;

  bool operator==(const CategoryStat&) const = default;
};

/// Box count per declared category, sorted by category id. Categories with no
/// boxes are listed with a zero count.
inline std::vector<CategoryStat> count_categories(const DatasetManifest& m) {
  std::vector<CategoryStat> stats;
  stats.reserve(m.categories.size());
  for (const auto& c : m.categories) stats.push_back({c.id, c.name, 0});
  std::sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) { return a.category_id < b.category_id; });
  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < stats.size(); ++i) index.emplace(stats[i].category_id, i);
  for (const auto& a : m.annotations) {
    auto it = index.find(a.category_id);
    if (it != index.end()) ++stats[it->second].box_count;
  }
  return stats;
}

struct TargetPolicy {
  enum class Kind { Median, Fixed };
  Kind kind = Kind::Median;
  std::int64_t value = 0;  // used by Fixed

  static TargetPolicy median() { return {}; }
  static TargetPolicy fixed(std::int64_t n) { return {Kind::Fixed, n}; }
};

inline constexpr int kDefaultCopyCap = 20;

struct ReplicationPlan {
  std::map<std::int64_t, int> extra_copies;  // image id -> copies beyond the original
  std::int64_t target_count = 1;

  int copies_for(std::int64_t image_id) const {
    auto it = extra_copies.find(image_id);
    return it == extra_copies.end() ? 0 : it->second;
  }
  std::int64_t total_copies() const {
    std::int64_t n = 0;
    for (const auto& [id, k] : extra_copies) n += k;
    return n;
  }
  bool operator==(const ReplicationPlan&) const = default;
};

/// Upper median of the non-zero category box counts (1 if there are none).
inline std::int64_t median_target(const std::vector<CategoryStat>& stats) {
  std::vector<std::int64_t> counts;
  for (const auto& s : stats)
    if (s.box_count > 0) counts.push_back(s.box_count);
  if (counts.empty()) return 1;
  std::sort(counts.begin(), counts.end());
  return counts[counts.size() / 2];
}

/// Each image is driven by the globally rarest category it contains:
///   extra = clamp(floor(target / rarest_count) - 1, 0, cap)
/// With single-category images this lifts every category below the target
/// towards it without overshooting, so the most frequent category stays the
/// maximum.
inline ReplicationPlan plan_replication(const DatasetManifest& m, int cap = kDefaultCopyCap,
                                        TargetPolicy target = TargetPolicy::median()) {
  if (cap < 1) throw ValidationError(ErrorKind::InvalidConfig, "copy cap must be at least 1");
  if (target.kind == TargetPolicy::Kind::Fixed && target.value < 1)
    throw ValidationError(ErrorKind::InvalidConfig, "fixed target must be positive");
  const auto stats = count_categories(m);
  ReplicationPlan plan;
  plan.target_count = target.kind == TargetPolicy::Kind::Median ? median_target(stats) : target.value;

  std::unordered_map<std::int64_t, std::int64_t> count_of;
  for (const auto& s : stats) count_of.emplace(s.category_id, s.box_count);
  std::unordered_map<std::int64_t, std::int64_t> rarest;
  for (const auto& a : m.annotations) {
    const std::int64_t c = count_of.at(a.category_id);
    auto [it, inserted] = rarest.emplace(a.image_id, c);
    if (!inserted) it->second = std::min(it->second, c);
  }
  for (const auto& im : m.images) {
    int extra = 0;
    if (auto it = rarest.find(im.id); it != rarest.end()) {
      const std::int64_t k = plan.target_count / it->second - 1;
      extra = static_cast<int>(std::clamp<std::int64_t>(k, 0, cap));
    }
    plan.extra_copies.emplace(im.id, extra);
  }
  return plan;
}

inline Json plan_to_json(const ReplicationPlan& plan) {
  Json j = Json::object();
  for (const auto& [id, k] : plan.extra_copies) j[std::to_string(id)] = k;
  return j;
}

/// Copies of balanced images receive one of these light jitters.
inline constexpr std::array<int, 3> kBalanceJitters = {4, 2, 0};  // channel shuffle, saturation, brightness

inline constexpr std::int64_t kBalanceStreamTag = 0x62616c;

inline Rng balance_rng(std::uint64_t seed, std::int64_t image_id, int copy_index) {
  return derive_rng(seed, {kBalanceStreamTag, image_id, copy_index});
}

inline PixelTransformId balance_jitter(Rng& rng) {
  return PixelTransformId(kBalanceJitters[static_cast<std::size_t>(uniform_int(rng, 0, 2))]);
}

struct BalanceCopy {
  std::int64_t image_id = 0;
  std::int64_t source_image_id = 0;
  int copy_index = 0;  // 1-based
  int transform = 0;
};

struct BalanceResult {
  DatasetManifest manifest;
  std::vector<BalanceCopy> copies;
};

/// Manifest side of replication: originals keep their ids, copies are
/// appended with fresh ids in (source order, copy index) order.
inline BalanceResult replicate_manifest(const DatasetManifest& m, const ReplicationPlan& plan, std::uint64_t seed) {
  std::unordered_map<std::int64_t, std::vector<const Annotation*>> by_image;
  for (const auto& a : m.annotations) by_image[a.image_id].push_back(&a);
  std::unordered_set<std::int64_t> image_ids;
  for (const auto& im : m.images) image_ids.insert(im.id);
  for (const auto& [id, k] : plan.extra_copies) {
    if (!image_ids.contains(id))
      throw ValidationError(ErrorKind::DanglingReference, "plan references unknown image " + std::to_string(id));
    if (k < 0) throw ValidationError(ErrorKind::InvalidConfig, "negative copy count");
  }

  std::int64_t next_image = 0, next_ann = 0;
  for (const auto& im : m.images) next_image = std::max(next_image, im.id);
  for (const auto& a : m.annotations) next_ann = std::max(next_ann, a.id);

  BalanceResult out;
  out.manifest = m;
  for (const auto& im : m.images) {
    const int copies = plan.copies_for(im.id);
    for (int k = 1; k <= copies; ++k) {
      ImageRecord copy;
      copy.id = ++next_image;
      copy.file_name = suffixed_name(im.file_name, "bal" + std::to_string(k));
      copy.width = im.width;
      copy.height = im.height;
      out.manifest.images.push_back(copy);
      for (const Annotation* a : by_image[im.id]) {
        Annotation dup = *a;
        dup.id = ++next_ann;
        dup.image_id = copy.id;
        out.manifest.annotations.push_back(std::move(dup));
      }
      Rng rng = balance_rng(seed, im.id, k);
      out.copies.push_back({copy.id, im.id, k, balance_jitter(rng).index()});
    }
  }
  return out;
}

/// Full replication: writes originals (byte copies) and jittered copies under
/// `out_root`, returning the expanded manifest.
inline BalanceResult apply_replication(const DatasetManifest& m, const ReplicationPlan& plan, std::uint64_t seed,
                                       const fs::path& image_root, const fs::path& out_root,
                                       unsigned jobs = default_jobs()) {
  for (const auto& im : m.images) {
    std::error_code ec;
    if (!fs::is_regular_file(image_root / im.file_name, ec))
      throw ValidationError(ErrorKind::MissingSourceImage, (image_root / im.file_name).string());
  }
  BalanceResult out = replicate_manifest(m, plan, seed);

  std::unordered_map<std::int64_t, const ImageRecord*> source;
  for (const auto& im : m.images) source.emplace(im.id, &im);

  parallel_for(m.images.size(), jobs, [&](std::size_t i) {
    const auto& im = m.images[i];
    copy_file_atomic(image_root / im.file_name, out_root / im.file_name);
  });
  parallel_for(out.copies.size(), jobs, [&](std::size_t i) {
    const BalanceCopy& c = out.copies[i];
    const ImageRecord& src = *source.at(c.source_image_id);
    const Image pixels = read_image(image_root / src.file_name);
    Rng rng = balance_rng(seed, c.source_image_id, c.copy_index);
    const PixelTransformId jitter = balance_jitter(rng);
    const auto& rec = out.manifest.images[m.images.size() + i];
    write_image(out_root / rec.file_name, apply(pixels, jitter, rng));
  });
  return out;
}

}  // namespace cocoaug
