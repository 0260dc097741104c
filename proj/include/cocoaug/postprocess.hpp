#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cocoaug/coco_io.hpp"
#include "cocoaug/error.hpp"
#include "cocoaug/geometry.hpp"
#include "cocoaug/parallel.hpp"

namespace cocoaug {

enum class DecayMode { Gaussian, Linear };

struct SoftNmsConfig {
  DecayMode mode = DecayMode::Gaussian;
  double sigma = 0.5;
  double score_floor = 0.001;
  double linear_iou_threshold = 0.3;  // Linear mode only

  void validate() const {
    if (!(sigma > 0)) throw ValidationError(ErrorKind::InvalidConfig, "sigma must be positive");
    if (!(score_floor >= 0 && score_floor < 1)) throw ValidationError(ErrorKind::InvalidConfig, "score floor must be in [0, 1)");
    if (!(linear_iou_threshold >= 0 && linear_iou_threshold <= 1))
      throw ValidationError(ErrorKind::InvalidConfig, "linear iou threshold must be in [0, 1]");
  }
};

namespace detail {

struct Candidate {
  Detection det;
  double original_score;
  std::size_t index;
};

/// score desc, then original score desc, then input order
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.det.score != b.det.score) return a.det.score > b.det.score;
  if (a.original_score != b.original_score) return a.original_score > b.original_score;
  return a.index < b.index;
}

inline void require_single_image(const std::vector<Detection>& dets) {
  for (const auto& d : dets)
    if (d.image_id != dets.front().image_id)
      throw ValidationError(ErrorKind::MixedImageIds, "detections span images " + std::to_string(dets.front().image_id) +
                                                          " and " + std::to_string(d.image_id));
}

inline std::vector<Candidate> candidates(const std::vector<Detection>& dets) {
  std::vector<Candidate> out;
  out.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) out.push_back({dets[i], dets[i].score, i});
  return out;
}

}  // namespace detail

/// Soft-NMS that ignores category labels when measuring overlap, so boxes of
/// different classes on the same object suppress each other. Labels are
/// carried through unchanged.
inline std::vector<Detection> soft_nms_class_agnostic(const std::vector<Detection>& dets,
                                                      const SoftNmsConfig& config = {}) {
  config.validate();
  detail::require_single_image(dets);
  auto remaining = detail::candidates(dets);
  std::vector<detail::Candidate> kept;
  kept.reserve(remaining.size());
  while (!remaining.empty()) {
    auto best_it = std::min_element(remaining.begin(), remaining.end(), detail::ranks_before);
    const detail::Candidate best = *best_it;
    remaining.erase(best_it);
    kept.push_back(best);
    for (auto& c : remaining) {
      const double overlap = iou(best.det.bbox, c.det.bbox);
      if (config.mode == DecayMode::Gaussian) {
        c.det.score *= std::exp(-(overlap * overlap) / config.sigma);
      } else if (overlap > config.linear_iou_threshold) {
        c.det.score *= 1.0 - overlap;
      }
    }
    std::erase_if(remaining, [&](const auto& c) { return c.det.score < config.score_floor; });
  }
  std::stable_sort(kept.begin(), kept.end(), detail::ranks_before);
  std::vector<Detection> out;
  out.reserve(kept.size());
  for (auto& c : kept) out.push_back(c.det);
  return out;
}

/// Greedy NMS. Boxes overlapping an already kept box by more than
/// `iou_threshold` are dropped; with class_agnostic false only boxes of the
/// same category compete.
inline std::vector<Detection> hard_nms(const std::vector<Detection>& dets, double iou_threshold,
                                       bool class_agnostic = true) {
  detail::require_single_image(dets);
  auto order = detail::candidates(dets);
  std::stable_sort(order.begin(), order.end(), detail::ranks_before);
  std::vector<Detection> kept;
  for (const auto& c : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return (class_agnostic || k.category_id == c.det.category_id) && iou(k.bbox, c.det.bbox) > iou_threshold;
    });
    if (!suppressed) kept.push_back(c.det);
  }
  return kept;
}

inline std::map<std::int64_t, std::vector<Detection>> group_by_image(const std::vector<Detection>& dets) {
  std::map<std::int64_t, std::vector<Detection>> groups;
  for (const auto& d : dets) groups[d.image_id].push_back(d);
  return groups;
}

/// Applies `fn` to each image's detections and concatenates the results in
/// ascending image id order.
template <typename Fn>
std::vector<Detection> per_image(const std::vector<Detection>& dets, unsigned jobs, Fn&& fn) {
  const auto groups = group_by_image(dets);
  std::vector<const std::vector<Detection>*> inputs;
  for (const auto& [id, g] : groups) inputs.push_back(&g);
  std::vector<std::vector<Detection>> results(inputs.size());
  parallel_for(inputs.size(), jobs, [&](std::size_t i) { results[i] = fn(*inputs[i]); });
  std::vector<Detection> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

inline std::vector<Detection> soft_nms_all(const std::vector<Detection>& dets, const SoftNmsConfig& config = {},
                                           unsigned jobs = 1) {
  config.validate();
  return per_image(dets, jobs, [&](const auto& g) { return soft_nms_class_agnostic(g, config); });
}

inline std::vector<Detection> hard_nms_all(const std::vector<Detection>& dets, double iou_threshold,
                                           bool class_agnostic = true, unsigned jobs = 1) {
  return per_image(dets, jobs, [&](const auto& g) { return hard_nms(g, iou_threshold, class_agnostic); });
}

/// Multi-model fusion: every run's scores are scaled by its weight, the runs
/// are concatenated in order, and each image goes through class-agnostic
/// soft-NMS.
inline std::vector<Detection> fuse_results(const std::vector<std::vector<Detection>>& runs,
                                           const std::vector<double>& weights, const SoftNmsConfig& config = {},
                                           unsigned jobs = 1) {
  if (runs.size() != weights.size())
    throw ValidationError(ErrorKind::WeightMismatch, std::to_string(runs.size()) + " runs but " +
                                                         std::to_string(weights.size()) + " weights");
  for (double w : weights)
    if (!(w > 0 && w <= 1)) throw ValidationError(ErrorKind::WeightMismatch, "weights must lie in (0, 1]");
  std::vector<Detection> all;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (Detection d : runs[r]) {
      d.score *= weights[r];
      all.push_back(d);
    }
  }
  return soft_nms_all(all, config, jobs);
}

}  // namespace cocoaug
