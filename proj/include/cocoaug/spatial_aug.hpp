#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "cocoaug/coco_io.hpp"
#include "cocoaug/geometry.hpp"
#include "cocoaug/pixel_aug.hpp"
#include "cocoaug/random.hpp"

namespace cocoaug {

enum class CropKind { Center, RandomSized };

/// Crop family plus the interval the output short side is drawn from, as a
/// fraction of the source short side.
struct CropSpec {
  CropKind kind = CropKind::Center;
  double lower = 0.8;
  double upper = 0.99;

  CropSpec() = default;
  CropSpec(CropKind k, double lo, double hi) : kind(k), lower(lo), upper(hi) {
    if (!(0.0 < lo && lo <= hi && hi <= 1.0))
      throw ValidationError(ErrorKind::InvalidConfig, "crop fraction range must satisfy 0 < lower <= upper <= 1");
  }
  bool operator==(const CropSpec&) const = default;
};

struct CropSize {
  int width = 0;
  int height = 0;
  bool operator==(const CropSize&) const = default;
};

/// Output size for a short-side fraction, keeping the image aspect ratio.
/// Both sides round half up and are clamped to [1, source side].
inline CropSize crop_size_for_fraction(int image_width, int image_height, double fraction) {
  const bool width_is_short = image_width <= image_height;
  const std::int64_t short_side = width_is_short ? image_width : image_height;
  const std::int64_t long_side = width_is_short ? image_height : image_width;
  std::int64_t out_short = static_cast<std::int64_t>(std::floor(fraction * static_cast<double>(short_side) + 0.5));
  out_short = std::clamp<std::int64_t>(out_short, 1, short_side);
  // round_half_up(out_short * long / short) in exact integer arithmetic
  std::int64_t out_long = (2 * out_short * long_side + short_side) / (2 * short_side);
  out_long = std::clamp<std::int64_t>(out_long, 1, long_side);
  if (width_is_short) return {static_cast<int>(out_short), static_cast<int>(out_long)};
  return {static_cast<int>(out_long), static_cast<int>(out_short)};
}

inline double sample_fraction(Rng& rng, const CropSpec& spec) { return uniform_real(rng, spec.lower, spec.upper); }

inline CropWindow center_crop_for_fraction(const ImageRecord& image, double fraction) {
  const CropSize s = crop_size_for_fraction(image.width, image.height, fraction);
  return center_crop_window(image.width, image.height, s.width, s.height);
}

inline CropWindow random_sized_crop_for_fraction(Rng& rng, const ImageRecord& image, double fraction) {
  const CropSize s = crop_size_for_fraction(image.width, image.height, fraction);
  const int x_min = static_cast<int>(uniform_int(rng, 0, image.width - s.width));
  const int y_min = static_cast<int>(uniform_int(rng, 0, image.height - s.height));
  return {x_min, y_min, x_min + s.width, y_min + s.height};
}

struct SampledCrop {
  CropWindow window;
  double fraction = 0;
};

inline SampledCrop sample_center_crop(Rng& rng, const ImageRecord& image, const CropSpec& spec) {
  if (spec.kind != CropKind::Center) throw ValidationError(ErrorKind::InvalidConfig, "expected a center crop spec");
  const double f = sample_fraction(rng, spec);
  return {center_crop_for_fraction(image, f), f};
}

inline SampledCrop sample_random_sized_crop(Rng& rng, const ImageRecord& image, const CropSpec& spec) {
  if (spec.kind != CropKind::RandomSized)
    throw ValidationError(ErrorKind::InvalidConfig, "expected a random sized crop spec");
  const double f = sample_fraction(rng, spec);
  return {random_sized_crop_for_fraction(rng, image, f), f};
}

inline SampledCrop sample_crop(Rng& rng, const ImageRecord& image, const CropSpec& spec) {
  return spec.kind == CropKind::Center ? sample_center_crop(rng, image, spec) : sample_random_sized_crop(rng, image, spec);
}

struct CropResult {
  ImageRecord record;
  Image pixels;
  std::vector<Annotation> annotations;
  std::vector<Verdict> verdicts;  // one per input annotation, in input order
};

struct RetentionThresholds {
  double iou_keep = 0.5;
  double r_min = 0.01;
};

/// Remaps annotations into the window frame under the retention rule. The
/// output record keeps the input id and file name; callers rename.
inline CropResult crop_annotations(const ImageRecord& record, const std::vector<Annotation>& annotations,
                                   const CropWindow& window, RetentionThresholds thresholds = {}) {
  if (!window_fits(window, record.width, record.height))
    throw ValidationError(ErrorKind::InvalidCropSize, "window does not fit image " + std::to_string(record.id));
  CropResult out;
  out.record = record;
  out.record.width = window.width();
  out.record.height = window.height();
  out.record.extra = Json::object();
  out.verdicts.reserve(annotations.size());
  for (const auto& a : annotations) {
    const ClipDecision d = clip_decision(a.bbox, window, thresholds.iou_keep, thresholds.r_min);
    out.verdicts.push_back(d.verdict);
    if (d.verdict == Verdict::Discard) continue;
    Annotation c = a;
    c.bbox = *d.clipped;
    c.area = c.bbox.area();
    if (d.verdict == Verdict::IgnoreLoss) c.loss_mode = LossMode::IgnoreLoss;
    c.extra = Json::object();  // masks and keypoints no longer match the clipped box
    out.annotations.push_back(std::move(c));
  }
  return out;
}

inline CropResult crop_with_annotations(const ImageRecord& record, const Image& pixels,
                                        const std::vector<Annotation>& annotations, const CropWindow& window,
                                        RetentionThresholds thresholds = {}) {
  if (pixels.cols != record.width || pixels.rows != record.height)
    throw ValidationError(ErrorKind::UnsupportedImage, "pixel size does not match record " + std::to_string(record.id));
  CropResult out = crop_annotations(record, annotations, window, thresholds);
  out.pixels = pixels(cv::Rect(window.x_min, window.y_min, window.width(), window.height())).clone();
  return out;
}

}  // namespace cocoaug
