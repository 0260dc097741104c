#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "cocoaug/coco_io.hpp"
#include "cocoaug/error.hpp"

namespace cocoaug {

/// Crop rectangle in source-image pixels, corner form.
struct CropWindow {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  double area() const { return static_cast<double>(width()) * height(); }
  Box as_box() const { return {double(x_min), double(y_min), double(width()), double(height())}; }

  bool operator==(const CropWindow&) const = default;
};

inline bool window_fits(const CropWindow& w, int image_width, int image_height) {
  return 0 <= w.x_min && w.x_min < w.x_max && w.x_max <= image_width && 0 <= w.y_min && w.y_min < w.y_max &&
         w.y_max <= image_height;
}

enum class Verdict { Keep, IgnoreLoss, Discard };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Keep: return "KEEP";
    case Verdict::IgnoreLoss: return "IGNORE_LOSS";
    case Verdict::Discard: return "DISCARD";
  }
  return "?";
}

struct ClipDecision {
  Verdict verdict = Verdict::Discard;
  double iou = 0;
  double r = 0;                // clipped area / window area
  std::optional<Box> clipped;  // window frame; present unless discarded
};

inline std::optional<Box> intersect(const Box& a, const Box& b) {
  const double x0 = std::max(a.x, b.x);
  const double y0 = std::max(a.y, b.y);
  const double x1 = std::min(a.right(), b.right());
  const double y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return Box{x0, y0, x1 - x0, y1 - y0};
}

inline double iou(const Box& a, const Box& b) {
  const auto inter = intersect(a, b);
  if (!inter) return 0.0;
  const double i = inter->area();
  const double u = a.area() + b.area() - i;
  return u > 0 ? i / u : 0.0;
}

/// Window of size w x h centred on the image. Odd differences round the
/// top-left corner down.
inline CropWindow center_crop_window(int image_width, int image_height, int w, int h) {
  if (w <= 0 || h <= 0 || w > image_width || h > image_height)
    throw ValidationError(ErrorKind::InvalidCropSize, std::to_string(w) + "x" + std::to_string(h) + " in " +
                                                          std::to_string(image_width) + "x" +
                                                          std::to_string(image_height));
  // Both differences are non-negative, so integer division is floor.
  const int x_min = (image_width - w) / 2;
  const int y_min = (image_height - h) / 2;
  return {x_min, y_min, x_min + w, y_min + h};
}

/// Intersection of box and window, expressed relative to the window origin.
inline std::optional<Box> clip_box(const Box& box, const CropWindow& window) {
  auto inter = intersect(box, window.as_box());
  if (!inter) return std::nullopt;
  inter->x -= window.x_min;
  inter->y -= window.y_min;
  return inter;
}

/// Three-way retention rule for a box cut by a crop window:
/// KEEP when iou >= iou_keep and r > r_min, IGNORE_LOSS when iou < iou_keep
/// and r > r_min, DISCARD otherwise.
inline ClipDecision clip_decision(const Box& box, const CropWindow& window, double iou_keep = 0.5, double r_min = 0.01) {
  ClipDecision d;
  const auto inter = intersect(box, window.as_box());
  if (!inter) return d;
  d.iou = iou(box, *inter);
  d.r = inter->area() / window.area();
  if (!(d.r > r_min)) return d;
  d.verdict = d.iou >= iou_keep ? Verdict::Keep : Verdict::IgnoreLoss;
  d.clipped = Box{inter->x - window.x_min, inter->y - window.y_min, inter->w, inter->h};
  return d;
}

}  // namespace cocoaug
