#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cocoaug/error.hpp"
#include "cocoaug/random.hpp"

namespace cocoaug {

/// 8-bit, 3-channel pixel buffer (BGR as loaded by OpenCV).
using Image = cv::Mat;

inline constexpr int kPixelTransformCount = 30;

class PixelTransformId {
 public:
  explicit PixelTransformId(int index) : index_(index) {
    if (index < 0 || index >= kPixelTransformCount)
      throw ValidationError(ErrorKind::InvalidConfig, "pixel transform index " + std::to_string(index) + " not in [0, 29]");
  }
  int index() const { return index_; }
  bool operator==(const PixelTransformId&) const = default;

 private:
  int index_;
};

struct ParamRange {
  std::string name;
  double lo;
  double hi;
};

struct PixelTransformSpec {
  int index;
  std::string name;
  std::vector<ParamRange> params;
};

/// The frozen transform table. Indices and names are part of the output
/// contract: changing either changes golden outputs.
inline const std::vector<PixelTransformSpec>& registry() {
  static const std::vector<PixelTransformSpec> specs = {
      {0, "brightness_shift", {{"delta", -40, 40}}},
      {1, "contrast_scale", {{"alpha", 0.6, 1.4}}},
      {2, "saturation_shift", {{"delta", -50, 50}}},
      {3, "hue_shift", {{"delta", -18, 18}}},
      {4, "channel_shuffle", {{"permutation", 1, 5}}},
      {5, "channel_drop", {{"channel", 0, 2}}},
      {6, "gamma", {{"gamma", 0.6, 1.6}}},
      {7, "gaussian_noise", {{"sigma", 5, 25}}},
      {8, "salt_and_pepper", {{"amount", 0.01, 0.05}}},
      {9, "gaussian_blur", {{"kernel_half", 1, 3}}},
      {10, "median_blur", {{"kernel_half", 1, 2}}},
      {11, "motion_blur", {{"kernel_half", 1, 4}, {"direction", 0, 3}}},
      {12, "sharpen", {{"alpha", 0.2, 0.8}}},
      {13, "emboss", {{"alpha", 0.2, 0.7}}},
      {14, "clahe", {{"clip_limit", 1.0, 4.0}}},
      {15, "histogram_equalize", {}},
      {16, "solarize", {{"threshold", 128, 254}}},
      {17, "posterize", {{"bits", 3, 6}}},
      {18, "invert", {}},
      {19, "grayscale", {}},
      {20, "sepia", {}},
      {21, "rgb_shift", {{"delta_b", -20, 20}, {"delta_g", -20, 20}, {"delta_r", -20, 20}}},
      {22, "jpeg_compression", {{"quality", 20, 60}}},
      {23, "downscale", {{"scale", 0.25, 0.75}}},
      {24, "multiplicative_noise", {{"spread", 0.05, 0.15}}},
      {25, "fog", {{"density", 0.2, 0.5}}},
      {26, "shadow", {{"darkness", 0.4, 0.7}}},
      {27, "sun_flare", {{"radius", 0.1, 0.4}, {"intensity", 0.3, 0.7}}},
      {28, "color_jitter", {{"brightness", -25, 25}, {"contrast", 0.8, 1.2}, {"saturation", 0.7, 1.3}}},
      {29, "tone_curve", {{"low", 0.15, 0.35}, {"high", 0.65, 0.85}}},
  };
  return specs;
}

inline PixelTransformId pick(Rng& rng) {
  return PixelTransformId(static_cast<int>(uniform_int(rng, 0, kPixelTransformCount - 1)));
}

namespace detail {

inline double draw(Rng& rng, int index, std::size_t param) {
  const auto& p = registry()[static_cast<std::size_t>(index)].params[param];
  return uniform_real(rng, p.lo, p.hi);
}

inline int draw_int(Rng& rng, int index, std::size_t param) {
  const auto& p = registry()[static_cast<std::size_t>(index)].params[param];
  return static_cast<int>(uniform_int(rng, static_cast<std::int64_t>(p.lo), static_cast<std::int64_t>(p.hi)));
}

inline std::uint8_t sat8(double v) { return cv::saturate_cast<std::uint8_t>(std::lround(v)); }

template <typename F>
Image apply_lut(const Image& src, F&& curve) {
  cv::Mat lut(1, 256, CV_8U);
  for (int i = 0; i < 256; ++i) lut.at<std::uint8_t>(i) = sat8(curve(static_cast<double>(i)));
  Image out;
  cv::LUT(src, lut, out);
  return out;
}

template <typename F>
Image per_pixel(const Image& src, F&& fn) {
  Image out = src.clone();
  for (int y = 0; y < out.rows; ++y) {
    auto* row = out.ptr<cv::Vec3b>(y);
    for (int x = 0; x < out.cols; ++x) fn(row[x], x, y);
  }
  return out;
}

inline Image shift_hsv_channel(const Image& src, int channel, int delta) {
  Image hsv;
  cv::cvtColor(src, hsv, cv::COLOR_BGR2HSV);
  for (int y = 0; y < hsv.rows; ++y) {
    auto* row = hsv.ptr<cv::Vec3b>(y);
    for (int x = 0; x < hsv.cols; ++x) {
      if (channel == 0) {
        row[x][0] = static_cast<std::uint8_t>(((row[x][0] + delta) % 180 + 180) % 180);
      } else {
        row[x][channel] = cv::saturate_cast<std::uint8_t>(row[x][channel] + delta);
      }
    }
  }
  Image out;
  cv::cvtColor(hsv, out, cv::COLOR_HSV2BGR);
  return out;
}

inline Image scale_saturation(const Image& src, double factor) {
  Image hsv;
  cv::cvtColor(src, hsv, cv::COLOR_BGR2HSV);
  for (int y = 0; y < hsv.rows; ++y) {
    auto* row = hsv.ptr<cv::Vec3b>(y);
    for (int x = 0; x < hsv.cols; ++x) row[x][1] = sat8(row[x][1] * factor);
  }
  Image out;
  cv::cvtColor(hsv, out, cv::COLOR_HSV2BGR);
  return out;
}

inline Image blend_filter(const Image& src, const cv::Mat& kernel, double alpha) {
  Image filtered, out;
  cv::filter2D(src, filtered, -1, kernel, cv::Point(-1, -1), 0, cv::BORDER_REFLECT_101);
  cv::addWeighted(src, 1.0 - alpha, filtered, alpha, 0.0, out);
  return out;
}

inline Image contrast(const Image& src, double alpha) {
  return apply_lut(src, [alpha](double v) { return (v - 128.0) * alpha + 128.0; });
}

inline Image brightness(const Image& src, double delta) {
  return apply_lut(src, [delta](double v) { return v + delta; });
}

}  // namespace detail

/// Applies transform `id` with parameters drawn from `rng`. Geometry is never
/// touched: the result has the input's size and channel layout.
inline Image apply(const Image& image, PixelTransformId id, Rng& rng) {
  if (image.empty() || image.type() != CV_8UC3)
    throw ValidationError(ErrorKind::UnsupportedImage, "expected a non-empty 8-bit 3-channel image");
  using detail::draw;
  using detail::draw_int;
  const int i = id.index();
  switch (i) {
    case 0: return detail::brightness(image, std::round(draw(rng, i, 0)));
    case 1: return detail::contrast(image, draw(rng, i, 0));
    case 2: return detail::shift_hsv_channel(image, 1, static_cast<int>(std::lround(draw(rng, i, 0))));
    case 3: return detail::shift_hsv_channel(image, 0, static_cast<int>(std::lround(draw(rng, i, 0))));
    case 4: {
      static constexpr std::array<std::array<int, 3>, 6> perms = {
          {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
      const auto& p = perms[static_cast<std::size_t>(draw_int(rng, i, 0))];
      return detail::per_pixel(image, [&p](cv::Vec3b& px, int, int) {
        const cv::Vec3b in = px;
        for (int c = 0; c < 3; ++c) px[c] = in[p[static_cast<std::size_t>(c)]];
      });
    }
    case 5: {
      const int channel = draw_int(rng, i, 0);
      return detail::per_pixel(image, [channel](cv::Vec3b& px, int, int) { px[channel] = 0; });
    }
    case 6: {
      const double gamma = draw(rng, i, 0);
      return detail::apply_lut(image, [gamma](double v) { return 255.0 * std::pow(v / 255.0, gamma); });
    }
    case 7: {
      const double sigma = draw(rng, i, 0);
      return detail::per_pixel(image, [&](cv::Vec3b& px, int, int) {
        for (int c = 0; c < 3; ++c) px[c] = detail::sat8(px[c] + sigma * standard_normal(rng));
      });
    }
    case 8: {
      const double amount = draw(rng, i, 0);
      return detail::per_pixel(image, [&](cv::Vec3b& px, int, int) {
        if (uniform01(rng) < amount) {
          const std::uint8_t v = (rng() & 1U) ? 255 : 0;
          px = cv::Vec3b(v, v, v);
        }
      });
    }
    case 9: {
      const int k = 2 * draw_int(rng, i, 0) + 1;
      Image out;
      cv::GaussianBlur(image, out, cv::Size(k, k), 0, 0, cv::BORDER_REFLECT_101);
      return out;
    }
    case 10: {
      const int k = 2 * draw_int(rng, i, 0) + 1;
      Image out;
      cv::medianBlur(image, out, k);
      return out;
    }
    case 11: {
      const int k = 2 * draw_int(rng, i, 0) + 1;
      const int direction = draw_int(rng, i, 1);
      cv::Mat kernel = cv::Mat::zeros(k, k, CV_32F);
      for (int t = 0; t < k; ++t) {
        switch (direction) {
          case 0: kernel.at<float>(k / 2, t) = 1.0f; break;
          case 1: kernel.at<float>(t, k / 2) = 1.0f; break;
          case 2: kernel.at<float>(t, t) = 1.0f; break;
          default: kernel.at<float>(t, k - 1 - t) = 1.0f; break;
        }
      }
      kernel /= static_cast<float>(k);
      Image out;
      cv::filter2D(image, out, -1, kernel, cv::Point(-1, -1), 0, cv::BORDER_REFLECT_101);
      return out;
    }
    case 12: {
      const cv::Mat kernel = (cv::Mat_<float>(3, 3) << 0, -1, 0, -1, 5, -1, 0, -1, 0);
      return detail::blend_filter(image, kernel, draw(rng, i, 0));
    }
    case 13: {
      const cv::Mat kernel = (cv::Mat_<float>(3, 3) << -2, -1, 0, -1, 1, 1, 0, 1, 2);
      return detail::blend_filter(image, kernel, draw(rng, i, 0));
    }
    case 14: {
      Image lab;
      cv::cvtColor(image, lab, cv::COLOR_BGR2Lab);
      std::vector<cv::Mat> planes;
      cv::split(lab, planes);
      auto clahe = cv::createCLAHE(draw(rng, i, 0), cv::Size(8, 8));
      clahe->apply(planes[0], planes[0]);
      cv::merge(planes, lab);
      Image out;
      cv::cvtColor(lab, out, cv::COLOR_Lab2BGR);
      return out;
    }
    case 15: {
      Image ycc;
      cv::cvtColor(image, ycc, cv::COLOR_BGR2YCrCb);
      std::vector<cv::Mat> planes;
      cv::split(ycc, planes);
      cv::equalizeHist(planes[0], planes[0]);
      cv::merge(planes, ycc);
      Image out;
      cv::cvtColor(ycc, out, cv::COLOR_YCrCb2BGR);
      return out;
    }
    case 16: {
      const int threshold = draw_int(rng, i, 0);
      return detail::apply_lut(image, [threshold](double v) { return v >= threshold ? 255.0 - v : v; });
    }
    case 17: {
      const int bits = draw_int(rng, i, 0);
      const int mask = (0xFF << (8 - bits)) & 0xFF;
      return detail::apply_lut(image, [mask](double v) { return static_cast<double>(static_cast<int>(v) & mask); });
    }
    case 18: {
      Image out;
      cv::bitwise_not(image, out);
      return out;
    }
    case 19: {
      Image gray, out;
      cv::cvtColor(image, gray, cv::COLOR_BGR2GRAY);
      cv::cvtColor(gray, out, cv::COLOR_GRAY2BGR);
      return out;
    }
    case 20: {
      const cv::Matx33f sepia(0.131f, 0.534f, 0.272f,  //
                              0.168f, 0.686f, 0.349f,  //
                              0.189f, 0.769f, 0.393f);
      Image out;
      cv::transform(image, out, sepia);
      return out;
    }
    case 21: {
      const cv::Vec3i delta(static_cast<int>(std::lround(draw(rng, i, 0))),
                            static_cast<int>(std::lround(draw(rng, i, 1))),
                            static_cast<int>(std::lround(draw(rng, i, 2))));
      return detail::per_pixel(image, [&delta](cv::Vec3b& px, int, int) {
        for (int c = 0; c < 3; ++c) px[c] = cv::saturate_cast<std::uint8_t>(px[c] + delta[c]);
      });
    }
    case 22: {
      const int quality = draw_int(rng, i, 0);
      std::vector<std::uint8_t> buf;
      cv::imencode(".jpg", image, buf, {cv::IMWRITE_JPEG_QUALITY, quality});
      return cv::imdecode(buf, cv::IMREAD_COLOR);
    }
    case 23: {
      const double scale = draw(rng, i, 0);
      const cv::Size small(std::max(1, static_cast<int>(std::lround(image.cols * scale))),
                           std::max(1, static_cast<int>(std::lround(image.rows * scale))));
      Image down, out;
      cv::resize(image, down, small, 0, 0, cv::INTER_NEAREST);
      cv::resize(down, out, image.size(), 0, 0, cv::INTER_LINEAR);
      return out;
    }
    case 24: {
      const double spread = draw(rng, i, 0);
      return detail::per_pixel(image, [&](cv::Vec3b& px, int, int) {
        const double m = uniform_real(rng, 1.0 - spread, 1.0 + spread);
        for (int c = 0; c < 3; ++c) px[c] = detail::sat8(px[c] * m);
      });
    }
    case 25: {
      const double density = draw(rng, i, 0);
      return detail::apply_lut(image, [density](double v) { return (1.0 - density) * v + density * 235.0; });
    }
    case 26: {
      const double darkness = draw(rng, i, 0);
      const int W = image.cols, H = image.rows;
      const int top = static_cast<int>(uniform_int(rng, 0, H - 1));
      const int bottom = static_cast<int>(uniform_int(rng, top, H - 1));
      int a = static_cast<int>(uniform_int(rng, 0, W - 1)), b = static_cast<int>(uniform_int(rng, 0, W - 1));
      int c = static_cast<int>(uniform_int(rng, 0, W - 1)), d = static_cast<int>(uniform_int(rng, 0, W - 1));
      if (a > b) std::swap(a, b);
      if (c > d) std::swap(c, d);
      cv::Mat mask = cv::Mat::zeros(image.size(), CV_8U);
      const std::vector<cv::Point> quad = {{a, top}, {b, top}, {d, bottom}, {c, bottom}};
      cv::fillConvexPoly(mask, quad, cv::Scalar(255));
      return detail::per_pixel(image, [&](cv::Vec3b& px, int x, int y) {
        if (mask.at<std::uint8_t>(y, x) == 0) return;
        for (int k = 0; k < 3; ++k) px[k] = detail::sat8(px[k] * darkness);
      });
    }
    case 27: {
      const double radius = std::max(1.0, draw(rng, i, 0) * std::min(image.cols, image.rows));
      const double intensity = draw(rng, i, 1);
      const double cx = static_cast<double>(uniform_int(rng, 0, image.cols - 1));
      const double cy = static_cast<double>(uniform_int(rng, 0, image.rows - 1));
      return detail::per_pixel(image, [&](cv::Vec3b& px, int x, int y) {
        const double dist = std::hypot(x - cx, y - cy);
        const double add = 255.0 * intensity * std::max(0.0, 1.0 - dist / radius);
        for (int k = 0; k < 3; ++k) px[k] = detail::sat8(px[k] + add);
      });
    }
    case 28: {
      const double delta = std::round(draw(rng, i, 0));
      const double alpha = draw(rng, i, 1);
      const double saturation = draw(rng, i, 2);
      return detail::scale_saturation(detail::contrast(detail::brightness(image, delta), alpha), saturation);
    }
    case 29: {
      const double low = draw(rng, i, 0);
      const double high = draw(rng, i, 1);
      // Cubic Bezier through (0,0) and (1,1) with inner control values low/high.
      return detail::apply_lut(image, [low, high](double v) {
        const double t = v / 255.0;
        const double s = 1.0 - t;
        return 255.0 * (3 * s * s * t * low + 3 * s * t * t * high + t * t * t);
      });
    }
    default: break;
  }
  throw ValidationError(ErrorKind::InvalidConfig, "unknown pixel transform " + std::to_string(i));
}

}  // namespace cocoaug
