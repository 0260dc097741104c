#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>

#include "cocoaug/error.hpp"
#include "cocoaug/fs_util.hpp"
#include "cocoaug/pixel_aug.hpp"

namespace cocoaug {

inline Image read_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ValidationError(ErrorKind::MissingSourceImage, path.string());
  const std::string bytes = read_text_file(path);
  const std::vector<std::uint8_t> buf(bytes.begin(), bytes.end());
  Image img = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (img.empty()) throw IoError("cannot decode image " + path.string());
  return img;
}

/// Encodes by the file extension (PNG, JPEG, ...) and writes atomically.
inline void write_image(const fs::path& path, const Image& img) {
  std::string ext = path.extension().string();
  if (ext.empty()) ext = ".png";
  std::vector<int> params;
  if (ext == ".jpg" || ext == ".jpeg" || ext == ".JPG" || ext == ".JPEG") params = {cv::IMWRITE_JPEG_QUALITY, 95};
  std::vector<std::uint8_t> buf;
  bool ok = false;
  try {
    ok = cv::imencode(ext, img, buf, params);
  } catch (const cv::Exception& e) {
    throw IoError("cannot encode " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot encode " + path.string());
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(buf.data()), buf.size()));
}

inline void copy_file_atomic(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  if (!fs::is_regular_file(from, ec)) throw ValidationError(ErrorKind::MissingSourceImage, from.string());
  if (fs::exists(to, ec) && fs::equivalent(from, to, ec)) return;
  write_file_atomic(to, read_text_file(from));
}

}  // namespace cocoaug
