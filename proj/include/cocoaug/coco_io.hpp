#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "cocoaug/error.hpp"
#include "cocoaug/fs_util.hpp"

namespace cocoaug {

using Json = nlohmann::ordered_json;

/// Axis-aligned box in COCO xywh form (top-left corner plus size), in pixels.
struct Box {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  bool operator==(const Box&) const = default;
};

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  Json extra = Json::object();  // keys we do not interpret (license, coco_url, ...)

  bool operator==(const ImageRecord&) const = default;
};

enum class LossMode { Keep, IgnoreLoss };

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Box bbox;
  double area = 0;
  int iscrowd = 0;
  LossMode loss_mode = LossMode::Keep;
  Json extra = Json::object();  // segmentation and friends, carried verbatim

  bool operator==(const Annotation&) const = default;
};

struct Category {
  std::int64_t id = 0;
  std::string name;
  Json extra = Json::object();

  bool operator==(const Category&) const = default;
};

struct DatasetManifest {
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  std::vector<Category> categories;
  Json extra = Json::object();  // info, licenses, ...

  bool operator==(const DatasetManifest&) const = default;
};

struct Detection {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Box bbox;
  double score = 0;

  bool operator==(const Detection&) const = default;
};

enum class ClampPolicy { Clamp, Reject };

namespace detail {

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(ErrorKind::MissingField, std::string(key) + " in " + where);
  return *it;
}

inline std::int64_t as_int(const Json& v, const char* key, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  throw ValidationError(ErrorKind::MalformedJson, std::string(key) + " must be an integer in " + where);
}

inline double as_number(const Json& v, const char* key, const std::string& where) {
  if (!v.is_number()) throw ValidationError(ErrorKind::MalformedJson, std::string(key) + " must be a number in " + where);
  return v.get<double>();
}

inline Box parse_bbox(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4)
    throw ValidationError(ErrorKind::MalformedJson, "bbox must be [x,y,w,h] in " + where);
  return {as_number(v[0], "bbox", where), as_number(v[1], "bbox", where), as_number(v[2], "bbox", where),
          as_number(v[3], "bbox", where)};
}

inline Json collect_extra(const Json& obj, std::initializer_list<const char*> known) {
  Json extra = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (const char* k : known) is_known = is_known || it.key() == k;
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

inline Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(ErrorKind::MalformedJson, where + ": " + e.what());
  }
}

}  // namespace detail

/// Integral values serialize as JSON integers, everything else as the
/// shortest round-tripping decimal.
inline Json number_json(double v) {
  if (v == std::floor(v) && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  return v;
}

/// Box coordinates are stored with at most two decimals.
inline double quantize_coord(double v) { return std::round(v * 100.0) / 100.0; }

inline Box quantize(const Box& b) {
  return {quantize_coord(b.x), quantize_coord(b.y), quantize_coord(b.w), quantize_coord(b.h)};
}

inline Json bbox_json(const Box& b) {
  const Box q = quantize(b);
  return Json::array({number_json(q.x), number_json(q.y), number_json(q.w), number_json(q.h)});
}

/// Clips `box` to a width x height image. Returns false if nothing remains.
inline bool clamp_to_image(Box& box, int width, int height) {
  const double x0 = std::max(box.x, 0.0);
  const double y0 = std::max(box.y, 0.0);
  const double x1 = std::min(box.right(), static_cast<double>(width));
  const double y1 = std::min(box.bottom(), static_cast<double>(height));
  if (x1 <= x0 || y1 <= y0) return false;
  if (x0 != box.x || y0 != box.y || x1 != box.right() || y1 != box.bottom()) box = {x0, y0, x1 - x0, y1 - y0};
  return true;
}

inline bool inside_image(const Box& box, int width, int height) {
  return box.x >= 0 && box.y >= 0 && box.right() <= width && box.bottom() <= height;
}

/// Checks ids, references and box bounds. Boxes that leave their image are
/// clipped under Clamp (area recomputed) or rejected under Reject.
inline void validate_manifest(DatasetManifest& m, ClampPolicy policy) {
  std::unordered_map<std::int64_t, const ImageRecord*> images;
  for (const auto& im : m.images) {
    if (im.width <= 0 || im.height <= 0)
      throw ValidationError(ErrorKind::MalformedJson, "image " + std::to_string(im.id) + " has non-positive size");
    if (!images.emplace(im.id, &im).second)
      throw ValidationError(ErrorKind::DuplicateId, "image id " + std::to_string(im.id));
  }
  std::unordered_set<std::int64_t> categories;
  for (const auto& c : m.categories) {
    if (c.name.empty()) throw ValidationError(ErrorKind::MalformedJson, "category " + std::to_string(c.id) + " has empty name");
    if (!categories.insert(c.id).second)
      throw ValidationError(ErrorKind::DuplicateId, "category id " + std::to_string(c.id));
  }
  std::unordered_set<std::int64_t> ann_ids;
  for (auto& a : m.annotations) {
    const std::string where = "annotation " + std::to_string(a.id);
    if (!ann_ids.insert(a.id).second) throw ValidationError(ErrorKind::DuplicateId, where);
    auto im = images.find(a.image_id);
    if (im == images.end() || !categories.contains(a.category_id))
      throw ValidationError(ErrorKind::DanglingReference, where);
    if (!(a.bbox.w > 0) || !(a.bbox.h > 0)) throw ValidationError(ErrorKind::InvalidBox, where + " has non-positive size");
    const int W = im->second->width;
    const int H = im->second->height;
    if (!inside_image(a.bbox, W, H)) {
      if (policy == ClampPolicy::Reject || !clamp_to_image(a.bbox, W, H))
        throw ValidationError(ErrorKind::OutOfBoundsBox, where);
    }
    a.area = a.bbox.area();
  }
}

inline DatasetManifest manifest_from_json(const Json& root, ClampPolicy policy = ClampPolicy::Clamp) {
  if (!root.is_object()) throw ValidationError(ErrorKind::MalformedJson, "top level must be an object");
  DatasetManifest m;
  const auto& images = detail::require(root, "images", "manifest");
  const auto& annotations = detail::require(root, "annotations", "manifest");
  const auto& categories = detail::require(root, "categories", "manifest");
  if (!images.is_array() || !annotations.is_array() || !categories.is_array())
    throw ValidationError(ErrorKind::MalformedJson, "images, annotations and categories must be arrays");

  m.images.reserve(images.size());
  for (const auto& j : images) {
    if (!j.is_object()) throw ValidationError(ErrorKind::MalformedJson, "image entry must be an object");
    ImageRecord im;
    im.id = detail::as_int(detail::require(j, "id", "image"), "id", "image");
    const std::string where = "image " + std::to_string(im.id);
    const auto& fname = detail::require(j, "file_name", where);
    if (!fname.is_string()) throw ValidationError(ErrorKind::MalformedJson, "file_name in " + where);
    im.file_name = fname.get<std::string>();
    im.width = static_cast<int>(detail::as_int(detail::require(j, "width", where), "width", where));
    im.height = static_cast<int>(detail::as_int(detail::require(j, "height", where), "height", where));
    im.extra = detail::collect_extra(j, {"id", "file_name", "width", "height"});
    m.images.push_back(std::move(im));
  }

  m.annotations.reserve(annotations.size());
  for (const auto& j : annotations) {
    if (!j.is_object()) throw ValidationError(ErrorKind::MalformedJson, "annotation entry must be an object");
    Annotation a;
    a.id = detail::as_int(detail::require(j, "id", "annotation"), "id", "annotation");
    const std::string where = "annotation " + std::to_string(a.id);
    a.image_id = detail::as_int(detail::require(j, "image_id", where), "image_id", where);
    a.category_id = detail::as_int(detail::require(j, "category_id", where), "category_id", where);
    a.bbox = detail::parse_bbox(detail::require(j, "bbox", where), where);
    if (auto it = j.find("iscrowd"); it != j.end()) a.iscrowd = static_cast<int>(detail::as_int(*it, "iscrowd", where));
    if (auto it = j.find("ignore"); it != j.end())
      a.loss_mode = detail::as_int(*it, "ignore", where) != 0 ? LossMode::IgnoreLoss : LossMode::Keep;
    a.extra = detail::collect_extra(j, {"id", "image_id", "category_id", "bbox", "area", "iscrowd", "ignore"});
    m.annotations.push_back(std::move(a));
  }

  m.categories.reserve(categories.size());
  for (const auto& j : categories) {
    if (!j.is_object()) throw ValidationError(ErrorKind::MalformedJson, "category entry must be an object");
    Category c;
    c.id = detail::as_int(detail::require(j, "id", "category"), "id", "category");
    const std::string where = "category " + std::to_string(c.id);
    const auto& name = detail::require(j, "name", where);
    if (!name.is_string()) throw ValidationError(ErrorKind::MalformedJson, "name in " + where);
    c.name = name.get<std::string>();
    c.extra = detail::collect_extra(j, {"id", "name"});
    m.categories.push_back(std::move(c));
  }

  m.extra = detail::collect_extra(root, {"images", "annotations", "categories"});
  validate_manifest(m, policy);
  return m;
}

inline DatasetManifest parse_manifest(const std::string& text, ClampPolicy policy = ClampPolicy::Clamp) {
  return manifest_from_json(detail::parse_json(text, "manifest"), policy);
}

inline DatasetManifest load_manifest(const fs::path& path, ClampPolicy policy = ClampPolicy::Clamp) {
  return parse_manifest(read_text_file(path), policy);
}

inline Json to_json(const DatasetManifest& m) {
  Json root = Json::object();
  Json images = Json::array();
  for (const auto& im : m.images) {
    Json j = {{"id", im.id}, {"file_name", im.file_name}, {"width", im.width}, {"height", im.height}};
    for (auto it = im.extra.begin(); it != im.extra.end(); ++it) j[it.key()] = it.value();
    images.push_back(std::move(j));
  }
  Json annotations = Json::array();
  for (const auto& a : m.annotations) {
    const Box q = quantize(a.bbox);
    Json j = {{"id", a.id},
              {"image_id", a.image_id},
              {"category_id", a.category_id},
              {"bbox", bbox_json(q)},
              {"area", number_json(q.area())},
              {"iscrowd", a.iscrowd}};
    if (a.loss_mode == LossMode::IgnoreLoss) j["ignore"] = 1;
    for (auto it = a.extra.begin(); it != a.extra.end(); ++it) j[it.key()] = it.value();
    annotations.push_back(std::move(j));
  }
  Json categories = Json::array();
  for (const auto& c : m.categories) {
    Json j = {{"id", c.id}, {"name", c.name}};
    for (auto it = c.extra.begin(); it != c.extra.end(); ++it) j[it.key()] = it.value();
    categories.push_back(std::move(j));
  }
  for (auto it = m.extra.begin(); it != m.extra.end(); ++it) root[it.key()] = it.value();
  root["images"] = std::move(images);
  root["annotations"] = std::move(annotations);
  root["categories"] = std::move(categories);
  return root;
}

inline std::string serialize_manifest(const DatasetManifest& m) { return to_json(m).dump() + "\n"; }

inline void save_manifest(const DatasetManifest& m, const fs::path& path) {
  write_file_atomic(path, serialize_manifest(m));
}

// ---- detection results ---------------------------------------------------

inline std::vector<Detection> parse_detections(const std::string& text) {
  const Json root = detail::parse_json(text, "results");
  if (!root.is_array()) throw ValidationError(ErrorKind::MalformedJson, "results must be a JSON array");
  std::vector<Detection> out;
  out.reserve(root.size());
  std::size_t index = 0;
  for (const auto& j : root) {
    const std::string where = "result #" + std::to_string(index++);
    if (!j.is_object()) throw ValidationError(ErrorKind::MalformedJson, where + " must be an object");
    Detection d;
    d.image_id = detail::as_int(detail::require(j, "image_id", where), "image_id", where);
    d.category_id = detail::as_int(detail::require(j, "category_id", where), "category_id", where);
    d.bbox = detail::parse_bbox(detail::require(j, "bbox", where), where);
    d.score = detail::as_number(detail::require(j, "score", where), "score", where);
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw ValidationError(ErrorKind::ScoreOutOfRange, where);
    if (!(d.bbox.w > 0) || !(d.bbox.h > 0)) throw ValidationError(ErrorKind::InvalidBox, where);
    out.push_back(d);
  }
  return out;
}

inline std::vector<Detection> load_detections(const fs::path& path) { return parse_detections(read_text_file(path)); }

inline std::string serialize_detections(const std::vector<Detection>& dets) {
  Json root = Json::array();
  for (const auto& d : dets) {
    root.push_back({{"image_id", d.image_id},
                    {"category_id", d.category_id},
                    {"bbox", bbox_json(d.bbox)},
                    {"score", number_json(d.score)}});
  }
  return root.dump() + "\n";
}

inline void save_detections(const std::vector<Detection>& dets, const fs::path& path) {
  write_file_atomic(path, serialize_detections(dets));
}

}  // namespace cocoaug
