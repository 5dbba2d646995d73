/* Copyright 2026 The PlaneSeg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "planeseg/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>

#include "planeseg/png_io.hpp"

namespace planeseg {

using nlohmann::json;

namespace {

json parse_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot open ") + what + ": " +
                         path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON in ") + path.string() + ": " +
                      e.what());
  }
  return j;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("failed writing: " + path.string());
}

double require_number(const json& j, const char* key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw FormatError(where + ": missing numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

}  // namespace

// ---- intrinsics ------------------------------------------------------

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open intrinsics: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid intrinsics JSON in " + path.string() + ": " +
                      e.what());
  }
  CameraIntrinsics intr;
  try {
    intr.fx = j.at("fx").get<double>();
    intr.fy = j.at("fy").get<double>();
    intr.cx = j.at("cx").get<double>();
    intr.cy = j.at("cy").get<double>();
    intr.width = j.at("width").get<int>();
    intr.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError("intrinsics " + path.string() + ": " + e.what());
  }
  intr.validate();
  return intr;
}

void save_intrinsics(const std::filesystem::path& path,
                     const CameraIntrinsics& intr) {
  intr.validate();
  json j{{"fx", intr.fx},     {"fy", intr.fy},
         {"cx", intr.cx},     {"cy", intr.cy},
         {"width", intr.width}, {"height", intr.height}};
  write_text_file(path, j.dump(2) + "\n");
}

// ---- depth -----------------------------------------------------------

DepthImage load_depth(const std::filesystem::path& path) {
  const Image16 img = read_png16_gray(path);
  return DepthImage{img.width, img.height, img.values};
}

void save_depth(const std::filesystem::path& path, const DepthImage& depth) {
  write_png16_gray(path, Image16{depth.width, depth.height, depth.values});
}

// ---- annotations -----------------------------------------------------

BoundingBox mask_bbox(const BinaryMask& mask) {
  int min_r = mask.height, max_r = -1, min_c = mask.width, max_c = -1;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      min_r = std::min(min_r, r);
      max_r = std::max(max_r, r);
      min_c = std::min(min_c, c);
      max_c = std::max(max_c, c);
    }
  }
  if (max_r < 0) return BoundingBox{};
  return BoundingBox{static_cast<double>(min_c), static_cast<double>(min_r),
                     static_cast<double>(max_c + 1),
                     static_cast<double>(max_r + 1)};
}

void save_annotation(const Annotation& ann,
                     const std::filesystem::path& stem) {
  const SegLabelMap& labels = ann.labels;
  Image16 img{labels.width, labels.height, {}};
  img.values.resize(labels.ids.size());
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    if (labels.ids[i] > 0xFFFF) {
      throw CapacityError("save_annotation: instance id exceeds 16-bit range");
    }
    img.values[i] = static_cast<std::uint16_t>(labels.ids[i]);
  }

  json sidecar;
  sidecar["image"] = {{"width", labels.width}, {"height", labels.height}};
  sidecar["label_png"] = stem.filename().string() + ".png";
  sidecar["source"] = ann.source;
  sidecar["intrinsics"] = ann.intrinsics_ref;
  json instances = json::array();
  for (const InstanceRecord& inst : ann.instances) {
    json rec{{"id", inst.id},
             {"plane",
              {{"normal", {inst.plane.normal.x(), inst.plane.normal.y(),
                           inst.plane.normal.z()}},
               {"offset", inst.plane.offset}}},
             {"box", {inst.box.x_min, inst.box.y_min, inst.box.x_max,
                      inst.box.y_max}},
             {"area_px", inst.area_px}};
    if (inst.score) rec["score"] = *inst.score;
    instances.push_back(std::move(rec));
  }
  sidecar["instances"] = std::move(instances);

  write_png16_gray(stem.string() + ".png", img);
  write_text_file(stem.string() + ".json", sidecar.dump(2) + "\n");
}

Annotation load_annotation(const std::filesystem::path& stem) {
  const std::filesystem::path png_path = stem.string() + ".png";
  const std::filesystem::path json_path = stem.string() + ".json";

  const Image16 img = read_png16_gray(png_path);
  const json sidecar = parse_json_file(json_path, "annotation sidecar");

  Annotation ann;
  ann.labels.width = img.width;
  ann.labels.height = img.height;
  ann.labels.ids.assign(img.values.begin(), img.values.end());
  ann.source = sidecar.value("source", "");
  ann.intrinsics_ref = sidecar.value("intrinsics", "");

  if (sidecar.contains("image")) {
    const int w = static_cast<int>(
        require_number(sidecar["image"], "width", json_path.string()));
    const int h = static_cast<int>(
        require_number(sidecar["image"], "height", json_path.string()));
    if (w != img.width || h != img.height) {
      throw IntegrityError(json_path.string() +
                           ": sidecar image size disagrees with label PNG");
    }
  }
  if (!sidecar.contains("instances") || !sidecar["instances"].is_array()) {
    throw FormatError(json_path.string() + ": missing 'instances' array");
  }

  std::set<std::uint32_t> sidecar_ids;
  for (const json& rec : sidecar["instances"]) {
    InstanceRecord inst;
    inst.id = static_cast<std::uint32_t>(
        require_number(rec, "id", json_path.string()));
    if (inst.id == 0 || !sidecar_ids.insert(inst.id).second) {
      throw IntegrityError(json_path.string() +
                           ": duplicate or zero instance id in sidecar");
    }
    if (!rec.contains("plane") || !rec["plane"].contains("normal") ||
        !rec["plane"]["normal"].is_array() ||
        rec["plane"]["normal"].size() != 3) {
      throw FormatError(json_path.string() + ": malformed plane record");
    }
    const json& n = rec["plane"]["normal"];
    inst.plane.normal =
        Vec3(n[0].get<double>(), n[1].get<double>(), n[2].get<double>());
    inst.plane.offset =
        require_number(rec["plane"], "offset", json_path.string());
    if (!rec.contains("box") || !rec["box"].is_array() ||
        rec["box"].size() != 4) {
      throw FormatError(json_path.string() + ": malformed box record");
    }
    inst.box = BoundingBox{rec["box"][0].get<double>(),
                           rec["box"][1].get<double>(),
                           rec["box"][2].get<double>(),
                           rec["box"][3].get<double>()};
    inst.area_px = static_cast<std::uint64_t>(
        require_number(rec, "area_px", json_path.string()));
    if (rec.contains("score")) inst.score = rec["score"].get<double>();
    ann.instances.push_back(std::move(inst));
  }
  std::sort(ann.instances.begin(), ann.instances.end(),
            [](const InstanceRecord& a, const InstanceRecord& b) {
              return a.id < b.id;
            });

  // Cross-check against the label image.
  std::map<std::uint32_t, std::uint64_t> png_areas;
  for (std::uint16_t v : img.values) {
    if (v != 0) ++png_areas[v];
  }
  if (png_areas.size() != sidecar_ids.size()) {
    throw IntegrityError(json_path.string() +
                         ": sidecar and label PNG list different ids");
  }
  for (const auto& [id, area] : png_areas) {
    if (!sidecar_ids.count(id)) {
      throw IntegrityError(json_path.string() + ": label id " +
                           std::to_string(id) + " missing from sidecar");
    }
  }
  for (const InstanceRecord& inst : ann.instances) {
    if (png_areas.at(inst.id) != inst.area_px) {
      throw IntegrityError(json_path.string() + ": area mismatch for id " +
                           std::to_string(inst.id));
    }
  }
  return ann;
}

// ---- detections ------------------------------------------------------

DetectionFile read_detections(const std::filesystem::path& path) {
  const json j = parse_json_file(path, "detections");
  DetectionFile file;
  file.k = static_cast<int>(require_number(j, "k", path.string()));
  file.width = static_cast<int>(require_number(j, "width", path.string()));
  file.height = static_cast<int>(require_number(j, "height", path.string()));
  if (file.k < 1) throw FormatError(path.string() + ": k must be >= 1");
  if (!j.contains("detections") || !j["detections"].is_array()) {
    throw FormatError(path.string() + ": missing 'detections' array");
  }
  for (const json& rec : j["detections"]) {
    Detection d;
    if (!rec.contains("box") || !rec["box"].is_array() ||
        rec["box"].size() != 4) {
      throw FormatError(path.string() + ": malformed box record");
    }
    d.box = BoundingBox{rec["box"][0].get<double>(),
                        rec["box"][1].get<double>(),
                        rec["box"][2].get<double>(),
                        rec["box"][3].get<double>()};
    if (!(d.box.x_min <= d.box.x_max && d.box.y_min <= d.box.y_max)) {
      throw FormatError(path.string() + ": box with negative extent");
    }
    d.score = require_number(rec, "score", path.string());
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw FormatError(path.string() + ": score outside [0,1]");
    }
    d.class_id = static_cast<int>(require_number(rec, "class", path.string()));
    if (!rec.contains("coeffs") || !rec["coeffs"].is_array()) {
      throw FormatError(path.string() + ": missing 'coeffs' array");
    }
    if (static_cast<int>(rec["coeffs"].size()) != file.k) {
      throw FormatError(path.string() +
                        ": coefficient length disagrees with header k");
    }
    double norm = 0.0;
    for (const json& c : rec["coeffs"]) {
      const double v = c.get<double>();
      if (!std::isfinite(v)) {
        throw FormatError(path.string() + ": non-finite coefficient");
      }
      d.coeffs.push_back(v);
      norm += v * v;
    }
    if (!(norm > 0.0)) {
      throw FormatError(path.string() + ": zero-norm coefficient vector");
    }
    file.detections.push_back(std::move(d));
  }
  return file;
}

void write_detections(const std::filesystem::path& path,
                      const DetectionFile& file) {
  json j;
  j["k"] = file.k;
  j["width"] = file.width;
  j["height"] = file.height;
  json dets = json::array();
  for (const Detection& d : file.detections) {
    if (static_cast<int>(d.coeffs.size()) != file.k) {
      throw FormatError("write_detections: record k differs from header");
    }
    dets.push_back(json{{"box", {d.box.x_min, d.box.y_min, d.box.x_max,
                                 d.box.y_max}},
                        {"score", d.score},
                        {"class", d.class_id},
                        {"coeffs", d.coeffs}});
  }
  j["detections"] = std::move(dets);
  write_text_file(path, j.dump(2) + "\n");
}

// ---- raw tensors -----------------------------------------------------

namespace {
constexpr char kTensorMagic[4] = {'P', 'S', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF),
                              static_cast<unsigned char>((v >> 16) & 0xFF),
                              static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

std::size_t RawTensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

RawTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTensorMagic, 4) != 0) {
    throw FormatError(path.string() + ": not a raw tensor file");
  }
  const std::uint32_t rank = get_u32(in);
  if (!in || rank == 0 || rank > 8) {
    throw FormatError(path.string() + ": unsupported tensor rank");
  }
  RawTensor t;
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.shape.push_back(get_u32(in));
    if (!in || t.shape.back() == 0) {
      throw FormatError(path.string() + ": zero tensor dimension");
    }
  }
  t.values.resize(t.element_count());
  in.read(reinterpret_cast<char*>(t.values.data()),
          static_cast<std::streamsize>(t.values.size() * sizeof(float)));
  if (!in || in.gcount() !=
                 static_cast<std::streamsize>(t.values.size() * sizeof(float))) {
    throw FormatError(path.string() + ": truncated tensor payload");
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, const RawTensor& t) {
  if (t.shape.empty() || t.values.size() != t.element_count()) {
    throw ShapeError("write_tensor: shape/payload mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kTensorMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
  for (std::uint32_t d : t.shape) put_u32(out, d);
  out.write(reinterpret_cast<const char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(float)));
  if (!out) throw IoError("failed writing: " + path.string());
}

// ---- PLY export ------------------------------------------------------

namespace {
// Stable palette: id 0 gray, others via golden-ratio hue stepping.
std::array<int, 3> palette_color(std::uint32_t id) {
  if (id == 0) return {128, 128, 128};
  const double hue = std::fmod(0.61803398875 * (id - 1), 1.0) * 6.0;
  const int sector = static_cast<int>(hue);
  const double frac = hue - sector;
  const double q = 1.0 - frac;
  double r = 0, g = 0, b = 0;
  switch (sector % 6) {
    case 0: r = 1; g = frac; break;
    case 1: r = q; g = 1; break;
    case 2: g = 1; b = frac; break;
    case 3: g = q; b = 1; break;
    case 4: r = frac; b = 1; break;
    default: r = 1; b = q; break;
  }
  return {static_cast<int>(std::lround(255 * r)),
          static_cast<int>(std::lround(255 * g)),
          static_cast<int>(std::lround(255 * b))};
}
}  // namespace

void export_ply(const std::filesystem::path& path, const PointCloud& cloud,
                const SegLabelMap& labels) {
  if (cloud.provenance.size() != cloud.points.size()) {
    throw ConfigError("export_ply: point cloud has no per-point provenance");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\n"
         "end_header\n";
  char line[128];
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const PixelRef px = cloud.provenance[i];
    std::uint32_t id = 0;
    if (px.row >= 0 && px.row < labels.height && px.col >= 0 &&
        px.col < labels.width) {
      id = labels.at(px.row, px.col);
    }
    const auto [r, g, b] = palette_color(id);
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %d %d %d\n",
                  cloud.points[i].x(), cloud.points[i].y(),
                  cloud.points[i].z(), r, g, b);
    out << line;
  }
  if (!out) throw IoError("failed writing: " + path.string());
}

}  // namespace planeseg
