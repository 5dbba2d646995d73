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
#ifndef PLANESEG_DATASET_IO_HPP_
#define PLANESEG_DATASET_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "planeseg/geometry.hpp"
#include "planeseg/nms.hpp"

namespace planeseg {

// ---- intrinsics ------------------------------------------------------

CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void save_intrinsics(const std::filesystem::path& path,
                     const CameraIntrinsics& intr);

// ---- depth -----------------------------------------------------------

// 16-bit single-channel PNG, millimeters, 0 = invalid.
DepthImage load_depth(const std::filesystem::path& path);
void save_depth(const std::filesystem::path& path, const DepthImage& depth);

// ---- annotations -----------------------------------------------------

// One annotated instance of a frame.
struct InstanceRecord {
  std::uint32_t id = 0;
  Plane plane;
  BoundingBox box;
  std::uint64_t area_px = 0;
  std::optional<double> score;  // predictions only
};

// Label image + sidecar pair. The label image is a 16-bit PNG of
// instance ids (0 = non-planar); the sidecar carries per-instance plane
// parameters, boxes, areas and frame metadata.
struct Annotation {
  SegLabelMap labels;
  std::vector<InstanceRecord> instances;  // ascending id
  std::string source;          // originating depth image, informational
  std::string intrinsics_ref;  // intrinsics file used, informational
};

// Writes <stem>.png and <stem>.json. Throws CapacityError when an id
// exceeds the 16-bit label range.
void save_annotation(const Annotation& ann,
                     const std::filesystem::path& stem);

// Loads the pair back and cross-checks it: the sidecar must list exactly
// the nonzero ids present in the PNG, with matching areas and bounding
// boxes. Throws IntegrityError on any mismatch.
Annotation load_annotation(const std::filesystem::path& stem);

// Tight bounding box of a mask in continuous pixel coordinates
// ([min_col, max_col+1) x [min_row, max_row+1)); zero box for an empty
// mask.
BoundingBox mask_bbox(const BinaryMask& mask);

// ---- detections ------------------------------------------------------

struct DetectionFile {
  int k = 0;  // coefficient count shared by every record
  int width = 0;
  int height = 0;
  std::vector<Detection> detections;
};

DetectionFile read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path,
                      const DetectionFile& file);

// ---- raw tensors -----------------------------------------------------

// Little-endian binary tensor: magic "PST1", u32 rank, u32 dims[rank],
// then float32 payload in row-major order.
struct RawTensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> values;

  std::size_t element_count() const;
};

RawTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const RawTensor& t);

// ---- PLY export ------------------------------------------------------

// ASCII point cloud colored by instance id with a stable palette
// (id 0 is gray). Points and labels are matched through provenance.
void export_ply(const std::filesystem::path& path, const PointCloud& cloud,
                const SegLabelMap& labels);

}  // namespace planeseg

#endif  // PLANESEG_DATASET_IO_HPP_
