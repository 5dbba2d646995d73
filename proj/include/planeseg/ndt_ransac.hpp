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
#ifndef PLANESEG_NDT_RANSAC_HPP_
#define PLANESEG_NDT_RANSAC_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "planeseg/geometry.hpp"

namespace planeseg {

using CellIndex = std::array<std::int32_t, 3>;

// Gaussian statistics of one voxel. Eigen-structure (eigenvalues sorted
// descending, normal = eigenvector of the smallest) is only filled for
// cells with count >= min_points_per_cell.
struct NDTCell {
  Vec3 mean = Vec3::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  std::size_t count = 0;
  std::array<double, 3> eigenvalues{0.0, 0.0, 0.0};  // l1 >= l2 >= l3
  Vec3 normal = Vec3::Zero();
  bool has_eigen = false;
  bool planar = false;
  std::vector<std::uint32_t> point_indices;  // members, cloud order
};

struct VoxelGrid {
  double cell_size = 0.0;
  std::map<CellIndex, NDTCell> cells;  // ordered: deterministic iteration
};

// One extracted plane instance. The mask is empty until rasterization.
struct PlaneInstance {
  Plane plane;
  BinaryMask mask;
  std::vector<CellIndex> inlier_cells;
  std::uint64_t area_px = 0;
};

struct NdtRansacConfig {
  double cell_size = 0.10;           // meters
  int min_points_per_cell = 8;
  double planarity_ratio = 0.05;     // l3/l2 upper bound
  int ransac_iters = 200;            // hypotheses per extracted plane
  double dist_thresh = 0.02;         // meters
  double angle_thresh = 15.0;        // degrees
  int min_inlier_cells = 6;
  double min_mask_area = 0.005;      // fraction of the frame
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Voxelizes the cloud and accumulates per-cell mean/covariance. Cells
// with fewer than min_points_per_cell points carry no eigen-structure.
VoxelGrid build_ndt(const PointCloud& cloud, const NdtRansacConfig& cfg);

// Sets the planar flag: count >= min_points_per_cell and l3/l2 <=
// planarity_ratio with l2 > 0.
void classify_cells(VoxelGrid& grid, const NdtRansacConfig& cfg);

// Greedy sequential RANSAC over planar cells. A hypothesis comes from a
// single cell (its mean and normal); a cell is consistent when its mean
// is within dist_thresh of the plane and its normal within angle_thresh.
// The best consensus per round is refined by a least-squares fit over the
// member points of the consistent cells; consumed cells are removed.
// Deterministic for a fixed rng_seed.
std::vector<PlaneInstance> extract_planes(const VoxelGrid& grid,
                                          const PointCloud& cloud,
                                          const NdtRansacConfig& cfg);

struct RasterResult {
  SegLabelMap labels;
  // Final instances after connected-component splitting, sorted by id
  // (descending mask area, ids starting at 1). instances[i] has id i+1.
  std::vector<PlaneInstance> instances;
};

// Labels every valid pixel with the nearest instance plane within
// dist_thresh (0 otherwise), splits each plane's pixels into 4-connected
// components, and drops components below min_mask_area of the frame.
RasterResult rasterize_instances(const std::vector<PlaneInstance>& instances,
                                 const PointCloud& cloud,
                                 const CameraIntrinsics& intr,
                                 const NdtRansacConfig& cfg);

// Full per-frame pipeline: unproject, build, classify, extract, rasterize.
RasterResult annotate_frame(const DepthImage& depth,
                            const CameraIntrinsics& intr,
                            const NdtRansacConfig& cfg);

}  // namespace planeseg

#endif  // PLANESEG_NDT_RANSAC_HPP_
