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
#include "planeseg/ndt_ransac.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <set>

namespace planeseg {

void NdtRansacConfig::validate() const {
  if (!(cell_size > 0.0)) throw ConfigError("ndt: cell_size must be > 0");
  if (min_points_per_cell < 1) {
    throw ConfigError("ndt: min_points_per_cell must be >= 1");
  }
  if (!(planarity_ratio > 0.0 && planarity_ratio < 1.0)) {
    throw ConfigError("ndt: planarity_ratio must be in (0,1)");
  }
  if (ransac_iters < 1) throw ConfigError("ndt: ransac_iters must be >= 1");
  if (!(dist_thresh > 0.0)) throw ConfigError("ndt: dist_thresh must be > 0");
  if (!(angle_thresh > 0.0)) throw ConfigError("ndt: angle_thresh must be > 0");
  if (min_inlier_cells < 1) {
    throw ConfigError("ndt: min_inlier_cells must be >= 1");
  }
  if (!(min_mask_area > 0.0)) {
    throw ConfigError("ndt: min_mask_area must be > 0");
  }
}

namespace {

CellIndex index_of(const Vec3& p, double cell_size) {
  return CellIndex{static_cast<std::int32_t>(std::floor(p.x() / cell_size)),
                   static_cast<std::int32_t>(std::floor(p.y() / cell_size)),
                   static_cast<std::int32_t>(std::floor(p.z() / cell_size))};
}

void compute_eigen(NDTCell& cell) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cell.covariance);
  // Solver returns ascending order; store descending.
  cell.eigenvalues = {std::max(0.0, es.eigenvalues()[2]),
                      std::max(0.0, es.eigenvalues()[1]),
                      std::max(0.0, es.eigenvalues()[0])};
  cell.normal = es.eigenvectors().col(0).normalized();
  cell.has_eigen = true;
}

bool consistent(const NDTCell& cell, const Plane& plane, double dist_thresh,
                double cos_thresh) {
  if (point_plane_distance(plane, cell.mean) > dist_thresh) return false;
  // Cell normals carry an arbitrary sign; compare orientation-free.
  return std::abs(cell.normal.dot(plane.normal)) >= cos_thresh;
}

}  // namespace

VoxelGrid build_ndt(const PointCloud& cloud, const NdtRansacConfig& cfg) {
  cfg.validate();
  VoxelGrid grid;
  grid.cell_size = cfg.cell_size;

  for (std::uint32_t i = 0; i < cloud.points.size(); ++i) {
    grid.cells[index_of(cloud.points[i], cfg.cell_size)].point_indices
        .push_back(i);
  }

  for (auto& [idx, cell] : grid.cells) {
    cell.count = cell.point_indices.size();
    Vec3 sum = Vec3::Zero();
    for (std::uint32_t pi : cell.point_indices) sum += cloud.points[pi];
    cell.mean = sum / static_cast<double>(cell.count);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::uint32_t pi : cell.point_indices) {
      const Vec3 q = cloud.points[pi] - cell.mean;
      cov += q * q.transpose();
    }
    cell.covariance = cov / static_cast<double>(cell.count);

    if (cell.count >= static_cast<std::size_t>(cfg.min_points_per_cell)) {
      compute_eigen(cell);
    }
  }
  return grid;
}

void classify_cells(VoxelGrid& grid, const NdtRansacConfig& cfg) {
  cfg.validate();
  for (auto& [idx, cell] : grid.cells) {
    cell.planar = false;
    if (!cell.has_eigen ||
        cell.count < static_cast<std::size_t>(cfg.min_points_per_cell)) {
      continue;
    }
    const double l2 = cell.eigenvalues[1];
    const double l3 = cell.eigenvalues[2];
    cell.planar = l2 > 0.0 && l3 / l2 <= cfg.planarity_ratio;
  }
}

std::vector<PlaneInstance> extract_planes(const VoxelGrid& grid,
                                          const PointCloud& cloud,
                                          const NdtRansacConfig& cfg) {
  cfg.validate();
  const double cos_thresh = std::cos(cfg.angle_thresh * M_PI / 180.0);

  // Sorted map order keeps every run over the same inputs identical.
  std::vector<const NDTCell*> remaining;
  std::vector<CellIndex> remaining_idx;
  for (const auto& [idx, cell] : grid.cells) {
    if (cell.planar) {
      remaining.push_back(&cell);
      remaining_idx.push_back(idx);
    }
  }

  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<PlaneInstance> instances;

  while (remaining.size() >= static_cast<std::size_t>(cfg.min_inlier_cells)) {
    std::vector<std::size_t> best;
    Plane best_plane;
    for (int iter = 0; iter < cfg.ransac_iters; ++iter) {
      const std::size_t pick = rng() % remaining.size();
      const NDTCell& seed = *remaining[pick];
      const Plane hypo =
          Plane::canonical(seed.normal, seed.normal.dot(seed.mean));

      std::vector<std::size_t> members;
      for (std::size_t c = 0; c < remaining.size(); ++c) {
        if (consistent(*remaining[c], hypo, cfg.dist_thresh, cos_thresh)) {
          members.push_back(c);
        }
      }
      if (members.size() > best.size()) {
        best = std::move(members);
        best_plane = hypo;
      }
    }
    if (best.size() < static_cast<std::size_t>(cfg.min_inlier_cells)) break;

    // Refine over the member points of the consensus cells.
    std::vector<Vec3> support;
    for (std::size_t c : best) {
      for (std::uint32_t pi : remaining[c]->point_indices) {
        support.push_back(cloud.points[pi]);
      }
    }
    Plane refined = best_plane;
    try {
      refined = fit_plane_lsq(support);
    } catch (const DegenerateInputError&) {
      // keep the hypothesis
    }

    // Re-evaluate against the refined plane; fall back to the raw
    // hypothesis when refinement loses the consensus.
    std::vector<std::size_t> final_set;
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      if (consistent(*remaining[c], refined, cfg.dist_thresh, cos_thresh)) {
        final_set.push_back(c);
      }
    }
    Plane final_plane = refined;
    if (final_set.size() < static_cast<std::size_t>(cfg.min_inlier_cells)) {
      final_set = best;
      final_plane = best_plane;
    }

    PlaneInstance inst;
    inst.plane = final_plane;
    for (std::size_t c : final_set) {
      inst.inlier_cells.push_back(remaining_idx[c]);
    }
    instances.push_back(std::move(inst));

    std::vector<const NDTCell*> next;
    std::vector<CellIndex> next_idx;
    std::set<std::size_t> consumed(final_set.begin(), final_set.end());
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      if (!consumed.count(c)) {
        next.push_back(remaining[c]);
        next_idx.push_back(remaining_idx[c]);
      }
    }
    remaining = std::move(next);
    remaining_idx = std::move(next_idx);
  }
  return instances;
}

RasterResult rasterize_instances(const std::vector<PlaneInstance>& instances,
                                 const PointCloud& cloud,
                                 const CameraIntrinsics& intr,
                                 const NdtRansacConfig& cfg) {
  cfg.validate();
  intr.validate();
  if (cloud.provenance.size() != cloud.points.size()) {
    throw ConfigError("rasterize: point cloud has no per-point provenance");
  }

  RasterResult out;
  out.labels = SegLabelMap::zeros(intr.width, intr.height);
  const std::size_t frame_px =
      static_cast<std::size_t>(intr.width) * intr.height;

  // Provisional per-pixel assignment: nearest plane within dist_thresh.
  // -1 marks unassigned.
  std::vector<std::int32_t> provisional(frame_px, -1);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const PixelRef px = cloud.provenance[i];
    if (px.row < 0 || px.row >= intr.height || px.col < 0 ||
        px.col >= intr.width) {
      throw ConfigError("rasterize: provenance pixel outside the frame");
    }
    double best_dist = cfg.dist_thresh;
    std::int32_t best = -1;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const double d = point_plane_distance(instances[k].plane,
                                            cloud.points[i]);
      if (d <= best_dist) {
        best_dist = d;
        best = static_cast<std::int32_t>(k);
      }
    }
    provisional[static_cast<std::size_t>(px.row) * intr.width + px.col] = best;
  }

  // Split each plane's pixels into 4-connected components.
  struct Component {
    std::size_t parent;
    std::vector<std::size_t> pixels;  // flat indices, scan order of discovery
  };
  std::vector<Component> comps;
  std::vector<std::uint8_t> visited(frame_px, 0);
  for (std::size_t start = 0; start < frame_px; ++start) {
    if (visited[start] || provisional[start] < 0) continue;
    const std::int32_t id = provisional[start];
    Component comp;
    comp.parent = static_cast<std::size_t>(id);
    std::deque<std::size_t> queue{start};
    visited[start] = 1;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      comp.pixels.push_back(p);
      const int r = static_cast<int>(p / intr.width);
      const int c = static_cast<int>(p % intr.width);
      const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& n : nbr) {
        if (n[0] < 0 || n[0] >= intr.height || n[1] < 0 || n[1] >= intr.width) {
          continue;
        }
        const std::size_t q =
            static_cast<std::size_t>(n[0]) * intr.width + n[1];
        if (!visited[q] && provisional[q] == id) {
          visited[q] = 1;
          queue.push_back(q);
        }
      }
    }
    comps.push_back(std::move(comp));
  }

  const double min_area = cfg.min_mask_area * static_cast<double>(frame_px);
  std::erase_if(comps, [min_area](const Component& c) {
    return static_cast<double>(c.pixels.size()) < min_area;
  });

  // Ids in descending area order; ties by parent then discovery order.
  std::vector<std::size_t> order(comps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&comps](std::size_t a, std::size_t b) {
                     return comps[a].pixels.size() > comps[b].pixels.size();
                   });

  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Component& comp = comps[order[rank]];
    const std::uint32_t id = static_cast<std::uint32_t>(rank + 1);
    PlaneInstance inst;
    inst.plane = instances[comp.parent].plane;
    inst.inlier_cells = instances[comp.parent].inlier_cells;
    inst.mask = BinaryMask::zeros(intr.width, intr.height);
    for (std::size_t p : comp.pixels) {
      out.labels.ids[p] = id;
      inst.mask.values[p] = 1;
    }
    inst.area_px = comp.pixels.size();
    out.instances.push_back(std::move(inst));
  }
  return out;
}

RasterResult annotate_frame(const DepthImage& depth,
                            const CameraIntrinsics& intr,
                            const NdtRansacConfig& cfg) {
  const PointCloud cloud = unproject(depth, intr);
  if (cloud.empty()) {
    RasterResult out;
    out.labels = SegLabelMap::zeros(intr.width, intr.height);
    return out;
  }
  VoxelGrid grid = build_ndt(cloud, cfg);
  classify_cells(grid, cfg);
  const std::vector<PlaneInstance> planes = extract_planes(grid, cloud, cfg);
  return rasterize_instances(planes, cloud, intr, cfg);
}

}  // namespace planeseg
