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
#include "planeseg/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>

namespace planeseg {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ConfigError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ConfigError("intrinsics: image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw ConfigError("intrinsics: principal point outside the image");
  }
}

std::uint64_t BinaryMask::popcount() const {
  std::uint64_t n = 0;
  for (std::uint8_t v : values) n += (v != 0);
  return n;
}

Plane Plane::canonical(const Vec3& normal, double offset) {
  const double norm = normal.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateInputError("plane: normal must have positive finite norm");
  }
  Vec3 n = normal / norm;
  double d = offset / norm;
  if (d < 0.0) {
    n = -n;
    d = -d;
  } else if (d == 0.0) {
    // +0.0 so that -0.0 components compare consistently.
    const Vec3 flipped = -n;
    const auto key = [](const Vec3& v) {
      return std::array<double, 3>{v.x() + 0.0, v.y() + 0.0, v.z() + 0.0};
    };
    if (key(n) < key(flipped)) n = flipped;
    d = 0.0;
  }
  return Plane{n, d};
}

PointCloud unproject(const DepthImage& depth, const CameraIntrinsics& intr) {
  intr.validate();
  if (depth.width != intr.width || depth.height != intr.height) {
    throw ConfigError("unproject: depth image size does not match intrinsics");
  }
  if (depth.values.size() !=
      static_cast<std::size_t>(depth.width) * depth.height) {
    throw ConfigError("unproject: depth buffer size mismatch");
  }

  PointCloud cloud;
  cloud.points.reserve(depth.values.size());
  cloud.provenance.reserve(depth.values.size());
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const std::uint16_t raw = depth.at(v, u);
      if (raw == 0) continue;
      const double z = raw * 1e-3;
      cloud.points.emplace_back((u - intr.cx) * z / intr.fx,
                                (v - intr.cy) * z / intr.fy, z);
      cloud.provenance.push_back(PixelRef{v, u});
    }
  }
  return cloud;
}

double point_plane_distance(const Plane& plane, const Vec3& p) {
  return std::abs(plane.normal.dot(p) - plane.offset);
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) -
                                      std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) -
                                      std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Plane fit_plane_lsq(const std::vector<Vec3>& points) {
  if (points.size() < 3) {
    throw DegenerateInputError("fit_plane_lsq: need at least 3 points");
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    const Vec3 q = p - centroid;
    cov += q * q.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  // Ascending eigenvalues: [0] is the residual direction.
  const double residual = es.eigenvalues()[0];
  const double spread = es.eigenvalues()[1];
  (void)residual;
  if (!(spread > 0.0) || spread <= 1e-12 * std::max(es.eigenvalues()[2], 1e-300)) {
    throw DegenerateInputError("fit_plane_lsq: points are collinear");
  }
  const Vec3 normal = es.eigenvectors().col(0);
  return Plane::canonical(normal, normal.dot(centroid));
}

}  // namespace planeseg
