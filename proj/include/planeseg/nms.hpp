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
#ifndef PLANESEG_NMS_HPP_
#define PLANESEG_NMS_HPP_

#include <Eigen/Core>
#include <vector>

#include "planeseg/geometry.hpp"

namespace planeseg {

// Scored box plus the mask-coefficient vector used for the similarity
// band of feature NMS.
struct Detection {
  BoundingBox box;
  double score = 0.0;
  int class_id = 0;
  std::vector<double> coeffs;
};

struct NmsConfig {
  double n1 = 0.5;           // IoU keep-threshold
  double n2 = 0.7;           // IoU suppress-threshold
  double t = 0.9;            // cosine-similarity threshold
  int top_n = 200;           // max detections per class
  double score_thresh = 0.05;

  // Enforces the documented ranges (0 <= n1 <= n2 <= 1, t in [-1,1],
  // top_n >= 1). Applied when configs come from files or flags; the
  // algorithms themselves are total in t.
  void validate() const;
};

// Upper-triangular pairwise IoU matrix: entry (i,j) defined for i < j,
// diagonal and lower triangle are zero.
struct IoUMatrix {
  Eigen::MatrixXd values;

  int size() const { return static_cast<int>(values.rows()); }
  double at(int i, int j) const { return values(i, j); }
};

// Per class: drops detections below score_thresh, sorts descending by
// score (stable: equal scores keep input order) and keeps the top_n.
// Returned classes are ordered by class id.
struct ClassSlice {
  int class_id = 0;
  std::vector<Detection> dets;  // sorted by score descending
};
std::vector<ClassSlice> prepare(const std::vector<Detection>& dets,
                                const NmsConfig& cfg);

// IoU of every pair of a score-sorted list, upper triangle only.
IoUMatrix pairwise_iou_triu(const std::vector<Detection>& sorted);

// Plain matrix NMS: K_i = column-wise max of the upper triangle
// (K_0 = 0); survivor iff K_i <= threshold. Returns indices into the
// sorted input, ascending.
std::vector<int> fast_nms(const std::vector<Detection>& sorted,
                          double threshold);

// a.b / (|a||b|), clamped to [-1,1]. Throws DegenerateInputError when a
// vector has zero norm.
double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b);

// Feature NMS over the IoU band (n1, n2]: a detection in the band is
// kept only when the max cosine similarity of its coefficients against
// the already-kept set stays <= t. Survivors are returned in
// non-increasing score order (stable across classes).
std::vector<Detection> ff_nms(const std::vector<Detection>& dets,
                              const NmsConfig& cfg);

// Index variant on one pre-sorted class slice; exposed for the property
// and benchmark suites.
std::vector<int> ff_nms_sorted(const std::vector<Detection>& sorted,
                               const NmsConfig& cfg);

}  // namespace planeseg

#endif  // PLANESEG_NMS_HPP_
