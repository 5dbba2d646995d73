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
#ifndef PLANESEG_METRICS_HPP_
#define PLANESEG_METRICS_HPP_

#include <vector>

#include "planeseg/geometry.hpp"

namespace planeseg {

struct PredInstance {
  BinaryMask mask;
  BoundingBox box;
  double score = 1.0;
};

struct GtInstance {
  BinaryMask mask;
  BoundingBox box;
};

enum class IouMode { kBox, kMask };

// Precision-recall integration convention. kAllPoint integrates the
// precision envelope over every recall step; kSampled101 averages the
// envelope at the 101 recalls {0, 0.01, ..., 1}.
enum class ApInterp { kAllPoint, kSampled101 };

double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Pools match outcomes over any number of frames, then integrates the
// precision-recall curve. Single-frame AP is the one-frame case.
class ApAccumulator {
 public:
  explicit ApAccumulator(double iou_thresh = 0.5, IouMode mode = IouMode::kBox)
      : iou_thresh_(iou_thresh), mode_(mode) {}

  // Greedy matching in descending score order: a prediction is a true
  // positive when its best unmatched ground truth reaches the IoU
  // threshold.
  void add_frame(const std::vector<PredInstance>& preds,
                 const std::vector<GtInstance>& gts);

  // AP in [0,1]. No ground truth anywhere: 1.0 when there are also no
  // predictions, else 0.0.
  double value(ApInterp interp = ApInterp::kAllPoint) const;

 private:
  double iou_thresh_;
  IouMode mode_;
  std::vector<std::pair<double, bool>> records_;  // (score, is_tp)
  std::size_t total_gt_ = 0;
};

double average_precision(const std::vector<PredInstance>& preds,
                         const std::vector<GtInstance>& gts,
                         double iou_thresh = 0.5,
                         IouMode mode = IouMode::kBox,
                         ApInterp interp = ApInterp::kAllPoint);

// Fraction of pixel pairs on which the two labelings agree (same-label
// vs different-label), from the label contingency table.
double rand_index(const SegLabelMap& a, const SegLabelMap& b);

// H(a|b) + H(b|a) in nats over the joint pixel-label distribution.
double variation_of_information(const SegLabelMap& a, const SegLabelMap& b);

// Area-weighted best-IoU coverage of ground-truth regions by predicted
// regions. Label 0 counts as a region like any other.
double segmentation_covering(const SegLabelMap& gt, const SegLabelMap& pred);

// Per-frame inputs of the dataset statistics: instance boxes plus mask
// areas in pixels.
struct FrameInstances {
  std::vector<BoundingBox> boxes;
  std::vector<double> areas_px;
};

struct StatsReport {
  double overlap_frames_pct = 0.0;   // frames with an IoU > 0 box pair
  double iou_band_25_50_pct = 0.0;   // overlapping pairs with IoU in [0.25,0.5)
  double iou_band_ge_50_pct = 0.0;   // overlapping pairs with IoU >= 0.5
  double large_obj_pct = 0.0;        // instances with area > 10% of the frame
  std::size_t frames = 0;
  std::size_t instances = 0;
  std::size_t overlapping_pairs = 0;
};

StatsReport dataset_stats(const std::vector<FrameInstances>& frames,
                          double frame_area);

}  // namespace planeseg

#endif  // PLANESEG_METRICS_HPP_
