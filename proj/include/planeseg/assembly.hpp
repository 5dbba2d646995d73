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
#ifndef PLANESEG_ASSEMBLY_HPP_
#define PLANESEG_ASSEMBLY_HPP_

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "planeseg/geometry.hpp"

namespace planeseg {

// h x w x k stack of prototype masks, channel-last.
struct PrototypeStack {
  int h = 0;
  int w = 0;
  int k = 0;
  std::vector<float> values;  // index (y, x, j) -> (y*w + x)*k + j

  static PrototypeStack zeros(int h, int w, int k) {
    return PrototypeStack{
        h, w, k,
        std::vector<float>(static_cast<std::size_t>(h) * w * k, 0.f)};
  }
  float at(int y, int x, int j) const {
    return values[(static_cast<std::size_t>(y) * w + x) * k + j];
  }
  float& at(int y, int x, int j) {
    return values[(static_cast<std::size_t>(y) * w + x) * k + j];
  }
};

// n x k mask coefficients, one row per instance.
struct CoeffMatrix {
  int n = 0;
  int k = 0;
  std::vector<float> values;  // row-major

  float at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * k + j];
  }
  float& at(int i, int j) {
    return values[static_cast<std::size_t>(i) * k + j];
  }
};

// Soft mask with values in (0,1).
struct FloatMask {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // row-major

  static FloatMask zeros(int width, int height) {
    return FloatMask{width, height,
                     std::vector<float>(
                         static_cast<std::size_t>(width) * height, 0.f)};
  }
  float at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  float& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * width + col];
  }
};

struct MaskStack {
  std::vector<FloatMask> masks;  // n instance masks, equal size
};

// M[i] = sigmoid(sum_j P[:,:,j] * C[i][j]). Throws ShapeError when the
// coefficient counts disagree.
MaskStack assemble(const PrototypeStack& prototypes, const CoeffMatrix& coeffs);

// Zeroes everything whose pixel center falls outside the box. Centers of
// pixel (r,c) are (c+0.5, r+0.5); the inside test is half-open,
// [x_min, x_max) x [y_min, y_max), so a zero-area box blanks the mask.
FloatMask crop_mask(const FloatMask& mask, const BoundingBox& box);

// value > threshold -> 1 else 0.
BinaryMask binarize(const FloatMask& mask, double threshold = 0.5);

// Pixel-mean binary cross entropy; predictions are clamped to
// [1e-7, 1 - 1e-7] before the logs.
double mask_bce(const FloatMask& pred, const BinaryMask& gt);

// Inputs of the composite detection loss. Priors are matched to ground
// truths by `match` (gt index, or -1 for negatives); the positive count
// N is derived from it. Class 0 is background.
struct LossInputs {
  std::vector<int> match;              // per prior
  Eigen::MatrixXd class_logits;        // priors x classes
  std::vector<int> gt_class;           // per gt, values in [1, classes)
  Eigen::MatrixXd pred_offsets;        // priors x 4 box regression offsets
  Eigen::MatrixXd gt_offsets;          // priors x 4, rows used where matched
  std::vector<FloatMask> pred_masks;   // one per positive, prior order
  std::vector<BinaryMask> gt_masks;    // one per positive, prior order
  double alpha = 1.5;
  double beta = 6.125;

  int positive_count() const;
};

// (L_conf, L_loc): softmax cross-entropy over positives plus 3:1
// hard-negative-mined negatives, and smooth-L1 over matched offsets.
// Sums, not means; the 1/N normalization happens in total_loss.
// Throws NormalizationError when there is no positive match.
std::pair<double, double> detection_losses(const LossInputs& inputs);

// Sum of mask_bce over the positive pairs.
double mask_loss(const LossInputs& inputs);

// (1/N) * (L_conf + alpha*L_loc + beta*L_mask) from explicit components.
double total_loss(double l_conf, double l_loc, double l_mask, double alpha,
                  double beta, int n);

// Same, with every component computed from the inputs.
double total_loss(const LossInputs& inputs);

}  // namespace planeseg

#endif  // PLANESEG_ASSEMBLY_HPP_
