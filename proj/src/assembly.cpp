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
#include "planeseg/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace planeseg {

namespace {
constexpr double kBceClamp = 1e-7;

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

// -log softmax_target(logits), computed through a stable log-sum-exp.
double softmax_ce(const Eigen::Ref<const Eigen::RowVectorXd>& logits,
                  int target) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits(target);
}
}  // namespace

MaskStack assemble(const PrototypeStack& prototypes,
                   const CoeffMatrix& coeffs) {
  if (prototypes.k != coeffs.k) {
    throw ShapeError("assemble: prototype and coefficient k differ");
  }
  if (prototypes.k < 1) throw ShapeError("assemble: k must be >= 1");
  const std::size_t px = static_cast<std::size_t>(prototypes.h) * prototypes.w;
  if (prototypes.values.size() != px * prototypes.k) {
    throw ShapeError("assemble: prototype buffer size mismatch");
  }
  if (coeffs.values.size() !=
      static_cast<std::size_t>(coeffs.n) * coeffs.k) {
    throw ShapeError("assemble: coefficient buffer size mismatch");
  }

  using MatrixXfRM =
      Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const MatrixXfRM> p(prototypes.values.data(),
                                 static_cast<Eigen::Index>(px), prototypes.k);
  Eigen::Map<const MatrixXfRM> c(coeffs.values.data(), coeffs.n, coeffs.k);

  // Accumulate the linear combination in double, squash, store float.
  const Eigen::MatrixXd logits =
      p.cast<double>() * c.cast<double>().transpose();  // px x n

  MaskStack out;
  out.masks.reserve(coeffs.n);
  for (int i = 0; i < coeffs.n; ++i) {
    FloatMask m = FloatMask::zeros(prototypes.w, prototypes.h);
    for (std::size_t j = 0; j < px; ++j) {
      m.values[j] =
          static_cast<float>(1.0 / (1.0 + std::exp(-logits(j, i))));
    }
    out.masks.push_back(std::move(m));
  }
  return out;
}

FloatMask crop_mask(const FloatMask& mask, const BoundingBox& box) {
  FloatMask out = mask;
  for (int r = 0; r < mask.height; ++r) {
    const double cy = r + 0.5;
    const bool row_in = cy >= box.y_min && cy < box.y_max;
    for (int c = 0; c < mask.width; ++c) {
      const double cx = c + 0.5;
      if (!row_in || cx < box.x_min || cx >= box.x_max) {
        out.at(r, c) = 0.f;
      }
    }
  }
  return out;
}

BinaryMask binarize(const FloatMask& mask, double threshold) {
  BinaryMask out = BinaryMask::zeros(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    out.values[i] = mask.values[i] > threshold ? 1 : 0;
  }
  return out;
}

double mask_bce(const FloatMask& pred, const BinaryMask& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw ShapeError("mask_bce: mask shapes differ");
  }
  if (pred.values.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pred.values[i]),
                                kBceClamp, 1.0 - kBceClamp);
    sum += gt.values[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(pred.values.size());
}

int LossInputs::positive_count() const {
  int n = 0;
  for (int m : match) n += (m >= 0);
  return n;
}

std::pair<double, double> detection_losses(const LossInputs& inputs) {
  const int priors = static_cast<int>(inputs.match.size());
  if (inputs.class_logits.rows() != priors ||
      inputs.pred_offsets.rows() != priors ||
      inputs.gt_offsets.rows() != priors) {
    throw ShapeError("detection_losses: per-prior row counts differ");
  }
  if (inputs.pred_offsets.cols() != 4 || inputs.gt_offsets.cols() != 4) {
    throw ShapeError("detection_losses: offsets must have 4 columns");
  }
  const int n_pos = inputs.positive_count();
  if (n_pos == 0) {
    throw NormalizationError("detection_losses: no positive matches");
  }

  double l_loc = 0.0;
  double l_conf = 0.0;
  std::vector<std::pair<double, int>> negatives;  // (bg CE, prior), mined below
  for (int i = 0; i < priors; ++i) {
    const int m = inputs.match[i];
    if (m >= 0) {
      if (m >= static_cast<int>(inputs.gt_class.size())) {
        throw ShapeError("detection_losses: match index out of range");
      }
      const int cls = inputs.gt_class[m];
      if (cls < 1 || cls >= inputs.class_logits.cols()) {
        throw ShapeError("detection_losses: gt class out of range");
      }
      l_conf += softmax_ce(inputs.class_logits.row(i), cls);
      for (int c = 0; c < 4; ++c) {
        l_loc += smooth_l1(inputs.pred_offsets(i, c) - inputs.gt_offsets(i, c));
      }
    } else {
      negatives.emplace_back(softmax_ce(inputs.class_logits.row(i), 0), i);
    }
  }

  // Hard negative mining at 3:1, hardest (largest background CE) first.
  std::stable_sort(negatives.begin(), negatives.end(),
                   [](const auto& a, const auto& b) {
                     return a.first > b.first;
                   });
  const std::size_t mined =
      std::min(negatives.size(), static_cast<std::size_t>(3) * n_pos);
  for (std::size_t i = 0; i < mined; ++i) l_conf += negatives[i].first;

  return {l_conf, l_loc};
}

double mask_loss(const LossInputs& inputs) {
  if (inputs.pred_masks.size() != inputs.gt_masks.size()) {
    throw ShapeError("mask_loss: pred/gt mask counts differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < inputs.pred_masks.size(); ++i) {
    sum += mask_bce(inputs.pred_masks[i], inputs.gt_masks[i]);
  }
  return sum;
}

double total_loss(double l_conf, double l_loc, double l_mask, double alpha,
                  double beta, int n) {
  if (n < 1) throw NormalizationError("total_loss: positive count is zero");
  return (l_conf + alpha * l_loc + beta * l_mask) / static_cast<double>(n);
}

double total_loss(const LossInputs& inputs) {
  const auto [l_conf, l_loc] = detection_losses(inputs);
  return total_loss(l_conf, l_loc, mask_loss(inputs), inputs.alpha,
                    inputs.beta, inputs.positive_count());
}

}  // namespace planeseg
