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
#include "planeseg/nms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace planeseg {

void NmsConfig::validate() const {
  if (!(0.0 <= n1 && n1 <= n2 && n2 <= 1.0)) {
    throw ConfigError("nms: thresholds must satisfy 0 <= n1 <= n2 <= 1");
  }
  if (!(t >= -1.0 && t <= 1.0)) {
    throw ConfigError("nms: similarity threshold must be in [-1,1]");
  }
  if (top_n < 1) throw ConfigError("nms: top_n must be >= 1");
}

std::vector<ClassSlice> prepare(const std::vector<Detection>& dets,
                                const NmsConfig& cfg) {
  std::map<int, std::vector<Detection>> by_class;
  for (const Detection& d : dets) {
    if (d.score < cfg.score_thresh) continue;
    by_class[d.class_id].push_back(d);
  }
  std::vector<ClassSlice> out;
  for (auto& [cls, list] : by_class) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.score > b.score;
                     });
    if (list.size() > static_cast<std::size_t>(cfg.top_n)) {
      list.resize(cfg.top_n);
    }
    out.push_back(ClassSlice{cls, std::move(list)});
  }
  return out;
}

IoUMatrix pairwise_iou_triu(const std::vector<Detection>& sorted) {
  const int n = static_cast<int>(sorted.size());
  IoUMatrix m;
  m.values = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      m.values(i, j) = box_iou(sorted[i].box, sorted[j].box);
    }
  }
  return m;
}

namespace {

// Column-wise max of the upper triangle. Entries below the diagonal are
// zero, so the plain column max works (IoU is never negative) and leaves
// K_0 = 0.
Eigen::VectorXd column_max(const IoUMatrix& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return m.values.colwise().maxCoeff();
}

}  // namespace

std::vector<int> fast_nms(const std::vector<Detection>& sorted,
                          double threshold) {
  const IoUMatrix m = pairwise_iou_triu(sorted);
  const Eigen::VectorXd k = column_max(m);
  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
    if (k(i) <= threshold) keep.push_back(i);
  }
  return keep;
}

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_similarity: vector lengths differ");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw DegenerateInputError("cosine_similarity: zero-norm vector");
  }
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::vector<int> ff_nms_sorted(const std::vector<Detection>& sorted,
                               const NmsConfig& cfg) {
  const int n = static_cast<int>(sorted.size());
  if (n == 0) return {};

  const IoUMatrix m = pairwise_iou_triu(sorted);
  const Eigen::VectorXd k = column_max(m);

  // Row-normalized coefficient matrix so band checks reduce to dot
  // products against the kept rows.
  const std::size_t dim = sorted[0].coeffs.size();
  Eigen::MatrixXd unit(n, dim);
  std::vector<bool> unit_valid(n, false);
  for (int i = 0; i < n; ++i) {
    if (sorted[i].coeffs.size() != dim) {
      throw ShapeError("ff_nms: coefficient lengths differ");
    }
    Eigen::Map<const Eigen::VectorXd> c(sorted[i].coeffs.data(), dim);
    const double norm = c.norm();
    if (norm > 0.0) {
      unit.row(i) = c.transpose() / norm;
      unit_valid[i] = true;
    }
  }

  std::vector<int> kept;
  Eigen::MatrixXd kept_rows(n, dim);
  bool kept_all_valid = true;
  for (int i = 0; i < n; ++i) {
    if (k(i) <= cfg.n1) {
      kept_rows.row(static_cast<int>(kept.size())) = unit.row(i);
      kept_all_valid = kept_all_valid && unit_valid[i];
      kept.push_back(i);
      continue;
    }
    if (k(i) <= cfg.n2) {
      double max_sim = -std::numeric_limits<double>::infinity();
      if (!kept.empty()) {
        if (!unit_valid[i] || !kept_all_valid) {
          throw DegenerateInputError("ff_nms: zero-norm coefficient vector");
        }
        max_sim = std::clamp(
            (kept_rows.topRows(static_cast<int>(kept.size())) *
             unit.row(i).transpose())
                .maxCoeff(),
            -1.0, 1.0);
      }
      if (max_sim <= cfg.t) {
        kept_rows.row(static_cast<int>(kept.size())) = unit.row(i);
        kept_all_valid = kept_all_valid && unit_valid[i];
        kept.push_back(i);
      }
    }
  }
  return kept;
}

std::vector<Detection> ff_nms(const std::vector<Detection>& dets,
                              const NmsConfig& cfg) {
  std::vector<Detection> out;
  for (const ClassSlice& slice : prepare(dets, cfg)) {
    for (int i : ff_nms_sorted(slice.dets, cfg)) {
      out.push_back(slice.dets[i]);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
  return out;
}

}  // namespace planeseg
