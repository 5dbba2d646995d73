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
#include "planeseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace planeseg {

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError("mask_iou: mask shapes differ");
  }
  std::uint64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool pa = a.values[i] != 0;
    const bool pb = b.values[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

void ApAccumulator::add_frame(const std::vector<PredInstance>& preds,
                              const std::vector<GtInstance>& gts) {
  total_gt_ += gts.size();

  std::vector<std::size_t> order(preds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&preds](std::size_t a, std::size_t b) {
                     return preds[a].score > preds[b].score;
                   });

  std::vector<bool> matched(gts.size(), false);
  for (std::size_t pi : order) {
    const PredInstance& p = preds[pi];
    double best_iou = 0.0;
    std::size_t best = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (matched[g]) continue;
      const double iou = mode_ == IouMode::kBox
                             ? box_iou(p.box, gts[g].box)
                             : mask_iou(p.mask, gts[g].mask);
      if (iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    const bool tp = best < gts.size() && best_iou >= iou_thresh_;
    if (tp) matched[best] = true;
    records_.emplace_back(p.score, tp);
  }
}

double ApAccumulator::value(ApInterp interp) const {
  if (total_gt_ == 0) return records_.empty() ? 1.0 : 0.0;
  if (records_.empty()) return 0.0;

  std::vector<std::pair<double, bool>> recs = records_;
  std::stable_sort(recs.begin(), recs.end(),
                   [](const auto& a, const auto& b) {
                     return a.first > b.first;
                   });

  std::vector<double> precision(recs.size()), recall(recs.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    tp += recs[i].second;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt_);
  }
  // Precision envelope: non-increasing hull from the right.
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  if (interp == ApInterp::kAllPoint) {
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
    return ap;
  }

  // 101-point sampling of the envelope.
  double sum = 0.0;
  for (int s = 0; s <= 100; ++s) {
    const double r = s / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) {
      sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
  }
  return sum / 101.0;
}

double average_precision(const std::vector<PredInstance>& preds,
                         const std::vector<GtInstance>& gts,
                         double iou_thresh, IouMode mode, ApInterp interp) {
  ApAccumulator acc(iou_thresh, mode);
  acc.add_frame(preds, gts);
  return acc.value(interp);
}

namespace {

struct Contingency {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> joint;
  std::unordered_map<std::uint32_t, std::uint64_t> a_sizes;
  std::unordered_map<std::uint32_t, std::uint64_t> b_sizes;
  std::uint64_t total = 0;
};

Contingency contingency_table(const SegLabelMap& a, const SegLabelMap& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError("label maps have different sizes");
  }
  Contingency t;
  t.total = a.ids.size();
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    ++t.joint[{a.ids[i], b.ids[i]}];
    ++t.a_sizes[a.ids[i]];
    ++t.b_sizes[b.ids[i]];
  }
  return t;
}

double pairs(std::uint64_t n) {
  return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
}

}  // namespace

double rand_index(const SegLabelMap& a, const SegLabelMap& b) {
  const Contingency t = contingency_table(a, b);
  const double all = pairs(t.total);
  if (all <= 0.0) return 1.0;

  double same_a = 0.0, same_b = 0.0, same_both = 0.0;
  for (const auto& [id, n] : t.a_sizes) same_a += pairs(n);
  for (const auto& [id, n] : t.b_sizes) same_b += pairs(n);
  for (const auto& [key, n] : t.joint) same_both += pairs(n);

  // Agreements: pairs joined in both plus pairs split in both.
  const double agreements = all + 2.0 * same_both - same_a - same_b;
  return agreements / all;
}

double variation_of_information(const SegLabelMap& a, const SegLabelMap& b) {
  const Contingency t = contingency_table(a, b);
  if (t.total == 0) return 0.0;
  const double n = static_cast<double>(t.total);

  double h_a = 0.0, h_b = 0.0, h_joint = 0.0;
  for (const auto& [id, c] : t.a_sizes) {
    const double p = c / n;
    h_a -= p * std::log(p);
  }
  for (const auto& [id, c] : t.b_sizes) {
    const double p = c / n;
    h_b -= p * std::log(p);
  }
  for (const auto& [key, c] : t.joint) {
    const double p = c / n;
    h_joint -= p * std::log(p);
  }
  // H(a|b) + H(b|a) = 2 H(a,b) - H(a) - H(b); clip rounding residue.
  return std::max(0.0, 2.0 * h_joint - h_a - h_b);
}

double segmentation_covering(const SegLabelMap& gt, const SegLabelMap& pred) {
  const Contingency t = contingency_table(gt, pred);
  if (t.total == 0) return 0.0;

  // Best IoU per gt region over pred regions; overlaps come from the
  // joint table, so only intersecting pairs are visited.
  std::unordered_map<std::uint32_t, double> best;
  for (const auto& [key, inter] : t.joint) {
    const auto [ga, pb] = key;
    const std::uint64_t uni =
        t.a_sizes.at(ga) + t.b_sizes.at(pb) - inter;
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    auto [it, inserted] = best.emplace(ga, iou);
    if (!inserted) it->second = std::max(it->second, iou);
  }

  double sc = 0.0;
  for (const auto& [ga, size] : t.a_sizes) {
    sc += (static_cast<double>(size) / static_cast<double>(t.total)) *
          best[ga];
  }
  return sc;
}

StatsReport dataset_stats(const std::vector<FrameInstances>& frames,
                          double frame_area) {
  StatsReport r;
  r.frames = frames.size();
  std::size_t overlap_frames = 0;
  std::size_t band_25_50 = 0, band_ge_50 = 0;
  std::size_t large = 0;

  for (const FrameInstances& f : frames) {
    if (f.boxes.size() != f.areas_px.size()) {
      throw ShapeError("dataset_stats: boxes/areas length mismatch");
    }
    bool has_overlap = false;
    for (std::size_t i = 0; i < f.boxes.size(); ++i) {
      for (std::size_t j = i + 1; j < f.boxes.size(); ++j) {
        const double iou = box_iou(f.boxes[i], f.boxes[j]);
        if (iou > 0.0) {
          has_overlap = true;
          ++r.overlapping_pairs;
          if (iou >= 0.5) {
            ++band_ge_50;
          } else if (iou >= 0.25) {
            ++band_25_50;
          }
        }
      }
    }
    overlap_frames += has_overlap;
    r.instances += f.areas_px.size();
    for (double a : f.areas_px) large += a > 0.1 * frame_area;
  }

  const auto pct = [](std::size_t num, std::size_t den) {
    return den > 0 ? 100.0 * static_cast<double>(num) /
                         static_cast<double>(den)
                   : 0.0;
  };
  r.overlap_frames_pct = pct(overlap_frames, r.frames);
  r.iou_band_25_50_pct = pct(band_25_50, r.overlapping_pairs);
  r.iou_band_ge_50_pct = pct(band_ge_50, r.overlapping_pairs);
  r.large_obj_pct = pct(large, r.instances);
  return r;
}

}  // namespace planeseg
