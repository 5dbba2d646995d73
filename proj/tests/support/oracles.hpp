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
// Scalar reference implementations the test suites check the library
// against. Everything here is deliberately written as plain loops,
// independent of the library's vectorized code paths.
#ifndef PLANESEG_TESTS_ORACLES_HPP_
#define PLANESEG_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "planeseg/assembly.hpp"
#include "planeseg/geometry.hpp"
#include "planeseg/nms.hpp"
#include "planeseg/rfa.hpp"

namespace planeseg::testing {

// ---- boxes / NMS -----------------------------------------------------

inline double iou_scalar(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) -
                                      std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) -
                                      std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = (a.x_max - a.x_min) * (a.y_max - a.y_min) +
                     (b.x_max - b.x_min) * (b.y_max - b.y_min) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

inline double cosine_scalar(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Direct loop transcription of the feature-NMS algorithm over one
// score-sorted class: K_i is the max IoU against every higher-scored
// detection, the similarity band compares against the kept list D.
inline std::vector<int> ff_nms_oracle(const std::vector<Detection>& sorted,
                                      double n1, double n2, double t) {
  std::vector<int> kept;
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
    double k = 0.0;
    for (int j = 0; j < i; ++j) {
      k = std::max(k, iou_scalar(sorted[j].box, sorted[i].box));
    }
    if (k <= n1) {
      kept.push_back(i);
    } else if (k <= n2) {
      double s = -std::numeric_limits<double>::infinity();
      for (int d : kept) {
        s = std::max(s, cosine_scalar(sorted[d].coeffs, sorted[i].coeffs));
      }
      if (s <= t) kept.push_back(i);
    }
  }
  return kept;
}

inline std::vector<int> fast_nms_oracle(const std::vector<Detection>& sorted,
                                        double threshold) {
  std::vector<int> kept;
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
    double k = 0.0;
    for (int j = 0; j < i; ++j) {
      k = std::max(k, iou_scalar(sorted[j].box, sorted[i].box));
    }
    if (k <= threshold) kept.push_back(i);
  }
  return kept;
}

// ---- symmetric 3x3 eigenvalues (trigonometric closed form) -----------

inline std::array<double, 3> eig3_descending(const Eigen::Matrix3d& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) +
                    a(1, 2) * a(1, 2);
  const double q = a.trace() / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) +
                    (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  if (p2 <= 0.0) return {q, q, q};
  const double p = std::sqrt(p2 / 6.0);
  const Eigen::Matrix3d b = (a - q * Eigen::Matrix3d::Identity()) / p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double l1 = q + 2.0 * p * std::cos(phi);
  const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  return {l1, 3.0 * q - l1 - l3, l3};
}

// ---- mask assembly ----------------------------------------------------

inline std::vector<std::vector<double>> assemble_oracle(
    const PrototypeStack& p, const CoeffMatrix& c) {
  std::vector<std::vector<double>> out(
      c.n, std::vector<double>(static_cast<std::size_t>(p.h) * p.w, 0.0));
  for (int i = 0; i < c.n; ++i) {
    for (int y = 0; y < p.h; ++y) {
      for (int x = 0; x < p.w; ++x) {
        double acc = 0.0;
        for (int j = 0; j < p.k; ++j) {
          acc += static_cast<double>(p.at(y, x, j)) * c.at(i, j);
        }
        out[i][static_cast<std::size_t>(y) * p.w + x] =
            1.0 / (1.0 + std::exp(-acc));
      }
    }
  }
  return out;
}

inline double bce_oracle(const FloatMask& pred, const BinaryMask& gt) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    double p = pred.values[i];
    p = std::min(std::max(p, 1e-7), 1.0 - 1e-7);
    sum += gt.values[i] != 0 ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(pred.values.size());
}

// ---- losses ------------------------------------------------------------

inline double softmax_ce_oracle(const std::vector<double>& logits,
                                int target) {
  double z = 0.0;
  for (double v : logits) z += std::exp(v);
  return std::log(z) - logits[target];
}

struct LossOracleResult {
  double conf = 0.0;
  double loc = 0.0;
  double mask = 0.0;
  double total = 0.0;
};

inline LossOracleResult loss_oracle(const LossInputs& in) {
  LossOracleResult r;
  int n_pos = 0;
  std::vector<std::pair<double, int>> neg;
  for (std::size_t i = 0; i < in.match.size(); ++i) {
    std::vector<double> logits(in.class_logits.cols());
    for (int c = 0; c < in.class_logits.cols(); ++c) {
      logits[c] = in.class_logits(static_cast<int>(i), c);
    }
    if (in.match[i] >= 0) {
      ++n_pos;
      r.conf += softmax_ce_oracle(logits, in.gt_class[in.match[i]]);
      for (int c = 0; c < 4; ++c) {
        const double d = in.pred_offsets(static_cast<int>(i), c) -
                         in.gt_offsets(static_cast<int>(i), c);
        r.loc += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
      }
    } else {
      neg.emplace_back(softmax_ce_oracle(logits, 0), static_cast<int>(i));
    }
  }
  std::stable_sort(neg.begin(), neg.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (std::size_t i = 0; i < std::min(neg.size(), std::size_t(3) * n_pos);
       ++i) {
    r.conf += neg[i].first;
  }
  for (std::size_t i = 0; i < in.pred_masks.size(); ++i) {
    r.mask += bce_oracle(in.pred_masks[i], in.gt_masks[i]);
  }
  r.total = (r.conf + in.alpha * r.loc + in.beta * r.mask) / n_pos;
  return r;
}

// ---- feature maps -------------------------------------------------------

inline FeatureMap pool_oracle(const FeatureMap& f, double ratio) {
  const int oh = std::max(1, static_cast<int>(std::lround(ratio * f.height)));
  const int ow = std::max(1, static_cast<int>(std::lround(ratio * f.width)));
  FeatureMap out = FeatureMap::zeros(f.channels, oh, ow);
  for (int c = 0; c < f.channels; ++c) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const int y0 = static_cast<int>(
            std::floor(static_cast<double>(y) * f.height / oh));
        const int y1 = static_cast<int>(
            std::ceil(static_cast<double>(y + 1) * f.height / oh));
        const int x0 = static_cast<int>(
            std::floor(static_cast<double>(x) * f.width / ow));
        const int x1 = static_cast<int>(
            std::ceil(static_cast<double>(x + 1) * f.width / ow));
        double sum = 0.0;
        for (int yy = y0; yy < y1; ++yy) {
          for (int xx = x0; xx < x1; ++xx) sum += f.at(c, yy, xx);
        }
        out.at(c, y, x) = static_cast<float>(sum / ((y1 - y0) * (x1 - x0)));
      }
    }
  }
  return out;
}

inline FeatureMap conv_oracle(const FeatureMap& f, const ConvWeights& w) {
  const int pad = w.size / 2;
  FeatureMap out = FeatureMap::zeros(w.out_channels, f.height, f.width);
  for (int o = 0; o < w.out_channels; ++o) {
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        double acc = w.bias[o];
        for (int i = 0; i < f.channels; ++i) {
          for (int ky = 0; ky < w.size; ++ky) {
            for (int kx = 0; kx < w.size; ++kx) {
              const int sy = y + ky - pad;
              const int sx = x + kx - pad;
              if (sy < 0 || sy >= f.height || sx < 0 || sx >= f.width) {
                continue;
              }
              acc += static_cast<double>(w.weight(o, i, ky, kx)) *
                     f.at(i, sy, sx);
            }
          }
        }
        out.at(o, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

inline FeatureMap upsample_oracle(const FeatureMap& f, int oh, int ow) {
  FeatureMap out = FeatureMap::zeros(f.channels, oh, ow);
  for (int c = 0; c < f.channels; ++c) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double sy = (y + 0.5) * f.height / oh - 0.5;
        double sx = (x + 0.5) * f.width / ow - 0.5;
        sy = std::min(std::max(sy, 0.0), f.height - 1.0);
        sx = std::min(std::max(sx, 0.0), f.width - 1.0);
        const int y0 = static_cast<int>(std::floor(sy));
        const int x0 = static_cast<int>(std::floor(sx));
        const int y1 = std::min(y0 + 1, f.height - 1);
        const int x1 = std::min(x0 + 1, f.width - 1);
        const double wy = sy - y0, wx = sx - x0;
        out.at(c, y, x) = static_cast<float>(
            (1 - wy) * ((1 - wx) * f.at(c, y0, x0) + wx * f.at(c, y0, x1)) +
            wy * ((1 - wx) * f.at(c, y1, x0) + wx * f.at(c, y1, x1)));
      }
    }
  }
  return out;
}

inline FeatureMap asf_oracle(const std::array<FeatureMap, 3>& feats,
                             const RfaWeights& w) {
  const int ch = feats[0].channels;
  FeatureMap concat =
      FeatureMap::zeros(3 * ch, feats[0].height, feats[0].width);
  for (int b = 0; b < 3; ++b) {
    for (int c = 0; c < ch; ++c) {
      for (int y = 0; y < feats[0].height; ++y) {
        for (int x = 0; x < feats[0].width; ++x) {
          concat.at(b * ch + c, y, x) = feats[b].at(c, y, x);
        }
      }
    }
  }
  const FeatureMap hidden = conv_oracle(concat, w.asf_squeeze);
  const FeatureMap logits = conv_oracle(hidden, w.asf_weights);
  FeatureMap out = FeatureMap::zeros(ch, feats[0].height, feats[0].width);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double e0 = std::exp(logits.at(0, y, x));
      double e1 = std::exp(logits.at(1, y, x));
      double e2 = std::exp(logits.at(2, y, x));
      const double z = e0 + e1 + e2;
      for (int c = 0; c < ch; ++c) {
        out.at(c, y, x) = static_cast<float>(
            (e0 * feats[0].at(c, y, x) + e1 * feats[1].at(c, y, x) +
             e2 * feats[2].at(c, y, x)) /
            z);
      }
    }
  }
  return out;
}

inline FeatureMap rfa_oracle(const FeatureMap& c5, const FeatureMap& lateral,
                             const RfaWeights& w, const RfaConfig& cfg) {
  std::array<FeatureMap, 3> ctx;
  for (int b = 0; b < 3; ++b) {
    ctx[b] = upsample_oracle(
        conv_oracle(pool_oracle(c5, cfg.ratios[b]), w.projections[b]),
        c5.height, c5.width);
  }
  FeatureMap merged = asf_oracle(ctx, w);
  for (std::size_t i = 0; i < merged.values.size(); ++i) {
    merged.values[i] += lateral.values[i];
  }
  return conv_oracle(merged, w.output);
}

// ---- partition metrics -------------------------------------------------

// All-pairs Rand index, quadratic in the pixel count.
inline double rand_index_pairs_oracle(const SegLabelMap& a,
                                      const SegLabelMap& b) {
  const std::size_t n = a.ids.size();
  if (n < 2) return 1.0;
  std::uint64_t agree = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same_a = a.ids[i] == a.ids[j];
      const bool same_b = b.ids[i] == b.ids[j];
      agree += same_a == same_b;
      ++total;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

// Conditional-entropy VOI straight from the definition.
inline double voi_oracle(const SegLabelMap& a, const SegLabelMap& b) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  std::map<std::uint32_t, double> pa, pb;
  const double n = static_cast<double>(a.ids.size());
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    joint[{a.ids[i], b.ids[i]}] += 1.0;
    pa[a.ids[i]] += 1.0;
    pb[b.ids[i]] += 1.0;
  }
  double h_a_given_b = 0.0, h_b_given_a = 0.0;
  for (const auto& [key, c] : joint) {
    const double pij = c / n;
    h_a_given_b -= pij * std::log(pij / (pb[key.second] / n));
    h_b_given_a -= pij * std::log(pij / (pa[key.first] / n));
  }
  return h_a_given_b + h_b_given_a;
}

// Region-by-region covering with materialized masks.
inline double sc_oracle(const SegLabelMap& gt, const SegLabelMap& pred) {
  std::map<std::uint32_t, std::vector<std::size_t>> gt_regions, pred_regions;
  for (std::size_t i = 0; i < gt.ids.size(); ++i) {
    gt_regions[gt.ids[i]].push_back(i);
    pred_regions[pred.ids[i]].push_back(i);
  }
  double sc = 0.0;
  for (const auto& [gid, gpix] : gt_regions) {
    double best = 0.0;
    for (const auto& [pid, ppix] : pred_regions) {
      std::vector<std::size_t> inter;
      std::set_intersection(gpix.begin(), gpix.end(), ppix.begin(),
                            ppix.end(), std::back_inserter(inter));
      const double uni =
          static_cast<double>(gpix.size() + ppix.size() - inter.size());
      best = std::max(best, static_cast<double>(inter.size()) / uni);
    }
    sc += (static_cast<double>(gpix.size()) /
           static_cast<double>(gt.ids.size())) *
          best;
  }
  return sc;
}

}  // namespace planeseg::testing

#endif  // PLANESEG_TESTS_ORACLES_HPP_
