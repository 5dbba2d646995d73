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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "planeseg/assembly.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace planeseg;
namespace pt = planeseg::testing;

TEST_CASE("assemble: zero coefficients give sigmoid(0) = 0.5 exactly") {
  std::mt19937_64 rng(3);
  const PrototypeStack p = pt::random_prototypes(rng, 6, 5, 4);
  const CoeffMatrix c{2, 4, std::vector<float>(8, 0.f)};
  const MaskStack m = assemble(p, c);
  REQUIRE(m.masks.size() == 2);
  for (const FloatMask& mask : m.masks) {
    for (float v : mask.values) CHECK(v == 0.5f);
  }
}

TEST_CASE("assemble: one-hot row selects a single prototype") {
  std::mt19937_64 rng(5);
  const PrototypeStack p = pt::random_prototypes(rng, 4, 4, 3);
  CoeffMatrix c{1, 3, {0.f, 1.f, 0.f}};
  const MaskStack m = assemble(p, c);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double expect = 1.0 / (1.0 + std::exp(-double(p.at(y, x, 1))));
      CHECK(m.masks[0].at(y, x) ==
            doctest::Approx(expect).epsilon(1e-6));
    }
  }
}

TEST_CASE("assemble matches the per-pixel oracle") {
  std::mt19937_64 rng(7);
  const PrototypeStack p = pt::random_prototypes(rng, 4, 4, 3);
  const CoeffMatrix c = pt::random_coeffs(rng, 2, 3);
  const MaskStack m = assemble(p, c);
  const auto oracle = pt::assemble_oracle(p, c);
  for (int i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < m.masks[i].values.size(); ++j) {
      CHECK(m.masks[i].values[j] ==
            doctest::Approx(oracle[i][j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("assemble: output strictly inside (0,1), logits linear in C") {
  std::mt19937_64 rng(11);
  const PrototypeStack p = pt::random_prototypes(rng, 8, 8, 6);
  const CoeffMatrix c1 = pt::random_coeffs(rng, 3, 6);
  CoeffMatrix c2 = pt::random_coeffs(rng, 3, 6);
  const MaskStack m1 = assemble(p, c1);
  for (const FloatMask& mask : m1.masks) {
    for (float v : mask.values) {
      CHECK(v > 0.0f);
      CHECK(v < 1.0f);
    }
  }
  // Pre-sigmoid linearity: logit(sigma(x)) recovers x, so check
  // logit(m(c1+c2)) = logit(m(c1)) + logit(m(c2)).
  CoeffMatrix sum = c1;
  for (std::size_t i = 0; i < sum.values.size(); ++i) {
    sum.values[i] += c2.values[i];
  }
  const MaskStack m2 = assemble(p, c2);
  const MaskStack ms = assemble(p, sum);
  const auto logit = [](double v) { return std::log(v / (1.0 - v)); };
  for (int i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < ms.masks[i].values.size(); ++j) {
      const double lhs = logit(ms.masks[i].values[j]);
      const double rhs =
          logit(m1.masks[i].values[j]) + logit(m2.masks[i].values[j]);
      CHECK(lhs == doctest::Approx(rhs).epsilon(5e-4));
    }
  }
}

TEST_CASE("assemble: equivariant to permuting channels and columns") {
  std::mt19937_64 rng(13);
  const int k = 5;
  const PrototypeStack p = pt::random_prototypes(rng, 6, 7, k);
  const CoeffMatrix c = pt::random_coeffs(rng, 2, k);
  std::vector<int> perm{3, 0, 4, 1, 2};

  PrototypeStack pp = PrototypeStack::zeros(p.h, p.w, k);
  CoeffMatrix cp = c;
  for (int j = 0; j < k; ++j) {
    for (int y = 0; y < p.h; ++y) {
      for (int x = 0; x < p.w; ++x) pp.at(y, x, j) = p.at(y, x, perm[j]);
    }
    for (int i = 0; i < c.n; ++i) cp.at(i, j) = c.at(i, perm[j]);
  }
  const MaskStack a = assemble(p, c);
  const MaskStack b = assemble(pp, cp);
  for (int i = 0; i < c.n; ++i) {
    for (std::size_t j = 0; j < a.masks[i].values.size(); ++j) {
      CHECK(a.masks[i].values[j] ==
            doctest::Approx(b.masks[i].values[j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("assemble: shape mismatch") {
  const PrototypeStack p = PrototypeStack::zeros(4, 4, 3);
  const CoeffMatrix c{1, 2, {1.f, 2.f}};
  CHECK_THROWS_AS(assemble(p, c), ShapeError);
}

TEST_CASE("crop_mask") {
  FloatMask m = FloatMask::zeros(4, 4);
  for (float& v : m.values) v = 0.9f;

  // Full-frame box: identity.
  const FloatMask full = crop_mask(m, BoundingBox{0, 0, 4, 4});
  CHECK(full.values == m.values);

  // Zero-area box: everything zeroed.
  const FloatMask none = crop_mask(m, BoundingBox{2, 2, 2, 2});
  for (float v : none.values) CHECK(v == 0.0f);

  // Half-frame box: popcount after binarize bounded by the box area.
  const BoundingBox half{0, 0, 2, 4};
  const BinaryMask bin = binarize(crop_mask(m, half), 0.5);
  CHECK(bin.popcount() <= static_cast<std::uint64_t>(half.area()));
  CHECK(bin.popcount() == 8);  // pixel centers 0.5, 1.5 in x
}

TEST_CASE("binarize") {
  FloatMask m = FloatMask::zeros(3, 2);
  for (float& v : m.values) v = 0.5f;
  CHECK(binarize(m, 0.5).popcount() == 0);  // strict inequality
  for (float& v : m.values) v = 0.9f;
  CHECK(binarize(m, 0.5).popcount() == m.values.size());

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FloatMask r = FloatMask::zeros(16, 16);
  for (float& v : r.values) v = static_cast<float>(unit(rng));
  const BinaryMask b = binarize(r, 0.4);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    CHECK(b.values[i] == (r.values[i] > 0.4 ? 1 : 0));
  }
}

TEST_CASE("mask_bce: clamp floor, ln2 midpoint, oracle equality") {
  BinaryMask gt = BinaryMask::zeros(4, 4);
  for (std::size_t i = 0; i < gt.values.size(); ++i) gt.values[i] = i % 2;

  // Perfect prediction, post-clamp: loss <= 1.2e-7 per pixel.
  FloatMask perfect = FloatMask::zeros(4, 4);
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    perfect.values[i] = gt.values[i] ? 1.0f : 0.0f;
  }
  CHECK(mask_bce(perfect, gt) <= 1.2e-7);

  // Uniform 0.5 prediction: exactly ln 2 per pixel.
  FloatMask half = FloatMask::zeros(4, 4);
  for (float& v : half.values) v = 0.5f;
  CHECK(mask_bce(half, gt) == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FloatMask pred = FloatMask::zeros(8, 8);
  BinaryMask g2 = BinaryMask::zeros(8, 8);
  for (float& v : pred.values) v = static_cast<float>(unit(rng));
  for (auto& v : g2.values) v = rng() % 2;
  CHECK(mask_bce(pred, g2) ==
        doctest::Approx(pt::bce_oracle(pred, g2)).epsilon(1e-9));

  CHECK_THROWS_AS(mask_bce(FloatMask::zeros(3, 3), BinaryMask::zeros(4, 4)),
                  ShapeError);
}

TEST_CASE("mask_bce >= entropy of the clamped target") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BinaryMask gt = BinaryMask::zeros(6, 6);
  for (auto& v : gt.values) v = rng() % 2;
  FloatMask gt_as_probs = FloatMask::zeros(6, 6);
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    gt_as_probs.values[i] = gt.values[i] ? 1.0f : 0.0f;
  }
  const double entropy = mask_bce(gt_as_probs, gt);
  for (int trial = 0; trial < 20; ++trial) {
    FloatMask pred = FloatMask::zeros(6, 6);
    for (float& v : pred.values) v = static_cast<float>(unit(rng));
    CHECK(mask_bce(pred, gt) >= entropy);
  }
}

namespace {

// One positive prior matched to gt 0 with a comfortable logit margin.
LossInputs perfect_inputs(int extra_negatives = 0, double margin = 12.0) {
  LossInputs in;
  const int priors = 1 + extra_negatives;
  in.match.assign(priors, -1);
  in.match[0] = 0;
  in.gt_class = {1};
  in.class_logits = Eigen::MatrixXd::Zero(priors, 2);
  in.class_logits(0, 1) = margin;  // positive: class 1 confident
  for (int i = 1; i < priors; ++i) {
    in.class_logits(i, 0) = margin;  // negatives: background confident
  }
  in.pred_offsets = Eigen::MatrixXd::Zero(priors, 4);
  in.gt_offsets = Eigen::MatrixXd::Zero(priors, 4);
  return in;
}

}  // namespace

TEST_CASE("detection_losses: perfect predictions") {
  const auto [l_conf, l_loc] = detection_losses(perfect_inputs());
  CHECK(l_loc == 0.0);
  CHECK(l_conf <= 1e-4);
}

TEST_CASE("detection_losses: smooth-L1 quadratic branch") {
  for (double delta : {0.1, 0.5, 0.99}) {
    LossInputs in = perfect_inputs();
    in.pred_offsets(0, 2) = delta;
    const auto [l_conf, l_loc] = detection_losses(in);
    CHECK(l_loc == doctest::Approx(0.5 * delta * delta).epsilon(1e-12));
  }
  // Linear branch past 1.
  LossInputs in = perfect_inputs();
  in.pred_offsets(0, 1) = 2.5;
  CHECK(detection_losses(in).second == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("detection_losses: hard negative mining keeps a 3:1 ratio") {
  LossInputs in = perfect_inputs(10, 12.0);
  // Make negatives sortable: background logit decreasing => CE increasing.
  for (int i = 1; i <= 10; ++i) in.class_logits(i, 0) = 12.0 - i;
  const auto [l_conf, l_loc] = detection_losses(in);
  // Only the 3 hardest negatives (smallest margins 2, 3, 4) are mined.
  double expect = std::log(1.0 + std::exp(-12.0));
  for (int m : {2, 3, 4}) expect += std::log(1.0 + std::exp(double(-m)));
  CHECK(l_conf == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("losses: random instances match the loop oracle") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> logit(-4.0, 4.0);
  std::uniform_real_distribution<double> offset(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int priors = 4 + static_cast<int>(rng() % 12);
    const int classes = 2 + static_cast<int>(rng() % 3);
    const int gts = 1 + static_cast<int>(rng() % 3);
    LossInputs in;
    in.match.resize(priors);
    in.gt_class.resize(gts);
    for (int g = 0; g < gts; ++g) {
      in.gt_class[g] = 1 + static_cast<int>(rng() % (classes - 1));
    }
    int n_pos = 0;
    for (int i = 0; i < priors; ++i) {
      in.match[i] = (rng() % 3 == 0) ? static_cast<int>(rng() % gts) : -1;
      n_pos += in.match[i] >= 0;
    }
    if (n_pos == 0) in.match[0] = 0;
    in.class_logits = Eigen::MatrixXd::Zero(priors, classes);
    in.pred_offsets = Eigen::MatrixXd::Zero(priors, 4);
    in.gt_offsets = Eigen::MatrixXd::Zero(priors, 4);
    for (int i = 0; i < priors; ++i) {
      for (int c = 0; c < classes; ++c) in.class_logits(i, c) = logit(rng);
      for (int c = 0; c < 4; ++c) {
        in.pred_offsets(i, c) = offset(rng);
        in.gt_offsets(i, c) = offset(rng);
      }
    }
    // A couple of positive mask pairs.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int m = 0; m < 2; ++m) {
      FloatMask pm = FloatMask::zeros(5, 4);
      BinaryMask gm = BinaryMask::zeros(5, 4);
      for (float& v : pm.values) v = static_cast<float>(unit(rng));
      for (auto& v : gm.values) v = rng() % 2;
      in.pred_masks.push_back(std::move(pm));
      in.gt_masks.push_back(std::move(gm));
    }

    const auto oracle = pt::loss_oracle(in);
    const auto [l_conf, l_loc] = detection_losses(in);
    CHECK(l_conf == doctest::Approx(oracle.conf).epsilon(1e-9));
    CHECK(l_loc == doctest::Approx(oracle.loc).epsilon(1e-9));
    CHECK(mask_loss(in) == doctest::Approx(oracle.mask).epsilon(1e-9));
    CHECK(total_loss(in) == doctest::Approx(oracle.total).epsilon(1e-9));
  }
}

TEST_CASE("total_loss arithmetic and error paths") {
  CHECK(total_loss(0.0, 0.0, 0.0, 1.5, 6.125, 3) == 0.0);
  CHECK(total_loss(1.0, 2.0, 3.0, 1.0, 1.0, 2) == doctest::Approx(3.0));

  // Formula recomputation on random components.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double lc = unit(rng), ll = unit(rng), lm = unit(rng);
    const double a = unit(rng) + 0.1, b = unit(rng) + 0.1;
    const int n = 1 + static_cast<int>(rng() % 7);
    CHECK(total_loss(lc, ll, lm, a, b, n) ==
          doctest::Approx((lc + a * ll + b * lm) / n).epsilon(1e-12));
  }

  CHECK_THROWS_AS(total_loss(1.0, 1.0, 1.0, 1.0, 1.0, 0),
                  NormalizationError);
  LossInputs none;
  none.match = {-1, -1};
  none.gt_class = {1};
  none.class_logits = Eigen::MatrixXd::Zero(2, 2);
  none.pred_offsets = Eigen::MatrixXd::Zero(2, 4);
  none.gt_offsets = Eigen::MatrixXd::Zero(2, 4);
  CHECK_THROWS_AS(detection_losses(none), NormalizationError);
  CHECK_THROWS_AS(total_loss(none), NormalizationError);
}

TEST_CASE("total_loss monotone in each component") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> unit(0.0, 3.0);
  for (int i = 0; i < 30; ++i) {
    const double lc = unit(rng), ll = unit(rng), lm = unit(rng);
    const double base = total_loss(lc, ll, lm, 1.5, 6.125, 2);
    CHECK(base >= 0.0);
    CHECK(total_loss(lc + 0.5, ll, lm, 1.5, 6.125, 2) >= base);
    CHECK(total_loss(lc, ll + 0.5, lm, 1.5, 6.125, 2) >= base);
    CHECK(total_loss(lc, ll, lm + 0.5, 1.5, 6.125, 2) >= base);
  }
}
