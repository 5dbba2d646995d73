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
#ifndef PLANESEG_RFA_HPP_
#define PLANESEG_RFA_HPP_

#include <array>
#include <vector>

#include "planeseg/errors.hpp"

namespace planeseg {

// Dense CHW feature map.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;  // index (c, y, x) -> (c*height + y)*width + x

  static FeatureMap zeros(int channels, int height, int width) {
    return FeatureMap{channels, height, width,
                      std::vector<float>(static_cast<std::size_t>(channels) *
                                             height * width,
                                         0.f)};
  }
  float at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool same_shape(const FeatureMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

// Dense convolution weights, cross-correlation layout
// (out_c, in_c, size, size) with one bias per output channel.
struct ConvWeights {
  int out_channels = 0;
  int in_channels = 0;
  int size = 1;  // 1 or 3
  std::vector<float> kernel;  // ((o*in_c + i)*size + ky)*size + kx
  std::vector<float> bias;    // out_channels

  static ConvWeights zeros(int out_c, int in_c, int size) {
    return ConvWeights{out_c, in_c, size,
                       std::vector<float>(static_cast<std::size_t>(out_c) *
                                              in_c * size * size,
                                          0.f),
                       std::vector<float>(out_c, 0.f)};
  }
  float weight(int o, int i, int ky, int kx) const {
    return kernel[((static_cast<std::size_t>(o) * in_channels + i) * size +
                   ky) *
                      size +
                  kx];
  }
  float& weight(int o, int i, int ky, int kx) {
    return kernel[((static_cast<std::size_t>(o) * in_channels + i) * size +
                   ky) *
                      size +
                  kx];
  }
};

struct RfaConfig {
  std::array<double, 3> ratios{0.1, 0.2, 0.3};  // strictly increasing, (0,1]
  int out_channels = 256;
  int asf_hidden = 128;  // out_channels / 2 by default

  void validate() const;
};

// Explicit weights for the augmentation path: one 1x1 projection per
// pooling ratio, the two-layer spatial-weight branch, and the final 3x3
// output convolution.
struct RfaWeights {
  std::array<ConvWeights, 3> projections;  // c5_channels -> out_channels, 1x1
  ConvWeights asf_squeeze;                 // 3*out_channels -> asf_hidden, 1x1
  ConvWeights asf_weights;                 // asf_hidden -> 3, 3x3
  ConvWeights output;                      // out_channels -> out_channels, 3x3
};

// Adaptive average pooling to (max(1, round(ratio*H)), max(1,
// round(ratio*W))) with standard adaptive bin edges.
FeatureMap adaptive_avg_pool(const FeatureMap& f, double ratio);

// Cross-correlation, stride 1; 3x3 kernels use zero padding 1 so the
// spatial size is preserved.
FeatureMap conv2d(const FeatureMap& f, const ConvWeights& w);

// Half-pixel-center bilinear resampling with edge clamping.
FeatureMap bilinear_upsample(const FeatureMap& f, int out_h, int out_w);

// Adaptive spatial fusion: concat -> 1x1 -> 3x3 -> per-pixel softmax over
// the three branch weights -> convex combination of the inputs.
FeatureMap asf_fuse(const std::array<FeatureMap, 3>& features,
                    const RfaWeights& w);

// Full augmentation path: pool at each ratio, project, upsample to the
// source size, fuse, add the top-down lateral, and run the output conv.
FeatureMap rfa_forward(const FeatureMap& c5, const FeatureMap& lateral_p5,
                       const RfaWeights& w, const RfaConfig& cfg);

}  // namespace planeseg

#endif  // PLANESEG_RFA_HPP_
