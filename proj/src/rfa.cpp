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
#include "planeseg/rfa.hpp"

#include <algorithm>
#include <cmath>

namespace planeseg {

void RfaConfig::validate() const {
  if (!(ratios[0] > 0.0 && ratios[0] < ratios[1] && ratios[1] < ratios[2] &&
        ratios[2] <= 1.0)) {
    throw ConfigError("rfa: ratios must be strictly increasing in (0,1]");
  }
  if (out_channels < 1) throw ConfigError("rfa: out_channels must be >= 1");
  if (asf_hidden < 1) throw ConfigError("rfa: asf_hidden must be >= 1");
}

namespace {

int pooled_extent(double ratio, int in) {
  return std::max(1, static_cast<int>(std::lround(ratio * in)));
}

void check_finite_shape(const FeatureMap& f, const char* who) {
  if (f.channels < 1 || f.height < 1 || f.width < 1 ||
      f.values.size() !=
          static_cast<std::size_t>(f.channels) * f.height * f.width) {
    throw ShapeError(std::string(who) + ": inconsistent feature dimensions");
  }
}

}  // namespace

FeatureMap adaptive_avg_pool(const FeatureMap& f, double ratio) {
  check_finite_shape(f, "adaptive_avg_pool");
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ConfigError("adaptive_avg_pool: ratio must be in (0,1]");
  }
  const int oh = pooled_extent(ratio, f.height);
  const int ow = pooled_extent(ratio, f.width);
  FeatureMap out = FeatureMap::zeros(f.channels, oh, ow);
  for (int c = 0; c < f.channels; ++c) {
    for (int y = 0; y < oh; ++y) {
      const int y0 = (y * f.height) / oh;
      const int y1 = ((y + 1) * f.height + oh - 1) / oh;  // ceil
      for (int x = 0; x < ow; ++x) {
        const int x0 = (x * f.width) / ow;
        const int x1 = ((x + 1) * f.width + ow - 1) / ow;
        double sum = 0.0;
        for (int yy = y0; yy < y1; ++yy) {
          for (int xx = x0; xx < x1; ++xx) {
            sum += f.at(c, yy, xx);
          }
        }
        out.at(c, y, x) =
            static_cast<float>(sum / ((y1 - y0) * (x1 - x0)));
      }
    }
  }
  return out;
}

FeatureMap conv2d(const FeatureMap& f, const ConvWeights& w) {
  check_finite_shape(f, "conv2d");
  if (w.size != 1 && w.size != 3) {
    throw ShapeError("conv2d: kernel size must be 1 or 3");
  }
  if (w.in_channels != f.channels) {
    throw ShapeError("conv2d: input channel count mismatch");
  }
  if (w.kernel.size() != static_cast<std::size_t>(w.out_channels) *
                             w.in_channels * w.size * w.size ||
      w.bias.size() != static_cast<std::size_t>(w.out_channels)) {
    throw ShapeError("conv2d: weight buffer size mismatch");
  }

  const int pad = w.size / 2;
  FeatureMap out = FeatureMap::zeros(w.out_channels, f.height, f.width);
  for (int o = 0; o < w.out_channels; ++o) {
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        double acc = w.bias[o];
        for (int i = 0; i < f.channels; ++i) {
          for (int ky = 0; ky < w.size; ++ky) {
            const int sy = y + ky - pad;
            if (sy < 0 || sy >= f.height) continue;
            for (int kx = 0; kx < w.size; ++kx) {
              const int sx = x + kx - pad;
              if (sx < 0 || sx >= f.width) continue;
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

FeatureMap bilinear_upsample(const FeatureMap& f, int out_h, int out_w) {
  check_finite_shape(f, "bilinear_upsample");
  if (out_h < 1 || out_w < 1) {
    throw ShapeError("bilinear_upsample: output dims must be >= 1");
  }
  FeatureMap out = FeatureMap::zeros(f.channels, out_h, out_w);
  const double sy = static_cast<double>(f.height) / out_h;
  const double sx = static_cast<double>(f.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double src_y =
        std::clamp((y + 0.5) * sy - 0.5, 0.0, f.height - 1.0);
    const int y0 = static_cast<int>(std::floor(src_y));
    const int y1 = std::min(y0 + 1, f.height - 1);
    const double fy = src_y - y0;
    for (int x = 0; x < out_w; ++x) {
      const double src_x =
          std::clamp((x + 0.5) * sx - 0.5, 0.0, f.width - 1.0);
      const int x0 = static_cast<int>(std::floor(src_x));
      const int x1 = std::min(x0 + 1, f.width - 1);
      const double fx = src_x - x0;
      for (int c = 0; c < f.channels; ++c) {
        const double top = (1.0 - fx) * f.at(c, y0, x0) + fx * f.at(c, y0, x1);
        const double bot = (1.0 - fx) * f.at(c, y1, x0) + fx * f.at(c, y1, x1);
        out.at(c, y, x) = static_cast<float>((1.0 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

FeatureMap asf_fuse(const std::array<FeatureMap, 3>& features,
                    const RfaWeights& w) {
  for (const FeatureMap& f : features) check_finite_shape(f, "asf_fuse");
  if (!features[0].same_shape(features[1]) ||
      !features[0].same_shape(features[2])) {
    throw ShapeError("asf_fuse: branch shapes differ");
  }
  const int ch = features[0].channels;
  const int h = features[0].height;
  const int wd = features[0].width;

  FeatureMap concat = FeatureMap::zeros(3 * ch, h, wd);
  for (int b = 0; b < 3; ++b) {
    std::copy(features[b].values.begin(), features[b].values.end(),
              concat.values.begin() +
                  static_cast<std::size_t>(b) * ch * h * wd);
  }

  const FeatureMap hidden = conv2d(concat, w.asf_squeeze);
  FeatureMap logits = conv2d(hidden, w.asf_weights);
  if (logits.channels != 3) {
    throw ShapeError("asf_fuse: weight branch must emit 3 channels");
  }

  FeatureMap out = FeatureMap::zeros(ch, h, wd);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < wd; ++x) {
      // Per-pixel softmax over the three branch weights.
      double m = logits.at(0, y, x);
      for (int b = 1; b < 3; ++b) {
        m = std::max(m, static_cast<double>(logits.at(b, y, x)));
      }
      double z = 0.0;
      std::array<double, 3> e{};
      for (int b = 0; b < 3; ++b) {
        e[b] = std::exp(logits.at(b, y, x) - m);
        z += e[b];
      }
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int b = 0; b < 3; ++b) {
          acc += (e[b] / z) * features[b].at(c, y, x);
        }
        out.at(c, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

FeatureMap rfa_forward(const FeatureMap& c5, const FeatureMap& lateral_p5,
                       const RfaWeights& w, const RfaConfig& cfg) {
  cfg.validate();
  check_finite_shape(c5, "rfa_forward");
  check_finite_shape(lateral_p5, "rfa_forward");
  if (lateral_p5.height != c5.height || lateral_p5.width != c5.width) {
    throw ShapeError("rfa_forward: lateral spatial size must match c5");
  }
  if (lateral_p5.channels != cfg.out_channels) {
    throw ShapeError("rfa_forward: lateral channels must equal out_channels");
  }

  std::array<FeatureMap, 3> context;
  for (int b = 0; b < 3; ++b) {
    const FeatureMap pooled = adaptive_avg_pool(c5, cfg.ratios[b]);
    const FeatureMap projected = conv2d(pooled, w.projections[b]);
    if (projected.channels != cfg.out_channels) {
      throw ShapeError("rfa_forward: projection width must be out_channels");
    }
    context[b] = bilinear_upsample(projected, c5.height, c5.width);
  }

  const FeatureMap residual = asf_fuse(context, w);

  FeatureMap merged = lateral_p5;
  for (std::size_t i = 0; i < merged.values.size(); ++i) {
    merged.values[i] += residual.values[i];
  }
  return conv2d(merged, w.output);
}

}  // namespace planeseg
