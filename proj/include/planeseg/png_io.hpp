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
#ifndef PLANESEG_PNG_IO_HPP_
#define PLANESEG_PNG_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace planeseg {

struct Image16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;  // row-major
};

// Reads a 16-bit single-channel PNG. Throws IoError when the file cannot
// be opened and FormatError for anything that is not 16-bit grayscale.
Image16 read_png16_gray(const std::filesystem::path& path);

// Writes a 16-bit single-channel PNG with fixed encoder settings so the
// output bytes are deterministic for identical inputs.
void write_png16_gray(const std::filesystem::path& path, const Image16& img);

}  // namespace planeseg

#endif  // PLANESEG_PNG_IO_HPP_
