#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsrl/tensor.hpp"

namespace lsrl {

// Binary PGM (P5, maxval 255). Images [k x 784] are tiled row-major as
// 28x28 tiles with 2-pixel black separators; a ragged final row is padded
// with black tiles.
std::vector<std::uint8_t> render_grid(const Tensor& images, std::size_t cols);

// One row per case: input tile next to output tile. The sidecar text lists
// "label +task -> predicted" per row.
struct TranslationSheet {
    std::vector<std::uint8_t> pgm;
    std::string sidecar;
};
TranslationSheet render_translation_sheet(const Tensor& inputs,
                                          const std::vector<int>& input_labels,
                                          const std::vector<int>& tasks, const Tensor& outputs,
                                          const std::vector<int>& predicted);

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::string& path, const std::string& text);

}  // namespace lsrl
