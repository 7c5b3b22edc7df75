#include "lsrl/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lsrl/errors.hpp"

namespace lsrl {

namespace {
constexpr std::size_t kTile = 28;
constexpr std::size_t kGap = 2;
}

std::vector<std::uint8_t> render_grid(const Tensor& images, std::size_t cols) {
    if (images.rank() != 2 || images.shape()[1] != kTile * kTile) {
        throw ShapeError("render_grid expects [k x 784], got " + shape_str(images.shape()));
    }
    const std::size_t k = images.shape()[0];
    if (k == 0 || cols == 0) throw StateError("render_grid: nothing to render");

    const std::size_t rows = (k + cols - 1) / cols;
    const std::size_t width = cols * kTile + (cols - 1) * kGap;
    const std::size_t height = rows * kTile + (rows - 1) * kGap;

    std::ostringstream header;
    header << "P5\n" << width << " " << height << "\n255\n";
    const std::string head = header.str();

    std::vector<std::uint8_t> out(head.size() + width * height, 0);
    std::copy(head.begin(), head.end(), out.begin());
    std::uint8_t* canvas = out.data() + head.size();

    const auto& px = images.data();
    for (std::size_t t = 0; t < k; ++t) {
        const std::size_t r = t / cols, c = t % cols;
        const std::size_t y0 = r * (kTile + kGap), x0 = c * (kTile + kGap);
        for (std::size_t y = 0; y < kTile; ++y) {
            for (std::size_t x = 0; x < kTile; ++x) {
                const double v = std::clamp(px[t * kTile * kTile + y * kTile + x], 0.0, 1.0);
                canvas[(y0 + y) * width + (x0 + x)] =
                    static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
    return out;
}

TranslationSheet render_translation_sheet(const Tensor& inputs,
                                          const std::vector<int>& input_labels,
                                          const std::vector<int>& tasks, const Tensor& outputs,
                                          const std::vector<int>& predicted) {
    const std::size_t k = input_labels.size();
    if (k == 0) throw StateError("render_translation_sheet: empty case list");
    if (inputs.rank() != 2 || outputs.rank() != 2 || inputs.shape()[0] != k ||
        outputs.shape()[0] != k || tasks.size() != k || predicted.size() != k) {
        throw ShapeError("render_translation_sheet: case lists have mismatched lengths");
    }

    // interleave input/output rows so the grid shows one case per row
    const std::size_t d = kTile * kTile;
    std::vector<double> tiles(2 * k * d);
    for (std::size_t i = 0; i < k; ++i) {
        std::copy_n(inputs.data().data() + i * d, d, tiles.data() + (2 * i) * d);
        std::copy_n(outputs.data().data() + i * d, d, tiles.data() + (2 * i + 1) * d);
    }

    TranslationSheet sheet;
    sheet.pgm = render_grid(Tensor::from_data({2 * k, d}, std::move(tiles)), 2);
    std::ostringstream side;
    for (std::size_t i = 0; i < k; ++i) {
        side << input_labels[i] << " +" << tasks[i] << " -> " << predicted[i] << "\n";
    }
    sheet.sidecar = side.str();
    return sheet;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f << text;
}

}  // namespace lsrl
