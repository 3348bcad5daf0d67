#pragma once

#include <filesystem>
#include <vector>

namespace swg {

// RGB raster with double components in [0, 1], row-major, interleaved.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> rgb;  // 3 * width * height

    double& at(int row, int col, int channel) {
        return rgb[3 * static_cast<std::size_t>(row * width + col) +
                   static_cast<std::size_t>(channel)];
    }
    double at(int row, int col, int channel) const {
        return rgb[3 * static_cast<std::size_t>(row * width + col) +
                   static_cast<std::size_t>(channel)];
    }

    static Image constant(int width, int height, double r, double g, double b);
};

// Binary PPM (P6), 8-bit, maxval 255. Components are mapped as byte/255.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

// True when the build supports reading this file's format (PPM always;
// PNG only when compiled with SWGSIM_WITH_PNG).
bool image_format_supported(const std::filesystem::path& path);

// Dispatches on extension: .ppm always works, .png behind the feature flag.
Image read_image(const std::filesystem::path& path);

}  // namespace swg
