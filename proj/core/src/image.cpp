#include "swgsim/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "swgsim/errors.hpp"

#ifdef SWGSIM_WITH_PNG
#include <png.h>
#endif

namespace swg {

Image Image::constant(int width, int height, double r, double g, double b) {
    Image img;
    img.width = width;
    img.height = height;
    img.rgb.resize(3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = r;
        img.rgb[i + 1] = g;
        img.rgb[i + 2] = b;
    }
    return img;
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        return tok;
    }
    throw IoError("unexpected end of PPM header");
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open image: " + path.string());
    }
    if (next_token(in) != "P6") {
        throw IoError("not a binary PPM (P6): " + path.string());
    }
    const int width = std::stoi(next_token(in));
    const int height = std::stoi(next_token(in));
    const int maxval = std::stoi(next_token(in));
    if (width <= 0 || height <= 0 || maxval != 255) {
        throw IoError("unsupported PPM geometry/maxval in " + path.string());
    }
    in.get();  // single whitespace after maxval

    const std::size_t n = 3 * static_cast<std::size_t>(width) *
                          static_cast<std::size_t>(height);
    std::vector<unsigned char> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw IoError("truncated PPM payload in " + path.string());
    }

    Image img;
    img.width = width;
    img.height = height;
    img.rgb.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.rgb[i] = static_cast<double>(bytes[i]) / 255.0;
    }
    return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> bytes(image.rgb.size());
    for (std::size_t i = 0; i < image.rgb.size(); ++i) {
        const double v = std::clamp(image.rgb[i], 0.0, 1.0);
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

#ifdef SWGSIM_WITH_PNG

namespace {

Image read_png(const std::filesystem::path& path) {
    std::FILE* fp = std::fopen(path.string().c_str(), "rb");
    if (!fp) {
        throw IoError("cannot open image: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                             nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng failed on " + path.string());
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    std::vector<unsigned char> rowbuf(3 * static_cast<std::size_t>(width));

    Image img;
    img.width = width;
    img.height = height;
    img.rgb.resize(3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r) {
        png_read_row(png, rowbuf.data(), nullptr);
        for (std::size_t i = 0; i < rowbuf.size(); ++i) {
            img.rgb[static_cast<std::size_t>(r) * rowbuf.size() + i] =
                static_cast<double>(rowbuf[i]) / 255.0;
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

}  // namespace

#endif  // SWGSIM_WITH_PNG

bool image_format_supported(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".ppm") return true;
#ifdef SWGSIM_WITH_PNG
    if (ext == ".png") return true;
#endif
    return false;
}

Image read_image(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".ppm") {
        return read_ppm(path);
    }
#ifdef SWGSIM_WITH_PNG
    if (ext == ".png") {
        return read_png(path);
    }
#endif
    throw IoError("unsupported image format: " + path.string());
}

}  // namespace swg
