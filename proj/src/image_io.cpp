#include "facehop/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "facehop/errors.hpp"

namespace facehop {

namespace {

// Skips PGM whitespace and '#' comment lines, then parses one decimal token.
int next_pgm_int(std::istream& in, const std::string& path) {
    int c = in.get();
    for (;;) {
        while (c != EOF && std::isspace(c)) c = in.get();
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
            continue;
        }
        break;
    }
    if (c == EOF || !std::isdigit(c)) throw IoError("malformed PGM header: " + path);
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        if (value > 1 << 30) throw IoError("malformed PGM header: " + path);
        c = in.get();
    }
    return value;
}

Image load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') throw IoError("not a binary PGM (P5): " + path.string());

    int width = next_pgm_int(in, path.string());
    int height = next_pgm_int(in, path.string());
    int maxval = next_pgm_int(in, path.string());
    if (width <= 0 || height <= 0) throw IoError("bad PGM dimensions: " + path.string());
    if (maxval <= 0 || maxval > 255) throw IoError("only 8-bit PGM supported: " + path.string());
    // The header terminator is a single whitespace byte already consumed by
    // next_pgm_int's trailing get(); raster begins at the current position.

    std::vector<unsigned char> raster(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (static_cast<std::size_t>(in.gcount()) != raster.size())
        throw IoError("truncated PGM raster: " + path.string());

    Image img(width, height);
    for (std::size_t i = 0; i < raster.size(); ++i) img.data[i] = raster[i];
    return img;
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

Image load_png(const std::filesystem::path& path) {
    PngReadCloser ctx;
    ctx.fp = std::fopen(path.string().c_str(), "rb");
    if (!ctx.fp) throw IoError("cannot open image: " + path.string());

    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw IoError("libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("libpng init failed");

    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("failed to decode PNG: " + path.string());

    png_init_io(ctx.png, ctx.fp);
    png_read_info(ctx.png, ctx.info);

    png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
    png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
    png_byte color_type = png_get_color_type(ctx.png, ctx.info);
    png_byte bit_depth = png_get_bit_depth(ctx.png, ctx.info);

    if (bit_depth == 16) png_set_strip_16(ctx.png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
    if (color_type & PNG_COLOR_MASK_COLOR)
        png_set_rgb_to_gray_fixed(ctx.png, 1 /* silent */, -1, -1);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    std::vector<unsigned char> raster(static_cast<std::size_t>(width) * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raster.data() + static_cast<std::size_t>(y) * width;
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);

    Image img(static_cast<int>(width), static_cast<int>(height));
    for (std::size_t i = 0; i < raster.size(); ++i) img.data[i] = raster[i];
    return img;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open image: " + path.string());
    unsigned char head[8] = {0};
    probe.read(reinterpret_cast<char*>(head), 8);
    probe.close();

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (std::equal(png_sig, png_sig + 8, head)) return load_png(path);
    if (head[0] == 'P' && head[1] == '5') return load_pgm(path);
    throw IoError("unsupported image format (want PGM P5 or PNG): " + path.string());
}

void save_pgm(const std::filesystem::path& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raster(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        long v = std::lround(img.data[i]);
        raster[i] = static_cast<unsigned char>(std::clamp(v, 0L, 255L));
    }
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!out) throw IoError("failed writing image: " + path.string());
}

}  // namespace facehop
