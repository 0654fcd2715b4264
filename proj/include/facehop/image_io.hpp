#pragma once

#include <filesystem>

#include "facehop/image.hpp"

namespace facehop {

// Loads an 8-bit grayscale image. Supported formats: binary PGM (P5) and PNG
// (color PNGs are converted to luminance). Throws IoError on failure.
Image load_image(const std::filesystem::path& path);

// Writes a binary PGM (P5). Values are rounded and clamped to [0, 255].
void save_pgm(const std::filesystem::path& path, const Image& img);

}  // namespace facehop
