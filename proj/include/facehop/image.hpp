#pragma once

#include <vector>

namespace facehop {

// Grayscale image, row-major, intensities in [0, 255].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool in_bounds(double x, double y) const {
        return x >= 0.0 && y >= 0.0 && x <= width - 1.0 && y <= height - 1.0;
    }
};

// Bilinear sample; source pixels outside the frame contribute zero.
double bilinear_sample_zero(const Image& img, double x, double y);

// Bilinear sample with border replication (used for resizing).
double bilinear_sample_clamped(const Image& img, double x, double y);

// Bilinear resize with half-pixel center alignment.
Image bilinear_resize(const Image& img, int out_w, int out_h);

}  // namespace facehop
