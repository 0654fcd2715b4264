#include "facehop/image.hpp"

#include <algorithm>
#include <cmath>

namespace facehop {

double bilinear_sample_zero(const Image& img, double x, double y) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;

    auto pick = [&](int xi, int yi) -> double {
        if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) return 0.0;
        return img.at(xi, yi);
    };

    double top = (1.0 - fx) * pick(x0, y0) + fx * pick(x0 + 1, y0);
    double bot = (1.0 - fx) * pick(x0, y0 + 1) + fx * pick(x0 + 1, y0 + 1);
    return (1.0 - fy) * top + fy * bot;
}

double bilinear_sample_clamped(const Image& img, double x, double y) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;

    auto pick = [&](int xi, int yi) -> double {
        xi = std::clamp(xi, 0, img.width - 1);
        yi = std::clamp(yi, 0, img.height - 1);
        return img.at(xi, yi);
    };

    double top = (1.0 - fx) * pick(x0, y0) + fx * pick(x0 + 1, y0);
    double bot = (1.0 - fx) * pick(x0, y0 + 1) + fx * pick(x0 + 1, y0 + 1);
    return (1.0 - fy) * top + fy * bot;
}

Image bilinear_resize(const Image& img, int out_w, int out_h) {
    Image out(out_w, out_h);
    double sx = static_cast<double>(img.width) / out_w;
    double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double src_y = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            double src_x = (x + 0.5) * sx - 0.5;
            out.at(x, y) = bilinear_sample_clamped(img, src_x, src_y);
        }
    }
    return out;
}

}  // namespace facehop
