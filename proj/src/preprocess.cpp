#include "facehop/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "facehop/errors.hpp"

namespace facehop {

namespace {
constexpr int kOutputSize = 32;
constexpr int kMinCropSide = 8;
}  // namespace

void validate_landmarks(const Image& img, const Landmarks& lm) {
    if (!(lm.left_x < lm.right_x))
        throw ValidationError("landmarks: left eye must lie left of right eye");
    double d = std::hypot(lm.right_x - lm.left_x, lm.right_y - lm.left_y);
    if (d < 1e-9) throw ValidationError("landmarks: coincident eyes");
    for (auto [x, y] : {std::pair{lm.left_x, lm.left_y}, std::pair{lm.right_x, lm.right_y}}) {
        if (!img.in_bounds(x, y)) throw ValidationError("landmarks: eye outside image bounds");
    }
}

Image align(const Image& img, const Landmarks& lm) {
    validate_landmarks(img, lm);
    double theta = std::atan2(lm.right_y - lm.left_y, lm.right_x - lm.left_x);
    double cx = 0.5 * (lm.left_x + lm.right_x);
    double cy = 0.5 * (lm.left_y + lm.right_y);
    double c = std::cos(theta), s = std::sin(theta);

    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            // Inverse map: rotate the output position by +theta about the center.
            double dx = x - cx, dy = y - cy;
            double src_x = cx + c * dx - s * dy;
            double src_y = cy + s * dx + c * dy;
            out.at(x, y) = bilinear_sample_zero(img, src_x, src_y);
        }
    }
    return out;
}

Landmarks aligned_landmarks(const Image& img, const Landmarks& lm) {
    validate_landmarks(img, lm);
    double theta = std::atan2(lm.right_y - lm.left_y, lm.right_x - lm.left_x);
    double cx = 0.5 * (lm.left_x + lm.right_x);
    double cy = 0.5 * (lm.left_y + lm.right_y);
    double c = std::cos(theta), s = std::sin(theta);

    auto fwd = [&](double x, double y) -> std::array<double, 2> {
        double dx = x - cx, dy = y - cy;
        return {cx + c * dx + s * dy, cy - s * dx + c * dy};
    };
    auto le = fwd(lm.left_x, lm.left_y);
    auto re = fwd(lm.right_x, lm.right_y);
    Landmarks out;
    out.left_x = le[0];
    out.left_y = le[1];
    out.right_x = re[0];
    out.right_y = re[1];
    out.face_box = lm.face_box;
    return out;
}

Image crop(const Image& img, const Landmarks& lm, const CropGeometry& geom) {
    validate_landmarks(img, lm);
    double d = std::hypot(lm.right_x - lm.left_x, lm.right_y - lm.left_y);
    long side = std::lround(geom.side_factor * d);
    side = std::min<long>(side, std::min(img.width, img.height));
    if (side < kMinCropSide) throw ValidationError("crop window smaller than 8x8");

    double mid_x = 0.5 * (lm.left_x + lm.right_x);
    double eye_y = 0.5 * (lm.left_y + lm.right_y);
    long left = std::lround(mid_x - (side - 1) / 2.0);
    long top = std::lround(eye_y - geom.eye_row_fraction * side);
    left = std::clamp<long>(left, 0, img.width - side);
    top = std::clamp<long>(top, 0, img.height - side);

    Image out(static_cast<int>(side), static_cast<int>(side));
    for (long y = 0; y < side; ++y)
        for (long x = 0; x < side; ++x)
            out.at(static_cast<int>(x), static_cast<int>(y)) =
                img.at(static_cast<int>(left + x), static_cast<int>(top + y));
    return out;
}

Image equalize_hist(const Image& img) {
    const std::size_t n = img.data.size();
    std::array<long, 256> hist{};
    std::vector<int> bins(n);
    for (std::size_t i = 0; i < n; ++i) {
        int b = static_cast<int>(std::clamp(std::lround(img.data[i]), 0L, 255L));
        bins[i] = b;
        ++hist[b];
    }

    std::array<long, 256> cdf{};
    long running = 0;
    long cdf_min = 0;
    for (int v = 0; v < 256; ++v) {
        running += hist[v];
        cdf[v] = running;
        if (cdf_min == 0 && hist[v] > 0) cdf_min = cdf[v];
    }

    std::array<double, 256> map{};
    long denom = static_cast<long>(n) - cdf_min;
    if (denom > 0) {
        for (int v = 0; v < 256; ++v)
            map[v] = static_cast<double>(std::lround(255.0 * (cdf[v] - cdf_min) / denom));
    }
    // denom == 0 means a single occupied bin; everything maps to 0.

    Image out(img.width, img.height);
    for (std::size_t i = 0; i < n; ++i) out.data[i] = map[bins[i]];
    return out;
}

Image resize_to_32(const Image& img) {
    if (img.width != img.height) throw ValidationError("resize_to_32 expects a square image");
    if (img.width == kOutputSize) return img;
    return bilinear_resize(img, kOutputSize, kOutputSize);
}

Image preprocess_image(const Image& img, const Landmarks& lm, const CropGeometry& geom) {
    Image aligned = align(img, lm);
    Landmarks alm = aligned_landmarks(img, lm);
    return resize_to_32(equalize_hist(crop(aligned, alm, geom)));
}

Landmarks canonical_aligned_landmarks(const CropGeometry& geom) {
    double half = 0.5 * kOutputSize / geom.side_factor;
    double mid_x = (kOutputSize - 1) / 2.0;
    double eye_y = geom.eye_row_fraction * kOutputSize;
    Landmarks lm;
    lm.left_x = mid_x - half;
    lm.left_y = eye_y;
    lm.right_x = mid_x + half;
    lm.right_y = eye_y;
    return lm;
}

}  // namespace facehop
