#pragma once

#include <optional>

#include "facehop/image.hpp"

namespace facehop {

struct FaceBox {
    double x = 0, y = 0, w = 0, h = 0;
};

// Eye centers in image coordinates (x right, y down, pixel centers at
// integers). Supplied externally, e.g. from the dataset manifest.
struct Landmarks {
    double left_x = 0, left_y = 0;
    double right_x = 0, right_y = 0;
    std::optional<FaceBox> face_box;
};

// Crop geometry around the aligned eye line. The side is a multiple of the
// inter-eye distance and the eye line sits at a fixed fraction of the crop
// height from the top.
struct CropGeometry {
    double side_factor = 2.2;
    double eye_row_fraction = 0.40;
};

// Throws ValidationError if the eyes are swapped, coincident, or out of frame.
void validate_landmarks(const Image& img, const Landmarks& lm);

// Rotates the image about the eye midpoint so the inter-eye segment becomes
// horizontal. Output has the input's dimensions; samples falling outside the
// frame read as zero.
Image align(const Image& img, const Landmarks& lm);

// Landmark positions after align()'s rotation, for downstream cropping.
Landmarks aligned_landmarks(const Image& img, const Landmarks& lm);

// Square crop of side round(side_factor * inter-eye distance), horizontally
// centered on the eye midpoint, eyes at eye_row_fraction of the height,
// translated (side preserved) to stay inside the frame.
Image crop(const Image& img, const Landmarks& lm, const CropGeometry& geom = {});

// CDF histogram equalization over 256 bins.
Image equalize_hist(const Image& img);

// Bilinear resample of a square image down (or up) to 32x32.
Image resize_to_32(const Image& img);

// Full chain: align -> crop -> equalize -> resize. Output is always 32x32.
Image preprocess_image(const Image& img, const Landmarks& lm, const CropGeometry& geom = {});

// Eye positions every preprocessed image ends up with, given the crop
// geometry. Used when synthesized 32x32 images re-enter the pipeline.
Landmarks canonical_aligned_landmarks(const CropGeometry& geom = {});

}  // namespace facehop
