// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rotp/geometry.hpp"

namespace rotp {

// Aspect-preserving rescale into a fixed canvas. pad_x/pad_y is the content
// offset inside the canvas; transforms produced by letterbox() place content
// at the origin and zero-fill the right/bottom remainder.
struct LetterboxTransform {
    double scale = 1.0;
    double pad_x = 0.0;
    double pad_y = 0.0;
    int target_w = 800;
    int target_h = 800;

    Point2 apply(const Point2& p) const { return {p.x * scale + pad_x, p.y * scale + pad_y}; }
    Point2 invert(const Point2& p) const { return {(p.x - pad_x) / scale, (p.y - pad_y) / scale}; }

    // zero-filled remainder sizes
    double fill_x(int image_w) const { return target_w - image_w * scale; }
    double fill_y(int image_h) const { return target_h - image_h * scale; }
};

inline LetterboxTransform letterbox(int image_w, int image_h, int target_w = 800, int target_h = 800) {
    LetterboxTransform t;
    t.target_w = target_w;
    t.target_h = target_h;
    t.scale = std::min(static_cast<double>(target_w) / image_w,
                       static_cast<double>(target_h) / image_h);
    t.pad_x = 0.0;
    t.pad_y = 0.0;
    return t;
}

}  // namespace rotp
