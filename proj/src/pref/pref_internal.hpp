// src/pref/pref_internal.hpp
#pragma once

#include <vector>

#include "ariadne/pref_align.hpp"

namespace ariadne::pref::detail {

// Pixels per forward/backward block; fixed so gradient sums do not depend on
// the thread count.
inline constexpr std::size_t kPixelChunk = 4096;

std::vector<std::size_t> chunk_pixels(std::size_t n, std::size_t chunk);

// Gradient of sum_i dlogits[i] * z_i over the image.
nn::MlpParams image_gradient(const PixelPolicy& policy, const GrayImage& image, const std::vector<double>& dlogits);

}  // namespace ariadne::pref::detail
