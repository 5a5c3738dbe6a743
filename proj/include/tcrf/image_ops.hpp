#pragma once

#include "tcrf/core.hpp"

namespace tcrf {

// All window operations replicate the border (coordinates clamp to bounds).
// Window size k >= 1 spans offsets [-(k-1)/2, k/2], so even k leans right.

// Separable mean of a k x k window.
GridF box_mean(const GridF& in, int window);

// Population variance (E[x^2] - E[x]^2) of a k x k window; k odd, >= 3.
GridF local_variance(const GridF& in, int window);

// Morphology with a square structuring element.
GridF erode(const GridF& in, int window);
GridF dilate(const GridF& in, int window);
GridF morphological_opening(const GridF& in, int window);

// Median of the clamped k x k multiset (element at index k*k/2 of the
// sorted window).
GridF median_filter(const GridF& in, int window);

// Central differences in the interior, one-sided at the borders.
void gradient(const GridF& in, GridF& gx, GridF& gy);
GridF gradient_magnitude(const GridF& in);

// Exact Euclidean distance to the nearest true cell (Felzenszwalb &
// Huttenlocher two-pass transform). Cells are "edge" where mask != 0.
// If the mask is empty everywhere, every output value is `empty_value`.
GridF distance_transform(const Grid<uint8_t>& mask, double empty_value);

// Nearest-rank percentile (p in [0,100]) of all grid values.
double percentile(std::vector<double> values, double p);

} // namespace tcrf
