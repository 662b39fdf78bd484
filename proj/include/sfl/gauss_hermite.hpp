#pragma once

#include "sfl/model.hpp"

namespace sfl {

// Probabilists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ E f(g), g ~ N(0,1). Weights sum to 1.
struct GaussHermite {
  Vec nodes;
  Vec weights;
};

// Golub-Welsch; results are cached per node count.
const GaussHermite& gauss_hermite(int count);

}  // namespace sfl
