#pragma once

#include "vrseq/rng.hpp"
#include "vrseq/tensor.hpp"

namespace vrseq {

// uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]
void init_uniform_fan_in(Tensor& t, int fan_in, Rng& rng);

}  // namespace vrseq
