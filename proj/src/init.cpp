#include "vrseq/init.hpp"

#include <cmath>

namespace vrseq {

void init_uniform_fan_in(Tensor& t, int fan_in, Rng& rng) {
    const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-k, k);
}

}  // namespace vrseq
