#pragma once

#include <functional>
#include <map>
#include <string>

#include "vrseq/param_store.hpp"

namespace vrseq {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    // per parameter-group ("encoder", "decoder", "head_y", ...) maximum
    std::map<std::string, double> group_max;
};

// loss_fn(true) must evaluate the loss AND accumulate analytic gradients into
// the store (the checker zeroes the grads first); loss_fn(false) evaluates
// only. It has to be deterministic -- re-seed any rng it uses internally.
// Relative error per scalar: |analytic - central| / max(1e-8, |analytic| + |central|).
GradCheckReport finite_diff_check(ParamStore& params,
                                  const std::function<double(bool with_grad)>& loss_fn,
                                  double eps = 1e-5);

}  // namespace vrseq
