#include "vrseq/grad_check.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace vrseq {

GradCheckReport finite_diff_check(ParamStore& params,
                                  const std::function<double(bool)>& loss_fn, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_check: eps must be positive");

    params.zero_grads();
    const double base = loss_fn(true);
    if (!std::isfinite(base)) throw std::runtime_error("finite_diff_check: non-finite loss");

    // snapshot analytic grads before the perturbation loop clobbers anything
    std::map<std::string, std::vector<double>> analytic;
    params.for_each([&](const ParamStore::Entry& e) { analytic[e.name] = e.grad.values(); });

    GradCheckReport report;
    params.for_each([&](ParamStore::Entry& e) {
        const std::string group = ParamStore::group_of(e.name);
        double& gmax = report.group_max[group];
        for (int i = 0; i < e.value.size(); ++i) {
            const double saved = e.value[i];
            e.value[i] = saved + eps;
            const double up = loss_fn(false);
            e.value[i] = saved - eps;
            const double down = loss_fn(false);
            e.value[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw std::runtime_error("finite_diff_check: non-finite loss at " + e.name);

            const double central = (up - down) / (2.0 * eps);
            const double a = analytic[e.name][i];
            const double rel =
                std::fabs(a - central) / std::max(1e-8, std::fabs(a) + std::fabs(central));
            if (rel > gmax) gmax = rel;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = e.name;
            }
        }
    });
    return report;
}

}  // namespace vrseq
