#include "vrseq/loss_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vrseq {

namespace {
void check_label(std::span<const double> logits, int label) {
    if (logits.size() < 2) throw std::invalid_argument("softmax needs at least 2 logits");
    if (label < 0 || label >= static_cast<int>(logits.size()))
        throw std::invalid_argument("class label out of range");
}
}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

double softmax_cross_entropy(std::span<const double> logits, int label) {
    check_label(logits, label);
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - m);
    return std::log(z) - (logits[label] - m);
}

void softmax_cross_entropy_backward(std::span<const double> logits, int label, double w,
                                    std::span<double> d_logits) {
    check_label(logits, label);
    const std::vector<double> p = softmax(logits);
    for (size_t i = 0; i < logits.size(); ++i)
        d_logits[i] += w * (p[i] - (static_cast<int>(i) == label ? 1.0 : 0.0));
}

}  // namespace vrseq
