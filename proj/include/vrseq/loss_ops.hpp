#pragma once

#include <span>
#include <vector>

namespace vrseq {

// softmax with max shift
std::vector<double> softmax(std::span<const double> logits);

// -ln softmax(logits)[label]
double softmax_cross_entropy(std::span<const double> logits, int label);

// d_logits += w * (softmax(logits) - onehot(label))
void softmax_cross_entropy_backward(std::span<const double> logits, int label, double w,
                                    std::span<double> d_logits);

}  // namespace vrseq
