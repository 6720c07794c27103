#pragma once

#include <span>
#include <string>
#include <vector>

#include "vrseq/gaussian.hpp"
#include "vrseq/param_store.hpp"
#include "vrseq/rng.hpp"

namespace vrseq {

// Two-layer perceptron with tanh hidden activation: y = W2 tanh(W1 x + b1) + b2.
struct Mlp {
    Tensor *w1, *b1, *w2, *b2;
    Tensor *d_w1, *d_b1, *d_w2, *d_b2;
    int in_dim = 0, hidden_dim = 0, out_dim = 0;

    static Mlp create(ParamStore& store, const std::string& prefix, int in, int hidden,
                      int out, Rng& rng);

    struct Cache {
        std::vector<double> x;  // input
        std::vector<double> a;  // tanh activations
    };

    std::vector<double> forward(std::span<const double> x, Cache* cache = nullptr) const;

    // Accumulates weight gradients, returns gradient w.r.t. the input.
    std::vector<double> backward(const Cache& cache, std::span<const double> d_out) const;
};

// Mlp emitting a diagonal Gaussian: the raw output splits into mean and a
// pre-activation that becomes std through softplus + floor.
struct GaussianHead {
    Mlp mlp;
    int gauss_dim = 0;

    static GaussianHead create(ParamStore& store, const std::string& prefix, int in,
                               int hidden, int gauss_dim, Rng& rng);

    struct Cache {
        Mlp::Cache mlp;
        std::vector<double> s;  // std pre-activation
    };

    GaussianParams forward(std::span<const double> x, Cache* cache = nullptr) const;

    std::vector<double> backward(const Cache& cache, std::span<const double> d_mean,
                                 std::span<const double> d_std) const;
};

}  // namespace vrseq
