#include "vrseq/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "vrseq/init.hpp"

namespace vrseq {

Mlp Mlp::create(ParamStore& store, const std::string& prefix, int in, int hidden, int out,
                Rng& rng) {
    if (in < 1 || hidden < 1 || out < 1)
        throw std::invalid_argument("Mlp: dims must be >= 1");
    Mlp m;
    m.in_dim = in;
    m.hidden_dim = hidden;
    m.out_dim = out;
    auto mk = [&](const char* name, std::vector<int> shape, int fan_in, Tensor** val,
                  Tensor** grad) {
        auto& e = store.create(prefix + "/" + name, std::move(shape));
        if (fan_in > 0) init_uniform_fan_in(e.value, fan_in, rng);
        *val = &e.value;
        *grad = &e.grad;
    };
    mk("W1", {hidden, in}, in, &m.w1, &m.d_w1);
    mk("b1", {hidden}, 0, &m.b1, &m.d_b1);
    mk("W2", {out, hidden}, hidden, &m.w2, &m.d_w2);
    mk("b2", {out}, 0, &m.b2, &m.d_b2);
    return m;
}

std::vector<double> Mlp::forward(std::span<const double> x, Cache* cache) const {
    if (static_cast<int>(x.size()) != in_dim)
        throw std::invalid_argument("Mlp::forward: input dim mismatch");
    std::vector<double> a(b1->values());
    matvec_acc(*w1, x, a);
    for (double& v : a) v = std::tanh(v);
    std::vector<double> y(b2->values());
    matvec_acc(*w2, a, y);
    if (cache) {
        cache->x.assign(x.begin(), x.end());
        cache->a = std::move(a);
    }
    return y;
}

std::vector<double> Mlp::backward(const Cache& cache, std::span<const double> d_out) const {
    if (static_cast<int>(d_out.size()) != out_dim)
        throw std::invalid_argument("Mlp::backward: output grad dim mismatch");
    outer_acc(*d_w2, d_out, cache.a);
    add_scaled(d_b2->values(), d_out, 1.0);

    std::vector<double> d_a(hidden_dim, 0.0);
    matvec_t_acc(*w2, d_out, d_a);
    for (int k = 0; k < hidden_dim; ++k) d_a[k] *= 1.0 - cache.a[k] * cache.a[k];

    outer_acc(*d_w1, d_a, cache.x);
    add_scaled(d_b1->values(), d_a, 1.0);

    std::vector<double> d_x(in_dim, 0.0);
    matvec_t_acc(*w1, d_a, d_x);
    return d_x;
}

GaussianHead GaussianHead::create(ParamStore& store, const std::string& prefix, int in,
                                  int hidden, int gauss_dim, Rng& rng) {
    GaussianHead h;
    h.mlp = Mlp::create(store, prefix, in, hidden, 2 * gauss_dim, rng);
    h.gauss_dim = gauss_dim;
    return h;
}

GaussianParams GaussianHead::forward(std::span<const double> x, Cache* cache) const {
    std::vector<double> raw = mlp.forward(x, cache ? &cache->mlp : nullptr);
    GaussianParams g;
    g.mean.assign(raw.begin(), raw.begin() + gauss_dim);
    g.std.resize(gauss_dim);
    for (int d = 0; d < gauss_dim; ++d) g.std[d] = softplus(raw[gauss_dim + d]) + kSigmaFloor;
    if (cache) cache->s.assign(raw.begin() + gauss_dim, raw.end());
    return g;
}

std::vector<double> GaussianHead::backward(const Cache& cache, std::span<const double> d_mean,
                                           std::span<const double> d_std) const {
    std::vector<double> d_raw(2 * gauss_dim);
    for (int d = 0; d < gauss_dim; ++d) {
        d_raw[d] = d_mean[d];
        // d softplus = sigmoid
        d_raw[gauss_dim + d] = d_std[d] / (1.0 + std::exp(-cache.s[d]));
    }
    return mlp.backward(cache.mlp, d_raw);
}

}  // namespace vrseq
