#include "vrseq/light_lstm.hpp"

#include <cmath>
#include <stdexcept>

#include "vrseq/init.hpp"

namespace vrseq {

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

void LightLstmConfig::validate() const {
    if (input_dim < 1 || cell_dim < 1 || proj_dim < 1 || num_layers < 1)
        throw std::invalid_argument("LightLstmConfig: all dims must be >= 1");
    if (proj_dim > cell_dim)
        throw std::invalid_argument("LightLstmConfig: proj_dim must not exceed cell_dim");
}

std::int64_t mult_count_vanilla(std::int64_t input_dim, std::int64_t cell_dim) {
    if (input_dim < 1 || cell_dim < 1) throw std::invalid_argument("dims must be >= 1");
    return 4 * (input_dim + cell_dim) * cell_dim;
}

std::int64_t mult_count_projected(std::int64_t input_dim, std::int64_t cell_dim,
                                  std::int64_t proj_dim) {
    if (input_dim < 1 || cell_dim < 1 || proj_dim < 1 || proj_dim > cell_dim)
        throw std::invalid_argument("dims must be >= 1 with proj_dim <= cell_dim");
    return 4 * (input_dim + proj_dim) * cell_dim + proj_dim * cell_dim;
}

LightLstmWeights LightLstmWeights::create(ParamStore& store, const std::string& prefix,
                                          const LightLstmConfig& cfg, Rng& rng) {
    cfg.validate();
    LightLstmWeights w;
    w.cfg = cfg;
    const int m = cfg.cell_dim, r = cfg.proj_dim;
    for (int l = 0; l < cfg.num_layers; ++l) {
        const int in = l == 0 ? cfg.input_dim : r;
        const std::string base = prefix + "/layer" + std::to_string(l) + "/";
        Layer layer{};
        auto mk = [&](const char* name, std::vector<int> shape, int fan_in, Tensor** val,
                      Tensor** grad) {
            auto& e = store.create(base + name, std::move(shape));
            init_uniform_fan_in(e.value, fan_in, rng);
            *val = &e.value;
            *grad = &e.grad;
        };
        mk("W_ix", {m, in}, in, &layer.w_ix, &layer.d_w_ix);
        mk("W_fx", {m, in}, in, &layer.w_fx, &layer.d_w_fx);
        mk("W_ox", {m, in}, in, &layer.w_ox, &layer.d_w_ox);
        mk("W_gx", {m, in}, in, &layer.w_gx, &layer.d_w_gx);
        mk("W_im", {m, r}, r, &layer.w_im, &layer.d_w_im);
        mk("W_fm", {m, r}, r, &layer.w_fm, &layer.d_w_fm);
        mk("W_om", {m, r}, r, &layer.w_om, &layer.d_w_om);
        mk("W_gm", {m, r}, r, &layer.w_gm, &layer.d_w_gm);
        auto mkb = [&](const char* name, Tensor** val, Tensor** grad) {
            auto& e = store.create(base + name, {m});
            *val = &e.value;
            *grad = &e.grad;
        };
        mkb("b_i", &layer.b_i, &layer.d_b_i);
        mkb("b_f", &layer.b_f, &layer.d_b_f);
        mkb("b_o", &layer.b_o, &layer.d_b_o);
        mkb("b_g", &layer.b_g, &layer.d_b_g);
        layer.b_f->fill(1.0);
        mk("W_rh", {r, m}, m, &layer.w_rh, &layer.d_w_rh);
        w.layers.push_back(layer);
    }
    return w;
}

RecurrentState RecurrentState::zeros(const LightLstmConfig& cfg) {
    RecurrentState s;
    s.layers.resize(cfg.num_layers);
    for (auto& l : s.layers) {
        l.c.assign(cfg.cell_dim, 0.0);
        l.r.assign(cfg.proj_dim, 0.0);
    }
    return s;
}

RecurrentState light_lstm_step(std::span<const double> x, const RecurrentState& prev,
                               const LightLstmWeights& w, LstmStepCache* cache) {
    const auto& cfg = w.cfg;
    if (static_cast<int>(x.size()) != cfg.input_dim)
        throw std::invalid_argument("light_lstm_step: input dim mismatch");
    if (static_cast<int>(prev.layers.size()) != cfg.num_layers)
        throw std::invalid_argument("light_lstm_step: state layer count mismatch");
    const int m = cfg.cell_dim;

    RecurrentState next = RecurrentState::zeros(cfg);
    if (cache) cache->layers.resize(cfg.num_layers);

    std::vector<double> input(x.begin(), x.end());
    for (int l = 0; l < cfg.num_layers; ++l) {
        const auto& lw = w.layers[l];
        const auto& ps = prev.layers[l];
        if (static_cast<int>(ps.c.size()) != m ||
            static_cast<int>(ps.r.size()) != cfg.proj_dim)
            throw std::invalid_argument("light_lstm_step: state dim mismatch");

        std::vector<double> ai(lw.b_i->values()), af(lw.b_f->values()),
            ao(lw.b_o->values()), ag(lw.b_g->values());
        matvec_acc(*lw.w_ix, input, ai);
        matvec_acc(*lw.w_fx, input, af);
        matvec_acc(*lw.w_ox, input, ao);
        matvec_acc(*lw.w_gx, input, ag);
        matvec_acc(*lw.w_im, ps.r, ai);
        matvec_acc(*lw.w_fm, ps.r, af);
        matvec_acc(*lw.w_om, ps.r, ao);
        matvec_acc(*lw.w_gm, ps.r, ag);

        std::vector<double> i(m), f(m), o(m), g(m), c(m), tc(m), h(m);
        for (int k = 0; k < m; ++k) {
            i[k] = sigmoid(ai[k]);
            f[k] = sigmoid(af[k]);
            o[k] = sigmoid(ao[k]);
            g[k] = std::tanh(ag[k]);
            c[k] = f[k] * ps.c[k] + i[k] * g[k];
            tc[k] = std::tanh(c[k]);
            h[k] = o[k] * tc[k];
        }
        auto& ns = next.layers[l];
        ns.c = c;
        matvec(*lw.w_rh, h, ns.r);

        if (cache) {
            auto& lc = cache->layers[l];
            lc.input = input;
            lc.i = std::move(i);
            lc.f = std::move(f);
            lc.o = std::move(o);
            lc.g = std::move(g);
            lc.c = c;
            lc.tanh_c = std::move(tc);
            lc.h = std::move(h);
        }
        input = ns.r;  // next layer consumes the projected output
    }
    return next;
}

std::vector<RecurrentState> forward_sequence(const std::vector<std::vector<double>>& seq,
                                             const LightLstmWeights& w,
                                             std::vector<LstmStepCache>* caches) {
    if (seq.empty()) throw std::invalid_argument("forward_sequence: empty sequence");
    std::vector<RecurrentState> states;
    states.reserve(seq.size());
    if (caches) caches->resize(seq.size());
    RecurrentState state = RecurrentState::zeros(w.cfg);
    for (size_t t = 0; t < seq.size(); ++t) {
        state = light_lstm_step(seq[t], state, w, caches ? &(*caches)[t] : nullptr);
        states.push_back(state);
    }
    return states;
}

LstmBackwardCarry LstmBackwardCarry::zeros(const LightLstmConfig& cfg) {
    LstmBackwardCarry c;
    c.d_c.assign(cfg.num_layers, std::vector<double>(cfg.cell_dim, 0.0));
    c.d_r.assign(cfg.num_layers, std::vector<double>(cfg.proj_dim, 0.0));
    return c;
}

std::vector<double> lstm_backward_step(const LstmStepCache& cache,
                                       const RecurrentState& prev_state,
                                       std::span<const double> ext_d_top_r,
                                       LstmBackwardCarry& carry, const LightLstmWeights& w) {
    const auto& cfg = w.cfg;
    const int m = cfg.cell_dim, r = cfg.proj_dim;
    if (static_cast<int>(cache.layers.size()) != cfg.num_layers)
        throw std::invalid_argument("lstm_backward_step: cache/state mismatch");

    // gradient flowing into the layer below's projected output (same step)
    std::vector<double> d_from_above;
    std::vector<double> d_input;

    for (int l = cfg.num_layers - 1; l >= 0; --l) {
        const auto& lw = w.layers[l];
        const auto& lc = cache.layers[l];
        const auto& ps = prev_state.layers[l];

        // total gradient on this layer's r_t: recurrent carry + next layer's
        // input gradient + (top layer only) the external consumer
        std::vector<double> d_r = carry.d_r[l];
        if (l == cfg.num_layers - 1) {
            if (static_cast<int>(ext_d_top_r.size()) != r)
                throw std::invalid_argument("lstm_backward_step: upstream dim mismatch");
            for (int k = 0; k < r; ++k) d_r[k] += ext_d_top_r[k];
        } else {
            for (int k = 0; k < r; ++k) d_r[k] += d_from_above[k];
        }

        // r = W_rh h
        std::vector<double> d_h(m, 0.0);
        matvec_t_acc(*lw.w_rh, d_r, d_h);
        outer_acc(*lw.d_w_rh, d_r, lc.h);

        std::vector<double> d_ai(m), d_af(m), d_ao(m), d_ag(m), d_c_prev(m);
        for (int k = 0; k < m; ++k) {
            const double d_o = d_h[k] * lc.tanh_c[k];
            const double d_c =
                carry.d_c[l][k] + d_h[k] * lc.o[k] * (1.0 - lc.tanh_c[k] * lc.tanh_c[k]);
            const double d_i = d_c * lc.g[k];
            const double d_f = d_c * ps.c[k];
            const double d_g = d_c * lc.i[k];
            d_c_prev[k] = d_c * lc.f[k];
            d_ai[k] = d_i * lc.i[k] * (1.0 - lc.i[k]);
            d_af[k] = d_f * lc.f[k] * (1.0 - lc.f[k]);
            d_ao[k] = d_o * lc.o[k] * (1.0 - lc.o[k]);
            d_ag[k] = d_g * (1.0 - lc.g[k] * lc.g[k]);
        }

        outer_acc(*lw.d_w_ix, d_ai, lc.input);
        outer_acc(*lw.d_w_fx, d_af, lc.input);
        outer_acc(*lw.d_w_ox, d_ao, lc.input);
        outer_acc(*lw.d_w_gx, d_ag, lc.input);
        outer_acc(*lw.d_w_im, d_ai, ps.r);
        outer_acc(*lw.d_w_fm, d_af, ps.r);
        outer_acc(*lw.d_w_om, d_ao, ps.r);
        outer_acc(*lw.d_w_gm, d_ag, ps.r);
        add_scaled(lw.d_b_i->values(), d_ai, 1.0);
        add_scaled(lw.d_b_f->values(), d_af, 1.0);
        add_scaled(lw.d_b_o->values(), d_ao, 1.0);
        add_scaled(lw.d_b_g->values(), d_ag, 1.0);

        std::vector<double> d_in(lc.input.size(), 0.0);
        matvec_t_acc(*lw.w_ix, d_ai, d_in);
        matvec_t_acc(*lw.w_fx, d_af, d_in);
        matvec_t_acc(*lw.w_ox, d_ao, d_in);
        matvec_t_acc(*lw.w_gx, d_ag, d_in);

        std::vector<double> d_r_prev(r, 0.0);
        matvec_t_acc(*lw.w_im, d_ai, d_r_prev);
        matvec_t_acc(*lw.w_fm, d_af, d_r_prev);
        matvec_t_acc(*lw.w_om, d_ao, d_r_prev);
        matvec_t_acc(*lw.w_gm, d_ag, d_r_prev);

        carry.d_c[l] = std::move(d_c_prev);
        carry.d_r[l] = std::move(d_r_prev);
        if (l == 0)
            d_input = std::move(d_in);
        else
            d_from_above = std::move(d_in);
    }
    return d_input;
}

std::vector<std::vector<double>> bptt_backward(const std::vector<std::vector<double>>& seq,
                                               const std::vector<RecurrentState>& states,
                                               const std::vector<LstmStepCache>& caches,
                                               const std::vector<std::vector<double>>& upstream,
                                               const LightLstmWeights& w) {
    const size_t t_len = seq.size();
    if (states.size() != t_len || caches.size() != t_len || upstream.size() != t_len)
        throw std::invalid_argument("bptt_backward: retained pass does not match inputs");

    std::vector<std::vector<double>> d_inputs(t_len);
    LstmBackwardCarry carry = LstmBackwardCarry::zeros(w.cfg);
    const RecurrentState zero_state = RecurrentState::zeros(w.cfg);
    for (size_t t = t_len; t-- > 0;) {
        const RecurrentState& prev = t == 0 ? zero_state : states[t - 1];
        d_inputs[t] = lstm_backward_step(caches[t], prev, upstream[t], carry, w);
    }
    return d_inputs;
}

}  // namespace vrseq
