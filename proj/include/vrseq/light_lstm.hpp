#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vrseq/param_store.hpp"
#include "vrseq/rng.hpp"

namespace vrseq {

// Stacked LSTM whose M-dim output is compressed to R dims by a projection
// matrix before it is recycled into the gates and handed to the next layer.
// That projection is what cuts the per-step multiplications from 4(D+M)M
// down to 4(D+R)M + RM.
struct LightLstmConfig {
    int input_dim = 0;  // D, width of layer 1's input
    int cell_dim = 0;   // M
    int proj_dim = 0;   // R, R <= M
    int num_layers = 3;

    void validate() const;
};

// Per-step multiplication counts of the two cell variants.
std::int64_t mult_count_vanilla(std::int64_t input_dim, std::int64_t cell_dim);
std::int64_t mult_count_projected(std::int64_t input_dim, std::int64_t cell_dim,
                                  std::int64_t proj_dim);

// Non-owning views into a ParamStore. Gate order is i, f, o, g; no peepholes.
// Layer 1 consumes the external input, deeper layers consume the previous
// layer's projected output (width R).
struct LightLstmWeights {
    struct Layer {
        Tensor *w_ix, *w_fx, *w_ox, *w_gx;  // M x in
        Tensor *w_im, *w_fm, *w_om, *w_gm;  // M x R
        Tensor *b_i, *b_f, *b_o, *b_g;      // M
        Tensor *w_rh;                       // R x M
        Tensor *d_w_ix, *d_w_fx, *d_w_ox, *d_w_gx;
        Tensor *d_w_im, *d_w_fm, *d_w_om, *d_w_gm;
        Tensor *d_b_i, *d_b_f, *d_b_o, *d_b_g;
        Tensor *d_w_rh;
    };

    LightLstmConfig cfg;
    std::vector<Layer> layers;

    // Registers all weights under `prefix` and initialises them: forget-gate
    // bias 1.0, everything else uniform +-1/sqrt(fan_in).
    static LightLstmWeights create(ParamStore& store, const std::string& prefix,
                                   const LightLstmConfig& cfg, Rng& rng);
};

struct RecurrentState {
    struct LayerState {
        std::vector<double> c;  // M
        std::vector<double> r;  // R, projected output
    };
    std::vector<LayerState> layers;

    static RecurrentState zeros(const LightLstmConfig& cfg);
    const std::vector<double>& top_r() const { return layers.back().r; }
};

// Forward tape for one step, needed by the backward pass.
struct LstmStepCache {
    struct LayerCache {
        std::vector<double> input;   // what this layer consumed
        std::vector<double> i, f, o, g;
        std::vector<double> c, tanh_c, h;
    };
    std::vector<LayerCache> layers;
};

RecurrentState light_lstm_step(std::span<const double> x, const RecurrentState& prev,
                               const LightLstmWeights& w, LstmStepCache* cache = nullptr);

std::vector<RecurrentState> forward_sequence(const std::vector<std::vector<double>>& seq,
                                             const LightLstmWeights& w,
                                             std::vector<LstmStepCache>* caches = nullptr);

// Carried gradients between reverse steps (dc/dr per layer).
struct LstmBackwardCarry {
    std::vector<std::vector<double>> d_c, d_r;
    static LstmBackwardCarry zeros(const LightLstmConfig& cfg);
};

// One reverse step. ext_d_top_r is the external gradient on the top layer's
// projected output at this step; weight gradients accumulate into the store,
// the return value is the gradient w.r.t. this step's input.
std::vector<double> lstm_backward_step(const LstmStepCache& cache,
                                       const RecurrentState& prev_state,
                                       std::span<const double> ext_d_top_r,
                                       LstmBackwardCarry& carry, const LightLstmWeights& w);

// Full-sequence reverse pass; upstream[t] is the gradient on states[t].top_r().
// Returns per-step input gradients. States/caches must come from the matching
// forward_sequence call.
std::vector<std::vector<double>> bptt_backward(const std::vector<std::vector<double>>& seq,
                                               const std::vector<RecurrentState>& states,
                                               const std::vector<LstmStepCache>& caches,
                                               const std::vector<std::vector<double>>& upstream,
                                               const LightLstmWeights& w);

}  // namespace vrseq
