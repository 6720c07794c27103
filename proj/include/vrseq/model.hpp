#pragma once

#include <cstdint>
#include <memory>

#include "vrseq/adversarial.hpp"
#include "vrseq/param_store.hpp"
#include "vrseq/vrnn.hpp"

namespace vrseq {

// The trainable system: VRNN plus both classifier heads, backed by one
// parameter store. Registration order is fixed so checkpoints round-trip by
// name. Move-only; the sub-models hold pointers into the store's entries,
// which stay valid across moves.
struct Model {
    VrnnConfig cfg;
    int num_classes = 0;
    int head_hidden = 32;
    ParamStore store;
    VrnnModel vrnn;
    ClassifierHead head_y, head_d;

    static std::unique_ptr<Model> create(const VrnnConfig& cfg, int num_classes,
                                         int head_hidden, std::uint64_t init_seed);
};

}  // namespace vrseq
