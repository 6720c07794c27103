#include "vrseq/model.hpp"

namespace vrseq {

std::unique_ptr<Model> Model::create(const VrnnConfig& cfg, int num_classes, int head_hidden,
                                     std::uint64_t init_seed) {
    auto m = std::make_unique<Model>();
    m->cfg = cfg;
    m->num_classes = num_classes;
    m->head_hidden = head_hidden;
    Rng rng(Rng::mix(init_seed, 1));
    m->vrnn = VrnnModel::create(m->store, cfg, rng);
    m->head_y = ClassifierHead::create(m->store, "head_y", cfg.latent_dim, head_hidden,
                                       num_classes, rng);
    m->head_d = ClassifierHead::create(m->store, "head_d", cfg.latent_dim, head_hidden,
                                       num_classes, rng);
    return m;
}

}  // namespace vrseq
