#include "vrseq/evaluate.hpp"

#include <algorithm>

namespace vrseq {

std::vector<SequenceEmbedding> embed_all(const Model& model,
                                         const std::vector<FrameSequence>& seqs,
                                         int truncate_len) {
    std::vector<SequenceEmbedding> out;
    out.reserve(seqs.size());
    Rng unused(0);
    for (const auto& s : seqs) {
        if (truncate_len > 0 && truncate_len < s.length()) {
            out.push_back(embed_sequence(s.truncated(truncate_len), model.vrnn,
                                         EmbedMode::mean, unused));
        } else {
            out.push_back(embed_sequence(s, model.vrnn, EmbedMode::mean, unused));
        }
    }
    return out;
}

EvalSummary evaluate_model(const Model& model, const CrossViewDataset& ds,
                           const std::vector<int>& ids, int truncate_probe,
                           int truncate_gallery) {
    std::vector<FrameSequence> probes, gallery;
    if (ids.empty()) {
        probes = ds.probe;
        gallery = ds.gallery;
    } else {
        for (int id : ids) {
            probes.push_back(ds.probe[id]);
            gallery.push_back(ds.gallery[id]);
        }
    }

    const auto emb_p = embed_all(model, probes, truncate_probe);
    const auto emb_g = embed_all(model, gallery, truncate_gallery);
    const ScoreMatrix scores = score_matrix(emb_p, emb_g);

    EvalSummary s;
    s.ranks = rank_gallery(scores);
    s.curve = cmc_curve(s.ranks, scores.n_gallery);
    auto at = [&](int r) { return cmc(s.ranks, std::min(r, scores.n_gallery)); };
    s.rank1 = at(1);
    s.rank5 = at(5);
    s.rank10 = at(10);
    s.rank20 = at(20);
    s.map = mean_ap(scores);
    s.view_kl = cross_view_kl(emb_p, emb_g).kl;
    return s;
}

}  // namespace vrseq
