#pragma once

#include <vector>

#include "vrseq/dataset.hpp"
#include "vrseq/metrics.hpp"
#include "vrseq/model.hpp"

namespace vrseq {

// Deterministic posterior-mean embeddings for a set of sequences, optionally
// truncated to a prefix length (0 = full length).
std::vector<SequenceEmbedding> embed_all(const Model& model,
                                         const std::vector<FrameSequence>& seqs,
                                         int truncate_len = 0);

struct EvalSummary {
    double rank1 = 0, rank5 = 0, rank10 = 0, rank20 = 0;
    double map = 0;
    double view_kl = 0;
    CmcCurve curve;
    std::vector<int> ranks;
};

// Probe-vs-gallery retrieval over the identities listed in `ids` (empty =
// all). Ranks, CMC points, mAP and the fitted cross-view divergence all come
// from the same embedding pass.
EvalSummary evaluate_model(const Model& model, const CrossViewDataset& ds,
                           const std::vector<int>& ids = {}, int truncate_probe = 0,
                           int truncate_gallery = 0);

}  // namespace vrseq
