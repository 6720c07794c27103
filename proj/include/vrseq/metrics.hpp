#pragma once

#include <vector>

#include "vrseq/gaussian.hpp"
#include "vrseq/sequence.hpp"

namespace vrseq {

// Probe x gallery similarity scores with the label vectors needed to judge
// correctness of a match.
struct ScoreMatrix {
    int n_probe = 0, n_gallery = 0;
    std::vector<double> scores;  // row-major
    std::vector<int> probe_labels, gallery_labels;

    double at(int p, int g) const { return scores[static_cast<size_t>(p) * n_gallery + g]; }
    double& at(int p, int g) { return scores[static_cast<size_t>(p) * n_gallery + g]; }
    void validate() const;
};

// Inner product of the two embeddings.
double similarity(const SequenceEmbedding& a, const SequenceEmbedding& b);

ScoreMatrix score_matrix(const std::vector<SequenceEmbedding>& probes,
                         const std::vector<SequenceEmbedding>& gallery);

// Per-probe rank of the correct match: 1 + the number of gallery entries
// strictly above it, ties resolved in favour of the lower gallery index.
// When several gallery entries carry the probe's label the best-placed one
// counts. Errors if a probe's label is absent from the gallery.
std::vector<int> rank_gallery(const ScoreMatrix& scores);

// Fraction of probes with rank <= R.
double cmc(const std::vector<int>& ranks, int r);

struct CmcCurve {
    std::vector<double> values;  // ranks 1..n_gallery
};
CmcCurve cmc_curve(const std::vector<int>& ranks, int n_gallery);

// Mean average precision under descending-score order with the same tie rule.
double mean_ap(const ScoreMatrix& scores);

struct ViewDivergence {
    double kl = 0.0;
    GaussianParams probe_fit, gallery_fit;
};

// Fits a diagonal Gaussian to each view's embedding cloud (sample mean,
// sample std with n-1 denominator, floored) and returns KL(probe || gallery).
ViewDivergence cross_view_kl(const std::vector<SequenceEmbedding>& probe,
                             const std::vector<SequenceEmbedding>& gallery);

}  // namespace vrseq
