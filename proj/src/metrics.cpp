#include "vrseq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vrseq/tensor.hpp"

namespace vrseq {

void ScoreMatrix::validate() const {
    if (n_probe < 1 || n_gallery < 1)
        throw std::invalid_argument("ScoreMatrix: empty");
    if (static_cast<int>(scores.size()) != n_probe * n_gallery ||
        static_cast<int>(probe_labels.size()) != n_probe ||
        static_cast<int>(gallery_labels.size()) != n_gallery)
        throw std::invalid_argument("ScoreMatrix: inconsistent dimensions");
    if (!all_finite(scores)) throw std::invalid_argument("ScoreMatrix: non-finite score");
}

double similarity(const SequenceEmbedding& a, const SequenceEmbedding& b) {
    if (a.z.size() != b.z.size())
        throw std::invalid_argument("similarity: embedding dim mismatch");
    return dot(a.z, b.z);
}

ScoreMatrix score_matrix(const std::vector<SequenceEmbedding>& probes,
                         const std::vector<SequenceEmbedding>& gallery) {
    ScoreMatrix s;
    s.n_probe = static_cast<int>(probes.size());
    s.n_gallery = static_cast<int>(gallery.size());
    s.scores.resize(static_cast<size_t>(s.n_probe) * s.n_gallery);
    for (int p = 0; p < s.n_probe; ++p) {
        s.probe_labels.push_back(probes[p].label);
        for (int g = 0; g < s.n_gallery; ++g) s.at(p, g) = similarity(probes[p], gallery[g]);
    }
    for (const auto& e : gallery) s.gallery_labels.push_back(e.label);
    s.validate();
    return s;
}

namespace {

// tie-aware position of gallery entry g in probe p's ranking
int position_of(const ScoreMatrix& s, int p, int g) {
    const double score = s.at(p, g);
    int pos = 1;
    for (int j = 0; j < s.n_gallery; ++j) {
        if (j == g) continue;
        if (s.at(p, j) > score || (s.at(p, j) == score && j < g)) ++pos;
    }
    return pos;
}

}  // namespace

std::vector<int> rank_gallery(const ScoreMatrix& s) {
    s.validate();
    std::vector<int> ranks(s.n_probe);
    for (int p = 0; p < s.n_probe; ++p) {
        int best = 0;
        bool found = false;
        for (int g = 0; g < s.n_gallery; ++g) {
            if (s.gallery_labels[g] != s.probe_labels[p]) continue;
            const int pos = position_of(s, p, g);
            if (!found || pos < best) best = pos;
            found = true;
        }
        if (!found)
            throw std::invalid_argument("rank_gallery: probe label missing from gallery");
        ranks[p] = best;
    }
    return ranks;
}

double cmc(const std::vector<int>& ranks, int r) {
    if (r < 1) throw std::invalid_argument("cmc: rank must be >= 1");
    if (ranks.empty()) throw std::invalid_argument("cmc: no ranks");
    int hits = 0;
    for (int rank : ranks)
        if (rank <= r) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

CmcCurve cmc_curve(const std::vector<int>& ranks, int n_gallery) {
    CmcCurve curve;
    curve.values.reserve(n_gallery);
    for (int r = 1; r <= n_gallery; ++r) curve.values.push_back(cmc(ranks, r));
    return curve;
}

double mean_ap(const ScoreMatrix& s) {
    s.validate();
    double sum_ap = 0.0;
    for (int p = 0; p < s.n_probe; ++p) {
        std::vector<int> order(s.n_gallery);
        for (int g = 0; g < s.n_gallery; ++g) order[g] = g;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (s.at(p, a) != s.at(p, b)) return s.at(p, a) > s.at(p, b);
            return a < b;
        });
        int relevant_seen = 0, relevant_total = 0;
        double ap = 0.0;
        for (int g = 0; g < s.n_gallery; ++g)
            if (s.gallery_labels[g] == s.probe_labels[p]) ++relevant_total;
        if (relevant_total == 0)
            throw std::invalid_argument("mean_ap: probe label missing from gallery");
        for (int k = 0; k < s.n_gallery; ++k) {
            if (s.gallery_labels[order[k]] == s.probe_labels[p]) {
                ++relevant_seen;
                ap += static_cast<double>(relevant_seen) / static_cast<double>(k + 1);
            }
        }
        sum_ap += ap / relevant_total;
    }
    return sum_ap / s.n_probe;
}

ViewDivergence cross_view_kl(const std::vector<SequenceEmbedding>& probe,
                             const std::vector<SequenceEmbedding>& gallery) {
    if (probe.size() < 2 || gallery.size() < 2)
        throw std::invalid_argument("cross_view_kl: need at least 2 embeddings per view");

    auto fit = [](const std::vector<SequenceEmbedding>& set) {
        const size_t n = set.size();
        const size_t d = set[0].z.size();
        GaussianParams g;
        g.mean.assign(d, 0.0);
        g.std.assign(d, 0.0);
        for (const auto& e : set) {
            if (e.z.size() != d)
                throw std::invalid_argument("cross_view_kl: embedding dim mismatch");
            for (size_t i = 0; i < d; ++i) g.mean[i] += e.z[i];
        }
        for (size_t i = 0; i < d; ++i) g.mean[i] /= static_cast<double>(n);
        for (const auto& e : set)
            for (size_t i = 0; i < d; ++i) {
                const double r = e.z[i] - g.mean[i];
                g.std[i] += r * r;
            }
        for (size_t i = 0; i < d; ++i)
            g.std[i] = std::max(kSigmaFloor,
                                std::sqrt(g.std[i] / static_cast<double>(n - 1)));
        return g;
    };

    ViewDivergence out;
    out.probe_fit = fit(probe);
    out.gallery_fit = fit(gallery);
    out.kl = gaussian_kl_diag(out.probe_fit, out.gallery_fit);
    return out;
}

}  // namespace vrseq
