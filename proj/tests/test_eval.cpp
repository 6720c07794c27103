#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vrseq/metrics.hpp"
#include "vrseq/rng.hpp"

using namespace vrseq;

namespace {

SequenceEmbedding emb(std::vector<double> z, int label, ViewTag view = ViewTag::probe) {
    SequenceEmbedding e;
    e.z = std::move(z);
    e.label = label;
    e.view = view;
    return e;
}

// Brute-force ranking oracle: materialise the full ordered list per probe by
// repeated extraction of the best remaining entry (score desc, index asc),
// then scan it.
std::vector<int> oracle_order(const ScoreMatrix& s, int p) {
    std::vector<int> remaining(s.n_gallery), order;
    for (int g = 0; g < s.n_gallery; ++g) remaining[g] = g;
    while (!remaining.empty()) {
        size_t best = 0;
        for (size_t i = 1; i < remaining.size(); ++i) {
            const double a = s.at(p, remaining[i]), b = s.at(p, remaining[best]);
            if (a > b || (a == b && remaining[i] < remaining[best])) best = i;
        }
        order.push_back(remaining[best]);
        remaining.erase(remaining.begin() + best);
    }
    return order;
}

std::vector<int> oracle_ranks(const ScoreMatrix& s) {
    std::vector<int> ranks;
    for (int p = 0; p < s.n_probe; ++p) {
        const auto order = oracle_order(s, p);
        for (int k = 0; k < s.n_gallery; ++k)
            if (s.gallery_labels[order[k]] == s.probe_labels[p]) {
                ranks.push_back(k + 1);
                break;
            }
    }
    return ranks;
}

double oracle_cmc(const std::vector<int>& ranks, int r) {
    int hits = 0;
    for (int rank : ranks) hits += rank <= r ? 1 : 0;
    return static_cast<double>(hits) / ranks.size();
}

double oracle_map(const ScoreMatrix& s) {
    double total = 0.0;
    for (int p = 0; p < s.n_probe; ++p) {
        const auto order = oracle_order(s, p);
        int seen = 0, relevant = 0;
        double ap = 0.0;
        for (int k = 0; k < s.n_gallery; ++k)
            if (s.gallery_labels[order[k]] == s.probe_labels[p]) {
                ++seen;
                ap += static_cast<double>(seen) / (k + 1);
            }
        for (int g = 0; g < s.n_gallery; ++g)
            if (s.gallery_labels[g] == s.probe_labels[p]) ++relevant;
        total += ap / relevant;
    }
    return total / s.n_probe;
}

ScoreMatrix random_matrix(Rng& rng, int max_p = 6, int max_g = 8) {
    ScoreMatrix s;
    s.n_probe = 1 + static_cast<int>(rng.uniform_int(max_p));
    s.n_gallery = 2 + static_cast<int>(rng.uniform_int(max_g - 1));
    const int n_labels = 1 + static_cast<int>(rng.uniform_int(s.n_gallery));
    // quantised scores force plenty of ties
    s.scores.resize(static_cast<size_t>(s.n_probe) * s.n_gallery);
    for (double& v : s.scores) v = 0.5 * static_cast<double>(rng.uniform_int(5));
    for (int g = 0; g < s.n_gallery; ++g)
        s.gallery_labels.push_back(static_cast<int>(rng.uniform_int(n_labels)));
    for (int p = 0; p < s.n_probe; ++p) {
        // probe labels drawn from the gallery so a match always exists
        const int pick = static_cast<int>(rng.uniform_int(s.n_gallery));
        s.probe_labels.push_back(s.gallery_labels[pick]);
    }
    return s;
}

}  // namespace

TEST_CASE("similarity is the plain inner product") {
    CHECK(similarity(emb({1, 0, 0}, 0), emb({1, 0, 0}, 0)) == 1.0);
    CHECK(similarity(emb({1, 0}, 0), emb({0, 1}, 0)) == 0.0);

    Rng rng(3);
    std::vector<double> a(16), b(16);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal();
    double expected = 0.0;
    for (int i = 0; i < 16; ++i) expected += a[i] * b[i];
    CHECK(similarity(emb(a, 0), emb(b, 1)) == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS(similarity(emb({1, 2}, 0), emb({1, 2, 3}, 0)));
}

TEST_CASE("rank_gallery basics and the documented tie rule") {
    ScoreMatrix s;
    s.n_probe = 1;
    s.n_gallery = 4;
    s.probe_labels = {2};
    s.gallery_labels = {0, 1, 2, 3};

    s.scores = {0.1, 0.2, 0.9, 0.3};  // unique maximum on the match
    CHECK(rank_gallery(s) == std::vector<int>{1});

    s.scores = {0.5, 0.5, 0.5, 0.5};  // all ties: index order decides
    CHECK(rank_gallery(s) == std::vector<int>{3});
    s.probe_labels = {0};
    CHECK(rank_gallery(s) == std::vector<int>{1});

    s.probe_labels = {9};  // no match anywhere
    CHECK_THROWS(rank_gallery(s));
}

TEST_CASE("cmc point values") {
    CHECK(cmc({3}, 1) == 0.0);
    CHECK(cmc({3}, 3) == 1.0);
    CHECK(cmc({3}, 10) == 1.0);
    CHECK(cmc({1, 1, 1}, 1) == 1.0);
    CHECK_THROWS(cmc({1}, 0));
}

TEST_CASE("mean average precision closed cases") {
    ScoreMatrix s;
    s.n_probe = 1;
    s.n_gallery = 4;
    s.gallery_labels = {1, 0, 0, 0};
    s.probe_labels = {1};
    s.scores = {0.2, 0.9, 0.8, 0.1};  // single relevant at rank 3
    CHECK(mean_ap(s) == doctest::Approx(1.0 / 3.0));

    s.gallery_labels = {1, 1, 0, 0};
    s.scores = {0.9, 0.8, 0.5, 0.1};  // both relevant on top
    CHECK(mean_ap(s) == doctest::Approx(1.0));
}

TEST_CASE("ranking metrics match brute force on a thousand tied matrices") {
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const ScoreMatrix s = random_matrix(rng);
        const auto ranks = rank_gallery(s);
        const auto expect = oracle_ranks(s);
        REQUIRE(ranks == expect);
        for (int r = 1; r <= s.n_gallery; ++r)
            REQUIRE(cmc(ranks, r) == oracle_cmc(expect, r));
        REQUIRE(mean_ap(s) == doctest::Approx(oracle_map(s)).epsilon(1e-12));
    }
}

TEST_CASE("cmc curves are monotone and end at one") {
    Rng rng(78);
    for (int trial = 0; trial < 100; ++trial) {
        const ScoreMatrix s = random_matrix(rng);
        const auto curve = cmc_curve(rank_gallery(s), s.n_gallery);
        for (size_t i = 1; i < curve.values.size(); ++i)
            CHECK(curve.values[i] >= curve.values[i - 1]);
        CHECK(curve.values.back() == 1.0);
    }
}

TEST_CASE("positive rescaling of embeddings cannot change the ranking") {
    Rng rng(79);
    std::vector<SequenceEmbedding> probes, gallery;
    for (int i = 0; i < 5; ++i) {
        std::vector<double> zp(4), zg(4);
        for (double& v : zp) v = rng.normal();
        for (double& v : zg) v = rng.normal();
        probes.push_back(emb(zp, i));
        gallery.push_back(emb(zg, i, ViewTag::gallery));
    }
    const auto base = rank_gallery(score_matrix(probes, gallery));
    for (double c : {0.1, 3.0, 42.0}) {
        auto sp = probes, sg = gallery;
        for (auto& e : sp)
            for (double& v : e.z) v *= c;
        for (auto& e : sg)
            for (double& v : e.z) v *= c;
        CHECK(rank_gallery(score_matrix(sp, sg)) == base);
    }
}

TEST_CASE("cross-view divergence of identical clouds is zero") {
    std::vector<SequenceEmbedding> a = {emb({0.0, 1.0}, 0), emb({2.0, -1.0}, 1),
                                        emb({1.0, 0.5}, 2)};
    const auto d = cross_view_kl(a, a);
    CHECK(d.kl == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("cross-view divergence reproduces the closed-form shift case") {
    // sample mean 1, sample std 1 vs sample mean 0, sample std 1
    std::vector<SequenceEmbedding> probe = {emb({0.0}, 0), emb({1.0}, 1), emb({2.0}, 2)};
    std::vector<SequenceEmbedding> gallery = {emb({-1.0}, 0), emb({0.0}, 1), emb({1.0}, 2)};
    const auto d = cross_view_kl(probe, gallery);
    CHECK(d.probe_fit.mean[0] == doctest::Approx(1.0));
    CHECK(d.probe_fit.std[0] == doctest::Approx(1.0));
    CHECK(d.kl == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<SequenceEmbedding> single = {emb({0.0}, 0)};
    CHECK_THROWS(cross_view_kl(single, gallery));
}

TEST_CASE("cross-view divergence ignores the ordering of each cloud") {
    Rng rng(80);
    std::vector<SequenceEmbedding> probe, gallery;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> zp(3), zg(3);
        for (double& v : zp) v = rng.normal();
        for (double& v : zg) v = rng.normal() + 0.5;
        probe.push_back(emb(zp, i));
        gallery.push_back(emb(zg, i, ViewTag::gallery));
    }
    const double base = cross_view_kl(probe, gallery).kl;
    std::reverse(probe.begin(), probe.end());
    std::reverse(gallery.begin(), gallery.end());
    CHECK(cross_view_kl(probe, gallery).kl == doctest::Approx(base).epsilon(1e-12));
}
