#include "vrseq/dataset.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vrseq/binio.hpp"
#include "vrseq/rng.hpp"

namespace vrseq {

namespace {

constexpr char kMagic[4] = {'V', 'A', 'D', 'S'};
constexpr std::uint8_t kVersion = 1;

// Stream indices for deriving independent per-entity generators from the
// dataset seed. Identity streams start at kIdentityStream + id; sequences use
// one stream per (identity, view).
constexpr std::uint64_t kProbeViewStream = 1;
constexpr std::uint64_t kGalleryViewStream = 2;
constexpr std::uint64_t kIdentityStream = 1000;
constexpr std::uint64_t kSequenceStream = 1u << 20;

double spectral_norm_estimate(const Tensor& m, Rng& rng) {
    const int d = m.rows();
    std::vector<double> v(d), w(d);
    for (double& x : v) x = rng.normal();
    for (int it = 0; it < 30; ++it) {
        matvec(m, v, w);
        double norm = std::sqrt(dot(w, w));
        if (norm == 0.0) return 0.0;
        for (int i = 0; i < d; ++i) v[i] = w[i] / norm;
    }
    matvec(m, v, w);
    return std::sqrt(dot(w, w));
}

ViewTransform make_view(const DatasetConfig& cfg, std::uint64_t stream) {
    Rng rng(Rng::mix(cfg.seed, stream));
    const int d = cfg.frame_dim;
    Tensor delta({d, d});
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < delta.size(); ++i) delta[i] = cfg.view_gap * scale * rng.normal();

    // keep A = I + delta comfortably invertible: cond(A) <= 1.9/0.1 = 19
    Rng power_rng(Rng::mix(cfg.seed, stream + 100));
    const double norm = spectral_norm_estimate(delta, power_rng);
    if (norm > 0.9)
        for (int i = 0; i < delta.size(); ++i) delta[i] *= 0.9 / norm;

    ViewTransform vt;
    vt.a = std::move(delta);
    for (int i = 0; i < d; ++i) vt.a.at(i, i) += 1.0;
    vt.b.resize(d);
    for (double& x : vt.b) x = cfg.view_gap * rng.normal();
    vt.noise_std = cfg.noise_std;
    return vt;
}

FrameSequence make_sequence(const DatasetConfig& cfg, const IdentitySpec& ident,
                            const ViewTransform& vt, ViewTag view, std::uint64_t stream) {
    Rng rng(Rng::mix(cfg.seed, stream));
    const int d = cfg.frame_dim;
    const int t_len =
        cfg.len_min + static_cast<int>(rng.uniform_int(
                          static_cast<std::uint64_t>(cfg.len_max - cfg.len_min + 1)));

    FrameSequence seq;
    seq.label = ident.id;
    seq.view = view;
    seq.frames.resize(t_len);
    std::vector<double> u(d), frame(d);
    for (int t = 0; t < t_len; ++t) {
        double motion = 0.0;
        for (size_t k = 0; k < ident.freq.size(); ++k)
            motion += ident.amp[k] * std::sin(ident.freq[k] * t + ident.phase[k]);
        for (int i = 0; i < d; ++i) u[i] = ident.base[i] + motion;
        matvec(vt.a, u, frame);
        for (int i = 0; i < d; ++i)
            frame[i] += vt.b[i] + vt.noise_std * rng.normal();
        seq.frames[t] = frame;
    }
    return seq;
}

}  // namespace

void CrossViewDataset::validate() const {
    const int l = num_identities();
    if (l < 2) throw std::invalid_argument("dataset: need at least 2 identities");
    if (static_cast<int>(probe.size()) != l || static_cast<int>(gallery.size()) != l)
        throw std::invalid_argument("dataset: one probe and one gallery sequence per identity");
    for (int i = 0; i < l; ++i) {
        probe[i].validate();
        gallery[i].validate();
        if (probe[i].label != i || gallery[i].label != i)
            throw std::invalid_argument("dataset: labels inconsistent across views");
    }
}

CrossViewDataset generate_dataset(const DatasetConfig& cfg) {
    if (cfg.num_identities < 2)
        throw std::invalid_argument("generate_dataset: need at least 2 identities");
    if (cfg.len_min < 1 || cfg.len_max < cfg.len_min)
        throw std::invalid_argument("generate_dataset: invalid length range");
    if (cfg.frame_dim < 1) throw std::invalid_argument("generate_dataset: invalid frame dim");
    if (cfg.motion_components < 0 || cfg.view_gap < 0.0 || cfg.noise_std < 0.0)
        throw std::invalid_argument("generate_dataset: invalid parameters");

    CrossViewDataset ds;
    ds.cfg = cfg;
    ds.probe_view = make_view(cfg, kProbeViewStream);
    ds.gallery_view = make_view(cfg, kGalleryViewStream);

    for (int i = 0; i < cfg.num_identities; ++i) {
        Rng rng(Rng::mix(cfg.seed, kIdentityStream + static_cast<std::uint64_t>(i)));
        IdentitySpec ident;
        ident.id = i;
        ident.base.resize(cfg.frame_dim);
        for (double& x : ident.base) x = rng.normal();
        for (int k = 0; k < cfg.motion_components; ++k) {
            ident.freq.push_back(rng.uniform(0.2, 1.5));
            ident.phase.push_back(rng.uniform(0.0, 2.0 * 3.14159265358979323846));
            // keep the shared-direction motion subordinate to the appearance
            // vector, otherwise reconstruction spends its capacity there
            ident.amp.push_back(rng.uniform(0.1, 0.35));
        }
        ds.identities.push_back(std::move(ident));
    }

    for (int i = 0; i < cfg.num_identities; ++i) {
        const std::uint64_t base = kSequenceStream + 2 * static_cast<std::uint64_t>(i);
        ds.probe.push_back(
            make_sequence(cfg, ds.identities[i], ds.probe_view, ViewTag::probe, base));
        ds.gallery.push_back(make_sequence(cfg, ds.identities[i], ds.gallery_view,
                                           ViewTag::gallery, base + 1));
    }
    ds.validate();
    return ds;
}

TrainValSplit split_train_val(const CrossViewDataset& ds, double fraction,
                              std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split_train_val: fraction must be in (0,1)");
    const int l = ds.num_identities();
    std::vector<int> ids(l);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(Rng::mix(seed, 777));
    for (int i = l - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
        std::swap(ids[i], ids[j]);
    }
    const int n_train = static_cast<int>(std::ceil(fraction * l));
    TrainValSplit split;
    split.train_ids.assign(ids.begin(), ids.begin() + n_train);
    split.val_ids.assign(ids.begin() + n_train, ids.end());
    return split;
}

void save_dataset(const CrossViewDataset& ds, const std::string& path) {
    BinWriter w(kMagic, kVersion);
    const auto& cfg = ds.cfg;
    w.u32(static_cast<std::uint32_t>(ds.num_identities()));
    w.u32(static_cast<std::uint32_t>(cfg.frame_dim));
    w.u32(static_cast<std::uint32_t>(cfg.motion_components));
    w.u32(static_cast<std::uint32_t>(cfg.len_min));
    w.u32(static_cast<std::uint32_t>(cfg.len_max));
    w.u64(cfg.seed);
    w.f64(cfg.view_gap);
    w.f64(cfg.noise_std);

    auto put_view = [&](const ViewTransform& vt) {
        w.f64_span(vt.a.values());
        w.f64_span(vt.b);
        w.f64(vt.noise_std);
    };
    put_view(ds.probe_view);
    put_view(ds.gallery_view);

    for (const auto& ident : ds.identities) {
        w.u32(static_cast<std::uint32_t>(ident.id));
        w.f64_span(ident.base);
        w.f64_span(ident.freq);
        w.f64_span(ident.phase);
        w.f64_span(ident.amp);
    }

    auto put_seq = [&](const FrameSequence& s) {
        w.u32(static_cast<std::uint32_t>(s.label));
        w.u8(s.view == ViewTag::probe ? 0 : 1);
        w.u32(static_cast<std::uint32_t>(s.length()));
        for (const auto& f : s.frames) w.f64_span(f);
    };
    for (const auto& s : ds.probe) put_seq(s);
    for (const auto& s : ds.gallery) put_seq(s);

    w.write_file(path);
}

CrossViewDataset load_dataset(const std::string& path) {
    BinReader r = BinReader::read_file(path, kMagic, kVersion);
    CrossViewDataset ds;
    auto& cfg = ds.cfg;
    const int l = static_cast<int>(r.u32());
    cfg.num_identities = l;
    cfg.frame_dim = static_cast<int>(r.u32());
    cfg.motion_components = static_cast<int>(r.u32());
    cfg.len_min = static_cast<int>(r.u32());
    cfg.len_max = static_cast<int>(r.u32());
    cfg.seed = r.u64();
    cfg.view_gap = r.f64();
    cfg.noise_std = r.f64();

    const int d = cfg.frame_dim;
    auto get_view = [&]() {
        ViewTransform vt;
        vt.a = Tensor({d, d});
        r.f64_span(vt.a.values());
        vt.b.resize(d);
        r.f64_span(vt.b);
        vt.noise_std = r.f64();
        return vt;
    };
    ds.probe_view = get_view();
    ds.gallery_view = get_view();

    for (int i = 0; i < l; ++i) {
        IdentitySpec ident;
        ident.id = static_cast<int>(r.u32());
        ident.base.resize(d);
        r.f64_span(ident.base);
        ident.freq.resize(cfg.motion_components);
        ident.phase.resize(cfg.motion_components);
        ident.amp.resize(cfg.motion_components);
        r.f64_span(ident.freq);
        r.f64_span(ident.phase);
        r.f64_span(ident.amp);
        ds.identities.push_back(std::move(ident));
    }

    auto get_seq = [&]() {
        FrameSequence s;
        s.label = static_cast<int>(r.u32());
        s.view = r.u8() == 0 ? ViewTag::probe : ViewTag::gallery;
        const int t_len = static_cast<int>(r.u32());
        s.frames.resize(t_len);
        for (auto& f : s.frames) {
            f.resize(d);
            r.f64_span(f);
        }
        return s;
    };
    for (int i = 0; i < l; ++i) ds.probe.push_back(get_seq());
    for (int i = 0; i < l; ++i) ds.gallery.push_back(get_seq());
    ds.validate();
    return ds;
}

bool datasets_equal(const CrossViewDataset& a, const CrossViewDataset& b) {
    if (a.num_identities() != b.num_identities()) return false;
    if (a.cfg.seed != b.cfg.seed || a.cfg.frame_dim != b.cfg.frame_dim) return false;
    if (a.probe_view.a.values() != b.probe_view.a.values() ||
        a.probe_view.b != b.probe_view.b || a.probe_view.noise_std != b.probe_view.noise_std)
        return false;
    if (a.gallery_view.a.values() != b.gallery_view.a.values() ||
        a.gallery_view.b != b.gallery_view.b ||
        a.gallery_view.noise_std != b.gallery_view.noise_std)
        return false;
    for (int i = 0; i < a.num_identities(); ++i) {
        if (a.identities[i].base != b.identities[i].base ||
            a.identities[i].freq != b.identities[i].freq ||
            a.identities[i].phase != b.identities[i].phase ||
            a.identities[i].amp != b.identities[i].amp)
            return false;
        if (a.probe[i].frames != b.probe[i].frames ||
            a.gallery[i].frames != b.gallery[i].frames)
            return false;
    }
    return true;
}

}  // namespace vrseq
