#include "vrseq/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vrseq {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2*pi)/2

void require_same_dim(int a, int b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}
}  // namespace

double softplus(double x) {
    // log1p fold keeps large |x| exact and avoids overflow
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

GaussianParams::GaussianParams(std::vector<double> m, std::vector<double> s)
    : mean(std::move(m)), std(std::move(s)) {
    validate();
}

void GaussianParams::validate() const {
    if (mean.size() != std.size())
        throw std::invalid_argument("GaussianParams: mean/std length mismatch");
    for (double s : std)
        if (!(s >= kSigmaFloor))
            throw std::invalid_argument("GaussianParams: std below floor");
}

double gaussian_kl_diag(const GaussianParams& q, const GaussianParams& p) {
    require_same_dim(q.dim(), p.dim(), "gaussian_kl_diag");
    q.validate();
    p.validate();
    double kl = 0.0;
    for (int d = 0; d < q.dim(); ++d) {
        const double sq = q.std[d], sp = p.std[d];
        const double dm = q.mean[d] - p.mean[d];
        kl += std::log(sp / sq) + (sq * sq + dm * dm) / (2.0 * sp * sp) - 0.5;
    }
    return kl;
}

void gaussian_kl_diag_backward(const GaussianParams& q, const GaussianParams& p, double w,
                               std::span<double> d_q_mean, std::span<double> d_q_std,
                               std::span<double> d_p_mean, std::span<double> d_p_std) {
    require_same_dim(q.dim(), p.dim(), "gaussian_kl_diag_backward");
    for (int d = 0; d < q.dim(); ++d) {
        const double sq = q.std[d], sp = p.std[d];
        const double dm = q.mean[d] - p.mean[d];
        const double inv_sp2 = 1.0 / (sp * sp);
        d_q_mean[d] += w * dm * inv_sp2;
        d_p_mean[d] += -w * dm * inv_sp2;
        d_q_std[d] += w * (-1.0 / sq + sq * inv_sp2);
        d_p_std[d] += w * (1.0 / sp - (sq * sq + dm * dm) / (sp * sp * sp));
    }
}

double gaussian_nll(std::span<const double> x, const GaussianParams& g) {
    require_same_dim(static_cast<int>(x.size()), g.dim(), "gaussian_nll");
    double nll = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
        const double s = g.std[d];
        const double r = x[d] - g.mean[d];
        nll += kHalfLog2Pi + std::log(s) + r * r / (2.0 * s * s);
    }
    return nll;
}

void gaussian_nll_backward(std::span<const double> x, const GaussianParams& g, double w,
                           std::span<double> d_mean, std::span<double> d_std) {
    require_same_dim(static_cast<int>(x.size()), g.dim(), "gaussian_nll_backward");
    for (int d = 0; d < g.dim(); ++d) {
        const double s = g.std[d];
        const double r = x[d] - g.mean[d];
        d_mean[d] += w * (-r / (s * s));
        d_std[d] += w * (1.0 / s - r * r / (s * s * s));
    }
}

std::vector<double> reparameterize(const GaussianParams& g, Rng& rng,
                                   std::vector<double>* eps_out) {
    g.validate();
    std::vector<double> z(g.dim());
    if (eps_out) eps_out->resize(g.dim());
    for (int d = 0; d < g.dim(); ++d) {
        const double e = rng.normal();
        if (eps_out) (*eps_out)[d] = e;
        z[d] = g.mean[d] + g.std[d] * e;
    }
    return z;
}

}  // namespace vrseq
