#pragma once

#include <span>
#include <vector>

#include "vrseq/rng.hpp"

namespace vrseq {

// Lower bound on every diagonal standard deviation. Network outputs go
// through softplus and then get this floor added, so KL and likelihood
// terms can never blow up on a collapsed sigma.
inline constexpr double kSigmaFloor = 1e-4;

double softplus(double x);

// Diagonal Gaussian: mean and per-coordinate std (std >= kSigmaFloor).
struct GaussianParams {
    std::vector<double> mean;
    std::vector<double> std;

    GaussianParams() = default;
    GaussianParams(std::vector<double> m, std::vector<double> s);

    int dim() const { return static_cast<int>(mean.size()); }
    void validate() const;
};

// KL(q || p) for diagonal Gaussians, closed form.
double gaussian_kl_diag(const GaussianParams& q, const GaussianParams& p);

// Accumulates w * d KL / d{q,p} into the given buffers.
void gaussian_kl_diag_backward(const GaussianParams& q, const GaussianParams& p, double w,
                               std::span<double> d_q_mean, std::span<double> d_q_std,
                               std::span<double> d_p_mean, std::span<double> d_p_std);

// Negative log density of x under the diagonal Gaussian g.
double gaussian_nll(std::span<const double> x, const GaussianParams& g);

void gaussian_nll_backward(std::span<const double> x, const GaussianParams& g, double w,
                           std::span<double> d_mean, std::span<double> d_std);

// z = mean + std * eps, eps ~ N(0, I) drawn from rng. When eps_out is given
// the noise is stored for the backward pass (dz/dmean = I, dz/dstd = diag(eps)).
std::vector<double> reparameterize(const GaussianParams& g, Rng& rng,
                                   std::vector<double>* eps_out = nullptr);

}  // namespace vrseq
