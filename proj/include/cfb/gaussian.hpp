#ifndef CFB_GAUSSIAN_HPP
#define CFB_GAUSSIAN_HPP

#include <cstdint>

#include "cfb/matrix.hpp"
#include "cfb/rng.hpp"

namespace cfb {

// Diagonal Gaussian over a flat parameter vector. std = exp(log_std); a
// log_std of -infinity encodes a point mass in that coordinate.
struct GaussianMeanField {
    Vec mean;
    Vec log_std;

    std::size_t dim() const { return mean.size(); }
    void validate() const;

    static GaussianMeanField point_mass(Vec w);
    static GaussianMeanField isotropic(Vec w, double sigma2);
};

// KL(q || p) between diagonal Gaussians, closed form. 0 iff identical.
double kl_gaussian_diag(const GaussianMeanField& q, const GaussianMeanField& p);

// ||w_new - w_old||^2 / (2 sigma^2); KL between isotropic Gaussians of equal
// variance.
double kl_isotropic_shift(const Vec& w_new, const Vec& w_old, double sigma2);

// mean + exp(log_std) * eps, eps ~ N(0, I). Deterministic given the stream.
Vec reparam_sample(const GaussianMeanField& q, RngStream& rng);
Vec reparam_sample(const GaussianMeanField& q, std::uint64_t seed);

// Samples only coordinates [begin, end) into `out` (the rest untouched);
// `eps_out` receives the raw normals for pathwise gradients.
void reparam_sample_range(const GaussianMeanField& q, std::size_t begin, std::size_t end,
                          RngStream& rng, Vec& out, Vec& eps_out);

}  // namespace cfb

#endif
