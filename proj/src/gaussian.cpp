#include "cfb/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfb {

void GaussianMeanField::validate() const {
    if (mean.size() != log_std.size())
        throw std::invalid_argument("GaussianMeanField: mean/log_std size mismatch");
    for (double m : mean)
        if (!std::isfinite(m)) throw std::invalid_argument("GaussianMeanField: non-finite mean");
    for (double s : log_std)
        if (std::isnan(s) || s == std::numeric_limits<double>::infinity())
            throw std::invalid_argument("GaussianMeanField: bad log_std");
}

GaussianMeanField GaussianMeanField::point_mass(Vec w) {
    GaussianMeanField q;
    q.log_std.assign(w.size(), -std::numeric_limits<double>::infinity());
    q.mean = std::move(w);
    return q;
}

GaussianMeanField GaussianMeanField::isotropic(Vec w, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("isotropic: sigma2 must be > 0");
    GaussianMeanField q;
    q.log_std.assign(w.size(), 0.5 * std::log(sigma2));
    q.mean = std::move(w);
    return q;
}

double kl_gaussian_diag(const GaussianMeanField& q, const GaussianMeanField& p) {
    if (q.dim() != p.dim()) throw std::invalid_argument("kl_gaussian_diag: dimension mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < q.dim(); ++j) {
        const double log_ratio = q.log_std[j] - p.log_std[j];
        const double var_ratio = std::exp(2.0 * log_ratio);
        const double dm = q.mean[j] - p.mean[j];
        const double inv_var_p = std::exp(-2.0 * p.log_std[j]);
        acc += 0.5 * (var_ratio + dm * dm * inv_var_p - 1.0 - 2.0 * log_ratio);
    }
    return std::max(acc, 0.0);
}

double kl_isotropic_shift(const Vec& w_new, const Vec& w_old, double sigma2) {
    check_same_size(w_new, w_old, "kl_isotropic_shift: size mismatch");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("kl_isotropic_shift: sigma2 must be > 0");
    double sq = 0.0;
    for (std::size_t j = 0; j < w_new.size(); ++j) {
        const double d = w_new[j] - w_old[j];
        sq += d * d;
    }
    return sq / (2.0 * sigma2);
}

Vec reparam_sample(const GaussianMeanField& q, RngStream& rng) {
    Vec out(q.dim());
    Vec eps;  // unused here
    eps.resize(q.dim());
    reparam_sample_range(q, 0, q.dim(), rng, out, eps);
    return out;
}

Vec reparam_sample(const GaussianMeanField& q, std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x5e9a);
    return reparam_sample(q, rng);
}

void reparam_sample_range(const GaussianMeanField& q, std::size_t begin, std::size_t end,
                          RngStream& rng, Vec& out, Vec& eps_out) {
    for (std::size_t j = begin; j < end; ++j) {
        const double eps = rng.normal();
        eps_out[j] = eps;
        const double sd = std::exp(q.log_std[j]);  // exp(-inf) = 0, point mass
        out[j] = q.mean[j] + sd * eps;
    }
}

}  // namespace cfb
