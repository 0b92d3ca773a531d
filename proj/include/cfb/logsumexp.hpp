#ifndef CFB_LOGSUMEXP_HPP
#define CFB_LOGSUMEXP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace cfb {

// log(sum_i exp(args[i])), max-subtracted.
inline double log_sum_exp(std::span<const double> args) {
    if (args.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    const double m = *std::max_element(args.begin(), args.end());
    if (!std::isfinite(m)) return m;  // all -inf, or a stray inf/nan propagates
    double s = 0.0;
    for (double a : args) s += std::exp(a - m);
    return m + std::log(s);
}

// log(sum_i w[i] * exp(args[i])) for nonnegative weights.
inline double log_sum_exp_weighted(std::span<const double> w, std::span<const double> args) {
    if (args.empty() || w.size() != args.size())
        throw std::invalid_argument("log_sum_exp_weighted: bad shapes");
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < args.size(); ++i)
        if (w[i] > 0.0) m = std::max(m, args[i]);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < args.size(); ++i)
        if (w[i] > 0.0) s += w[i] * std::exp(args[i] - m);
    return m + std::log(s);
}

}  // namespace cfb

#endif
