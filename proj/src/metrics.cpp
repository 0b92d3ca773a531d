#include "cfb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cfb/logsumexp.hpp"

namespace cfb {

double example_loss(const LossFunction& loss, std::span<const double> logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw std::invalid_argument("example_loss: label out of range");
    switch (loss.kind) {
        case LossFunction::Kind::zero_one: {
            // Ties resolve to the lowest index, so a tie counts as an error
            // unless the label is the first argmax.
            std::size_t argmax = 0;
            for (std::size_t i = 1; i < logits.size(); ++i)
                if (logits[i] > logits[argmax]) argmax = i;
            return argmax == static_cast<std::size_t>(label) ? 0.0 : 1.0;
        }
        case LossFunction::Kind::clamped_cross_entropy: {
            const double lse = log_sum_exp(logits);
            const double nll = lse - logits[label];
            return std::min(nll, loss.bound);
        }
    }
    throw std::logic_error("example_loss: unknown loss kind");
}

double empirical_loss(const HypothesisSource& source, const TaskDataset& data,
                      const LossFunction& loss, int n_mc, std::uint64_t seed) {
    if (data.size() == 0) throw std::invalid_argument("empty-dataset");
    if (n_mc < 1) throw std::invalid_argument("empirical_loss: n_mc must be >= 1");
    RngStream rng = derive_stream(seed, 0x10c5);
    if (source.is_point) return source.mean_loss(rng);
    double acc = 0.0;
    for (int k = 0; k < n_mc; ++k) acc += source.mean_loss(rng);
    return acc / n_mc;
}

TransferMetrics bwt_and_forgetting(const Vec& current_losses, const Vec& after_training_losses,
                                   double gamma) {
    if (current_losses.empty()) throw std::invalid_argument("no-previous-tasks");
    if (current_losses.size() != after_training_losses.size())
        throw std::invalid_argument("vector-length");
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("bwt_and_forgetting: gamma must be in (0,1]");
    const std::size_t n = current_losses.size();  // T-1
    TransferMetrics out;
    for (std::size_t t = 0; t < n; ++t) {
        const double w = std::pow(gamma, static_cast<double>(n - 1 - t));
        out.bwt += current_losses[t];
        out.forgetting += current_losses[t] - after_training_losses[t];
        out.bwt_discounted += w * current_losses[t];
        out.forgetting_discounted += w * (current_losses[t] - after_training_losses[t]);
    }
    out.bwt /= static_cast<double>(n);
    out.forgetting /= static_cast<double>(n);
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string MetricsLog::to_csv() const {
    std::string out = "checkpoint,task_id,bwt,forgetting,fwd_loss,bwt_disc,forget_disc,bwt_bound,forget_bound\n";
    for (const MetricsRow& r : rows) {
        out += std::to_string(r.checkpoint) + ',' + std::to_string(r.task_id) + ',';
        out += format_double(r.bwt) + ',' + format_double(r.forgetting) + ',';
        out += format_double(r.fwd_loss) + ',' + format_double(r.bwt_disc) + ',';
        out += format_double(r.forget_disc) + ',' + format_double(r.bwt_bound) + ',';
        out += format_double(r.forget_bound) + '\n';
    }
    return out;
}

void MetricsLog::save_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << to_csv();
}

void dump_dataset_csv(const TaskDataset& data, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    for (std::size_t c = 0; c < data.features.cols; ++c) f << 'x' << c << ',';
    f << "label\n";
    for (std::size_t r = 0; r < data.features.rows; ++r) {
        for (std::size_t c = 0; c < data.features.cols; ++c)
            f << format_double(data.features(r, c)) << ',';
        f << data.labels[r] << '\n';
    }
}

}  // namespace cfb
