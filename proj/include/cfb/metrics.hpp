#ifndef CFB_METRICS_HPP
#define CFB_METRICS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cfb/matrix.hpp"
#include "cfb/rng.hpp"

namespace cfb {

// Bounded evaluation losses. zero_one always has bound 1; clamped cross
// entropy clips the per-example value at `bound`.
struct LossFunction {
    enum class Kind { zero_one, clamped_cross_entropy };
    Kind kind = Kind::zero_one;
    double bound = 1.0;

    static LossFunction zero_one() { return {Kind::zero_one, 1.0}; }
    static LossFunction clamped_cross_entropy(double k) { return {Kind::clamped_cross_entropy, k}; }
};

// Per-example loss from a row of logits. Result lies in [0, loss.bound].
double example_loss(const LossFunction& loss, std::span<const double> logits, int label);

// One task's data. Labels are class indices into the task head.
struct TaskDataset {
    Matrix features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

void dump_dataset_csv(const TaskDataset& data, const std::string& path);

// A hypothesis source for Monte-Carlo loss estimation: draws a hypothesis and
// reports its mean loss on a dataset. A point hypothesis ignores the RNG and
// n_mc.
struct HypothesisSource {
    bool is_point = false;
    // Mean loss over the dataset for one sampled hypothesis.
    std::function<double(RngStream&)> mean_loss;
};

// (1/m) sum_j l(h, z_j), averaged over n_mc hypothesis draws for
// distributions. Deterministic given seed. Throws "empty-dataset".
double empirical_loss(const HypothesisSource& source, const TaskDataset& data,
                      const LossFunction& loss, int n_mc, std::uint64_t seed);

struct TransferMetrics {
    double bwt = 0.0;
    double forgetting = 0.0;
    double bwt_discounted = 0.0;
    double forgetting_discounted = 0.0;
};

// current[t] = loss of the final posterior on previous task t's data;
// after_training[t] = loss recorded right after task t was learned.
// The discounted forms are undivided sums with weight gamma^(T-1-t), matching
// how they are defined (the plain forms are means).
TransferMetrics bwt_and_forgetting(const Vec& current_losses, const Vec& after_training_losses,
                                   double gamma);

struct MetricsRow {
    int checkpoint = 0;
    int task_id = 0;
    double bwt = 0.0;
    double forgetting = 0.0;
    double fwd_loss = 0.0;
    double bwt_disc = 0.0;
    double forget_disc = 0.0;
    double bwt_bound = 0.0;
    double forget_bound = 0.0;
};

struct MetricsLog {
    std::vector<MetricsRow> rows;

    std::string to_csv() const;
    void save_csv(const std::string& path) const;
};

// Fixed-format float used in every CSV we emit (round-trippable, locale-free).
std::string format_double(double v);

}  // namespace cfb

#endif
