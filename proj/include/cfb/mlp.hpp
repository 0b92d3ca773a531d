#ifndef CFB_MLP_HPP
#define CFB_MLP_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "cfb/matrix.hpp"
#include "cfb/metrics.hpp"

namespace cfb {

// Fully connected tanh trunk with one linear head per task. Parameters live
// in a single flat vector: trunk layers (W row-major, then b) followed by the
// heads in task order.
struct MlpArchitecture {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::size_t n_tasks = 1;
    std::size_t classes_per_task = 2;

    std::size_t trunk_width() const {  // width feeding the heads
        return hidden_dims.empty() ? input_dim : hidden_dims.back();
    }
    std::size_t trunk_param_count() const;
    std::size_t head_param_count() const {
        return classes_per_task * (trunk_width() + 1);
    }
    std::size_t param_count() const {
        return trunk_param_count() + n_tasks * head_param_count();
    }
    // [begin, end) of one head's slice in the flat vector.
    std::pair<std::size_t, std::size_t> head_range(std::size_t task) const;
    void validate() const;
};

// Batched logits for one task head: one row per input row.
Matrix mlp_forward(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                   const Matrix& x);

struct BackwardResult {
    double loss = 0.0;  // mean cross-entropy over the batch
    Vec grad;           // full parameter dimension; inactive heads stay zero
};

// Exact reverse-mode gradient of the mean softmax cross-entropy over the
// batch w.r.t. all parameters.
BackwardResult mlp_backward(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                            const Matrix& x, const std::vector<int>& labels);

// Empirical Fisher diagonal: squared gradients of the log-likelihood of
// labels drawn from the model's own predictive distribution, averaged over
// n_samples data points.
Vec fisher_diagonal(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                    const TaskDataset& data, int n_samples, std::uint64_t seed);

// Mean evaluation loss of a fixed parameter vector on a dataset.
double evaluate_point(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                      const TaskDataset& data, const LossFunction& loss);

// Fan-in scaled symmetric-uniform initialization.
Vec init_params(const MlpArchitecture& arch, std::uint64_t seed);

}  // namespace cfb

#endif
