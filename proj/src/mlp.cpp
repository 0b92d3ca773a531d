#include "cfb/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "cfb/kernels.hpp"
#include "cfb/logsumexp.hpp"
#include "cfb/rng.hpp"

namespace cfb {

std::size_t MlpArchitecture::trunk_param_count() const {
    std::size_t count = 0;
    std::size_t in = input_dim;
    for (std::size_t w : hidden_dims) {
        count += w * in + w;
        in = w;
    }
    return count;
}

std::pair<std::size_t, std::size_t> MlpArchitecture::head_range(std::size_t task) const {
    if (task >= n_tasks) throw std::out_of_range("head_range: bad task index");
    const std::size_t begin = trunk_param_count() + task * head_param_count();
    return {begin, begin + head_param_count()};
}

void MlpArchitecture::validate() const {
    if (input_dim == 0 || n_tasks == 0 || classes_per_task < 2)
        throw std::invalid_argument("MlpArchitecture: bad dimensions");
    for (std::size_t w : hidden_dims)
        if (w == 0) throw std::invalid_argument("MlpArchitecture: zero hidden width");
}

namespace {

struct ForwardCache {
    // activations[0] is the input row; activations[k] the k-th hidden layer
    // output (post-tanh). logits are kept separately.
    std::vector<Vec> activations;
    Vec logits;
};

void forward_row(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                 std::span<const double> x, ForwardCache& cache) {
    cache.activations.resize(arch.hidden_dims.size() + 1);
    cache.activations[0].assign(x.begin(), x.end());

    std::size_t offset = 0;
    std::size_t in = arch.input_dim;
    for (std::size_t layer = 0; layer < arch.hidden_dims.size(); ++layer) {
        const std::size_t out = arch.hidden_dims[layer];
        Vec& a = cache.activations[layer + 1];
        a.resize(out);
        const double* w = params.data() + offset;
        const double* b = params.data() + offset + out * in;
        const Vec& prev = cache.activations[layer];
        for (std::size_t o = 0; o < out; ++o)
            a[o] = std::tanh(kernels::dot({w + o * in, in}, {prev.data(), in}) + b[o]);
        offset += out * in + out;
        in = out;
    }

    const auto [hb, he] = arch.head_range(task);
    const std::size_t c = arch.classes_per_task;
    const std::size_t width = arch.trunk_width();
    const double* hw = params.data() + hb;
    const double* hbias = params.data() + hb + c * width;
    const Vec& last = cache.activations.back();
    cache.logits.resize(c);
    for (std::size_t o = 0; o < c; ++o)
        cache.logits[o] = kernels::dot({hw + o * width, width}, {last.data(), width}) + hbias[o];
    (void)he;
}

// Backprop one row given dlogits; accumulates into grad.
void backward_row(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                  const ForwardCache& cache, const Vec& dlogits, Vec& grad) {
    const auto [hb, he] = arch.head_range(task);
    const std::size_t c = arch.classes_per_task;
    const std::size_t width = arch.trunk_width();
    const Vec& last = cache.activations.back();

    double* hw_grad = grad.data() + hb;
    double* hbias_grad = grad.data() + hb + c * width;
    Vec dlast(width, 0.0);
    const double* hw = params.data() + hb;
    for (std::size_t o = 0; o < c; ++o) {
        kernels::axpy(dlogits[o], {last.data(), width}, {hw_grad + o * width, width});
        hbias_grad[o] += dlogits[o];
        kernels::axpy(dlogits[o], {hw + o * width, width}, {dlast.data(), width});
    }
    (void)he;

    // walk trunk layers backwards; recompute each layer's parameter offset
    Vec dnext = std::move(dlast);
    for (std::size_t layer = arch.hidden_dims.size(); layer-- > 0;) {
        const std::size_t out = arch.hidden_dims[layer];
        const std::size_t in = layer == 0 ? arch.input_dim : arch.hidden_dims[layer - 1];
        std::size_t offset = 0;
        for (std::size_t l = 0; l < layer; ++l) {
            const std::size_t li = l == 0 ? arch.input_dim : arch.hidden_dims[l - 1];
            offset += arch.hidden_dims[l] * li + arch.hidden_dims[l];
        }
        const Vec& a = cache.activations[layer + 1];
        const Vec& prev = cache.activations[layer];
        // tanh' = 1 - a^2
        Vec dz(out);
        for (std::size_t o = 0; o < out; ++o) dz[o] = dnext[o] * (1.0 - a[o] * a[o]);

        double* w_grad = grad.data() + offset;
        double* b_grad = grad.data() + offset + out * in;
        const double* w = params.data() + offset;
        Vec dprev(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            kernels::axpy(dz[o], {prev.data(), in}, {w_grad + o * in, in});
            b_grad[o] += dz[o];
            kernels::axpy(dz[o], {w + o * in, in}, {dprev.data(), in});
        }
        dnext = std::move(dprev);
    }
}

Vec softmax(const Vec& logits) {
    Vec p(logits.size());
    const double lse = log_sum_exp(logits);
    for (std::size_t i = 0; i < logits.size(); ++i) p[i] = std::exp(logits[i] - lse);
    return p;
}

}  // namespace

Matrix mlp_forward(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                   const Matrix& x) {
    arch.validate();
    if (params.size() != arch.param_count())
        throw std::invalid_argument("mlp_forward: parameter count mismatch");
    if (x.cols != arch.input_dim) throw std::invalid_argument("mlp_forward: input dim mismatch");
    Matrix logits(x.rows, arch.classes_per_task);
    ForwardCache cache;
    for (std::size_t r = 0; r < x.rows; ++r) {
        forward_row(params, arch, task, x.row(r), cache);
        for (std::size_t c = 0; c < arch.classes_per_task; ++c) logits(r, c) = cache.logits[c];
    }
    return logits;
}

BackwardResult mlp_backward(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                            const Matrix& x, const std::vector<int>& labels) {
    arch.validate();
    if (x.rows != labels.size()) throw std::invalid_argument("mlp_backward: label count mismatch");
    if (x.rows == 0) throw std::invalid_argument("empty-dataset");
    BackwardResult res;
    res.grad.assign(params.size(), 0.0);
    ForwardCache cache;
    const double scale = 1.0 / static_cast<double>(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        forward_row(params, arch, task, x.row(r), cache);
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= arch.classes_per_task)
            throw std::invalid_argument("mlp_backward: label out of range");
        Vec p = softmax(cache.logits);
        res.loss += scale * (log_sum_exp(cache.logits) - cache.logits[y]);
        p[y] -= 1.0;
        for (double& v : p) v *= scale;
        backward_row(params, arch, task, cache, p, res.grad);
    }
    return res;
}

Vec fisher_diagonal(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                    const TaskDataset& data, int n_samples, std::uint64_t seed) {
    if (n_samples < 1 || static_cast<std::size_t>(n_samples) > data.size())
        throw std::invalid_argument("fisher_diagonal: n_samples must be in [1, m]");
    RngStream rng = derive_stream(seed, 0xf15e, task);
    Vec fisher(params.size(), 0.0);
    Vec grad(params.size(), 0.0);
    ForwardCache cache;
    Matrix one_row(1, arch.input_dim);
    for (int k = 0; k < n_samples; ++k) {
        const std::size_t r = rng.below(data.size());
        forward_row(params, arch, task, data.features.row(r), cache);
        // draw a label from the model's own predictive distribution
        Vec p = softmax(cache.logits);
        const double u = rng.uniform();
        std::size_t y = 0;
        double cum = 0.0;
        for (std::size_t c = 0; c < p.size(); ++c) {
            cum += p[c];
            if (u < cum) { y = c; break; }
            y = c;
        }
        Vec dlogits = p;
        dlogits[y] -= 1.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        backward_row(params, arch, task, cache, dlogits, grad);
        for (std::size_t j = 0; j < grad.size(); ++j) fisher[j] += grad[j] * grad[j];
    }
    for (double& v : fisher) v /= static_cast<double>(n_samples);
    return fisher;
}

double evaluate_point(const Vec& params, const MlpArchitecture& arch, std::size_t task,
                      const TaskDataset& data, const LossFunction& loss) {
    if (data.size() == 0) throw std::invalid_argument("empty-dataset");
    const Matrix logits = mlp_forward(params, arch, task, data.features);
    double acc = 0.0;
    for (std::size_t r = 0; r < data.size(); ++r)
        acc += example_loss(loss, logits.row(r), data.labels[r]);
    return acc / static_cast<double>(data.size());
}

Vec init_params(const MlpArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    RngStream rng = derive_stream(seed, 0x1417);
    Vec params(arch.param_count(), 0.0);
    std::size_t offset = 0;
    std::size_t in = arch.input_dim;
    for (std::size_t w : arch.hidden_dims) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t j = 0; j < w * in; ++j) params[offset + j] = rng.uniform(-bound, bound);
        offset += w * in + w;  // biases stay zero
        in = w;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(arch.trunk_width()));
    for (std::size_t t = 0; t < arch.n_tasks; ++t) {
        const auto [hb, he] = arch.head_range(t);
        const std::size_t nw = arch.classes_per_task * arch.trunk_width();
        for (std::size_t j = 0; j < nw; ++j) params[hb + j] = rng.uniform(-bound, bound);
        (void)he;
    }
    return params;
}

}  // namespace cfb
