#include "cfb/tasks.hpp"

#include <cmath>
#include <stdexcept>

#include "cfb/rng.hpp"

namespace cfb::tasks {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

EnvironmentKind environment_kind_from_name(const std::string& name) {
    if (name == "similar") return EnvironmentKind::similar;
    if (name == "gradual") return EnvironmentKind::gradual;
    if (name == "orthogonal") return EnvironmentKind::orthogonal;
    throw std::invalid_argument("unknown environment kind: " + name);
}

const char* environment_kind_name(EnvironmentKind kind) {
    switch (kind) {
        case EnvironmentKind::similar: return "similar";
        case EnvironmentKind::gradual: return "gradual";
        case EnvironmentKind::orthogonal: return "orthogonal";
    }
    throw std::invalid_argument("unknown environment kind");
}

std::vector<double> make_angle_schedule(const EnvironmentConfig& cfg) {
    if (cfg.n_tasks < 1) throw std::invalid_argument("make_angle_schedule: n_tasks >= 1");
    if (!(cfg.max_dev >= 0.0)) throw std::invalid_argument("make_angle_schedule: max_dev >= 0");

    std::vector<double> angles(cfg.n_tasks);
    RngStream rng = derive_stream(cfg.seed, 0xa46e);
    switch (cfg.kind) {
        case EnvironmentKind::similar:
            for (double& a : angles)
                a = cfg.reference_angle + rng.uniform(-cfg.max_dev, cfg.max_dev);
            break;
        case EnvironmentKind::gradual: {
            double a = cfg.reference_angle;
            for (int t = 0; t < cfg.n_tasks; ++t) {
                angles[t] = a;
                a += rng.uniform(0.0, cfg.max_dev);
            }
            break;
        }
        case EnvironmentKind::orthogonal: {
            const int half = cfg.n_tasks / 2;
            for (int t = 0; t < cfg.n_tasks; ++t) {
                const double base = t < half ? cfg.reference_angle
                                             : cfg.reference_angle + kPi / 2.0;
                angles[t] = base + rng.uniform(-cfg.max_dev, cfg.max_dev);
            }
            break;
        }
    }
    return angles;
}

int true_label(double theta, std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("true_label: need at least 2 features");
    const double margin = std::cos(theta) * x[0] + std::sin(theta) * x[1];
    return margin >= 0.0 ? 1 : 0;
}

std::pair<TaskDataset, TaskDataset> sample_task(const TaskSpec& spec) {
    if (spec.m_train < 1 || spec.m_test < 1)
        throw std::invalid_argument("sample_task: m_train and m_test must be >= 1");

    auto draw = [&](int m, std::uint64_t label) {
        TaskDataset d;
        d.features = Matrix(m, kInputDim);
        d.labels.resize(m);
        RngStream rng = derive_stream(spec.seed, 0x7a5c, label);
        for (int i = 0; i < m; ++i) {
            auto row = d.features.row(i);
            for (std::size_t j = 0; j < kInputDim; ++j) row[j] = rng.normal();
            d.labels[i] = true_label(spec.angle, row);
        }
        return d;
    };
    // distinct stream labels keep train and test disjoint
    return {draw(spec.m_train, 0), draw(spec.m_test, 1)};
}

}  // namespace cfb::tasks
