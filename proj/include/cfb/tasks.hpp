#ifndef CFB_TASKS_HPP
#define CFB_TASKS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cfb/metrics.hpp"

namespace cfb::tasks {

inline constexpr std::size_t kInputDim = 10;

// One binary task: x ~ N(0, I_10), y = sgn(a^T x) with separator
// a = (cos theta, sin theta, 0, ..., 0). Only the first two features matter.
struct TaskSpec {
    double angle = 0.0;  // radians
    int m_train = 3000;
    int m_test = 1000;
    std::uint64_t seed = 0;
};

enum class EnvironmentKind { similar, gradual, orthogonal };

EnvironmentKind environment_kind_from_name(const std::string& name);
const char* environment_kind_name(EnvironmentKind kind);

struct EnvironmentConfig {
    EnvironmentKind kind = EnvironmentKind::similar;
    int n_tasks = 100;
    double reference_angle = 0.0;              // radians
    double max_dev = 10.0 * 3.14159265358979323846 / 180.0;  // 10 degrees
    std::uint64_t seed = 0;
};

// Angles per task. similar: jitter around the reference; gradual: positive
// drift with per-step jitter in [0, max_dev]; orthogonal: first half near the
// reference, second half near reference + 90 degrees.
std::vector<double> make_angle_schedule(const EnvironmentConfig& cfg);

// Disjoint train/test draws; deterministic given the spec's seed. Labels map
// sgn to {0 -> negative, 1 -> positive}, ties labeled positive.
std::pair<TaskDataset, TaskDataset> sample_task(const TaskSpec& spec);

// Ground-truth label of x under separator angle theta.
int true_label(double theta, std::span<const double> x);

}  // namespace cfb::tasks

#endif
