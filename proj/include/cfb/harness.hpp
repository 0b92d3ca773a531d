#ifndef CFB_HARNESS_HPP
#define CFB_HARNESS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfb/bounds.hpp"
#include "cfb/metrics.hpp"
#include "cfb/mlp.hpp"
#include "cfb/tasks.hpp"

namespace cfb::harness {

// Bad or missing configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Method { vi, ewc };

Method method_from_name(const std::string& name);
const char* method_name(Method m);

struct ExperimentConfig {
    tasks::EnvironmentConfig environment;
    Method method = Method::vi;
    std::vector<std::size_t> hidden_dims = {64};
    int m_train = 3000;
    int m_test = 1000;
    double lambda = 250.0;    // Gibbs temperature; KL weight is 1/lambda
    double init_std = 0.05;   // VI prior/posterior init std
    double lambda_ewc = 40.0;
    double sigma2 = 1e-2;
    int epochs = 1;
    int batch_size = 16;
    int fisher_samples = 200;
    BoundConfig bound;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    int checkpoint_stride = 4;
    std::string output_dir = "artifacts";

    MlpArchitecture arch() const;
    void validate() const;

    // Unknown keys are ConfigErrors; absent keys keep their defaults, so an
    // empty object reproduces the stock setup.
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    std::string to_json_text() const;  // resolved-defaults echo
};

struct CheckpointRecord {
    int tasks_seen = 0;  // t: checkpoint taken right after training task t
    TransferMetrics metrics;
    double fwd_loss = 0.0;     // just-after-training test loss of task t
    double mc_stderr = 0.0;    // per-draw stderr of the bwt/forgetting estimate
    BoundReport bound;
};

struct SeedResult {
    std::uint64_t seed = 0;
    bool diverged = false;
    std::vector<double> after_training_losses;  // one per trained task
    std::vector<CheckpointRecord> checkpoints;
    GaussianMeanField final_posterior;

    MetricsLog to_log() const;
};

struct RunArtifacts {
    std::string config_echo_path;
    std::vector<std::string> metrics_csv_paths;
    std::vector<std::string> bound_json_paths;
    std::vector<std::string> posterior_paths;
    std::string summary_csv_path;
    std::vector<SeedResult> seeds;
    bool partial = false;  // some seed aborted on divergence
};

// Pure per-seed run (no I/O); run_experiment drives it and writes artifacts.
SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed);

RunArtifacts run_experiment(const ExperimentConfig& cfg);

// Table-2-style summary over the final checkpoints of the per-seed metric
// CSVs found in `dir`; renders to stdout-ready text and writes summary.csv.
std::string render_report(const std::string& dir);

enum class VerifyScope { all, lemmas, oracle, gradients };

VerifyScope verify_scope_from_name(const std::string& name);

struct VerifyItem {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyItem> items;

    bool all_pass() const;
    std::string to_text() const;
};

// Randomized property sweeps over the exact discrete machinery plus
// finite-difference gradient checks. Deterministic given seed.
VerifyReport verify_suite(VerifyScope scope, std::uint64_t seed);

}  // namespace cfb::harness

#endif
