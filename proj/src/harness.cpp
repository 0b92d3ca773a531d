#include "cfb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cfb/discrete.hpp"
#include "cfb/ewc.hpp"
#include "cfb/vi.hpp"

namespace cfb::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void copy_head_slice(Vec& v, const MlpArchitecture& arch, std::size_t from, std::size_t to) {
    const auto [fb, fe] = arch.head_range(from);
    const auto [tb, te] = arch.head_range(to);
    (void)fe;
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(fb), v.begin() + static_cast<std::ptrdiff_t>(fb + (te - tb)),
              v.begin() + static_cast<std::ptrdiff_t>(tb));
}

}

Method method_from_name(const std::string& name) {
    if (name == "vi") return Method::vi;
    if (name == "ewc") return Method::ewc;
    throw ConfigError("unknown method: " + name);
}

const char* method_name(Method m) { return m == Method::vi ? "vi" : "ewc"; }

VerifyScope verify_scope_from_name(const std::string& name) {
    if (name == "all") return VerifyScope::all;
    if (name == "lemmas") return VerifyScope::lemmas;
    if (name == "oracle") return VerifyScope::oracle;
    if (name == "gradients") return VerifyScope::gradients;
    throw ConfigError("unknown verify scope: " + name);
}

MlpArchitecture ExperimentConfig::arch() const {
    MlpArchitecture a;
    a.input_dim = tasks::kInputDim;
    a.hidden_dims = hidden_dims;
    a.n_tasks = static_cast<std::size_t>(environment.n_tasks);
    a.classes_per_task = 2;
    return a;
}

void ExperimentConfig::validate() const {
    try {
        arch().validate();
        bound.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (environment.n_tasks < 1) throw ConfigError("n_tasks must be >= 1");
    if (m_train < 1 || m_test < 1) throw ConfigError("m_train and m_test must be >= 1");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
    if (!(init_std > 0.0)) throw ConfigError("init_std must be > 0");
    if (!(lambda_ewc >= 0.0)) throw ConfigError("lambda_ewc must be >= 0");
    if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be > 0");
    if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch_size must be >= 1");
    if (fisher_samples < 1) throw ConfigError("fisher_samples must be >= 1");
    if (seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (checkpoint_stride < 1) throw ConfigError("checkpoint_stride must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir must be non-empty");
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || item.key() == k;
        if (!ok) throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    ExperimentConfig cfg;
    try {
        reject_unknown_keys(j, {"environment", "method", "hidden_dims", "m_train", "m_test",
                                "lambda", "init_std", "lambda_ewc", "sigma2", "epochs",
                                "batch_size", "fisher_samples", "delta", "gamma", "n_mc_prior",
                                "n_mc_loss", "seeds", "checkpoint_stride", "output_dir"},
                            "config");
        if (j.contains("environment")) {
            const json& e = j["environment"];
            reject_unknown_keys(e, {"kind", "n_tasks", "reference_angle_deg", "max_dev_deg",
                                    "seed"},
                                "environment");
            if (e.contains("kind"))
                cfg.environment.kind = tasks::environment_kind_from_name(e["kind"].get<std::string>());
            if (e.contains("n_tasks")) cfg.environment.n_tasks = e["n_tasks"].get<int>();
            if (e.contains("reference_angle_deg"))
                cfg.environment.reference_angle = e["reference_angle_deg"].get<double>() * kPi / 180.0;
            if (e.contains("max_dev_deg"))
                cfg.environment.max_dev = e["max_dev_deg"].get<double>() * kPi / 180.0;
            if (e.contains("seed")) cfg.environment.seed = e["seed"].get<std::uint64_t>();
        }
        if (j.contains("method")) cfg.method = method_from_name(j["method"].get<std::string>());
        if (j.contains("hidden_dims")) cfg.hidden_dims = j["hidden_dims"].get<std::vector<std::size_t>>();
        if (j.contains("m_train")) cfg.m_train = j["m_train"].get<int>();
        if (j.contains("m_test")) cfg.m_test = j["m_test"].get<int>();
        if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
        if (j.contains("init_std")) cfg.init_std = j["init_std"].get<double>();
        if (j.contains("lambda_ewc")) cfg.lambda_ewc = j["lambda_ewc"].get<double>();
        if (j.contains("sigma2")) cfg.sigma2 = j["sigma2"].get<double>();
        if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
        if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
        if (j.contains("fisher_samples")) cfg.fisher_samples = j["fisher_samples"].get<int>();
        if (j.contains("delta")) cfg.bound.delta = j["delta"].get<double>();
        if (j.contains("gamma")) cfg.bound.gamma = j["gamma"].get<double>();
        if (j.contains("n_mc_prior")) cfg.bound.n_mc_prior = j["n_mc_prior"].get<int>();
        if (j.contains("n_mc_loss")) cfg.bound.n_mc_loss = j["n_mc_loss"].get<int>();
        if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("checkpoint_stride")) cfg.checkpoint_stride = j["checkpoint_stride"].get<int>();
        if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has wrong type: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["environment"] = {{"kind", tasks::environment_kind_name(environment.kind)},
                        {"n_tasks", environment.n_tasks},
                        {"reference_angle_deg", environment.reference_angle * 180.0 / kPi},
                        {"max_dev_deg", environment.max_dev * 180.0 / kPi},
                        {"seed", environment.seed}};
    j["method"] = method_name(method);
    j["hidden_dims"] = hidden_dims;
    j["m_train"] = m_train;
    j["m_test"] = m_test;
    j["lambda"] = lambda;
    j["init_std"] = init_std;
    j["lambda_ewc"] = lambda_ewc;
    j["sigma2"] = sigma2;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["fisher_samples"] = fisher_samples;
    j["delta"] = bound.delta;
    j["gamma"] = bound.gamma;
    j["n_mc_prior"] = bound.n_mc_prior;
    j["n_mc_loss"] = bound.n_mc_loss;
    j["seeds"] = seeds;
    j["checkpoint_stride"] = checkpoint_stride;
    j["output_dir"] = output_dir;
    return j.dump(2);
}

MetricsLog SeedResult::to_log() const {
    MetricsLog log;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const CheckpointRecord& c = checkpoints[i];
        MetricsRow r;
        r.checkpoint = static_cast<int>(i + 1);
        r.task_id = c.tasks_seen;
        r.bwt = c.metrics.bwt;
        r.forgetting = c.metrics.forgetting;
        r.fwd_loss = c.fwd_loss;
        r.bwt_disc = c.metrics.bwt_discounted;
        r.forget_disc = c.metrics.forgetting_discounted;
        r.bwt_bound = c.bound.total_bwt_bound;
        r.forget_bound = c.bound.total_forgetting_bound;
        log.rows.push_back(r);
    }
    return log;
}

SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const MlpArchitecture arch = cfg.arch();
    const LossFunction loss = LossFunction::zero_one();

    tasks::EnvironmentConfig env = cfg.environment;
    env.seed = derive_stream(cfg.environment.seed, 0xe5d, seed).next_u64();
    const std::vector<double> angles = tasks::make_angle_schedule(env);
    const int T = env.n_tasks;

    SeedResult res;
    res.seed = seed;
    std::vector<TaskDataset> tests;
    tests.reserve(T);

    GaussianMeanField q_cur, q_prev;
    EwcState ewc;
    const std::uint64_t init_seed = derive_stream(seed, 0x171).next_u64();
    if (cfg.method == Method::vi) {
        q_cur = vi_init_prior(arch, cfg.init_std, init_seed);
    } else {
        ewc = ewc_init(arch, cfg.lambda_ewc, cfg.sigma2, init_seed);
        q_cur = ewc_posterior(ewc);
    }

    ViTrainConfig vcfg;
    vcfg.lambda = cfg.lambda;
    vcfg.epochs = cfg.epochs;
    vcfg.batch_size = cfg.batch_size;
    EwcTrainConfig ecfg;
    ecfg.epochs = cfg.epochs;
    ecfg.batch_size = cfg.batch_size;
    ecfg.fisher_samples = cfg.fisher_samples;
    BoundConfig bcfg = cfg.bound;
    bcfg.lambda = cfg.lambda;  // the bound is evaluated at the training temperature

    try {
        for (int t = 0; t < T; ++t) {
            tasks::TaskSpec spec;
            spec.angle = angles[t];
            spec.m_train = cfg.m_train;
            spec.m_test = cfg.m_test;
            spec.seed = derive_stream(seed, 0xda7a, t).next_u64();
            auto [train, test] = tasks::sample_task(spec);
            tests.push_back(std::move(test));

            // warm-start the incoming head from the previous task's trained
            // head, so the prior carries a usable hypothesis for task t; this
            // uses no task-t data, so the prior stays independent of it
            if (t > 0) {
                if (cfg.method == Method::vi) {
                    copy_head_slice(q_cur.mean, arch, t - 1, t);
                    copy_head_slice(q_cur.log_std, arch, t - 1, t);
                } else {
                    // the inherited slice keeps its accumulated Fisher, so the
                    // EWC penalty anchors the inherited hypothesis the same way
                    // the KL term anchors the VI warm start
                    copy_head_slice(ewc.weights, arch, t - 1, t);
                    copy_head_slice(ewc.fisher_diag, arch, t - 1, t);
                    q_cur = ewc_posterior(ewc);
                }
            }

            q_prev = q_cur;
            const std::uint64_t train_seed = derive_stream(seed, 0x7e41, t).next_u64();
            if (cfg.method == Method::vi) {
                q_cur = vi_train_task(q_prev, arch, train, t, vcfg, train_seed);
            } else {
                ewc = ewc_train_task(ewc, arch, train, t, ecfg, train_seed);
                q_cur = ewc_posterior(ewc);
            }

            res.after_training_losses.push_back(
                evaluate_posterior(q_cur, arch, t, tests[t], loss, bcfg.n_mc_loss,
                                   derive_stream(seed, 0xaf7e, t).next_u64()));

            const int seen = t + 1;
            if (seen % cfg.checkpoint_stride != 0 && seen != T) continue;

            CheckpointRecord rec;
            rec.tasks_seen = seen;
            rec.fwd_loss = res.after_training_losses.back();
            if (seen < 2) {
                rec.metrics = {kNaN, kNaN, kNaN, kNaN};
                rec.mc_stderr = kNaN;
                rec.bound.total_bwt_bound = kNaN;
                rec.bound.total_forgetting_bound = kNaN;
                res.checkpoints.push_back(std::move(rec));
                continue;
            }

            // shared hypothesis draws across past tasks: one sample of the
            // current posterior is scored on every previous test set
            const std::size_t n_past = static_cast<std::size_t>(seen) - 1;
            const int n = bcfg.n_mc_loss;
            std::vector<Vec> per_draw(n_past, Vec(n, 0.0));
            RngStream rng = derive_stream(seed, 0xc4e, t);
            for (int k = 0; k < n; ++k) {
                const Vec w = reparam_sample(q_cur, rng);
                for (std::size_t p = 0; p < n_past; ++p)
                    per_draw[p][k] = evaluate_point(w, arch, p, tests[p], loss);
            }
            Vec current(n_past, 0.0);
            for (std::size_t p = 0; p < n_past; ++p) {
                for (int k = 0; k < n; ++k) current[p] += per_draw[p][k];
                current[p] /= n;
            }
            const Vec after(res.after_training_losses.begin(),
                            res.after_training_losses.begin() + n_past);
            rec.metrics = bwt_and_forgetting(current, after, bcfg.gamma);
            if (n > 1) {
                Vec f_draw(n, 0.0);
                for (int k = 0; k < n; ++k) {
                    for (std::size_t p = 0; p < n_past; ++p)
                        f_draw[k] += per_draw[p][k] - after[p];
                    f_draw[k] /= static_cast<double>(n_past);
                }
                double mean = 0.0;
                for (double v : f_draw) mean += v;
                mean /= n;
                double var = 0.0;
                for (double v : f_draw) var += (v - mean) * (v - mean);
                rec.mc_stderr = std::sqrt(var / (n - 1.0) / n);
            }

            std::vector<const TaskDataset*> past;
            for (std::size_t p = 0; p < n_past; ++p) past.push_back(&tests[p]);
            rec.bound = forgetting_bound_assemble(q_cur, q_prev, arch, train, past, after, bcfg,
                                                  derive_stream(seed, 0xb0d, t).next_u64());
            res.checkpoints.push_back(std::move(rec));
        }
    } catch (const std::runtime_error&) {
        res.diverged = true;
    }
    res.final_posterior = q_cur;
    return res;
}

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << text;
}

std::string posterior_json(const GaussianMeanField& q) {
    json j;
    j["mean"] = q.mean;
    j["log_std"] = q.log_std;
    return j.dump();
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    const std::string dir = cfg.output_dir;

    RunArtifacts art;
    art.config_echo_path = dir + "/config.json";
    write_file(art.config_echo_path, cfg.to_json_text() + "\n");

    for (std::uint64_t seed : cfg.seeds) {
        SeedResult res = run_seed(cfg, seed);
        const std::string tag = "_seed" + std::to_string(seed);

        const std::string csv_path = dir + "/metrics" + tag + ".csv";
        res.to_log().save_csv(csv_path);
        art.metrics_csv_paths.push_back(csv_path);

        if (!res.checkpoints.empty()) {
            const std::string bound_path = dir + "/bound" + tag + ".json";
            write_file(bound_path, res.checkpoints.back().bound.to_json_text() + "\n");
            art.bound_json_paths.push_back(bound_path);
        }
        const std::string post_path = dir + "/posterior" + tag + ".json";
        write_file(post_path, posterior_json(res.final_posterior) + "\n");
        art.posterior_paths.push_back(post_path);

        art.partial = art.partial || res.diverged;
        art.seeds.push_back(std::move(res));
    }

    render_report(dir);  // writes summary.csv as a side effect
    art.summary_csv_path = dir + "/summary.csv";
    return art;
}

namespace {

std::vector<Vec> final_rows_from_csvs(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("metrics_seed", 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".csv")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no metrics_seed*.csv files in " + dir);

    std::vector<Vec> rows;
    for (const fs::path& p : files) {
        std::ifstream f(p);
        std::string line, last;
        std::getline(f, line);  // header
        while (std::getline(f, line))
            if (!line.empty()) last = line;
        if (last.empty()) continue;  // divergence before the first checkpoint
        Vec vals;
        std::stringstream ss(last);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
        if (vals.size() != 9) throw std::runtime_error("malformed metrics row in " + p.string());
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw ConfigError("no finished seeds in " + dir);
    return rows;
}

}  // namespace

std::string render_report(const std::string& dir) {
    const std::vector<Vec> rows = final_rows_from_csvs(dir);
    static const char* names[] = {"bwt",         "forgetting", "fwd_loss", "bwt_disc",
                                  "forget_disc", "bwt_bound",  "forget_bound"};
    const double n = static_cast<double>(rows.size());

    std::string text = "metric         mean          stderr        (n=" +
                       std::to_string(rows.size()) + " seeds, final checkpoint)\n";
    std::string csv = "metric,mean,stderr\n";
    for (int c = 0; c < 7; ++c) {
        double mean = 0.0;
        for (const Vec& r : rows) mean += r[c + 2];
        mean /= n;
        double se = 0.0;
        if (rows.size() > 1) {
            double var = 0.0;
            for (const Vec& r : rows) var += (r[c + 2] - mean) * (r[c + 2] - mean);
            se = std::sqrt(var / (n - 1.0) / n);
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-14s %-13.6g %-13.6g\n", names[c], mean, se);
        text += buf;
        csv += std::string(names[c]) + ',' + format_double(mean) + ',' + format_double(se) + '\n';
    }
    write_file(dir + "/summary.csv", csv);
    return text;
}

// ---------------------------------------------------------------------------
// verify_suite

namespace {

using discrete::DiscreteDistribution;
using discrete::DiscreteHypothesisSpace;
using discrete::TaskLossModel;

DiscreteDistribution random_dist(RngStream& rng, std::size_t n, bool full_support) {
    Vec w(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = -std::log(1.0 - rng.uniform());
        if (!full_support && rng.uniform() < 0.2) v = 0.0;
        w[i] = v;
        total += v;
    }
    if (total == 0.0) {
        w[rng.below(n)] = 1.0;
        total = 1.0;
    }
    for (double& v : w) v /= total;
    // exact renormalization so validate() passes
    double s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
    return {w};
}

Vec random_vec(RngStream& rng, std::size_t n, double lo, double hi) {
    Vec v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

VerifyItem check_change_of_measure(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0xc0a1);
    double min_gap = std::numeric_limits<double>::infinity();
    double max_eq_gap = 0.0;
    bool pass = true;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 2 + rng.below(11);
        const DiscreteDistribution pi = random_dist(rng, n, true);
        const double lambda = rng.uniform(0.1, 5.0);
        const Vec f = random_vec(rng, n, -2.0, 2.0);

        const DiscreteDistribution rho = random_dist(rng, n, false);
        const auto r = discrete::change_of_measure_check(rho, pi, f, lambda);
        min_gap = std::min(min_gap, r.gap);
        pass = pass && r.gap >= -1e-12;

        // equality at the exponential tilt of pi by lambda f
        Vec neg_f(n);
        for (std::size_t h = 0; h < n; ++h) neg_f[h] = -f[h];
        const DiscreteDistribution tilt = discrete::gibbs_posterior(pi, neg_f, lambda);
        const auto eq = discrete::change_of_measure_check(tilt, pi, f, lambda);
        max_eq_gap = std::max(max_eq_gap, std::abs(eq.gap));
        pass = pass && std::abs(eq.gap) < 1e-10;
    }
    return {"change-of-measure", pass,
            "1000 instances, min gap " + num(min_gap) + ", max |equality gap| " + num(max_eq_gap)};
}

VerifyItem check_thm31(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x7331);
    double min_gap = std::numeric_limits<double>::infinity();
    bool pass = true;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 2 + rng.below(11);
        const DiscreteDistribution pi = random_dist(rng, n, true);
        // rho absolutely continuous w.r.t. pi by construction
        const DiscreteDistribution rho =
            discrete::gibbs_posterior(pi, random_vec(rng, n, 0.0, 1.0), rng.uniform(0.1, 5.0));
        const Vec L_s = random_vec(rng, n, 0.0, 1.0);
        const Vec Lhat_t = random_vec(rng, n, 0.0, 1.0);
        const auto r = discrete::thm31_exact_check(rho, pi, L_s, Lhat_t, rng.uniform(0.1, 5.0));
        min_gap = std::min(min_gap, r.gap);
        pass = pass && r.gap >= -1e-10;
    }
    return {"thm31-exact", pass, "1000 instances, min gap " + num(min_gap)};
}

VerifyItem check_hoeffding(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0xa2a2);
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 8;
    space.prior = DiscreteDistribution::uniform(8);
    space.tasks.push_back({50, random_vec(rng, 8, 0.05, 0.95)});
    const auto r = discrete::hoeffding_mgf_check(space, 0, 1.0, 10000, rng.next_u64(), 0.05);
    const bool pass = r.holds;
    return {"hoeffding-mgf", pass,
            "violation rate " + num(r.lhs) + " vs delta " + num(r.rhs) + " (3se " +
                num(3.0 * r.mc_stderr) + ")"};
}

VerifyItem check_gibbs_optimality(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x91bb);
    double worst = -std::numeric_limits<double>::infinity();
    bool pass = true;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + rng.below(11);
        const DiscreteDistribution prior = random_dist(rng, n, true);
        const Vec losses = random_vec(rng, n, 0.0, 1.0);
        const double lambda = rng.uniform(0.1, 5.0);
        const DiscreteDistribution gibbs = discrete::gibbs_posterior(prior, losses, lambda);
        const double j_gibbs = discrete::gibbs_objective(prior, losses, lambda, gibbs);
        for (int p = 0; p < 50; ++p) {
            const DiscreteDistribution other = random_dist(rng, n, true);
            const double eps = rng.uniform(0.0, 1.0);
            Vec mix(n);
            double total = 0.0;
            for (std::size_t h = 0; h < n; ++h) {
                mix[h] = (1.0 - eps) * gibbs.weights[h] + eps * other.weights[h];
                total += mix[h];
            }
            for (double& v : mix) v /= total;
            const double j_other = discrete::gibbs_objective(prior, losses, lambda, {mix});
            worst = std::max(worst, j_gibbs - j_other);
            pass = pass && j_gibbs <= j_other + 1e-12;
        }
    }
    return {"gibbs-optimality", pass,
            "200 instances x 50 perturbations, max objective excess " + num(worst)};
}

VerifyItem check_sequential_pooled(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x5e62);
    double max_tv = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + rng.below(11);
        const std::size_t T = 1 + rng.below(10);
        const DiscreteDistribution prior = random_dist(rng, n, true);
        std::vector<Vec> tables;
        Vec lambdas;
        Vec pooled(n, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            tables.push_back(random_vec(rng, n, 0.0, 1.0));
            lambdas.push_back(rng.uniform(0.1, 3.0));
            for (std::size_t h = 0; h < n; ++h) pooled[h] += lambdas[t] * tables[t][h];
        }
        const DiscreteDistribution seq = discrete::sequential_gibbs(prior, tables, lambdas);
        const DiscreteDistribution one = discrete::gibbs_posterior(prior, pooled, 1.0);
        double tv = 0.0;
        for (std::size_t h = 0; h < n; ++h) tv += std::abs(seq.weights[h] - one.weights[h]);
        max_tv = std::max(max_tv, 0.5 * tv);
    }
    return {"sequential-pooled", max_tv < 1e-12, "200 chains, max TV " + num(max_tv)};
}

DiscreteHypothesisSpace identical_tasks_space(RngStream& rng, std::size_t T, int m) {
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 8;
    space.prior = DiscreteDistribution::uniform(8);
    const Vec table = random_vec(rng, 8, 0.05, 0.95);
    for (std::size_t t = 0; t < T; ++t) space.tasks.push_back({m, table});
    return space;
}

VerifyItem check_oracle_thm47(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x4747);
    DiscreteHypothesisSpace space = identical_tasks_space(rng, 5, 50);
    discrete::OracleConfig cfg;
    cfg.lambdas = Vec(5, 1.0);
    cfg.task = 2;
    const auto r = discrete::oracle_bound_check(space, discrete::OracleMode::thm47, cfg, 2000,
                                                rng.next_u64());
    const bool pass = r.holds && r.violations == 0;
    return {"oracle-thm47", pass,
            "lhs " + num(r.lhs) + " <= rhs " + num(r.rhs) + ", cov violations " +
                std::to_string(r.violations)};
}

VerifyItem check_oracle_highcov(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x41c0);
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 8;
    space.prior = DiscreteDistribution::uniform(8);
    // small losses keep E_P e^{-lambda Lhat} above e^{-c}, so the covariance
    // precondition holds on every resample
    for (int t = 0; t < 5; ++t) space.tasks.push_back({50, random_vec(rng, 8, 0.0, 0.05)});
    discrete::OracleConfig cfg;
    cfg.lambdas = Vec(5, 0.5);
    cfg.task = 1;
    cfg.c = 0.1;
    const auto r = discrete::oracle_bound_check(space, discrete::OracleMode::highcov, cfg, 2000,
                                                rng.next_u64());
    const bool pass = r.holds && r.violations == 0;
    return {"oracle-highcov", pass,
            "lhs " + num(r.lhs) + " <= rhs " + num(r.rhs) + ", cov violations " +
                std::to_string(r.violations)};
}

VerifyItem check_oracle_cor42(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x42c0);
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 8;
    space.prior = DiscreteDistribution::uniform(8);
    space.tasks.push_back({50, random_vec(rng, 8, 0.05, 0.95)});
    space.tasks.push_back({50, random_vec(rng, 8, 0.05, 0.95)});
    discrete::OracleConfig cfg;
    cfg.lambdas = {1.0, 1.0};
    cfg.source_task = 0;
    cfg.target_task = 1;
    const auto r = discrete::oracle_bound_check(space, discrete::OracleMode::cor42, cfg, 2000,
                                                rng.next_u64());
    return {"oracle-cor42", r.holds, "lhs " + num(r.lhs) + " <= rhs " + num(r.rhs)};
}

VerifyItem check_oracle_gibbs_ratio(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x9672);
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 8;
    space.prior = DiscreteDistribution::uniform(8);
    for (int t = 0; t < 4; ++t) space.tasks.push_back({50, random_vec(rng, 8, 0.05, 0.95)});
    discrete::OracleConfig cfg;
    cfg.lambdas = Vec(4, 1.0);
    cfg.task = 1;
    const auto r = discrete::oracle_bound_check(space, discrete::OracleMode::gibbs_ratio, cfg,
                                                1000, rng.next_u64());
    return {"oracle-gibbs-ratio", r.holds, "lhs " + num(r.lhs) + " <= rhs " + num(r.rhs)};
}

VerifyItem check_degenerate_space(std::uint64_t seed) {
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 1;
    space.prior = DiscreteDistribution::uniform(1);
    // a perfect hypothesis: every mode's precondition and bound hold exactly
    for (int t = 0; t < 3; ++t) space.tasks.push_back({10, {0.0}});
    discrete::OracleConfig cfg;
    cfg.lambdas = Vec(3, 1.0);
    cfg.task = 0;
    cfg.source_task = 0;
    cfg.target_task = 1;
    bool pass = true;
    for (auto mode : {discrete::OracleMode::cor42, discrete::OracleMode::thm47,
                      discrete::OracleMode::highcov, discrete::OracleMode::gibbs_ratio}) {
        const auto r = discrete::oracle_bound_check(space, mode, cfg, 200, seed);
        pass = pass && r.holds;
    }
    return {"oracle-degenerate", pass, "single-hypothesis space, all modes"};
}

VerifyItem check_gradients(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 0x96ad);
    const double h = 1e-5;
    double worst = 0.0;
    for (int a = 0; a < 20; ++a) {
        MlpArchitecture arch;
        arch.input_dim = 2 + rng.below(4);
        if (rng.uniform() < 0.7) arch.hidden_dims = {3 + rng.below(4)};
        arch.n_tasks = 1 + rng.below(2);
        arch.classes_per_task = 2 + rng.below(2);
        const std::size_t task = rng.below(arch.n_tasks);

        const std::size_t batch = 5;
        Matrix x(batch, arch.input_dim);
        std::vector<int> y(batch);
        for (std::size_t r = 0; r < batch; ++r) {
            for (std::size_t c = 0; c < arch.input_dim; ++c) x(r, c) = rng.normal();
            y[r] = static_cast<int>(rng.below(arch.classes_per_task));
        }

        Vec params = init_params(arch, rng.next_u64());
        const BackwardResult back = mlp_backward(params, arch, task, x, y);
        for (std::size_t j = 0; j < params.size(); ++j) {
            const double orig = params[j];
            params[j] = orig + h;
            const double lp = mlp_backward(params, arch, task, x, y).loss;
            params[j] = orig - h;
            const double lm = mlp_backward(params, arch, task, x, y).loss;
            params[j] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double rel = std::abs(fd - back.grad[j]) /
                               (std::abs(fd) + std::abs(back.grad[j]) + 1e-6);
            worst = std::max(worst, rel);
        }
    }
    return {"gradient-fd", worst < 1e-4, "20 architectures, max relative error " + num(worst)};
}

}  // namespace

bool VerifyReport::all_pass() const {
    for (const VerifyItem& i : items)
        if (!i.pass) return false;
    return true;
}

std::string VerifyReport::to_text() const {
    std::string out;
    for (const VerifyItem& i : items)
        out += std::string(i.pass ? "PASS " : "FAIL ") + i.name + ": " + i.detail + "\n";
    out += all_pass() ? "verify: all checks passed\n" : "verify: FAILURES present\n";
    return out;
}

VerifyReport verify_suite(VerifyScope scope, std::uint64_t seed) {
    VerifyReport rep;
    const bool lemmas = scope == VerifyScope::all || scope == VerifyScope::lemmas;
    const bool oracle = scope == VerifyScope::all || scope == VerifyScope::oracle;
    const bool gradients = scope == VerifyScope::all || scope == VerifyScope::gradients;

    if (lemmas) {
        rep.items.push_back(check_change_of_measure(seed));
        rep.items.push_back(check_thm31(seed));
        rep.items.push_back(check_hoeffding(seed));
    }
    if (oracle) {
        rep.items.push_back(check_gibbs_optimality(seed));
        rep.items.push_back(check_sequential_pooled(seed));
        rep.items.push_back(check_oracle_thm47(seed));
        rep.items.push_back(check_oracle_highcov(seed));
        rep.items.push_back(check_oracle_cor42(seed));
        rep.items.push_back(check_oracle_gibbs_ratio(seed));
        rep.items.push_back(check_degenerate_space(seed));
    }
    if (gradients) rep.items.push_back(check_gradients(seed));
    return rep;
}

}  // namespace cfb::harness
