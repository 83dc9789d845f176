#include "prg/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace prg {

namespace {

json to_json(const SyntheticSpec& s) {
    return json{{"k", s.k},
                {"dim", s.dim},
                {"per_class_pool", s.per_class_pool},
                {"pair_near_distance", s.pair_near_distance},
                {"far_distance", s.far_distance},
                {"noise_sigma", s.noise_sigma},
                {"n_test_per_class", s.n_test_per_class}};
}

SyntheticSpec synthetic_from_json(const json& j) {
    SyntheticSpec s;
    s.k = j.value("k", s.k);
    s.dim = j.value("dim", s.dim);
    s.per_class_pool = j.value("per_class_pool", s.per_class_pool);
    s.pair_near_distance = j.value("pair_near_distance", s.pair_near_distance);
    s.far_distance = j.value("far_distance", s.far_distance);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.n_test_per_class = j.value("n_test_per_class", s.n_test_per_class);
    return s;
}

json to_json(const MnarSpec& m) {
    json j{{"protocol", to_string(m.protocol)},
           {"k", m.k},
           {"gamma", m.gamma},
           {"n_labeled", m.n_labeled},
           {"n1_labeled", m.n1_labeled},
           {"gamma_l", m.gamma_l},
           {"m1_unlabeled", m.m1_unlabeled},
           {"unlabeled_reversed", m.unlabeled_reversed},
           {"rounding", m.rounding == Rounding::kRound ? "round" : "floor"}};
    if (m.gamma_u) j["gamma_u"] = *m.gamma_u;
    return j;
}

MnarSpec mnar_from_json(const json& j) {
    MnarSpec m;
    m.protocol = protocol_from_string(j.value("protocol", "cadr"));
    m.k = j.value("k", m.k);
    m.gamma = j.value("gamma", m.gamma);
    m.n_labeled = j.value("n_labeled", m.n_labeled);
    m.n1_labeled = j.value("n1_labeled", m.n1_labeled);
    m.gamma_l = j.value("gamma_l", m.gamma_l);
    if (j.contains("gamma_u") && !j["gamma_u"].is_null()) m.gamma_u = j["gamma_u"].get<double>();
    m.m1_unlabeled = j.value("m1_unlabeled", m.m1_unlabeled);
    m.unlabeled_reversed = j.value("unlabeled_reversed", m.unlabeled_reversed);
    m.rounding = j.value("rounding", "round") == "floor" ? Rounding::kFloor : Rounding::kRound;
    return m;
}

json to_json(const LearnerConfig& c) {
    return json{{"tau", c.tau},
                {"lambda_u", c.lambda_u},
                {"b_labeled", c.b_labeled},
                {"mu", c.mu},
                {"lr", c.lr},
                {"beta", c.beta},
                {"weight_decay", c.weight_decay},
                {"n_b", c.n_b},
                {"alpha", c.alpha},
                {"steps", c.steps},
                {"mode", to_string(c.mode)},
                {"rescale_eq6", c.rescale_eq6},
                {"hidden", c.hidden},
                {"max_iterations", c.max_iterations},
                {"eval_every", c.eval_every},
                {"seed", c.seed},
                {"threshold_on_raw", c.threshold_on_raw},
                {"track_raw_argmax", c.track_raw_argmax},
                {"count_post_threshold", c.count_post_threshold},
                {"soft_pseudo_labels", c.soft_pseudo_labels},
                {"renormalize_rows", c.renormalize_rows}};
}

LearnerConfig learner_from_json(const json& j) {
    LearnerConfig c;
    c.tau = j.value("tau", c.tau);
    c.lambda_u = j.value("lambda_u", c.lambda_u);
    c.b_labeled = j.value("b_labeled", c.b_labeled);
    c.mu = j.value("mu", c.mu);
    c.lr = j.value("lr", c.lr);
    c.beta = j.value("beta", c.beta);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.n_b = j.value("n_b", c.n_b);
    c.alpha = j.value("alpha", c.alpha);
    c.steps = j.value("steps", c.steps);
    c.mode = guidance_mode_from_string(j.value("mode", "none"));
    c.rescale_eq6 = j.value("rescale_eq6", c.rescale_eq6);
    c.hidden = j.value("hidden", c.hidden);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.seed = j.value("seed", c.seed);
    c.threshold_on_raw = j.value("threshold_on_raw", c.threshold_on_raw);
    c.track_raw_argmax = j.value("track_raw_argmax", c.track_raw_argmax);
    c.count_post_threshold = j.value("count_post_threshold", c.count_post_threshold);
    c.soft_pseudo_labels = j.value("soft_pseudo_labels", c.soft_pseudo_labels);
    c.renormalize_rows = j.value("renormalize_rows", c.renormalize_rows);
    return c;
}

json to_json(const AugmentationConfig& a) {
    return json{{"weak_sigma", a.weak_sigma},
                {"strong_sigma", a.strong_sigma},
                {"strong_drop_fraction", a.strong_drop_fraction}};
}

AugmentationConfig augmentation_from_json(const json& j) {
    AugmentationConfig a;
    a.weak_sigma = j.value("weak_sigma", a.weak_sigma);
    a.strong_sigma = j.value("strong_sigma", a.strong_sigma);
    a.strong_drop_fraction = j.value("strong_drop_fraction", a.strong_drop_fraction);
    return a;
}

json config_to_json(const ExperimentConfig& c) {
    return json{{"synthetic", to_json(c.synthetic)},
                {"mnar", to_json(c.mnar)},
                {"learner", to_json(c.learner)},
                {"augmentation", to_json(c.augmentation)},
                {"seeds", c.seeds}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("synthetic")) c.synthetic = synthetic_from_json(j["synthetic"]);
    if (j.contains("mnar")) c.mnar = mnar_from_json(j["mnar"]);
    if (j.contains("learner")) c.learner = learner_from_json(j["learner"]);
    if (j.contains("augmentation")) c.augmentation = augmentation_from_json(j["augmentation"]);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    return c;
}

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

void write_tracking_csv(const SquareMatrix& c, const fs::path& path) {
    std::ofstream out(path);
    char buf[64];
    for (std::size_t i = 0; i < c.dim(); ++i) {
        for (std::size_t j = 0; j < c.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.6f", c.at(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

MetricRecord evaluate(const TrainState& state, const Dataset& dataset, const LearnerConfig& config,
                      long iteration) {
    MetricRecord rec;
    rec.iteration = iteration;

    ConfusionMatrix test_confusion(dataset.k);
    for (const auto& s : dataset.test)
        test_confusion.add(s.label, static_cast<int>(argmax(forward(state.model, s.features))));
    rec.test_accuracy = accuracy(test_confusion);
    const PrecisionRecall pr = per_class_precision_recall(test_confusion);
    rec.precision = pr.precision;
    rec.recall = pr.recall;
    rec.gm = gm_score(pr.recall);

    const auto guidance = guidance_snapshot(state.window, config);
    ProbVector prior, running;
    bool have_da = false;
    if (config.mode == GuidanceMode::kDistributionAlignment && !state.prediction_history.empty()) {
        prior = labeled_prior(dataset);
        running = running_prediction_mean(state.prediction_history);
        have_da = true;
    }

    std::vector<int> hidden, pseudo;
    int accepted = 0;
    for (const auto& s : dataset.unlabeled) {
        ProbVector p = forward(state.model, s.features);
        const std::size_t raw_top = argmax(p);
        ProbVector p_tilde = p;
        bool excluded = false;
        switch (config.mode) {
            case GuidanceMode::kNone:
                break;
            case GuidanceMode::kPrg:
                if (guidance) p_tilde = prg_rescale(p, raw_top, *guidance, config.steps).p;
                break;
            case GuidanceMode::kPrgLast:
                if (guidance && state.bank.assigned(static_cast<std::size_t>(s.index)))
                    p_tilde = prg_rescale(p, static_cast<std::size_t>(state.bank.label(static_cast<std::size_t>(s.index))),
                                          *guidance, config.steps).p;
                break;
            case GuidanceMode::kConfidenceOnly: {
                RectifyingWeights w = confidence_eta(p, config.tau);
                excluded = w.excluded;
                if (!excluded) p_tilde = eta_rescale(p, w).p;
                break;
            }
            case GuidanceMode::kDistributionAlignment:
                if (have_da) p_tilde = eta_rescale(p, distribution_alignment_eta(prior, running)).p;
                break;
        }
        const std::size_t hard = argmax(p_tilde);
        const double confidence = config.threshold_on_raw ? p[raw_top] : p_tilde[hard];
        if (!excluded && confidence >= config.tau) {
            ++accepted;
            hidden.push_back(s.hidden_label);
            pseudo.push_back(static_cast<int>(hard));
        }
    }
    rec.accepted_fraction = dataset.unlabeled.empty()
                                ? 0.0
                                : static_cast<double>(accepted) / static_cast<double>(dataset.unlabeled.size());
    rec.pseudo_error = pseudo_label_error_rates(hidden, pseudo, dataset.k).rates;
    rec.tracking_symmetry = state.window.empty() ? 0.0 : symmetry_score(state.window.averaged_matrix());
    return rec;
}

json record_to_json(const MetricRecord& r) {
    return json{{"iteration", r.iteration},
                {"test_accuracy", r.test_accuracy},
                {"gm", r.gm},
                {"accepted_fraction", r.accepted_fraction},
                {"recall", r.recall},
                {"precision", r.precision},
                {"pseudo_error", r.pseudo_error},
                {"tracking_symmetry", r.tracking_symmetry}};
}

MetricRecord record_from_json(const json& j) {
    MetricRecord r;
    r.iteration = j.value("iteration", 0L);
    r.test_accuracy = j.value("test_accuracy", 0.0);
    r.gm = j.value("gm", 0.0);
    r.accepted_fraction = j.value("accepted_fraction", 0.0);
    if (j.contains("recall")) r.recall = j["recall"].get<std::vector<double>>();
    if (j.contains("precision")) r.precision = j["precision"].get<std::vector<double>>();
    if (j.contains("pseudo_error")) r.pseudo_error = j["pseudo_error"].get<std::vector<double>>();
    r.tracking_symmetry = j.value("tracking_symmetry", 0.0);
    return r;
}

int thread_cap() {
    if (const char* env = std::getenv("PRG_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

}  // namespace

bool operator==(const SyntheticSpec& a, const SyntheticSpec& b) {
    return to_json(a) == to_json(b);
}
bool operator==(const MnarSpec& a, const MnarSpec& b) { return to_json(a) == to_json(b); }
bool operator==(const LearnerConfig& a, const LearnerConfig& b) { return to_json(a) == to_json(b); }
bool operator==(const AugmentationConfig& a, const AugmentationConfig& b) {
    return to_json(a) == to_json(b);
}

std::string ExperimentConfig::to_json() const { return config_to_json(*this).dump(2); }

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    return config_from_json(json::parse(text));
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    return config_from_json(j);
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(config_to_json(*this).dump()); }

RunManifest run(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);

    Dataset dataset;
    LearnerConfig lc = config.learner;
    lc.seed = seed;
    RunManifest manifest;
    manifest.config_hash = config.hash();
    manifest.seed = seed;
    manifest.out_dir = out_dir;

    long iteration = 0;
    try {
        dataset = generate_dataset(config.synthetic, config.mnar, seed);
        TrainState state(dataset, lc);

        std::ofstream metrics(fs::path(out_dir) / "metrics.csv");
        metrics << metrics_csv_header(dataset.k) << '\n';
        manifest.files.push_back("metrics.csv");

        for (iteration = 0; iteration < lc.max_iterations; ++iteration) {
            train_iteration(state, dataset, lc, config.augmentation);
            const long done = iteration + 1;
            if (done % lc.eval_every == 0 || done == lc.max_iterations) {
                manifest.final_record = evaluate(state, dataset, lc, done);
                metrics << metrics_csv_row(manifest.final_record) << '\n';
                if (!state.window.empty()) {
                    const std::string name = "tracking_" + std::to_string(done) + ".csv";
                    write_tracking_csv(state.window.averaged_matrix(), fs::path(out_dir) / name);
                    manifest.files.push_back(name);
                }
            }
        }
        metrics.close();
    } catch (const std::exception& e) {
        throw std::runtime_error("run failed at iteration " + std::to_string(iteration) + ": " + e.what());
    }

    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json mj{{"config_hash", manifest.config_hash},
            {"seed", manifest.seed},
            {"files", manifest.files},
            {"duration_seconds", manifest.duration_seconds},
            {"final", record_to_json(manifest.final_record)},
            {"config", config_to_json(config)}};
    {
        std::ofstream out(fs::path(out_dir) / "manifest.json");
        out << mj.dump(2) << '\n';
    }
    {
        std::ofstream out(fs::path(out_dir) / "final_report.json");
        out << record_to_json(manifest.final_record).dump(2) << '\n';
    }
    return manifest;
}

namespace {

void apply_override(LearnerConfig& lc, const std::string& key, const json& value) {
    if (key == "alpha")
        lc.alpha = value.get<double>();
    else if (key == "n_b")
        lc.n_b = value.get<int>();
    else if (key == "steps")
        lc.steps = value.get<unsigned>();
    else if (key == "mode")
        lc.mode = guidance_mode_from_string(value.get<std::string>());
    else if (key == "tau")
        lc.tau = value.get<double>();
    else if (key == "lambda_u")
        lc.lambda_u = value.get<double>();
    else if (key == "lr")
        lc.lr = value.get<double>();
    else if (key == "rescale_eq6")
        lc.rescale_eq6 = value.get<bool>();
    else
        throw std::invalid_argument("unknown sweep parameter: " + key);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string SweepReport::to_json() const {
    json rows = json::array();
    for (const auto& cell : cells) {
        rows.push_back(json{{"cell", cell.label},
                            {"runs", cell.final_accuracy.size()},
                            {"accuracy_mean", mean(cell.final_accuracy)},
                            {"accuracy_std", stddev(cell.final_accuracy)},
                            {"gm_mean", mean(cell.final_gm)},
                            {"gm_std", stddev(cell.final_gm)},
                            {"failures", cell.failures}});
    }
    return json{{"cells", rows}}.dump(2);
}

SweepReport sweep(const ExperimentConfig& config, const std::string& grid_json,
                  const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
    const json grid = json::parse(grid_json);
    if (!grid.is_object() || grid.empty()) throw std::invalid_argument("sweep grid must be a nonempty object");

    // Cross product of the grid axes, in key order.
    std::vector<std::pair<std::string, json>> axes;
    for (auto it = grid.begin(); it != grid.end(); ++it) {
        if (!it.value().is_array() || it.value().empty())
            throw std::invalid_argument("grid values must be nonempty arrays");
        axes.emplace_back(it.key(), it.value());
    }
    std::vector<std::vector<std::pair<std::string, json>>> cells{{}};
    for (const auto& [key, values] : axes) {
        std::vector<std::vector<std::pair<std::string, json>>> next;
        for (const auto& cell : cells)
            for (const auto& v : values) {
                auto extended = cell;
                extended.emplace_back(key, v);
                next.push_back(std::move(extended));
            }
        cells = std::move(next);
    }

    SweepReport report;
    report.cells.resize(cells.size());
    struct Task {
        std::size_t cell;
        std::uint64_t seed;
        ExperimentConfig config;
        std::string dir;
    };
    std::vector<Task> tasks;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        ExperimentConfig cell_config = config;
        std::string label;
        for (const auto& [key, value] : cells[ci]) {
            apply_override(cell_config.learner, key, value);
            if (!label.empty()) label += ",";
            label += key + "=" + value.dump();
        }
        report.cells[ci].label = label;
        for (std::uint64_t s : seeds) {
            tasks.push_back({ci, s, cell_config,
                             (fs::path(out_dir) / ("cell_" + std::to_string(ci)) /
                              ("seed_" + std::to_string(s))).string()});
        }
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            try {
                RunManifest m = run(task.config, task.seed, task.dir);
                std::lock_guard<std::mutex> lock(mu);
                report.cells[task.cell].final_accuracy.push_back(m.final_record.test_accuracy);
                report.cells[task.cell].final_gm.push_back(m.final_record.gm);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                report.cells[task.cell].failures.push_back("seed " + std::to_string(task.seed) +
                                                           ": " + e.what());
            }
        }
    };
    const int n_threads = std::min<int>(thread_cap(), static_cast<int>(tasks.size()));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << report.to_json() << '\n';
    return report;
}

bool replay(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
    json mj;
    in >> mj;
    const ExperimentConfig config = config_from_json(mj.at("config"));
    const std::uint64_t seed = mj.at("seed").get<std::uint64_t>();
    const fs::path original_dir = fs::path(manifest_path).parent_path();

    const fs::path scratch = original_dir / (".replay_" + std::to_string(seed));
    fs::remove_all(scratch);
    run(config, seed, scratch.string());

    auto read_all = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("missing file for replay: " + p.string());
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    };
    const bool match = read_all(original_dir / "metrics.csv") == read_all(scratch / "metrics.csv");
    fs::remove_all(scratch);
    return match;
}

}  // namespace prg
