#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prg/datagen.hpp"
#include "prg/learner.hpp"
#include "prg/metrics.hpp"

namespace prg {

struct ExperimentConfig {
    SyntheticSpec synthetic;
    MnarSpec mnar;
    LearnerConfig learner;
    AugmentationConfig augmentation;
    std::vector<std::uint64_t> seeds{1};

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::string& path);

    /// Stable digest of the canonical serialized config.
    std::string hash() const;

    bool operator==(const ExperimentConfig&) const = default;
};

bool operator==(const SyntheticSpec&, const SyntheticSpec&);
bool operator==(const MnarSpec&, const MnarSpec&);
bool operator==(const LearnerConfig&, const LearnerConfig&);
bool operator==(const AugmentationConfig&, const AugmentationConfig&);

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> files;
    double duration_seconds = 0.0;
    MetricRecord final_record;
    std::string out_dir;
};

/// Executes one full run: dataset generation, training loop, metrics.csv,
/// periodic tracking dumps, manifest.json and final_report.json under out_dir.
RunManifest run(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir);

struct SweepCellResult {
    std::string label;
    std::vector<double> final_accuracy;  // one per completed seed
    std::vector<double> final_gm;
    std::vector<std::string> failures;   // error messages of failed seeds
};

struct SweepReport {
    std::vector<SweepCellResult> cells;
    std::string to_json() const;
};

/// Runs the cross product of grid x seeds. The grid is a JSON object
/// mapping learner parameter names (alpha, n_b, steps, mode, tau,
/// lambda_u, lr, rescale_eq6) to value arrays. Failed cells are recorded
/// and remaining cells complete. Parallelism is capped by PRG_THREADS.
SweepReport sweep(const ExperimentConfig& config, const std::string& grid_json,
                  const std::vector<std::uint64_t>& seeds, const std::string& out_dir);

/// Reruns the manifest's run into a scratch directory and compares
/// metrics.csv byte-for-byte. Returns true on an exact match.
bool replay(const std::string& manifest_path);

}  // namespace prg
