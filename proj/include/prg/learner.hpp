#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "prg/datagen.hpp"
#include "prg/guidance.hpp"
#include "prg/matrix.hpp"
#include "prg/rng.hpp"
#include "prg/tracking.hpp"

namespace prg {

enum class GuidanceMode { kNone, kPrg, kPrgLast, kConfidenceOnly, kDistributionAlignment };

std::string to_string(GuidanceMode m);
GuidanceMode guidance_mode_from_string(const std::string& s);

struct LearnerConfig {
    double tau = 0.95;
    double lambda_u = 1.0;
    int b_labeled = 16;
    int mu = 7;  // B_U = mu * B
    double lr = 0.03;
    double beta = 0.9;
    double weight_decay = 0.0005;
    int n_b = 128;
    double alpha = 1.0;
    unsigned steps = 1;
    GuidanceMode mode = GuidanceMode::kNone;
    bool rescale_eq6 = true;
    int hidden = 64;
    long max_iterations = 20000;
    long eval_every = 1000;
    std::uint64_t seed = 0;
    // Sensitivity switches; defaults follow the main reading.
    bool threshold_on_raw = false;
    bool track_raw_argmax = false;
    bool count_post_threshold = false;
    bool soft_pseudo_labels = false;
    bool renormalize_rows = false;

    int batch_unlabeled() const { return mu * b_labeled; }
    void validate() const;
};

struct AugmentationConfig {
    double weak_sigma = 0.1;
    double strong_sigma = 0.5;
    double strong_drop_fraction = 0.2;
    void validate() const;
};

/// input -> hidden -> hidden -> k MLP with ReLU; weights row-major [out][in].
struct MlpModel {
    int in = 0, hidden = 0, k = 0;
    std::vector<double> w1, b1, w2, b2, w3, b3;

    static MlpModel init(int in, int hidden, int k, StreamRng& rng);
    std::size_t param_count() const;
};

/// Softmax output of the network, max-stabilized.
ProbVector forward(const MlpModel& model, const std::vector<double>& features);

struct Gradients {
    std::vector<double> w1, b1, w2, b2, w3, b3;
    static Gradients zeros_like(const MlpModel& m);
};

/// Heavy-ball SGD: v <- beta*v + g + w*theta; theta <- theta - lr*v.
/// Throws on non-finite gradients.
void sgd_step(MlpModel& model, const Gradients& grads, Gradients& momentum, double lr_t,
              double beta, double weight_decay);

struct LossBundle {
    double labeled_loss = 0.0;
    double unlabeled_loss = 0.0;
    std::vector<ProbVector> p_tilde;             // per unlabeled sample
    std::vector<std::pair<int, int>> events;     // class transitions
    std::vector<int> assigned;                   // tallied class predictions
    std::vector<bool> accepted_mask;             // per unlabeled sample
    ProbVector mean_weak_p;                      // batch mean of raw weak-view predictions
    int accepted = 0;                            // samples passing tau
    int fallback_count = 0;                      // degenerate Hadamard products
};

struct TrainState {
    MlpModel model;
    Gradients momentum;
    LabelBank bank;
    TrackingWindow window;
    // Rolling per-batch means of the raw weak-view predictions over the
    // last n_b batches; the running distribution for alignment.
    std::deque<ProbVector> prediction_history;
    long iteration = 0;
    StreamRng batch_rng;
    StreamRng aug_rng;
    long fallback_total = 0;

    TrainState(const Dataset& dataset, const LearnerConfig& config);
};

/// FixMatch-style loss of one mini-batch pair. The weak-view prediction on
/// unlabeled data is detached (no gradient flows through the pseudo-label).
/// When `grads` is non-null, gradients of L_L + lambda_u * L_U are
/// accumulated into it.
LossBundle compute_losses(const MlpModel& model,
                          const std::vector<const LabeledSample*>& labeled_batch,
                          const std::vector<std::vector<double>>& labeled_views,
                          const std::vector<const UnlabeledSample*>& unlabeled_batch,
                          const std::vector<std::vector<double>>& weak_views,
                          const std::vector<std::vector<double>>& strong_views,
                          const LearnerConfig& config,
                          const std::optional<RescaledTransitionMatrix>& guidance,
                          const ProbVector* da_prior, const ProbVector* da_running,
                          LabelBank& bank, Gradients* grads);

struct IterationLog {
    long iteration = 0;
    double labeled_loss = 0.0;
    double unlabeled_loss = 0.0;
    double accepted_fraction = 0.0;
    double lr = 0.0;
    std::vector<int> assigned;  // hard labels tallied this iteration
};

/// One full training step per the main loop: guidance snapshot, batch
/// draw, losses, window push, SGD update.
IterationLog train_iteration(TrainState& state, const Dataset& dataset, const LearnerConfig& config,
                             const AugmentationConfig& aug);

/// Guidance snapshot used for the coming iteration; empty during warm-up
/// or in modes that do not consume the transition matrix.
std::optional<RescaledTransitionMatrix> guidance_snapshot(const TrackingWindow& window,
                                                          const LearnerConfig& config);

/// Labeled-set class prior (used by distribution alignment).
ProbVector labeled_prior(const Dataset& dataset);

/// Mean of the stored per-batch prediction means; empty input gives an
/// empty vector (alignment stays off during warm-up).
ProbVector running_prediction_mean(const std::deque<ProbVector>& history);

double cosine_lr(double lr0, long iteration, long max_iterations);

}  // namespace prg
