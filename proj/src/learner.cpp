#include "prg/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prg {

std::string to_string(GuidanceMode m) {
    switch (m) {
        case GuidanceMode::kNone: return "none";
        case GuidanceMode::kPrg: return "prg";
        case GuidanceMode::kPrgLast: return "prg_last";
        case GuidanceMode::kConfidenceOnly: return "confidence_only";
        case GuidanceMode::kDistributionAlignment: return "distribution_alignment";
    }
    throw std::logic_error("unknown guidance mode");
}

GuidanceMode guidance_mode_from_string(const std::string& s) {
    if (s == "none") return GuidanceMode::kNone;
    if (s == "prg") return GuidanceMode::kPrg;
    if (s == "prg_last") return GuidanceMode::kPrgLast;
    if (s == "confidence_only") return GuidanceMode::kConfidenceOnly;
    if (s == "distribution_alignment") return GuidanceMode::kDistributionAlignment;
    throw std::invalid_argument("unknown guidance mode: " + s);
}

void LearnerConfig::validate() const {
    if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("tau must be in (0,1]");
    if (lambda_u < 0.0) throw std::invalid_argument("lambda_u must be >= 0");
    if (mu < 1) throw std::invalid_argument("mu must be >= 1");
    if (b_labeled < 1) throw std::invalid_argument("b_labeled must be >= 1");
    if (lr <= 0.0) throw std::invalid_argument("lr must be > 0");
    if (beta < 0.0 || beta >= 1.0) throw std::invalid_argument("beta must be in [0,1)");
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
    if (n_b < 1) throw std::invalid_argument("n_b must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
}

void AugmentationConfig::validate() const {
    if (weak_sigma < 0.0 || strong_sigma <= weak_sigma)
        throw std::invalid_argument("need 0 <= weak_sigma < strong_sigma");
    if (strong_drop_fraction < 0.0 || strong_drop_fraction >= 1.0)
        throw std::invalid_argument("drop fraction must be in [0,1)");
}

MlpModel MlpModel::init(int in, int hidden, int k, StreamRng& rng) {
    MlpModel m;
    m.in = in;
    m.hidden = hidden;
    m.k = k;
    auto he = [&](std::vector<double>& w, int fan_out, int fan_in) {
        w.resize(static_cast<std::size_t>(fan_out) * fan_in);
        const double scale = std::sqrt(2.0 / fan_in);
        for (double& v : w) v = scale * rng.next_gaussian();
    };
    he(m.w1, hidden, in);
    he(m.w2, hidden, hidden);
    he(m.w3, k, hidden);
    m.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    m.b2.assign(static_cast<std::size_t>(hidden), 0.0);
    m.b3.assign(static_cast<std::size_t>(k), 0.0);
    return m;
}

std::size_t MlpModel::param_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

namespace {

struct ForwardCache {
    std::vector<double> h1, h2, p;
};

void affine_relu(const std::vector<double>& w, const std::vector<double>& b,
                 const std::vector<double>& x, std::vector<double>& out) {
    const std::size_t rows = b.size();
    const std::size_t cols = x.size();
    out.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double* wr = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        out[r] = acc > 0.0 ? acc : 0.0;
    }
}

void softmax_logits(const std::vector<double>& w, const std::vector<double>& b,
                    const std::vector<double>& x, std::vector<double>& p) {
    const std::size_t rows = b.size();
    const std::size_t cols = x.size();
    p.resize(rows);
    double mx = -1e300;
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double* wr = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        p[r] = acc;
        mx = std::max(mx, acc);
    }
    double sum = 0.0;
    for (double& v : p) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : p) v /= sum;
}

ForwardCache forward_cached(const MlpModel& m, const std::vector<double>& x) {
    if (x.size() != static_cast<std::size_t>(m.in)) throw std::invalid_argument("feature dimension mismatch");
    ForwardCache c;
    affine_relu(m.w1, m.b1, x, c.h1);
    affine_relu(m.w2, m.b2, c.h1, c.h2);
    softmax_logits(m.w3, m.b3, c.h2, c.p);
    return c;
}

// Accumulates gradients for one sample given dL/dlogits.
void backward(const MlpModel& m, const std::vector<double>& x, const ForwardCache& c,
              const std::vector<double>& dlogits, Gradients& g) {
    const std::size_t in = static_cast<std::size_t>(m.in);
    const std::size_t hidden = static_cast<std::size_t>(m.hidden);
    const std::size_t k = static_cast<std::size_t>(m.k);

    std::vector<double> dh2(hidden, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        const double d = dlogits[r];
        if (d == 0.0) continue;
        g.b3[r] += d;
        double* gw = g.w3.data() + r * hidden;
        const double* wr = m.w3.data() + r * hidden;
        for (std::size_t cix = 0; cix < hidden; ++cix) {
            gw[cix] += d * c.h2[cix];
            dh2[cix] += d * wr[cix];
        }
    }
    for (std::size_t r = 0; r < hidden; ++r)
        if (c.h2[r] <= 0.0) dh2[r] = 0.0;

    std::vector<double> dh1(hidden, 0.0);
    for (std::size_t r = 0; r < hidden; ++r) {
        const double d = dh2[r];
        if (d == 0.0) continue;
        g.b2[r] += d;
        double* gw = g.w2.data() + r * hidden;
        const double* wr = m.w2.data() + r * hidden;
        for (std::size_t cix = 0; cix < hidden; ++cix) {
            gw[cix] += d * c.h1[cix];
            dh1[cix] += d * wr[cix];
        }
    }
    for (std::size_t r = 0; r < hidden; ++r)
        if (c.h1[r] <= 0.0) dh1[r] = 0.0;

    for (std::size_t r = 0; r < hidden; ++r) {
        const double d = dh1[r];
        if (d == 0.0) continue;
        g.b1[r] += d;
        double* gw = g.w1.data() + r * in;
        for (std::size_t cix = 0; cix < in; ++cix) gw[cix] += d * x[cix];
    }
}

double cross_entropy(const std::vector<double>& p, const std::vector<double>& target) {
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (target[i] > 0.0) loss -= target[i] * std::log(std::max(p[i], 1e-300));
    return loss;
}

}  // namespace

ProbVector forward(const MlpModel& model, const std::vector<double>& features) {
    return forward_cached(model, features).p;
}

Gradients Gradients::zeros_like(const MlpModel& m) {
    Gradients g;
    g.w1.assign(m.w1.size(), 0.0);
    g.b1.assign(m.b1.size(), 0.0);
    g.w2.assign(m.w2.size(), 0.0);
    g.b2.assign(m.b2.size(), 0.0);
    g.w3.assign(m.w3.size(), 0.0);
    g.b3.assign(m.b3.size(), 0.0);
    return g;
}

void sgd_step(MlpModel& model, const Gradients& grads, Gradients& momentum, double lr_t,
              double beta, double weight_decay) {
    auto update = [&](std::vector<double>& theta, const std::vector<double>& g, std::vector<double>& v) {
        if (theta.size() != g.size() || theta.size() != v.size())
            throw std::invalid_argument("sgd_step shape mismatch");
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (!std::isfinite(g[i])) throw std::runtime_error("non-finite gradient encountered");
            v[i] = beta * v[i] + g[i] + weight_decay * theta[i];
            theta[i] -= lr_t * v[i];
        }
    };
    update(model.w1, grads.w1, momentum.w1);
    update(model.b1, grads.b1, momentum.b1);
    update(model.w2, grads.w2, momentum.w2);
    update(model.b2, grads.b2, momentum.b2);
    update(model.w3, grads.w3, momentum.w3);
    update(model.b3, grads.b3, momentum.b3);
}

TrainState::TrainState(const Dataset& dataset, const LearnerConfig& config)
    : model(),
      momentum(),
      bank(dataset.unlabeled.size(), dataset.k),
      window(config.n_b, dataset.k),
      batch_rng(config.seed, "batch"),
      aug_rng(config.seed, "aug") {
    config.validate();
    StreamRng init_rng(config.seed, "init");
    model = MlpModel::init(dataset.dim, config.hidden, dataset.k, init_rng);
    momentum = Gradients::zeros_like(model);
}

std::optional<RescaledTransitionMatrix> guidance_snapshot(const TrackingWindow& window,
                                                          const LearnerConfig& config) {
    if (config.mode != GuidanceMode::kPrg && config.mode != GuidanceMode::kPrgLast)
        return std::nullopt;
    if (window.empty()) return std::nullopt;  // warm-up: no guidance yet
    TransitionMatrix h = build_transition_matrix(window.averaged_matrix(), config.alpha);
    if (config.renormalize_rows) {
        for (std::size_t i = 0; i < h.rows.dim(); ++i) {
            const double s = h.rows.row_sum(i);
            if (s > 0.0)
                for (std::size_t j = 0; j < h.rows.dim(); ++j) h.rows.at(i, j) /= s;
        }
    }
    if (config.rescale_eq6) return class_rescale(h, window.averaged_counts());
    return RescaledTransitionMatrix{std::move(h.rows)};
}

ProbVector labeled_prior(const Dataset& dataset) {
    ProbVector prior(dataset.class_counts_labeled.begin(), dataset.class_counts_labeled.end());
    normalize(prior);
    return prior;
}

ProbVector running_prediction_mean(const std::deque<ProbVector>& history) {
    if (history.empty()) return {};
    ProbVector mean(history.front().size(), 0.0);
    const double inv = 1.0 / static_cast<double>(history.size());
    for (const ProbVector& p : history)
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += p[i] * inv;
    return mean;
}

double cosine_lr(double lr0, long iteration, long max_iterations) {
    if (max_iterations <= 0) return lr0;
    const double t = static_cast<double>(iteration) / static_cast<double>(max_iterations);
    return lr0 * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
}

LossBundle compute_losses(const MlpModel& model,
                          const std::vector<const LabeledSample*>& labeled_batch,
                          const std::vector<std::vector<double>>& labeled_views,
                          const std::vector<const UnlabeledSample*>& unlabeled_batch,
                          const std::vector<std::vector<double>>& weak_views,
                          const std::vector<std::vector<double>>& strong_views,
                          const LearnerConfig& config,
                          const std::optional<RescaledTransitionMatrix>& guidance,
                          const ProbVector* da_prior, const ProbVector* da_running,
                          LabelBank& bank, Gradients* grads) {
    if (labeled_batch.empty()) throw std::invalid_argument("empty labeled batch");
    const std::size_t k = static_cast<std::size_t>(model.k);
    LossBundle out;

    const double inv_b = 1.0 / static_cast<double>(labeled_batch.size());
    std::vector<double> dlogits(k);
    for (std::size_t b = 0; b < labeled_batch.size(); ++b) {
        ForwardCache c = forward_cached(model, labeled_views[b]);
        const int y = labeled_batch[b]->label;
        out.labeled_loss += -std::log(std::max(c.p[static_cast<std::size_t>(y)], 1e-300)) * inv_b;
        if (grads) {
            for (std::size_t i = 0; i < k; ++i) dlogits[i] = c.p[i] * inv_b;
            dlogits[static_cast<std::size_t>(y)] -= inv_b;
            backward(model, labeled_views[b], c, dlogits, *grads);
        }
    }

    const std::size_t bu = unlabeled_batch.size();
    const double inv_bu = bu > 0 ? 1.0 / static_cast<double>(bu) : 0.0;
    out.p_tilde.reserve(bu);
    out.mean_weak_p.assign(k, 0.0);
    for (std::size_t b = 0; b < bu; ++b) {
        // Weak view: prediction only, detached from the gradient path.
        ProbVector p = forward(model, weak_views[b]);
        for (std::size_t i = 0; i < k; ++i) out.mean_weak_p[i] += p[i] * inv_bu;
        const std::size_t raw_top = argmax(p);
        const std::size_t idx = static_cast<std::size_t>(unlabeled_batch[b]->index);

        ProbVector p_tilde = p;
        bool excluded = false;
        switch (config.mode) {
            case GuidanceMode::kNone:
                break;
            case GuidanceMode::kPrg:
                if (guidance) {
                    RescaleResult r = prg_rescale(p, raw_top, *guidance, config.steps);
                    if (r.fell_back) ++out.fallback_count;
                    p_tilde = std::move(r.p);
                }
                break;
            case GuidanceMode::kPrgLast:
                // Guidance uses the bank entry from before this batch's update.
                if (guidance && bank.assigned(idx)) {
                    RescaleResult r = prg_rescale(p, static_cast<std::size_t>(bank.label(idx)),
                                                  *guidance, config.steps);
                    if (r.fell_back) ++out.fallback_count;
                    p_tilde = std::move(r.p);
                }
                break;
            case GuidanceMode::kConfidenceOnly: {
                RectifyingWeights w = confidence_eta(p, config.tau);
                excluded = w.excluded;
                if (!excluded) {
                    RescaleResult r = eta_rescale(p, w);
                    if (r.fell_back) ++out.fallback_count;
                    p_tilde = std::move(r.p);
                }
                break;
            }
            case GuidanceMode::kDistributionAlignment:
                if (da_prior && da_running) {
                    RectifyingWeights w = distribution_alignment_eta(*da_prior, *da_running);
                    RescaleResult r = eta_rescale(p, w);
                    if (r.fell_back) ++out.fallback_count;
                    p_tilde = std::move(r.p);
                }
                break;
        }

        const std::size_t hard = argmax(p_tilde);
        const double confidence = config.threshold_on_raw ? p[raw_top] : p_tilde[hard];
        const bool accepted = !excluded && confidence >= config.tau;

        const int tracked = config.track_raw_argmax ? static_cast<int>(raw_top) : static_cast<int>(hard);
        if (auto ev = bank.observe(idx, tracked)) out.events.push_back(*ev);
        if (!config.count_post_threshold || accepted) out.assigned.push_back(tracked);
        out.accepted_mask.push_back(accepted);

        if (accepted) {
            ++out.accepted;
            ForwardCache c = forward_cached(model, strong_views[b]);
            std::vector<double> target(k, 0.0);
            if (config.soft_pseudo_labels)
                target = p_tilde;
            else
                target[hard] = 1.0;
            out.unlabeled_loss += cross_entropy(c.p, target) * inv_bu;
            if (grads) {
                const double scale = config.lambda_u * inv_bu;
                for (std::size_t i = 0; i < k; ++i) dlogits[i] = scale * (c.p[i] - target[i]);
                backward(model, strong_views[b], c, dlogits, *grads);
            }
        }
        out.p_tilde.push_back(std::move(p_tilde));
    }
    return out;
}

IterationLog train_iteration(TrainState& state, const Dataset& dataset, const LearnerConfig& config,
                             const AugmentationConfig& aug) {
    aug.validate();
    const int b = config.b_labeled;
    const int bu = config.batch_unlabeled();

    const std::optional<RescaledTransitionMatrix> guidance = guidance_snapshot(state.window, config);

    // Distribution alignment runs against the rolling mean of raw
    // weak-view predictions, FixMatch-style.
    ProbVector prior, running;
    const ProbVector* prior_ptr = nullptr;
    const ProbVector* running_ptr = nullptr;
    if (config.mode == GuidanceMode::kDistributionAlignment && !state.prediction_history.empty()) {
        prior = labeled_prior(dataset);
        running = running_prediction_mean(state.prediction_history);
        prior_ptr = &prior;
        running_ptr = &running;
    }

    std::vector<const LabeledSample*> labeled_batch(static_cast<std::size_t>(b));
    std::vector<std::vector<double>> labeled_views(static_cast<std::size_t>(b));
    for (int i = 0; i < b; ++i)
        labeled_batch[static_cast<std::size_t>(i)] =
            &dataset.labeled[state.batch_rng.next_below(dataset.labeled.size())];
    std::vector<const UnlabeledSample*> unlabeled_batch(static_cast<std::size_t>(bu));
    for (int i = 0; i < bu; ++i)
        unlabeled_batch[static_cast<std::size_t>(i)] =
            &dataset.unlabeled[state.batch_rng.next_below(dataset.unlabeled.size())];

    auto noisy = [&](const std::vector<double>& x, double sigma) {
        std::vector<double> v(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i] + sigma * state.aug_rng.next_gaussian();
        return v;
    };
    for (int i = 0; i < b; ++i)
        labeled_views[static_cast<std::size_t>(i)] =
            noisy(labeled_batch[static_cast<std::size_t>(i)]->features, aug.weak_sigma);
    std::vector<std::vector<double>> weak_views(static_cast<std::size_t>(bu));
    std::vector<std::vector<double>> strong_views(static_cast<std::size_t>(bu));
    for (int i = 0; i < bu; ++i) {
        const auto& x = unlabeled_batch[static_cast<std::size_t>(i)]->features;
        weak_views[static_cast<std::size_t>(i)] = noisy(x, aug.weak_sigma);
        auto strong = noisy(x, aug.strong_sigma);
        for (double& f : strong)
            if (state.aug_rng.next_double() < aug.strong_drop_fraction) f = 0.0;
        strong_views[static_cast<std::size_t>(i)] = std::move(strong);
    }

    Gradients grads = Gradients::zeros_like(state.model);
    LossBundle losses = compute_losses(state.model, labeled_batch, labeled_views, unlabeled_batch,
                                       weak_views, strong_views, config, guidance, prior_ptr,
                                       running_ptr, state.bank, &grads);
    state.fallback_total += losses.fallback_count;

    if (config.mode == GuidanceMode::kDistributionAlignment && bu > 0) {
        state.prediction_history.push_back(losses.mean_weak_p);
        while (state.prediction_history.size() > static_cast<std::size_t>(config.n_b))
            state.prediction_history.pop_front();
    }

    std::vector<int> assigned_copy = losses.assigned;
    auto [batch_matrix, tally] = finalize_batch(losses.events, losses.assigned, dataset.k);
    state.window.push(std::move(batch_matrix), std::move(tally));

    const double lr_t = cosine_lr(config.lr, state.iteration, config.max_iterations);
    sgd_step(state.model, grads, state.momentum, lr_t, config.beta, config.weight_decay);

    IterationLog log;
    log.iteration = state.iteration++;
    log.labeled_loss = losses.labeled_loss;
    log.unlabeled_loss = losses.unlabeled_loss;
    log.accepted_fraction = bu > 0 ? static_cast<double>(losses.accepted) / bu : 0.0;
    log.lr = lr_t;
    log.assigned = std::move(assigned_copy);
    return log;
}

}  // namespace prg
