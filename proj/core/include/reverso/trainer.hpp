#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reverso/augment.hpp"
#include "reverso/model.hpp"
#include "reverso/rng.hpp"

namespace reverso {

// ---------------------------------------------------------------------------
// AdamW with decoupled weight decay and bias-corrected moments.
// ---------------------------------------------------------------------------

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.1;
};

class AdamW {
public:
    AdamW(std::vector<ParamRef> params, AdamWConfig cfg = AdamWConfig{});

    // One update from the gradients currently stored in the parameters.
    void step(double lr);

    std::uint64_t step_count() const { return step_; }
    OptStateBlob state() const;
    void load_state(const OptStateBlob& blob);  // throws on a size mismatch

private:
    std::vector<ParamRef> params_;
    AdamWConfig cfg_;
    std::vector<double> m_, v_;  // flat, parameter order
    std::uint64_t step_ = 0;
};

// ---------------------------------------------------------------------------
// Warmup-stable-decay schedule: linear 0 -> max_lr over the warmup fraction,
// constant, then linear max_lr -> 0 over the final decay fraction.
// ---------------------------------------------------------------------------

struct ScheduleConfig {
    double max_lr = 5e-4;
    std::size_t total_steps = 1000;
    double warmup_frac = 0.1;
    double decay_frac = 0.1;

    void validate() const;  // fractions >= 0, warmup + decay <= 1, steps >= 1
};

double wsd_lr(std::size_t step, const ScheduleConfig& cfg);

// ---------------------------------------------------------------------------
// Initialization: truncated normal (std 0.02, cut at 2 std) for projections,
// zeros for biases and LayerNorm bias, ones for LayerNorm gain, and an
// exponentially decaying magnitude over lag for the long-conv kernels so the
// block starts near-identity.
// ---------------------------------------------------------------------------

void init_parameters(Model& model, Rng& rng);

// ---------------------------------------------------------------------------
// Training loop.
// ---------------------------------------------------------------------------

struct TrainConfig {
    std::size_t steps = 1000;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    double clip_norm = 1.0;  // global-norm gradient clip; <= 0 disables

    AdamWConfig adamw;
    ScheduleConfig schedule;  // total_steps is overridden with `steps`
    AugmentConfig augment;

    std::string checkpoint_path;        // empty: no checkpoints
    std::size_t checkpoint_every = 0;   // 0: only at the end
    std::string metrics_csv;            // empty: no CSV; appends step,lr,loss,seconds
    std::size_t log_every = 0;          // 0: silent; otherwise prints to stderr
};

// Thrown when the loss turns non-finite; the offending batch is dumped next
// to the checkpoint path (or cwd) for inspection.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainResult {
    std::vector<double> losses;  // per step
    std::vector<double> lrs;     // per step
    std::uint64_t final_step = 0;
};

// Runs steps [start_step, cfg.steps). Per-step batches draw from
// Rng(seed).split(step), so a resumed run sees exactly the batches the
// original run would have — bitwise. `resume` restores optimizer moments.
TrainResult train(Model& model, const std::vector<Series>& corpus, const TrainConfig& cfg,
                  std::uint64_t start_step = 0, const OptStateBlob* resume = nullptr);

// One forward/backward + AdamW update on a fixed batch; returns the loss.
// Exposed for overfit-one-batch sanity checks.
double train_step_on_batch(Model& model, const Batch& batch, AdamW& opt, double lr,
                           double clip_norm);

}  // namespace reverso
