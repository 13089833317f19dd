#include "reverso/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace reverso {

// ---------------------------------------------------------------------------
// AdamW
// ---------------------------------------------------------------------------

AdamW::AdamW(std::vector<ParamRef> params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    std::size_t total = 0;
    for (const ParamRef& p : params_) total += p.p->size();
    m_.assign(total, 0.0);
    v_.assign(total, 0.0);
}

void AdamW::step(double lr) {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    std::size_t off = 0;
    for (const ParamRef& p : params_) {
        double* theta = p.p->value.data.data();
        const double* g = p.p->grad.data.data();
        const std::size_t n = p.p->size();
        for (std::size_t i = 0; i < n; ++i) {
            // Decoupled decay, independent of the moment update.
            theta[i] -= lr * cfg_.weight_decay * theta[i];
            double& m = m_[off + i];
            double& v = v_[off + i];
            m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g[i];
            v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g[i] * g[i];
            theta[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
        }
        off += n;
    }
}

OptStateBlob AdamW::state() const {
    OptStateBlob blob;
    blob.step = step_;
    blob.m = m_;
    blob.v = v_;
    return blob;
}

void AdamW::load_state(const OptStateBlob& blob) {
    if (blob.m.size() != m_.size() || blob.v.size() != v_.size())
        throw std::invalid_argument("AdamW::load_state: moment size mismatch");
    step_ = blob.step;
    m_ = blob.m;
    v_ = blob.v;
}

// ---------------------------------------------------------------------------
// WSD schedule
// ---------------------------------------------------------------------------

void ScheduleConfig::validate() const {
    if (total_steps < 1) throw std::invalid_argument("schedule: total_steps must be >= 1");
    if (warmup_frac < 0.0 || decay_frac < 0.0 || warmup_frac + decay_frac > 1.0)
        throw std::invalid_argument("schedule: need warmup_frac, decay_frac >= 0 summing <= 1");
    if (max_lr <= 0.0) throw std::invalid_argument("schedule: max_lr must be > 0");
}

double wsd_lr(std::size_t step, const ScheduleConfig& cfg) {
    cfg.validate();
    const std::size_t warmup =
        static_cast<std::size_t>(cfg.warmup_frac * static_cast<double>(cfg.total_steps));
    const std::size_t decay =
        static_cast<std::size_t>(cfg.decay_frac * static_cast<double>(cfg.total_steps));
    if (step < warmup)
        return cfg.max_lr * static_cast<double>(step) / static_cast<double>(warmup);
    if (decay > 0 && step >= cfg.total_steps - decay) {
        const std::size_t into = step - (cfg.total_steps - decay);
        // Linear to exactly 0 at the final step.
        return cfg.max_lr * static_cast<double>(decay - 1 - into) /
               std::max<double>(1.0, static_cast<double>(decay - 1));
    }
    return cfg.max_lr;
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

namespace {

double truncated_normal(Rng& rng) {
    for (;;) {
        const double z = rng.normal();
        if (std::abs(z) <= 2.0) return z;
    }
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void init_parameters(Model& model, Rng& rng) {
    for (ParamRef& ref : model.params()) {
        Tensor2& w = ref.p->value;
        if (ends_with(ref.name, ".ln_gain")) {
            w.fill(1.0);
        } else if (ends_with(ref.name, ".ln_bias") || ends_with(ref.name, ".b_up") ||
                   ends_with(ref.name, ".b_down") || ends_with(ref.name, ".b_beta") ||
                   ends_with(ref.name, "embed.b")) {
            w.zero();
        } else if (ends_with(ref.name, ".decay_logit")) {
            // sigmoid(4) ~ 0.98: the gated variant starts close to the plain
            // delta rule instead of aggressively forgetting state.
            w.fill(4.0);
        } else if (ends_with(ref.name, ".long_kernel")) {
            // rows = lag, cols = channel; magnitude decays over lag so early in
            // training the block behaves like a short, local filter.
            const double tau = std::max(1.0, static_cast<double>(w.rows) / 8.0);
            for (std::size_t t = 0; t < w.rows; ++t) {
                const double env = std::exp(-static_cast<double>(t) / tau);
                for (std::size_t c = 0; c < w.cols; ++c)
                    w(t, c) = 0.02 * env * truncated_normal(rng);
            }
        } else {
            for (double& v : w.data) v = 0.02 * truncated_normal(rng);
        }
        ref.p->zero_grad();
    }
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

void dump_batch(const Batch& batch, const std::string& path) {
    std::ofstream out(path);
    out << "kind,item,values...\n";
    for (std::size_t b = 0; b < batch.context.rows; ++b) {
        out << "context," << b;
        for (std::size_t t = 0; t < batch.context.cols; ++t)
            out << ',' << batch.context(b, t);
        out << "\ntarget," << b;
        for (std::size_t t = 0; t < batch.target.cols; ++t)
            out << ',' << batch.target(b, t);
        out << '\n';
    }
}

double global_grad_norm(const std::vector<ParamRef>& params) {
    double sq = 0.0;
    for (const ParamRef& p : params)
        for (double g : p.p->grad.data) sq += g * g;
    return std::sqrt(sq);
}

}  // namespace

double train_step_on_batch(Model& model, const Batch& batch, AdamW& opt, double lr,
                           double clip_norm) {
    std::vector<ParamRef> params = model.params();
    for (ParamRef& p : params) p.p->zero_grad();

    const std::size_t B = batch.context.rows;
    const std::size_t p_len = batch.target.cols;
    std::size_t n_valid = 0;
    for (std::uint8_t m : batch.mask) n_valid += m;
    if (n_valid == 0) return 0.0;

    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const std::vector<double> ctx(batch.context.row_ptr(b),
                                      batch.context.row_ptr(b) + batch.context.cols);
        const std::vector<double> pred = model.forward(ctx);
        const NormStats& st = batch.stats[b];
        const double scale = st.degenerate ? 0.0 : st.max - st.min;

        std::vector<double> d_norm(p_len, 0.0);
        for (std::size_t t = 0; t < p_len; ++t) {
            if (!batch.mask[b * p_len + t]) continue;
            const double raw = unnormalize_value(pred[t], st);
            const double diff = raw - batch.target(b, t);
            loss += std::abs(diff);
            const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            d_norm[t] = sign / static_cast<double>(n_valid) * scale;
        }
        model.backward(d_norm);
    }
    loss /= static_cast<double>(n_valid);

    if (clip_norm > 0.0) {
        const double norm = global_grad_norm(params);
        if (norm > clip_norm) {
            const double s = clip_norm / norm;
            for (ParamRef& p : params)
                for (double& g : p.p->grad.data) g *= s;
        }
    }
    opt.step(lr);
    return loss;
}

TrainResult train(Model& model, const std::vector<Series>& corpus, const TrainConfig& cfg,
                  std::uint64_t start_step, const OptStateBlob* resume) {
    ScheduleConfig sched = cfg.schedule;
    sched.total_steps = cfg.steps;
    sched.validate();
    cfg.augment.validate();

    AdamW opt(model.params(), cfg.adamw);
    if (resume && !resume->m.empty()) opt.load_state(*resume);

    std::ofstream metrics;
    if (!cfg.metrics_csv.empty()) {
        const bool fresh = start_step == 0;
        metrics.open(cfg.metrics_csv, fresh ? std::ios::trunc : std::ios::app);
        if (fresh) metrics << "step,lr,loss,seconds\n";
    }

    const std::size_t L = model.config().context_len;
    const std::size_t p = model.config().patch_len;

    TrainResult result;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t step = start_step; step < cfg.steps; ++step) {
        Rng step_rng = Rng(cfg.seed).split(step);
        const Batch batch = build_batch(corpus, cfg.augment, step_rng, cfg.batch_size, L, p);
        const double lr = wsd_lr(static_cast<std::size_t>(step), sched);
        const double loss = train_step_on_batch(model, batch, opt, lr, cfg.clip_norm);

        if (!std::isfinite(loss)) {
            const std::string dump = (cfg.checkpoint_path.empty()
                                          ? std::string("diverged_batch")
                                          : cfg.checkpoint_path + ".diverged") +
                                     ".csv";
            dump_batch(batch, dump);
            throw TrainingDiverged("non-finite loss at step " + std::to_string(step) +
                                   "; batch dumped to " + dump);
        }

        result.losses.push_back(loss);
        result.lrs.push_back(lr);
        result.final_step = step + 1;

        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (metrics.is_open())
            metrics << step << ',' << lr << ',' << loss << ',' << secs << '\n';
        if (cfg.log_every > 0 && step % cfg.log_every == 0)
            std::fprintf(stderr, "step %llu  lr %.3e  loss %.6f\n",
                         static_cast<unsigned long long>(step), lr, loss);

        if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
            (step + 1) % cfg.checkpoint_every == 0) {
            const OptStateBlob blob = opt.state();
            save_checkpoint(cfg.checkpoint_path, model, &blob);
        }
    }

    if (!cfg.checkpoint_path.empty()) {
        const OptStateBlob blob = opt.state();
        save_checkpoint(cfg.checkpoint_path, model, &blob);
    }
    return result;
}

}  // namespace reverso
