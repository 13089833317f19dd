#include "reverso/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace reverso {

void AugmentConfig::validate() const {
    auto check_p = [](double p, const char* what) {
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument(std::string("augment: ") + what + " must be in [0,1]");
    };
    check_p(p_downsample, "p_downsample");
    check_p(p_modulate, "p_modulate");
    check_p(p_flip_x, "p_flip_x");
    check_p(p_flip_y, "p_flip_y");
    check_p(p_censor, "p_censor");
    if (mixup_alpha <= 0.0) throw std::invalid_argument("augment: mixup_alpha must be > 0");
    if (k_min < 1 || k_max < k_min)
        throw std::invalid_argument("augment: need 1 <= k_min <= k_max");
}

SamplerPlan plan_sampler(const std::vector<DatasetInfo>& datasets) {
    SamplerPlan plan;
    for (const DatasetInfo& d : datasets) {
        SamplerPlan::PerDataset pd;
        pd.id = d.id;
        std::size_t total_len = 0;
        for (std::size_t l : d.series_lengths) total_len += l;
        pd.stride = std::max<std::size_t>(
            1, (total_len + SamplerPlan::kNMax - 1) / SamplerPlan::kNMax);
        for (std::size_t l : d.series_lengths) {
            const std::size_t by_stride = (l + pd.stride - 1) / pd.stride;
            const std::size_t w = std::min(SamplerPlan::kSeriesCap, by_stride);
            pd.windows.push_back(w);
            pd.total_windows += w;
        }
        plan.datasets.push_back(std::move(pd));
    }
    return plan;
}

std::vector<double> aug_downsample(const std::vector<double>& t, std::size_t k) {
    if (k == 0) throw std::invalid_argument("aug_downsample: stride must be >= 1");
    std::vector<double> out;
    out.reserve(t.size() / k + 1);
    for (std::size_t i = 0; i * k < t.size(); ++i) out.push_back(t[i * k]);
    return out;
}

std::vector<double> modulation_envelope(std::size_t len, std::size_t x2, double y1,
                                        double y2, double y3) {
    if (len == 0) return {};
    if (len == 1) return {y1};
    if (x2 == 0 || x2 >= len - 1)
        throw std::invalid_argument("modulation_envelope: changepoint must be interior");
    std::vector<double> env(len);
    for (std::size_t i = 0; i <= x2; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(x2);
        env[i] = y1 + frac * (y2 - y1);
    }
    for (std::size_t i = x2; i < len; ++i) {
        const double frac =
            static_cast<double>(i - x2) / static_cast<double>(len - 1 - x2);
        env[i] = y2 + frac * (y3 - y2);
    }
    return env;
}

std::vector<double> aug_amplitude_modulation(const std::vector<double>& t, Rng& rng) {
    if (t.size() < 3) return t;  // no interior changepoint available
    const std::size_t x2 = static_cast<std::size_t>(
        rng.uniform_int(1, static_cast<std::int64_t>(t.size()) - 2));
    const double y1 = rng.normal(1.0, 0.5);
    const double y2 = rng.normal(1.0, 0.5);
    const double y3 = rng.normal(1.0, 0.5);
    const std::vector<double> env = modulation_envelope(t.size(), x2, y1, y2, y3);
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i] * env[i];
    return out;
}

std::vector<double> aug_flip(const std::vector<double>& x, FlipAxis axis) {
    std::vector<double> out(x);
    if (axis == FlipAxis::x) {
        std::reverse(out.begin(), out.end());
    } else {
        for (double& v : out) v = -v;
    }
    return out;
}

double quantile(const std::vector<double>& values, double q) {
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q must be in [0,1]");
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    if (finite.empty()) throw std::invalid_argument("quantile: no finite values");
    std::sort(finite.begin(), finite.end());
    const double pos = q * static_cast<double>(finite.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= finite.size()) return finite.back();
    return finite[lo] * (1.0 - frac) + finite[lo + 1] * frac;
}

std::vector<double> aug_censor_at(const std::vector<double>& x, double q,
                                  CensorDirection direction) {
    if (direction == CensorDirection::none) return x;
    const double c = quantile(x, q);
    std::vector<double> out(x);
    for (double& v : out) {
        if (!std::isfinite(v)) continue;
        v = direction == CensorDirection::top ? std::min(v, c) : std::max(v, c);
    }
    return out;
}

std::vector<double> aug_censor(const std::vector<double>& x, Rng& rng) {
    const double q = rng.uniform();
    const CensorDirection dir = static_cast<CensorDirection>(rng.uniform_int(0, 2));
    return aug_censor_at(x, q, dir);
}

void aug_mixup(std::vector<std::vector<double>>& batch, Rng& rng, double alpha) {
    const std::size_t n = batch.size();
    if (n < 2) return;
    std::vector<std::size_t> pi(n);
    std::iota(pi.begin(), pi.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(pi[i], pi[j]);
    }
    const std::vector<std::vector<double>> partner = batch;  // pre-mix snapshot
    for (std::size_t i = 0; i < n; ++i) {
        const double lam = rng.beta(alpha, alpha);
        const std::vector<double>& other = partner[pi[i]];
        for (std::size_t t = 0; t < batch[i].size() && t < other.size(); ++t)
            batch[i][t] = lam * batch[i][t] + (1.0 - lam) * other[t];
    }
}

Batch build_batch(const std::vector<Series>& corpus, const AugmentConfig& cfg, Rng& rng,
                  std::size_t batch_size, std::size_t context_len, std::size_t patch_len) {
    cfg.validate();
    if (corpus.empty()) throw std::invalid_argument("build_batch: empty corpus");
    const std::size_t window = context_len + patch_len;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // Per-item augmentation up to the mixup barrier, each on its own stream so
    // the result is independent of any execution order.
    std::vector<std::vector<double>> seqs(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
        Rng item_rng = rng.split(b + 1);
        std::vector<double> x =
            corpus[static_cast<std::size_t>(item_rng.uniform_int(
                       0, static_cast<std::int64_t>(corpus.size()) - 1))]
                .values;

        if (cfg.enable_downsample && item_rng.uniform() < cfg.p_downsample) {
            const std::size_t k =
                static_cast<std::size_t>(item_rng.uniform_int(cfg.k_min, cfg.k_max));
            x = aug_downsample(x, k);
        }
        if (cfg.enable_modulate && item_rng.uniform() < cfg.p_modulate)
            x = aug_amplitude_modulation(x, item_rng);

        std::vector<double> seq(window, nan);
        if (x.size() > window) {
            const std::size_t t_start = static_cast<std::size_t>(item_rng.uniform_int(
                0, static_cast<std::int64_t>(x.size() - window)));
            std::copy(x.begin() + static_cast<std::ptrdiff_t>(t_start),
                      x.begin() + static_cast<std::ptrdiff_t>(t_start + window),
                      seq.begin());
        } else {
            // Left-pad with NaN; the context half is imputed below, NaN targets
            // are masked out of the loss.
            std::copy(x.begin(), x.end(), seq.end() - static_cast<std::ptrdiff_t>(x.size()));
        }

        if (cfg.enable_flip) {
            if (item_rng.uniform() < cfg.p_flip_y) seq = aug_flip(seq, FlipAxis::y);
            if (item_rng.uniform() < cfg.p_flip_x) seq = aug_flip(seq, FlipAxis::x);
        }
        if (cfg.enable_censor && item_rng.uniform() < cfg.p_censor)
            seq = aug_censor(seq, item_rng);

        seqs[b] = std::move(seq);
    }

    if (cfg.enable_mixup) {
        Rng mix_rng = rng.split(0);
        aug_mixup(seqs, mix_rng, cfg.mixup_alpha);
    }

    Batch batch;
    batch.context = Tensor2(batch_size, context_len);
    batch.target = Tensor2(batch_size, patch_len);
    batch.mask.assign(batch_size * patch_len, 0);
    batch.stats.resize(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
        const std::vector<double>& seq = seqs[b];
        std::vector<double> ctx(seq.begin(),
                                seq.begin() + static_cast<std::ptrdiff_t>(context_len));
        ctx = normalize(ctx, batch.stats[b]);
        ctx = impute_and_pad(ctx, context_len);
        for (std::size_t t = 0; t < context_len; ++t) batch.context(b, t) = ctx[t];
        for (std::size_t t = 0; t < patch_len; ++t) {
            const double v = seq[context_len + t];
            batch.target(b, t) = v;
            batch.mask[b * patch_len + t] = std::isfinite(v) ? 1 : 0;
        }
    }
    return batch;
}

}  // namespace reverso
