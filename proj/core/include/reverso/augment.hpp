#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reverso/model.hpp"
#include "reverso/rng.hpp"
#include "reverso/series.hpp"

namespace reverso {

// ---------------------------------------------------------------------------
// Augmentation chain configuration (six stages, each individually toggleable).
// ---------------------------------------------------------------------------

struct AugmentConfig {
    double p_downsample = 0.3;
    std::int64_t k_min = 2, k_max = 16;  // downsample stride range
    double p_modulate = 0.3;
    double p_flip_x = 0.2, p_flip_y = 0.2;
    double p_censor = 0.2;
    double mixup_alpha = 0.3;

    bool enable_downsample = true;
    bool enable_modulate = true;
    bool enable_flip = true;
    bool enable_censor = true;
    bool enable_mixup = true;

    void validate() const;  // probabilities in [0,1], alpha > 0, k range sane
};

// ---------------------------------------------------------------------------
// Stride-balanced sampling plan.
// ---------------------------------------------------------------------------

struct DatasetInfo {
    std::string id;
    std::vector<std::size_t> series_lengths;
};

struct SamplerPlan {
    static constexpr std::size_t kNMax = 100000;   // per-epoch sample budget
    static constexpr std::size_t kSeriesCap = 48;  // windows per series

    struct PerDataset {
        std::string id;
        std::size_t stride = 1;                     // s_D = ceil(sum l_t / N_max)
        std::vector<std::size_t> windows;           // min(48, ceil(l_t / s_D))
        std::size_t total_windows = 0;
    };
    std::vector<PerDataset> datasets;
};

SamplerPlan plan_sampler(const std::vector<DatasetInfo>& datasets);

// ---------------------------------------------------------------------------
// Individual stages.
// ---------------------------------------------------------------------------

// Take-every-k: t'[i] = t[i*k].
std::vector<double> aug_downsample(const std::vector<double>& t, std::size_t k);

// Piecewise-linear envelope through (0, y1), (x2, y2), (len-1, y3).
std::vector<double> modulation_envelope(std::size_t len, std::size_t x2, double y1,
                                        double y2, double y3);
// x2 uniform interior, y ~ N(1, 0.5).
std::vector<double> aug_amplitude_modulation(const std::vector<double>& t, Rng& rng);

enum class FlipAxis { x, y };
// x: reverse index order; y: negate.
std::vector<double> aug_flip(const std::vector<double>& x, FlipAxis axis);

// Linear interpolation between order statistics; NaNs are ignored.
// Throws std::invalid_argument on an all-NaN/empty input.
double quantile(const std::vector<double>& values, double q);

enum class CensorDirection { top, bottom, none };
// top: min(x, c); bottom: max(x, c); none: identity — with c = quantile(x, q).
std::vector<double> aug_censor_at(const std::vector<double>& x, double q,
                                  CensorDirection direction);
// q ~ U(0,1); direction uniform over {top, bottom, none}.
std::vector<double> aug_censor(const std::vector<double>& x, Rng& rng);

// B[i] <- lambda_i B[i] + (1 - lambda_i) B[pi(i)], lambda_i ~ Beta(alpha, alpha),
// pi a uniform permutation.
void aug_mixup(std::vector<std::vector<double>>& batch, Rng& rng, double alpha);

// ---------------------------------------------------------------------------
// Batch construction: downsample -> modulate -> slice/pad (L+p, split into
// context and target) -> flips -> censor -> mixup, then per-item min-max
// normalization of the context. Deterministic for a fixed rng stream.
// ---------------------------------------------------------------------------

Batch build_batch(const std::vector<Series>& corpus, const AugmentConfig& cfg, Rng& rng,
                  std::size_t batch_size, std::size_t context_len, std::size_t patch_len);

}  // namespace reverso
