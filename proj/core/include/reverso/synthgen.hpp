#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "reverso/rng.hpp"
#include "reverso/series.hpp"

namespace reverso {

// Thrown when a sampled covariance stays non-PSD after the maximum jitter.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Gaussian-process kernel bank. Kernels are evaluated at scalar inputs in
// [0, 1]; hyperparameters are drawn from the fixed sets below.
// ---------------------------------------------------------------------------

enum class KernelKind { constant, linear, rbf, rational_quadratic, matern, periodic };

struct KernelSpec {
    KernelKind kind = KernelKind::constant;
    double sigma = 0.0;   // linear
    double length = 1.0;  // rbf, matern
    double alpha = 1.0;   // rational quadratic
    double nu = 0.5;      // matern, half-integer
    double period = 1.0;  // periodic, already normalized by the series length
};

enum class ComposeOp { add, multiply };

struct ComposedKernel {
    std::vector<KernelSpec> leaves;          // 1..5
    std::vector<ComposeOp> ops;              // leaves.size() - 1, applied left to right
};

// Normalized-period source set (divided by the series length before use).
extern const std::vector<double> kPeriodSet;

double eval_kernel(const KernelSpec& spec, double x, double xp);
double eval_composed(const ComposedKernel& kernel, double x, double xp);

// N ~ U{1,5} leaves, uniform kinds/hyperparameters, uniform add/multiply.
ComposedKernel sample_composed_kernel(Rng& rng, std::size_t length);

// Linear trend (slope U[-0.01, 0.01] per index, intercept U[-0.1, 0.1]) with
// probability 1/2, zero otherwise.
std::vector<double> sample_mean(Rng& rng, std::size_t length);

// Draws from N(mean, Sigma) with Sigma built on `length` evenly spaced points
// in [0, 1]. One Cholesky factor is shared across all draws of the kernel
// instance. Jitter starts at 1e-8 * trace/L and escalates x10 up to
// 1e-2 * trace/L before throwing GenerationError.
std::vector<std::vector<double>> gp_sample_batch(const ComposedKernel& kernel,
                                                 const std::vector<double>& mean,
                                                 std::size_t length, std::size_t n_draws,
                                                 Rng& rng);
std::vector<double> gp_sample(const ComposedKernel& kernel, const std::vector<double>& mean,
                              std::size_t length, Rng& rng);

// ---------------------------------------------------------------------------
// Spike / trapezoid process.
// ---------------------------------------------------------------------------

struct SpikeConfig {
    double p_inverted = 0.5;  // probability of the "inverted_u" pattern type
    double baseline_min = 0.0, baseline_max = 1.0;
    std::int64_t period_min = 16, period_max = 256;
    double amplitude_min = 0.5, amplitude_max = 3.0;
    std::int64_t width_min = 4, width_max = 64;  // also capped at the period
    double noise_min = 0.0, noise_max = 0.1;
};

std::vector<double> spike_process(Rng& rng, std::size_t length,
                                  const SpikeConfig& cfg = SpikeConfig{});

// ---------------------------------------------------------------------------
// TSI: trend + seasonality + irregularity, with optional outliers and level
// shifts.
// ---------------------------------------------------------------------------

enum class TrendType { linear, exponential, quadratic, piecewise_linear };
enum class WaveShape { sine, sawtooth, square };
enum class NoiseDist { gaussian, student_t3 };

struct TsiConfig {
    double p_trend = 0.7, p_seas = 0.8, p_noise = 0.8, p_out = 0.1, p_shift = 0.1;
    std::vector<TrendType> trend_types = {TrendType::linear, TrendType::exponential,
                                          TrendType::quadratic, TrendType::piecewise_linear};
    std::vector<WaveShape> wave_shapes = {WaveShape::sine, WaveShape::sawtooth,
                                          WaveShape::square};
    std::vector<NoiseDist> noise_dists = {NoiseDist::gaussian, NoiseDist::student_t3};
    std::vector<double> periods;      // empty: use kPeriodSet
    int max_seasonal_components = 3;  // K ~ U{1, this}
};

std::vector<double> tsi_process(Rng& rng, std::size_t length,
                                const TsiConfig& cfg = TsiConfig{});

// ---------------------------------------------------------------------------
// Corpus generation.
// ---------------------------------------------------------------------------

struct SynthConfig {
    std::size_t length = 1024;  // <= 4096
    std::size_t count = 100;
    std::uint64_t seed = 0;
    double p_kernelsynth = 0.5, p_spike = 0.2, p_tsi = 0.3;  // must sum to 1
    SpikeConfig spike;
    TsiConfig tsi;

    void validate() const;
};

// Embarrassingly parallel across series; each series draws from a stream
// keyed by its index, so the output is independent of n_workers.
std::vector<Series> generate_corpus(const SynthConfig& cfg, std::size_t n_workers = 1);

}  // namespace reverso
