#pragma once

#include <cstdint>
#include <vector>

#include "reverso/model.hpp"

namespace reverso {

// ---------------------------------------------------------------------------
// A patch forecaster maps a raw history to the next patch_len raw values.
// Everything in this module works against this interface so the rollout and
// flip/downsample wrappers can be tested with synthetic inner predictors.
// ---------------------------------------------------------------------------

class PatchForecaster {
public:
    virtual ~PatchForecaster() = default;
    virtual std::size_t patch_len() const = 0;
    // history: raw values (most recent last). Returns patch_len raw values.
    virtual std::vector<double> predict_patch(const std::vector<double>& history) = 0;
};

class ModelForecaster : public PatchForecaster {
public:
    explicit ModelForecaster(Model& model) : model_(model) {}
    std::size_t patch_len() const override { return model_.config().patch_len; }
    std::vector<double> predict_patch(const std::vector<double>& history) override {
        return model_.predict_patch(history);
    }

private:
    Model& model_;
};

enum class FlipMode { none, once, every };

struct InferenceConfig {
    FlipMode flip = FlipMode::none;
    bool downsample = false;
    double alpha = 2.0;               // peak dominance gate: p1 >= alpha * p2
    double beta = 4.0;                // noise floor gate: p1 >= mean + beta * std
    int min_periods = 8;              // M: full periods that must fit in the window
    double short_horizon_ratio = 0.5; // skip downsampling when T < ratio * S

    void validate() const;  // alpha > 1, beta > 0, M >= 1
};

// ---------------------------------------------------------------------------
// Autoregressive rollout: ceil(T / patch_len) passes, each predicted patch is
// appended to the history, output truncated to exactly T values.
// ---------------------------------------------------------------------------
std::vector<double> rollout(PatchForecaster& model, std::vector<double> history,
                            std::size_t horizon);

// Flip-equivariant wrapper over rollout. Flipping negates the RAW series; the
// flipped branch's output is negated back before averaging.
//   none:  plain rollout.
//   once:  two full rollouts, averaged at the end.
//   every: two synchronized branches; after each autoregressive step the
//          averaged patch is fed back to both branches (negated for the
//          flipped one), so the branches cannot diverge.
// The wrapped forecast G satisfies G(-x) == -G(x) exactly.
std::vector<double> flip_equivariant_forecast(PatchForecaster& model,
                                              const std::vector<double>& history,
                                              std::size_t horizon, FlipMode mode);

// ---------------------------------------------------------------------------
// FFT seasonality detection.
// ---------------------------------------------------------------------------

struct SeasonalityReport {
    double period = 0.0;     // S, in samples
    double p1 = 0.0;         // dominant peak amplitude (f > 0)
    double p2 = 0.0;         // runner-up amplitude, excluding the peak +- 1 bin
    double p_dc = 0.0;       // DC amplitude
    double mean_amp = 0.0;   // mean over f > 0 bins (DC excluded, peak included)
    double std_amp = 0.0;
    bool significant = false;
    std::size_t stride = 1;  // k = floor(M * S / L), clamped >= 1
};

// Amplitude spectrum of the most recent power-of-two span of t. Significance
// requires all three gates: p1 >= alpha*p2, p1 >= p_dc, p1 >= mean + beta*std.
// The dominant period is refined to sub-bin resolution by scanning the
// windowed DTFT magnitude around the peak bin; S = N / f_refined.
SeasonalityReport detect_seasonality(const std::vector<double>& t, std::size_t context_len,
                                     const InferenceConfig& cfg);

// Stride the history by report.stride (anchored at the most recent point),
// roll out ceil(T / k) strided steps, and linearly interpolate back to exactly
// T points. The interpolation is anchored so the j-th strided forecast lands
// at offset j*k from the last history point.
std::vector<double> downsampled_forecast(PatchForecaster& model,
                                         const std::vector<double>& history,
                                         std::size_t horizon, const SeasonalityReport& report,
                                         FlipMode flip = FlipMode::none);

// Mean stride over significant reports, rounded to nearest, floored at 1.
// No significant series -> 1.
std::size_t dataset_stride_average(const std::vector<SeasonalityReport>& reports);

// ---------------------------------------------------------------------------
// Orchestrated forecast: seasonality detection + optional downsampling +
// flip-equivariant rollout.
// ---------------------------------------------------------------------------

struct ForecastResult {
    std::vector<double> values;
    SeasonalityReport report;
    double seconds = 0.0;
};

ForecastResult forecast(PatchForecaster& model, const std::vector<double>& history,
                        std::size_t horizon, const InferenceConfig& cfg,
                        std::size_t context_len);

}  // namespace reverso
