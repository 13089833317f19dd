#include "reverso/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "reverso/fft.hpp"

namespace reverso {

void InferenceConfig::validate() const {
    if (alpha <= 1.0) throw std::invalid_argument("inference: alpha must be > 1");
    if (beta <= 0.0) throw std::invalid_argument("inference: beta must be > 0");
    if (min_periods < 1) throw std::invalid_argument("inference: min_periods must be >= 1");
}

std::vector<double> rollout(PatchForecaster& model, std::vector<double> history,
                            std::size_t horizon) {
    const std::size_t p = model.patch_len();
    std::vector<double> out;
    out.reserve(horizon + p);
    while (out.size() < horizon) {
        const std::vector<double> patch = model.predict_patch(history);
        history.insert(history.end(), patch.begin(), patch.end());
        out.insert(out.end(), patch.begin(), patch.end());
    }
    out.resize(horizon);
    return out;
}

namespace {

std::vector<double> negated(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i];
    return out;
}

}  // namespace

std::vector<double> flip_equivariant_forecast(PatchForecaster& model,
                                              const std::vector<double>& history,
                                              std::size_t horizon, FlipMode mode) {
    if (mode == FlipMode::none) return rollout(model, history, horizon);

    if (mode == FlipMode::once) {
        const std::vector<double> a = rollout(model, history, horizon);
        const std::vector<double> b = rollout(model, negated(history), horizon);
        std::vector<double> out(horizon);
        for (std::size_t i = 0; i < horizon; ++i) out[i] = (a[i] - b[i]) / 2.0;
        return out;
    }

    // every: synchronized branches on x and -x; the averaged patch is what
    // both branches see as their own continuation.
    std::vector<double> pos = history;
    std::vector<double> neg = negated(history);
    std::vector<double> out;
    out.reserve(horizon + model.patch_len());
    while (out.size() < horizon) {
        const std::vector<double> a = model.predict_patch(pos);
        const std::vector<double> b = model.predict_patch(neg);
        std::vector<double> avg(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) avg[i] = (a[i] - b[i]) / 2.0;
        for (double v : avg) {
            pos.push_back(v);
            neg.push_back(-v);
        }
        out.insert(out.end(), avg.begin(), avg.end());
    }
    out.resize(horizon);
    return out;
}

// ---------------------------------------------------------------------------
// Seasonality detection
// ---------------------------------------------------------------------------

namespace {

// |DTFT| of the Hann-windowed, mean-subtracted signal at a fractional bin
// frequency. Used only to refine the peak location; the significance gates
// run on the plain FFT amplitudes.
double windowed_dtft_mag(const std::vector<double>& x, double mean, double bin) {
    const std::size_t n = x.size();
    const double w0 = 2.0 * M_PI * bin / static_cast<double>(n);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double hann =
            0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(t) /
                                 static_cast<double>(n - 1));
        const double v = (x[t] - mean) * hann;
        const double ph = w0 * static_cast<double>(t);
        acc += std::complex<double>(v * std::cos(ph), -v * std::sin(ph));
    }
    return std::abs(acc);
}

double refine_peak_bin(const std::vector<double>& x, std::size_t f1) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    double lo = std::max(0.5, static_cast<double>(f1) - 1.0);
    double hi = std::min(static_cast<double>(n) / 2.0, static_cast<double>(f1) + 1.0);

    // Coarse scan, then golden-section refinement around the best sample.
    const int grid = 41;
    double best_f = static_cast<double>(f1);
    double best_m = -1.0;
    for (int i = 0; i < grid; ++i) {
        const double f = lo + (hi - lo) * static_cast<double>(i) / (grid - 1);
        const double m = windowed_dtft_mag(x, mean, f);
        if (m > best_m) {
            best_m = m;
            best_f = f;
        }
    }
    double a = std::max(lo, best_f - (hi - lo) / (grid - 1));
    double b = std::min(hi, best_f + (hi - lo) / (grid - 1));
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = windowed_dtft_mag(x, mean, c), fd = windowed_dtft_mag(x, mean, d);
    for (int it = 0; it < 40 && b - a > 1e-6; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = windowed_dtft_mag(x, mean, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = windowed_dtft_mag(x, mean, d);
        }
    }
    const double refined = 0.5 * (a + b);
    return best_m > 0.0 ? refined : static_cast<double>(f1);
}

}  // namespace

SeasonalityReport detect_seasonality(const std::vector<double>& t, std::size_t context_len,
                                     const InferenceConfig& cfg) {
    cfg.validate();
    if (t.size() < 4)
        throw std::invalid_argument("detect_seasonality: need at least 4 points");

    // Most recent power-of-two span.
    std::size_t n = 1;
    while (n * 2 <= t.size()) n *= 2;
    std::vector<double> x(t.end() - static_cast<std::ptrdiff_t>(n), t.end());

    const std::vector<std::complex<double>> spec = rfft(x, n);
    std::vector<double> amp(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) amp[i] = std::abs(spec[i]);

    SeasonalityReport rep;
    rep.p_dc = amp[0];

    std::size_t f1 = 1;
    for (std::size_t i = 2; i < amp.size(); ++i)
        if (amp[i] > amp[f1]) f1 = i;
    rep.p1 = amp[f1];

    rep.p2 = 0.0;
    for (std::size_t i = 1; i < amp.size(); ++i) {
        const std::size_t dist = i > f1 ? i - f1 : f1 - i;
        if (dist <= 1) continue;
        rep.p2 = std::max(rep.p2, amp[i]);
    }

    double mean = 0.0;
    const std::size_t n_pos = amp.size() - 1;
    for (std::size_t i = 1; i < amp.size(); ++i) mean += amp[i];
    mean /= static_cast<double>(n_pos);
    double var = 0.0;
    for (std::size_t i = 1; i < amp.size(); ++i) {
        const double d = amp[i] - mean;
        var += d * d;
    }
    rep.mean_amp = mean;
    rep.std_amp = std::sqrt(var / static_cast<double>(n_pos));

    rep.significant = rep.p1 >= cfg.alpha * rep.p2 && rep.p1 >= rep.p_dc &&
                      rep.p1 >= rep.mean_amp + cfg.beta * rep.std_amp;

    const double f_refined = refine_peak_bin(x, f1);
    rep.period = static_cast<double>(n) / f_refined;

    const double k = std::floor(static_cast<double>(cfg.min_periods) * rep.period /
                                static_cast<double>(context_len));
    rep.stride = k < 1.0 ? 1 : static_cast<std::size_t>(k);
    return rep;
}

std::vector<double> downsampled_forecast(PatchForecaster& model,
                                         const std::vector<double>& history,
                                         std::size_t horizon, const SeasonalityReport& report,
                                         FlipMode flip) {
    const std::size_t k = std::max<std::size_t>(1, report.stride);
    if (k == 1) return flip_equivariant_forecast(model, history, horizon, flip);
    if (history.empty()) throw std::invalid_argument("downsampled_forecast: empty history");

    // Stride anchored at the last point: ..., last-2k, last-k, last.
    std::vector<double> strided;
    for (std::size_t i = (history.size() - 1) % k; i < history.size(); i += k)
        strided.push_back(history[i]);

    const std::size_t strided_horizon = (horizon + k - 1) / k;
    const std::vector<double> coarse =
        flip_equivariant_forecast(model, strided, strided_horizon, flip);

    // Linear interpolation back to the original grid: coarse[j] sits at offset
    // (j+1)*k from the last observed point.
    std::vector<double> out(horizon);
    const double anchor = history.back();
    for (std::size_t t = 1; t <= horizon; ++t) {
        const std::size_t j = (t - 1) / k;              // segment index
        const double left = j == 0 ? anchor : coarse[j - 1];
        const double right = coarse[j];
        const double frac = static_cast<double>(t - j * k) / static_cast<double>(k);
        out[t - 1] = left + frac * (right - left);
    }
    return out;
}

std::size_t dataset_stride_average(const std::vector<SeasonalityReport>& reports) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const SeasonalityReport& r : reports) {
        if (!r.significant) continue;
        sum += static_cast<double>(r.stride);
        ++n;
    }
    if (n == 0) return 1;
    const double mean = sum / static_cast<double>(n);
    const double rounded = std::round(mean);
    return rounded < 1.0 ? 1 : static_cast<std::size_t>(rounded);
}

ForecastResult forecast(PatchForecaster& model, const std::vector<double>& history,
                        std::size_t horizon, const InferenceConfig& cfg,
                        std::size_t context_len) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    ForecastResult res;
    res.report = detect_seasonality(history, context_len, cfg);

    const bool use_downsample = cfg.downsample && res.report.significant &&
                                res.report.stride > 1 &&
                                static_cast<double>(horizon) >=
                                    cfg.short_horizon_ratio * res.report.period;
    if (use_downsample)
        res.values = downsampled_forecast(model, history, horizon, res.report, cfg.flip);
    else
        res.values = flip_equivariant_forecast(model, history, horizon, cfg.flip);

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace reverso
