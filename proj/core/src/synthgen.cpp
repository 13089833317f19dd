#include "reverso/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace reverso {

const std::vector<double> kPeriodSet = {24, 48, 96, 168, 336, 672, 7,  14, 30, 60,
                                        365, 730, 4, 26, 52, 6, 12, 40, 10};

// ---------------------------------------------------------------------------
// Kernel evaluation
// ---------------------------------------------------------------------------

double eval_kernel(const KernelSpec& spec, double x, double xp) {
    const double r = std::abs(x - xp);
    switch (spec.kind) {
        case KernelKind::constant:
            return 1.0;
        case KernelKind::linear:
            return spec.sigma * spec.sigma + x * xp;
        case KernelKind::rbf:
            return std::exp(-r * r / (2.0 * spec.length * spec.length));
        case KernelKind::rational_quadratic:
            return std::pow(1.0 + r * r / (2.0 * spec.alpha), -spec.alpha);
        case KernelKind::matern: {
            // Half-integer closed forms.
            const double s = r / spec.length;
            if (spec.nu == 0.5) return std::exp(-s);
            if (spec.nu == 1.5) {
                const double a = std::sqrt(3.0) * s;
                return (1.0 + a) * std::exp(-a);
            }
            // nu == 2.5
            const double a = std::sqrt(5.0) * s;
            return (1.0 + a + a * a / 3.0) * std::exp(-a);
        }
        case KernelKind::periodic: {
            const double sn = std::sin(M_PI * r / spec.period);
            return std::exp(-2.0 * sn * sn);
        }
    }
    return 0.0;
}

double eval_composed(const ComposedKernel& kernel, double x, double xp) {
    double acc = eval_kernel(kernel.leaves.at(0), x, xp);
    for (std::size_t i = 1; i < kernel.leaves.size(); ++i) {
        const double k = eval_kernel(kernel.leaves[i], x, xp);
        acc = kernel.ops.at(i - 1) == ComposeOp::add ? acc + k : acc * k;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Kernel / mean sampling
// ---------------------------------------------------------------------------

namespace {

const double kSigmaSet[] = {0.0, 1.0, 10.0};
const double kLengthSet[] = {0.1, 1.0, 10.0};
const double kAlphaSet[] = {0.1, 1.0, 10.0};
const double kNuSet[] = {0.5, 1.5, 2.5};

KernelSpec sample_leaf(Rng& rng, std::size_t length) {
    KernelSpec spec;
    spec.kind = static_cast<KernelKind>(rng.uniform_int(0, 5));
    switch (spec.kind) {
        case KernelKind::constant:
            break;
        case KernelKind::linear:
            spec.sigma = kSigmaSet[rng.uniform_int(0, 2)];
            break;
        case KernelKind::rbf:
            spec.length = kLengthSet[rng.uniform_int(0, 2)];
            break;
        case KernelKind::rational_quadratic:
            spec.alpha = kAlphaSet[rng.uniform_int(0, 2)];
            break;
        case KernelKind::matern:
            spec.nu = kNuSet[rng.uniform_int(0, 2)];
            spec.length = kLengthSet[rng.uniform_int(0, 2)];
            break;
        case KernelKind::periodic:
            spec.period = kPeriodSet[rng.uniform_int(
                              0, static_cast<std::int64_t>(kPeriodSet.size()) - 1)] /
                          static_cast<double>(length);
            break;
    }
    return spec;
}

}  // namespace

ComposedKernel sample_composed_kernel(Rng& rng, std::size_t length) {
    ComposedKernel k;
    const std::int64_t n = rng.uniform_int(1, 5);
    k.leaves.push_back(sample_leaf(rng, length));
    for (std::int64_t i = 1; i < n; ++i) {
        k.leaves.push_back(sample_leaf(rng, length));
        k.ops.push_back(rng.uniform() < 0.5 ? ComposeOp::add : ComposeOp::multiply);
    }
    return k;
}

std::vector<double> sample_mean(Rng& rng, std::size_t length) {
    std::vector<double> mean(length, 0.0);
    if (rng.uniform() < 0.5) {
        const double slope = rng.uniform(-0.01, 0.01);
        const double intercept = rng.uniform(-0.1, 0.1);
        for (std::size_t t = 0; t < length; ++t)
            mean[t] = slope * static_cast<double>(t) + intercept;
    }
    return mean;
}

// ---------------------------------------------------------------------------
// GP sampling via Cholesky with adaptive jitter
// ---------------------------------------------------------------------------

namespace {

// Lower-triangular Cholesky in place; returns false on non-PSD.
bool cholesky_inplace(std::vector<double>& a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
        for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
    }
    return true;
}

}  // namespace

std::vector<std::vector<double>> gp_sample_batch(const ComposedKernel& kernel,
                                                 const std::vector<double>& mean,
                                                 std::size_t length, std::size_t n_draws,
                                                 Rng& rng) {
    if (mean.size() != length) throw std::invalid_argument("gp_sample: mean length mismatch");
    const std::size_t n = length;

    std::vector<double> cov(n * n);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
            const double xj = n > 1 ? static_cast<double>(j) / static_cast<double>(n - 1) : 0.0;
            const double v = eval_composed(kernel, xi, xj);
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
        trace += cov[i * n + i];
    }

    const double scale = trace / static_cast<double>(n);
    std::vector<double> chol;
    double jitter = 1e-8 * scale;
    const double max_jitter = 1e-2 * scale;
    bool ok = false;
    for (;;) {
        chol = cov;
        for (std::size_t i = 0; i < n; ++i) chol[i * n + i] += jitter;
        if (cholesky_inplace(chol, n)) {
            ok = true;
            break;
        }
        jitter *= 10.0;
        if (jitter > max_jitter) break;
    }
    if (!ok) throw GenerationError("gp_sample: covariance not PSD after max jitter");

    std::vector<std::vector<double>> draws(n_draws);
    std::vector<double> z(n);
    for (std::size_t d = 0; d < n_draws; ++d) {
        for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
        std::vector<double>& out = draws[d];
        out.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = mean[i];
            const double* row = &chol[i * n];
            for (std::size_t k = 0; k <= i; ++k) s += row[k] * z[k];
            out[i] = s;
        }
    }
    return draws;
}

std::vector<double> gp_sample(const ComposedKernel& kernel, const std::vector<double>& mean,
                              std::size_t length, Rng& rng) {
    return gp_sample_batch(kernel, mean, length, 1, rng)[0];
}

// ---------------------------------------------------------------------------
// Spike process
// ---------------------------------------------------------------------------

std::vector<double> spike_process(Rng& rng, std::size_t length, const SpikeConfig& cfg) {
    const bool inverted = rng.uniform() < cfg.p_inverted;  // "inverted_u" vs "spikes"
    const double baseline = rng.uniform(cfg.baseline_min, cfg.baseline_max);
    const std::int64_t period = rng.uniform_int(cfg.period_min, cfg.period_max);
    const double amplitude = rng.uniform(cfg.amplitude_min, cfg.amplitude_max);
    const std::int64_t width = rng.uniform_int(cfg.width_min, std::min(cfg.width_max, period));
    const double noise_sd = rng.uniform(cfg.noise_min, cfg.noise_max);

    // Trapezoid: rise for w/4, plateau for w/2, fall for the rest.
    const std::int64_t w = width;
    const std::int64_t up = w / 4, flat = w / 2, down = w - up - flat;
    std::vector<double> shape(static_cast<std::size_t>(w), amplitude);
    for (std::int64_t i = 0; i < up; ++i)
        shape[static_cast<std::size_t>(i)] =
            up > 1 ? amplitude * static_cast<double>(i) / static_cast<double>(up - 1) : 0.0;
    for (std::int64_t i = 0; i < down; ++i)
        shape[static_cast<std::size_t>(up + flat + i)] =
            down > 1 ? amplitude * (1.0 - static_cast<double>(i) / static_cast<double>(down - 1))
                     : amplitude;

    const double sign = inverted ? -1.0 : 1.0;
    std::vector<double> x(length, baseline);
    for (std::size_t start = 0; start < length; start += static_cast<std::size_t>(period)) {
        const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(w),
                                                      length - start);
        for (std::size_t i = 0; i < len; ++i) x[start + i] += sign * shape[i];
    }
    for (double& v : x) v += rng.normal(0.0, noise_sd);
    return x;
}

// ---------------------------------------------------------------------------
// TSI process
// ---------------------------------------------------------------------------

namespace {

double wave_value(WaveShape shape, double theta) {
    switch (shape) {
        case WaveShape::sine:
            return std::sin(theta);
        case WaveShape::sawtooth: {
            const double frac = theta / (2.0 * M_PI) - std::floor(theta / (2.0 * M_PI));
            return 2.0 * frac - 1.0;
        }
        case WaveShape::square:
            return std::sin(theta) >= 0.0 ? 1.0 : -1.0;
    }
    return 0.0;
}

}  // namespace

std::vector<double> tsi_process(Rng& rng, std::size_t length, const TsiConfig& cfg) {
    std::vector<double> x(length, 0.0);
    const double n = static_cast<double>(length);

    if (!cfg.trend_types.empty() && rng.uniform() < cfg.p_trend) {
        const TrendType type = cfg.trend_types[rng.uniform_int(
            0, static_cast<std::int64_t>(cfg.trend_types.size()) - 1)];
        switch (type) {
            case TrendType::linear: {
                const double slope = rng.uniform(-2.0, 2.0) / n;
                const double intercept = rng.uniform(-1.0, 1.0);
                for (std::size_t t = 0; t < length; ++t)
                    x[t] += slope * static_cast<double>(t) + intercept;
                break;
            }
            case TrendType::exponential: {
                const double rate = rng.uniform(-3.0, 3.0) / n;
                const double scale = rng.uniform(0.25, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
                for (std::size_t t = 0; t < length; ++t)
                    x[t] += scale * std::exp(rate * static_cast<double>(t));
                break;
            }
            case TrendType::quadratic: {
                const double a = rng.uniform(-2.0, 2.0);
                const double b = rng.uniform(-1.0, 1.0);
                for (std::size_t t = 0; t < length; ++t) {
                    const double u = static_cast<double>(t) / n;
                    x[t] += a * u * u + b * u;
                }
                break;
            }
            case TrendType::piecewise_linear: {
                const std::int64_t segs = rng.uniform_int(2, 4);
                std::vector<std::size_t> knots = {0};
                for (std::int64_t s = 1; s < segs; ++s)
                    knots.push_back(static_cast<std::size_t>(
                        rng.uniform_int(1, static_cast<std::int64_t>(length) - 2)));
                knots.push_back(length - 1);
                std::sort(knots.begin(), knots.end());
                double level = rng.uniform(-1.0, 1.0);
                for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
                    const double slope = rng.uniform(-2.0, 2.0) / n;
                    for (std::size_t t = knots[s]; t <= knots[s + 1]; ++t)
                        x[t] += level + slope * static_cast<double>(t - knots[s]);
                    level += slope * static_cast<double>(knots[s + 1] - knots[s]);
                }
                break;
            }
        }
    }

    if (!cfg.wave_shapes.empty() && rng.uniform() < cfg.p_seas) {
        const std::int64_t k = rng.uniform_int(1, std::max(1, cfg.max_seasonal_components));
        std::vector<double> periods = cfg.periods.empty() ? kPeriodSet : cfg.periods;
        for (std::int64_t c = 0; c < k && !periods.empty(); ++c) {
            const std::size_t pick = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(periods.size()) - 1));
            const double period = periods[pick];
            periods.erase(periods.begin() + static_cast<std::ptrdiff_t>(pick));
            const WaveShape shape = cfg.wave_shapes[rng.uniform_int(
                0, static_cast<std::int64_t>(cfg.wave_shapes.size()) - 1)];
            const double amp = rng.uniform(0.1, 2.0);
            const double phase = rng.uniform(0.0, 2.0 * M_PI);
            for (std::size_t t = 0; t < length; ++t)
                x[t] += amp * wave_value(shape,
                                         2.0 * M_PI * static_cast<double>(t) / period + phase);
        }
    }

    if (!cfg.noise_dists.empty() && rng.uniform() < cfg.p_noise) {
        const NoiseDist dist = cfg.noise_dists[rng.uniform_int(
            0, static_cast<std::int64_t>(cfg.noise_dists.size()) - 1)];
        const double sd = rng.uniform(0.01, 0.5);
        for (double& v : x)
            v += sd * (dist == NoiseDist::gaussian ? rng.normal() : rng.student_t(3.0));
    }

    if (rng.uniform() < cfg.p_out) {
        const std::int64_t n_out =
            rng.uniform_int(1, std::max<std::int64_t>(1, static_cast<std::int64_t>(length) / 100));
        for (std::int64_t i = 0; i < n_out; ++i) {
            const std::size_t pos = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(length) - 1));
            x[pos] += rng.uniform(3.0, 10.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        }
    }

    if (rng.uniform() < cfg.p_shift) {
        const std::int64_t n_shift = rng.uniform_int(1, 3);
        for (std::int64_t i = 0; i < n_shift; ++i) {
            const std::size_t pos = static_cast<std::size_t>(
                rng.uniform_int(1, static_cast<std::int64_t>(length) - 1));
            const double delta = rng.uniform(-2.0, 2.0);
            for (std::size_t t = pos; t < length; ++t) x[t] += delta;
        }
    }

    return x;
}

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

void SynthConfig::validate() const {
    if (length == 0 || length > 4096)
        throw std::invalid_argument("synth: length must be in [1, 4096]");
    const double total = p_kernelsynth + p_spike + p_tsi;
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("synth: mix proportions must sum to 1");
}

namespace {

Series generate_one(const SynthConfig& cfg, std::size_t index) {
    Rng rng = Rng(cfg.seed).split(index);
    Series s;
    s.id = "syn-" + std::to_string(index);

    const double u = rng.uniform();
    if (u < cfg.p_kernelsynth) {
        s.source = "kernelsynth";
        for (;;) {  // resample the kernel on a PSD failure
            ComposedKernel kernel = sample_composed_kernel(rng, cfg.length);
            std::vector<double> mean = sample_mean(rng, cfg.length);
            try {
                s.values = gp_sample(kernel, mean, cfg.length, rng);
                break;
            } catch (const GenerationError&) {
                continue;
            }
        }
    } else if (u < cfg.p_kernelsynth + cfg.p_spike) {
        s.source = "spike";
        s.values = spike_process(rng, cfg.length, cfg.spike);
    } else {
        s.source = "tsi";
        s.values = tsi_process(rng, cfg.length, cfg.tsi);
    }
    return s;
}

}  // namespace

std::vector<Series> generate_corpus(const SynthConfig& cfg, std::size_t n_workers) {
    cfg.validate();
    std::vector<Series> out(cfg.count);
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < cfg.count; ++i) out[i] = generate_one(cfg, i);
        return out;
    }
    std::vector<std::thread> workers;
    std::size_t chunk = (cfg.count + n_workers - 1) / n_workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(cfg.count, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) out[i] = generate_one(cfg, i);
        });
    }
    for (auto& t : workers) t.join();
    return out;
}

}  // namespace reverso
