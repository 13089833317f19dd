#pragma once

#include <string>
#include <vector>

#include "reverso/inference.hpp"

namespace reverso {

// Thrown by mase() when the in-sample seasonal-naive error is zero (constant
// series): the metric is undefined and the task must be skipped, not zeroed.
class UndefinedMetric : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double mae(const std::vector<double>& forecast, const std::vector<double>& actual);

// Seasonal-naive scaled error: mean|forecast - actual| divided by the
// in-sample mean of |insample[t] - insample[t - s_naive]|.
double mase(const std::vector<double>& forecast, const std::vector<double>& actual,
            const std::vector<double>& insample, std::size_t s_naive);

// ---------------------------------------------------------------------------
// Benchmark tasks.
// ---------------------------------------------------------------------------

enum class HorizonClass { short_term, medium_term, long_term };

struct Task {
    std::string dataset;       // path to a series file (CSV/JSONL)
    std::string frequency;     // e.g. "hourly"
    HorizonClass horizon_class = HorizonClass::short_term;
    std::size_t horizon = 1;   // T
    std::size_t s_naive = 1;   // seasonal period for MASE
};

struct TaskResult {
    Task task;
    double mase = 0.0;
    double mae = 0.0;
    bool skipped = false;      // undefined MASE
    std::string skip_reason;
};

struct EvalResult {
    std::vector<TaskResult> tasks;
    double overall_mase = 0.0;  // arithmetic mean over non-skipped tasks
    double overall_mae = 0.0;
    double mase_by_class[3] = {0.0, 0.0, 0.0};  // indexed by HorizonClass
    std::size_t count_by_class[3] = {0, 0, 0};
};

// Conventional seasonal period per frequency tag; unknown tags map to 1.
std::size_t default_seasonal_period(const std::string& frequency);

HorizonClass parse_horizon_class(const std::string& s);
std::string to_string(HorizonClass h);

// CSV columns: dataset path, frequency, horizon class, T, S_naive. A missing
// or zero S_naive falls back to the frequency map. Lines starting with '#'
// and an optional header row are skipped.
std::vector<Task> load_task_csv(const std::string& path);

// Evaluates each task by splitting its series into history (all but the last
// T points) and actuals, forecasting with the configured inference strategy,
// and scoring. Deterministic; never updates model parameters.
EvalResult run_benchmark(PatchForecaster& model, const std::vector<Task>& tasks,
                         const InferenceConfig& cfg, std::size_t context_len);

}  // namespace reverso
