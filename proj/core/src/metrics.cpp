#include "reverso/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "reverso/io.hpp"

namespace reverso {

double mae(const std::vector<double>& forecast, const std::vector<double>& actual) {
    if (forecast.size() != actual.size() || forecast.empty())
        throw std::invalid_argument("mae: length mismatch or empty input");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        if (!std::isfinite(actual[i])) continue;  // missing actuals are skipped
        sum += std::abs(forecast[i] - actual[i]);
        ++n;
    }
    if (n == 0) throw UndefinedMetric("mae: no finite actual values");
    return sum / static_cast<double>(n);
}

double mase(const std::vector<double>& forecast, const std::vector<double>& actual,
            const std::vector<double>& insample, std::size_t s_naive) {
    if (s_naive < 1) throw std::invalid_argument("mase: s_naive must be >= 1");
    if (insample.size() <= s_naive)
        throw std::invalid_argument("mase: insample must be longer than s_naive");
    double denom = 0.0;
    std::size_t n = 0;
    for (std::size_t t = s_naive; t < insample.size(); ++t) {
        if (!std::isfinite(insample[t]) || !std::isfinite(insample[t - s_naive])) continue;
        denom += std::abs(insample[t] - insample[t - s_naive]);
        ++n;
    }
    if (n == 0 || denom == 0.0)
        throw UndefinedMetric("mase: zero in-sample seasonal-naive error");
    denom /= static_cast<double>(n);
    return mae(forecast, actual) / denom;
}

std::size_t default_seasonal_period(const std::string& frequency) {
    if (frequency == "hourly") return 24;
    if (frequency == "daily") return 7;
    if (frequency == "weekly") return 52;
    if (frequency == "monthly") return 12;
    if (frequency == "quarterly") return 4;
    if (frequency == "yearly") return 1;
    return 1;
}

HorizonClass parse_horizon_class(const std::string& s) {
    if (s == "short") return HorizonClass::short_term;
    if (s == "medium") return HorizonClass::medium_term;
    if (s == "long") return HorizonClass::long_term;
    throw std::invalid_argument("unknown horizon class: " + s);
}

std::string to_string(HorizonClass h) {
    switch (h) {
        case HorizonClass::short_term: return "short";
        case HorizonClass::medium_term: return "medium";
        case HorizonClass::long_term: return "long";
    }
    return "?";
}

std::vector<Task> load_task_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open task list: " + path);
    std::vector<Task> tasks;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string dataset, freq, hclass, horizon, snaive;
        std::getline(ss, dataset, ',');
        std::getline(ss, freq, ',');
        std::getline(ss, hclass, ',');
        std::getline(ss, horizon, ',');
        std::getline(ss, snaive, ',');
        if (first) {
            first = false;
            // Optional header row: detectable by a non-numeric horizon column.
            try {
                (void)std::stoul(horizon);
            } catch (const std::exception&) {
                continue;
            }
        }
        Task t;
        t.dataset = dataset;
        t.frequency = freq;
        t.horizon_class = parse_horizon_class(hclass);
        t.horizon = std::stoul(horizon);
        t.s_naive = snaive.empty() ? 0 : std::stoul(snaive);
        if (t.s_naive == 0) t.s_naive = default_seasonal_period(freq);
        if (t.horizon < 1) throw std::invalid_argument("task horizon must be >= 1");
        tasks.push_back(std::move(t));
    }
    return tasks;
}

EvalResult run_benchmark(PatchForecaster& model, const std::vector<Task>& tasks,
                         const InferenceConfig& cfg, std::size_t context_len) {
    EvalResult result;
    double mase_sum = 0.0, mae_sum = 0.0;
    double class_sum[3] = {0.0, 0.0, 0.0};
    std::size_t n_scored = 0;

    for (const Task& task : tasks) {
        TaskResult tr;
        tr.task = task;
        try {
            const std::vector<double> series = load_series_file(task.dataset);
            if (series.size() <= task.horizon)
                throw std::invalid_argument("series shorter than horizon");
            const std::vector<double> history(series.begin(),
                                              series.end() - static_cast<std::ptrdiff_t>(
                                                                 task.horizon));
            const std::vector<double> actual(series.end() - static_cast<std::ptrdiff_t>(
                                                                task.horizon),
                                             series.end());
            const ForecastResult fc =
                forecast(model, history, task.horizon, cfg, context_len);
            tr.mae = mae(fc.values, actual);
            tr.mase = mase(fc.values, actual, history, task.s_naive);
        } catch (const UndefinedMetric& e) {
            tr.skipped = true;
            tr.skip_reason = e.what();
        } catch (const std::invalid_argument& e) {
            tr.skipped = true;
            tr.skip_reason = e.what();
        }
        if (!tr.skipped) {
            mase_sum += tr.mase;
            mae_sum += tr.mae;
            const int c = static_cast<int>(task.horizon_class);
            class_sum[c] += tr.mase;
            ++result.count_by_class[c];
            ++n_scored;
        }
        result.tasks.push_back(std::move(tr));
    }

    if (n_scored > 0) {
        result.overall_mase = mase_sum / static_cast<double>(n_scored);
        result.overall_mae = mae_sum / static_cast<double>(n_scored);
    }
    for (int c = 0; c < 3; ++c)
        if (result.count_by_class[c] > 0)
            result.mase_by_class[c] =
                class_sum[c] / static_cast<double>(result.count_by_class[c]);
    return result;
}

}  // namespace reverso
