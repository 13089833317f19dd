// Command-line frontend: synthetic data generation, batch preview, training,
// forecasting, evaluation, checkpoint inspection and plot-data emission.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reverso/augment.hpp"
#include "reverso/inference.hpp"
#include "reverso/io.hpp"
#include "reverso/metrics.hpp"
#include "reverso/model.hpp"
#include "reverso/synthgen.hpp"
#include "reverso/trainer.hpp"

namespace {

using namespace reverso;

FlipMode parse_flip(const std::string& s) {
    if (s == "none") return FlipMode::none;
    if (s == "once") return FlipMode::once;
    if (s == "every") return FlipMode::every;
    throw CLI::ValidationError("--flip must be none|once|every");
}

ModelConfig preset_config(const std::string& name) {
    if (name == "nano") return ModelConfig::nano();
    if (name == "small") return ModelConfig::small();
    if (name == "base") return ModelConfig::base();
    throw CLI::ValidationError("--preset must be nano|small|base");
}

std::vector<double> read_input_series(const std::string& path) {
    if (path != "-") return load_series_file(path);
    std::vector<double> values;
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        values.push_back(std::stod(line));
    }
    if (values.empty()) throw std::runtime_error("no values on stdin");
    return values;
}

void add_inference_flags(CLI::App* cmd, std::string& flip, bool& downsample,
                         InferenceConfig& inf, std::size_t& horizon) {
    cmd->add_option("--flip", flip, "Flip-equivariance mode: none|once|every");
    cmd->add_flag("--downsample", downsample, "Enable seasonality-driven downsampling");
    cmd->add_option("--alpha", inf.alpha, "Peak dominance gate threshold");
    cmd->add_option("--beta", inf.beta, "Noise floor gate threshold");
    cmd->add_option("--min-periods", inf.min_periods, "Periods that must fit the window (M)");
    cmd->add_option("--horizon", horizon, "Forecast horizon T");
}

void add_augment_flags(CLI::App* cmd, AugmentConfig& aug) {
    cmd->add_option("--p-downsample", aug.p_downsample);
    cmd->add_option("--p-modulate", aug.p_modulate);
    cmd->add_option("--p-flip-x", aug.p_flip_x);
    cmd->add_option("--p-flip-y", aug.p_flip_y);
    cmd->add_option("--p-censor", aug.p_censor);
    cmd->add_option("--mixup-alpha", aug.mixup_alpha);
    cmd->add_flag("!--no-aug-downsample", aug.enable_downsample);
    cmd->add_flag("!--no-aug-modulate", aug.enable_modulate);
    cmd->add_flag("!--no-aug-flip", aug.enable_flip);
    cmd->add_flag("!--no-aug-censor", aug.enable_censor);
    cmd->add_flag("!--no-aug-mixup", aug.enable_mixup);
}

int cmd_synth(const SynthConfig& cfg, const std::string& out, const std::string& format,
              std::size_t workers) {
    const std::vector<Series> corpus = generate_corpus(cfg, workers);
    if (format == "bin")
        write_corpus_binary(out, corpus);
    else
        write_corpus_jsonl(out, corpus);
    std::printf("wrote %zu series of length %zu to %s\n", corpus.size(), cfg.length,
                out.c_str());
    return 0;
}

int cmd_augment(const std::string& corpus_path, const AugmentConfig& aug, std::size_t batch,
                std::size_t context, std::size_t patch, std::uint64_t seed) {
    const std::vector<Series> corpus = read_corpus_jsonl(corpus_path);
    Rng rng(seed);
    const Batch b = build_batch(corpus, aug, rng, batch, context, patch);
    std::printf("kind,item,values...\n");
    for (std::size_t i = 0; i < b.context.rows; ++i) {
        std::printf("context,%zu", i);
        for (std::size_t t = 0; t < b.context.cols; ++t)
            std::printf(",%g", b.context(i, t));
        std::printf("\ntarget,%zu", i);
        for (std::size_t t = 0; t < b.target.cols; ++t) std::printf(",%g", b.target(i, t));
        std::printf("\n");
    }
    return 0;
}

int cmd_inspect(const std::string& ckpt) {
    OptStateBlob opt;
    std::unique_ptr<Model> model = load_checkpoint(ckpt, &opt);
    const ModelConfig& cfg = model->config();
    std::printf("layers:      %zu\n", cfg.n_layers);
    std::printf("dim:         %zu\n", cfg.dim);
    std::printf("context_len: %zu\n", cfg.context_len);
    std::printf("patch_len:   %zu\n", cfg.patch_len);
    std::printf("posemb:      %s\n", cfg.use_posemb ? "yes" : "no");
    std::printf("mixer:       %s\n", to_string(cfg.mixer).c_str());
    std::printf("decoder:     %s\n", to_string(cfg.decoder).c_str());
    std::printf("weave:       %s\n", to_string(cfg.weave).c_str());
    std::printf("parameters:  %zu\n", model->param_count());
    if (!opt.m.empty())
        std::printf("optimizer:   step %llu, %zu moments\n",
                    static_cast<unsigned long long>(opt.step), opt.m.size());
    for (ParamRef& p : model->params())
        std::printf("  %-24s %zux%zu\n", p.name.c_str(), p.p->value.rows, p.p->value.cols);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-series forecasting toolkit: synthetic data, training, inference"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    SynthConfig scfg;
    std::string synth_out = "corpus.jsonl", synth_format = "jsonl";
    std::size_t synth_workers = 1;
    synth->add_option("-o,--out", synth_out, "Output path");
    synth->add_option("--format", synth_format, "jsonl|bin");
    synth->add_option("-n,--count", scfg.count, "Number of series");
    synth->add_option("-l,--length", scfg.length, "Series length (<= 4096)");
    synth->add_option("--seed", scfg.seed);
    synth->add_option("--p-kernelsynth", scfg.p_kernelsynth);
    synth->add_option("--p-spike", scfg.p_spike);
    synth->add_option("--p-tsi", scfg.p_tsi);
    synth->add_option("--workers", synth_workers);

    // --- augment ---
    auto* augment = app.add_subcommand("augment", "Preview augmented training batches");
    std::string aug_corpus;
    AugmentConfig aug_cfg;
    std::size_t aug_batch = 4, aug_context = 512, aug_patch = 48;
    std::uint64_t aug_seed = 0;
    augment->add_option("--corpus", aug_corpus, "Corpus JSONL path")->required();
    augment->add_option("--batch", aug_batch);
    augment->add_option("--context", aug_context);
    augment->add_option("--patch", aug_patch);
    augment->add_option("--seed", aug_seed);
    add_augment_flags(augment, aug_cfg);

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "Train a model on a corpus");
    std::string train_corpus, train_out = "model.ckpt", train_resume, train_metrics;
    std::string preset = "nano", mixer = "deltanet", decoder = "attention",
                weave = "previous_deltanet";
    TrainConfig tcfg;
    std::size_t opt_context = 0, opt_patch = 0, opt_layers = 0, opt_dim = 0;
    train_cmd->add_option("--corpus", train_corpus, "Corpus JSONL path")->required();
    train_cmd->add_option("-o,--out", train_out, "Checkpoint path");
    train_cmd->add_option("--resume", train_resume, "Checkpoint to resume from");
    train_cmd->add_option("--preset", preset, "nano|small|base");
    train_cmd->add_option("--layers", opt_layers, "Override layer pairs");
    train_cmd->add_option("--dim", opt_dim, "Override model width");
    train_cmd->add_option("--context", opt_context, "Override context length");
    train_cmd->add_option("--patch", opt_patch, "Override patch length");
    train_cmd->add_option("--mixer", mixer, "deltanet|gated_deltanet");
    train_cmd->add_option("--decoder", decoder, "attention|bilinear");
    train_cmd->add_option("--weave", weave, "previous_deltanet|previous_block");
    train_cmd->add_option("--steps", tcfg.steps);
    train_cmd->add_option("--batch", tcfg.batch_size);
    train_cmd->add_option("--seed", tcfg.seed);
    train_cmd->add_option("--max-lr", tcfg.schedule.max_lr);
    train_cmd->add_option("--clip-norm", tcfg.clip_norm);
    train_cmd->add_option("--checkpoint-every", tcfg.checkpoint_every);
    train_cmd->add_option("--metrics-csv", train_metrics);
    train_cmd->add_option("--log-every", tcfg.log_every);
    add_augment_flags(train_cmd, tcfg.augment);

    // --- forecast / plotdata ---
    auto* fc = app.add_subcommand("forecast", "Forecast a single series");
    auto* plot = app.add_subcommand("plotdata", "Emit forecast-vs-actual CSV");
    std::string fc_ckpt, fc_input = "-", fc_flip = "none", fc_out;
    bool fc_downsample = false;
    InferenceConfig fc_inf;
    std::size_t fc_horizon = 48;
    for (CLI::App* cmd : {fc, plot}) {
        cmd->add_option("--checkpoint", fc_ckpt)->required();
        cmd->add_option("-i,--input", fc_input, "Series file (CSV/JSONL) or - for stdin");
        cmd->add_option("-o,--out", fc_out, "Output path (default stdout)");
        add_inference_flags(cmd, fc_flip, fc_downsample, fc_inf, fc_horizon);
    }

    // --- eval ---
    auto* eval = app.add_subcommand("eval", "Evaluate a task list");
    std::string ev_ckpt, ev_tasks, ev_flip = "none", ev_out;
    bool ev_downsample = false;
    InferenceConfig ev_inf;
    std::size_t ev_horizon = 0;  // per-task horizons are used; flag kept for symmetry
    eval->add_option("--checkpoint", ev_ckpt)->required();
    eval->add_option("--tasks", ev_tasks, "Task list CSV")->required();
    eval->add_option("-o,--out", ev_out, "Results CSV (default stdout)");
    add_inference_flags(eval, ev_flip, ev_downsample, ev_inf, ev_horizon);

    // --- inspect ---
    auto* inspect = app.add_subcommand("inspect", "Describe a checkpoint");
    std::string in_ckpt;
    inspect->add_option("--checkpoint", in_ckpt)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(scfg, synth_out, synth_format, synth_workers);

        if (*augment)
            return cmd_augment(aug_corpus, aug_cfg, aug_batch, aug_context, aug_patch,
                               aug_seed);

        if (*train_cmd) {
            ModelConfig mcfg = preset_config(preset);
            if (opt_layers) mcfg.n_layers = opt_layers;
            if (opt_dim) mcfg.dim = opt_dim;
            if (opt_context) mcfg.context_len = opt_context;
            if (opt_patch) mcfg.patch_len = opt_patch;
            mcfg.mixer = mixer == "gated_deltanet" ? MixerVariant::gated_deltanet
                                                   : MixerVariant::deltanet;
            mcfg.decoder =
                decoder == "bilinear" ? DecoderKind::bilinear : DecoderKind::attention;
            mcfg.weave = weave == "previous_block" ? WeaveMode::previous_block
                                                   : WeaveMode::previous_deltanet;

            tcfg.checkpoint_path = train_out;
            tcfg.metrics_csv = train_metrics;
            const std::vector<Series> corpus = read_corpus_jsonl(train_corpus);

            std::unique_ptr<Model> model;
            OptStateBlob opt;
            std::uint64_t start_step = 0;
            if (!train_resume.empty()) {
                model = load_checkpoint(train_resume, &opt);
                start_step = opt.step;
            } else {
                model = std::make_unique<Model>(mcfg);
                Rng init_rng(tcfg.seed);
                init_parameters(*model, init_rng);
            }
            const TrainResult res =
                train(*model, corpus, tcfg, start_step, opt.m.empty() ? nullptr : &opt);
            std::printf("trained to step %llu, final loss %.6f, checkpoint %s\n",
                        static_cast<unsigned long long>(res.final_step),
                        res.losses.empty() ? 0.0 : res.losses.back(), train_out.c_str());
            return 0;
        }

        if (*fc || *plot) {
            std::unique_ptr<Model> model = load_checkpoint(fc_ckpt);
            ModelForecaster forecaster(*model);
            fc_inf.flip = parse_flip(fc_flip);
            fc_inf.downsample = fc_downsample;
            const std::vector<double> series = read_input_series(fc_input);

            std::ofstream file;
            std::ostream* out = &std::cout;
            if (!fc_out.empty()) {
                file.open(fc_out);
                out = &file;
            }
            if (*fc) {
                const ForecastResult res = forecast(forecaster, series, fc_horizon, fc_inf,
                                                    model->config().context_len);
                for (double v : res.values) *out << v << '\n';
                std::fprintf(stderr,
                             "S=%.1f significant=%d stride=%zu elapsed=%.3fs\n",
                             res.report.period, res.report.significant ? 1 : 0,
                             res.report.stride, res.seconds);
            } else {
                // plotdata: hold out the last T points and forecast them.
                if (series.size() <= fc_horizon)
                    throw std::runtime_error("series shorter than horizon");
                const std::vector<double> history(
                    series.begin(), series.end() - static_cast<std::ptrdiff_t>(fc_horizon));
                const ForecastResult res = forecast(forecaster, history, fc_horizon, fc_inf,
                                                    model->config().context_len);
                *out << "index,actual,forecast\n";
                for (std::size_t i = 0; i < history.size(); ++i)
                    *out << i << ',' << history[i] << ",\n";
                for (std::size_t i = 0; i < fc_horizon; ++i)
                    *out << history.size() + i << ',' << series[history.size() + i] << ','
                         << res.values[i] << '\n';
            }
            return 0;
        }

        if (*eval) {
            std::unique_ptr<Model> model = load_checkpoint(ev_ckpt);
            ModelForecaster forecaster(*model);
            ev_inf.flip = parse_flip(ev_flip);
            ev_inf.downsample = ev_downsample;
            const std::vector<Task> tasks = load_task_csv(ev_tasks);
            const EvalResult res =
                run_benchmark(forecaster, tasks, ev_inf, model->config().context_len);

            std::ofstream file;
            std::ostream* out = &std::cout;
            if (!ev_out.empty()) {
                file.open(ev_out);
                out = &file;
            }
            *out << "dataset,frequency,class,horizon,mase,mae,skipped,reason\n";
            for (const TaskResult& t : res.tasks)
                *out << t.task.dataset << ',' << t.task.frequency << ','
                     << to_string(t.task.horizon_class) << ',' << t.task.horizon << ','
                     << t.mase << ',' << t.mae << ',' << (t.skipped ? 1 : 0) << ','
                     << t.skip_reason << '\n';
            std::fprintf(stderr, "overall MASE %.4f  MAE %.4f  (short %.4f, medium %.4f, long %.4f)\n",
                         res.overall_mase, res.overall_mae, res.mase_by_class[0],
                         res.mase_by_class[1], res.mase_by_class[2]);
            return 0;
        }

        if (*inspect) return cmd_inspect(in_ckpt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
