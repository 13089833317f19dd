#include "reverso/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace reverso {

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ModelConfig ModelConfig::nano() {
    ModelConfig c;
    c.n_layers = 2;
    c.dim = 32;
    return c;
}

ModelConfig ModelConfig::small() {
    ModelConfig c;
    c.n_layers = 4;
    c.dim = 64;
    return c;
}

ModelConfig ModelConfig::base() {
    ModelConfig c;
    c.n_layers = 8;
    c.dim = 128;
    c.use_posemb = true;
    return c;
}

void ModelConfig::validate() const {
    if (context_len < patch_len || patch_len < 1)
        throw std::invalid_argument("config: need L >= p >= 1");
    if (dim % kNumHeads != 0)
        throw std::invalid_argument("config: dim must be divisible by the head count");
    if (n_layers < 1) throw std::invalid_argument("config: need at least one layer");
}

std::string to_string(MixerVariant v) {
    return v == MixerVariant::deltanet ? "deltanet" : "gated_deltanet";
}
std::string to_string(DecoderKind k) {
    return k == DecoderKind::attention ? "attention" : "bilinear";
}
std::string to_string(WeaveMode w) {
    return w == WeaveMode::previous_deltanet ? "previous_deltanet" : "previous_block";
}

// ---------------------------------------------------------------------------
// Normalization / imputation / loss
// ---------------------------------------------------------------------------

std::vector<double> normalize(const std::vector<double>& t, NormStats& stats) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : t) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) throw std::invalid_argument("normalize: no finite values");
    stats.min = lo;
    stats.max = hi;
    stats.degenerate = (hi == lo);

    std::vector<double> out(t.size());
    const double scale = hi - lo;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]))
            out[i] = t[i];
        else
            out[i] = stats.degenerate ? 0.5 : (t[i] - lo) / scale;
    }
    return out;
}

double unnormalize_value(double v, const NormStats& stats) {
    return stats.min + v * (stats.max - stats.min);
}

std::vector<double> unnormalize(const std::vector<double>& v, const NormStats& stats) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = unnormalize_value(v[i], stats);
    return out;
}

std::vector<double> impute_and_pad(const std::vector<double>& t, std::size_t len) {
    if (t.empty()) throw std::invalid_argument("impute_and_pad: empty series");

    std::vector<double> s = t;
    // Interior NaNs: linear interpolation between nearest finite neighbors;
    // edges held at the nearest finite value.
    std::ptrdiff_t first = -1, last = -1;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::isfinite(s[i])) {
            if (first < 0) first = static_cast<std::ptrdiff_t>(i);
            last = static_cast<std::ptrdiff_t>(i);
        }
    }
    if (first < 0) throw std::invalid_argument("impute_and_pad: no finite values");
    for (std::ptrdiff_t i = 0; i < first; ++i) s[i] = s[first];
    for (std::size_t i = static_cast<std::size_t>(last) + 1; i < s.size(); ++i) s[i] = s[last];
    std::size_t i = static_cast<std::size_t>(first);
    while (i < static_cast<std::size_t>(last)) {
        if (std::isfinite(s[i + 1])) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (!std::isfinite(s[j])) ++j;
        const double step = (s[j] - s[i]) / static_cast<double>(j - i);
        for (std::size_t m = i + 1; m < j; ++m)
            s[m] = s[i] + step * static_cast<double>(m - i);
        i = j;
    }

    if (s.size() == len) return s;
    if (s.size() > len) return std::vector<double>(s.end() - static_cast<std::ptrdiff_t>(len), s.end());

    std::vector<double> out(len, s.front());
    std::copy(s.begin(), s.end(), out.end() - static_cast<std::ptrdiff_t>(s.size()));
    return out;
}

MaeResult mae_loss(const Tensor2& pred, const Tensor2& target,
                   const std::vector<std::uint8_t>& mask) {
    if (!pred.same_shape(target) || mask.size() != pred.size())
        throw std::invalid_argument("mae_loss: shape mismatch");
    MaeResult r;
    r.d_pred = Tensor2(pred.rows, pred.cols);
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (mask[i]) ++r.n_valid;
    if (r.n_valid == 0) return r;
    const double inv_n = 1.0 / static_cast<double>(r.n_valid);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) continue;
        const double diff = pred.data[i] - target.data[i];
        r.loss += std::abs(diff) * inv_n;
        if (diff > 0.0)
            r.d_pred.data[i] = inv_n;
        else if (diff < 0.0)
            r.d_pred.data[i] = -inv_n;
        // subgradient 0 at exact ties
    }
    return r;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

Model::Model(const ModelConfig& cfg) : embed_w(1, cfg.dim), embed_b(1, cfg.dim), cfg_(cfg) {
    cfg_.validate();
    conv_.resize(cfg_.n_layers);
    delta_.resize(cfg_.n_layers);
    mlp_.resize(cfg_.n_layers);
    for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
        if (is_deltanet_pair(l))
            delta_[l] = std::make_unique<DeltaNetBlock>(
                cfg_.dim, cfg_.mixer == MixerVariant::gated_deltanet);
        else
            conv_[l] = std::make_unique<ConvBlock>(cfg_.context_len, cfg_.dim);
        mlp_[l] = std::make_unique<MlpBlock>(cfg_.dim);
    }
    decoder_ = std::make_unique<DecoderHead>(cfg_.context_len, cfg_.patch_len, cfg_.dim,
                                             cfg_.decoder, cfg_.use_posemb);
}

std::vector<double> Model::forward(const std::vector<double>& context) {
    const std::size_t L = cfg_.context_len, d = cfg_.dim;
    if (context.size() != L) throw std::invalid_argument("forward: context length mismatch");
    context_ = context;

    Tensor2 x(L, d);
    for (std::size_t i = 0; i < L; ++i) {
        double* row = x.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j)
            row[j] = context[i] * embed_w.value.data[j] + embed_b.value.data[j];
    }

    std::vector<double> carry(d, 0.0);  // zero for the first DeltaNet layer
    for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
        if (is_deltanet_pair(l)) {
            std::vector<double> carry_in;
            if (cfg_.weave == WeaveMode::previous_block) {
                carry_in.assign(d, 0.0);
                for (std::size_t j = 0; j < d; ++j) carry_in[j] = x(L - 1, j);
            } else {
                carry_in = carry;
            }
            std::vector<double> carry_out;
            x = delta_[l]->forward(x, carry_in, &carry_out);
            carry = carry_out;
        } else {
            x = conv_[l]->forward(x);
        }
        x = mlp_[l]->forward(x);
    }
    return decoder_->forward(x);
}

void Model::backward(const std::vector<double>& d_y) {
    const std::size_t L = cfg_.context_len, d = cfg_.dim;
    Tensor2 dx = decoder_->backward(d_y);

    // Carry gradient pending from a DeltaNet block later in the network; it
    // lands on position L-1 of the source tensor.
    std::vector<double> pending;
    for (std::size_t l = cfg_.n_layers; l-- > 0;) {
        dx = mlp_[l]->backward(dx);
        if (is_deltanet_pair(l)) {
            std::vector<double> d_carry;
            dx = delta_[l]->backward(dx, &d_carry);
            if (cfg_.weave == WeaveMode::previous_block) {
                for (std::size_t j = 0; j < d; ++j) dx(L - 1, j) += d_carry[j];
            } else {
                if (!pending.empty())
                    for (std::size_t j = 0; j < d; ++j) dx(L - 1, j) += pending[j];
                pending = d_carry;
            }
        } else {
            dx = conv_[l]->backward(dx);
        }
    }
    // A leftover pending gradient belongs to the first DeltaNet layer's
    // zero carry and is dropped.

    for (std::size_t i = 0; i < L; ++i) {
        const double* row = dx.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) {
            embed_w.grad.data[j] += context_[i] * row[j];
            embed_b.grad.data[j] += row[j];
        }
    }
}

std::vector<double> Model::predict_patch(const std::vector<double>& history) {
    std::vector<double> window = history;
    if (window.size() > cfg_.context_len)
        window.assign(window.end() - static_cast<std::ptrdiff_t>(cfg_.context_len),
                      window.end());
    NormStats stats;
    std::vector<double> norm = normalize(window, stats);
    std::vector<double> ctx = impute_and_pad(norm, cfg_.context_len);
    std::vector<double> y = forward(ctx);
    return unnormalize(y, stats);
}

std::vector<ParamRef> Model::params() {
    std::vector<ParamRef> out;
    out.push_back({"embed.w", &embed_w});
    out.push_back({"embed.b", &embed_b});
    for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
        const std::string prefix = "block" + std::to_string(l);
        if (is_deltanet_pair(l))
            delta_[l]->collect_params(out, prefix + ".deltanet");
        else
            conv_[l]->collect_params(out, prefix + ".conv");
        mlp_[l]->collect_params(out, prefix + ".mlp");
    }
    decoder_->collect_params(out, "decoder");
    return out;
}

std::size_t Model::param_count() {
    std::size_t n = 0;
    for (const auto& pr : params()) n += pr.p->size();
    return n;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

MixerVariant mixer_from_string(const std::string& s) {
    if (s == "deltanet") return MixerVariant::deltanet;
    if (s == "gated_deltanet") return MixerVariant::gated_deltanet;
    throw std::runtime_error("checkpoint: unknown mixer variant " + s);
}
DecoderKind decoder_from_string(const std::string& s) {
    if (s == "attention") return DecoderKind::attention;
    if (s == "bilinear") return DecoderKind::bilinear;
    throw std::runtime_error("checkpoint: unknown decoder kind " + s);
}
WeaveMode weave_from_string(const std::string& s) {
    if (s == "previous_deltanet") return WeaveMode::previous_deltanet;
    if (s == "previous_block") return WeaveMode::previous_block;
    throw std::runtime_error("checkpoint: unknown weave mode " + s);
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    // Little-endian float64. The build targets little-endian hosts only.
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& is, std::vector<double>& v) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated blob");
}

}  // namespace

void save_checkpoint(const std::string& path, Model& model, const OptStateBlob* opt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);

    const ModelConfig& c = model.config();
    os.write("RVSO", 4);
    os << "\nformat_version 1\n";
    os << "config\n";
    os << "n_layers " << c.n_layers << "\n";
    os << "dim " << c.dim << "\n";
    os << "context_len " << c.context_len << "\n";
    os << "patch_len " << c.patch_len << "\n";
    os << "use_posemb " << (c.use_posemb ? 1 : 0) << "\n";
    os << "mixer " << to_string(c.mixer) << "\n";
    os << "decoder " << to_string(c.decoder) << "\n";
    os << "weave " << to_string(c.weave) << "\n";
    os << "end\n";

    auto params = model.params();
    os << "manifest\n";
    std::size_t offset = 0;
    for (const auto& pr : params) {
        os << pr.name << " " << pr.p->value.rows << " " << pr.p->value.cols << " "
           << offset * sizeof(double) << "\n";
        offset += pr.p->size();
    }
    os << "end\n";
    os << "blob " << offset * sizeof(double) << "\n";
    for (const auto& pr : params) write_doubles(os, pr.p->value.data);

    if (opt != nullptr && !opt->m.empty()) {
        if (opt->m.size() != offset || opt->v.size() != offset)
            throw std::runtime_error("checkpoint: optimizer state size mismatch");
        os << "optstate " << opt->step << "\n";
        write_doubles(os, opt->m);
        write_doubles(os, opt->v);
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::unique_ptr<Model> load_checkpoint(const std::string& path, OptStateBlob* opt) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "RVSO", 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");

    std::string line;
    std::getline(is, line);  // rest of magic line
    std::getline(is, line);
    if (line != "format_version 1") throw std::runtime_error("checkpoint: bad version");
    std::getline(is, line);
    if (line != "config") throw std::runtime_error("checkpoint: missing config");

    std::map<std::string, std::string> kv;
    while (std::getline(is, line) && line != "end") {
        auto sp = line.find(' ');
        kv[line.substr(0, sp)] = line.substr(sp + 1);
    }
    ModelConfig cfg;
    cfg.n_layers = std::stoull(kv.at("n_layers"));
    cfg.dim = std::stoull(kv.at("dim"));
    cfg.context_len = std::stoull(kv.at("context_len"));
    cfg.patch_len = std::stoull(kv.at("patch_len"));
    cfg.use_posemb = kv.at("use_posemb") == "1";
    cfg.mixer = mixer_from_string(kv.at("mixer"));
    cfg.decoder = decoder_from_string(kv.at("decoder"));
    cfg.weave = weave_from_string(kv.at("weave"));

    auto model = std::make_unique<Model>(cfg);
    auto params = model->params();

    std::getline(is, line);
    if (line != "manifest") throw std::runtime_error("checkpoint: missing manifest");
    std::size_t idx = 0;
    while (std::getline(is, line) && line != "end") {
        std::istringstream ls(line);
        std::string name;
        std::size_t rows, cols, offset;
        ls >> name >> rows >> cols >> offset;
        if (idx >= params.size() || params[idx].name != name ||
            params[idx].p->value.rows != rows || params[idx].p->value.cols != cols)
            throw std::runtime_error("checkpoint: manifest mismatch at " + name);
        ++idx;
    }
    if (idx != params.size()) throw std::runtime_error("checkpoint: manifest too short");

    std::getline(is, line);
    if (line.rfind("blob ", 0) != 0) throw std::runtime_error("checkpoint: missing blob");
    for (auto& pr : params) read_doubles(is, pr.p->value.data);

    if (opt != nullptr) {
        opt->m.clear();
        opt->v.clear();
        opt->step = 0;
        if (std::getline(is, line) && line.rfind("optstate ", 0) == 0) {
            opt->step = std::stoull(line.substr(9));
            std::size_t total = 0;
            for (const auto& pr : params) total += pr.p->size();
            opt->m.resize(total);
            opt->v.resize(total);
            read_doubles(is, opt->m);
            read_doubles(is, opt->v);
        }
    }
    return model;
}

}  // namespace reverso
