#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "reverso/layers.hpp"
#include "reverso/tensor.hpp"

namespace reverso {

enum class MixerVariant { deltanet, gated_deltanet };
enum class WeaveMode { previous_deltanet, previous_block };

struct ModelConfig {
    std::size_t n_layers = 2;     // number of (mixer + MLP) pairs
    std::size_t dim = 32;
    std::size_t context_len = 2048;
    std::size_t patch_len = 48;
    bool use_posemb = false;
    MixerVariant mixer = MixerVariant::deltanet;
    DecoderKind decoder = DecoderKind::attention;
    WeaveMode weave = WeaveMode::previous_deltanet;

    // Presets: Nano (2, 32), Small (4, 64), Base (8, 128).
    static ModelConfig nano();
    static ModelConfig small();
    static ModelConfig base();

    void validate() const;
};

struct NormStats {
    double min = 0.0;
    double max = 0.0;
    bool degenerate = false;  // max == min
};

struct Batch {
    Tensor2 context;               // B x L, normalized
    Tensor2 target;                // B x p, raw scale (NaN where missing)
    std::vector<std::uint8_t> mask;  // B*p, 1 = valid
    std::vector<NormStats> stats;  // per item
};

// Min-max normalization to [0, 1]. NaNs are ignored for the stats and kept
// in place. Constant series map to all-0.5 with the degenerate flag set.
/// Throws std::invalid_argument when no finite value exists.
std::vector<double> normalize(const std::vector<double>& t, NormStats& stats);
std::vector<double> unnormalize(const std::vector<double>& v, const NormStats& stats);
double unnormalize_value(double v, const NormStats& stats);

// Linear interpolation of interior NaNs, edge hold for leading/trailing
// NaNs, left-pad (repeat leftmost value) to length L. Series longer than L
// keep their last L points.
std::vector<double> impute_and_pad(const std::vector<double>& t, std::size_t len);

struct MaeResult {
    double loss = 0.0;
    Tensor2 d_pred;  // same shape as pred
    std::size_t n_valid = 0;
};

// Mean absolute error over valid entries, with subgradient 0 at exact ties.
MaeResult mae_loss(const Tensor2& pred, const Tensor2& target,
                   const std::vector<std::uint8_t>& mask);

// ---------------------------------------------------------------------------
/// The forecasting model: 1 -> d affine embedding, alternating conv / DeltaNet
// mixers (conv first) each followed by an MLP, then the decoder head.
// ---------------------------------------------------------------------------
class Model {
public:
    explicit Model(const ModelConfig& cfg);

    // context must be length L, already normalized. Returns p values in
    // normalized space. Caches activations for backward().
    std::vector<double> forward(const std::vector<double>& context);
    // Accumulates parameter gradients for the most recent forward call.
    void backward(const std::vector<double>& d_y);

    // Full inference path: normalize -> impute/pad -> forward -> unnormalize.
    std::vector<double> predict_patch(const std::vector<double>& history);

    std::vector<ParamRef> params();
    std::size_t param_count();

    const ModelConfig& config() const { return cfg_; }

    GradPair embed_w;  // 1 x d
    GradPair embed_b;  // 1 x d

    bool is_deltanet_pair(std::size_t pair_idx) const { return pair_idx % 2 == 1; }

    ConvBlock& conv_block(std::size_t pair_idx) { return *conv_[pair_idx]; }
    DeltaNetBlock& deltanet_block(std::size_t pair_idx) { return *delta_[pair_idx]; }
    MlpBlock& mlp_block(std::size_t pair_idx) { return *mlp_[pair_idx]; }
    DecoderHead& decoder() { return *decoder_; }

private:
    ModelConfig cfg_;
    // One slot per pair; exactly one of conv_/delta_ is set depending on parity.
    std::vector<std::unique_ptr<ConvBlock>> conv_;
    std::vector<std::unique_ptr<DeltaNetBlock>> delta_;
    std::vector<std::unique_ptr<MlpBlock>> mlp_;
    std::unique_ptr<DecoderHead> decoder_;

    std::vector<double> context_;  // cached embedding input
};

// ---------------------------------------------------------------------------
// Checkpoint I/O. Versioned header (magic "RVSO"), config as key-value text,
// parameter manifest (name, shape, byte offset), little-endian float64 blob,
// and an optional optimizer-state section for exact resume.
// ---------------------------------------------------------------------------
struct OptStateBlob {
    std::uint64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
};

void save_checkpoint(const std::string& path, Model& model,
                     const OptStateBlob* opt = nullptr);
// Returns the model; fills *opt when the checkpoint carries optimizer state
// and opt is non-null (opt->m empty otherwise).
std::unique_ptr<Model> load_checkpoint(const std::string& path,
                                       OptStateBlob* opt = nullptr);

std::string to_string(MixerVariant v);
std::string to_string(DecoderKind k);
std::string to_string(WeaveMode w);

}  // namespace reverso
