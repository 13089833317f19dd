#pragma once

#include <string>
#include <vector>

#include "reverso/numerics.hpp"
#include "reverso/tensor.hpp"

namespace reverso {

constexpr int kNumHeads = 4;
constexpr int kShortConvLen = 4;

// ---------------------------------------------------------------------------
// Gated long-convolution sequence mixer:
//   x + LayerNorm(SiLU(short_conv(x) .* long_conv(x)))
// The long kernel spans the full context and runs through the FFT path.
// ---------------------------------------------------------------------------
class ConvBlock {
public:
    ConvBlock(std::size_t context_len, std::size_t dim);

    Tensor2 forward(const Tensor2& x);
    // Returns dx; accumulates parameter gradients.
    Tensor2 backward(const Tensor2& d_out);

    void collect_params(std::vector<ParamRef>& out, const std::string& prefix);

    GradPair long_kernel;   // L x d
    GradPair short_kernel;  // k_s x d
    GradPair ln_gain;       // 1 x d
    GradPair ln_bias;       // 1 x d

private:
    Tensor2 x_, short_out_, long_out_, gate_pre_;
    LayerNormCache ln_cache_;
};

// ---------------------------------------------------------------------------
// DeltaNet sequence mixer with state-weaving.
//
// Per head: S_i = g * S_{i-1} (I - beta_i k_i k_i^T) + beta_i v_i k_i^T,
// with L2-normalized keys, beta from a per-head linear + sigmoid, and
// g = 1 for plain DeltaNet or a learned per-head scalar decay in (0,1)
// for the gated variant. Output: x_i + LayerNorm(concat_h S_i q_i).
// ---------------------------------------------------------------------------
class DeltaNetBlock {
public:
    DeltaNetBlock(std::size_t dim, bool gated);

    // carry_in has length d and is added to position 0 (state weaving).
    // carry_out, when non-null, receives the pre-weave input at position L-1.
    Tensor2 forward(const Tensor2& x, const std::vector<double>& carry_in,
                    std::vector<double>* carry_out = nullptr);
    // Returns dx. d_carry, when non-null, receives the carry_in gradient
    // (equal to dx at position 0).
    Tensor2 backward(const Tensor2& d_out, std::vector<double>* d_carry = nullptr);

    void collect_params(std::vector<ParamRef>& out, const std::string& prefix);

    bool gated() const { return gated_; }
    std::size_t head_dim() const { return head_dim_; }

    GradPair w_q, w_k, w_v;        // d x d projections
    GradPair conv_q, conv_k, conv_v;  // k_s x d short convs per projection
    GradPair w_beta;               // d x n_heads
    GradPair b_beta;               // 1 x n_heads
    GradPair decay_logit;          // 1 x n_heads (gated variant only)
    GradPair ln_gain, ln_bias;     // 1 x d

private:
    bool gated_;
    std::size_t dim_, head_dim_;

    // forward caches
    Tensor2 x_woven_;
    Tensor2 q_lin_, k_lin_, v_lin_;  // pre-short-conv projections
    Tensor2 q_, k_, v_;              // post-short-conv, k pre-normalization
    Tensor2 k_hat_;                  // L x d, per-head L2 normalized keys
    std::vector<double> k_norm_;     // L * n_heads
    Tensor2 beta_logits_, beta_;     // L x n_heads
    std::vector<double> states_;     // (L+1) x n_heads x d_h x d_h
    Tensor2 mix_out_;                // L x d, concat_h S_i q_i (pre-LN)
    LayerNormCache ln_cache_;
};

// ---------------------------------------------------------------------------
// Channel-mixing MLP: x + LayerNorm(ReLU(x W_up + b_up) W_down + b_down),
// expansion factor 4.
// ---------------------------------------------------------------------------
class MlpBlock {
public:
    explicit MlpBlock(std::size_t dim);

    Tensor2 forward(const Tensor2& x);
    Tensor2 backward(const Tensor2& d_out);

    void collect_params(std::vector<ParamRef>& out, const std::string& prefix);

    GradPair w_up;    // d x 4d
    GradPair b_up;    // 1 x 4d
    GradPair w_down;  // 4d x d
    GradPair b_down;  // 1 x d
    GradPair ln_gain, ln_bias;

private:
    Tensor2 x_, hidden_pre_, hidden_;
    LayerNormCache ln_cache_;
};

enum class DecoderKind { attention, bilinear };

// ---------------------------------------------------------------------------
// Output head. Attention variant:
//   z = W_L x,  q = z W_q,  k/v from x (plus optional sin-cos table),
//   o = attention(q, k, v),  y_hat = o w_o.
// Bilinear variant: y_hat = W_L (x w_o).
// ---------------------------------------------------------------------------
class DecoderHead {
public:
    DecoderHead(std::size_t context_len, std::size_t patch_len, std::size_t dim,
                DecoderKind kind, bool use_posemb);

    std::vector<double> forward(const Tensor2& x);
    // d_y has length p; returns dx.
    Tensor2 backward(const std::vector<double>& d_y);

    void collect_params(std::vector<ParamRef>& out, const std::string& prefix);

    DecoderKind kind() const { return kind_; }

    GradPair w_len;           // p x L
    GradPair w_q, w_k, w_v;   // d x d
    GradPair w_o;             // d x 1

private:
    DecoderKind kind_;
    bool use_posemb_;
    Tensor2 pos_table_;  // L x d, fixed

    Tensor2 x_, x_kv_, z_, q_, k_, v_, o_;
    Tensor2 xwo_;  // bilinear intermediate, L x 1
    AttentionCache attn_cache_;
};

// Standard interleaved sine/cosine positional table, base 10000.
Tensor2 sincos_positional_table(std::size_t length, std::size_t dim);

}  // namespace reverso
