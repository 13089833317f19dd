#pragma once

#include <optional>
#include <vector>

#include "reverso/tensor.hpp"

namespace reverso {

// ---------------------------------------------------------------------------
// Dense linear algebra. All matrices are row-major Tensor2.
// ---------------------------------------------------------------------------

// C = A * B (A: m x k, B: k x n).
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
// C = A * B^T (A: m x k, B: n x k).
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);
// C = A^T * B (A: k x m, B: k x n).
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);
// C += A^T * B, in place.
void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);
// C += A * B^T, in place.
void matmul_nt_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);
// C += A * B, in place.
void matmul_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);

// y = x * W + b. b is a 1 x n tensor (optional).
Tensor2 linear_forward(const Tensor2& x, const Tensor2& w, const Tensor2* b);
// Backward of linear_forward; accumulates into dw/db, returns dx.
Tensor2 linear_backward(const Tensor2& x, const Tensor2& w, const Tensor2& d_out,
                        Tensor2& dw, Tensor2* db);

// ---------------------------------------------------------------------------
// Elementwise activations.
// ---------------------------------------------------------------------------

double sigmoid_scalar(double x);

Tensor2 silu(const Tensor2& x);
Tensor2 relu(const Tensor2& x);
Tensor2 sigmoid(const Tensor2& x);

// Each backward takes the forward *input* and the upstream gradient.
Tensor2 silu_backward(const Tensor2& x, const Tensor2& d_out);
Tensor2 relu_backward(const Tensor2& x, const Tensor2& d_out);
Tensor2 sigmoid_backward(const Tensor2& x, const Tensor2& d_out);

// ---------------------------------------------------------------------------
// Layer normalization over channels, per position.
// ---------------------------------------------------------------------------

struct LayerNormCache {
    std::vector<double> mean;
    std::vector<double> inv_std;
    Tensor2 x_hat;
};

constexpr double kLayerNormEps = 1e-5;

Tensor2 layernorm_forward(const Tensor2& x, const Tensor2& gain, const Tensor2& bias,
                          LayerNormCache& cache);
Tensor2 layernorm_backward(const LayerNormCache& cache, const Tensor2& gain,
                           const Tensor2& d_out, Tensor2& d_gain, Tensor2& d_bias);

// ---------------------------------------------------------------------------
// Causal depthwise convolution. x: L x d, w: k x d (k <= L for the direct
// path, k == L for the FFT path). Positions before the start contribute zero.
// ---------------------------------------------------------------------------

Tensor2 causal_depthwise_conv_direct(const Tensor2& x, const Tensor2& w);
void causal_depthwise_conv_direct_backward(const Tensor2& x, const Tensor2& w,
                                           const Tensor2& d_out, Tensor2& dx, Tensor2& dw);

// FFT path: zero-pad to the next power of two >= 2L, pointwise spectral
// multiply, truncate to the first L outputs.
Tensor2 causal_depthwise_conv_fft(const Tensor2& x, const Tensor2& w);
void causal_depthwise_conv_fft_backward(const Tensor2& x, const Tensor2& w,
                                        const Tensor2& d_out, Tensor2& dx, Tensor2& dw);

// ---------------------------------------------------------------------------
// Unmasked softmax attention. q: p x d, k/v: L x d, scale 1/sqrt(d).
// ---------------------------------------------------------------------------

struct AttentionCache {
    Tensor2 weights;  // p x L, rows sum to 1
};

Tensor2 softmax_attention(const Tensor2& q, const Tensor2& k, const Tensor2& v,
                          AttentionCache* cache = nullptr);
void softmax_attention_backward(const Tensor2& q, const Tensor2& k, const Tensor2& v,
                                const AttentionCache& cache, const Tensor2& d_out,
                                Tensor2& dq, Tensor2& dk, Tensor2& dv);

}  // namespace reverso
