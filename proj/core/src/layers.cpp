#include "reverso/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace reverso {

namespace {
constexpr double kKeyNormEps = 1e-24;  // added under the sqrt of ||k||
}

// ---------------------------------------------------------------------------
// ConvBlock
// ---------------------------------------------------------------------------

ConvBlock::ConvBlock(std::size_t context_len, std::size_t dim)
    : long_kernel(context_len, dim),
      short_kernel(kShortConvLen, dim),
      ln_gain(1, dim),
      ln_bias(1, dim) {
    ln_gain.value.fill(1.0);
}

Tensor2 ConvBlock::forward(const Tensor2& x) {
    x_ = x;
    short_out_ = causal_depthwise_conv_direct(x, short_kernel.value);
    long_out_ = causal_depthwise_conv_fft(x, long_kernel.value);
    gate_pre_ = Tensor2(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i)
        gate_pre_.data[i] = short_out_.data[i] * long_out_.data[i];
    Tensor2 act = silu(gate_pre_);
    Tensor2 y = layernorm_forward(act, ln_gain.value, ln_bias.value, ln_cache_);
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += x.data[i];
    return y;
}

Tensor2 ConvBlock::backward(const Tensor2& d_out) {
    Tensor2 d_act = layernorm_backward(ln_cache_, ln_gain.value, d_out,
                                       ln_gain.grad, ln_bias.grad);
    Tensor2 d_pre = silu_backward(gate_pre_, d_act);

    Tensor2 d_short(x_.rows, x_.cols), d_long(x_.rows, x_.cols);
    for (std::size_t i = 0; i < x_.size(); ++i) {
        d_short.data[i] = d_pre.data[i] * long_out_.data[i];
        d_long.data[i] = d_pre.data[i] * short_out_.data[i];
    }

    Tensor2 dx = d_out;  // residual path
    causal_depthwise_conv_direct_backward(x_, short_kernel.value, d_short, dx,
                                          short_kernel.grad);
    causal_depthwise_conv_fft_backward(x_, long_kernel.value, d_long, dx, long_kernel.grad);
    return dx;
}

void ConvBlock::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".long_kernel", &long_kernel});
    out.push_back({prefix + ".short_kernel", &short_kernel});
    out.push_back({prefix + ".ln_gain", &ln_gain});
    out.push_back({prefix + ".ln_bias", &ln_bias});
}

// ---------------------------------------------------------------------------
// DeltaNetBlock
// ---------------------------------------------------------------------------

DeltaNetBlock::DeltaNetBlock(std::size_t dim, bool gated)
    : w_q(dim, dim),
      w_k(dim, dim),
      w_v(dim, dim),
      conv_q(kShortConvLen, dim),
      conv_k(kShortConvLen, dim),
      conv_v(kShortConvLen, dim),
      w_beta(dim, kNumHeads),
      b_beta(1, kNumHeads),
      decay_logit(1, kNumHeads),
      ln_gain(1, dim),
      ln_bias(1, dim),
      gated_(gated),
      dim_(dim),
      head_dim_(dim / kNumHeads) {
    if (dim % kNumHeads != 0)
        throw std::invalid_argument("deltanet: dim must be divisible by " +
                                    std::to_string(kNumHeads));
    ln_gain.value.fill(1.0);
}

Tensor2 DeltaNetBlock::forward(const Tensor2& x, const std::vector<double>& carry_in,
                               std::vector<double>* carry_out) {
    const std::size_t L = x.rows, d = dim_, dh = head_dim_;
    if (x.cols != d) throw std::invalid_argument("deltanet: channel mismatch");
    if (carry_in.size() != d) throw std::invalid_argument("deltanet: carry size mismatch");

    if (carry_out != nullptr) {
        carry_out->assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) (*carry_out)[j] = x(L - 1, j);
    }

    x_woven_ = x;
    for (std::size_t j = 0; j < d; ++j) x_woven_(0, j) += carry_in[j];

    q_lin_ = matmul(x_woven_, w_q.value);
    k_lin_ = matmul(x_woven_, w_k.value);
    v_lin_ = matmul(x_woven_, w_v.value);
    q_ = causal_depthwise_conv_direct(q_lin_, conv_q.value);
    k_ = causal_depthwise_conv_direct(k_lin_, conv_k.value);
    v_ = causal_depthwise_conv_direct(v_lin_, conv_v.value);

    beta_logits_ = linear_forward(x_woven_, w_beta.value, &b_beta.value);
    beta_ = sigmoid(beta_logits_);

    // Per-head L2 key normalization.
    k_hat_ = Tensor2(L, d);
    k_norm_.assign(L * kNumHeads, 0.0);
    for (std::size_t t = 0; t < L; ++t) {
        for (int h = 0; h < kNumHeads; ++h) {
            double ss = kKeyNormEps;
            for (std::size_t j = 0; j < dh; ++j) {
                const double kv = k_(t, h * dh + j);
                ss += kv * kv;
            }
            const double nrm = std::sqrt(ss);
            k_norm_[t * kNumHeads + h] = nrm;
            for (std::size_t j = 0; j < dh; ++j)
                k_hat_(t, h * dh + j) = k_(t, h * dh + j) / nrm;
        }
    }

    // Sequential delta-rule recurrence; all intermediate states are kept for
    // the backward pass.
    states_.assign((L + 1) * kNumHeads * dh * dh, 0.0);
    mix_out_ = Tensor2(L, d);
    std::vector<double> sk(dh);
    for (int h = 0; h < kNumHeads; ++h) {
        const double g = gated_ ? sigmoid_scalar(decay_logit.value.data[h]) : 1.0;
        for (std::size_t t = 0; t < L; ++t) {
            const double* prev = &states_[(t * kNumHeads + h) * dh * dh];
            double* cur = &states_[((t + 1) * kNumHeads + h) * dh * dh];
            const double* kh = k_hat_.row_ptr(t) + h * dh;
            const double* vh = v_.row_ptr(t) + h * dh;
            const double* qh = q_.row_ptr(t) + h * dh;
            const double beta = beta_(t, h);

            // sk = S_{t-1} k_hat
            for (std::size_t a = 0; a < dh; ++a) {
                double s = 0.0;
                const double* row = prev + a * dh;
                for (std::size_t b = 0; b < dh; ++b) s += row[b] * kh[b];
                sk[a] = s;
            }
            // S_t = g * (S_{t-1} - beta * sk k_hat^T) + beta * v k_hat^T
            for (std::size_t a = 0; a < dh; ++a) {
                const double* prow = prev + a * dh;
                double* crow = cur + a * dh;
                const double coef = g * (-beta) * sk[a] + beta * vh[a];
                for (std::size_t b = 0; b < dh; ++b) crow[b] = g * prow[b] + coef * kh[b];
            }
            // output slice: S_t q_t
            double* out = mix_out_.row_ptr(t) + h * dh;
            for (std::size_t a = 0; a < dh; ++a) {
                double s = 0.0;
                const double* crow = cur + a * dh;
                for (std::size_t b = 0; b < dh; ++b) s += crow[b] * qh[b];
                out[a] = s;
            }
        }
    }

    Tensor2 y = layernorm_forward(mix_out_, ln_gain.value, ln_bias.value, ln_cache_);
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += x_woven_.data[i];
    return y;
}

Tensor2 DeltaNetBlock::backward(const Tensor2& d_out, std::vector<double>* d_carry) {
    const std::size_t L = x_woven_.rows, d = dim_, dh = head_dim_;

    Tensor2 d_mix = layernorm_backward(ln_cache_, ln_gain.value, d_out,
                                       ln_gain.grad, ln_bias.grad);

    Tensor2 dq(L, d), dk_hat(L, d), dv(L, d);
    Tensor2 d_beta(L, kNumHeads);

    std::vector<double> G(dh * dh), w1(dh), w2(dh), sk(dh), z1(dh), z2(dh);
    for (int h = 0; h < kNumHeads; ++h) {
        const double g = gated_ ? sigmoid_scalar(decay_logit.value.data[h]) : 1.0;
        double dg = 0.0;
        std::fill(G.begin(), G.end(), 0.0);
        for (std::size_t tt = L; tt-- > 0;) {
            const double* prev = &states_[(tt * kNumHeads + h) * dh * dh];
            const double* cur = &states_[((tt + 1) * kNumHeads + h) * dh * dh];
            const double* kh = k_hat_.row_ptr(tt) + h * dh;
            const double* vh = v_.row_ptr(tt) + h * dh;
            const double* qh = q_.row_ptr(tt) + h * dh;
            const double* du = d_mix.row_ptr(tt) + h * dh;
            const double beta = beta_(tt, h);

            // dq_t = S_t^T du_t; G += du_t q_t^T.
            double* dqh = dq.row_ptr(tt) + h * dh;
            for (std::size_t b = 0; b < dh; ++b) {
                double s = 0.0;
                for (std::size_t a = 0; a < dh; ++a) s += cur[a * dh + b] * du[a];
                dqh[b] += s;
            }
            for (std::size_t a = 0; a < dh; ++a)
                for (std::size_t b = 0; b < dh; ++b) G[a * dh + b] += du[a] * qh[b];

            // Shared contractions.
            for (std::size_t a = 0; a < dh; ++a) {
                double s1 = 0.0, s3 = 0.0;
                const double* grow = &G[a * dh];
                const double* prow = prev + a * dh;
                for (std::size_t b = 0; b < dh; ++b) {
                    s1 += grow[b] * kh[b];
                    s3 += prow[b] * kh[b];
                }
                w1[a] = s1;   // G k_hat
                sk[a] = s3;   // S_{t-1} k_hat
            }
            for (std::size_t b = 0; b < dh; ++b) {
                double s2 = 0.0, sz1 = 0.0, sz2 = 0.0;
                for (std::size_t a = 0; a < dh; ++a) {
                    s2 += G[a * dh + b] * vh[a];
                    sz1 += prev[a * dh + b] * w1[a];
                    sz2 += G[a * dh + b] * sk[a];
                }
                w2[b] = s2;   // G^T v
                z1[b] = sz1;  // S_{t-1}^T w1
                z2[b] = sz2;  // G^T sk
            }

            double* dvh = dv.row_ptr(tt) + h * dh;
            double* dkh = dk_hat.row_ptr(tt) + h * dh;
            double vdotw1 = 0.0, skdotw1 = 0.0;
            for (std::size_t a = 0; a < dh; ++a) {
                vdotw1 += vh[a] * w1[a];
                skdotw1 += sk[a] * w1[a];
                dvh[a] += beta * w1[a];
            }
            for (std::size_t b = 0; b < dh; ++b)
                dkh[b] += beta * w2[b] - beta * g * (z1[b] + z2[b]);
            d_beta(tt, h) = vdotw1 - g * skdotw1;

            if (gated_) {
                // dL/dg = sum G .* (S_{t-1} - beta sk k_hat^T)
                double acc = 0.0;
                for (std::size_t a = 0; a < dh; ++a) {
                    const double* grow = &G[a * dh];
                    const double* prow = prev + a * dh;
                    for (std::size_t b = 0; b < dh; ++b)
                        acc += grow[b] * (prow[b] - beta * sk[a] * kh[b]);
                }
                dg += acc;
            }

            // G <- g * (G - beta * w1 k_hat^T)
            for (std::size_t a = 0; a < dh; ++a) {
                double* grow = &G[a * dh];
                const double c = beta * w1[a];
                for (std::size_t b = 0; b < dh; ++b) grow[b] = g * (grow[b] - c * kh[b]);
            }
        }
        if (gated_) decay_logit.grad.data[h] += dg * g * (1.0 - g);
    }

    // Key normalization backward: k_hat = k / ||k||.
    Tensor2 dk(L, d);
    for (std::size_t t = 0; t < L; ++t) {
        for (int h = 0; h < kNumHeads; ++h) {
            const double nrm = k_norm_[t * kNumHeads + h];
            const double* kr = k_.row_ptr(t) + h * dh;
            const double* dkr_hat = dk_hat.row_ptr(t) + h * dh;
            double dot = 0.0;
            for (std::size_t j = 0; j < dh; ++j) dot += kr[j] * dkr_hat[j];
            double* dkr = dk.row_ptr(t) + h * dh;
            const double n3 = nrm * nrm * nrm;
            for (std::size_t j = 0; j < dh; ++j)
                dkr[j] = dkr_hat[j] / nrm - kr[j] * dot / n3;
        }
    }

    // Beta head: logits = x_w w_beta + b_beta, beta = sigmoid(logits).
    Tensor2 d_logits = sigmoid_backward(beta_logits_, d_beta);
    Tensor2 dx = d_out;  // residual
    {
        Tensor2 dxb = linear_backward(x_woven_, w_beta.value, d_logits, w_beta.grad,
                                      &b_beta.grad);
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += dxb.data[i];
    }

    // Short convolutions then projections.
    Tensor2 dq_lin(L, d), dk_lin(L, d), dv_lin(L, d);
    causal_depthwise_conv_direct_backward(q_lin_, conv_q.value, dq, dq_lin, conv_q.grad);
    causal_depthwise_conv_direct_backward(k_lin_, conv_k.value, dk, dk_lin, conv_k.grad);
    causal_depthwise_conv_direct_backward(v_lin_, conv_v.value, dv, dv_lin, conv_v.grad);

    Tensor2 t1 = linear_backward(x_woven_, w_q.value, dq_lin, w_q.grad, nullptr);
    Tensor2 t2 = linear_backward(x_woven_, w_k.value, dk_lin, w_k.grad, nullptr);
    Tensor2 t3 = linear_backward(x_woven_, w_v.value, dv_lin, w_v.grad, nullptr);
    for (std::size_t i = 0; i < dx.size(); ++i)
        dx.data[i] += t1.data[i] + t2.data[i] + t3.data[i];

    if (d_carry != nullptr) {
        d_carry->assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) (*d_carry)[j] = dx(0, j);
    }
    return dx;
}

void DeltaNetBlock::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".w_q", &w_q});
    out.push_back({prefix + ".w_k", &w_k});
    out.push_back({prefix + ".w_v", &w_v});
    out.push_back({prefix + ".conv_q", &conv_q});
    out.push_back({prefix + ".conv_k", &conv_k});
    out.push_back({prefix + ".conv_v", &conv_v});
    out.push_back({prefix + ".w_beta", &w_beta});
    out.push_back({prefix + ".b_beta", &b_beta});
    if (gated_) out.push_back({prefix + ".decay_logit", &decay_logit});
    out.push_back({prefix + ".ln_gain", &ln_gain});
    out.push_back({prefix + ".ln_bias", &ln_bias});
}

// ---------------------------------------------------------------------------
// MlpBlock
// ---------------------------------------------------------------------------

MlpBlock::MlpBlock(std::size_t dim)
    : w_up(dim, 4 * dim),
      b_up(1, 4 * dim),
      w_down(4 * dim, dim),
      b_down(1, dim),
      ln_gain(1, dim),
      ln_bias(1, dim) {
    ln_gain.value.fill(1.0);
}

Tensor2 MlpBlock::forward(const Tensor2& x) {
    x_ = x;
    hidden_pre_ = linear_forward(x, w_up.value, &b_up.value);
    hidden_ = relu(hidden_pre_);
    Tensor2 mlp = linear_forward(hidden_, w_down.value, &b_down.value);
    Tensor2 y = layernorm_forward(mlp, ln_gain.value, ln_bias.value, ln_cache_);
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += x.data[i];
    return y;
}

Tensor2 MlpBlock::backward(const Tensor2& d_out) {
    Tensor2 d_mlp = layernorm_backward(ln_cache_, ln_gain.value, d_out,
                                       ln_gain.grad, ln_bias.grad);
    Tensor2 d_hidden = linear_backward(hidden_, w_down.value, d_mlp, w_down.grad,
                                       &b_down.grad);
    Tensor2 d_pre = relu_backward(hidden_pre_, d_hidden);
    Tensor2 dx = linear_backward(x_, w_up.value, d_pre, w_up.grad, &b_up.grad);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += d_out.data[i];
    return dx;
}

void MlpBlock::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".w_up", &w_up});
    out.push_back({prefix + ".b_up", &b_up});
    out.push_back({prefix + ".w_down", &w_down});
    out.push_back({prefix + ".b_down", &b_down});
    out.push_back({prefix + ".ln_gain", &ln_gain});
    out.push_back({prefix + ".ln_bias", &ln_bias});
}

// ---------------------------------------------------------------------------
// DecoderHead
// ---------------------------------------------------------------------------

Tensor2 sincos_positional_table(std::size_t length, std::size_t dim) {
    Tensor2 table(length, dim);
    for (std::size_t pos = 0; pos < length; ++pos) {
        for (std::size_t j = 0; j < dim; j += 2) {
            const double freq = std::pow(10000.0, -static_cast<double>(j) /
                                                      static_cast<double>(dim));
            table(pos, j) = std::sin(static_cast<double>(pos) * freq);
            if (j + 1 < dim) table(pos, j + 1) = std::cos(static_cast<double>(pos) * freq);
        }
    }
    return table;
}

DecoderHead::DecoderHead(std::size_t context_len, std::size_t patch_len, std::size_t dim,
                         DecoderKind kind, bool use_posemb)
    : w_len(patch_len, context_len),
      w_q(dim, dim),
      w_k(dim, dim),
      w_v(dim, dim),
      w_o(dim, 1),
      kind_(kind),
      use_posemb_(use_posemb) {
    if (use_posemb_) pos_table_ = sincos_positional_table(context_len, dim);
}

std::vector<double> DecoderHead::forward(const Tensor2& x) {
    x_ = x;
    const std::size_t p = w_len.value.rows;

    if (kind_ == DecoderKind::bilinear) {
        xwo_ = matmul(x, w_o.value);           // L x 1
        Tensor2 y = matmul(w_len.value, xwo_);  // p x 1
        return y.data;
    }

    z_ = matmul(w_len.value, x);  // p x d
    if (use_posemb_) {
        x_kv_ = x;
        for (std::size_t i = 0; i < x.size(); ++i) x_kv_.data[i] += pos_table_.data[i];
    } else {
        x_kv_ = x;
    }
    q_ = matmul(z_, w_q.value);
    k_ = matmul(x_kv_, w_k.value);
    v_ = matmul(x_kv_, w_v.value);
    o_ = softmax_attention(q_, k_, v_, &attn_cache_);
    Tensor2 y = matmul(o_, w_o.value);  // p x 1
    (void)p;
    return y.data;
}

Tensor2 DecoderHead::backward(const std::vector<double>& d_y) {
    const std::size_t p = w_len.value.rows;
    Tensor2 dy(p, 1);
    dy.data = d_y;

    if (kind_ == DecoderKind::bilinear) {
        // y = W_L (x w_o)
        Tensor2 d_xwo = matmul_tn(w_len.value, dy);  // L x 1
        matmul_nt_acc(dy, xwo_, w_len.grad);
        matmul_tn_acc(x_, d_xwo, w_o.grad);
        return matmul_nt(d_xwo, w_o.value);  // L x d
    }

    Tensor2 d_o = matmul_nt(dy, w_o.value);  // p x d
    matmul_tn_acc(o_, dy, w_o.grad);

    Tensor2 dq(q_.rows, q_.cols), dk(k_.rows, k_.cols), dv(v_.rows, v_.cols);
    softmax_attention_backward(q_, k_, v_, attn_cache_, d_o, dq, dk, dv);

    Tensor2 dz = linear_backward(z_, w_q.value, dq, w_q.grad, nullptr);
    Tensor2 dx = linear_backward(x_kv_, w_k.value, dk, w_k.grad, nullptr);
    Tensor2 dx2 = linear_backward(x_kv_, w_v.value, dv, w_v.grad, nullptr);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += dx2.data[i];

    // z = W_L x: dW_L = dz x^T, dx += W_L^T dz.
    matmul_nt_acc(dz, x_, w_len.grad);
    Tensor2 dx3 = matmul_tn(w_len.value, dz);  // L x d
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += dx3.data[i];
    return dx;
}

void DecoderHead::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".w_len", &w_len});
    out.push_back({prefix + ".w_o", &w_o});
    if (kind_ == DecoderKind::attention) {
        out.push_back({prefix + ".w_q", &w_q});
        out.push_back({prefix + ".w_k", &w_k});
        out.push_back({prefix + ".w_v", &w_v});
    }
}

}  // namespace reverso
