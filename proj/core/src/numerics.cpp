#include "reverso/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "reverso/fft.hpp"

namespace reverso {

// ---------------------------------------------------------------------------
// Matmul family. ikj loop order keeps the inner loop contiguous in both
// operands.
// ---------------------------------------------------------------------------

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
    Tensor2 c(a.rows, b.cols);
    matmul_acc(a, b, c);
    return c;
}

void matmul_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
        throw std::invalid_argument("matmul_acc: shape mismatch");
    const std::size_t m = a.rows, k = a.cols, n = b.cols;
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.row_ptr(i);
        double* crow = c.row_ptr(i);
        for (std::size_t t = 0; t < k; ++t) {
            const double av = arow[t];
            if (av == 0.0) continue;
            const double* brow = b.row_ptr(t);
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
    Tensor2 c(a.rows, b.rows);
    matmul_nt_acc(a, b, c);
    return c;
}

void matmul_nt_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
        throw std::invalid_argument("matmul_nt_acc: shape mismatch");
    const std::size_t m = a.rows, k = a.cols, n = b.rows;
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.row_ptr(i);
        double* crow = c.row_ptr(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b.row_ptr(j);
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += arow[t] * brow[t];
            crow[j] += s;
        }
    }
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: inner dimension mismatch");
    Tensor2 c(a.cols, b.cols);
    matmul_tn_acc(a, b, c);
    return c;
}

void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
        throw std::invalid_argument("matmul_tn_acc: shape mismatch");
    const std::size_t k = a.rows, m = a.cols, n = b.cols;
    for (std::size_t t = 0; t < k; ++t) {
        const double* arow = a.row_ptr(t);
        const double* brow = b.row_ptr(t);
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* crow = c.row_ptr(i);
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

Tensor2 linear_forward(const Tensor2& x, const Tensor2& w, const Tensor2* b) {
    Tensor2 y = matmul(x, w);
    if (b != nullptr) {
        if (b->rows != 1 || b->cols != w.cols)
            throw std::invalid_argument("linear: bias shape mismatch");
        for (std::size_t i = 0; i < y.rows; ++i) {
            double* row = y.row_ptr(i);
            for (std::size_t j = 0; j < y.cols; ++j) row[j] += b->data[j];
        }
    }
    return y;
}

Tensor2 linear_backward(const Tensor2& x, const Tensor2& w, const Tensor2& d_out,
                        Tensor2& dw, Tensor2* db) {
    matmul_tn_acc(x, d_out, dw);
    if (db != nullptr) {
        for (std::size_t i = 0; i < d_out.rows; ++i) {
            const double* row = d_out.row_ptr(i);
            for (std::size_t j = 0; j < d_out.cols; ++j) db->data[j] += row[j];
        }
    }
    return matmul_nt(d_out, w);
}

// ---------------------------------------------------------------------------
// Activations.
// ---------------------------------------------------------------------------

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor2 silu(const Tensor2& x) {
    Tensor2 y = x;
    for (double& v : y.data) v = v * sigmoid_scalar(v);
    return y;
}

Tensor2 relu(const Tensor2& x) {
    Tensor2 y = x;
    for (double& v : y.data) v = std::max(v, 0.0);
    return y;
}

Tensor2 sigmoid(const Tensor2& x) {
    Tensor2 y = x;
    for (double& v : y.data) v = sigmoid_scalar(v);
    return y;
}

Tensor2 silu_backward(const Tensor2& x, const Tensor2& d_out) {
    Tensor2 dx(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = sigmoid_scalar(x.data[i]);
        dx.data[i] = d_out.data[i] * s * (1.0 + x.data[i] * (1.0 - s));
    }
    return dx;
}

Tensor2 relu_backward(const Tensor2& x, const Tensor2& d_out) {
    Tensor2 dx(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i)
        dx.data[i] = x.data[i] > 0.0 ? d_out.data[i] : 0.0;
    return dx;
}

Tensor2 sigmoid_backward(const Tensor2& x, const Tensor2& d_out) {
    Tensor2 dx(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = sigmoid_scalar(x.data[i]);
        dx.data[i] = d_out.data[i] * s * (1.0 - s);
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Layer normalization.
// ---------------------------------------------------------------------------

Tensor2 layernorm_forward(const Tensor2& x, const Tensor2& gain, const Tensor2& bias,
                          LayerNormCache& cache) {
    const std::size_t d = x.cols;
    if (d < 1) throw std::invalid_argument("layernorm: need at least one channel");
    if (gain.size() != d || bias.size() != d)
        throw std::invalid_argument("layernorm: gain/bias must be d-vectors");

    cache.mean.assign(x.rows, 0.0);
    cache.inv_std.assign(x.rows, 0.0);
    cache.x_hat = Tensor2(x.rows, d);

    Tensor2 y(x.rows, d);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* row = x.row_ptr(i);
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) mu += row[j];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = row[j] - mu;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
        cache.mean[i] = mu;
        cache.inv_std[i] = inv_std;
        double* xh = cache.x_hat.row_ptr(i);
        double* yrow = y.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) {
            xh[j] = (row[j] - mu) * inv_std;
            yrow[j] = gain.data[j] * xh[j] + bias.data[j];
        }
    }
    return y;
}

Tensor2 layernorm_backward(const LayerNormCache& cache, const Tensor2& gain,
                           const Tensor2& d_out, Tensor2& d_gain, Tensor2& d_bias) {
    const std::size_t d = cache.x_hat.cols;
    Tensor2 dx(cache.x_hat.rows, d);
    for (std::size_t i = 0; i < cache.x_hat.rows; ++i) {
        const double* xh = cache.x_hat.row_ptr(i);
        const double* dy = d_out.row_ptr(i);
        double* dxr = dx.row_ptr(i);
        double sum_dg = 0.0, sum_dgx = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double g = dy[j] * gain.data[j];
            sum_dg += g;
            sum_dgx += g * xh[j];
            d_gain.data[j] += dy[j] * xh[j];
            d_bias.data[j] += dy[j];
        }
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
            const double g = dy[j] * gain.data[j];
            dxr[j] = cache.inv_std[i] * (g - inv_d * sum_dg - xh[j] * inv_d * sum_dgx);
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Causal depthwise convolution.
// ---------------------------------------------------------------------------

Tensor2 causal_depthwise_conv_direct(const Tensor2& x, const Tensor2& w) {
    if (w.cols != x.cols) throw std::invalid_argument("conv: channel count mismatch");
    if (w.rows > x.rows) throw std::invalid_argument("conv: kernel longer than sequence");
    const std::size_t L = x.rows, d = x.cols, k = w.rows;
    Tensor2 z(L, d);
    for (std::size_t i = 0; i < L; ++i) {
        double* zrow = z.row_ptr(i);
        const std::size_t mmax = std::min(k, i + 1);
        for (std::size_t m = 0; m < mmax; ++m) {
            const double* wrow = w.row_ptr(m);
            const double* xrow = x.row_ptr(i - m);
            for (std::size_t j = 0; j < d; ++j) zrow[j] += wrow[j] * xrow[j];
        }
    }
    return z;
}

void causal_depthwise_conv_direct_backward(const Tensor2& x, const Tensor2& w,
                                           const Tensor2& d_out, Tensor2& dx, Tensor2& dw) {
    const std::size_t L = x.rows, d = x.cols, k = w.rows;
    // dx[t] = sum_m w[m] * d_out[t + m]; dw[m] = sum_i d_out[i] * x[i - m].
    for (std::size_t i = 0; i < L; ++i) {
        const double* dor = d_out.row_ptr(i);
        const std::size_t mmax = std::min(k, i + 1);
        for (std::size_t m = 0; m < mmax; ++m) {
            double* dxr = dx.row_ptr(i - m);
            double* dwr = dw.row_ptr(m);
            const double* wr = w.row_ptr(m);
            const double* xr = x.row_ptr(i - m);
            for (std::size_t j = 0; j < d; ++j) {
                dxr[j] += wr[j] * dor[j];
                dwr[j] += xr[j] * dor[j];
            }
        }
    }
}

namespace {

// Per-channel spectral helpers shared by the FFT conv paths.
std::vector<double> gather_channel(const Tensor2& t, std::size_t j) {
    std::vector<double> v(t.rows);
    for (std::size_t i = 0; i < t.rows; ++i) v[i] = t(i, j);
    return v;
}

}  // namespace

Tensor2 causal_depthwise_conv_fft(const Tensor2& x, const Tensor2& w) {
    if (w.cols != x.cols) throw std::invalid_argument("conv_fft: channel count mismatch");
    if (w.rows != x.rows) throw std::invalid_argument("conv_fft: kernel length must equal L");
    const std::size_t L = x.rows, d = x.cols;
    const std::size_t n = next_power_of_two(2 * L);

    Tensor2 z(L, d);
    for (std::size_t j = 0; j < d; ++j) {
        auto xs = rfft(gather_channel(x, j), n);
        auto ws = rfft(gather_channel(w, j), n);
        for (std::size_t b = 0; b < xs.size(); ++b) xs[b] *= ws[b];
        auto full = irfft(xs, n);
        for (std::size_t i = 0; i < L; ++i) z(i, j) = full[i];
    }
    return z;
}

void causal_depthwise_conv_fft_backward(const Tensor2& x, const Tensor2& w,
                                        const Tensor2& d_out, Tensor2& dx, Tensor2& dw) {
    const std::size_t L = x.rows, d = x.cols;
    const std::size_t n = next_power_of_two(2 * L);
    // Both gradients are cross-correlations: with zero padding to n >= 2L the
    // circular products below do not wrap.
    //   dx[t] = sum_m w[m] d_out[t+m]  = irfft(D * conj(W))[t]
    //   dw[m] = sum_i x[i-m] d_out[i]  = irfft(D * conj(X))[m]
    for (std::size_t j = 0; j < d; ++j) {
        auto xs = rfft(gather_channel(x, j), n);
        auto ws = rfft(gather_channel(w, j), n);
        auto ds = rfft(gather_channel(d_out, j), n);
        std::vector<cdouble> prod(ds.size());
        for (std::size_t b = 0; b < ds.size(); ++b) prod[b] = ds[b] * std::conj(ws[b]);
        auto gx = irfft(prod, n);
        for (std::size_t b = 0; b < ds.size(); ++b) prod[b] = ds[b] * std::conj(xs[b]);
        auto gw = irfft(prod, n);
        for (std::size_t i = 0; i < L; ++i) {
            dx(i, j) += gx[i];
            dw(i, j) += gw[i];
        }
    }
}

// ---------------------------------------------------------------------------
// Softmax attention.
// ---------------------------------------------------------------------------

Tensor2 softmax_attention(const Tensor2& q, const Tensor2& k, const Tensor2& v,
                          AttentionCache* cache) {
    if (q.cols != k.cols || k.rows != v.rows)
        throw std::invalid_argument("attention: shape mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols));
    Tensor2 scores = matmul_nt(q, k);  // p x L
    for (std::size_t i = 0; i < scores.rows; ++i) {
        double* row = scores.row_ptr(i);
        double mx = row[0] * scale;
        for (std::size_t j = 0; j < scores.cols; ++j) {
            row[j] *= scale;
            mx = std::max(mx, row[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < scores.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < scores.cols; ++j) row[j] /= sum;
    }
    Tensor2 out = matmul(scores, v);
    if (cache != nullptr) cache->weights = std::move(scores);
    return out;
}

void softmax_attention_backward(const Tensor2& q, const Tensor2& k, const Tensor2& v,
                                const AttentionCache& cache, const Tensor2& d_out,
                                Tensor2& dq, Tensor2& dk, Tensor2& dv) {
    const Tensor2& a = cache.weights;  // p x L
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols));

    matmul_tn_acc(a, d_out, dv);
    Tensor2 da = matmul_nt(d_out, v);  // p x L

    // Softmax backward per row.
    Tensor2 ds(a.rows, a.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        const double* dar = da.row_ptr(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) dot += ar[j] * dar[j];
        double* dsr = ds.row_ptr(i);
        for (std::size_t j = 0; j < a.cols; ++j) dsr[j] = ar[j] * (dar[j] - dot) * scale;
    }
    matmul_acc(ds, k, dq);
    matmul_tn_acc(ds, q, dk);
}

}  // namespace reverso
