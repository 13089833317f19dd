#include "reverso/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace reverso {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cdouble u = a[i + k];
                cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= scale;
    }
}

std::vector<cdouble> rfft(const std::vector<double>& signal, std::size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("rfft: n must be a power of two");
    if (n < signal.size()) throw std::invalid_argument("rfft: n must be >= signal length");

    std::vector<cdouble> a(n, cdouble(0.0, 0.0));
    for (std::size_t i = 0; i < signal.size(); ++i) a[i] = cdouble(signal[i], 0.0);
    fft_inplace(a, false);
    a.resize(n / 2 + 1);
    return a;
}

std::vector<double> irfft(const std::vector<cdouble>& spectrum, std::size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("irfft: n must be a power of two");
    if (spectrum.size() != n / 2 + 1)
        throw std::invalid_argument("irfft: spectrum must have n/2+1 bins");

    std::vector<cdouble> a(n);
    for (std::size_t i = 0; i <= n / 2; ++i) a[i] = spectrum[i];
    for (std::size_t i = 1; i < n / 2; ++i) a[n - i] = std::conj(spectrum[i]);
    fft_inplace(a, true);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i].real();
    return out;
}

}  // namespace reverso
