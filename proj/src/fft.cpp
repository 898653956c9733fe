#include "vsd/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace vsd::fft {

namespace {

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_pow2(n))
        throw std::invalid_argument("fft_pow2: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) *
                           (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

Dft::Dft(std::size_t n) : n_(n) {
    if (n == 0)
        throw std::invalid_argument("Dft: zero length");
    if (is_pow2(n)) return;

    m_ = next_pow2(2 * n - 1);
    chirp_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        // exp(-i*pi*k^2/N); k^2 reduced mod 2N keeps the argument small & exact
        const long long q = static_cast<long long>(k) * static_cast<long long>(k) %
                            (2 * static_cast<long long>(n));
        const double ang = -std::numbers::pi * static_cast<double>(q) / static_cast<double>(n);
        chirp_[k] = {std::cos(ang), std::sin(ang)};
    }
    chirp_fft_.assign(m_, {0.0, 0.0});
    chirp_fft_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
        chirp_fft_[k] = std::conj(chirp_[k]);
        chirp_fft_[m_ - k] = std::conj(chirp_[k]);
    }
    fft_pow2(chirp_fft_, false);
}

std::vector<std::complex<double>> Dft::forward_real(const std::vector<double>& x) const {
    if (x.size() != n_)
        throw std::invalid_argument("Dft::forward_real: length mismatch");

    if (m_ == 0) {
        std::vector<std::complex<double>> a(n_);
        for (std::size_t i = 0; i < n_; ++i) a[i] = {x[i], 0.0};
        fft_pow2(a, false);
        return a;
    }

    std::vector<std::complex<double>> a(m_, {0.0, 0.0});
    for (std::size_t k = 0; k < n_; ++k) a[k] = x[k] * chirp_[k];
    fft_pow2(a, false);
    for (std::size_t k = 0; k < m_; ++k) a[k] *= chirp_fft_[k];
    fft_pow2(a, true);
    std::vector<std::complex<double>> out(n_);
    for (std::size_t k = 0; k < n_; ++k) out[k] = a[k] * chirp_[k];
    return out;
}

}  // namespace vsd::fft
