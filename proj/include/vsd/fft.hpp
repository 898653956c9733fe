#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace vsd::fft {

// In-place radix-2 Cooley-Tukey; size must be a power of two. The inverse
// transform divides by the size.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

// Forward DFT of arbitrary length: radix-2 directly for powers of two,
// Bluestein's chirp-z otherwise. Construction precomputes the chirp so a plan
// can be reused across many windows of the same length.
class Dft {
public:
    explicit Dft(std::size_t n);

    std::size_t size() const { return n_; }

    // X_k = sum_n x_n exp(-2*pi*i*n*k / N), full N-bin spectrum.
    std::vector<std::complex<double>> forward_real(const std::vector<double>& x) const;

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;  // pow2 convolution size; 0 when n_ itself is a power of two
    std::vector<std::complex<double>> chirp_;      // exp(-i*pi*k^2/N)
    std::vector<std::complex<double>> chirp_fft_;  // FFT of the convolution kernel
};

}  // namespace vsd::fft
