#include "lsilab/detail/fft.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>

namespace lsilab::detail {

void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
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

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t out_len = a.size() + b.size() - 1;
    std::size_t n = 1;
    while (n < out_len) n <<= 1;

    // pack both operands into one complex transform: z = a + i*b
    std::vector<std::complex<double>> z(n);
    for (std::size_t i = 0; i < a.size(); ++i) z[i] += std::complex<double>(a[i], 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) z[i] += std::complex<double>(0.0, b[i]);
    fft(z, false);

    // unpack spectra: A_k = (Z_k + conj(Z_{n-k}))/2, B_k = (Z_k - conj(Z_{n-k}))/(2i)
    std::vector<std::complex<double>> c(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t kr = (n - k) & (n - 1);
        const std::complex<double> zk = z[k];
        const std::complex<double> zr = std::conj(z[kr]);
        const std::complex<double> ak = 0.5 * (zk + zr);
        const std::complex<double> bk = std::complex<double>(0.0, -0.5) * (zk - zr);
        c[k] = ak * bk;
    }
    fft(c, true);

    std::vector<double> out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) out[i] = c[i].real();
    return out;
}

std::vector<double> direct_convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

}  // namespace lsilab::detail
