#include "roadnoise/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace roadnoise {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 Cooley-Tukey. sign = -1 forward, +1 inverse
/// (no scaling here).
void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
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
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
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
}

/// Chirp phase exp(sign * i * pi * k^2 / n) with the quadratic reduced
/// mod 2n in exact integer arithmetic, so the angle stays in [0, 2*pi)
/// even for very long buffers.
std::complex<double> chirp(std::uint64_t k, std::uint64_t n, int sign) {
    const std::uint64_t r = (k * k) % (2 * n); // k < n <= ~2^26 here, no overflow
    const double ang = sign * kPi * static_cast<double>(r) / static_cast<double>(n);
    return {std::cos(ang), std::sin(ang)};
}

/// Bluestein's algorithm: DFT of arbitrary length via one convolution
/// carried out with power-of-two FFTs.
std::vector<std::complex<double>> bluestein(
    std::span<const std::complex<double>> x, int sign) {
    const std::size_t n = x.size();
    const std::size_t m = next_pow2(2 * n - 1);

    std::vector<std::complex<double>> a(m, {0.0, 0.0});
    std::vector<std::complex<double>> b(m, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        const auto c = chirp(k, n, sign);
        a[k] = x[k] * c;
        b[k] = std::conj(c);
        if (k != 0) b[m - k] = std::conj(c);
    }

    fft_pow2(a, -1);
    fft_pow2(b, -1);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_pow2(a, +1);

    std::vector<std::complex<double>> out(n);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = a[k] * inv_m * chirp(k, n, sign);
    return out;
}

std::vector<std::complex<double>> transform(
    std::span<const std::complex<double>> x, int sign) {
    if (x.empty())
        throw std::invalid_argument("dft of empty sequence");
    if (is_pow2(x.size())) {
        std::vector<std::complex<double>> a(x.begin(), x.end());
        fft_pow2(a, sign);
        return a;
    }
    return bluestein(x, sign);
}

} // namespace

void BandSpec::validate() const {
    if (!(low_fraction >= 0.0 && low_fraction < 1.0))
        throw std::invalid_argument("band low_fraction must lie in [0, 1)");
    if (!(high_fraction > 0.0 && high_fraction <= 1.0))
        throw std::invalid_argument("band high_fraction must lie in (0, 1]");
    if (!(low_fraction < high_fraction))
        throw std::invalid_argument("band low_fraction must be below high_fraction");
}

std::vector<double> hann_window(std::size_t length) {
    if (length == 0)
        throw std::invalid_argument("hann window length must be >= 1");
    if (length == 1) return {1.0};
    std::vector<double> w(length);
    const double denom = static_cast<double>(length - 1);
    for (std::size_t k = 0; k < length; ++k)
        w[k] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(k) / denom));
    return w;
}

std::vector<double> smooth_envelope(const AudioBuffer& buffer, double window_ms) {
    validate_pipeline_input(buffer);
    const std::size_t n = buffer.samples.size();
    const double raw_len = window_ms * buffer.sample_rate_hz / 1000.0;
    const std::size_t win_len = static_cast<std::size_t>(std::llround(raw_len));
    if (win_len < 1)
        throw std::invalid_argument("smoothing window shorter than one sample");
    if (win_len > n)
        throw std::invalid_argument("smoothing window longer than the signal");

    std::vector<double> w = hann_window(win_len);
    double sum = 0.0;
    for (double v : w) sum += v;
    if (sum <= 0.0)
        throw std::invalid_argument(
            "degenerate smoothing window (length " + std::to_string(win_len) +
            " has zero mass)");
    for (double& v : w) v /= sum;

    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(buffer.samples[i]);

    // centered same-length convolution with zero padding
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>((win_len - 1) / 2);
    std::vector<double> env(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(i) - center;
        const std::size_t k_lo = base < 0 ? static_cast<std::size_t>(-base) : 0;
        const std::size_t k_hi =
            std::min(win_len, static_cast<std::size_t>(
                                  static_cast<std::ptrdiff_t>(n) - base));
        for (std::size_t k = k_lo; k < k_hi; ++k)
            acc += w[k] * mag[static_cast<std::size_t>(base) + k];
        env[i] = acc;
    }
    return env;
}

std::vector<std::complex<double>> dft(std::span<const double> samples) {
    std::vector<std::complex<double>> x(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) x[i] = {samples[i], 0.0};
    return transform(x, -1);
}

std::vector<std::complex<double>> dft(std::span<const std::complex<double>> samples) {
    return transform(samples, -1);
}

std::vector<std::complex<double>> inverse_dft(
    std::span<const std::complex<double>> bins) {
    auto out = transform(bins, +1);
    const double inv_n = 1.0 / static_cast<double>(bins.size());
    for (auto& v : out) v *= inv_n;
    return out;
}

AudioBuffer band_pass(const AudioBuffer& buffer, const BandSpec& band) {
    validate_pipeline_input(buffer);
    band.validate();

    const std::size_t n = buffer.samples.size();
    const double nyquist = buffer.sample_rate_hz / 2.0;
    const double low_hz = band.low_fraction * nyquist;
    const double high_hz = band.high_fraction * nyquist;

    auto bins = dft(std::span<const double>(buffer.samples));

    // Mask symmetric pairs (k, n-k) together so the output stays real.
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) * buffer.sample_rate_hz /
                         static_cast<double>(n);
        if (f < low_hz || f > high_hz) {
            bins[k] = {0.0, 0.0};
            if (k != 0 && k != n - k) bins[n - k] = {0.0, 0.0};
        }
    }

    auto time = inverse_dft(bins);

    double peak = 0.0;
    for (double s : buffer.samples) peak = std::max(peak, std::abs(s));
    double max_imag = 0.0;
    for (const auto& v : time) max_imag = std::max(max_imag, std::abs(v.imag()));
    if (max_imag > 1e-6 * std::max(peak, 1.0))
        throw std::runtime_error(
            "band_pass imaginary residue " + std::to_string(max_imag) +
            " exceeds tolerance");

    AudioBuffer out;
    out.sample_rate_hz = buffer.sample_rate_hz;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = time[i].real();
    return out;
}

AudioBuffer flush_below(const AudioBuffer& buffer, double relative_floor) {
    if (relative_floor < 0.0 || !std::isfinite(relative_floor))
        throw std::invalid_argument("relative_floor must be finite and >= 0");
    AudioBuffer out = buffer;
    double peak = 0.0;
    for (double s : out.samples) peak = std::max(peak, std::abs(s));
    const double floor_abs = relative_floor * peak;
    if (floor_abs > 0.0) {
        for (double& s : out.samples)
            if (std::abs(s) < floor_abs) s = 0.0;
    }
    return out;
}

Spectrum time_averaged_spectrum(const AudioBuffer& buffer,
                                std::size_t frame_size, std::size_t hop) {
    validate_pipeline_input(buffer);
    if (frame_size == 0 || hop == 0)
        throw std::invalid_argument("frame_size and hop must be positive");
    if (frame_size > buffer.samples.size())
        throw std::invalid_argument("frame_size exceeds the signal length");

    const std::size_t n = buffer.samples.size();
    const std::size_t n_frames = (n - frame_size) / hop + 1;
    const std::size_t n_bins = frame_size / 2 + 1;
    const std::vector<double> window = hann_window(frame_size);

    std::vector<double> acc(n_bins, 0.0);
    std::vector<double> frame(frame_size);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const double* src = buffer.samples.data() + f * hop;
        for (std::size_t i = 0; i < frame_size; ++i) frame[i] = src[i] * window[i];
        auto bins = dft(std::span<const double>(frame));
        for (std::size_t b = 0; b < n_bins; ++b) acc[b] += std::abs(bins[b]);
    }

    Spectrum spec;
    spec.bin_resolution_hz =
        static_cast<double>(buffer.sample_rate_hz) / static_cast<double>(frame_size);
    spec.bin_magnitudes.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b)
        spec.bin_magnitudes[b] = acc[b] / static_cast<double>(n_frames);
    return spec;
}

} // namespace roadnoise
