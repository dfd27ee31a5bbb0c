#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "roadnoise/audio_buffer.hpp"

namespace roadnoise {

/// Band-pass mask expressed as fractions of the Nyquist frequency.
/// Bins with center frequency below low_fraction*Nyquist or above
/// high_fraction*Nyquist are zeroed; the interior is kept untouched.
/// Defaults remove the lowest 0.03% and the highest 22% of the axis.
struct BandSpec {
    double low_fraction = 0.0003;
    double high_fraction = 0.78;

    void validate() const; // throws std::invalid_argument
};

/// One-sided magnitude spectrum (floor(N/2)+1 bins for transform size N).
struct Spectrum {
    std::vector<double> bin_magnitudes;
    double bin_resolution_hz = 0.0;
};

/// Symmetric Hann coefficients: w[k] = 0.5*(1 - cos(2*pi*k/(L-1))).
/// Length 1 degenerates to [1.0]; endpoints are zero for L >= 2.
std::vector<double> hann_window(std::size_t length);

/// Amplitude envelope: |samples| convolved with a unit-sum Hann window of
/// round(window_ms * rate / 1000) samples, same length as the input,
/// zero-padded at the edges. Everywhere >= 0.
std::vector<double> smooth_envelope(const AudioBuffer& buffer, double window_ms);

/// Unnormalized forward DFT, X[k] = sum_n x[n] * exp(-2*pi*i*k*n/N).
/// Arbitrary N (radix-2 fast path, Bluestein otherwise).
std::vector<std::complex<double>> dft(std::span<const double> samples);
std::vector<std::complex<double>> dft(std::span<const std::complex<double>> samples);

/// Inverse transform with the 1/N factor; inverse_dft(dft(x)) == x to
/// ~1e-12 relative.
std::vector<std::complex<double>> inverse_dft(std::span<const std::complex<double>> bins);

/// Zero-phase band-pass by whole-buffer frequency masking: forward
/// transform, zero bins outside the keep band (mirrored for negative
/// frequencies so the output stays real), inverse transform. Output
/// length and rate equal the input. Pure masking: idempotent, linear,
/// never increases energy.
AudioBuffer band_pass(const AudioBuffer& buffer, const BandSpec& band);

/// Replace samples with |s| < relative_floor * max|s| by exact zeros.
/// The noise-reduction pipeline applies this after band_pass so that
/// masking residue far below the signal (and below 16-bit playback
/// resolution) does not register as sound. Not part of band_pass itself.
AudioBuffer flush_below(const AudioBuffer& buffer, double relative_floor);

/// Mean of Hann-windowed one-sided magnitude spectra over frames taken
/// every `hop` samples. bin_resolution_hz = rate / frame_size.
Spectrum time_averaged_spectrum(const AudioBuffer& buffer,
                                std::size_t frame_size, std::size_t hop);

} // namespace roadnoise
