#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eegdx/types.hpp"

namespace eegdx::features {

// Frequency band split into K consecutive bins of f_step_hz each:
// bin k spans [f_low + (k-1)*step, f_low + k*step], k = 1..K. The span
// (f_up - f_low) must be an integer multiple of the step.
struct SpectralBandSpec {
  double f_low_hz = 2.0;
  double f_up_hz = 32.0;
  double f_step_hz = 1.0;

  std::size_t bin_count() const;
  void validate() const;
  void validate(double sample_rate_hz) const;  // also checks f_up <= Nyquist
};

// Everything that determines how a feature vector is computed from raw
// signal. Two vectors are comparable only if their configs match, which is
// what the fingerprint is for.
struct ExtractionConfig {
  std::size_t segment_length = 8192;
  FilterSpec filter{};
  SpectralBandSpec band{};
  int k_max = 5;  // largest subsample stride of the curve-length estimator

  void validate(double sample_rate_hz) const;
  std::size_t dim() const { return band.bin_count() + 4; }
  std::string fingerprint() const;
};

// Feature values in a fixed order: the rir_count relative intensity ratios
// first, then the two fractal dimensions (sign-change based, then
// curve-length based), then mobility and complexity.
struct FeatureVector {
  std::vector<double> values;
  std::size_t rir_count = 0;
  std::string config_id;

  std::size_t dim() const { return values.size(); }
};

// Which feature families a classifier sees. Masking happens on raw feature
// vectors, before any normalization is fitted.
struct FeatureSelection {
  bool include_rir = true;
  bool include_fds = true;
  bool include_hjorth = true;

  void validate() const;  // at least one family
  std::string id() const;  // "rir+fd+hjorth", "fd", ...
  FeatureVector apply(const FeatureVector& full) const;
};

// Parses "all", a single family ("rir", "fd", "hjorth"), or a '+'-joined
// combination. Throws ConfigError on anything else.
FeatureSelection parse_feature_selection(const std::string& text);

// Magnitudes |X_k| of the length-N discrete Fourier transform, k = 0..N-1.
// Any N >= 2 is accepted (radix-2 when N is a power of two, Bluestein's
// chirp-z otherwise).
std::vector<double> fft_magnitudes(std::span<const double> samples);

// Per-bin sums of DFT magnitudes. Bin k sums indices
// floor(N*f_min/fs) .. floor(N*f_max/fs) inclusive, with f_min/f_max the
// bin's edges; adjacent bins share their edge index by design.
std::vector<double> power_spectral_intensity(std::span<const double> magnitudes,
                                             const SpectralBandSpec& band,
                                             double sample_rate_hz);

// Each bin's share of the total in-band intensity. Sums to 1; an all-zero
// input maps to the uniform vector 1/K.
std::vector<double> relative_intensity_ratio(std::span<const double> psi);

// Sign-change fractal dimension:
//   PFD = log10(N) / (log10(N) + log10(N / (N + 0.4 * Nd)))
// where Nd counts adjacent first-difference pairs with a strictly negative
// product. Constant and monotone signals give exactly 1.
double petrosian_fd(std::span<const double> samples);

// Curve-length fractal dimension: for strides k = 1..k_max, average the
// normalized lengths of the k subsampled curves,
//   L(m,k) = sum_i |x[m+ik] - x[m+(i-1)k]| * (N-1) / (M*k*k),  M = floor((N-m)/k),
// and return the least-squares slope of ln L(k) against ln(1/k).
// A ramp gives 1, white noise 2; if any L(k) is zero the result is 0.
double higuchi_fd(std::span<const double> samples, int k_max);

struct HjorthParams {
  double mobility = 0.0;
  double complexity = 0.0;
};

// Mobility and complexity from mean-square moments of the signal and its
// first and second differences:
//   A0 = sum x^2 / N, A1 = sum d^2 / (N-1), A2 = sum e^2 / (N-2)
//   mobility = sqrt(A1/A0), complexity = sqrt(A2/A1) / sqrt(A1/A0).
// A constant (or all-zero) signal maps to (0, 0).
HjorthParams hjorth_params(std::span<const double> samples);

// Full per-segment feature vector for one config: K intensity ratios, the
// two fractal dimensions, mobility, complexity. The segment must have
// exactly config.segment_length samples. sample_rate_hz is the rate the
// segment was recorded at.
FeatureVector extract(const Segment& segment, const ExtractionConfig& config,
                      double sample_rate_hz);

// Per-dimension z-score statistics (population sd). Dimensions with zero
// spread map to 0 when applied.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> sd;

  std::size_t dim() const { return mean.size(); }
};

// Fits on at least two vectors of equal dimension.
Normalizer fit_normalizer(const std::vector<FeatureVector>& vectors);

FeatureVector apply_normalizer(const Normalizer& normalizer, const FeatureVector& vector);

}  // namespace eegdx::features
