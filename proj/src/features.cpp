#include "eegdx/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <sstream>

#include "eegdx/util.hpp"

namespace eegdx::features {

namespace {

constexpr double kBinCountTolerance = 1e-9;

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) {
      j ^= bit;
    }
    j ^= bit;
    if (i < j) {
      std::swap(a[i], a[j]);
    }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> step = std::polar(1.0, angle);
    for (std::size_t base = 0; base < n; base += len) {
      std::complex<double> w{1.0, 0.0};
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[base + j];
        const std::complex<double> v = a[base + j + len / 2] * w;
        a[base + j] = u + v;
        a[base + j + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    for (auto& z : a) {
      z /= static_cast<double>(n);
    }
  }
}

// Chirp-z (Bluestein) reduction of an arbitrary-length DFT to a power-of-two
// convolution. Angles use k^2 mod 2n to stay well conditioned.
std::vector<std::complex<double>> dft_bluestein(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  std::vector<std::complex<double>> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t sq = (static_cast<std::uint64_t>(k) * k) % two_n;
    const double angle = -M_PI * static_cast<double>(sq) / static_cast<double>(n);
    chirp[k] = std::polar(1.0, angle);
  }
  std::size_t m = std::bit_ceil(2 * n - 1);
  std::vector<std::complex<double>> a(m, {0.0, 0.0});
  std::vector<std::complex<double>> b(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = x[k] * chirp[k];
    b[k] = std::conj(chirp[k]);
  }
  for (std::size_t k = 1; k < n; ++k) {
    b[m - k] = std::conj(chirp[k]);
  }
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) {
    a[k] *= b[k];
  }
  fft_pow2(a, true);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = a[k] * chirp[k];
  }
  return out;
}

}  // namespace

std::size_t SpectralBandSpec::bin_count() const {
  const double span = f_up_hz - f_low_hz;
  const double ratio = span / f_step_hz;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > kBinCountTolerance * std::max(1.0, rounded)) {
    throw ConfigError("band span " + util::format_double(span) +
                      " Hz is not an integer multiple of the step " +
                      util::format_double(f_step_hz) + " Hz");
  }
  return static_cast<std::size_t>(rounded);
}

void SpectralBandSpec::validate() const {
  if (f_low_hz < 0.0) {
    throw ConfigError("band lower edge must be >= 0 Hz");
  }
  if (f_step_hz <= 0.0) {
    throw ConfigError("band step must be positive");
  }
  if (f_up_hz <= f_low_hz) {
    throw ConfigError("band upper edge must lie above the lower edge");
  }
  bin_count();  // throws if the span is not an integer number of bins
}

void SpectralBandSpec::validate(double sample_rate_hz) const {
  validate();
  if (sample_rate_hz <= 0.0) {
    throw ConfigError("sample rate must be positive");
  }
  if (f_up_hz > sample_rate_hz / 2.0) {
    throw ConfigError("band upper edge " + util::format_double(f_up_hz) +
                      " Hz exceeds the Nyquist frequency " +
                      util::format_double(sample_rate_hz / 2.0) + " Hz");
  }
}

void ExtractionConfig::validate(double sample_rate_hz) const {
  if (k_max < 2) {
    throw ConfigError("k_max must be at least 2");
  }
  if (segment_length < 2 * static_cast<std::size_t>(k_max)) {
    throw ConfigError("segment length " + std::to_string(segment_length) +
                      " is too short for k_max " + std::to_string(k_max));
  }
  filter.validate(sample_rate_hz);
  band.validate(sample_rate_hz);
  if (band.f_up_hz > filter.cutoff_hz) {
    throw ConfigError("band upper edge " + util::format_double(band.f_up_hz) +
                      " Hz exceeds the filter cutoff " + util::format_double(filter.cutoff_hz) +
                      " Hz");
  }
}

std::string ExtractionConfig::fingerprint() const {
  std::ostringstream out;
  out << "seg=" << segment_length << ";lp=" << util::format_double(filter.cutoff_hz) << "/"
      << filter.order << ";band=" << util::format_double(band.f_low_hz) << ":"
      << util::format_double(band.f_up_hz) << ":" << util::format_double(band.f_step_hz)
      << ";kmax=" << k_max;
  return out.str();
}

void FeatureSelection::validate() const {
  if (!include_rir && !include_fds && !include_hjorth) {
    throw ConfigError("feature selection must include at least one family");
  }
}

std::string FeatureSelection::id() const {
  validate();
  std::string out;
  auto append = [&out](const char* part) {
    if (!out.empty()) {
      out += '+';
    }
    out += part;
  };
  if (include_rir) {
    append("rir");
  }
  if (include_fds) {
    append("fd");
  }
  if (include_hjorth) {
    append("hjorth");
  }
  return out;
}

FeatureVector FeatureSelection::apply(const FeatureVector& full) const {
  validate();
  if (full.values.size() != full.rir_count + 4) {
    throw InputError("feature selection expects an unmasked vector (rir_count + 4 values)");
  }
  if (include_rir && include_fds && include_hjorth) {
    return full;
  }
  FeatureVector out;
  out.rir_count = include_rir ? full.rir_count : 0;
  out.config_id = full.config_id.empty() ? std::string() : full.config_id + "#" + id();
  out.values.reserve(full.values.size());
  if (include_rir) {
    out.values.insert(out.values.end(), full.values.begin(),
                      full.values.begin() + static_cast<std::ptrdiff_t>(full.rir_count));
  }
  if (include_fds) {
    out.values.push_back(full.values[full.rir_count]);
    out.values.push_back(full.values[full.rir_count + 1]);
  }
  if (include_hjorth) {
    out.values.push_back(full.values[full.rir_count + 2]);
    out.values.push_back(full.values[full.rir_count + 3]);
  }
  return out;
}

FeatureSelection parse_feature_selection(const std::string& text) {
  if (text == "all") {
    return FeatureSelection{};
  }
  FeatureSelection sel{false, false, false};
  for (const auto& token : util::split(text, '+')) {
    if (token == "rir") {
      sel.include_rir = true;
    } else if (token == "fd") {
      sel.include_fds = true;
    } else if (token == "hjorth") {
      sel.include_hjorth = true;
    } else {
      throw ConfigError("unknown feature family \"" + token +
                        "\" (expected all, rir, fd, hjorth, or a '+'-joined combination)");
    }
  }
  sel.validate();
  return sel;
}

std::vector<double> fft_magnitudes(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) {
    throw InputError("FFT needs at least 2 samples");
  }
  std::vector<std::complex<double>> spectrum;
  if (std::has_single_bit(n)) {
    spectrum.assign(samples.begin(), samples.end());
    fft_pow2(spectrum, false);
  } else {
    spectrum = dft_bluestein(samples);
  }
  std::vector<double> magnitudes(n);
  for (std::size_t k = 0; k < n; ++k) {
    magnitudes[k] = std::abs(spectrum[k]);
  }
  return magnitudes;
}

std::vector<double> power_spectral_intensity(std::span<const double> magnitudes,
                                             const SpectralBandSpec& band,
                                             double sample_rate_hz) {
  band.validate(sample_rate_hz);
  const std::size_t n = magnitudes.size();
  if (n < 2) {
    throw InputError("need at least 2 magnitudes");
  }
  const std::size_t bins = band.bin_count();
  std::vector<double> psi(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f_min = band.f_low_hz + static_cast<double>(k) * band.f_step_hz;
    const double f_max = f_min + band.f_step_hz;
    auto lo = static_cast<std::size_t>(std::floor(static_cast<double>(n) * f_min / sample_rate_hz));
    auto hi = static_cast<std::size_t>(std::floor(static_cast<double>(n) * f_max / sample_rate_hz));
    hi = std::min(hi, n - 1);
    double sum = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      sum += magnitudes[i];
    }
    psi[k] = sum;
  }
  return psi;
}

std::vector<double> relative_intensity_ratio(std::span<const double> psi) {
  if (psi.empty()) {
    throw InputError("empty intensity vector");
  }
  double total = 0.0;
  for (double v : psi) {
    total += v;
  }
  std::vector<double> rir(psi.size());
  if (total == 0.0) {
    // No in-band power at all: report the uninformative uniform split.
    std::fill(rir.begin(), rir.end(), 1.0 / static_cast<double>(psi.size()));
    return rir;
  }
  for (std::size_t k = 0; k < psi.size(); ++k) {
    rir[k] = psi[k] / total;
  }
  return rir;
}

double petrosian_fd(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 3) {
    throw InputError("sign-change fractal dimension needs at least 3 samples");
  }
  std::size_t sign_changes = 0;
  double prev_diff = samples[1] - samples[0];
  for (std::size_t i = 2; i < n; ++i) {
    const double diff = samples[i] - samples[i - 1];
    if (prev_diff * diff < 0.0) {
      ++sign_changes;
    }
    prev_diff = diff;
  }
  const auto nd = static_cast<double>(n);
  const double log_n = std::log10(nd);
  return log_n / (log_n + std::log10(nd / (nd + 0.4 * static_cast<double>(sign_changes))));
}

double higuchi_fd(std::span<const double> samples, int k_max) {
  if (k_max < 2) {
    throw ConfigError("k_max must be at least 2");
  }
  const std::size_t n = samples.size();
  if (n < 2 * static_cast<std::size_t>(k_max)) {
    throw InputError("curve-length fractal dimension needs at least 2*k_max samples");
  }
  std::vector<double> log_length(static_cast<std::size_t>(k_max));
  std::vector<double> log_inv_k(static_cast<std::size_t>(k_max));
  for (std::size_t k = 1; k <= static_cast<std::size_t>(k_max); ++k) {
    double total = 0.0;
    for (std::size_t m = 1; m <= k; ++m) {
      const std::size_t steps = (n - m) / k;
      double sum = 0.0;
      for (std::size_t i = 1; i <= steps; ++i) {
        sum += std::abs(samples[m - 1 + i * k] - samples[m - 1 + (i - 1) * k]);
      }
      total += sum * static_cast<double>(n - 1) /
               (static_cast<double>(steps) * static_cast<double>(k) * static_cast<double>(k));
    }
    const double mean_length = total / static_cast<double>(k);
    if (mean_length == 0.0) {
      return 0.0;  // flat at this stride: no meaningful scaling law
    }
    log_length[k - 1] = std::log(mean_length);
    log_inv_k[k - 1] = -std::log(static_cast<double>(k));
  }
  double mean_u = 0.0;
  double mean_v = 0.0;
  for (std::size_t i = 0; i < log_inv_k.size(); ++i) {
    mean_u += log_inv_k[i];
    mean_v += log_length[i];
  }
  mean_u /= static_cast<double>(log_inv_k.size());
  mean_v /= static_cast<double>(log_inv_k.size());
  double cov = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < log_inv_k.size(); ++i) {
    const double du = log_inv_k[i] - mean_u;
    cov += du * (log_length[i] - mean_v);
    var += du * du;
  }
  return cov / var;
}

HjorthParams hjorth_params(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 3) {
    throw InputError("mobility/complexity need at least 3 samples");
  }
  double sum_sq = 0.0;
  for (double v : samples) {
    sum_sq += v * v;
  }
  double sum_d_sq = 0.0;
  double sum_e_sq = 0.0;
  double prev_diff = samples[1] - samples[0];
  sum_d_sq += prev_diff * prev_diff;
  for (std::size_t i = 2; i < n; ++i) {
    const double diff = samples[i] - samples[i - 1];
    sum_d_sq += diff * diff;
    const double second = diff - prev_diff;
    sum_e_sq += second * second;
    prev_diff = diff;
  }
  const double a0 = sum_sq / static_cast<double>(n);
  const double a1 = sum_d_sq / static_cast<double>(n - 1);
  if (a0 == 0.0 || a1 == 0.0) {
    return {0.0, 0.0};  // flat signal: both measures collapse
  }
  const double a2 = sum_e_sq / static_cast<double>(n - 2);
  HjorthParams params;
  params.mobility = std::sqrt(a1 / a0);
  params.complexity = std::sqrt(a2 / a1) / params.mobility;
  return params;
}

FeatureVector extract(const Segment& segment, const ExtractionConfig& config,
                      double sample_rate_hz) {
  config.validate(sample_rate_hz);
  if (segment.samples.size() != config.segment_length) {
    throw InputError("segment on channel \"" + segment.channel + "\" has " +
                     std::to_string(segment.samples.size()) + " samples, config expects " +
                     std::to_string(config.segment_length));
  }
  const std::vector<double> magnitudes = fft_magnitudes(segment.samples);
  const std::vector<double> psi = power_spectral_intensity(magnitudes, config.band, sample_rate_hz);
  FeatureVector fv;
  fv.values = relative_intensity_ratio(psi);
  fv.rir_count = fv.values.size();
  fv.values.push_back(petrosian_fd(segment.samples));
  fv.values.push_back(higuchi_fd(segment.samples, config.k_max));
  const HjorthParams hjorth = hjorth_params(segment.samples);
  fv.values.push_back(hjorth.mobility);
  fv.values.push_back(hjorth.complexity);
  fv.config_id = config.fingerprint();
  for (double v : fv.values) {
    if (!std::isfinite(v)) {
      throw InputError("non-finite feature value on channel \"" + segment.channel +
                       "\" (does the segment contain non-finite samples?)");
    }
  }
  return fv;
}

Normalizer fit_normalizer(const std::vector<FeatureVector>& vectors) {
  if (vectors.size() < 2) {
    throw InputError("normalizer needs at least 2 vectors");
  }
  const std::size_t dim = vectors[0].values.size();
  for (const auto& v : vectors) {
    if (v.values.size() != dim) {
      throw InputError("normalizer input has mixed dimensions (" + std::to_string(dim) + " vs " +
                       std::to_string(v.values.size()) + ")");
    }
  }
  Normalizer norm;
  norm.mean.assign(dim, 0.0);
  norm.sd.assign(dim, 0.0);
  const auto count = static_cast<double>(vectors.size());
  for (const auto& v : vectors) {
    for (std::size_t d = 0; d < dim; ++d) {
      norm.mean[d] += v.values[d];
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    norm.mean[d] /= count;
  }
  for (const auto& v : vectors) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double delta = v.values[d] - norm.mean[d];
      norm.sd[d] += delta * delta;
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    norm.sd[d] = std::sqrt(norm.sd[d] / count);
  }
  return norm;
}

FeatureVector apply_normalizer(const Normalizer& normalizer, const FeatureVector& vector) {
  if (vector.values.size() != normalizer.dim()) {
    throw InputError("vector dimension " + std::to_string(vector.values.size()) +
                     " does not match normalizer dimension " + std::to_string(normalizer.dim()));
  }
  FeatureVector out = vector;
  for (std::size_t d = 0; d < out.values.size(); ++d) {
    // Zero-spread dimensions carry no information; map them to 0.
    out.values[d] = normalizer.sd[d] > 0.0 ? (out.values[d] - normalizer.mean[d]) / normalizer.sd[d]
                                           : 0.0;
  }
  return out;
}

}  // namespace eegdx::features
