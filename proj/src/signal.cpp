#include "eegdx/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace eegdx::signal {

namespace {

// Solves the dense system m * x = rhs in place (Gaussian elimination with
// partial pivoting). Only used for the tiny filter-state system.
std::vector<double> solve_dense(std::vector<std::vector<double>> m, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[pivot][col])) {
        pivot = row;
      }
    }
    if (m[pivot][col] == 0.0) {
      throw std::runtime_error("filter state system is singular");
    }
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t row = col + 1; row < n; ++row) {
      double factor = m[row][col] / m[col][col];
      if (factor == 0.0) {
        continue;
      }
      for (std::size_t k = col; k < n; ++k) {
        m[row][k] -= factor * m[col][k];
      }
      rhs[row] -= factor * rhs[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      acc -= m[i][k] * x[k];
    }
    x[i] = acc / m[i][i];
  }
  return x;
}

// Initial filter state that makes the response to a unit step start at its
// steady state, eliminating the start-up transient for constant inputs.
std::vector<double> step_steady_state(const FilterCoeffs& c) {
  const std::size_t n = c.a.size();
  const std::size_t m = n - 1;
  // (I - A^T) zi = B with A the companion matrix of a and
  // B[i] = b[i+1] - a[i+1] * b[0].
  std::vector<std::vector<double>> lhs(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    lhs[i][i] = 1.0;
  }
  for (std::size_t j = 0; j < m; ++j) {
    lhs[j][0] += c.a[j + 1];
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    lhs[i][i + 1] -= 1.0;
  }
  std::vector<double> rhs(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    rhs[i] = c.b[i + 1] - c.a[i + 1] * c.b[0];
  }
  return solve_dense(std::move(lhs), std::move(rhs));
}

// Direct form II transposed with explicit initial state.
std::vector<double> lfilter(const FilterCoeffs& c, const std::vector<double>& x,
                            std::vector<double> state) {
  const std::size_t m = state.size();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double out = c.b[0] * x[t] + state[0];
    for (std::size_t i = 0; i + 1 < m; ++i) {
      state[i] = c.b[i + 1] * x[t] + state[i + 1] - c.a[i + 1] * out;
    }
    state[m - 1] = c.b[m] * x[t] - c.a[m] * out;
    y[t] = out;
  }
  return y;
}

}  // namespace

FilterCoeffs design_butterworth_low_pass(int order, double cutoff_hz, double sample_rate_hz) {
  FilterSpec spec;
  spec.cutoff_hz = cutoff_hz;
  spec.order = order;
  spec.validate(sample_rate_hz);

  const auto n = static_cast<std::size_t>(order);
  const double warped = std::tan(M_PI * cutoff_hz / sample_rate_hz);

  // Analog prototype poles on the unit circle's left half, scaled to the
  // prewarped cutoff, then mapped by the bilinear transform.
  std::vector<std::complex<double>> digital_poles(n);
  for (std::size_t k = 0; k < n; ++k) {
    double theta = M_PI_2 + M_PI * (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(order));
    std::complex<double> analog = warped * std::polar(1.0, theta);
    digital_poles[k] = (1.0 + analog) / (1.0 - analog);
  }

  // a(z) = prod_k (1 - pole_k z^-1), expanded over the complex poles; the
  // conjugate pairing leaves only rounding noise in the imaginary parts.
  std::vector<std::complex<double>> poly{1.0};
  for (const auto& pole : digital_poles) {
    poly.push_back(0.0);
    for (std::size_t i = poly.size() - 1; i > 0; --i) {
      poly[i] -= pole * poly[i - 1];
    }
  }
  FilterCoeffs c;
  c.a.resize(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    c.a[i] = poly[i].real();
  }

  // All zeros at z = -1: b is the binomial row, scaled for unit DC gain.
  std::vector<double> binom(n + 1, 0.0);
  binom[0] = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j > 0; --j) {
      binom[j] += binom[j - 1];
    }
  }
  double a_sum = 0.0;
  for (double v : c.a) {
    a_sum += v;
  }
  const double scale = a_sum / std::pow(2.0, static_cast<double>(order));
  c.b.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    c.b[i] = binom[i] * scale;
  }
  return c;
}

std::vector<double> filtfilt(const FilterCoeffs& coeffs, const std::vector<double>& x) {
  if (coeffs.a.size() < 2 || coeffs.a.size() != coeffs.b.size() || coeffs.a[0] != 1.0) {
    throw std::invalid_argument("filtfilt: malformed coefficients");
  }
  if (x.size() < 2) {
    return x;  // a constant of length <= 1 passes a unit-DC-gain filter unchanged
  }

  const std::size_t n = x.size();
  std::size_t pad = 3 * coeffs.a.size();
  pad = std::min(pad, n - 1);

  // Odd reflection keeps the extension continuous in value and slope.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t j = 0; j < pad; ++j) {
    ext.push_back(2.0 * x[0] - x[pad - j]);
  }
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t j = 0; j < pad; ++j) {
    ext.push_back(2.0 * x[n - 1] - x[n - 2 - j]);
  }

  const std::vector<double> zi = step_steady_state(coeffs);
  auto scaled = [&zi](double v) {
    std::vector<double> state(zi.size());
    for (std::size_t i = 0; i < zi.size(); ++i) {
      state[i] = zi[i] * v;
    }
    return state;
  };

  std::vector<double> y = lfilter(coeffs, ext, scaled(ext.front()));
  std::reverse(y.begin(), y.end());
  y = lfilter(coeffs, y, scaled(y.front()));
  std::reverse(y.begin(), y.end());

  return std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(pad),
                             y.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

Recording low_pass_filter(const Recording& recording, const FilterSpec& spec) {
  recording.validate();
  spec.validate(recording.sample_rate_hz);
  if (recording.n_samples() == 0) {
    throw InputError("cannot filter a recording with no samples");
  }
  const FilterCoeffs coeffs =
      design_butterworth_low_pass(spec.order, spec.cutoff_hz, recording.sample_rate_hz);
  Recording out = recording;
  for (auto& channel : out.samples) {
    channel = filtfilt(coeffs, channel);
  }
  return out;
}

std::vector<Frame> segment(const Recording& recording, std::size_t segment_length) {
  recording.validate();
  if (segment_length < 2) {
    throw InputError("segment length must be at least 2 samples");
  }
  const std::size_t n_frames = recording.n_samples() / segment_length;
  std::vector<Frame> frames;
  frames.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    Frame frame;
    frame.index = f;
    frame.segments.reserve(recording.n_channels());
    for (std::size_t c = 0; c < recording.n_channels(); ++c) {
      Segment seg;
      seg.channel = recording.channels[c];
      seg.frame_index = f;
      seg.label = recording.label;
      const auto begin = recording.samples[c].begin() + static_cast<std::ptrdiff_t>(f * segment_length);
      seg.samples.assign(begin, begin + static_cast<std::ptrdiff_t>(segment_length));
      frame.segments.push_back(std::move(seg));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace eegdx::signal
