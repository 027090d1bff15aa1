#pragma once

#include <cstddef>
#include <vector>

#include "eegdx/types.hpp"

namespace eegdx::signal {

// Digital IIR transfer function b(z)/a(z), a[0] normalized to 1.
struct FilterCoeffs {
  std::vector<double> b;
  std::vector<double> a;
};

// Designs a digital Butterworth low-pass via the bilinear transform with
// frequency prewarping: unit gain at DC, -3 dB at cutoff_hz for a single
// forward pass.
FilterCoeffs design_butterworth_low_pass(int order, double cutoff_hz, double sample_rate_hz);

// Zero-phase filtering: forward pass, backward pass. Input is extended by
// odd reflection at both ends and the filter state is seeded with the step
// steady state, so edge transients stay small. Output has the same length
// as the input. Each pass applies the filter's magnitude response once, so
// the effective attenuation is the squared single-pass response.
std::vector<double> filtfilt(const FilterCoeffs& coeffs, const std::vector<double>& x);

// Applies the low-pass to every channel (zero-phase). Metadata is preserved.
Recording low_pass_filter(const Recording& recording, const FilterSpec& spec);

// Co-temporal segments cut from all channels at one window position.
struct Frame {
  std::size_t index = 0;
  std::vector<Segment> segments;  // one per channel, recording channel order
};

// Splits every channel into consecutive non-overlapping windows of
// segment_length samples. A trailing remainder shorter than one window is
// discarded. A recording shorter than one window yields no frames.
std::vector<Frame> segment(const Recording& recording, std::size_t segment_length);

}  // namespace eegdx::signal
