#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdx {

// Class label attached to recordings and segments. Unknown is only valid for
// data that has not been through a labeled manifest (e.g. a recording handed
// to the classifier).
enum class Label {
  Epileptic,
  Healthy,
  Unknown,
};

std::string to_string(Label label);

// Parses "Epileptic" / "Healthy" (case-sensitive). Throws InputError on
// anything else; Unknown is never accepted from external input.
Label parse_label(const std::string& text);

// Invalid parameters or settings (bad cutoff, malformed band, ...).
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent data (bad file, dimension mismatch, ...).
// The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation cannot produce a meaningful result (e.g. single-class dataset).
// The CLI maps this to exit code 1.
class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

// One multichannel recording. samples[ch][t] holds amplitudes in microvolts;
// every channel must have the same length and channel names must be unique.
struct Recording {
  std::vector<std::string> channels;
  std::vector<std::vector<double>> samples;
  double sample_rate_hz = 0.0;
  std::string subject_id;
  Label label = Label::Unknown;

  std::size_t n_channels() const { return channels.size(); }
  std::size_t n_samples() const { return samples.empty() ? 0 : samples[0].size(); }

  // Throws InputError if the shape invariants do not hold.
  void validate() const;
};

// One channel's window of consecutive samples. frame_index identifies the
// time window and is shared by the segments cut from all channels at that
// position.
struct Segment {
  std::string channel;
  std::size_t frame_index = 0;
  std::vector<double> samples;
  Label label = Label::Unknown;
};

enum class FilterKind { LowPass };

// Low-pass filter settings. cutoff_hz must sit below the Nyquist frequency
// of the recording it is applied to.
struct FilterSpec {
  double cutoff_hz = 56.0;
  int order = 4;
  FilterKind kind = FilterKind::LowPass;

  // Throws ConfigError if the spec cannot be realized at this sample rate.
  void validate(double sample_rate_hz) const;
};

}  // namespace eegdx
