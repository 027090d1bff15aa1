#include "eegdx/types.hpp"

#include <set>

namespace eegdx {

std::string to_string(Label label) {
  switch (label) {
    case Label::Epileptic:
      return "Epileptic";
    case Label::Healthy:
      return "Healthy";
    case Label::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

Label parse_label(const std::string& text) {
  if (text == "Epileptic") {
    return Label::Epileptic;
  }
  if (text == "Healthy") {
    return Label::Healthy;
  }
  throw InputError("unknown label \"" + text + "\" (expected Epileptic or Healthy)");
}

void Recording::validate() const {
  if (channels.empty()) {
    throw InputError("recording has no channels");
  }
  if (channels.size() != samples.size()) {
    throw InputError("recording has " + std::to_string(channels.size()) + " channel names but " +
                     std::to_string(samples.size()) + " sample columns");
  }
  if (sample_rate_hz <= 0.0) {
    throw InputError("recording sample rate must be positive");
  }
  std::set<std::string> seen;
  for (const auto& name : channels) {
    if (name.empty()) {
      throw InputError("recording has an empty channel name");
    }
    if (!seen.insert(name).second) {
      throw InputError("duplicate channel name \"" + name + "\"");
    }
  }
  const std::size_t len = samples[0].size();
  for (std::size_t c = 1; c < samples.size(); ++c) {
    if (samples[c].size() != len) {
      throw InputError("channel \"" + channels[c] + "\" has " + std::to_string(samples[c].size()) +
                       " samples, expected " + std::to_string(len));
    }
  }
}

void FilterSpec::validate(double sample_rate_hz) const {
  if (sample_rate_hz <= 0.0) {
    throw ConfigError("sample rate must be positive");
  }
  if (order < 1) {
    throw ConfigError("filter order must be >= 1");
  }
  if (cutoff_hz <= 0.0) {
    throw ConfigError("filter cutoff must be positive");
  }
  if (cutoff_hz >= sample_rate_hz / 2.0) {
    throw ConfigError("filter cutoff " + std::to_string(cutoff_hz) +
                      " Hz must lie below the Nyquist frequency " +
                      std::to_string(sample_rate_hz / 2.0) + " Hz");
  }
}

}  // namespace eegdx
