#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eegdx/types.hpp"

namespace eegdx::ingest {

// One recording in a dataset manifest. data_path is resolved relative to
// the manifest file's directory when it is not absolute.
struct ManifestEntry {
  std::string data_path;
  std::string subject_id;
  Label label = Label::Unknown;
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_names;

  void validate() const;  // throws InputError
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  void validate() const;  // per-entry checks plus unique data paths
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// CSV with one header row of channel names and one sample per data row.
// Values must parse as finite numbers; errors report line and column.
Recording load_recording(const std::string& csv_path, const ManifestEntry& entry);
void write_recording(const Recording& recording, const std::string& csv_path);

// Same CSV format, but channel names are taken from the header as-is and the
// label is Unknown: the loader for data that is about to be classified.
Recording load_unlabeled_recording(const std::string& csv_path, double sample_rate_hz,
                                   const std::string& subject_id);

// Loads every entry of the manifest at `path`, in manifest order.
std::vector<Recording> load_dataset(const std::string& path);

// -------------------------------------------------------------------------
// Synthetic recordings

// A background rhythm component: a sinusoid at freq_hz whose phase is drawn
// per channel.
struct BackgroundBand {
  double freq_hz = 0.0;
  double amplitude_uv = 0.0;
};

// Epileptic recordings superimpose transient oscillatory bursts on the
// background; burst events are shared across all channels of a recording.
struct SynthSpec {
  std::uint64_t seed = 0;
  double duration_s = 210.0;
  double sample_rate_hz = 200.0;
  std::size_t n_channels = 22;
  Label klass = Label::Healthy;
  std::vector<BackgroundBand> background_bands = default_background_bands();
  double noise_sd_uv = 10.0;
  double spike_rate_hz = 0.0;       // expected bursts per second
  double spike_freq_low_hz = 15.0;  // burst carrier frequency range
  double spike_freq_high_hz = 50.0;
  double spike_amplitude_uv = 30.0;
  std::string subject_id;

  void validate() const;  // throws ConfigError
  static std::vector<BackgroundBand> default_background_bands();
};

// What the generator actually injected, for tests and debugging.
struct SynthTrace {
  std::size_t spike_count = 0;
  std::vector<double> spike_times_s;
};

// Deterministic in every field of the spec. With spike_rate_hz == 0 the
// samples are byte-identical to a Healthy spec that matches otherwise.
Recording synthesize(const SynthSpec& spec, SynthTrace* trace = nullptr);

// Standard 10-20 electrode names; indices past the montage get generic names.
std::vector<std::string> standard_channel_names(std::size_t n);

}  // namespace eegdx::ingest
