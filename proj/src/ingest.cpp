#include "eegdx/ingest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "eegdx/util.hpp"

#include "json.hpp"

namespace eegdx::ingest {
namespace {

using nlohmann::json;

// RNG stream tags; one stream per channel for the background mix plus one
// shared stream for burst events, so enabling bursts never perturbs the
// background samples.
constexpr std::uint64_t kBackgroundStream = 0x42000;
constexpr std::uint64_t kBurstStream = 0x51;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write " + path);
  }
  out << text;
  out.flush();
  if (!out) {
    throw InputError("failed while writing " + path);
  }
}

void strip_carriage_return(std::string& line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
}

}  // namespace

void ManifestEntry::validate() const {
  if (data_path.empty()) {
    throw InputError("manifest entry has an empty data_path");
  }
  if (subject_id.empty()) {
    throw InputError("manifest entry " + data_path + " has an empty subject_id");
  }
  if (label == Label::Unknown) {
    throw InputError("manifest entry " + data_path + " has no usable label");
  }
  if (sample_rate_hz <= 0.0) {
    throw InputError("manifest entry " + data_path + " must have a positive sample rate");
  }
  if (channel_names.empty()) {
    throw InputError("manifest entry " + data_path + " lists no channels");
  }
  std::set<std::string> seen;
  for (const auto& name : channel_names) {
    if (name.empty()) {
      throw InputError("manifest entry " + data_path + " has an empty channel name");
    }
    if (!seen.insert(name).second) {
      throw InputError("manifest entry " + data_path + " repeats channel \"" + name + "\"");
    }
  }
}

void DatasetManifest::validate() const {
  if (entries.empty()) {
    throw InputError("manifest has no entries");
  }
  std::set<std::string> paths;
  for (const auto& entry : entries) {
    entry.validate();
    if (!paths.insert(entry.data_path).second) {
      throw InputError("manifest lists " + entry.data_path + " twice");
    }
  }
}

DatasetManifest load_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw InputError(path + ": not valid JSON: " + e.what());
  }
  if (!j.contains("format_version")) {
    throw InputError(path + ": manifest is missing format_version");
  }
  DatasetManifest manifest;
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw InputError(path + ": unsupported manifest format_version");
    }
    for (const auto& item : j.at("entries")) {
      ManifestEntry entry;
      entry.data_path = item.at("data_path").get<std::string>();
      entry.subject_id = item.at("subject_id").get<std::string>();
      entry.label = parse_label(item.at("label").get<std::string>());
      entry.sample_rate_hz = item.at("sample_rate_hz").get<double>();
      entry.channel_names = item.at("channel_names").get<std::vector<std::string>>();
      manifest.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw InputError(path + ": malformed manifest: " + e.what());
  }
  manifest.validate();
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  manifest.validate();
  json entries = json::array();
  for (const auto& entry : manifest.entries) {
    entries.push_back(json{{"data_path", entry.data_path},
                           {"subject_id", entry.subject_id},
                           {"label", to_string(entry.label)},
                           {"sample_rate_hz", entry.sample_rate_hz},
                           {"channel_names", entry.channel_names}});
  }
  json j{{"format_version", 1}, {"entries", entries}};
  write_text_file(path, j.dump(2) + "\n");
}

namespace {

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // one per header entry
};

CsvData parse_csv(const std::string& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + csv_path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw InputError(csv_path + ": file is empty, expected a channel header row");
  }
  strip_carriage_return(line);

  CsvData data;
  data.header = util::split(line, ',');
  data.columns.resize(data.header.size());

  std::size_t line_no = 1;  // header was line 1
  while (std::getline(in, line)) {
    ++line_no;
    strip_carriage_return(line);
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) {
      break;  // tolerate one trailing newline
    }
    const std::vector<std::string> fields = util::split(line, ',');
    if (fields.size() != data.header.size()) {
      throw InputError(csv_path + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(data.header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double value = 0.0;
      if (!util::parse_double(fields[c], value)) {
        throw InputError(csv_path + ": line " + std::to_string(line_no) + ", column " +
                         std::to_string(c + 1) + ": \"" + fields[c] +
                         "\" is not a finite number");
      }
      data.columns[c].push_back(value);
    }
  }
  return data;
}

}  // namespace

Recording load_recording(const std::string& csv_path, const ManifestEntry& entry) {
  entry.validate();
  CsvData data = parse_csv(csv_path);
  if (data.header.size() != entry.channel_names.size()) {
    throw InputError(csv_path + ": header has " + std::to_string(data.header.size()) +
                     " channels but the manifest lists " +
                     std::to_string(entry.channel_names.size()));
  }
  for (std::size_t c = 0; c < data.header.size(); ++c) {
    if (data.header[c] != entry.channel_names[c]) {
      throw InputError(csv_path + ": header column " + std::to_string(c + 1) + " is \"" +
                       data.header[c] + "\" but the manifest lists \"" +
                       entry.channel_names[c] + "\"");
    }
  }

  Recording recording;
  recording.channels = entry.channel_names;
  recording.samples = std::move(data.columns);
  recording.sample_rate_hz = entry.sample_rate_hz;
  recording.subject_id = entry.subject_id;
  recording.label = entry.label;
  recording.validate();
  return recording;
}

Recording load_unlabeled_recording(const std::string& csv_path, double sample_rate_hz,
                                   const std::string& subject_id) {
  CsvData data = parse_csv(csv_path);
  Recording recording;
  recording.channels = std::move(data.header);
  recording.samples = std::move(data.columns);
  recording.sample_rate_hz = sample_rate_hz;
  recording.subject_id = subject_id;
  recording.label = Label::Unknown;
  recording.validate();
  return recording;
}

void write_recording(const Recording& recording, const std::string& csv_path) {
  recording.validate();
  std::ostringstream out;
  for (std::size_t c = 0; c < recording.channels.size(); ++c) {
    if (c > 0) out << ',';
    out << recording.channels[c];
  }
  out << '\n';
  for (std::size_t t = 0; t < recording.n_samples(); ++t) {
    for (std::size_t c = 0; c < recording.samples.size(); ++c) {
      if (c > 0) out << ',';
      out << util::format_double(recording.samples[c][t]);
    }
    out << '\n';
  }
  write_text_file(csv_path, out.str());
}

std::vector<Recording> load_dataset(const std::string& path) {
  const DatasetManifest manifest = load_manifest(path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<Recording> recordings;
  recordings.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) {
    std::filesystem::path data(entry.data_path);
    if (data.is_relative()) {
      data = base / data;
    }
    recordings.push_back(load_recording(data.string(), entry));
  }
  return recordings;
}

std::vector<BackgroundBand> SynthSpec::default_background_bands() {
  // Rough scalp-EEG rhythm mix: slow-wave, theta, alpha, and a weak beta
  // component. Amplitudes in microvolts.
  return {{2.5, 20.0}, {6.0, 15.0}, {10.0, 25.0}, {22.0, 8.0}};
}

void SynthSpec::validate() const {
  if (duration_s <= 0.0) {
    throw ConfigError("synthesis duration must be positive");
  }
  if (sample_rate_hz <= 0.0) {
    throw ConfigError("synthesis sample rate must be positive");
  }
  if (n_channels == 0) {
    throw ConfigError("synthesis needs at least one channel");
  }
  if (klass == Label::Unknown) {
    throw ConfigError("synthesis class must be Epileptic or Healthy");
  }
  if (noise_sd_uv < 0.0) {
    throw ConfigError("noise level cannot be negative");
  }
  if (spike_rate_hz < 0.0) {
    throw ConfigError("burst rate cannot be negative");
  }
  if (klass == Label::Healthy && spike_rate_hz != 0.0) {
    throw ConfigError("healthy recordings cannot have a nonzero burst rate");
  }
  if (spike_amplitude_uv < 0.0) {
    throw ConfigError("burst amplitude cannot be negative");
  }
  const double nyquist = sample_rate_hz / 2.0;
  if (spike_freq_low_hz <= 0.0 || spike_freq_high_hz < spike_freq_low_hz ||
      spike_freq_high_hz > nyquist) {
    throw ConfigError("burst frequency range must satisfy 0 < low <= high <= Nyquist");
  }
  for (const auto& band : background_bands) {
    if (band.freq_hz <= 0.0 || band.freq_hz >= nyquist) {
      throw ConfigError("background band frequency must lie inside (0, Nyquist)");
    }
    if (band.amplitude_uv < 0.0) {
      throw ConfigError("background band amplitude cannot be negative");
    }
  }
}

Recording synthesize(const SynthSpec& spec, SynthTrace* trace) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate_hz));
  if (n == 0) {
    throw ConfigError("synthesis duration is shorter than one sample");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;

  Recording recording;
  recording.channels = standard_channel_names(spec.n_channels);
  recording.sample_rate_hz = spec.sample_rate_hz;
  recording.subject_id = spec.subject_id;
  recording.label = spec.klass;
  recording.samples.assign(spec.n_channels, std::vector<double>(n, 0.0));

  for (std::size_t ch = 0; ch < spec.n_channels; ++ch) {
    util::Rng rng(util::mix_seed(spec.seed, kBackgroundStream + ch));
    std::vector<double> phases(spec.background_bands.size());
    for (std::size_t b = 0; b < phases.size(); ++b) {
      phases[b] = rng.uniform() * two_pi;
    }
    std::vector<double>& x = recording.samples[ch];
    for (std::size_t t = 0; t < n; ++t) {
      const double time_s = static_cast<double>(t) / spec.sample_rate_hz;
      double value = 0.0;
      for (std::size_t b = 0; b < spec.background_bands.size(); ++b) {
        const BackgroundBand& band = spec.background_bands[b];
        value += band.amplitude_uv * std::sin(two_pi * band.freq_hz * time_s + phases[b]);
      }
      value += spec.noise_sd_uv * rng.gaussian();
      x[t] = value;
    }
  }

  if (trace != nullptr) {
    trace->spike_count = 0;
    trace->spike_times_s.clear();
  }
  if (spec.spike_rate_hz > 0.0) {
    // One event stream for the whole recording: a burst hits every channel
    // at the same time, like a generalized discharge.
    util::Rng rng(util::mix_seed(spec.seed, kBurstStream));
    const std::size_t count = rng.poisson(spec.spike_rate_hz * spec.duration_s);
    for (std::size_t e = 0; e < count; ++e) {
      const double center_s = rng.uniform() * spec.duration_s;
      const double freq = spec.spike_freq_low_hz +
                          rng.uniform() * (spec.spike_freq_high_hz - spec.spike_freq_low_hz);
      const double width_s = 0.1 + rng.uniform() * 0.1;  // 100-200 ms bursts
      const double phase = rng.uniform() * two_pi;
      const double sigma_s = width_s / 6.0;  // +/- 3 sigma spans the burst

      const double lo_s = center_s - width_s / 2.0;
      const double hi_s = center_s + width_s / 2.0;
      const std::size_t t_lo =
          lo_s <= 0.0 ? 0 : static_cast<std::size_t>(lo_s * spec.sample_rate_hz);
      std::size_t t_hi = static_cast<std::size_t>(std::ceil(hi_s * spec.sample_rate_hz));
      if (t_hi >= n) t_hi = n - 1;
      for (std::size_t t = t_lo; t <= t_hi; ++t) {
        const double dt = static_cast<double>(t) / spec.sample_rate_hz - center_s;
        const double value = spec.spike_amplitude_uv *
                             std::exp(-dt * dt / (2.0 * sigma_s * sigma_s)) *
                             std::sin(two_pi * freq * dt + phase);
        for (std::size_t ch = 0; ch < spec.n_channels; ++ch) {
          recording.samples[ch][t] += value;
        }
      }
      if (trace != nullptr) {
        trace->spike_times_s.push_back(center_s);
      }
    }
    if (trace != nullptr) {
      trace->spike_count = count;
    }
  }
  return recording;
}

std::vector<std::string> standard_channel_names(std::size_t n) {
  static const std::vector<std::string> montage = {
      "Fp1", "Fp2", "F3", "F4", "C3", "C4", "P3", "P4", "O1", "O2", "F7",
      "F8",  "T3",  "T4", "T5", "T6", "A1", "A2", "Fz", "Pz", "Cz", "Oz"};
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < montage.size()) {
      names.push_back(montage[i]);
    } else {
      names.push_back("ch" + std::to_string(i + 1));
    }
  }
  return names;
}

}  // namespace eegdx::ingest
