#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "eegdx/features.hpp"
#include "eegdx/ingest.hpp"

using namespace eegdx;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / tag) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

ingest::ManifestEntry make_entry(const std::string& data_path, Label label,
                                 std::vector<std::string> channels) {
  ingest::ManifestEntry entry;
  entry.data_path = data_path;
  entry.subject_id = "subj-" + data_path;
  entry.label = label;
  entry.sample_rate_hz = 200.0;
  entry.channel_names = std::move(channels);
  return entry;
}

ingest::SynthSpec make_spec(std::uint64_t seed, double duration_s, std::size_t n_channels,
                            Label klass) {
  ingest::SynthSpec spec;
  spec.seed = seed;
  spec.duration_s = duration_s;
  spec.n_channels = n_channels;
  spec.klass = klass;
  spec.subject_id = "synth";
  return spec;
}

// One-sided mean power in [f_lo, f_hi] from the squared spectrum.
double band_power(const std::vector<double>& x, double fs, double f_lo, double f_hi) {
  const auto mags = features::fft_magnitudes(x);
  const auto n = static_cast<double>(x.size());
  const auto lo = static_cast<std::size_t>(std::ceil(n * f_lo / fs));
  const auto hi = static_cast<std::size_t>(std::floor(n * f_hi / fs));
  double sum = 0.0;
  for (std::size_t k = lo; k <= hi && k < mags.size(); ++k) {
    sum += mags[k] * mags[k];
  }
  return 2.0 * sum / (n * n);
}

}  // namespace

TEST_CASE("standard channel names follow the montage, then generic names") {
  const auto names = ingest::standard_channel_names(23);
  REQUIRE(names.size() == 23);
  const std::vector<std::string> montage = {
      "Fp1", "Fp2", "F3", "F4", "C3", "C4", "P3", "P4", "O1", "O2", "F7",
      "F8",  "T3",  "T4", "T5", "T6", "A1", "A2", "Fz", "Pz", "Cz", "Oz"};
  for (std::size_t i = 0; i < montage.size(); ++i) {
    CHECK(names[i] == montage[i]);
  }
  CHECK(names[22] == "ch23");
  CHECK(ingest::standard_channel_names(2) == std::vector<std::string>{"Fp1", "Fp2"});
}

TEST_CASE("synthesis is deterministic in the spec") {
  const auto spec = make_spec(7, 10.0, 4, Label::Healthy);
  const Recording a = ingest::synthesize(spec);
  const Recording b = ingest::synthesize(spec);

  CHECK(a.channels == ingest::standard_channel_names(4));
  CHECK(a.n_samples() == 2000);
  CHECK(a.sample_rate_hz == 200.0);
  CHECK(a.label == Label::Healthy);
  CHECK(a.subject_id == "synth");
  REQUIRE(a.samples == b.samples);

  // Channels carry independent phases and noise.
  CHECK(a.samples[0] != a.samples[1]);

  auto other = spec;
  other.seed = 8;
  CHECK(ingest::synthesize(other).samples != a.samples);
}

TEST_CASE("a zero-burst-rate epileptic recording is sample-identical to a healthy one") {
  const auto healthy = make_spec(21, 5.0, 3, Label::Healthy);
  auto epileptic = make_spec(21, 5.0, 3, Label::Epileptic);
  epileptic.spike_rate_hz = 0.0;

  const Recording h = ingest::synthesize(healthy);
  ingest::SynthTrace trace;
  const Recording e = ingest::synthesize(epileptic, &trace);
  CHECK(h.samples == e.samples);
  CHECK(e.label == Label::Epileptic);
  CHECK(trace.spike_count == 0);
  CHECK(trace.spike_times_s.empty());
}

TEST_CASE("burst counts and times track the requested rate") {
  auto spec = make_spec(11, 60.0, 2, Label::Epileptic);
  spec.spike_rate_hz = 1.0;
  ingest::SynthTrace trace;
  ingest::synthesize(spec, &trace);

  // Poisson with mean 60: two standard deviations is about 15.5.
  CHECK(trace.spike_count >= 44);
  CHECK(trace.spike_count <= 76);
  REQUIRE(trace.spike_times_s.size() == trace.spike_count);
  for (const double t : trace.spike_times_s) {
    CHECK(t >= 0.0);
    CHECK(t <= 60.0);
  }
}

TEST_CASE("healthy in-band power matches the analytic spectrum") {
  // Background defaults: 2.5 Hz @ 20, 6 Hz @ 15, 10 Hz @ 25, 22 Hz @ 8, plus
  // white noise with sd 10. Only the 22 Hz band sits inside 15-50 Hz, so the
  // expected one-sided power there is 8^2/2 plus the noise share
  // 2 * n_bins * sd^2 / N. All band frequencies are multiples of 1/60 Hz at
  // this duration, so nothing leaks across bin edges.
  const auto spec = make_spec(5, 60.0, 22, Label::Healthy);
  const Recording rec = ingest::synthesize(spec);
  const double n = 12000.0;
  const std::size_t bins = 3000 - 900 + 1;
  const double expected = 8.0 * 8.0 / 2.0 + 2.0 * static_cast<double>(bins) * 100.0 / n;

  double mean_power = 0.0;
  for (const auto& channel : rec.samples) {
    mean_power += band_power(channel, 200.0, 15.0, 50.0);
  }
  mean_power /= static_cast<double>(rec.samples.size());
  CHECK(mean_power == doctest::Approx(expected).epsilon(0.10));

  // Bursts concentrate extra energy in exactly that band.
  auto epi = make_spec(5, 60.0, 22, Label::Epileptic);
  epi.spike_rate_hz = 1.0;
  epi.spike_amplitude_uv = 40.0;
  const Recording sick = ingest::synthesize(epi);
  double epi_power = 0.0;
  for (const auto& channel : sick.samples) {
    epi_power += band_power(channel, 200.0, 15.0, 50.0);
  }
  epi_power /= static_cast<double>(sick.samples.size());
  CHECK(epi_power > mean_power * 1.15);
}

TEST_CASE("bursts are injected into every channel") {
  const auto healthy = make_spec(3, 5.0, 6, Label::Healthy);
  auto epileptic = make_spec(3, 5.0, 6, Label::Epileptic);
  epileptic.spike_rate_hz = 2.0;
  epileptic.spike_amplitude_uv = 50.0;

  const Recording h = ingest::synthesize(healthy);
  ingest::SynthTrace trace;
  const Recording e = ingest::synthesize(epileptic, &trace);
  REQUIRE(trace.spike_count > 0);
  for (std::size_t c = 0; c < 6; ++c) {
    CHECK(h.samples[c] != e.samples[c]);
  }
}

TEST_CASE("synthesis spec validation") {
  const auto good = make_spec(1, 5.0, 2, Label::Healthy);
  CHECK_NOTHROW(good.validate());

  auto bad = good;
  bad.duration_s = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.sample_rate_hz = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.n_channels = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.klass = Label::Unknown;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.noise_sd_uv = -0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.spike_rate_hz = 0.5;  // healthy but bursting
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  auto epi = make_spec(1, 5.0, 2, Label::Epileptic);
  epi.spike_rate_hz = -0.1;
  CHECK_THROWS_AS(epi.validate(), ConfigError);

  epi = make_spec(1, 5.0, 2, Label::Epileptic);
  epi.spike_amplitude_uv = -1.0;
  CHECK_THROWS_AS(epi.validate(), ConfigError);

  epi = make_spec(1, 5.0, 2, Label::Epileptic);
  epi.spike_freq_low_hz = 60.0;
  epi.spike_freq_high_hz = 50.0;  // low > high
  CHECK_THROWS_AS(epi.validate(), ConfigError);

  epi = make_spec(1, 5.0, 2, Label::Epileptic);
  epi.spike_freq_high_hz = 150.0;  // beyond Nyquist
  CHECK_THROWS_AS(epi.validate(), ConfigError);

  bad = good;
  bad.background_bands = {{100.0, 5.0}};  // at Nyquist
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = good;
  bad.background_bands = {{10.0, -5.0}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  // Positive but sub-sample duration only surfaces at synthesis time.
  auto tiny = make_spec(1, 0.001, 2, Label::Healthy);
  CHECK_NOTHROW(tiny.validate());
  CHECK_THROWS_AS(ingest::synthesize(tiny), ConfigError);
}

TEST_CASE("manifest save/load round trip") {
  TempDir dir("eegdx-manifest-roundtrip");
  ingest::DatasetManifest manifest;
  manifest.entries.push_back(make_entry("a.csv", Label::Epileptic, {"c1", "c2"}));
  manifest.entries.push_back(make_entry("b.csv", Label::Healthy, {"c1", "c2"}));
  manifest.entries[1].sample_rate_hz = 173.61;

  const auto path = dir.file("manifest.json");
  ingest::save_manifest(manifest, path);
  const auto loaded = ingest::load_manifest(path);

  REQUIRE(loaded.entries.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(loaded.entries[i].data_path == manifest.entries[i].data_path);
    CHECK(loaded.entries[i].subject_id == manifest.entries[i].subject_id);
    CHECK(loaded.entries[i].label == manifest.entries[i].label);
    CHECK(loaded.entries[i].sample_rate_hz == manifest.entries[i].sample_rate_hz);
    CHECK(loaded.entries[i].channel_names == manifest.entries[i].channel_names);
  }
}

TEST_CASE("manifest validation catches structural problems") {
  ingest::DatasetManifest empty;
  CHECK_THROWS_AS(empty.validate(), InputError);

  ingest::DatasetManifest dup;
  dup.entries.push_back(make_entry("same.csv", Label::Healthy, {"c1"}));
  dup.entries.push_back(make_entry("same.csv", Label::Epileptic, {"c1"}));
  CHECK_THROWS_WITH_AS(dup.validate(), doctest::Contains("twice"), InputError);

  auto entry = make_entry("x.csv", Label::Healthy, {"c1"});
  entry.subject_id = "";
  CHECK_THROWS_AS(entry.validate(), InputError);

  entry = make_entry("x.csv", Label::Unknown, {"c1"});
  CHECK_THROWS_AS(entry.validate(), InputError);

  entry = make_entry("x.csv", Label::Healthy, {"c1"});
  entry.sample_rate_hz = 0.0;
  CHECK_THROWS_AS(entry.validate(), InputError);

  entry = make_entry("x.csv", Label::Healthy, {});
  CHECK_THROWS_AS(entry.validate(), InputError);

  entry = make_entry("x.csv", Label::Healthy, {"c1", "c1"});
  CHECK_THROWS_WITH_AS(entry.validate(), doctest::Contains("repeats"), InputError);

  entry = make_entry("x.csv", Label::Healthy, {"c1", ""});
  CHECK_THROWS_AS(entry.validate(), InputError);

  entry = make_entry("", Label::Healthy, {"c1"});
  CHECK_THROWS_AS(entry.validate(), InputError);
}

TEST_CASE("manifest loading rejects corrupt documents") {
  TempDir dir("eegdx-manifest-corrupt");
  CHECK_THROWS_AS(ingest::load_manifest(dir.file("missing.json")), InputError);

  const auto invalid = dir.file("invalid.json");
  write_text(invalid, "{ not json");
  CHECK_THROWS_WITH_AS(ingest::load_manifest(invalid), doctest::Contains("not valid JSON"),
                       InputError);

  const auto no_version = dir.file("no-version.json");
  write_text(no_version, R"({"entries": []})");
  CHECK_THROWS_WITH_AS(ingest::load_manifest(no_version),
                       doctest::Contains("format_version"), InputError);

  const auto wrong_version = dir.file("wrong-version.json");
  write_text(wrong_version, R"({"format_version": 2, "entries": []})");
  CHECK_THROWS_AS(ingest::load_manifest(wrong_version), InputError);

  const auto missing_key = dir.file("missing-key.json");
  write_text(missing_key, R"({"format_version": 1, "entries": [{"data_path": "a.csv"}]})");
  CHECK_THROWS_WITH_AS(ingest::load_manifest(missing_key), doctest::Contains("malformed"),
                       InputError);

  const auto bad_label = dir.file("bad-label.json");
  write_text(bad_label, R"({"format_version": 1, "entries": [{"data_path": "a.csv",
    "subject_id": "s", "label": "Sick", "sample_rate_hz": 200, "channel_names": ["c1"]}]})");
  CHECK_THROWS_AS(ingest::load_manifest(bad_label), InputError);
}

TEST_CASE("recording CSV round trip is bit-exact") {
  TempDir dir("eegdx-csv-roundtrip");
  Recording rec;
  rec.channels = {"c1", "c2", "c3"};
  rec.sample_rate_hz = 200.0;
  rec.subject_id = "s1";
  rec.label = Label::Healthy;
  rec.samples.resize(3);
  for (std::size_t t = 0; t < 50; ++t) {
    const auto ft = static_cast<double>(t);
    rec.samples[0].push_back(std::sin(ft) * 1e-17);
    rec.samples[1].push_back(std::numbers::pi * (ft - 25.0));
    rec.samples[2].push_back(t % 2 == 0 ? -0.0 : 12345.678901234567);
  }

  const auto path = dir.file("rec.csv");
  ingest::write_recording(rec, path);
  const auto entry = make_entry("rec.csv", Label::Healthy, {"c1", "c2", "c3"});
  const Recording loaded = ingest::load_recording(path, entry);

  CHECK(loaded.channels == rec.channels);
  REQUIRE(loaded.samples == rec.samples);
  CHECK(loaded.sample_rate_hz == 200.0);
  CHECK(loaded.subject_id == entry.subject_id);
  CHECK(loaded.label == Label::Healthy);
}

TEST_CASE("CSV loading pinpoints malformed content") {
  TempDir dir("eegdx-csv-corrupt");
  const auto entry = make_entry("data.csv", Label::Healthy, {"c1", "c2"});

  CHECK_THROWS_AS(ingest::load_recording(dir.file("missing.csv"), entry), InputError);

  const auto empty = dir.file("empty.csv");
  write_text(empty, "");
  CHECK_THROWS_WITH_AS(ingest::load_recording(empty, entry), doctest::Contains("empty"),
                       InputError);

  const auto fewer = dir.file("fewer.csv");
  write_text(fewer, "c1\n1.0\n");
  CHECK_THROWS_WITH_AS(ingest::load_recording(fewer, entry),
                       doctest::Contains("header has 1 channels"), InputError);

  const auto renamed = dir.file("renamed.csv");
  write_text(renamed, "c1,cX\n1.0,2.0\n");
  CHECK_THROWS_WITH_AS(ingest::load_recording(renamed, entry),
                       doctest::Contains("header column 2"), InputError);

  const auto ragged = dir.file("ragged.csv");
  write_text(ragged, "c1,c2\n1.0,2.0\n3.0\n");
  CHECK_THROWS_WITH_AS(ingest::load_recording(ragged, entry),
                       doctest::Contains("line 3 has 1 fields"), InputError);

  const auto not_finite = dir.file("nan.csv");
  write_text(not_finite, "c1,c2\n1.0,nan\n");
  CHECK_THROWS_WITH_AS(ingest::load_recording(not_finite, entry),
                       doctest::Contains("line 2, column 2"), InputError);

  const auto overflow = dir.file("overflow.csv");
  write_text(overflow, "c1,c2\n1e999,2.0\n");
  CHECK_THROWS_WITH_AS(ingest::load_recording(overflow, entry),
                       doctest::Contains("not a finite number"), InputError);

  const auto blank_interior = dir.file("blank.csv");
  write_text(blank_interior, "c1,c2\n\n1.0,2.0\n");
  CHECK_THROWS_WITH_AS(ingest::load_recording(blank_interior, entry),
                       doctest::Contains("line 2"), InputError);

  // One trailing newline (even forming an empty last line) is tolerated;
  // further blank lines are not.
  const auto trailing = dir.file("trailing.csv");
  write_text(trailing, "c1,c2\n1.0,2.0\n\n");
  CHECK(ingest::load_recording(trailing, entry).n_samples() == 1);

  const auto double_blank = dir.file("double-blank.csv");
  write_text(double_blank, "c1,c2\n1.0,2.0\n\n\n");
  CHECK_THROWS_AS(ingest::load_recording(double_blank, entry), InputError);

  const auto crlf = dir.file("crlf.csv");
  write_text(crlf, "c1,c2\r\n1.5,2.5\r\n");
  const Recording windows = ingest::load_recording(crlf, entry);
  CHECK(windows.samples == std::vector<std::vector<double>>{{1.5}, {2.5}});
}

TEST_CASE("unlabeled loading takes the header as it comes") {
  TempDir dir("eegdx-csv-unlabeled");
  const auto path = dir.file("probe.csv");
  write_text(path, "anything,x2\n0.25,-1.5\n0.5,3.0\n");
  const Recording rec = ingest::load_unlabeled_recording(path, 256.0, "walk-in");
  CHECK(rec.channels == std::vector<std::string>{"anything", "x2"});
  CHECK(rec.label == Label::Unknown);
  CHECK(rec.sample_rate_hz == 256.0);
  CHECK(rec.subject_id == "walk-in");
  CHECK(rec.samples == std::vector<std::vector<double>>{{0.25, 0.5}, {-1.5, 3.0}});
}

TEST_CASE("load_dataset resolves data paths against the manifest directory") {
  TempDir dir("eegdx-dataset");
  fs::create_directories(dir.path / "data");

  const Recording epi = ingest::synthesize(make_spec(1, 2.0, 2, Label::Healthy));
  Recording a = epi;
  a.subject_id = "subj-a";
  a.label = Label::Epileptic;
  Recording b = epi;
  b.subject_id = "subj-b";
  b.label = Label::Healthy;
  ingest::write_recording(a, dir.file("data/a.csv"));
  ingest::write_recording(b, dir.file("data/b.csv"));

  ingest::DatasetManifest manifest;
  manifest.entries.push_back(make_entry("data/a.csv", Label::Epileptic, a.channels));
  manifest.entries.push_back(make_entry("data/b.csv", Label::Healthy, b.channels));
  manifest.entries[0].subject_id = "subj-a";
  manifest.entries[1].subject_id = "subj-b";
  ingest::save_manifest(manifest, dir.file("manifest.json"));

  const auto dataset = ingest::load_dataset(dir.file("manifest.json"));
  REQUIRE(dataset.size() == 2);
  CHECK(dataset[0].subject_id == "subj-a");
  CHECK(dataset[0].label == Label::Epileptic);
  CHECK(dataset[0].samples == a.samples);
  CHECK(dataset[1].subject_id == "subj-b");
  CHECK(dataset[1].label == Label::Healthy);
  CHECK(dataset[1].samples == b.samples);
}
