// Acceptance gate: ten end-to-end properties of the toolkit, each printed as
// a single PASS/FAIL line. The binary exits nonzero if any property fails,
// so it doubles as a CI smoke check. Library-level properties are verified
// against the independent reference implementations in tests/oracles.hpp;
// the pipeline-level properties drive the installed CLI binary itself.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "eegdx/ensemble.hpp"
#include "eegdx/eval.hpp"
#include "eegdx/features.hpp"
#include "eegdx/pnn.hpp"
#include "json.hpp"

using namespace eegdx;

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// tiny check framework

struct CheckFailure {
  std::string message;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw CheckFailure{message};
}

std::string fmt(double value) {
  std::ostringstream out;
  out << std::setprecision(6) << value;
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// CLI plumbing

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  ++counter;
  const fs::path out_path =
      fs::temp_directory_path() / ("eegdx-acc-stdout-" + std::to_string(counter));
  const fs::path err_path =
      fs::temp_directory_path() / ("eegdx-acc-stderr-" + std::to_string(counter));
  const std::string cmd = std::string(EEGDX_BIN_PATH) + " " + args + " >" +
                          out_path.string() + " 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  fs::remove(out_path);
  fs::remove(err_path);
  return result;
}

RunResult run_cli_checked(const std::string& args) {
  const RunResult result = run_cli(args);
  require(result.exit_code == 0, "command `" + args + "` exited with " +
                                     std::to_string(result.exit_code) + ": " + result.err);
  return result;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / tag) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// ---------------------------------------------------------------------------
// synthetic classifier instances

features::FeatureVector make_fv(std::vector<double> values) {
  features::FeatureVector fv;
  fv.values = std::move(values);
  return fv;
}

struct Instance {
  std::vector<features::FeatureVector> vectors;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;      // same data, oracle layout
  std::vector<std::size_t> class_of;          // indices into sorted class names
};

Instance random_instance(std::uint64_t seed, std::size_t q, std::size_t r,
                         std::size_t n_classes) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.5);
  Instance instance;
  for (std::size_t i = 0; i < q; ++i) {
    std::vector<double> values(r);
    for (auto& v : values) v = dist(rng);
    instance.rows.push_back(values);
    instance.vectors.push_back(make_fv(std::move(values)));
    const std::size_t k = i % n_classes;
    instance.labels.push_back("c" + std::to_string(k));
    instance.class_of.push_back(k);
  }
  return instance;
}

std::vector<double> random_probe(std::mt19937_64& rng, std::size_t r) {
  std::normal_distribution<double> dist(0.0, 1.5);
  std::vector<double> probe(r);
  for (auto& v : probe) v = dist(rng);
  return probe;
}

// ---------------------------------------------------------------------------
// criterion 1: FFT magnitudes against a naive DFT

void fft_matches_naive_dft() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> pick_n(2, 128);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);

  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = pick_n(rng);
    std::vector<double> x(n);
    for (auto& v : x) v = amp(rng);

    const std::vector<double> got = features::fft_magnitudes(x);
    const std::vector<double> want = oracles::naive_dft_magnitudes(x);
    require(got.size() == want.size(), "magnitude count mismatch at N=" + std::to_string(n));

    double scale = 1.0;
    for (const double w : want) scale = std::max(scale, w);
    for (std::size_t k = 0; k < n; ++k) {
      require(std::abs(got[k] - want[k]) <= 1e-9 * scale,
              "trial " + std::to_string(trial) + ", N=" + std::to_string(n) + ", bin " +
                  std::to_string(k) + ": fft " + fmt(got[k]) + " vs dft " + fmt(want[k]));
    }
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 10.0, "transform comparison took " + fmt(elapsed) + " s (budget 10 s)");
}

// ---------------------------------------------------------------------------
// criterion 2: fractal dimensions on reference signals

void fractal_dimension_references() {
  const auto start = std::chrono::steady_clock::now();

  const std::vector<double> constant(512, 3.25);
  require(features::petrosian_fd(constant) == 1.0,
          "constant signal: sign-change dimension " + fmt(features::petrosian_fd(constant)));
  require(features::higuchi_fd(constant, 5) == 0.0,
          "constant signal: curve-length dimension should take the degenerate value 0");

  std::vector<double> ramp(4096);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.25 * static_cast<double>(i) - 3.0;
  require(features::petrosian_fd(ramp) == 1.0,
          "ramp: sign-change dimension " + fmt(features::petrosian_fd(ramp)));
  const double ramp_hfd = features::higuchi_fd(ramp, 5);
  require(std::abs(ramp_hfd - 1.0) <= 1e-3, "ramp: curve-length dimension " + fmt(ramp_hfd));

  double mean = 0.0;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> x(4096);
    for (auto& v : x) v = noise(rng);
    mean += features::higuchi_fd(x, 5);
  }
  mean /= 100.0;
  require(std::abs(mean - 2.0) <= 0.1,
          "white noise: mean curve-length dimension " + fmt(mean) + " not within 2.0 +/- 0.1");

  const double elapsed = seconds_since(start);
  require(elapsed < 30.0, "dimension references took " + fmt(elapsed) + " s (budget 30 s)");
}

// ---------------------------------------------------------------------------
// criterion 3: Hjorth parameters of pure sines

void hjorth_sine_closed_form() {
  const std::size_t n = 8192;
  for (const double ratio : {0.01, 0.05, 0.1}) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::sin(2.0 * M_PI * ratio * static_cast<double>(i));
    }
    const auto [mobility, complexity] = features::hjorth_params(x);
    const double want_mobility = 2.0 * std::sin(M_PI * ratio);
    require(std::abs(mobility - want_mobility) <= 0.01 * want_mobility,
            "ratio " + fmt(ratio) + ": mobility " + fmt(mobility) + " vs " +
                fmt(want_mobility));
    require(std::abs(complexity - 1.0) <= 0.02,
            "ratio " + fmt(ratio) + ": complexity " + fmt(complexity));
  }
}

// ---------------------------------------------------------------------------
// criterion 4: band-ratio normalization across the three band layouts

void band_ratio_normalization() {
  const std::vector<features::SpectralBandSpec> bands = {
      {2.0, 32.0, 1.0}, {2.0, 34.0, 2.0}, {2.0, 34.5, 2.5}};
  const std::vector<std::size_t> dims = {30, 16, 13};

  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::size_t> pick_n(128, 1024);
  std::uniform_real_distribution<double> amp(-50.0, 50.0);

  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = pick_n(rng);
    std::vector<double> x(n);
    for (auto& v : x) v = amp(rng);
    const std::vector<double> mags = features::fft_magnitudes(x);

    for (std::size_t b = 0; b < bands.size(); ++b) {
      const std::vector<double> psi =
          features::power_spectral_intensity(mags, bands[b], 200.0);
      const std::vector<double> rir = features::relative_intensity_ratio(psi);
      require(rir.size() == dims[b],
              "band layout " + std::to_string(b) + ": " + std::to_string(rir.size()) +
                  " bins, expected " + std::to_string(dims[b]));
      double sum = 0.0;
      for (const double v : rir) {
        require(v >= 0.0, "negative ratio in trial " + std::to_string(trial));
        sum += v;
      }
      require(std::abs(sum - 1.0) <= 1e-9,
              "trial " + std::to_string(trial) + ", layout " + std::to_string(b) +
                  ": ratios sum to " + fmt(sum));
    }
  }
}

// ---------------------------------------------------------------------------
// criterion 5: classifier equals the kernel-density oracle

void classifier_matches_kernel_oracle() {
  const double spreads[] = {0.5, 1.0, 2.0};
  for (int i = 0; i < 20; ++i) {
    const Instance instance = random_instance(500 + i, 50, 5, 3);
    const double spread = spreads[i % 3];
    const pnn::PnnModel model = pnn::train(instance.vectors, instance.labels, spread);
    const pnn::PnnModel narrow = pnn::train(instance.vectors, instance.labels, 1e-3);

    std::mt19937_64 rng(9100 + i);
    for (int p = 0; p < 100; ++p) {
      const std::vector<double> probe = random_probe(rng, 5);
      const std::size_t got = pnn::classify(model, make_fv(probe)).class_index;
      const std::size_t want =
          oracles::parzen_classify(instance.rows, instance.class_of, 3, spread, probe);
      require(got == want, "instance " + std::to_string(i) + ", probe " + std::to_string(p) +
                               ": classifier chose class " + std::to_string(got) +
                               ", kernel oracle " + std::to_string(want));

      const std::size_t got_nn = pnn::classify(narrow, make_fv(probe)).class_index;
      const std::size_t want_nn =
          oracles::nearest_neighbor_classify(instance.rows, instance.class_of, probe);
      require(got_nn == want_nn,
              "instance " + std::to_string(i) + ", probe " + std::to_string(p) +
                  ": at spread 1e-3 classifier chose " + std::to_string(got_nn) +
                  ", nearest-neighbor oracle " + std::to_string(want_nn));
    }
  }
}

// ---------------------------------------------------------------------------
// criterion 6: incremental update equals retraining

void incremental_update_equals_retrain() {
  for (int i = 0; i < 20; ++i) {
    Instance instance = random_instance(700 + i, 50, 5, 3);
    const pnn::PnnModel base = pnn::train(instance.vectors, instance.labels, 1.0);

    std::mt19937_64 rng(9700 + i);
    const std::vector<double> extra = random_probe(rng, 5);
    // Alternate between growing an existing class and introducing a new one
    // that sorts in front of every existing name.
    const std::string label = (i % 2 == 0) ? "c1" : "a0";
    const pnn::PnnModel updated = pnn::add_exemplar(base, make_fv(extra), label);

    instance.vectors.push_back(make_fv(extra));
    instance.labels.push_back(label);
    const pnn::PnnModel retrained = pnn::train(instance.vectors, instance.labels, 1.0);

    for (int p = 0; p < 100; ++p) {
      const std::vector<double> probe = random_probe(rng, 5);
      const pnn::ClassifyResult a = pnn::classify(updated, make_fv(probe));
      const pnn::ClassifyResult b = pnn::classify(retrained, make_fv(probe));
      require(a.label == b.label && a.class_index == b.class_index,
              "instance " + std::to_string(i) + ", probe " + std::to_string(p) +
                  ": incremental model chose " + a.label + ", retrained model " + b.label);
    }
  }
}

// ---------------------------------------------------------------------------
// criterion 7: cross-validation integrity

void cross_validation_integrity() {
  const std::size_t dims[] = {1, 3, 8};
  const double spreads[] = {0.1, 0.5, 1.5};
  int case_index = 0;
  for (const std::size_t q : {4, 12, 31, 60}) {
    const std::size_t dim = dims[case_index % 3];
    const double spread = spreads[case_index % 3];
    ++case_index;

    std::mt19937_64 rng(7100 + q);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<eval::LabeledVector> samples;
    for (std::size_t i = 0; i < q; ++i) {
      std::vector<double> values(dim);
      for (auto& v : values) v = dist(rng);
      samples.push_back({make_fv(std::move(values)),
                         i % 2 == 0 ? Label::Healthy : Label::Epileptic});
    }

    const eval::ChannelLoocvResult fast = eval::loocv_channel(samples, spread);
    const eval::ChannelLoocvResult naive = eval::loocv_channel_naive(samples, spread);
    require(fast.predictions == naive.predictions,
            "size " + std::to_string(q) + ": per-fold predictions differ from per-fold "
                                          "retraining");
    require(fast.accuracy == naive.accuracy && fast.counts.tp == naive.counts.tp &&
                fast.counts.fp == naive.counts.fp && fast.counts.tn == naive.counts.tn &&
                fast.counts.fn == naive.counts.fn,
            "size " + std::to_string(q) + ": summary statistics differ from per-fold "
                                          "retraining");
  }

  // Shuffled labels must score at chance: the harness has no way to leak the
  // held-out sample into its own fold.
  std::mt19937_64 rng(7421);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<double>> values;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < 200; ++i) {
    std::vector<double> v(3);
    for (auto& x : v) x = dist(rng);
    values.push_back(std::move(v));
    labels.push_back(i % 2 == 0 ? Label::Healthy : Label::Epileptic);
  }

  double mean_accuracy = 0.0;
  for (int shuffle = 0; shuffle < 20; ++shuffle) {
    std::mt19937_64 shuffle_rng(9000 + shuffle);
    std::shuffle(labels.begin(), labels.end(), shuffle_rng);
    std::vector<eval::LabeledVector> samples;
    for (std::size_t i = 0; i < values.size(); ++i) {
      samples.push_back({make_fv(values[i]), labels[i]});
    }
    mean_accuracy += eval::loocv_channel(samples, 1.0).accuracy;
  }
  mean_accuracy /= 20.0;
  require(std::abs(mean_accuracy - 0.5) <= 0.1,
          "permutation-null accuracy " + fmt(mean_accuracy) + " not within 0.5 +/- 0.1");
}

// ---------------------------------------------------------------------------
// criterion 8: synthetic end-to-end separation through the CLI

void synthetic_end_to_end_separation() {
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TempDir data("eegdx-acc-e2e-data-" + std::to_string(seed));
    TempDir out("eegdx-acc-e2e-out-" + std::to_string(seed));
    run_cli_checked("gen --out " + data.str() + " --seed " + std::to_string(seed));
    run_cli_checked("loocv --manifest " + data.file("manifest.json") +
                    " --segment-length 8192 --cutoff 56 --band 2:32:1 --spread 0.1 --out " +
                    out.str());

    const json report = json::parse(read_file(out.path / "loocv-report.json"));
    const double voted = report.at("voted").at("accuracy").get<double>();
    double best_single = 0.0;
    for (const auto& [channel, accuracy] : report.at("per_channel_accuracy").items()) {
      best_single = std::max(best_single, accuracy.get<double>());
    }
    require(voted >= 0.95, "seed " + std::to_string(seed) + ": voted accuracy " + fmt(voted) +
                               " below 0.95");
    require(voted >= best_single - 0.02,
            "seed " + std::to_string(seed) + ": voted accuracy " + fmt(voted) +
                " trails best single channel " + fmt(best_single) + " by more than 0.02");
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 600.0, "five seeds took " + fmt(elapsed) + " s (budget 600 s)");
}

// ---------------------------------------------------------------------------
// criterion 9: the standard configuration grid, reproducibly

void sweep_grid_reproducibility() {
  TempDir data("eegdx-acc-sweep-data");
  run_cli_checked("gen --out " + data.str() + " --seed 1");
  const std::string manifest = data.file("manifest.json");

  TempDir out_a("eegdx-acc-sweep-a");
  TempDir out_b("eegdx-acc-sweep-b");
  TempDir out_c("eegdx-acc-sweep-c");
  const RunResult a = run_cli_checked("sweep --manifest " + manifest + " --out " + out_a.str());
  const RunResult b = run_cli_checked("sweep --manifest " + manifest + " --jobs 1 --out " +
                                      out_b.str());
  const RunResult c = run_cli_checked("sweep --manifest " + manifest + " --jobs 3 --out " +
                                      out_c.str());

  const json report = json::parse(read_file(out_a.path / "sweep-report.json"));
  require(report.at("entries").size() == 10,
          "expected the 10-configuration grid, got " +
              std::to_string(report.at("entries").size()) + " entries");
  for (const auto& entry : report.at("entries")) {
    require(entry.contains("report"),
            "configuration " +
                entry.at("config").at("fingerprint").get<std::string>() +
                " did not complete: " + entry.value("error", std::string{}));
  }
  require(report.at("best").is_string(), "no best configuration chosen");

  // The rendered table must lay the grid out with band layouts as columns
  // and (segment length, cutoff) combinations as rows.
  const std::string table = read_file(out_a.path / "sweep-report.txt");
  for (const char* needle : {"2:32:1", "2:34:2", "2:34.5:2.5", "4096", "8192", "56", "66"}) {
    require(table.find(needle) != std::string::npos,
            std::string("rendered table is missing axis value ") + needle);
  }
  require(a.out == table, "stdout differs from the saved table");

  require(a.out == b.out && b.out == c.out, "stdout differs across runs/worker counts");
  const std::string json_a = read_file(out_a.path / "sweep-report.json");
  require(json_a == read_file(out_b.path / "sweep-report.json") &&
              json_a == read_file(out_c.path / "sweep-report.json"),
          "sweep JSON differs across runs/worker counts");
  require(table == read_file(out_b.path / "sweep-report.txt") &&
              table == read_file(out_c.path / "sweep-report.txt"),
          "sweep table differs across runs/worker counts");
}

// ---------------------------------------------------------------------------
// criterion 10: serialization round trips and CLI byte-determinism

void determinism_and_serialization() {
  // Model save/load must reproduce the model bit for bit, including the
  // derived weight matrix, and re-saving must reproduce the file bytes.
  const Instance instance = random_instance(4242, 24, 6, 2);
  const pnn::PnnModel model = pnn::train(instance.vectors, instance.labels, 0.1);

  TempDir dir("eegdx-acc-serialization");
  const fs::path first = dir.path / "model.json";
  const fs::path second = dir.path / "model-resaved.json";
  pnn::save_model(model, first);
  const pnn::PnnModel loaded = pnn::load_model(first);
  require(pnn::model_to_json(loaded).dump() == pnn::model_to_json(model).dump(),
          "loaded model serializes differently from the original");
  pnn::save_model(loaded, second);
  require(read_file(first) == read_file(second), "re-saved model file differs byte-wise");

  ensemble::ChannelEnsemble ens;
  ens.tie_policy = ensemble::TiePolicy::FavorNegative;
  for (const char* channel : {"c1", "c2", "c3"}) {
    ens.members.emplace(channel,
                        pnn::train({make_fv({0.0}), make_fv({10.0})},
                                   {"Healthy", "Epileptic"}, 1.0));
  }
  ens.validate();
  const std::string ens_json = ensemble::ensemble_to_json(ens).dump();
  require(ensemble::ensemble_to_json(ensemble::ensemble_from_json(json::parse(ens_json)))
                  .dump() == ens_json,
          "ensemble serialization does not round-trip");

  // Every CLI command, run twice with identical flags and inputs, must
  // produce identical bytes on stdout and in every file it writes.
  TempDir data("eegdx-acc-det-data");
  TempDir out("eegdx-acc-det-out");
  const std::string gen_args =
      "gen --out " + data.str() + " --seed 3 --subjects 2 --duration 30 --channels 4";
  const std::string manifest = data.file("manifest.json");
  const std::string eval_args = " --manifest " + manifest +
                                " --segment-length 512 --spread 0.1 --out " + out.str();

  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {gen_args,
       {data.file("manifest.json"), data.file("healthy-01.csv"), data.file("healthy-02.csv"),
        data.file("epileptic-01.csv"), data.file("epileptic-02.csv")}},
      {"loocv" + eval_args, {out.file("loocv-report.txt"), out.file("loocv-report.json")}},
      {"study" + eval_args, {out.file("feature-study.txt"), out.file("feature-study.json")}},
      {"sweep" + eval_args + " --lengths 512,1024 --cutoffs 56 --bands 2:32:1",
       {out.file("sweep-report.txt"), out.file("sweep-report.json")}},
      {"train" + eval_args, {out.file("model.json")}},
      {"classify --model " + out.file("model.json") + " --input " +
           data.file("healthy-01.csv") + " --out " + out.str(),
       {out.file("classify-report.json")}},
  };

  for (const auto& [args, files] : commands) {
    const RunResult first_run = run_cli_checked(args);
    std::vector<std::string> first_bytes;
    for (const auto& file : files) first_bytes.push_back(read_file(file));

    const RunResult second_run = run_cli_checked(args);
    require(first_run.out == second_run.out,
            "stdout differs between identical runs of `" + args + "`");
    for (std::size_t i = 0; i < files.size(); ++i) {
      require(first_bytes[i] == read_file(files[i]),
              "output file " + files[i] + " differs between identical runs of `" + args + "`");
    }
  }
}

struct Criterion {
  int id;
  std::string name;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "fft-vs-naive-dft", fft_matches_naive_dft},
      {2, "fractal-dimension-references", fractal_dimension_references},
      {3, "hjorth-sine-closed-form", hjorth_sine_closed_form},
      {4, "band-ratio-normalization", band_ratio_normalization},
      {5, "classifier-vs-kernel-oracle", classifier_matches_kernel_oracle},
      {6, "incremental-update-vs-retrain", incremental_update_equals_retrain},
      {7, "cross-validation-integrity", cross_validation_integrity},
      {8, "synthetic-end-to-end-separation", synthetic_end_to_end_separation},
      {9, "sweep-grid-reproducibility", sweep_grid_reproducibility},
      {10, "determinism-and-serialization", determinism_and_serialization},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string failure;
    try {
      criterion.body();
    } catch (const CheckFailure& e) {
      failure = e.message;
    } catch (const std::exception& e) {
      failure = std::string("unexpected exception: ") + e.what();
    }
    const double elapsed = seconds_since(start);

    std::ostringstream line;
    line << (failure.empty() ? "PASS" : "FAIL") << "  " << std::setw(2) << criterion.id
         << "  " << std::left << std::setw(34) << criterion.name << std::right << "  ("
         << std::fixed << std::setprecision(2) << elapsed << " s)";
    if (!failure.empty()) {
      line << "  " << failure;
      ++failures;
    }
    std::cout << line.str() << "\n" << std::flush;
  }

  if (failures == 0) {
    std::cout << "acceptance: all " << criteria.size() << " criteria hold\n";
  } else {
    std::cout << "acceptance: " << failures << " of " << criteria.size()
              << " criteria FAILED\n";
  }
  return failures == 0 ? 0 : 1;
}
