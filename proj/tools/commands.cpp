#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eegdx/ensemble.hpp"
#include "eegdx/eval.hpp"
#include "eegdx/features.hpp"
#include "eegdx/ingest.hpp"
#include "eegdx/pnn.hpp"
#include "eegdx/report.hpp"
#include "eegdx/types.hpp"
#include "eegdx/util.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace eegdx::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Shared flag plumbing

// Flags shared by every evaluation-style command. Defaults are the
// best-performing configuration: 8192-sample segments, 56 Hz cutoff,
// 2-32 Hz band in 1 Hz bins, spread 0.1.
struct EvalFlags {
  std::string manifest;
  std::size_t segment_length = 8192;
  double cutoff_hz = 56.0;
  std::string band = "2:32:1";
  double spread = 0.1;
  std::string features = "all";
  std::string tie = "positive";
  unsigned jobs = 0;  // 0 = all hardware threads
  std::string out;
};

features::SpectralBandSpec parse_band(const std::string& text) {
  const std::vector<std::string> parts = util::split(text, ':');
  features::SpectralBandSpec band;
  if (parts.size() != 3 || !util::parse_double(parts[0], band.f_low_hz) ||
      !util::parse_double(parts[1], band.f_up_hz) ||
      !util::parse_double(parts[2], band.f_step_hz)) {
    throw ConfigError("band must be low:up:step (e.g. 2:32:1), got \"" + text + "\"");
  }
  return band;
}

features::ExtractionConfig config_from_flags(const EvalFlags& flags) {
  features::ExtractionConfig config;
  config.segment_length = flags.segment_length;
  config.filter.cutoff_hz = flags.cutoff_hz;
  config.band = parse_band(flags.band);
  return config;
}

// Output directory: flag wins, then EEGDX_OUT, then the working directory.
fs::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) {
    return flag_value;
  }
  if (const char* env = std::getenv("EEGDX_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return ".";
}

fs::path prepare_out_dir(const std::string& flag_value) {
  const fs::path dir = resolve_out_dir(flag_value);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write " + path.string());
  }
  out << text;
  out.flush();
  if (!out) {
    throw InputError("failed while writing " + path.string());
  }
}

void require_consistent_channels(const std::vector<eval::FrameFeatures>& frames) {
  if (frames.empty()) {
    throw InputError("dataset produced no frames (every recording is shorter than one segment)");
  }
  const auto& first = frames.front().by_channel;
  for (const auto& frame : frames) {
    if (frame.by_channel.size() != first.size()) {
      throw InputError("recordings disagree on their channel sets");
    }
    for (const auto& [channel, _] : frame.by_channel) {
      if (first.find(channel) == first.end()) {
        throw InputError("recordings disagree on their channel sets (channel \"" + channel +
                         "\")");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// gen

struct GenFlags {
  std::string out;
  std::uint64_t seed = 7;
  std::size_t subjects = 6;  // per class
  std::string classes = "both";
  double duration_s = 210.0;
  double rate_hz = 200.0;
  std::size_t channels = 22;
  double noise_sd_uv = 10.0;
  double spike_rate_hz = 0.7;
  double spike_amplitude_uv = 40.0;
};

// RNG stream tags telling healthy subjects apart from epileptic ones.
constexpr std::uint64_t kHealthySubjectStream = 0x1000;
constexpr std::uint64_t kEpilepticSubjectStream = 0x2000;

int cmd_gen(const GenFlags& flags) {
  if (flags.subjects == 0) {
    throw ConfigError("--subjects must be at least 1");
  }
  if (flags.classes != "both" && flags.classes != "epileptic" && flags.classes != "healthy") {
    throw ConfigError("--classes must be both, epileptic, or healthy");
  }
  const fs::path dir = prepare_out_dir(flags.out);

  ingest::DatasetManifest manifest;
  try {
    auto emit = [&](Label klass, std::size_t index, double spike_rate) {
      ingest::SynthSpec spec;
      spec.duration_s = flags.duration_s;
      spec.sample_rate_hz = flags.rate_hz;
      spec.n_channels = flags.channels;
      spec.klass = klass;
      spec.noise_sd_uv = flags.noise_sd_uv;
      spec.spike_rate_hz = spike_rate;
      spec.spike_amplitude_uv = flags.spike_amplitude_uv;
      const std::uint64_t stream =
          klass == Label::Epileptic ? kEpilepticSubjectStream : kHealthySubjectStream;
      spec.seed = util::mix_seed(flags.seed, stream + index);
      char id[32];
      std::snprintf(id, sizeof(id), "%s-%02zu",
                    klass == Label::Epileptic ? "epileptic" : "healthy", index + 1);
      spec.subject_id = id;

      const Recording recording = ingest::synthesize(spec);
      const std::string file = spec.subject_id + ".csv";
      ingest::write_recording(recording, (dir / file).string());

      ingest::ManifestEntry entry;
      entry.data_path = file;  // relative: the dataset directory is portable
      entry.subject_id = spec.subject_id;
      entry.label = klass;
      entry.sample_rate_hz = flags.rate_hz;
      entry.channel_names = recording.channels;
      manifest.entries.push_back(std::move(entry));
      std::cout << "wrote " << (dir / file).string() << " (" << to_string(klass) << ", "
                << recording.n_samples() << " samples)\n";
    };

    if (flags.classes != "epileptic") {
      for (std::size_t k = 0; k < flags.subjects; ++k) {
        emit(Label::Healthy, k, 0.0);
      }
    }
    if (flags.classes != "healthy") {
      for (std::size_t k = 0; k < flags.subjects; ++k) {
        // Distinct per-subject burst rates, spread around the base rate, so
        // the positive class is not twelve copies of one process.
        const double factor =
            0.7 + 0.6 * (static_cast<double>(k) + 0.5) / static_cast<double>(flags.subjects);
        emit(Label::Epileptic, k, flags.spike_rate_hz * factor);
      }
    }
    ingest::save_manifest(manifest, (dir / "manifest.json").string());
  } catch (const InputError& e) {
    // The only input errors on this path are unwritable outputs, which are
    // usage errors for a generator.
    throw ConfigError(e.what());
  }
  std::cout << "manifest: " << (dir / "manifest.json").string() << " ("
            << manifest.entries.size() << " recordings)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// loocv

int cmd_loocv(const EvalFlags& flags) {
  const features::FeatureSelection selection = features::parse_feature_selection(flags.features);
  const ensemble::TiePolicy tie = ensemble::parse_tie_policy(flags.tie);
  const features::ExtractionConfig config = config_from_flags(flags);
  const fs::path dir = prepare_out_dir(flags.out);

  const std::vector<Recording> recordings = ingest::load_dataset(flags.manifest);
  const auto frames = eval::extract_frames(recordings, config, selection, flags.jobs);
  const eval::EvalReport report =
      eval::loocv_voted(frames, config, selection, flags.spread, tie, flags.jobs);

  const std::string text = report::render_report_text(report);
  write_file(dir / "loocv-report.txt", text);
  write_file(dir / "loocv-report.json", report::report_to_json(report).dump(2) + "\n");
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------
// study

int cmd_study(const EvalFlags& flags) {
  const features::ExtractionConfig config = config_from_flags(flags);
  const fs::path dir = prepare_out_dir(flags.out);

  const std::vector<Recording> recordings = ingest::load_dataset(flags.manifest);
  // The study masks families out of full vectors itself, so extraction always
  // runs with every family enabled; --features does not apply here.
  const auto frames = eval::extract_frames(recordings, config, {}, flags.jobs);
  const eval::FeatureStudyResult study =
      eval::feature_study(frames, eval::all_feature_selections(), flags.spread, flags.jobs);

  const std::string text = report::render_study_table(study);
  write_file(dir / "feature-study.txt", text);
  write_file(dir / "feature-study.json", report::study_to_json(study, flags.spread).dump(2) + "\n");
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepFlags : EvalFlags {
  std::vector<std::size_t> lengths;
  std::vector<double> cutoffs;
  std::vector<std::string> bands;
};

std::vector<features::ExtractionConfig> sweep_configs(const SweepFlags& flags) {
  if (flags.lengths.empty() && flags.cutoffs.empty() && flags.bands.empty()) {
    return eval::standard_sweep_grid();
  }
  // Custom grid: the cross product of whatever axes were given; missing axes
  // stay at their defaults.
  const std::vector<std::size_t> lengths =
      flags.lengths.empty() ? std::vector<std::size_t>{flags.segment_length} : flags.lengths;
  const std::vector<double> cutoffs =
      flags.cutoffs.empty() ? std::vector<double>{flags.cutoff_hz} : flags.cutoffs;
  const std::vector<std::string> bands =
      flags.bands.empty() ? std::vector<std::string>{flags.band} : flags.bands;

  std::vector<features::ExtractionConfig> configs;
  for (const std::size_t length : lengths) {
    for (const double cutoff : cutoffs) {
      for (const std::string& band : bands) {
        features::ExtractionConfig config;
        config.segment_length = length;
        config.filter.cutoff_hz = cutoff;
        config.band = parse_band(band);
        configs.push_back(config);
      }
    }
  }
  return configs;
}

int cmd_sweep(const SweepFlags& flags) {
  const features::FeatureSelection selection = features::parse_feature_selection(flags.features);
  const ensemble::TiePolicy tie = ensemble::parse_tie_policy(flags.tie);
  const std::vector<features::ExtractionConfig> configs = sweep_configs(flags);
  const fs::path dir = prepare_out_dir(flags.out);

  const std::vector<Recording> recordings = ingest::load_dataset(flags.manifest);
  const eval::SweepResult sweep =
      eval::config_sweep(recordings, configs, flags.spread, tie, selection, flags.jobs);

  const std::string text = report::render_sweep_table(sweep);
  write_file(dir / "sweep-report.txt", text);
  write_file(dir / "sweep-report.json",
             report::sweep_to_json(sweep, flags.spread, tie, selection).dump(2) + "\n");
  std::cout << text;

  for (const auto& entry : sweep.entries) {
    if (!entry.report) {
      std::cerr << "error: configuration " << entry.config.fingerprint() << " failed: "
                << entry.error << "\n";
    }
  }
  const bool any_failed =
      std::any_of(sweep.entries.begin(), sweep.entries.end(),
                  [](const eval::SweepEntry& e) { return !e.report.has_value(); });
  return any_failed ? 1 : 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainFlags : EvalFlags {
  std::string model;  // defaults to <out>/model.json
};

int cmd_train(const TrainFlags& flags) {
  const features::FeatureSelection selection = features::parse_feature_selection(flags.features);
  const ensemble::TiePolicy tie = ensemble::parse_tie_policy(flags.tie);
  const features::ExtractionConfig config = config_from_flags(flags);
  const fs::path dir = prepare_out_dir(flags.out);
  const fs::path model_path = flags.model.empty() ? dir / "model.json" : fs::path(flags.model);

  const std::vector<Recording> recordings = ingest::load_dataset(flags.manifest);
  const auto frames = eval::extract_frames(recordings, config, selection, flags.jobs);
  require_consistent_channels(frames);

  ensemble::ChannelEnsemble ens;
  ens.tie_policy = tie;
  for (const auto& [channel, _] : frames.front().by_channel) {
    std::vector<features::FeatureVector> vectors;
    std::vector<std::string> labels;
    vectors.reserve(frames.size());
    labels.reserve(frames.size());
    for (const auto& frame : frames) {
      vectors.push_back(frame.by_channel.at(channel));
      labels.push_back(to_string(frame.label));
    }
    ens.members.emplace(channel, pnn::train(vectors, labels, flags.spread));
  }
  ens.validate();

  json wrapper{
      {"format", "eegdx-ensemble-model"},
      {"format_version", 1},
      {"config", report::config_to_json(config)},
      {"features", selection.id()},
      {"spread", flags.spread},
      {"ensemble", ensemble::ensemble_to_json(ens)},
  };
  write_file(model_path, wrapper.dump(2) + "\n");
  std::cout << "trained " << ens.members.size() << "-channel ensemble on " << frames.size()
            << " frames (" << selection.id() << ", " << config.fingerprint() << ")\n"
            << "model: " << model_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyFlags {
  std::string model;
  std::string input;
  double rate_hz = 200.0;
  std::string out;
  unsigned jobs = 0;
  // Optional extraction overrides; when given they must match the model.
  std::optional<std::size_t> segment_length;
  std::optional<double> cutoff_hz;
  std::optional<std::string> band;
};

struct LoadedModel {
  features::ExtractionConfig config;
  features::FeatureSelection selection;
  ensemble::ChannelEnsemble ensemble;
};

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": not valid JSON: " + e.what());
  }
  LoadedModel model;
  try {
    if (j.at("format").get<std::string>() != "eegdx-ensemble-model") {
      throw InputError(path + ": not an ensemble model file");
    }
    if (j.at("format_version").get<int>() != 1) {
      throw InputError(path + ": unsupported model format_version");
    }
    model.config = report::config_from_json(j.at("config"));
    model.selection = features::parse_feature_selection(j.at("features").get<std::string>());
    model.ensemble = ensemble::ensemble_from_json(j.at("ensemble"));
  } catch (const json::exception& e) {
    throw InputError(path + ": malformed model file: " + e.what());
  }
  model.ensemble.validate();

  // The stored extraction settings and the per-member fingerprints must
  // agree, otherwise features computed per this file's config would not be
  // comparable with its exemplars.
  const std::string expected =
      model.selection.include_rir && model.selection.include_fds && model.selection.include_hjorth
          ? model.config.fingerprint()
          : model.config.fingerprint() + "#" + model.selection.id();
  for (const auto& [channel, member] : model.ensemble.members) {
    if (member.config_id != expected) {
      throw InputError(path + ": channel \"" + channel +
                       "\" was trained with fingerprint \"" + member.config_id +
                       "\" but the file declares \"" + expected + "\"");
    }
  }
  return model;
}

int cmd_classify(const ClassifyFlags& flags) {
  const LoadedModel model = load_model_file(flags.model);

  // Extraction flags are optional here; when present they must reproduce the
  // model's fingerprint so exemplars and probes stay comparable.
  if (flags.segment_length || flags.cutoff_hz || flags.band) {
    features::ExtractionConfig requested = model.config;
    if (flags.segment_length) requested.segment_length = *flags.segment_length;
    if (flags.cutoff_hz) requested.filter.cutoff_hz = *flags.cutoff_hz;
    if (flags.band) requested.band = parse_band(*flags.band);
    if (requested.fingerprint() != model.config.fingerprint()) {
      throw InputError("feature fingerprint mismatch: model was trained with \"" +
                       model.config.fingerprint() + "\" but the flags request \"" +
                       requested.fingerprint() + "\"");
    }
  }

  const fs::path dir = prepare_out_dir(flags.out);
  const std::string subject = fs::path(flags.input).stem().string();
  const Recording recording =
      ingest::load_unlabeled_recording(flags.input, flags.rate_hz, subject);
  const auto frames =
      eval::extract_frames({recording}, model.config, model.selection, flags.jobs);

  std::ostringstream text;
  json frame_reports = json::array();
  std::map<std::string, int> subject_tally;
  for (const auto& name : model.ensemble.members.begin()->second.class_names) {
    subject_tally[name] = 0;
  }

  for (const auto& frame : frames) {
    const ensemble::VoteResult vote = ensemble::vote(model.ensemble, frame.by_channel);
    text << "frame " << frame.frame_index << ": " << vote.decision << "  (";
    bool first = true;
    for (const auto& [klass, count] : vote.tally) {
      if (!first) text << ", ";
      text << klass << " " << count;
      first = false;
    }
    text << ")\n";
    subject_tally[vote.decision] += 1;
    frame_reports.push_back(json{{"index", frame.frame_index},
                                 {"decision", vote.decision},
                                 {"tally", vote.tally},
                                 {"per_channel", vote.per_channel}});
  }

  json result{
      {"format", "eegdx-classification"},
      {"format_version", 1},
      {"input", flags.input},
      {"subject", subject},
      {"frame_count", frames.size()},
      {"frames", frame_reports},
  };

  if (frames.empty()) {
    std::cerr << "warning: " << flags.input << " is shorter than one segment ("
              << recording.n_samples() << " samples < " << model.config.segment_length
              << "); nothing to classify\n";
    result["subject_vote"] = nullptr;
    write_file(dir / "classify-report.json", result.dump(2) + "\n");
    std::cout << "0 frames\n";
    return 0;
  }

  // Second-level vote: majority over the per-frame decisions. This subject
  // summary is an extension beyond the per-frame pipeline and is labeled as
  // such in the output.
  const std::string decision = ensemble::resolve_tally(
      subject_tally, model.ensemble.positive_class, model.ensemble.tie_policy);
  text << "subject vote (majority over " << frames.size() << " frames): " << decision << "\n";
  result["subject_vote"] = json{{"decision", decision}, {"tally", subject_tally}};

  write_file(dir / "classify-report.json", result.dump(2) + "\n");
  std::cout << text.str();
  return 0;
}

// ---------------------------------------------------------------------------
// argument wiring

void add_eval_flags(CLI::App* cmd, EvalFlags& flags, bool with_features = true) {
  cmd->add_option("--manifest", flags.manifest, "dataset manifest (JSON)")->required();
  cmd->add_option("--segment-length", flags.segment_length,
                  "samples per segment (default 8192)");
  cmd->add_option("--cutoff", flags.cutoff_hz, "low-pass cutoff in Hz (default 56)");
  cmd->add_option("--band", flags.band, "spectral band low:up:step in Hz (default 2:32:1)");
  cmd->add_option("--spread", flags.spread, "kernel spread (default 0.1)");
  if (with_features) {
    cmd->add_option("--features", flags.features,
                    "feature families: all or +-joined subset of rir,fd,hjorth");
  }
  cmd->add_option("--tie", flags.tie, "tie policy: positive, negative, or lowest");
  cmd->add_option("--jobs", flags.jobs, "worker threads, 0 = all hardware threads");
  cmd->add_option("--out", flags.out, "output directory (default $EEGDX_OUT or .)");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Multichannel EEG screening toolkit: synthetic data generation, feature\n"
               "extraction, per-channel kernel classifiers with majority voting, and\n"
               "leave-one-out evaluation."};
  app.require_subcommand(1);

  GenFlags gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic labeled dataset");
  gen_cmd->add_option("--out", gen.out, "output directory (default $EEGDX_OUT or .)");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed; the only entropy source (default 7)");
  gen_cmd->add_option("--subjects", gen.subjects, "subjects per class (default 6)");
  gen_cmd->add_option("--classes", gen.classes, "both, epileptic, or healthy");
  gen_cmd->add_option("--duration", gen.duration_s, "seconds per recording (default 210)");
  gen_cmd->add_option("--rate", gen.rate_hz, "sample rate in Hz (default 200)");
  gen_cmd->add_option("--channels", gen.channels, "channels per recording (default 22)");
  gen_cmd->add_option("--noise-sd", gen.noise_sd_uv, "background noise sigma in uV");
  gen_cmd->add_option("--spike-rate", gen.spike_rate_hz,
                      "base burst rate for the epileptic class in Hz (default 0.7)");
  gen_cmd->add_option("--spike-amplitude", gen.spike_amplitude_uv,
                      "burst amplitude in uV (default 40)");

  EvalFlags loocv;
  CLI::App* loocv_cmd =
      app.add_subcommand("loocv", "leave-one-out evaluation with per-channel voting");
  add_eval_flags(loocv_cmd, loocv);

  EvalFlags study;
  CLI::App* study_cmd = app.add_subcommand(
      "study", "per-channel accuracy for every feature-family combination");
  add_eval_flags(study_cmd, study, /*with_features=*/false);

  SweepFlags sweep;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "evaluate a grid of extraction configurations");
  add_eval_flags(sweep_cmd, sweep);
  sweep_cmd->add_option("--lengths", sweep.lengths, "segment lengths to sweep")
      ->delimiter(',');
  sweep_cmd->add_option("--cutoffs", sweep.cutoffs, "cutoff frequencies to sweep")
      ->delimiter(',');
  sweep_cmd->add_option("--bands", sweep.bands, "band specs (low:up:step) to sweep")
      ->delimiter(',');

  TrainFlags train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "fit the channel ensemble and persist it");
  add_eval_flags(train_cmd, train);
  train_cmd->add_option("--model", train.model, "model file path (default <out>/model.json)");

  ClassifyFlags classify;
  CLI::App* classify_cmd =
      app.add_subcommand("classify", "classify a recording with a saved model");
  classify_cmd->add_option("--model", classify.model, "model file from `train`")->required();
  classify_cmd->add_option("--input", classify.input, "recording CSV")->required();
  classify_cmd->add_option("--rate", classify.rate_hz, "sample rate in Hz (default 200)");
  classify_cmd->add_option("--jobs", classify.jobs, "worker threads, 0 = all hardware threads");
  classify_cmd->add_option("--out", classify.out, "output directory (default $EEGDX_OUT or .)");
  classify_cmd->add_option("--segment-length", classify.segment_length,
                           "must match the model when given");
  classify_cmd->add_option("--cutoff", classify.cutoff_hz, "must match the model when given");
  classify_cmd->add_option("--band", classify.band, "must match the model when given");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen);
    if (loocv_cmd->parsed()) return cmd_loocv(loocv);
    if (study_cmd->parsed()) return cmd_study(study);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (train_cmd->parsed()) return cmd_train(train);
    if (classify_cmd->parsed()) return cmd_classify(classify);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace eegdx::cli
