#include "eegdx/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "eegdx/pnn.hpp"
#include "eegdx/signal.hpp"
#include "eegdx/util.hpp"

namespace eegdx::eval {

namespace {

constexpr const char* kPositiveClass = "Epileptic";

void check_loocv_input(const std::vector<LabeledVector>& samples, double spread) {
  if (spread <= 0.0) {
    throw ConfigError("spread must be positive");
  }
  if (samples.size() < 2) {
    throw EvalError("leave-one-out needs at least 2 samples");
  }
  std::set<Label> classes;
  for (const auto& s : samples) {
    if (s.label == Label::Unknown) {
      throw InputError("evaluation samples must carry a known label");
    }
    classes.insert(s.label);
  }
  if (classes.size() < 2) {
    throw EvalError("evaluation set contains a single class; nothing to cross-validate");
  }
  const std::size_t dim = samples[0].vector.values.size();
  for (const auto& s : samples) {
    if (s.vector.values.size() != dim) {
      throw InputError("evaluation vectors have mixed dimensions");
    }
  }
}

void accumulate_confusion(ConfusionCounts& counts, Label truth, Label predicted) {
  if (truth == Label::Epileptic) {
    if (predicted == Label::Epileptic) {
      ++counts.tp;
    } else {
      ++counts.fn;
    }
  } else {
    if (predicted == Label::Epileptic) {
      ++counts.fp;
    } else {
      ++counts.tn;
    }
  }
}

ChannelLoocvResult finish_channel_result(const std::vector<LabeledVector>& samples,
                                         std::vector<Label> predictions) {
  ChannelLoocvResult result;
  result.predictions = std::move(predictions);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    accumulate_confusion(result.counts, samples[i].label, result.predictions[i]);
    if (result.predictions[i] == samples[i].label) {
      ++hits;
    }
  }
  result.accuracy = static_cast<double>(hits) / static_cast<double>(samples.size());
  return result;
}

}  // namespace

double ConfusionCounts::accuracy() const {
  return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

double ConfusionCounts::sensitivity() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionCounts::specificity() const {
  return tn + fp == 0 ? 0.0 : static_cast<double>(tn) / static_cast<double>(tn + fp);
}

double ConfusionCounts::false_positive_rate() const {
  return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn);
}

ChannelLoocvResult loocv_channel(const std::vector<LabeledVector>& samples, double spread) {
  check_loocv_input(samples, spread);
  const std::size_t q = samples.size();
  const std::size_t dim = samples[0].vector.values.size();
  std::vector<Label> predictions(q, Label::Unknown);

  std::vector<features::FeatureVector> fold_vectors;
  std::vector<std::string> fold_names;
  std::vector<double> fold_weights;
  std::vector<std::size_t> fold_class;
  fold_vectors.reserve(q - 1);
  fold_weights.reserve((q - 1) * dim);
  fold_class.reserve(q - 1);

  for (std::size_t held = 0; held < q; ++held) {
    fold_vectors.clear();
    fold_names.clear();
    for (std::size_t j = 0; j < q; ++j) {
      if (j == held) {
        continue;  // the held-out sample is masked out of this fold entirely
      }
      fold_vectors.push_back(samples[j].vector);
      fold_names.push_back(to_string(samples[j].label));
    }
    // Statistics come from the fold's training rows only, recomputed exactly
    // the way train() would.
    const features::Normalizer stats = pnn::fit_training_stats(fold_vectors);

    const std::set<std::string> unique(fold_names.begin(), fold_names.end());
    const std::vector<std::string> class_names(unique.begin(), unique.end());

    fold_weights.clear();
    fold_class.clear();
    for (std::size_t j = 0; j < fold_vectors.size(); ++j) {
      const features::FeatureVector normalized = apply_normalizer(stats, fold_vectors[j]);
      fold_weights.insert(fold_weights.end(), normalized.values.begin(), normalized.values.end());
      const auto it = std::lower_bound(class_names.begin(), class_names.end(), fold_names[j]);
      fold_class.push_back(static_cast<std::size_t>(it - class_names.begin()));
    }
    const features::FeatureVector probe = apply_normalizer(stats, samples[held].vector);
    const pnn::ScoreOutcome outcome =
        pnn::score_probe(fold_weights, fold_vectors.size(), dim, fold_class, class_names.size(),
                         probe.values, pnn::kernel_bias(spread));
    predictions[held] = parse_label(class_names[outcome.class_index]);
  }
  return finish_channel_result(samples, std::move(predictions));
}

ChannelLoocvResult loocv_channel_naive(const std::vector<LabeledVector>& samples, double spread) {
  check_loocv_input(samples, spread);
  const std::size_t q = samples.size();
  std::vector<Label> predictions(q, Label::Unknown);
  for (std::size_t held = 0; held < q; ++held) {
    std::vector<features::FeatureVector> vectors;
    std::vector<std::string> labels;
    vectors.reserve(q - 1);
    labels.reserve(q - 1);
    for (std::size_t j = 0; j < q; ++j) {
      if (j == held) {
        continue;
      }
      vectors.push_back(samples[j].vector);
      labels.push_back(to_string(samples[j].label));
    }
    const pnn::PnnModel model = pnn::train(vectors, labels, spread);
    const pnn::ClassifyResult result = pnn::classify(model, samples[held].vector);
    predictions[held] = parse_label(result.label);
  }
  return finish_channel_result(samples, std::move(predictions));
}

namespace {

std::vector<std::string> frame_channels(const std::vector<FrameFeatures>& frames) {
  if (frames.size() < 2) {
    throw EvalError("voted leave-one-out needs at least 2 frames");
  }
  std::vector<std::string> channels;
  for (const auto& [channel, vec] : frames[0].by_channel) {
    channels.push_back(channel);
  }
  if (channels.empty()) {
    throw InputError("frames contain no channels");
  }
  for (const auto& frame : frames) {
    if (frame.by_channel.size() != channels.size()) {
      throw InputError("frames have inconsistent channel sets");
    }
    for (const auto& name : channels) {
      if (frame.by_channel.find(name) == frame.by_channel.end()) {
        throw InputError("frame is missing channel \"" + name + "\"");
      }
    }
  }
  return channels;  // std::map keys: already sorted
}

}  // namespace

EvalReport loocv_voted(const std::vector<FrameFeatures>& frames,
                       const features::ExtractionConfig& config,
                       const features::FeatureSelection& selection, double spread,
                       ensemble::TiePolicy tie_policy, unsigned jobs) {
  const std::vector<std::string> channels = frame_channels(frames);

  EvalReport report;
  report.config = config;
  report.selection = selection;
  report.tie_policy = tie_policy;
  report.spread = spread;
  report.frame_count = frames.size();
  for (const auto& frame : frames) {
    ++report.sample_counts[to_string(frame.label)];
  }

  // Per-channel LOOCV; every (channel, fold) prediction feeds the vote.
  std::vector<ChannelLoocvResult> channel_results(channels.size());
  util::parallel_for(channels.size(), jobs, [&](std::size_t c) {
    std::vector<LabeledVector> samples;
    samples.reserve(frames.size());
    for (const auto& frame : frames) {
      samples.push_back({frame.by_channel.at(channels[c]), frame.label});
    }
    channel_results[c] = loocv_channel(samples, spread);
  });

  for (std::size_t c = 0; c < channels.size(); ++c) {
    report.per_channel_accuracy[channels[c]] = channel_results[c].accuracy;
  }

  std::size_t voted_hits = 0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    std::map<std::string, int> tally;
    for (const auto& [name, count] : report.sample_counts) {
      tally[name] = 0;
    }
    for (std::size_t c = 0; c < channels.size(); ++c) {
      ++tally[to_string(channel_results[c].predictions[f])];
    }
    const std::string decision = ensemble::resolve_tally(tally, kPositiveClass, tie_policy);
    const Label voted = parse_label(decision);
    accumulate_confusion(report.voted_counts, frames[f].label, voted);
    if (voted == frames[f].label) {
      ++voted_hits;
    }
  }
  report.voted_accuracy = static_cast<double>(voted_hits) / static_cast<double>(frames.size());
  report.sensitivity = report.voted_counts.sensitivity();
  report.specificity = report.voted_counts.specificity();
  report.true_positive_rate = report.voted_counts.true_positive_rate();
  report.false_positive_rate = report.voted_counts.false_positive_rate();
  return report;
}

std::vector<features::FeatureSelection> all_feature_selections() {
  // Column order of the per-channel accuracy table.
  return {
      {true, true, true},    // rir+fd+hjorth
      {false, true, true},   // fd+hjorth
      {false, true, false},  // fd
      {true, false, false},  // rir
      {false, false, true},  // hjorth
      {true, true, false},   // rir+fd
      {true, false, true},   // rir+hjorth
  };
}

FeatureStudyResult feature_study(const std::vector<FrameFeatures>& frames,
                                 const std::vector<features::FeatureSelection>& selections,
                                 double spread, unsigned jobs) {
  if (selections.empty()) {
    throw ConfigError("feature study needs at least one selection");
  }
  FeatureStudyResult result;
  result.selections = selections;
  result.channels = frame_channels(frames);
  result.accuracy.assign(selections.size(), std::vector<double>(result.channels.size(), 0.0));
  result.mean_accuracy.assign(selections.size(), 0.0);

  // One task per (selection, channel) cell; each writes only its own slot.
  const std::size_t n_cells = selections.size() * result.channels.size();
  util::parallel_for(n_cells, jobs, [&](std::size_t cell) {
    const std::size_t s = cell / result.channels.size();
    const std::size_t c = cell % result.channels.size();
    std::vector<LabeledVector> samples;
    samples.reserve(frames.size());
    for (const auto& frame : frames) {
      samples.push_back(
          {selections[s].apply(frame.by_channel.at(result.channels[c])), frame.label});
    }
    result.accuracy[s][c] = loocv_channel(samples, spread).accuracy;
  });

  for (std::size_t s = 0; s < selections.size(); ++s) {
    double sum = 0.0;
    for (double a : result.accuracy[s]) {
      sum += a;
    }
    result.mean_accuracy[s] = sum / static_cast<double>(result.channels.size());
    if (result.mean_accuracy[s] > result.mean_accuracy[result.best_selection]) {
      result.best_selection = s;
    }
  }
  return result;
}

std::vector<FrameFeatures> extract_frames(const std::vector<Recording>& recordings,
                                          const features::ExtractionConfig& config,
                                          const features::FeatureSelection& selection,
                                          unsigned jobs) {
  if (recordings.empty()) {
    throw InputError("no recordings to process");
  }
  selection.validate();
  for (const auto& recording : recordings) {
    recording.validate();
    config.validate(recording.sample_rate_hz);
  }

  std::vector<FrameFeatures> out;
  struct Task {
    const Segment* segment;
    double sample_rate_hz;
    std::size_t frame_slot;
  };
  std::vector<std::vector<signal::Frame>> per_recording(recordings.size());
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < recordings.size(); ++r) {
    const Recording filtered = signal::low_pass_filter(recordings[r], config.filter);
    per_recording[r] = signal::segment(filtered, config.segment_length);
    for (auto& frame : per_recording[r]) {
      FrameFeatures ff;
      ff.subject_id = recordings[r].subject_id;
      ff.frame_index = frame.index;
      ff.label = recordings[r].label;
      out.push_back(std::move(ff));
      for (const auto& seg : frame.segments) {
        tasks.push_back({&seg, recordings[r].sample_rate_hz, out.size() - 1});
      }
    }
  }

  // Feature extraction dominates the pipeline cost; it parallelizes per
  // segment, and each task writes to a distinct (frame, channel) slot.
  std::vector<features::FeatureVector> extracted(tasks.size());
  util::parallel_for(tasks.size(), jobs, [&](std::size_t t) {
    extracted[t] =
        selection.apply(features::extract(*tasks[t].segment, config, tasks[t].sample_rate_hz));
  });
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    out[tasks[t].frame_slot].by_channel[tasks[t].segment->channel] = std::move(extracted[t]);
  }
  return out;
}

SweepResult config_sweep(const std::vector<Recording>& recordings,
                         const std::vector<features::ExtractionConfig>& configs, double spread,
                         ensemble::TiePolicy tie_policy,
                         const features::FeatureSelection& selection, unsigned jobs) {
  if (configs.empty()) {
    throw ConfigError("sweep needs at least one configuration");
  }
  SweepResult result;
  result.entries.resize(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    SweepEntry& entry = result.entries[i];
    entry.config = configs[i];
    try {
      const std::vector<FrameFeatures> frames =
          extract_frames(recordings, configs[i], selection, jobs);
      entry.report = loocv_voted(frames, configs[i], selection, spread, tie_policy, jobs);
    } catch (const std::exception& e) {
      entry.error = e.what();  // annotate and move on; the sweep must finish
    }
  }
  std::stable_sort(result.entries.begin(), result.entries.end(),
                   [](const SweepEntry& a, const SweepEntry& b) {
                     if (a.report.has_value() != b.report.has_value()) {
                       return a.report.has_value();
                     }
                     if (!a.report.has_value()) {
                       return false;
                     }
                     return a.report->voted_accuracy > b.report->voted_accuracy;
                   });
  if (!result.entries.empty() && result.entries[0].report.has_value()) {
    result.best_index = 0;
  }
  return result;
}

std::vector<features::ExtractionConfig> standard_sweep_grid() {
  const features::SpectralBandSpec band_1hz{2.0, 32.0, 1.0};
  const features::SpectralBandSpec band_2hz{2.0, 34.0, 2.0};
  const features::SpectralBandSpec band_25hz{2.0, 34.5, 2.5};

  auto make = [](std::size_t length, double cutoff, const features::SpectralBandSpec& band) {
    features::ExtractionConfig config;
    config.segment_length = length;
    config.filter.cutoff_hz = cutoff;
    config.band = band;
    return config;
  };

  // Cutoff varied at the default band split; the alternative splits run at
  // each segment length's best cutoff. The two high cutoffs are only paired
  // with the longer segments.
  return {
      make(4096, 40.0, band_1hz),
      make(4096, 46.0, band_1hz),
      make(4096, 46.0, band_2hz),
      make(4096, 46.0, band_25hz),
      make(8192, 40.0, band_1hz),
      make(8192, 46.0, band_1hz),
      make(8192, 56.0, band_1hz),
      make(8192, 66.0, band_1hz),
      make(8192, 56.0, band_2hz),
      make(8192, 56.0, band_25hz),
  };
}

}  // namespace eegdx::eval
