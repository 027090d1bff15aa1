#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegdx/ensemble.hpp"
#include "eegdx/features.hpp"
#include "eegdx/types.hpp"

namespace eegdx::eval {

struct ConfusionCounts {
  std::size_t tp = 0;  // positive labeled, positive predicted
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  double accuracy() const;
  double sensitivity() const;  // tp / (tp + fn)
  double specificity() const;  // tn / (tn + fp)
  double true_positive_rate() const { return sensitivity(); }
  double false_positive_rate() const;  // fp / (fp + tn)
};

// One sample of a single channel's evaluation set. Epileptic counts as the
// positive class throughout.
struct LabeledVector {
  features::FeatureVector vector;
  Label label = Label::Unknown;
};

struct ChannelLoocvResult {
  double accuracy = 0.0;
  ConfusionCounts counts;
  std::vector<Label> predictions;  // one per sample, in input order
};

// Leave-one-out cross-validation for one channel: every sample is scored by
// a classifier trained on all the others, statistics refitted per fold so
// the held-out sample never leaks into its own fold. This is the fast path:
// it skips model construction and masks the held-out exemplar inside one
// scoring loop, but reproduces per-fold retraining bit for bit.
ChannelLoocvResult loocv_channel(const std::vector<LabeledVector>& samples, double spread);

// Reference implementation that literally retrains and classifies per fold.
// Kept as the oracle the fast path is checked against.
ChannelLoocvResult loocv_channel_naive(const std::vector<LabeledVector>& samples, double spread);

// All channels' feature vectors for one time window, plus provenance.
struct FrameFeatures {
  std::string subject_id;
  std::size_t frame_index = 0;
  Label label = Label::Unknown;
  std::map<std::string, features::FeatureVector> by_channel;
};

struct EvalReport {
  features::ExtractionConfig config;
  features::FeatureSelection selection;
  ensemble::TiePolicy tie_policy = ensemble::TiePolicy::FavorPositive;
  double spread = 0.1;
  std::size_t frame_count = 0;
  std::map<std::string, std::size_t> sample_counts;  // frames per class
  std::map<std::string, double> per_channel_accuracy;
  double voted_accuracy = 0.0;
  ConfusionCounts voted_counts;  // every rate below is recomputable from these
  double sensitivity = 0.0;
  double specificity = 0.0;
  double true_positive_rate = 0.0;
  double false_positive_rate = 0.0;
};

// Frame-level LOOCV with per-channel classifiers and a majority vote per
// held-out frame. Note the granularity: folds are frames, so frames of one
// subject appear in both training and test roles across folds.
EvalReport loocv_voted(const std::vector<FrameFeatures>& frames,
                       const features::ExtractionConfig& config,
                       const features::FeatureSelection& selection, double spread,
                       ensemble::TiePolicy tie_policy, unsigned jobs = 1);

// Per-channel LOOCV accuracy for every feature-family combination
// (channels x selections matrix).
struct FeatureStudyResult {
  std::vector<features::FeatureSelection> selections;
  std::vector<std::string> channels;
  std::vector<std::vector<double>> accuracy;  // [selection][channel]
  std::vector<double> mean_accuracy;          // per selection, over channels
  std::size_t best_selection = 0;             // highest mean accuracy
};

FeatureStudyResult feature_study(const std::vector<FrameFeatures>& frames,
                                 const std::vector<features::FeatureSelection>& selections,
                                 double spread, unsigned jobs = 1);

// The seven feature-family combinations, in report column order.
std::vector<features::FeatureSelection> all_feature_selections();

// Full pipeline for a set of labeled recordings: low-pass filter, segment,
// extract per-segment features, mask by selection. Frames pool across
// recordings in input order.
std::vector<FrameFeatures> extract_frames(const std::vector<Recording>& recordings,
                                          const features::ExtractionConfig& config,
                                          const features::FeatureSelection& selection,
                                          unsigned jobs = 1);

struct SweepEntry {
  features::ExtractionConfig config;
  std::optional<EvalReport> report;  // empty when this configuration failed
  std::string error;                 // failure annotation, "" on success
};

struct SweepResult {
  std::vector<SweepEntry> entries;          // sorted by voted accuracy, errors last
  std::optional<std::size_t> best_index;    // into entries; empty if all failed
};

// Runs the full pipeline plus voted LOOCV for every configuration. A failing
// configuration is annotated and skipped, the sweep continues.
SweepResult config_sweep(const std::vector<Recording>& recordings,
                         const std::vector<features::ExtractionConfig>& configs, double spread,
                         ensemble::TiePolicy tie_policy,
                         const features::FeatureSelection& selection = {}, unsigned jobs = 1);

// The built-in segment-length / cutoff / band sweep grid: cutoff varied at
// the default band for both segment lengths, the two alternative band
// splits at each length's best cutoff. Ten configurations.
std::vector<features::ExtractionConfig> standard_sweep_grid();

}  // namespace eegdx::eval
