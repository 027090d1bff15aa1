#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eegdx/features.hpp"
#include "eegdx/types.hpp"

#include "json.hpp"

namespace eegdx::pnn {

// One-pass kernel classifier: the training set is the model. Exemplars are
// stored raw plus z-scored (the weight rows); a probe is z-scored with the
// same statistics, each exemplar contributes a Gaussian activation
// exp(-(||w - p|| * bias)^2) with bias = sqrt(ln 2)/spread (activation 0.5
// at distance spread), and per-class sums compete.
//
// Models are immutable: classify never mutates, add_exemplar returns a new
// model. Construct via train/add_exemplar/load_model, which establish the
// invariants; treat the fields as read-only.
struct PnnModel {
  std::vector<std::string> class_names;       // sorted, unique
  std::size_t dim = 0;                        // R
  std::vector<double> exemplars;              // Q x R raw values, row-major
  std::vector<double> weights;                // Q x R z-scored values, row-major
  std::vector<std::size_t> exemplar_class;    // Q indices into class_names
  std::vector<double> biases;                 // Q entries, all sqrt(ln 2)/spread
  double spread = 0.1;
  features::Normalizer normalizer;
  std::string config_id;                      // extraction fingerprint, "" if none

  std::size_t n_exemplars() const { return exemplar_class.size(); }
  std::size_t n_classes() const { return class_names.size(); }

  // Dense one-hot class-membership matrix (n_classes x n_exemplars); every
  // column has exactly one 1.
  std::vector<std::vector<double>> indicator_matrix() const;

  // Throws InputError if the cross-field invariants do not hold.
  void validate() const;
};

struct ClassifyResult {
  std::string label;
  std::size_t class_index = 0;
  std::vector<double> activations;   // per exemplar, in (0, 1]
  std::vector<double> class_scores;  // per class: sum of its exemplars' activations
  bool nn_fallback = false;          // true when every activation underflowed to 0
};

// Training statistics for the z-score step. Identical to
// features::fit_normalizer except that a single vector is allowed (it then
// becomes the mean with zero spread), which happens in degenerate
// leave-one-out folds.
features::Normalizer fit_training_stats(const std::vector<features::FeatureVector>& vectors);

// sqrt(ln 2)/spread: the factor that makes an exemplar's activation cross
// 0.5 exactly at distance spread.
double kernel_bias(double spread);

// Builds a model from labeled vectors. Fits the z-score statistics on
// exactly these vectors and stacks the normalized rows in input order.
// All vectors must share one dimension and one config fingerprint.
PnnModel train(const std::vector<features::FeatureVector>& vectors,
               const std::vector<std::string>& labels, double spread);

// Scores a probe against the model. Ties in the class scores resolve to the
// lowest class index; if every activation underflows to zero the decision
// falls back to the nearest exemplar by distance.
ClassifyResult classify(const PnnModel& model, const features::FeatureVector& vector);

// Returns a new model equivalent to retraining from scratch on the extended
// training set (statistics refitted, one more weight row and bias entry).
// A previously unseen label extends the class set.
PnnModel add_exemplar(const PnnModel& model, const features::FeatureVector& vector,
                      const std::string& label);

// Core scoring arithmetic shared by classify and the evaluation harness's
// masked leave-one-out path; both must produce bit-identical scores.
// weights holds count rows of length dim in normalized space; probe is
// already normalized.
struct ScoreOutcome {
  std::size_t class_index = 0;
  std::vector<double> activations;
  std::vector<double> class_scores;
  bool nn_fallback = false;
};
ScoreOutcome score_probe(std::span<const double> weights, std::size_t count, std::size_t dim,
                         std::span<const std::size_t> exemplar_class, std::size_t n_classes,
                         std::span<const double> probe, double bias);

nlohmann::json model_to_json(const PnnModel& model);
PnnModel model_from_json(const nlohmann::json& j);

// JSON persistence; a load after save reproduces every field bit-exactly.
void save_model(const PnnModel& model, const std::filesystem::path& path);
PnnModel load_model(const std::filesystem::path& path);

}  // namespace eegdx::pnn
