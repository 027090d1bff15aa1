#include "eegdx/pnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace eegdx::pnn {

double kernel_bias(double spread) { return std::sqrt(std::log(2.0)) / spread; }

std::vector<std::vector<double>> PnnModel::indicator_matrix() const {
  std::vector<std::vector<double>> m(n_classes(), std::vector<double>(n_exemplars(), 0.0));
  for (std::size_t q = 0; q < n_exemplars(); ++q) {
    m[exemplar_class[q]][q] = 1.0;
  }
  return m;
}

void PnnModel::validate() const {
  const std::size_t q = n_exemplars();
  if (q == 0) {
    throw InputError("model has no exemplars");
  }
  if (dim == 0) {
    throw InputError("model has zero feature dimension");
  }
  if (class_names.empty()) {
    throw InputError("model has no classes");
  }
  if (!std::is_sorted(class_names.begin(), class_names.end()) ||
      std::adjacent_find(class_names.begin(), class_names.end()) != class_names.end()) {
    throw InputError("model class names must be sorted and unique");
  }
  if (exemplars.size() != q * dim || weights.size() != q * dim) {
    throw InputError("model exemplar matrix shape mismatch");
  }
  if (biases.size() != q) {
    throw InputError("model bias count mismatch");
  }
  if (spread <= 0.0) {
    throw InputError("model spread must be positive");
  }
  const double expected_bias = kernel_bias(spread);
  for (double b : biases) {
    if (b != expected_bias) {
      throw InputError("model bias entries must all equal sqrt(ln 2)/spread");
    }
  }
  for (std::size_t c : exemplar_class) {
    if (c >= class_names.size()) {
      throw InputError("model exemplar class index out of range");
    }
  }
  if (normalizer.mean.size() != dim || normalizer.sd.size() != dim) {
    throw InputError("model normalizer dimension mismatch");
  }
}

features::Normalizer fit_training_stats(const std::vector<features::FeatureVector>& vectors) {
  if (vectors.empty()) {
    throw InputError("cannot fit statistics on an empty training set");
  }
  if (vectors.size() == 1) {
    // Single-exemplar fold: the exemplar is the mean, spread is zero.
    features::Normalizer norm;
    norm.mean = vectors[0].values;
    norm.sd.assign(vectors[0].values.size(), 0.0);
    return norm;
  }
  return features::fit_normalizer(vectors);
}

ScoreOutcome score_probe(std::span<const double> weights, std::size_t count, std::size_t dim,
                         std::span<const std::size_t> exemplar_class, std::size_t n_classes,
                         std::span<const double> probe, double bias) {
  ScoreOutcome out;
  out.activations.resize(count);
  out.class_scores.assign(n_classes, 0.0);
  std::vector<double> distances(count);
  for (std::size_t q = 0; q < count; ++q) {
    const double* row = weights.data() + q * dim;
    double dist_sq = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double delta = row[d] - probe[d];
      dist_sq += delta * delta;
    }
    const double scaled = std::sqrt(dist_sq) * bias;
    const double activation = std::exp(-(scaled * scaled));
    distances[q] = scaled;
    out.activations[q] = activation;
    out.class_scores[exemplar_class[q]] += activation;
  }

  double best_score = -1.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (out.class_scores[c] > best_score) {
      best_score = out.class_scores[c];
      out.class_index = c;
    }
  }

  if (best_score == 0.0) {
    // Every kernel underflowed: decide by the nearest exemplar instead,
    // resolving distance ties toward the lowest class index.
    out.nn_fallback = true;
    double best_dist = distances[0];
    std::size_t best_class = exemplar_class[0];
    for (std::size_t q = 1; q < count; ++q) {
      if (distances[q] < best_dist ||
          (distances[q] == best_dist && exemplar_class[q] < best_class)) {
        best_dist = distances[q];
        best_class = exemplar_class[q];
      }
    }
    out.class_index = best_class;
  }
  return out;
}

PnnModel train(const std::vector<features::FeatureVector>& vectors,
               const std::vector<std::string>& labels, double spread) {
  if (vectors.empty() || labels.empty()) {
    throw InputError("training set must be nonempty");
  }
  if (vectors.size() != labels.size()) {
    throw InputError("got " + std::to_string(vectors.size()) + " vectors but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (spread <= 0.0) {
    throw ConfigError("spread must be positive");
  }
  const std::size_t dim = vectors[0].values.size();
  if (dim == 0) {
    throw InputError("training vectors must be non-empty");
  }
  for (const auto& v : vectors) {
    if (v.values.size() != dim) {
      throw InputError("training vectors have mixed dimensions");
    }
    if (v.config_id != vectors[0].config_id) {
      throw InputError("training vectors come from different extraction configs");
    }
  }

  PnnModel model;
  model.dim = dim;
  model.spread = spread;
  model.config_id = vectors[0].config_id;

  const std::set<std::string> unique(labels.begin(), labels.end());
  model.class_names.assign(unique.begin(), unique.end());

  model.normalizer = fit_training_stats(vectors);

  const double bias = kernel_bias(spread);
  model.exemplars.reserve(vectors.size() * dim);
  model.weights.reserve(vectors.size() * dim);
  model.exemplar_class.reserve(vectors.size());
  model.biases.assign(vectors.size(), bias);
  for (std::size_t q = 0; q < vectors.size(); ++q) {
    model.exemplars.insert(model.exemplars.end(), vectors[q].values.begin(),
                           vectors[q].values.end());
    const features::FeatureVector normalized = apply_normalizer(model.normalizer, vectors[q]);
    model.weights.insert(model.weights.end(), normalized.values.begin(), normalized.values.end());
    const auto it = std::lower_bound(model.class_names.begin(), model.class_names.end(), labels[q]);
    model.exemplar_class.push_back(static_cast<std::size_t>(it - model.class_names.begin()));
  }
  return model;
}

ClassifyResult classify(const PnnModel& model, const features::FeatureVector& vector) {
  model.validate();
  if (vector.values.size() != model.dim) {
    throw InputError("probe dimension " + std::to_string(vector.values.size()) +
                     " does not match model dimension " + std::to_string(model.dim));
  }
  const features::FeatureVector probe = apply_normalizer(model.normalizer, vector);
  const ScoreOutcome outcome =
      score_probe(model.weights, model.n_exemplars(), model.dim, model.exemplar_class,
                  model.n_classes(), probe.values, kernel_bias(model.spread));
  ClassifyResult result;
  result.label = model.class_names[outcome.class_index];
  result.class_index = outcome.class_index;
  result.activations = outcome.activations;
  result.class_scores = outcome.class_scores;
  result.nn_fallback = outcome.nn_fallback;
  return result;
}

PnnModel add_exemplar(const PnnModel& model, const features::FeatureVector& vector,
                      const std::string& label) {
  model.validate();
  if (vector.values.size() != model.dim) {
    throw InputError("new exemplar dimension " + std::to_string(vector.values.size()) +
                     " does not match model dimension " + std::to_string(model.dim));
  }
  if (!model.config_id.empty() && !vector.config_id.empty() &&
      vector.config_id != model.config_id) {
    throw InputError("new exemplar extraction config \"" + vector.config_id +
                     "\" does not match the model's \"" + model.config_id + "\"");
  }
  // Rebuild from the stored raw exemplars; equivalent to retraining from
  // scratch on the extended set (statistics included).
  std::vector<features::FeatureVector> vectors;
  std::vector<std::string> labels;
  vectors.reserve(model.n_exemplars() + 1);
  labels.reserve(model.n_exemplars() + 1);
  for (std::size_t q = 0; q < model.n_exemplars(); ++q) {
    features::FeatureVector v;
    v.values.assign(model.exemplars.begin() + static_cast<std::ptrdiff_t>(q * model.dim),
                    model.exemplars.begin() + static_cast<std::ptrdiff_t>((q + 1) * model.dim));
    v.config_id = model.config_id;
    vectors.push_back(std::move(v));
    labels.push_back(model.class_names[model.exemplar_class[q]]);
  }
  features::FeatureVector added = vector;
  added.config_id = model.config_id;
  vectors.push_back(std::move(added));
  labels.push_back(label);
  return train(vectors, labels, model.spread);
}

nlohmann::json model_to_json(const PnnModel& model) {
  model.validate();
  nlohmann::json j;
  j["format"] = "eegdx-pnn";
  j["format_version"] = 1;
  j["spread"] = model.spread;
  j["class_names"] = model.class_names;
  j["exemplar_class"] = model.exemplar_class;
  j["dim"] = model.dim;
  j["config_id"] = model.config_id;
  j["normalizer"] = {{"mean", model.normalizer.mean}, {"sd", model.normalizer.sd}};
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t q = 0; q < model.n_exemplars(); ++q) {
    rows.push_back(std::vector<double>(
        model.exemplars.begin() + static_cast<std::ptrdiff_t>(q * model.dim),
        model.exemplars.begin() + static_cast<std::ptrdiff_t>((q + 1) * model.dim)));
  }
  j["exemplars"] = std::move(rows);
  return j;
}

PnnModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "eegdx-pnn") {
      throw InputError("not a classifier model document");
    }
    if (j.at("format_version").get<int>() != 1) {
      throw InputError("unsupported model format version");
    }
    PnnModel model;
    model.spread = j.at("spread").get<double>();
    model.class_names = j.at("class_names").get<std::vector<std::string>>();
    model.exemplar_class = j.at("exemplar_class").get<std::vector<std::size_t>>();
    model.dim = j.at("dim").get<std::size_t>();
    model.config_id = j.at("config_id").get<std::string>();
    model.normalizer.mean = j.at("normalizer").at("mean").get<std::vector<double>>();
    model.normalizer.sd = j.at("normalizer").at("sd").get<std::vector<double>>();
    for (const auto& row : j.at("exemplars")) {
      const auto values = row.get<std::vector<double>>();
      if (values.size() != model.dim) {
        throw InputError("model exemplar row has wrong dimension");
      }
      model.exemplars.insert(model.exemplars.end(), values.begin(), values.end());
    }
    // The weight rows and biases are derived state; rebuild them with the
    // same arithmetic train() uses so the round trip is bit-exact.
    model.biases.assign(model.exemplar_class.size(), kernel_bias(model.spread));
    model.weights.reserve(model.exemplars.size());
    for (std::size_t q = 0; q < model.exemplar_class.size(); ++q) {
      features::FeatureVector v;
      v.values.assign(model.exemplars.begin() + static_cast<std::ptrdiff_t>(q * model.dim),
                      model.exemplars.begin() + static_cast<std::ptrdiff_t>((q + 1) * model.dim));
      const features::FeatureVector normalized = apply_normalizer(model.normalizer, v);
      model.weights.insert(model.weights.end(), normalized.values.begin(),
                           normalized.values.end());
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const PnnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot open \"" + path.string() + "\" for writing");
  }
  out << model_to_json(model).dump(2) << "\n";
  if (!out) {
    throw InputError("failed writing model to \"" + path.string() + "\"");
  }
}

PnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open model file \"" + path.string() + "\"");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("model file \"" + path.string() + "\" is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace eegdx::pnn
