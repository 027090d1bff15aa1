#include "eegdx/ensemble.hpp"

#include <algorithm>

namespace eegdx::ensemble {

std::string to_string(TiePolicy policy) {
  switch (policy) {
    case TiePolicy::FavorPositive:
      return "positive";
    case TiePolicy::FavorNegative:
      return "negative";
    case TiePolicy::LowestIndex:
      return "lowest";
  }
  return "positive";
}

TiePolicy parse_tie_policy(const std::string& text) {
  if (text == "positive") {
    return TiePolicy::FavorPositive;
  }
  if (text == "negative") {
    return TiePolicy::FavorNegative;
  }
  if (text == "lowest") {
    return TiePolicy::LowestIndex;
  }
  throw ConfigError("unknown tie policy \"" + text + "\" (expected positive, negative, or lowest)");
}

void ChannelEnsemble::validate() const {
  if (members.empty()) {
    throw InputError("ensemble has no members");
  }
  const auto& first = members.begin()->second;
  for (const auto& [channel, model] : members) {
    model.validate();
    if (model.class_names != first.class_names) {
      throw InputError("ensemble member \"" + channel + "\" has a different class set");
    }
    if (model.config_id != first.config_id) {
      throw InputError("ensemble member \"" + channel + "\" has a different extraction config");
    }
  }
  if (tie_policy != TiePolicy::LowestIndex) {
    if (std::find(first.class_names.begin(), first.class_names.end(), positive_class) ==
        first.class_names.end()) {
      throw InputError("positive class \"" + positive_class + "\" is not among the model classes");
    }
  }
}

std::string resolve_tally(const std::map<std::string, int>& tally,
                          const std::string& positive_class, TiePolicy policy) {
  int best = -1;
  for (const auto& [name, count] : tally) {
    best = std::max(best, count);
  }
  // Tied classes in sorted order (std::map iterates sorted).
  std::vector<std::string> tied;
  for (const auto& [name, count] : tally) {
    if (count == best) {
      tied.push_back(name);
    }
  }
  if (tied.size() == 1) {
    return tied[0];
  }
  switch (policy) {
    case TiePolicy::FavorPositive:
      if (std::find(tied.begin(), tied.end(), positive_class) != tied.end()) {
        return positive_class;
      }
      return tied[0];
    case TiePolicy::FavorNegative:
      for (const auto& name : tied) {
        if (name != positive_class) {
          return name;
        }
      }
      return tied[0];
    case TiePolicy::LowestIndex:
      return tied[0];
  }
  return tied[0];
}

VoteResult vote(const ChannelEnsemble& ensemble,
                const std::map<std::string, features::FeatureVector>& frame) {
  ensemble.validate();
  for (const auto& [channel, vector] : frame) {
    if (ensemble.members.find(channel) == ensemble.members.end()) {
      throw InputError("frame contains channel \"" + channel + "\" with no ensemble member");
    }
  }
  VoteResult result;
  for (const auto& name : ensemble.members.begin()->second.class_names) {
    result.tally[name] = 0;
  }
  for (const auto& [channel, model] : ensemble.members) {
    const auto it = frame.find(channel);
    if (it == frame.end()) {
      throw InputError("frame is missing channel \"" + channel + "\"");
    }
    const pnn::ClassifyResult vote = pnn::classify(model, it->second);
    result.per_channel[channel] = vote.label;
    ++result.tally[vote.label];
  }
  result.decision = resolve_tally(result.tally, ensemble.positive_class, ensemble.tie_policy);
  return result;
}

nlohmann::json ensemble_to_json(const ChannelEnsemble& ensemble) {
  ensemble.validate();
  nlohmann::json j;
  j["format"] = "eegdx-ensemble";
  j["format_version"] = 1;
  j["positive_class"] = ensemble.positive_class;
  j["tie_policy"] = to_string(ensemble.tie_policy);
  nlohmann::json members = nlohmann::json::object();
  for (const auto& [channel, model] : ensemble.members) {
    members[channel] = pnn::model_to_json(model);
  }
  j["members"] = std::move(members);
  return j;
}

ChannelEnsemble ensemble_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "eegdx-ensemble") {
      throw InputError("not an ensemble document");
    }
    if (j.at("format_version").get<int>() != 1) {
      throw InputError("unsupported ensemble format version");
    }
    ChannelEnsemble ensemble;
    ensemble.positive_class = j.at("positive_class").get<std::string>();
    ensemble.tie_policy = parse_tie_policy(j.at("tie_policy").get<std::string>());
    for (const auto& [channel, model] : j.at("members").items()) {
      ensemble.members.emplace(channel, pnn::model_from_json(model));
    }
    ensemble.validate();
    return ensemble;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed ensemble document: ") + e.what());
  }
}

}  // namespace eegdx::ensemble
