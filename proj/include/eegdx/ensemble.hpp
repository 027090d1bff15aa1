#pragma once

#include <map>
#include <string>

#include "eegdx/pnn.hpp"

#include "json.hpp"

namespace eegdx::ensemble {

// How a tied vote is resolved. FavorPositive hands ties to the positive
// class (screening bias: prefer a false alarm over a miss), FavorNegative
// does the opposite, LowestIndex picks the first tied class in sorted order.
enum class TiePolicy { FavorPositive, FavorNegative, LowestIndex };

std::string to_string(TiePolicy policy);
TiePolicy parse_tie_policy(const std::string& text);  // "positive" | "negative" | "lowest"

// One classifier per channel. All members must share the same class set and
// the same extraction fingerprint; the decision depends only on the tally,
// never on channel order.
struct ChannelEnsemble {
  std::map<std::string, pnn::PnnModel> members;
  std::string positive_class = "Epileptic";
  TiePolicy tie_policy = TiePolicy::FavorPositive;

  void validate() const;
};

struct VoteResult {
  std::string decision;
  std::map<std::string, int> tally;               // every class, zero counts included
  std::map<std::string, std::string> per_channel;  // channel -> voted class
};

// Majority vote over one frame (channel -> feature vector). The frame's
// channel set must match the ensemble's exactly.
VoteResult vote(const ChannelEnsemble& ensemble,
                const std::map<std::string, features::FeatureVector>& frame);

// Resolves a finished tally to a decision under the given policy; exposed
// separately so the evaluation harness votes with the same rule.
std::string resolve_tally(const std::map<std::string, int>& tally,
                          const std::string& positive_class, TiePolicy policy);

nlohmann::json ensemble_to_json(const ChannelEnsemble& ensemble);
ChannelEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace eegdx::ensemble
