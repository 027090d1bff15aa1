#include "eegdx/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "eegdx/util.hpp"

namespace eegdx::report {
namespace {

using nlohmann::json;

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string band_label(const features::SpectralBandSpec& band) {
  return util::format_double(band.f_low_hz) + ":" + util::format_double(band.f_up_hz) +
         ":" + util::format_double(band.f_step_hz);
}

json counts_to_json(const eval::ConfusionCounts& counts) {
  return json{{"tp", counts.tp}, {"fp", counts.fp}, {"tn", counts.tn}, {"fn", counts.fn}};
}

std::string pad(const std::string& text, std::size_t width) {
  std::string out = text;
  while (out.size() < width) out.push_back(' ');
  return out;
}

std::size_t selection_dim(const features::ExtractionConfig& config,
                          const features::FeatureSelection& selection) {
  std::size_t dim = 0;
  if (selection.include_rir) dim += config.band.bin_count();
  if (selection.include_fds) dim += 2;
  if (selection.include_hjorth) dim += 2;
  return dim;
}

}  // namespace

json config_to_json(const features::ExtractionConfig& config) {
  return json{
      {"segment_length", config.segment_length},
      {"filter", json{{"cutoff_hz", config.filter.cutoff_hz},
                      {"order", config.filter.order},
                      {"kind", "low-pass"}}},
      {"band", json{{"f_low_hz", config.band.f_low_hz},
                    {"f_up_hz", config.band.f_up_hz},
                    {"f_step_hz", config.band.f_step_hz}}},
      {"k_max", config.k_max},
      {"fingerprint", config.fingerprint()},
  };
}

features::ExtractionConfig config_from_json(const json& j) {
  features::ExtractionConfig config;
  try {
    config.segment_length = j.at("segment_length").get<std::size_t>();
    const json& filter = j.at("filter");
    config.filter.cutoff_hz = filter.at("cutoff_hz").get<double>();
    config.filter.order = filter.at("order").get<int>();
    if (filter.contains("kind") && filter.at("kind").get<std::string>() != "low-pass") {
      throw InputError("unsupported filter kind: " +
                       filter.at("kind").get<std::string>());
    }
    const json& band = j.at("band");
    config.band.f_low_hz = band.at("f_low_hz").get<double>();
    config.band.f_up_hz = band.at("f_up_hz").get<double>();
    config.band.f_step_hz = band.at("f_step_hz").get<double>();
    config.k_max = j.at("k_max").get<int>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed extraction config: ") + e.what());
  }
  return config;
}

json report_to_json(const eval::EvalReport& report) {
  json per_channel = json::object();
  for (const auto& [channel, accuracy] : report.per_channel_accuracy) {
    per_channel[channel] = accuracy;
  }
  json sample_counts = json::object();
  for (const auto& [klass, count] : report.sample_counts) {
    sample_counts[klass] = count;
  }
  return json{
      {"format", "eegdx-report"},
      {"format_version", 1},
      {"config", config_to_json(report.config)},
      {"features", report.selection.id()},
      {"feature_dim", selection_dim(report.config, report.selection)},
      {"tie_policy", ensemble::to_string(report.tie_policy)},
      {"spread", report.spread},
      {"frame_count", report.frame_count},
      {"sample_counts", sample_counts},
      {"per_channel_accuracy", per_channel},
      {"voted", json{{"accuracy", report.voted_accuracy},
                     {"sensitivity", report.sensitivity},
                     {"specificity", report.specificity},
                     {"true_positive_rate", report.true_positive_rate},
                     {"false_positive_rate", report.false_positive_rate},
                     {"counts", counts_to_json(report.voted_counts)}}},
  };
}

std::string render_report_text(const eval::EvalReport& report) {
  std::ostringstream out;
  out << "configuration : " << report.config.fingerprint() << "\n";
  out << "features      : " << report.selection.id() << " (dim "
      << selection_dim(report.config, report.selection) << ")\n";
  out << "spread        : " << util::format_double(report.spread) << "\n";
  out << "tie policy    : " << ensemble::to_string(report.tie_policy) << "\n";
  out << "frames        : " << report.frame_count;
  if (!report.sample_counts.empty()) {
    out << "  (";
    bool first = true;
    for (const auto& [klass, count] : report.sample_counts) {
      if (!first) out << ", ";
      out << klass << " " << count;
      first = false;
    }
    out << ")";
  }
  out << "\n\n";

  std::size_t name_width = 7;
  for (const auto& [channel, _] : report.per_channel_accuracy) {
    name_width = std::max(name_width, channel.size());
  }
  out << "per-channel accuracy\n";
  for (const auto& [channel, accuracy] : report.per_channel_accuracy) {
    out << "  " << pad(channel, name_width + 2) << percent(accuracy) << "%\n";
  }
  out << "\n";
  out << "ensemble vote : accuracy " << percent(report.voted_accuracy)
      << "%  sensitivity " << percent(report.sensitivity) << "%  specificity "
      << percent(report.specificity) << "%\n";
  const auto& c = report.voted_counts;
  out << "confusion     : tp " << c.tp << "  fn " << c.fn << "  tn " << c.tn
      << "  fp " << c.fp << "\n";
  return out.str();
}

json study_to_json(const eval::FeatureStudyResult& study, double spread) {
  json selections = json::array();
  for (const auto& selection : study.selections) selections.push_back(selection.id());
  return json{
      {"format", "eegdx-feature-study"},
      {"format_version", 1},
      {"spread", spread},
      {"channels", study.channels},
      {"selections", selections},
      {"accuracy", study.accuracy},
      {"mean_accuracy", study.mean_accuracy},
      {"best_selection", study.selections.at(study.best_selection).id()},
  };
}

std::string render_study_table(const eval::FeatureStudyResult& study) {
  std::ostringstream out;
  out << "per-channel accuracy (%) by feature set\n";

  std::size_t name_width = 7;
  for (const auto& channel : study.channels) {
    name_width = std::max(name_width, channel.size());
  }
  std::vector<std::size_t> widths;
  std::vector<std::string> headers;
  for (std::size_t s = 0; s < study.selections.size(); ++s) {
    std::string header = study.selections[s].id();
    if (s == study.best_selection) header += "*";
    widths.push_back(std::max<std::size_t>(header.size(), 6));
    headers.push_back(std::move(header));
  }

  out << "  " << pad("channel", name_width + 2);
  for (std::size_t s = 0; s < headers.size(); ++s) {
    out << pad(headers[s], widths[s] + 2);
  }
  out << "\n";
  for (std::size_t c = 0; c < study.channels.size(); ++c) {
    out << "  " << pad(study.channels[c], name_width + 2);
    for (std::size_t s = 0; s < study.selections.size(); ++s) {
      out << pad(percent(study.accuracy[s][c]), widths[s] + 2);
    }
    out << "\n";
  }
  out << "  " << pad("mean", name_width + 2);
  for (std::size_t s = 0; s < study.selections.size(); ++s) {
    out << pad(percent(study.mean_accuracy[s]), widths[s] + 2);
  }
  out << "\n";
  out << "best feature set: " << study.selections.at(study.best_selection).id()
      << " (mean " << percent(study.mean_accuracy.at(study.best_selection))
      << "%)\n";
  return out.str();
}

json sweep_to_json(const eval::SweepResult& sweep, double spread,
                   ensemble::TiePolicy tie_policy,
                   const features::FeatureSelection& selection) {
  json entries = json::array();
  for (const auto& entry : sweep.entries) {
    json item{{"config", config_to_json(entry.config)}};
    if (entry.report) {
      item["report"] = report_to_json(*entry.report);
    } else {
      item["error"] = entry.error;
    }
    entries.push_back(std::move(item));
  }
  json best = nullptr;
  if (sweep.best_index) {
    best = sweep.entries.at(*sweep.best_index).config.fingerprint();
  }
  return json{
      {"format", "eegdx-sweep"},
      {"format_version", 1},
      {"spread", spread},
      {"tie_policy", ensemble::to_string(tie_policy)},
      {"features", selection.id()},
      {"entries", entries},
      {"best", best},
  };
}

std::string render_sweep_table(const eval::SweepResult& sweep) {
  // Axis values are collected from the entries themselves so the table shows
  // exactly what was swept; combinations that were not run render as "-".
  std::vector<std::pair<std::size_t, double>> rows;  // (segment length, cutoff)
  std::vector<features::SpectralBandSpec> bands;
  for (const auto& entry : sweep.entries) {
    std::pair<std::size_t, double> row{entry.config.segment_length,
                                       entry.config.filter.cutoff_hz};
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    bool seen = false;
    for (const auto& band : bands) {
      if (band.f_low_hz == entry.config.band.f_low_hz &&
          band.f_up_hz == entry.config.band.f_up_hz &&
          band.f_step_hz == entry.config.band.f_step_hz) {
        seen = true;
        break;
      }
    }
    if (!seen) bands.push_back(entry.config.band);
  }
  std::sort(rows.begin(), rows.end());
  std::sort(bands.begin(), bands.end(),
            [](const features::SpectralBandSpec& a, const features::SpectralBandSpec& b) {
              return std::tie(a.f_step_hz, a.f_up_hz, a.f_low_hz) <
                     std::tie(b.f_step_hz, b.f_up_hz, b.f_low_hz);
            });

  auto cell_for = [&](const std::pair<std::size_t, double>& row,
                      const features::SpectralBandSpec& band) -> std::string {
    for (const auto& entry : sweep.entries) {
      if (entry.config.segment_length != row.first ||
          entry.config.filter.cutoff_hz != row.second ||
          entry.config.band.f_low_hz != band.f_low_hz ||
          entry.config.band.f_up_hz != band.f_up_hz ||
          entry.config.band.f_step_hz != band.f_step_hz) {
        continue;
      }
      return entry.report ? percent(entry.report->voted_accuracy) : std::string("err");
    }
    return "-";
  };

  std::ostringstream out;
  out << "voted accuracy (%) by configuration\n";
  std::size_t row_width = 16;
  out << "  " << pad("segment/cutoff", row_width + 2);
  std::vector<std::size_t> widths;
  for (const auto& band : bands) {
    std::string header = "band " + band_label(band);
    widths.push_back(std::max<std::size_t>(header.size(), 6));
    out << pad(header, widths.back() + 2);
  }
  out << "\n";
  for (const auto& row : rows) {
    std::string label = std::to_string(row.first) + " @ " +
                        util::format_double(row.second) + " Hz";
    out << "  " << pad(label, row_width + 2);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      out << pad(cell_for(row, bands[b]), widths[b] + 2);
    }
    out << "\n";
  }

  out << "\nranking\n";
  std::size_t rank = 0;
  for (const auto& entry : sweep.entries) {
    if (!entry.report) continue;
    ++rank;
    out << "  " << rank << ") " << entry.config.fingerprint() << "  voted "
        << percent(entry.report->voted_accuracy) << "%\n";
  }
  for (const auto& entry : sweep.entries) {
    if (entry.report) continue;
    out << "  failed: " << entry.config.fingerprint() << "  (" << entry.error << ")\n";
  }
  return out.str();
}

}  // namespace eegdx::report
