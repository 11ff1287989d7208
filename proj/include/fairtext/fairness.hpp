#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fairtext/model.hpp"

namespace fairtext {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct Zone {
  double lo = 0.4, hi = 0.6;
};

struct ParityOptions {
  double threshold = 0.5;
  Zone zone;
  std::size_t min_group_size = 10;
  double upper_flag = 1.25;
  double lower_flag = 0.85;
};

// Predicted positive iff probability >= threshold.
ConfusionCounts confusion(std::span<const PredictionRecord> records, double threshold = 0.5);
std::map<std::string, ConfusionCounts> confusion_by(std::span<const PredictionRecord> records,
                                                    const std::string& attribute, double threshold = 0.5);

std::optional<double> fpr(const ConfusionCounts& c);
std::optional<double> fnr(const ConfusionCounts& c);
std::optional<double> ber(const ConfusionCounts& c);
double ber(double fpr, double fnr);

double uncertainty_pct(std::span<const PredictionRecord> records, Zone zone = {});

struct GroupMetrics {
  std::string value;
  std::size_t n = 0;
  ConfusionCounts counts;
  double accuracy = 0;
  double unc_pct = 0;
  std::optional<double> fpr, fnr, ber;
  bool low_confidence = false;
};

GroupMetrics group_metrics(std::string value, std::span<const PredictionRecord> records, const ParityOptions& options = {});

enum class RatioFlag { Acceptable, BiasTowardPrivileged, FavorsNonPrivileged, Undefined };
std::string_view to_string(RatioFlag f);

struct RatioVerdict {
  std::optional<double> ratio;
  RatioFlag flag = RatioFlag::Undefined;
};

// Boundaries 1.25 and 0.85 themselves count as acceptable.
RatioFlag classify_ratio(double ratio, double upper = 1.25, double lower = 0.85);
RatioVerdict ber_ratio(std::optional<double> non_privileged_ber, std::optional<double> privileged_ber,
                       double upper = 1.25, double lower = 0.85);

struct ParityReport {
  std::string attribute;
  std::string privileged;
  int bin = 0;
  std::vector<GroupMetrics> groups;  // privileged first, then by value
  GroupMetrics non_privileged;       // pooled over every other value
  RatioVerdict ratio;
  std::optional<double> fnr_gap;     // non-privileged minus privileged
  double accuracy_gap = 0;
  double unc_gap = 0;
  bool low_confidence = false;
};

ParityReport parity_report(std::span<const PredictionRecord> records, const std::string& attribute,
                           const std::string& privileged, const ParityOptions& options = {});

struct GapSummary {
  std::size_t reports = 0;
  std::size_t fnr_defined = 0;
  double mean_fnr_gap = 0;
  double mean_accuracy_gap = 0;
  double mean_unc_gap = 0;
};

// Unweighted means over reports; undefined FNR gaps are left out of that mean.
GapSummary aggregate_gaps(std::span<const ParityReport> reports);

void write_report_jsonl(std::ostream& out, std::span<const ParityReport> reports);
std::string format_report_table(std::span<const ParityReport> reports);

}  // namespace fairtext
