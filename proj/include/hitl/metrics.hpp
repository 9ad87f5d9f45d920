#pragma once

// Per-trial timing and outcome records and the per-device summary tables
// (success percentages and mean user/robot times per object).
//
// Timing attribution within one pick-and-place attempt:
//   user_time  = time in ObjectSelection + GraspSelection + PausedExecution
//   robot_time = time in GraspExecution
// ObjectRecognition counts towards neither.
//
// Aggregation: a cell's percentage is 100 * successes / trials from integer
// counts. Column (device) averages are unweighted means over the object rows
// present, row averages are unweighted means over the device columns present,
// and the overall figure is the unweighted mean of the row averages.

#include "hitl/pipeline.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hitl::metrics {

enum class Site { NotApplicable, Forearm, Ear };

std::string_view site_name(Site site);  // "n/a", "forearm", "ear"
Site parse_site(std::string_view name);

// Object labels in table order.
inline constexpr std::string_view kObjects[] = {"block1", "block2", "block3", "ycb"};

struct TrialRecord {
  std::string device;  // mouse, voice, switch, semg, direct
  std::string object;  // block1, block2, block3, ycb
  double user_time = 0.0;
  double robot_time = 0.0;
  bool success = false;
  Site site = Site::NotApplicable;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

// The part of a session trace that timing attribution needs.
struct TimelineEvent {
  enum class Kind { StateEntered, TrialEnded, SessionEnd };
  double t = 0.0;
  Kind kind = Kind::StateEntered;
  pipeline::PipelineState state = pipeline::PipelineState::ObjectRecognition;  // StateEntered
  std::string object;                                                          // TrialEnded
  bool success = false;                                                        // TrialEnded
  bool complete = false;                                                       // SessionEnd
};

struct Timeline {
  std::string device;
  Site site = Site::NotApplicable;
  std::vector<TimelineEvent> events;  // time-ordered
};

struct RecordResult {
  std::vector<TrialRecord> trials;
  int incomplete = 0;  // attempts with no terminal outcome, excluded from trials
};

// One record per attempt that reached a terminal outcome. An attempt still
// open when the trace ends counts as incomplete unless the session marked
// itself complete. Throws InputError if events go back in time.
RecordResult record(const Timeline& timeline);

// Column heading for a device/site pair: Mouse, Alexa, Switch,
// sEMG (forearm), sEMG (behind ear), sEMG, Direct.
std::string column_label(std::string_view device, Site site);
// Canonical column order; the first five are the standard table columns.
const std::vector<std::string>& column_order();
std::string row_label(std::string_view object);         // "Block 1" ... "YCB Object"
std::string timing_row_label(std::string_view object);  // "block 1" ... "YCB object"

struct Cell {
  int trials = 0;
  int successes = 0;
  double user_time_sum = 0.0;
  double robot_time_sum = 0.0;

  double percentage() const { return 100.0 * successes / trials; }
  double mean_user_time() const { return user_time_sum / trials; }
  double mean_robot_time() const { return robot_time_sum / trials; }
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct MetricsReport {
  std::vector<std::string> columns;  // present columns, canonical order
  std::vector<std::string> rows;     // present objects, table order
  std::map<std::string, std::map<std::string, Cell>> cells;  // column -> object -> cell
  int incomplete = 0;

  // nullopt when the cell has no trials (reported as absent, never 0%).
  const Cell* cell(const std::string& column, const std::string& object) const;
  std::optional<double> column_average(const std::string& column) const;
  std::optional<double> row_average(const std::string& object) const;
  double overall_average() const;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Throws std::invalid_argument on an empty record list. Independent of
// record order: per-cell time sums are taken over sorted values.
MetricsReport summarize(std::span<const TrialRecord> records, int incomplete = 0);

// The averaging rule on its own: unweighted mean.
double unweighted_mean(std::span<const double> values);
double round2(double value);

enum class Format { AlignedTable, Csv, Structured };

std::string export_report(const MetricsReport& report, Format format);

// Inverse of the structured export.
MetricsReport parse_structured(const std::string& text);

// Cell aggregates recovered from the comma-separated export.
struct CsvCell {
  int trials = 0;
  int successes = 0;
  double mean_user_time = 0.0;
  double mean_robot_time = 0.0;
  friend bool operator==(const CsvCell&, const CsvCell&) = default;
};
std::map<std::string, std::map<std::string, CsvCell>> parse_csv(const std::string& text);

}  // namespace hitl::metrics
