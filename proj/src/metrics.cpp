#include "hitl/metrics.hpp"

#include "hitl/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hitl::metrics {

using pipeline::PipelineState;

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", round2(v));
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string object_from_row(const std::string& label) {
  for (std::string_view o : kObjects) {
    if (row_label(o) == label) return std::string(o);
  }
  return label;
}

double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0);
}

std::vector<std::string> standard_columns() {
  const auto& all = column_order();
  return {all.begin(), all.begin() + 5};
}

}  // namespace

std::string_view site_name(Site site) {
  switch (site) {
    case Site::NotApplicable: return "n/a";
    case Site::Forearm: return "forearm";
    case Site::Ear: return "ear";
  }
  return "?";
}

Site parse_site(std::string_view name) {
  if (name == "forearm") return Site::Forearm;
  if (name == "ear") return Site::Ear;
  if (name == "n/a" || name.empty()) return Site::NotApplicable;
  throw std::invalid_argument("unknown electrode site '" + std::string(name) + "'");
}

RecordResult record(const Timeline& timeline) {
  RecordResult out;
  std::optional<PipelineState> state;
  double since = 0.0;
  double user = 0.0;
  double robot = 0.0;
  bool complete = false;
  bool ended = false;
  std::optional<double> last_t;

  auto flush = [&](double t) {
    if (!state) return;
    const double d = t - since;
    switch (*state) {
      case PipelineState::ObjectSelection:
      case PipelineState::GraspSelection:
      case PipelineState::PausedExecution: user += d; break;
      case PipelineState::GraspExecution: robot += d; break;
      case PipelineState::ObjectRecognition: break;
    }
    since = t;
  };

  for (const TimelineEvent& ev : timeline.events) {
    if (last_t && ev.t < *last_t) throw InputError("timeline events go back in time");
    last_t = ev.t;
    if (ended) break;
    flush(ev.t);
    switch (ev.kind) {
      case TimelineEvent::Kind::StateEntered:
        state = ev.state;
        since = ev.t;
        break;
      case TimelineEvent::Kind::TrialEnded:
        out.trials.push_back({timeline.device, ev.object, user, robot, ev.success, timeline.site});
        user = robot = 0.0;
        break;
      case TimelineEvent::Kind::SessionEnd:
        complete = ev.complete;
        ended = true;
        break;
    }
  }
  if (!complete) ++out.incomplete;
  return out;
}

const std::vector<std::string>& column_order() {
  static const std::vector<std::string> order{"Mouse",           "Alexa", "Switch", "sEMG (forearm)",
                                              "sEMG (behind ear)", "sEMG",  "Direct"};
  return order;
}

std::string column_label(std::string_view device, Site site) {
  if (device == "mouse") return "Mouse";
  if (device == "voice") return "Alexa";
  if (device == "switch") return "Switch";
  if (device == "direct") return "Direct";
  if (device == "semg") {
    if (site == Site::Forearm) return "sEMG (forearm)";
    if (site == Site::Ear) return "sEMG (behind ear)";
    return "sEMG";
  }
  throw std::invalid_argument("unknown device '" + std::string(device) + "'");
}

std::string row_label(std::string_view object) {
  if (object == "block1") return "Block 1";
  if (object == "block2") return "Block 2";
  if (object == "block3") return "Block 3";
  if (object == "ycb") return "YCB Object";
  return std::string(object);
}

std::string timing_row_label(std::string_view object) {
  if (object == "ycb") return "YCB object";
  std::string s = row_label(object);
  if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

const Cell* MetricsReport::cell(const std::string& column, const std::string& object) const {
  auto c = cells.find(column);
  if (c == cells.end()) return nullptr;
  auto o = c->second.find(object);
  if (o == c->second.end() || o->second.trials == 0) return nullptr;
  return &o->second;
}

std::optional<double> MetricsReport::column_average(const std::string& column) const {
  std::vector<double> v;
  for (const std::string& row : rows) {
    if (const Cell* c = cell(column, row)) v.push_back(c->percentage());
  }
  if (v.empty()) return std::nullopt;
  return unweighted_mean(v);
}

std::optional<double> MetricsReport::row_average(const std::string& object) const {
  std::vector<double> v;
  for (const std::string& col : columns) {
    if (const Cell* c = cell(col, object)) v.push_back(c->percentage());
  }
  if (v.empty()) return std::nullopt;
  return unweighted_mean(v);
}

double MetricsReport::overall_average() const {
  std::vector<double> v;
  for (const std::string& row : rows) {
    if (auto a = row_average(row)) v.push_back(*a);
  }
  return v.empty() ? 0.0 : unweighted_mean(v);
}

double unweighted_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of nothing");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

MetricsReport summarize(std::span<const TrialRecord> records, int incomplete) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one trial");

  struct Acc {
    int trials = 0;
    int successes = 0;
    std::vector<double> user;
    std::vector<double> robot;
  };
  std::map<std::string, std::map<std::string, Acc>> acc;
  for (const TrialRecord& r : records) {
    Acc& a = acc[column_label(r.device, r.site)][r.object];
    ++a.trials;
    a.successes += r.success;
    a.user.push_back(r.user_time);
    a.robot.push_back(r.robot_time);
  }

  MetricsReport report;
  report.incomplete = incomplete;
  for (const std::string& col : column_order()) {
    if (acc.count(col)) report.columns.push_back(col);
  }
  for (std::string_view obj : kObjects) {
    for (const auto& [col, by_obj] : acc) {
      if (by_obj.count(std::string(obj))) {
        report.rows.emplace_back(obj);
        break;
      }
    }
  }
  for (auto& [col, by_obj] : acc) {
    for (auto& [obj, a] : by_obj) {
      if (std::find(report.rows.begin(), report.rows.end(), obj) == report.rows.end()) {
        throw std::invalid_argument("unknown object label '" + obj + "'");
      }
      report.cells[col][obj] = Cell{a.trials, a.successes, sorted_sum(a.user), sorted_sum(a.robot)};
    }
  }
  return report;
}

// ---- export -------------------------------------------------------------

namespace {

std::vector<std::string> shown_columns(const MetricsReport& r, std::vector<std::string>& omitted) {
  std::vector<std::string> shown;
  const auto standard = standard_columns();
  for (const std::string& col : column_order()) {
    const bool present = std::find(r.columns.begin(), r.columns.end(), col) != r.columns.end();
    if (present) {
      shown.push_back(col);
    } else if (std::find(standard.begin(), standard.end(), col) != standard.end()) {
      omitted.push_back(col);
    }
  }
  return shown;
}

std::string footnote(const std::vector<std::string>& omitted) {
  if (omitted.empty()) return {};
  std::string s = "* omitted, no trials: ";
  for (std::size_t i = 0; i < omitted.size(); ++i) {
    if (i) s += ", ";
    s += omitted[i];
  }
  return s + "\n";
}

std::string aligned(const std::vector<std::vector<std::string>>& table) {
  std::vector<std::size_t> width;
  for (const auto& row : table) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += " | ";
      line += row[i];
      if (i + 1 < row.size()) line.append(width[i] - row[i].size(), ' ');
    }
    out += line + "\n";
  }
  return out;
}

std::string joined(const std::vector<std::vector<std::string>>& table) {
  std::string out;
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ", ";
      out += row[i];
    }
    out += "\n";
  }
  return out;
}

// Success table rows; `csv` cells carry counts so they parse back exactly.
std::vector<std::vector<std::string>> success_table(const MetricsReport& r,
                                                    const std::vector<std::string>& cols, bool csv) {
  std::vector<std::vector<std::string>> t;
  std::vector<std::string> head{"Activity"};
  head.insert(head.end(), cols.begin(), cols.end());
  head.push_back("Average");
  t.push_back(head);
  for (const std::string& obj : r.rows) {
    std::vector<std::string> row{row_label(obj)};
    for (const std::string& col : cols) {
      const Cell* c = r.cell(col, obj);
      if (!c) {
        row.push_back(csv ? "" : "-");
      } else {
        std::string s = fixed2(c->percentage()) + "%";
        if (csv) s += " (" + std::to_string(c->successes) + "/" + std::to_string(c->trials) + ")";
        row.push_back(s);
      }
    }
    auto avg = r.row_average(obj);
    row.push_back(avg ? fixed2(*avg) + "%" : "-");
    t.push_back(row);
  }
  std::vector<std::string> avg_row{"Average"};
  for (const std::string& col : cols) {
    auto a = r.column_average(col);
    avg_row.push_back(a ? fixed2(*a) + "%" : "-");
  }
  avg_row.push_back(fixed2(r.overall_average()) + "%");
  t.push_back(avg_row);
  if (!csv) {
    std::vector<std::string> trials{"Trials"};
    for (const std::string& col : cols) {
      int n = 0;
      for (const std::string& obj : r.rows) {
        if (const Cell* c = r.cell(col, obj)) n = std::max(n, c->trials);
      }
      trials.push_back(std::to_string(n));
    }
    trials.push_back("");
    t.push_back(trials);
  }
  return t;
}

std::vector<std::vector<std::string>> timing_table(const MetricsReport& r,
                                                   const std::vector<std::string>& cols, bool csv) {
  std::vector<std::vector<std::string>> t;
  std::vector<std::string> head{"Activity"};
  for (const std::string& col : cols) head.push_back(csv ? col : col + " (s)");
  t.push_back(head);
  for (const std::string& obj : r.rows) {
    std::vector<std::string> user{"user " + timing_row_label(obj)};
    std::vector<std::string> robot{"robot " + timing_row_label(obj)};
    for (const std::string& col : cols) {
      const Cell* c = r.cell(col, obj);
      if (!c) {
        user.push_back(csv ? "" : "-");
        robot.push_back(csv ? "" : "-");
      } else {
        user.push_back(csv ? shortest(c->mean_user_time()) : fixed2(c->mean_user_time()));
        robot.push_back(csv ? shortest(c->mean_robot_time()) : fixed2(c->mean_robot_time()));
      }
    }
    t.push_back(user);
    t.push_back(robot);
  }
  return t;
}

}  // namespace

std::string export_report(const MetricsReport& report, Format format) {
  std::vector<std::string> omitted;
  const std::vector<std::string> cols = shown_columns(report, omitted);

  switch (format) {
    case Format::AlignedTable: {
      std::string out = "Success rate per input device\n";
      out += aligned(success_table(report, cols, false));
      out += "\nAverage time per input device\n";
      out += aligned(timing_table(report, cols, false));
      if (report.incomplete) out += "\nIncomplete trials excluded: " + std::to_string(report.incomplete) + "\n";
      out += footnote(omitted);
      return out;
    }
    case Format::Csv: {
      std::string out = joined(success_table(report, cols, true));
      out += "\n";
      out += joined(timing_table(report, cols, true));
      return out;
    }
    case Format::Structured: {
      nlohmann::json cells = nlohmann::json::array();
      for (const std::string& col : report.columns) {
        for (const std::string& obj : report.rows) {
          if (const Cell* c = report.cell(col, obj)) {
            cells.push_back({{"column", col},
                             {"object", obj},
                             {"trials", c->trials},
                             {"successes", c->successes},
                             {"user_time_sum", c->user_time_sum},
                             {"robot_time_sum", c->robot_time_sum}});
          }
        }
      }
      nlohmann::json col_avg = nlohmann::json::object();
      for (const std::string& col : report.columns) {
        if (auto a = report.column_average(col)) col_avg[col] = *a;
      }
      nlohmann::json row_avg = nlohmann::json::object();
      for (const std::string& obj : report.rows) {
        if (auto a = report.row_average(obj)) row_avg[obj] = *a;
      }
      nlohmann::json j{{"columns", report.columns},
                       {"rows", report.rows},
                       {"cells", std::move(cells)},
                       {"column_averages", std::move(col_avg)},
                       {"row_averages", std::move(row_avg)},
                       {"overall_average", report.overall_average()},
                       {"incomplete", report.incomplete}};
      return j.dump(2) + "\n";
    }
  }
  return {};
}

MetricsReport parse_structured(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InputError("report is not valid JSON");
  MetricsReport r;
  try {
    r.columns = j.at("columns").get<std::vector<std::string>>();
    r.rows = j.at("rows").get<std::vector<std::string>>();
    r.incomplete = j.value("incomplete", 0);
    for (const auto& c : j.at("cells")) {
      r.cells[c.at("column").get<std::string>()][c.at("object").get<std::string>()] =
          Cell{c.at("trials").get<int>(), c.at("successes").get<int>(), c.at("user_time_sum").get<double>(),
               c.at("robot_time_sum").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("report: ") + e.what());
  }
  return r;
}

std::map<std::string, std::map<std::string, CsvCell>> parse_csv(const std::string& text) {
  std::map<std::string, std::map<std::string, CsvCell>> out;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  int section = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      header.clear();
      ++section;
      continue;
    }
    std::vector<std::string> f = split_commas(line);
    if (header.empty()) {
      header = f;
      continue;
    }
    if (f.empty() || f[0] == "Average") continue;
    for (std::size_t i = 1; i < f.size() && i < header.size(); ++i) {
      if (f[i].empty() || header[i] == "Average") continue;
      if (section == 0) {
        const std::string obj = object_from_row(f[0]);
        int s = 0;
        int n = 0;
        const auto open = f[i].find('(');
        if (open == std::string::npos || std::sscanf(f[i].c_str() + open, "(%d/%d)", &s, &n) != 2) {
          throw InputError("csv: malformed success cell '" + f[i] + "'");
        }
        out[header[i]][obj].successes = s;
        out[header[i]][obj].trials = n;
      } else {
        const bool is_user = f[0].rfind("user ", 0) == 0;
        const std::string label = f[0].substr(is_user ? 5 : 6);
        std::string obj = label;
        for (std::string_view o : kObjects) {
          if (timing_row_label(o) == label) obj = std::string(o);
        }
        double v = 0.0;
        std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
        (is_user ? out[header[i]][obj].mean_user_time : out[header[i]][obj].mean_robot_time) = v;
      }
    }
  }
  return out;
}

}  // namespace hitl::metrics
