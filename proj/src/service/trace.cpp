#include "hitl/errors.hpp"
#include "hitl/service/session.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

namespace hitl::service {

using nlohmann::json;

json to_json(const signal::CalibrationConfig& cfg) {
  return {{"gain", cfg.gain},
          {"low_threshold", cfg.low_threshold},
          {"high_threshold", cfg.high_threshold},
          {"rms_window", cfg.rms_window},
          {"dwell", cfg.dwell},
          {"refractory", cfg.refractory},
          {"hysteresis_ratio", cfg.hysteresis_ratio}};
}

signal::CalibrationConfig calibration_from_json(const json& j) {
  signal::CalibrationConfig cfg;
  cfg.gain = j.value("gain", cfg.gain);
  cfg.low_threshold = j.value("low_threshold", cfg.low_threshold);
  cfg.high_threshold = j.value("high_threshold", cfg.high_threshold);
  cfg.rms_window = j.value("rms_window", cfg.rms_window);
  cfg.dwell = j.value("dwell", cfg.dwell);
  cfg.refractory = j.value("refractory", cfg.refractory);
  cfg.hysteresis_ratio = j.value("hysteresis_ratio", cfg.hysteresis_ratio);
  cfg.validate();
  return cfg;
}

json to_json(const SessionConfig& cfg) {
  return {{"device", device_name(cfg.device)},
          {"site", metrics::site_name(cfg.site)},
          {"scene", sim::to_json(cfg.scene)},
          {"sim", sim::to_json(cfg.sim)},
          {"emg", to_json(cfg.emg)}};
}

SessionConfig session_config_from_json(const json& j) {
  SessionConfig cfg;
  try {
    cfg.device = parse_device(j.at("device").get<std::string>());
    cfg.site = metrics::parse_site(j.at("site").get<std::string>());
    cfg.scene = sim::scene_from_json(j.at("scene"));
    cfg.sim = sim::sim_config_from_json(j.at("sim"));
    cfg.emg = calibration_from_json(j.at("emg"));
  } catch (const json::exception& e) {
    throw InputError(std::string("bad session config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("bad session config: ") + e.what());
  }
  return cfg;
}

std::string config_hash(const SessionConfig& cfg) {
  return jsonl::hex64(jsonl::fnv1a(jsonl::dump(to_json(cfg))));
}

void SessionTrace::append(const json& record) { lines_.push_back(jsonl::dump(record)); }

std::string SessionTrace::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& line : lines_) {
    h = jsonl::fnv1a(line, h);
    h = jsonl::fnv1a("\n", h);
  }
  return jsonl::hex64(h);
}

void SessionTrace::write(std::ostream& out) const {
  for (const auto& line : lines_) out << line << '\n';
}

void SessionTrace::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
}

namespace {

double record_time(const jsonl::Line& line) {
  const auto it = line.value.find("t");
  if (it == line.value.end() || !it->is_number()) {
    throw ReplayError(line.number, "record has no numeric 't'");
  }
  return it->get<double>();
}

std::string record_kind(const jsonl::Line& line) {
  const auto it = line.value.find("kind");
  if (it == line.value.end() || !it->is_string()) {
    throw ReplayError(line.number, "record has no 'kind'");
  }
  return it->get<std::string>();
}

const json& header_of(const std::vector<jsonl::Line>& lines) {
  if (lines.empty()) throw ReplayError(1, "empty trace");
  const auto& v = lines.front().value;
  if (!v.is_object() || v.value("kind", "") != "header") {
    throw ReplayError(lines.front().number, "first record is not a header");
  }
  return v;
}

}  // namespace

ReplayResult replay(const std::vector<jsonl::Line>& lines) {
  const json& header = header_of(lines);
  const std::size_t header_line = lines.front().number;
  if (header.value("version", 0) != kTraceVersion) {
    throw ReplayError(header_line, "unsupported trace version");
  }
  SessionConfig cfg;
  try {
    cfg = session_config_from_json(header.at("config"));
    cfg.scene_file = header.value("scene_file", "");
  } catch (const std::exception& e) {
    throw ReplayError(header_line, e.what());
  }
  if (header.value("config_hash", "") != config_hash(cfg)) {
    throw ReplayError(header_line, "config hash does not match the configuration");
  }

  Session session(cfg);
  session.start();
  double last_t = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const double t = record_time(line);
    if (t < last_t) throw ReplayError(line.number, "timestamp goes backwards");
    last_t = t;
    const std::string kind = record_kind(line);
    try {
      if (kind == "input") {
        std::optional<double> client_t;
        if (line.value.contains("client_t")) client_t = line.value.at("client_t").get<double>();
        session.input(t, device_input_from_json(line.value.at("input")), client_t);
      } else if (kind == "end") {
        session.finish(t, line.value.at("complete").get<bool>());
      }
    } catch (const ReplayError&) {
      throw;
    } catch (const std::exception& e) {
      throw ReplayError(line.number, e.what());
    }
    if (session.finished() && i + 1 < lines.size()) {
      throw ReplayError(lines[i + 1].number, "records after session end");
    }
  }

  const auto& regenerated = session.trace().lines();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i >= regenerated.size()) throw ReplayError(lines[i].number, "trace has extra records");
    if (regenerated[i] != jsonl::dump(lines[i].value)) {
      throw ReplayError(lines[i].number, "diverges; replay produced " + regenerated[i]);
    }
  }
  if (regenerated.size() > lines.size()) {
    throw ReplayError(lines.back().number + 1, "trace is missing records: " + regenerated[lines.size()]);
  }
  return {session.trace(), session.pipeline().context().trials, session.complete()};
}

ReplayResult replay_file(const std::string& path) { return replay(jsonl::read_file(path)); }

metrics::Timeline timeline_from_trace(const std::vector<jsonl::Line>& lines) {
  const json& header = header_of(lines);
  metrics::Timeline timeline;
  try {
    const auto& config = header.at("config");
    timeline.device = std::string(device_name(parse_device(config.at("device").get<std::string>())));
    timeline.site = metrics::parse_site(config.at("site").get<std::string>());
  } catch (const std::exception& e) {
    throw InputError("line " + std::to_string(lines.front().number) + ": " + e.what());
  }
  std::string current_state;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const std::string kind = jsonl::string_field(line, "kind");
    const double t = jsonl::number_field(line, "t");
    metrics::TimelineEvent ev;
    ev.t = t;
    if (kind == "snapshot") {
      const std::string state = line.value.at("snapshot").at("state").get<std::string>();
      if (state == current_state) continue;
      current_state = state;
      bool known = false;
      for (auto s : pipeline::kAllStates) {
        if (pipeline::state_name(s) == state) {
          ev.state = s;
          known = true;
        }
      }
      if (!known) throw InputError("line " + std::to_string(line.number) + ": unknown state " + state);
      ev.kind = metrics::TimelineEvent::Kind::StateEntered;
    } else if (kind == "outcome") {
      ev.kind = metrics::TimelineEvent::Kind::TrialEnded;
      ev.object = line.value.at("outcome").at("object").get<std::string>();
      ev.success = line.value.at("outcome").at("success").get<bool>();
    } else if (kind == "end") {
      ev.kind = metrics::TimelineEvent::Kind::SessionEnd;
      ev.complete = line.value.at("complete").get<bool>();
    } else {
      continue;
    }
    timeline.events.push_back(std::move(ev));
  }
  return timeline;
}

}  // namespace hitl::service
