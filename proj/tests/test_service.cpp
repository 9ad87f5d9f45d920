#include "hitl/errors.hpp"
#include "hitl/service/bench.hpp"
#include "hitl/service/scripted_user.hpp"
#include "hitl/service/server.hpp"
#include "hitl/service/session.hpp"

#include <doctest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace hitl;
using namespace hitl::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<jsonl::Line> as_lines(const SessionTrace& trace) {
  std::vector<jsonl::Line> out;
  for (std::size_t i = 0; i < trace.lines().size(); ++i) out.push_back({i + 1, json::parse(trace.lines()[i])});
  return out;
}

SessionConfig ideal_config(Device device, std::uint64_t seed = 1) {
  SessionConfig cfg;
  cfg.device = device;
  if (device == Device::Semg) cfg.site = metrics::Site::Forearm;
  cfg.sim = sim::SimConfig::ideal();
  cfg.sim.seed = seed;
  return cfg;
}

ScriptOptions script_for(Device device, std::uint64_t seed = 1) {
  ScriptOptions opt;
  opt.seed = seed;
  opt.profile = default_profile(device);
  return opt;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Blocking test client with a deadline on every read.
class TestClient {
 public:
  explicit TestClient(std::uint16_t port) : socket_(io_) {
    socket_.connect({boost::asio::ip::address_v4::loopback(), port});
  }

  void send(const json& msg) { boost::asio::write(socket_, boost::asio::buffer(jsonl::dump(msg) + "\n")); }

  // Next line from the server, or nullopt on timeout or disconnect.
  std::optional<json> next(std::chrono::milliseconds timeout = std::chrono::milliseconds(3000)) {
    std::optional<json> out;
    bool done = false;
    boost::asio::async_read_until(socket_, buffer_, '\n', [&](boost::system::error_code ec, std::size_t) {
      done = true;
      if (ec) return;
      std::istream in(&buffer_);
      std::string line;
      std::getline(in, line);
      out = json::parse(line);
    });
    io_.restart();
    io_.run_for(timeout);
    if (!done) {
      socket_.cancel();
      io_.restart();
      io_.run();
    }
    return out;
  }

  // Reads snapshots until one satisfies pred.
  template <class Pred>
  std::optional<json> until(Pred pred) {
    while (auto msg = next()) {
      if ((*msg)["kind"] == "snapshot" && pred((*msg)["body"])) return msg;
    }
    return std::nullopt;
  }

  void close() {
    boost::system::error_code ignored;
    socket_.shutdown(boost::asio::ip::tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
  }

 private:
  boost::asio::io_context io_;
  boost::asio::ip::tcp::socket socket_;
  boost::asio::streambuf buffer_;
};

// A server on its own thread with a hand-driven clock.
struct LiveServer {
  explicit LiveServer(Device device, const fs::path& trace_dir) {
    ServeOptions opt;
    opt.session = ideal_config(device);
    opt.trace_dir = trace_dir.string();
    opt.clock = [this] { return clock.load(); };
    server.emplace(io, opt);
    thread = std::thread([this] { io.run(); });
  }
  ~LiveServer() {
    server->stop();
    thread.join();
  }

  std::atomic<double> clock{0.0};
  boost::asio::io_context io;
  std::optional<Server> server;
  std::thread thread;
};

json device_event(const std::string& type) { return {{"kind", "device_event"}, {"body", {{"type", type}}}}; }
json utterance(const std::string& text) { return {{"kind", "utterance"}, {"body", {{"text", text}}}}; }

}  // namespace

TEST_CASE("device input JSON round trip and validation") {
  for (const auto& in : {DeviceInput::cycle(), DeviceInput::select(), DeviceInput::press(), DeviceInput::release(),
                         DeviceInput::utterance("tell the robot back"), DeviceInput::frame(0.25)}) {
    CHECK(device_input_from_json(to_json(in)) == in);
  }
  CHECK_THROWS_AS(device_input_from_json(json{{"type", "wiggle"}}), InputError);
  CHECK_THROWS_AS(device_input_from_json(json{{"type", "frame"}}), InputError);
}

TEST_CASE("switch adapter: a 0.5 s hold is a Cycle, a repeated press is rejected") {
  auto adapter = make_adapter(Device::Switch, {});
  const ButtonSet on_screen({{ButtonId::SelectObject, "Select Object"}});
  CHECK(adapter->on_input(DeviceInput::press(), 1.0, on_screen).commands.empty());
  CHECK_FALSE(adapter->on_input(DeviceInput::press(), 1.2, on_screen).rejected.empty());
  const auto r = adapter->on_input(DeviceInput::release(), 1.5, on_screen);
  REQUIRE(r.commands.size() == 1);
  CHECK(r.commands[0].kind == CommandKind::Cycle);
  CHECK(r.commands[0].source == Device::Switch);
}

TEST_CASE("voice adapter resolves on-screen labels and rejects the rest") {
  auto adapter = make_adapter(Device::Voice, {});
  const ButtonSet on_screen({{ButtonId::Pause, "Pause"}});
  const auto ok = adapter->on_input(DeviceInput::utterance("Echo, tell the robot pause"), 1.0, on_screen);
  REQUIRE(ok.commands.size() == 1);
  CHECK(ok.commands[0].button == ButtonId::Pause);
  CHECK_FALSE(adapter->on_input(DeviceInput::utterance("tell the robot dance"), 2.0, on_screen).rejected.empty());
  CHECK_FALSE(adapter->on_input(DeviceInput::utterance("hello"), 3.0, on_screen).rejected.empty());
  CHECK(adapter->status()["last_phrase"] == "dance");
}

TEST_CASE("adapters refuse inputs of other devices") {
  auto adapter = make_adapter(Device::Switch, {});
  CHECK_FALSE(adapter->on_input(DeviceInput::utterance("tell the robot back"), 1.0, {}).rejected.empty());
}

TEST_CASE("session: ideal switch session places all four objects") {
  const auto trace = record_scripted(ideal_config(Device::Switch), script_for(Device::Switch));
  const auto lines = as_lines(trace);
  CHECK(lines.front().value["kind"] == "header");
  CHECK(lines.back().value["kind"] == "end");
  CHECK(lines.back().value["complete"] == true);
  int outcomes = 0;
  double last_t = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double t = lines[i].value["t"].get<double>();
    CHECK(t >= last_t);
    last_t = t;
    if (lines[i].value["kind"] == "outcome") {
      ++outcomes;
      CHECK(lines[i].value["outcome"]["success"] == true);
    }
  }
  CHECK(outcomes == 4);
}

TEST_CASE("session input before the session clock is an input error") {
  Session s(ideal_config(Device::Direct));
  s.start();
  s.advance_to(5.0);
  CHECK_THROWS_AS(s.input(4.0, DeviceInput::cycle()), InputError);
}

TEST_CASE("client timestamps are recorded, never used for ordering") {
  Session s(ideal_config(Device::Direct));
  s.start();
  s.input(3.0, DeviceInput::cycle(), 1000.0);
  s.input(3.5, DeviceInput::cycle(), 2.0);
  s.finish(4.0, false);
  int inputs = 0;
  for (const auto& line : as_lines(s.trace())) {
    if (line.value["kind"] == "input") {
      CHECK(line.value.contains("client_t"));
      ++inputs;
    }
  }
  CHECK(inputs == 2);
  CHECK(replay(as_lines(s.trace())).trace.hash() == s.trace().hash());
}

TEST_CASE("every device's trace replays byte for byte, twice") {
  for (Device d : {Device::Mouse, Device::Voice, Device::Switch, Device::Semg, Device::Direct}) {
    CAPTURE(device_name(d));
    const auto trace = record_scripted(ideal_config(d, 3), script_for(d, 3));
    const auto lines = as_lines(trace);
    const auto once = replay(lines);
    const auto twice = replay(lines);
    CHECK(once.trace.lines() == trace.lines());
    CHECK(once.trace.hash() == trace.hash());
    CHECK(twice.trace.hash() == trace.hash());
    CHECK(once.complete);
    CHECK(once.trials.size() == 4);
  }
}

TEST_CASE("recorded traces match the pinned hashes") {
  const json pinned = json::parse(read_text(fs::path(HITL_GOLDEN_DIR) / "trace_hashes.json"));
  for (const auto& [name, hash] : pinned.items()) {
    CAPTURE(name);
    const Device d = parse_device(name);
    CHECK(record_scripted(ideal_config(d), script_for(d)).hash() == hash.get<std::string>());
  }
}

TEST_CASE("replay: a timestamp regression fails at that line") {
  const auto trace = record_scripted(ideal_config(Device::Mouse), script_for(Device::Mouse));
  auto lines = as_lines(trace);
  std::size_t k = 0;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].value["kind"] == "input" && lines[i].value["t"].get<double>() > 1.0) {
      k = i;
      break;
    }
  }
  REQUIRE(k > 0);
  lines[k].value["t"] = lines[k - 1].value["t"].get<double>() - 0.5;
  try {
    replay(lines);
    FAIL("replay accepted a timestamp regression");
  } catch (const ReplayError& e) {
    CHECK(e.line() == lines[k].number);
  }
}

TEST_CASE("replay detects divergence, tampered config and truncation") {
  const auto trace = record_scripted(ideal_config(Device::Voice), script_for(Device::Voice));
  const auto good = as_lines(trace);

  auto tampered = good;
  for (auto& line : tampered) {
    if (line.value["kind"] == "outcome") {
      line.value["outcome"]["success"] = false;
      break;
    }
  }
  CHECK_THROWS_AS(replay(tampered), ReplayError);

  auto config = good;
  config[0].value["config"]["sim"]["seed"] = 999;
  CHECK_THROWS_AS(replay(config), ReplayError);

  auto truncated = good;
  truncated.erase(truncated.begin() + static_cast<std::ptrdiff_t>(good.size() / 2), truncated.end() - 1);
  CHECK_THROWS_AS(replay(truncated), ReplayError);

  CHECK_THROWS_AS(replay({}), ReplayError);
}

TEST_CASE("timeline from a trace feeds the metrics recorder") {
  const auto trace = record_scripted(ideal_config(Device::Mouse), script_for(Device::Mouse));
  const auto tl = timeline_from_trace(as_lines(trace));
  const auto r = metrics::record(tl);
  CHECK(r.incomplete == 0);
  REQUIRE(r.trials.size() == 4);
  for (const auto& t : r.trials) {
    CHECK(t.success);
    CHECK(t.robot_time >= 50.0);
    CHECK(t.robot_time <= 70.0);
    CHECK(t.user_time > 0.0);
  }
}

TEST_CASE("client message parsing") {
  CHECK(parse_client_message(jsonl::dump(device_event("press"))).input == DeviceInput::press());
  CHECK(parse_client_message(jsonl::dump(utterance("hi"))).input == DeviceInput::utterance("hi"));
  const auto end = parse_client_message(R"({"kind":"control","body":{"op":"end"},"client_t":4.5})");
  CHECK_FALSE(end.input);
  CHECK(end.client_t == 4.5);
  CHECK_THROWS_AS(parse_client_message("{"), InputError);
  CHECK_THROWS_AS(parse_client_message(R"({"kind":"dance","body":{}})"), InputError);
  CHECK_THROWS_AS(parse_client_message(R"({"kind":"control","body":{"op":"jump"}})"), InputError);
}

TEST_CASE("serve: with no client the server stays idle") {
  const auto dir = fresh_dir("hitl_serve_idle");
  {
    LiveServer live(Device::Switch, dir);
    CHECK(live.server->port() != 0);
    std::this_thread::sleep_for(std::chrono::milliseconds(150));
    CHECK(live.server->last_trace_path().empty());
  }
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("serve: a 0.5 s switch hold advances the highlight") {
  const auto dir = fresh_dir("hitl_serve_switch");
  std::string trace_path;
  {
    LiveServer live(Device::Switch, dir);
    TestClient client(live.server->port());
    live.clock = 3.0;
    const auto ready = client.until([](const json& b) { return b["state"] == "ObjectSelection"; });
    REQUIRE(ready);
    CHECK((*ready)["body"]["highlight"] == 0);
    client.send(device_event("press"));
    CHECK(client.until([](const json& b) { return b["device"]["phase"] == "armed_next"; }));
    live.clock = 3.5;
    client.send(device_event("release"));
    const auto moved = client.until([](const json& b) { return b["highlight"] == 1; });
    REQUIRE(moved);
    CHECK((*moved)["body"]["state"] == "ObjectSelection");
    client.close();
    for (int i = 0; i < 100 && live.server->last_trace_path().empty(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    trace_path = live.server->last_trace_path();
  }
  REQUIRE_FALSE(trace_path.empty());
  const auto result = replay_file(trace_path);
  CHECK_FALSE(result.complete);
  CHECK(result.trace.lines().back().find("\"complete\":false") != std::string::npos);
}

TEST_CASE("serve: \"tell the robot pause\" during execution pauses it") {
  const auto dir = fresh_dir("hitl_serve_voice");
  LiveServer live(Device::Voice, dir);
  TestClient client(live.server->port());
  live.clock = 3.0;
  REQUIRE(client.until([](const json& b) { return b["state"] == "ObjectSelection"; }));
  client.send(utterance("Echo, tell the robot select object"));
  REQUIRE(client.until([](const json& b) { return b["state"] == "GraspSelection"; }));
  live.clock = 4.0;
  client.send(utterance("Echo, tell the robot select grasp"));
  REQUIRE(client.until([](const json& b) { return b["state"] == "GraspExecution"; }));
  live.clock = 10.0;
  client.send(utterance("tell the robot pause"));
  const auto paused = client.until([](const json& b) { return b["state"] == "PausedExecution"; });
  REQUIRE(paused);
  CHECK((*paused)["body"]["progress"].is_object());
}

TEST_CASE("serve: a second client is rejected with an error") {
  const auto dir = fresh_dir("hitl_serve_second");
  LiveServer live(Device::Mouse, dir);
  TestClient first(live.server->port());
  REQUIRE(first.until([](const json& b) { return b["state"] == "ObjectRecognition"; }));
  TestClient second(live.server->port());
  const auto msg = second.next();
  REQUIRE(msg);
  CHECK((*msg)["kind"] == "error");
  CHECK((*msg)["body"]["message"] == "a session is already active");
  CHECK_FALSE(second.next(std::chrono::milliseconds(500)));

  // The first client is unaffected.
  live.clock = 3.0;
  first.send(device_event("cycle"));
  CHECK(first.until([](const json& b) { return b["highlight"] == 1; }));
}

TEST_CASE("serve: malformed lines get an error and the session goes on") {
  const auto dir = fresh_dir("hitl_serve_bad");
  LiveServer live(Device::Mouse, dir);
  TestClient client(live.server->port());
  REQUIRE(client.until([](const json& b) { return b["state"] == "ObjectRecognition"; }));
  client.send(json{{"kind", "nonsense"}, {"body", json::object()}});
  std::optional<json> err;
  while (auto msg = client.next()) {
    if ((*msg)["kind"] == "error") {
      err = msg;
      break;
    }
  }
  REQUIRE(err);
  client.send(json{{"kind", "control"}, {"body", {{"op", "end"}}}});
  for (int i = 0; i < 100 && live.server->last_trace_path().empty(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK_FALSE(live.server->last_trace_path().empty());
}

TEST_CASE("bench: all four devices with no failures succeed everywhere") {
  BenchOptions opt;
  opt.trials = 4;
  opt.sim = sim::SimConfig::ideal();
  const auto result = run_bench(opt);
  CHECK(result.sessions.size() == 16);
  for (const auto& col : result.report.columns) {
    for (const auto& obj : result.report.rows) {
      const auto* c = result.report.cell(col, obj);
      REQUIRE(c);
      CHECK(c->percentage() == 100.0);
    }
  }
  CHECK(result.report.overall_average() == 100.0);
}

TEST_CASE("bench: a one-in-three ycb failure lands in the expected count band") {
  BenchOptions opt;
  opt.devices = {"mouse"};
  opt.trials = 15;
  opt.seed = 7;
  opt.sim = sim::SimConfig::ideal();
  opt.ycb_failure = 1.0 / 3.0;
  const auto result = run_bench(opt);
  const auto* ycb = result.report.cell("Mouse", "ycb");
  REQUIRE(ycb);
  CHECK(ycb->trials == 15);
  CHECK(ycb->successes >= 6);
  CHECK(ycb->successes <= 14);
  CHECK(result.report.cell("Mouse", "block1")->successes == 15);
}

TEST_CASE("bench: the same seed gives byte-identical reports") {
  BenchOptions opt;
  opt.devices = {"switch", "semg"};
  opt.trials = 2;
  opt.seed = 11;
  const auto a = run_bench(opt);
  const auto b = run_bench(opt);
  CHECK(metrics::export_report(a.report, metrics::Format::Structured) ==
        metrics::export_report(b.report, metrics::Format::Structured));
  REQUIRE(a.sessions.size() == b.sessions.size());
  for (std::size_t i = 0; i < a.sessions.size(); ++i) CHECK(a.sessions[i].trace_hash == b.sessions[i].trace_hash);
  // sEMG sessions alternate electrode sites.
  CHECK(a.sessions[2].site == metrics::Site::Forearm);
  CHECK(a.sessions[3].site == metrics::Site::Ear);

  const auto dir = fresh_dir("hitl_bench_out");
  write_bench_outputs(a, dir.string());
  for (const char* f : {"table.txt", "report.csv", "report.json", "sessions.csv"}) CHECK(fs::exists(dir / f));
  CHECK(metrics::parse_structured(read_text(dir / "report.json")) == a.report);
}

TEST_CASE("bench: bad options are rejected") {
  CHECK_THROWS_AS(parse_bench_device("joystick"), std::invalid_argument);
  BenchOptions opt;
  opt.devices = {"joystick"};
  CHECK_THROWS_AS(run_bench(opt), std::invalid_argument);
  opt.devices = {"mouse"};
  opt.trials = 0;
  CHECK_THROWS_AS(run_bench(opt), std::invalid_argument);
}
