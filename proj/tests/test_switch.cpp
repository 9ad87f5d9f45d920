#include "hitl/errors.hpp"
#include "hitl/switch_proto.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace hitl;
using namespace hitl::switch_proto;

namespace {

std::optional<CommandKind> hold(double d) {
  SwitchState s;
  s = on_event(s, {10.0, EventKind::Press}).first;
  return on_event(s, {10.0 + d, EventKind::Release}).second;
}

// Interval table written out literally.
std::optional<CommandKind> expected(double d) {
  if (d >= 0.1 && d < 1.0) return CommandKind::Cycle;
  if (d >= 1.0 && d <= 3.0) return CommandKind::Select;
  return std::nullopt;
}

}  // namespace

TEST_CASE("hold durations from the protocol") {
  CHECK(hold(0.5) == CommandKind::Cycle);
  CHECK(hold(0.05) == std::nullopt);
  CHECK(hold(2.0) == CommandKind::Select);
  CHECK(hold(3.5) == std::nullopt);
}

TEST_CASE("interval boundaries") {
  CHECK(classify_hold(0.0999999) == std::nullopt);
  CHECK(classify_hold(0.1) == CommandKind::Cycle);
  CHECK(classify_hold(0.9999999) == CommandKind::Cycle);
  CHECK(classify_hold(1.0) == CommandKind::Select);
  CHECK(classify_hold(3.0) == CommandKind::Select);
  CHECK(classify_hold(3.0000001) == std::nullopt);
}

TEST_CASE("random hold durations classify exactly as the interval table") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = d(rng);
    CAPTURE(x);
    REQUIRE(classify_hold(x) == expected(x));
  }
}

TEST_CASE("tick messages follow the hold") {
  SwitchState waiting;
  CHECK(tick(waiting, 100.0).second == kMsgWaiting);

  SwitchState armed{Phase::ArmedNext, 0.0};
  CHECK(message(armed) == kMsgNext);
  auto [s1, m1] = tick(armed, 1.2);
  CHECK(s1.phase == Phase::ArmedSelect);
  CHECK(m1 == kMsgSelect);

  SwitchState select{Phase::ArmedSelect, 0.0};
  auto [s2, m2] = tick(select, 3.5);
  CHECK(s2.phase == Phase::Expired);
  CHECK(m2 == kMsgWaiting);

  // A single late tick walks through both latches.
  CHECK(tick(armed, 4.0).first.phase == Phase::Expired);
}

TEST_CASE("ticks during a hold never change the command") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  std::uniform_int_distribution<int> nticks(0, 20);
  for (int i = 0; i < 2000; ++i) {
    const double duration = d(rng);
    SwitchState s = on_event({}, {0.0, EventKind::Press}).first;
    const int n = nticks(rng);
    for (int k = 1; k <= n; ++k) s = tick(s, duration * k / (n + 1)).first;
    CAPTURE(duration);
    CHECK(on_event(s, {duration, EventKind::Release}).second == expected(duration));
  }
}

TEST_CASE("alternation is enforced") {
  SwitchState s;
  CHECK_THROWS_AS(on_event(s, {0.0, EventKind::Release}), ProtocolViolation);
  s = on_event(s, {0.0, EventKind::Press}).first;
  CHECK_THROWS_AS(on_event(s, {0.1, EventKind::Press}), ProtocolViolation);
  CHECK_THROWS_AS(on_event(s, {-1.0, EventKind::Release}), InputError);
}

TEST_CASE("event reader") {
  std::istringstream in(
      "{\"t\":0.0,\"kind\":\"press\"}\n{\"t\":0.5,\"kind\":\"release\"}\n{\"t\":1.0,\"kind\":\"press\"}\n");
  const auto events = read_events(in);
  REQUIRE(events.size() == 3);
  CHECK(events[1].kind == EventKind::Release);
  std::istringstream bad("{\"t\":0.0,\"kind\":\"tap\"}\n");
  CHECK_THROWS_AS(read_events(bad), InputError);
}
