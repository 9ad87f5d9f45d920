#include "hitl/errors.hpp"
#include "hitl/pipeline.hpp"
#include "hitl/voice_proto.hpp"

#include <doctest.h>

#include <sstream>

using namespace hitl;
using namespace hitl::voice_proto;

TEST_CASE("parse_utterance examples") {
  CHECK(parse_utterance({0.0, "Echo, tell the robot Rerun Vision"}) == "Rerun Vision");
  CHECK(parse_utterance({0.0, "tell the robot   select  grasp"}) == "select grasp");
  CHECK_THROWS_AS(parse_utterance({0.0, "what time is it"}), NotACommand);
  CHECK_THROWS_AS(parse_utterance({0.0, "Alexa, tell the robot"}), EmptyCommand);
  CHECK_THROWS_AS(parse_utterance({0.0, "Alexa, tell the robot ..."}), EmptyCommand);
}

TEST_CASE("the trigger is matched on whole words, case-insensitively") {
  CHECK(parse_utterance({0.0, "ALEXA, TELL THE ROBOT pause."}) == "pause");
  CHECK_THROWS_AS(parse_utterance({0.0, "tell the robots pause"}), NotACommand);
}

TEST_CASE("resolve_command examples") {
  const auto selection = pipeline::buttons_for(pipeline::PipelineState::ObjectSelection, {});
  CHECK(resolve_command("rerun vision", selection) == ButtonId::RerunVision);
  const auto execution = pipeline::buttons_for(pipeline::PipelineState::GraspExecution, {});
  CHECK(resolve_command("pause", execution) == ButtonId::Pause);
  CHECK_THROWS_AS(resolve_command("jump", execution), UnknownCommand);
  // Only what is on screen resolves.
  CHECK_THROWS_AS(resolve_command("pause", selection), UnknownCommand);
}

TEST_CASE("labels that normalize alike are ambiguous") {
  ButtonSet set({{ButtonId::Back, "Back"}, {ButtonId::Restart, "back!"}});
  CHECK_THROWS_AS(resolve_command("BACK", set), AmbiguousCommand);
}

TEST_CASE("every on-screen label round-trips through an utterance in every state") {
  for (auto state : pipeline::kAllStates) {
    const auto buttons = pipeline::buttons_for(state, {});
    for (const auto& b : buttons.buttons()) {
      for (const std::string& form : {b.label, normalize(b.label), b.label + "!"}) {
        const auto phrase = parse_utterance({1.0, "Echo, tell the robot " + form});
        CAPTURE(phrase);
        CHECK(resolve_command(phrase, buttons) == b.id);
      }
    }
  }
}

TEST_CASE("utterance reader") {
  std::istringstream in("{\"t\":1.0,\"text\":\"tell the robot back\"}\n");
  const auto u = read_utterances(in);
  REQUIRE(u.size() == 1);
  CHECK(u[0].text == "tell the robot back");
  std::istringstream bad("{\"t\":1.0}\n");
  CHECK_THROWS_AS(read_utterances(bad), InputError);
}
