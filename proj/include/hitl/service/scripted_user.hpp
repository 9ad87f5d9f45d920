#pragma once

// A simulated participant that watches the session and operates the menu
// through its device, the way a person would: pick the next object, select a
// reachable grasp, wait for the arm, move on.
//
// Per-device behaviour:
//   mouse/direct  one click per Cycle or Select
//   switch        short hold for NEXT, long hold for Select
//   voice         "Echo, tell the robot <button label>"
//   sEMG          1 kHz frames; a medium burst moves the cursor, a strong
//                 burst selects, each followed by rest
// Every gesture starts after a random reaction delay. Mistakes are an extra
// cursor move (or a misheard phrase for voice) that the user then corrects.

#include "hitl/service/session.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hitl::service {

struct UserProfile {
  double reaction_mean = 1.0;    // s
  double reaction_jitter = 0.0;  // delay is uniform in mean +- jitter
  double error_rate = 0.0;       // per gesture
  double pause_probability = 0.0;  // per execution: pause once, then continue
  double pause_hold = 3.0;         // s spent paused
  int max_reruns = 5;        // recognitions allowed while the target is missing
  int max_attempts = 3;      // per object, with retry_on_failure
  double frame_rate = 1000.0;  // sEMG samples per second
  double session_limit = 3600.0;  // s; the session ends incomplete after this
};

UserProfile default_profile(Device device);

struct ScriptOptions {
  std::uint64_t seed = 1;
  UserProfile profile;
  std::vector<std::string> objects{"block1", "block2", "block3", "ycb"};  // in order
  bool retry_on_failure = false;  // re-attempt a failed object right away
};

// Starts the session if needed and runs it to the end (finish() is called).
void run_scripted_user(Session& session, const ScriptOptions& options);

// Convenience: new session, scripted run, finished trace.
SessionTrace record_scripted(const SessionConfig& config, const ScriptOptions& options);

}  // namespace hitl::service
