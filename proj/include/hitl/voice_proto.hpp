#pragma once

// Spoken commands arrive as transcripts of the form
//   "<wake word>, tell the robot <button label>"
// and resolve against the buttons currently on screen only.

#include "hitl/button_set.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hitl::voice_proto {

inline constexpr std::string_view kTrigger = "tell the robot";

class VoiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NotACommand : public VoiceError {
 public:
  using VoiceError::VoiceError;
};
class EmptyCommand : public VoiceError {
 public:
  using VoiceError::VoiceError;
};
class UnknownCommand : public VoiceError {
 public:
  using VoiceError::VoiceError;
};
class AmbiguousCommand : public VoiceError {
 public:
  using VoiceError::VoiceError;
};

struct Utterance {
  double t = 0.0;
  std::string text;
};

// Returns the phrase after the trigger with whitespace collapsed and the
// original casing kept.
std::string parse_utterance(const Utterance& u);

// Case-insensitive, punctuation-stripped exact match against the labels.
ButtonId resolve_command(std::string_view phrase, const ButtonSet& buttons);

// Lowercase, punctuation removed, whitespace collapsed.
std::string normalize(std::string_view text);

// Line-delimited {"t":..,"text":..} records.
std::vector<Utterance> read_utterances(std::istream& in);

}  // namespace hitl::voice_proto
