#include "hitl/voice_proto.hpp"

#include "hitl/errors.hpp"
#include "hitl/jsonl.hpp"

#include <cctype>
#include <istream>
#include <optional>
#include <sstream>

namespace hitl::voice_proto {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

std::string trim_punct(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && !is_word_char(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && !is_word_char(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::string normalize(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
    } else if (is_word_char(c)) {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

std::string parse_utterance(const Utterance& u) {
  const std::vector<std::string> words = split_ws(u.text);
  const std::vector<std::string> trigger = split_ws(kTrigger);

  std::optional<std::size_t> after;
  for (std::size_t i = 0; i + trigger.size() <= words.size() && !after; ++i) {
    bool match = true;
    for (std::size_t k = 0; k < trigger.size() && match; ++k) {
      match = normalize(words[i + k]) == trigger[k];
    }
    if (match) after = i + trigger.size();
  }
  if (!after) throw NotACommand("no '" + std::string(kTrigger) + "' in: " + u.text);

  std::string phrase;
  for (std::size_t i = *after; i < words.size(); ++i) {
    if (!phrase.empty()) phrase.push_back(' ');
    phrase += words[i];
  }
  phrase = trim_punct(phrase);
  if (phrase.empty()) throw EmptyCommand("nothing follows '" + std::string(kTrigger) + "'");
  return phrase;
}

ButtonId resolve_command(std::string_view phrase, const ButtonSet& buttons) {
  const std::string wanted = normalize(phrase);
  std::optional<ButtonId> found;
  int matches = 0;
  for (const Button& b : buttons.buttons()) {
    if (normalize(b.label) == wanted) {
      found = b.id;
      ++matches;
    }
  }
  if (matches > 1) throw AmbiguousCommand("'" + std::string(phrase) + "' matches several buttons");
  if (!found) throw UnknownCommand("no button labeled '" + std::string(phrase) + "'");
  return *found;
}

std::vector<Utterance> read_utterances(std::istream& in) {
  std::vector<Utterance> out;
  for (const jsonl::Line& line : jsonl::read(in)) {
    Utterance u{jsonl::number_field(line, "t"), jsonl::string_field(line, "text")};
    if (!out.empty() && u.t < out.back().t) {
      throw InputError("line " + std::to_string(line.number) + ": timestamps must not decrease");
    }
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace hitl::voice_proto
