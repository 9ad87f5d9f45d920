#pragma once

// Line-delimited JSON records: one object per line, the framing shared by
// signal traces, switch/utterance traces and session traces.

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hitl::jsonl {

using Json = nlohmann::json;

struct Line {
  std::size_t number = 0;  // 1-based
  Json value;
};

// Parses every non-blank line; throws InputError naming the line on bad JSON.
std::vector<Line> read(std::istream& in);
std::vector<Line> read_file(const std::string& path);

void write(std::ostream& out, const Json& record);

// Compact serialization used for every persisted record.
std::string dump(const Json& record);

// FNV-1a over the bytes; hex-encoded 16 chars.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Required-field accessors with line-aware errors.
double number_field(const Line& line, const char* key);
std::string string_field(const Line& line, const char* key);

}  // namespace hitl::jsonl
