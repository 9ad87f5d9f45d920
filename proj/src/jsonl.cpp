#include "hitl/jsonl.hpp"

#include "hitl/errors.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace hitl::jsonl {

std::vector<Line> read(std::istream& in) {
  std::vector<Line> out;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json value = Json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded() || !value.is_object()) {
      throw InputError("line " + std::to_string(number) + ": not a JSON object");
    }
    out.push_back({number, std::move(value)});
  }
  return out;
}

std::vector<Line> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read(in);
}

std::string dump(const Json& record) { return record.dump(); }

void write(std::ostream& out, const Json& record) { out << dump(record) << '\n'; }

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double number_field(const Line& line, const char* key) {
  auto it = line.value.find(key);
  if (it == line.value.end() || !it->is_number()) {
    throw InputError("line " + std::to_string(line.number) + ": missing numeric field '" + key + "'");
  }
  return it->get<double>();
}

std::string string_field(const Line& line, const char* key) {
  auto it = line.value.find(key);
  if (it == line.value.end() || !it->is_string()) {
    throw InputError("line " + std::to_string(line.number) + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace hitl::jsonl
