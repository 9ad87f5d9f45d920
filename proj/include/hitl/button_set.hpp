#pragma once

#include "hitl/menu_command.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hitl {

struct Button {
  ButtonId id;
  std::string label;

  friend bool operator==(const Button&, const Button&) = default;
};

// Ordered buttons of one pipeline stage with a single highlighted entry.
// An empty set (input-locked stage) has no highlight.
class ButtonSet {
 public:
  ButtonSet() = default;
  explicit ButtonSet(std::vector<Button> buttons);  // throws on duplicate labels

  const std::vector<Button>& buttons() const { return buttons_; }
  std::size_t size() const { return buttons_.size(); }
  bool empty() const { return buttons_.empty(); }

  std::size_t highlight() const { return highlight_; }
  std::optional<ButtonId> highlighted() const;
  bool contains(ButtonId id) const;

  // Advances the highlight, wrapping at the end. No-op when empty.
  void cycle();
  void set_highlight(std::size_t index);  // throws std::out_of_range

  friend bool operator==(const ButtonSet&, const ButtonSet&) = default;

 private:
  std::vector<Button> buttons_;
  std::size_t highlight_ = 0;
};

}  // namespace hitl
