#include "hitl/button_set.hpp"

#include <algorithm>
#include <stdexcept>

namespace hitl {

ButtonSet::ButtonSet(std::vector<Button> buttons) : buttons_(std::move(buttons)) {
  for (std::size_t i = 0; i < buttons_.size(); ++i) {
    for (std::size_t j = i + 1; j < buttons_.size(); ++j) {
      if (buttons_[i].label == buttons_[j].label) {
        throw std::invalid_argument("duplicate button label '" + buttons_[i].label + "'");
      }
    }
  }
}

std::optional<ButtonId> ButtonSet::highlighted() const {
  if (buttons_.empty()) return std::nullopt;
  return buttons_[highlight_].id;
}

bool ButtonSet::contains(ButtonId id) const {
  return std::any_of(buttons_.begin(), buttons_.end(), [id](const Button& b) { return b.id == id; });
}

void ButtonSet::cycle() {
  if (buttons_.empty()) return;
  highlight_ = (highlight_ + 1) % buttons_.size();
}

void ButtonSet::set_highlight(std::size_t index) {
  if (index >= buttons_.size()) throw std::out_of_range("highlight index out of range");
  highlight_ = index;
}

}  // namespace hitl
