#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mcrcf {

using Id = std::uint64_t;

// Which side of the rating matrix plays the role of documents.
enum class Mode : std::uint8_t { user_based = 0, item_based = 1 };

// Malformed or inconsistent input data (rating files, unknown ids).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corrupt or incompatible persisted index.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string_view to_string(Mode mode) {
  return mode == Mode::user_based ? "user_based" : "item_based";
}

inline Mode parse_mode(std::string_view text) {
  if (text == "user" || text == "user_based") return Mode::user_based;
  if (text == "item" || text == "item_based") return Mode::item_based;
  throw std::invalid_argument("unknown mode: " + std::string(text));
}

}  // namespace mcrcf
