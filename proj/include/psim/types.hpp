#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psim {

using AgentId = std::string;

// Error hierarchy. Every module throws one of these; the CLI maps them onto
// exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RequestError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class BusyError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

// Fixed goal taxonomy. The enum order is the canonical axis order of
// goal-count vectors.
enum class GoalTag {
  Learning,
  Work,
  Exercise,
  Relaxation,
  Social,
  Appointment,
  Meal,
  Rest,
  Creative,
  Errand,
};

inline constexpr std::size_t kGoalCount = 10;

inline constexpr std::array<std::string_view, kGoalCount> kGoalNames = {
    "Learning", "Work", "Exercise", "Relaxation", "Social",
    "Appointment", "Meal", "Rest", "Creative", "Errand"};

inline std::string_view goal_name(GoalTag g) {
  return kGoalNames[static_cast<std::size_t>(g)];
}

inline std::optional<GoalTag> parse_goal(std::string_view s) {
  for (std::size_t i = 0; i < kGoalCount; ++i) {
    if (kGoalNames[i] == s) return static_cast<GoalTag>(i);
  }
  return std::nullopt;
}

inline std::array<GoalTag, kGoalCount> all_goals() {
  std::array<GoalTag, kGoalCount> out{};
  for (std::size_t i = 0; i < kGoalCount; ++i) out[i] = static_cast<GoalTag>(i);
  return out;
}

// A value produced through a fallback path carries the reason it degraded.
template <typename T>
struct Degradable {
  T value;
  std::optional<std::string> degraded;
};

// "HH:MM" <-> minutes of day.
std::string format_hhmm(int minutes);
std::optional<int> parse_hhmm(std::string_view s);

}  // namespace psim
