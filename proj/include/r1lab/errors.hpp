#ifndef R1LAB_ERRORS_HPP_
#define R1LAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace r1lab {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// No stage of the built schedule can hold the requested set (caller must
// extend the schedule).
struct StageExhausted : Error {
  explicit StageExhausted(const std::string& msg) : Error(msg) {}
};

// Stage window contains no candidate indices.
struct EmptyWindow : Error {
  explicit EmptyWindow(const std::string& msg) : Error(msg) {}
};

// Cylinder count above the configured enumeration cap.
struct CountTooLarge : Error {
  explicit CountTooLarge(const std::string& msg) : Error(msg) {}
};

// Sequence fails to increase over the probe range.
struct Degenerate : Error {
  explicit Degenerate(const std::string& msg) : Error(msg) {}
};

// No stage of the schedule yields a checkpoint.
struct EmptyCheckpoint : Error {
  explicit EmptyCheckpoint(const std::string& msg) : Error(msg) {}
};

struct CapConflict : Error {
  explicit CapConflict(const std::string& msg) : Error(msg) {}
};

struct ConfigInvalid : Error {
  explicit ConfigInvalid(const std::string& msg) : Error(msg) {}
};

}  // namespace r1lab

#endif  // R1LAB_ERRORS_HPP_
