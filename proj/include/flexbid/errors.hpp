#pragma once

#include <stdexcept>
#include <string>

namespace flexbid {

// Invalid user configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that cannot be used (malformed rows, violated invariants,
// insufficient coverage). The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRow : public DataError {
 public:
  MalformedRow(std::string source, std::size_t line, const std::string& why)
      : DataError(source + ":" + std::to_string(line) + ": " + why),
        source_(std::move(source)),
        line_(line) {}
  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class OverlappingSessions : public DataError {
 public:
  explicit OverlappingSessions(const std::string& ev_id)
      : DataError("overlapping sessions for ev_id " + ev_id), ev_id_(ev_id) {}
  const std::string& ev_id() const noexcept { return ev_id_; }

 private:
  std::string ev_id_;
};

class NonMonotoneTimestamps : public DataError {
 public:
  explicit NonMonotoneTimestamps(const std::string& ev_id)
      : DataError("non-monotone timestamps for ev_id " + ev_id), ev_id_(ev_id) {}
  const std::string& ev_id() const noexcept { return ev_id_; }

 private:
  std::string ev_id_;
};

class EmptyInput : public DataError {
 public:
  explicit EmptyInput(const std::string& what) : DataError("empty input: " + what) {}
};

class DayMismatch : public DataError {
 public:
  DayMismatch() : DataError("flexibility series do not share the same day") {}
};

class HourMismatch : public DataError {
 public:
  explicit HourMismatch(const std::string& what) : DataError("hour mismatch: " + what) {}
};

class TooManyBundles : public ConfigError {
 public:
  TooManyBundles(std::size_t bundles, std::size_t evs)
      : ConfigError("cannot split " + std::to_string(evs) + " EVs into " +
                    std::to_string(bundles) + " bundles") {}
};

class InsufficientTrainingDays : public DataError {
 public:
  InsufficientTrainingDays(std::size_t available, std::size_t requested)
      : DataError("requested " + std::to_string(requested) + " scenario days but only " +
                  std::to_string(available) + " training days are available"),
        available_(available),
        requested_(requested) {}
  std::size_t available() const noexcept { return available_; }
  std::size_t requested() const noexcept { return requested_; }

 private:
  std::size_t available_;
  std::size_t requested_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& path) : std::runtime_error("I/O error: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class NonConvergence : public std::runtime_error {
 public:
  explicit NonConvergence(const std::string& what) : std::runtime_error("no convergence: " + what) {}
};

}  // namespace flexbid
