#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace heasched {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A BSED/MF pair that is not one of the tabulated grid points.
class UnknownConfigError : public Error {
 public:
  using Error::Error;
};

// A tabulated grid point with no hybrid-electric variant (empty table cell).
class MissingEntryError : public Error {
 public:
  using Error::Error;
};

class SlotOutOfRangeError : public Error {
 public:
  using Error::Error;
};

class EmptyWindowError : public Error {
 public:
  using Error::Error;
};

class ZeroDwellError : public Error {
 public:
  using Error::Error;
};

// A charging task whose energy cannot be delivered within its window.
class InfeasibleTaskError : public Error {
 public:
  InfeasibleTaskError(std::string task_id, const std::string& what)
      : Error(what), task_id_(std::move(task_id)) {}
  const std::string& task_id() const { return task_id_; }

 private:
  std::string task_id_;
};

// Structural precheck failure when assembling the joint model.
class ModelInfeasibleError : public Error {
 public:
  using Error::Error;
};

// The joint problem has no feasible point. `family` names the first violated
// constraint family in the order: connect, capacity, battery rate, airport power.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what, std::string family = {})
      : Error(what), family_(std::move(family)) {}
  const std::string& family() const { return family_; }

 private:
  std::string family_;
};

class ParseError : public Error {
 public:
  ParseError(long line, std::string column, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ", column '" + column +
              "': " + reason),
        line_(line),
        column_(std::move(column)),
        reason_(reason) {}
  long line() const { return line_; }
  const std::string& column() const { return column_; }
  const std::string& reason() const { return reason_; }

 private:
  long line_;
  std::string column_;
  std::string reason_;
};

// An arrival/departure pair that cannot belong to one aircraft.
class InconsistentPairError : public Error {
 public:
  explicit InconsistentPairError(std::string connect_id, const std::string& what)
      : Error(what), connect_id_(std::move(connect_id)) {}
  const std::string& connect_id() const { return connect_id_; }

 private:
  std::string connect_id_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace heasched
