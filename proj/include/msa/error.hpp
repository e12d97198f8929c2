#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msa {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyLabel : public Error {
 public:
  EmptyLabel() : Error("empty label") {}
};

class UnknownLabel : public Error {
 public:
  explicit UnknownLabel(std::string label)
      : Error("unknown label '" + label + "'"), label_(std::move(label)) {}
  UnknownLabel(std::string label, std::vector<std::size_t> lines)
      : Error("unknown label '" + label + "' on " + describe(lines)),
        label_(std::move(label)),
        lines_(std::move(lines)) {}

  const std::string& label() const noexcept { return label_; }
  /// 1-based input lines carrying unknown labels, when raised by a parser.
  const std::vector<std::size_t>& lines() const noexcept { return lines_; }

 private:
  static std::string describe(const std::vector<std::size_t>& lines) {
    std::string out = lines.size() == 1 ? "line" : "lines";
    for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? ", " : " ") + std::to_string(lines[i]);
    return out;
  }

  std::string label_;
  std::vector<std::size_t> lines_;
};

/// Errors tied to a 1-based line of an input file.
class LineError : public Error {
 public:
  LineError(const std::string& what, std::size_t line_no)
      : Error("line " + std::to_string(line_no) + ": " + what), line_no_(line_no) {}
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class MalformedLine : public LineError {
 public:
  MalformedLine(std::size_t line_no, const std::string& detail)
      : LineError("malformed line: " + detail, line_no) {}
};

class NonMonotonicTimes : public Error {
 public:
  using Error::Error;
};

class SchemaError : public LineError {
 public:
  SchemaError(std::size_t line_no, const std::string& detail)
      : LineError("schema error: " + detail, line_no) {}
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Raised when a value would violate a type invariant (Segment, Annotation, configs).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateSpan : public Error {
 public:
  using Error::Error;
};

class EmptyReference : public Error {
 public:
  EmptyReference() : Error("reference has no labeled frames") {}
};

class DurationMismatch : public Error {
 public:
  using Error::Error;
};

class TooFewSongs : public Error {
 public:
  using Error::Error;
};

class UnknownDataset : public Error {
 public:
  explicit UnknownDataset(const std::string& name) : Error("unknown dataset '" + name + "'") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace msa
