#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fse {

// Exit-code contract: 0 success, 1 usage, 2 data error, 3 numeric failure.
class Error : public std::runtime_error {
 public:
  Error(std::string msg, int exit_code)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(std::string msg) : Error(std::move(msg), 1) {}
};

class DataError : public Error {
 public:
  explicit DataError(std::string msg) : Error(std::move(msg), 2) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(std::string msg) : Error(std::move(msg), 3) {}
};

class UnbalancedDelimiter : public DataError {
 public:
  UnbalancedDelimiter(std::string msg, std::size_t offset)
      : DataError(std::move(msg)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ParseError : public DataError {
 public:
  ParseError(std::string msg, std::size_t token_index, std::string expected)
      : DataError(msg + " (token " + std::to_string(token_index) +
                  ", expected " + expected + ")"),
        token_index_(token_index),
        expected_(std::move(expected)) {}
  std::size_t token_index() const noexcept { return token_index_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t token_index_;
  std::string expected_;
};

// Wraps a ParseError (or delimiter error) with the offending span in the
// surrounding raw exercise text.
class NormalizationError : public DataError {
 public:
  NormalizationError(std::string msg, std::size_t span_offset,
                     std::size_t span_length)
      : DataError(msg + " (span " + std::to_string(span_offset) + "+" +
                  std::to_string(span_length) + ")"),
        span_offset_(span_offset),
        span_length_(span_length) {}
  std::size_t span_offset() const noexcept { return span_offset_; }
  std::size_t span_length() const noexcept { return span_length_; }

 private:
  std::size_t span_offset_;
  std::size_t span_length_;
};

class SchemaError : public DataError {
 public:
  SchemaError(std::string msg, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public DataError {
 public:
  explicit DuplicateId(const std::string& id)
      : DataError("duplicate exercise id: " + id) {}
};

class UnknownId : public DataError {
 public:
  explicit UnknownId(const std::string& id)
      : DataError("unknown exercise id: " + id) {}
};

class MissingAnalysis : public DataError {
 public:
  explicit MissingAnalysis(const std::string& id)
      : DataError("exercise has empty analysis: " + id) {}
};

class EmptyInput : public DataError {
 public:
  explicit EmptyInput(std::string what) : DataError("empty input: " + std::move(what)) {}
};

class EmptyBatch : public DataError {
 public:
  EmptyBatch() : DataError("empty task batch") {}
};

class EmptyCorpus : public DataError {
 public:
  EmptyCorpus() : DataError("empty corpus") {}
};

class TooFewSeeds : public DataError {
 public:
  TooFewSeeds(std::size_t seeds, std::size_t folds)
      : DataError("cross-validation needs at least as many seed ids as folds: " +
                  std::to_string(seeds) + " seeds < " + std::to_string(folds) +
                  " folds") {}
};

class MissingClass : public DataError {
 public:
  explicit MissingClass(int label)
      : DataError("no probability records with noisy label " +
                  std::to_string(label)) {}
};

class DimensionMismatch : public DataError {
 public:
  explicit DimensionMismatch(std::string msg)
      : DataError("dimension mismatch: " + std::move(msg)) {}
};

class InvalidSimplexPoint : public DataError {
 public:
  explicit InvalidSimplexPoint(std::string msg)
      : DataError("invalid simplex point: " + std::move(msg)) {}
};

class InsufficientCandidates : public DataError {
 public:
  InsufficientCandidates(const std::string& seed_id, std::size_t have,
                         std::size_t need)
      : DataError("seed " + seed_id + " has " + std::to_string(have) +
                  " candidates, needs " + std::to_string(need)) {}
};

class InvalidSpec : public DataError {
 public:
  explicit InvalidSpec(std::string msg)
      : DataError("invalid synthetic spec: " + std::move(msg)) {}
};

class NoConceptPeer : public DataError {
 public:
  explicit NoConceptPeer(const std::string& id)
      : DataError("no concept-sharing peer for exercise: " + id) {}
};

}  // namespace fse
