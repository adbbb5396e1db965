#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace chartattrib {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class MalformedHtml : public Error {
 public:
  using Error::Error;
};

class RaggedRows : public Error {
 public:
  using Error::Error;
};

class InvalidTable : public Error {
 public:
  using Error::Error;
};

class ImageDecodeError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

class MockMiss : public Error {
 public:
  using Error::Error;
};

/// All repair attempts produced invalid output; carries every raw attempt.
class StructuredOutputExhausted : public Error {
 public:
  StructuredOutputExhausted(const std::string& msg, std::vector<std::string> attempts)
      : Error(msg), attempts_(std::move(attempts)) {}
  const std::vector<std::string>& attempts() const { return attempts_; }

 private:
  std::vector<std::string> attempts_;
};

class CacheMiss : public Error {
 public:
  CacheMiss(const std::string& msg, std::string key) : Error(msg), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class ExtractionFailed : public Error {
 public:
  using Error::Error;
};

class DetectorFailure : public Error {
 public:
  using Error::Error;
};

class UnrenderableTable : public Error {
 public:
  using Error::Error;
};

class AllZeroValues : public UnrenderableTable {
 public:
  using UnrenderableTable::UnrenderableTable;
};

class ZeroSum : public UnrenderableTable {
 public:
  using UnrenderableTable::UnrenderableTable;
};

class ColorCollision : public Error {
 public:
  using Error::Error;
};

class MissingGroundTruth : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chartattrib
