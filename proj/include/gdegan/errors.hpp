#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gdegan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// geom
class NormalizationError : public Error { public: using Error::Error; };
class UnsupportedDegree : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };

// protein / embeddings
class EmptyStructure : public Error { public: using Error::Error; };
class MissingLigand : public Error { public: using Error::Error; };
class EmptyEmbedding : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class TruncatedFile : public Error { public: using Error::Error; };

class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

class KeyMismatch : public Error {
public:
  explicit KeyMismatch(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const noexcept { return missing_; }

private:
  std::vector<std::string> missing_;
};

// model
class ShapeError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class DivergenceError : public Error { public: using Error::Error; };
class CorruptCheckpoint : public Error { public: using Error::Error; };

// pocket / eval
class EmptyInput : public Error { public: using Error::Error; };
class EmptyLigand : public Error { public: using Error::Error; };
class DegenerateGroup : public Error { public: using Error::Error; };

// files
class IoError : public Error { public: using Error::Error; };

}  // namespace gdegan
