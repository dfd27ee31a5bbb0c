#pragma once

#include <stdexcept>
#include <string>

namespace roadnoise {

// Error taxonomy shared across the library. Argument violations use
// std::invalid_argument directly; everything below is a runtime failure
// with a stable, machine-parsable prefix in what().

class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg)
        : std::runtime_error("format error: " + msg) {}
};

class UnsupportedCodecError : public std::runtime_error {
public:
    explicit UnsupportedCodecError(const std::string& msg)
        : std::runtime_error("unsupported codec: " + msg) {}
};

class EmptyInputError : public std::runtime_error {
public:
    explicit EmptyInputError(const std::string& msg)
        : std::runtime_error("empty input: " + msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg)
        : std::runtime_error("i/o error: " + msg) {}
};

class TrainingDivergedError : public std::runtime_error {
public:
    explicit TrainingDivergedError(const std::string& msg)
        : std::runtime_error("training diverged: " + msg) {}
};

class InsufficientDataError : public std::runtime_error {
public:
    explicit InsufficientDataError(const std::string& msg)
        : std::runtime_error("insufficient data: " + msg) {}
};

class InvalidCorpusError : public std::runtime_error {
public:
    explicit InvalidCorpusError(const std::string& msg)
        : std::runtime_error("invalid corpus: " + msg) {}
};

class GenerationError : public std::runtime_error {
public:
    explicit GenerationError(const std::string& msg)
        : std::runtime_error("generation error: " + msg) {}
};

} // namespace roadnoise
