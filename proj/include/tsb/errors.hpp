#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsb {

// Dataset / corpus errors
struct MalformedRecord : std::runtime_error {
    std::size_t line_no;
    MalformedRecord(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_no(line) {}
};

struct KindMismatch : std::runtime_error {
    std::size_t line_no;
    KindMismatch(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_no(line) {}
};

struct InsufficientTrain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Backend errors
struct EndpointError : std::runtime_error {
    int status;
    std::string body;
    EndpointError(int status_, std::string body_)
        : std::runtime_error("endpoint error: HTTP " + std::to_string(status_) + " " + body_),
          status(status_),
          body(std::move(body_)) {}
};

struct ScoringUnsupported : std::runtime_error {
    ScoringUnsupported() : std::runtime_error("backend does not support logprob scoring") {}
};

struct TokenizationMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric / aggregation errors
struct EmptyInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Harness errors
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IncompleteRun : std::runtime_error {
    std::vector<std::string> missing;
    explicit IncompleteRun(std::vector<std::string> missing_cells)
        : std::runtime_error("run incomplete: " + std::to_string(missing_cells.size()) +
                             " cells missing"),
          missing(std::move(missing_cells)) {}
};

}  // namespace tsb
