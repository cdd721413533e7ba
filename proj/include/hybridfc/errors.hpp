#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hybridfc {

// Invalid configuration values (bad dimensions, empty inputs, unknown keys).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke a documented precondition (width mismatch, batch too small).
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Malformed input data; carries the 1-based line/column where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ", col " +
                             std::to_string(column) + ")"),
          line(line),
          column(column) {}

    std::size_t line;
    std::size_t column;
};

// An entity or relation has no vector in the embedding model.
class MissingEmbedding : public std::runtime_error {
public:
    explicit MissingEmbedding(const std::string& iri)
        : std::runtime_error("no embedding for <" + iri + ">"), iri(iri) {}

    std::string iri;
};

// A metric is undefined for the given input (single-class labels, too few pairs).
class MetricError : public std::runtime_error {
public:
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hybridfc
