#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sage {

// Error taxonomy shared by all modules. Categories map to process exit
// codes in the CLI: config -> 2, data -> 3, numerical -> 4.
enum class ErrorKind {
    parse,
    schema,
    duplicate_id,
    io,
    invariant,
    config,
    empty_input,
    zero_norm,
    dim,
    format,
    truncation,
    missing_embedding,
    degenerate_group,
    degenerate_input,
    vocab,
    numerical,
};

enum class ErrorCategory { config, data, numerical };

constexpr ErrorCategory category_of(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config:
            return ErrorCategory::config;
        case ErrorKind::numerical:
            return ErrorCategory::numerical;
        default:
            return ErrorCategory::data;
    }
}

constexpr int exit_code_for(ErrorKind kind) {
    switch (category_of(kind)) {
        case ErrorCategory::config:
            return 2;
        case ErrorCategory::numerical:
            return 4;
        default:
            return 3;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_of(kind_); }

private:
    ErrorKind kind_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg, std::size_t line = 0)
        : Error(ErrorKind::parse, line ? "line " + std::to_string(line) + ": " + msg : msg),
          line_number(line) {}
    std::size_t line_number;
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& msg, std::size_t line = 0)
        : Error(ErrorKind::schema, line ? "line " + std::to_string(line) + ": " + msg : msg),
          line_number(line) {}
    std::size_t line_number;
};

struct DuplicateId : Error {
    explicit DuplicateId(const std::string& id)
        : Error(ErrorKind::duplicate_id, "duplicate id: " + id), id(id) {}
    std::string id;
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorKind::io, msg) {}
};

struct InvariantError : Error {
    explicit InvariantError(const std::string& msg) : Error(ErrorKind::invariant, msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(ErrorKind::config, msg) {}
};

struct EmptyInputError : Error {
    explicit EmptyInputError(const std::string& msg) : Error(ErrorKind::empty_input, msg) {}
};

struct ZeroNormError : Error {
    explicit ZeroNormError(const std::string& msg = "zero-norm vector")
        : Error(ErrorKind::zero_norm, msg) {}
};

struct DimError : Error {
    explicit DimError(const std::string& msg) : Error(ErrorKind::dim, msg) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(ErrorKind::format, msg) {}
};

struct TruncationError : Error {
    explicit TruncationError(std::size_t offset)
        : Error(ErrorKind::truncation, "unexpected end of data at byte " + std::to_string(offset)),
          offset(offset) {}
    std::size_t offset;
};

struct MissingEmbedding : Error {
    explicit MissingEmbedding(const std::string& id)
        : Error(ErrorKind::missing_embedding, "no embedding for id: " + id), id(id) {}
    std::string id;
};

struct DegenerateGroup : Error {
    explicit DegenerateGroup(const std::string& msg) : Error(ErrorKind::degenerate_group, msg) {}
};

struct DegenerateInput : Error {
    explicit DegenerateInput(const std::string& msg) : Error(ErrorKind::degenerate_input, msg) {}
};

struct VocabError : Error {
    explicit VocabError(const std::string& msg) : Error(ErrorKind::vocab, msg) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& msg) : Error(ErrorKind::numerical, msg) {}
};

}  // namespace sage
