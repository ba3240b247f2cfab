#pragma once

#include <stdexcept>
#include <string>

namespace textsql {

enum class ErrorCode {
    Parse,            // malformed input file
    Integrity,        // catalog invariant violated
    Syntax,           // SQL syntax error
    Resolution,       // unknown table / column / alias
    EmptyQuestion,
    UnknownEntity,    // description names a missing table or column
    UnknownDbId,
    DbUnavailable,
    GoldParse,        // gold SQL does not parse against its catalog
    Alignment,        // predictions not aligned with examples
    NotAFailure,      // triage asked to classify a correct pair
    ConfigAfterFeed,
    Config,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Syntax and resolution failures carry the byte span of the offending token.
class SqlError : public Error {
public:
    SqlError(ErrorCode code, const std::string& message, std::size_t begin, std::size_t end)
        : Error(code, message), begin_(begin), end_(end) {}

    std::size_t begin() const noexcept { return begin_; }
    std::size_t end() const noexcept { return end_; }

private:
    std::size_t begin_;
    std::size_t end_;
};

}  // namespace textsql
