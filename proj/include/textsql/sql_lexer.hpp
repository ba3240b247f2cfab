#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace textsql {

enum class TokenKind { Keyword, Identifier, Literal, Operator, Punctuation };

const char* to_string(TokenKind kind) noexcept;

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Span&) const = default;
};

struct SqlToken {
    TokenKind kind = TokenKind::Punctuation;
    std::string lexeme;
    Span span;
    /// Character outside the dialect's alphabet; lexed as a one-byte operator.
    bool unknown = false;
    /// String literal whose closing quote has not been seen.
    bool unterminated = false;

    bool is_keyword(std::string_view upper) const;
    bool is_punct(std::string_view p) const { return kind == TokenKind::Punctuation && lexeme == p; }
    bool is_operator(std::string_view op) const { return kind == TokenKind::Operator && lexeme == op; }
    bool is_string() const;
    bool is_number() const;

    bool operator==(const SqlToken&) const = default;
};

/// Total over arbitrary input. Keywords are matched case-insensitively; the
/// lexeme keeps the source spelling.
std::vector<SqlToken> lex(std::string_view text);

/// True for reserved words of the dialect (uppercase comparison).
bool is_keyword(std::string_view word);

/// All reserved words, uppercase.
const std::vector<std::string>& keywords();

/// Operators the dialect accepts (unknown single characters excluded).
const std::vector<std::string>& operators();

}  // namespace textsql
