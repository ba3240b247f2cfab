#include "textsql/sql_lexer.hpp"

#include <algorithm>

#include "text_util.hpp"

namespace textsql {

namespace {

const std::vector<std::string> kKeywords = {
    "SELECT", "FROM",   "WHERE",  "GROUP",     "BY",     "HAVING", "ORDER", "LIMIT", "ASC",   "DESC",
    "DISTINCT", "AS",   "JOIN",   "ON",        "AND",    "OR",     "NOT",   "IN",    "LIKE",  "BETWEEN",
    "IS",     "NULL",   "EXISTS", "UNION",     "INTERSECT", "EXCEPT", "COUNT", "SUM", "MIN",  "MAX",
    "AVG",
};

// Longest first so maximal munch works by scanning in order.
const std::vector<std::string> kOperators = {"!=", "<>", "<=", ">=", "=", "<", ">", "+", "-", "*", "/"};

}  // namespace

const char* to_string(TokenKind kind) noexcept {
    switch (kind) {
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Identifier: return "identifier";
        case TokenKind::Literal: return "literal";
        case TokenKind::Operator: return "operator";
        case TokenKind::Punctuation: return "punctuation";
    }
    return "punctuation";
}

bool is_keyword(std::string_view word) {
    const std::string upper = detail::to_upper(word);
    return std::find(kKeywords.begin(), kKeywords.end(), upper) != kKeywords.end();
}

const std::vector<std::string>& keywords() { return kKeywords; }
const std::vector<std::string>& operators() { return kOperators; }

bool SqlToken::is_keyword(std::string_view upper) const {
    return kind == TokenKind::Keyword && detail::iequals(lexeme, upper);
}

bool SqlToken::is_string() const {
    return kind == TokenKind::Literal && !lexeme.empty() && (lexeme[0] == '\'' || lexeme[0] == '"');
}

bool SqlToken::is_number() const { return kind == TokenKind::Literal && !is_string(); }

std::vector<SqlToken> lex(std::string_view text) {
    std::vector<SqlToken> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto emit = [&](TokenKind kind, std::size_t begin, std::size_t end) {
        tokens.push_back(SqlToken{kind, std::string(text.substr(begin, end - begin)), {begin, end}});
    };

    while (i < n) {
        const char c = text[i];
        if (detail::is_space(c)) {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < n && detail::is_word_char(text[i])) ++i;
            const auto word = text.substr(begin, i - begin);
            emit(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, begin, i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (i < n && text[i] == '.') {
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            }
            emit(TokenKind::Literal, begin, i);
            continue;
        }
        if (c == '\'' || c == '"') {
            ++i;
            bool closed = false;
            while (i < n) {
                if (text[i] == c) {
                    if (i + 1 < n && text[i + 1] == c) {
                        i += 2;  // doubled quote escape
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                ++i;
            }
            emit(TokenKind::Literal, begin, i);
            tokens.back().unterminated = !closed;
            continue;
        }
        if (c == '(' || c == ')' || c == ',' || c == '.' || c == ';') {
            ++i;
            emit(TokenKind::Punctuation, begin, i);
            continue;
        }
        bool matched = false;
        for (const auto& op : kOperators) {
            if (text.substr(i, op.size()) == op) {
                i += op.size();
                emit(TokenKind::Operator, begin, i);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        ++i;
        emit(TokenKind::Operator, begin, i);
        // A lone '!' may still become '!=' once more input arrives; it is unknown only as-is.
        tokens.back().unknown = true;
    }
    return tokens;
}

}  // namespace textsql
