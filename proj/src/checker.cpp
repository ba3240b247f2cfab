#include "textsql/checker.hpp"

#include <algorithm>
#include <vector>

#include "text_util.hpp"
#include "textsql/errors.hpp"
#include "textsql/sql_lexer.hpp"
#include "textsql/sql_parser.hpp"

namespace textsql {

namespace {

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }

// Spellings the trailing lexeme could still turn into, the lexeme itself first.
std::vector<std::string> closures(const SqlToken& last, const std::vector<SqlToken>& tokens,
                                  const SchemaCatalog* catalog) {
    std::vector<std::string> out;
    auto add = [&](std::string s) {
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
    };
    const std::string& w = last.lexeme;

    if (last.is_string()) {
        add(last.unterminated ? w + w.front() : w);
        return out;
    }
    if (last.kind == TokenKind::Operator) {
        add(w);
        for (const auto& op : operators()) {
            if (op.size() > w.size() && op.compare(0, w.size(), w) == 0) add(op);
        }
        return out;
    }
    if (w.empty() || !word_start(w.front())) {
        add(w);
        return out;
    }

    add(w);
    if (is_keyword(w)) add(w + "_");
    auto extends = [&](std::string_view name) {
        return name.size() > w.size() && detail::istarts_with(name, w);
    };
    for (const auto& kw : keywords()) {
        if (extends(kw)) add(kw);
    }
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (tokens[i].kind == TokenKind::Identifier && extends(tokens[i].lexeme)) add(tokens[i].lexeme);
    }
    if (catalog) {
        for (const auto& table : catalog->tables()) {
            if (extends(table.name)) add(table.name);
            for (const auto& column : table.columns) {
                if (extends(column.name)) add(column.name);
            }
        }
    }
    return out;
}

}  // namespace

const char* to_string(CheckLevel level) noexcept {
    switch (level) {
        case CheckLevel::Lexical: return "lexical";
        case CheckLevel::Grammatical: return "grammatical";
        case CheckLevel::Schema: return "schema";
    }
    return "?";
}

const char* to_string(Verdict verdict) noexcept {
    switch (verdict) {
        case Verdict::Accept: return "accept";
        case Verdict::Reject: return "reject";
        case Verdict::Complete: return "complete";
    }
    return "?";
}

CheckLevel parse_check_level(std::string_view name) {
    const auto n = detail::to_lower(name);
    if (n == "lexical") return CheckLevel::Lexical;
    if (n == "grammatical") return CheckLevel::Grammatical;
    if (n == "schema") return CheckLevel::Schema;
    throw Error(ErrorCode::Config, "unknown check level '" + std::string(name) + "'");
}

CheckerState::CheckerState(std::shared_ptr<const SchemaCatalog> catalog) : catalog_(std::move(catalog)) {
    if (!catalog_) catalog_ = std::make_shared<const SchemaCatalog>();
}

void CheckerState::set_level(CheckLevel level) {
    if (fed_) throw Error(ErrorCode::ConfigAfterFeed, "check level must be set before the first feed");
    level_ = level;
}

Verdict CheckerState::judge(const std::string& text) const {
    const auto tokens = lex(text);
    if (tokens.empty()) return Verdict::Accept;
    const bool open_tail = tokens.back().unterminated ||
                           (!detail::is_space(text.back()) && tokens.back().span.end == text.size());

    if (level_ == CheckLevel::Lexical) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!tokens[i].unknown) continue;
            const bool may_grow = i + 1 == tokens.size() && open_tail &&
                                  std::any_of(operators().begin(), operators().end(), [&](const std::string& op) {
                                      return op.size() > tokens[i].lexeme.size() &&
                                             op.compare(0, tokens[i].lexeme.size(), tokens[i].lexeme) == 0;
                                  });
            if (!may_grow) return Verdict::Reject;
        }
        return tokens.back().unterminated || tokens.back().unknown ? Verdict::Accept : Verdict::Complete;
    }

    const SchemaCatalog* catalog = level_ == CheckLevel::Schema ? catalog_.get() : nullptr;
    const auto as_is = parse_prefix(tokens, catalog);
    if (as_is.status == PrefixStatus::Complete && !tokens.back().unterminated) return Verdict::Complete;
    if (as_is.status == PrefixStatus::Viable) return Verdict::Accept;
    if (!open_tail) return Verdict::Reject;
    // Dead before the trailing lexeme: nothing appended to it can help.
    if (as_is.failed_token + 1 < tokens.size()) return Verdict::Reject;

    const auto& last = tokens.back();
    const std::string head = text.substr(0, last.span.begin);
    auto candidates = closures(last, tokens, catalog);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto alt = lex(head + candidates[i]);
        if (parse_prefix(alt, catalog).status != PrefixStatus::Dead) return Verdict::Accept;
    }
    // A quoted string stays open until its closing quote arrives.
    if (last.unterminated) {
        const auto alt = lex(head + candidates.front());
        if (parse_prefix(alt, catalog).status != PrefixStatus::Dead) return Verdict::Accept;
    }
    return Verdict::Reject;
}

Verdict CheckerState::feed(std::string_view piece) {
    fed_ = true;
    if (status_ == CheckerStatus::Dead) return Verdict::Reject;
    const std::size_t start = text_.size();
    text_.append(piece);
    const Verdict v = judge(text_);
    switch (v) {
        case Verdict::Reject:
            status_ = CheckerStatus::Dead;
            reject_offset_ = start;
            break;
        case Verdict::Complete: status_ = CheckerStatus::Complete; break;
        case Verdict::Accept: status_ = CheckerStatus::Open; break;
    }
    return v;
}

CheckerState new_checker(const SchemaCatalog& catalog) {
    return CheckerState(std::make_shared<const SchemaCatalog>(catalog));
}

CheckerState new_checker(std::shared_ptr<const SchemaCatalog> catalog) { return CheckerState(std::move(catalog)); }

CheckerState& check_level(CheckerState& state, CheckLevel level) {
    state.set_level(level);
    return state;
}

LineVerdict check_sql(std::string_view sql, const SchemaCatalog& catalog, CheckLevel level) {
    auto state = new_checker(catalog);
    state.set_level(level);
    LineVerdict out;
    if (sql.empty()) {
        out.verdict = state.feed("");
        return out;
    }
    for (std::size_t i = 0; i < sql.size(); ++i) {
        out.verdict = state.feed(sql.substr(i, 1));
        if (out.verdict == Verdict::Reject) break;
    }
    out.reject_offset = state.reject_offset();
    return out;
}

}  // namespace textsql
