#include <algorithm>
#include <cctype>
#include <map>

#include "text_util.hpp"
#include "textsql/errors.hpp"
#include "textsql/serializer.hpp"

namespace textsql {

namespace {

struct Token {
    std::string text;
    std::size_t begin;
    std::size_t end;
};

// Lowercased alphanumeric runs with their byte offsets in the source text.
std::vector<Token> match_tokens(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isalnum(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
        out.push_back({detail::to_lower(text.substr(start, i - start)), start, i});
    }
    return out;
}

std::size_t lcs_length(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (char ca : a) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = ca == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

double ratio(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    return 2.0 * static_cast<double>(lcs_length(a, b)) / static_cast<double>(a.size() + b.size());
}

std::string quote_ident(std::string_view name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string cell_text(const Cell& cell) {
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
    return {};
}

}  // namespace

std::string normalize_for_match(std::string_view text) {
    std::string out;
    for (const auto& tok : match_tokens(text)) {
        if (!out.empty()) out += ' ';
        out += tok.text;
    }
    return out;
}

double similarity(std::string_view a, std::string_view b) {
    return ratio(normalize_for_match(a), normalize_for_match(b));
}

std::vector<AnchorMatch> extract_anchors(std::string_view question, const SchemaCatalog& catalog, const Database& db,
                                         const AnchorConfig& config) {
    const auto q = match_tokens(question);
    std::vector<AnchorMatch> all;
    if (q.empty() || config.max_per_column == 0) return all;

    for (const auto& table : catalog.tables()) {
        for (const auto& column : table.columns) {
            if (column.value_type != ValueType::Text) continue;
            const auto sql = "SELECT DISTINCT " + quote_ident(column.name) + " FROM " + quote_ident(table.name) +
                             " WHERE " + quote_ident(column.name) + " IS NOT NULL";
            const auto result = db.execute(sql);
            if (!result.ok()) {
                throw Error(ErrorCode::DbUnavailable,
                            "cannot read " + table.name + "." + column.name + ": " + *result.error);
            }

            std::vector<AnchorMatch> found;
            for (const auto& row : result.rows) {
                const auto value = cell_text(row.at(0));
                const auto cell = normalize_for_match(value);
                if (cell.empty()) continue;
                const std::size_t width = static_cast<std::size_t>(std::count(cell.begin(), cell.end(), ' ')) + 1;

                AnchorMatch best;
                for (std::size_t w = width > 1 ? width - 1 : 1; w <= width + 1 && w <= q.size(); ++w) {
                    for (std::size_t start = 0; start + w <= q.size(); ++start) {
                        std::string window = q[start].text;
                        for (std::size_t k = start + 1; k < start + w; ++k) window += ' ' + q[k].text;
                        const double bound = 2.0 * static_cast<double>(std::min(window.size(), cell.size())) /
                                             static_cast<double>(window.size() + cell.size());
                        if (bound < config.threshold || bound <= best.score) continue;
                        const double score = ratio(window, cell);
                        const bool better = score > best.score ||
                                            (score == best.score && q[start].begin < best.question_begin);
                        if (score >= config.threshold && better) {
                            best = {q[start].begin, q[start + w - 1].end, table.name, column.name, value, score};
                        }
                    }
                }
                if (best.score > 0.0) found.push_back(std::move(best));
            }
            std::stable_sort(found.begin(), found.end(), [](const AnchorMatch& a, const AnchorMatch& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.question_begin != b.question_begin) return a.question_begin < b.question_begin;
                return a.cell_value < b.cell_value;
            });
            if (found.size() > config.max_per_column) found.resize(config.max_per_column);
            all.insert(all.end(), found.begin(), found.end());
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const AnchorMatch& a, const AnchorMatch& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.question_begin < b.question_begin;
    });
    return all;
}

}  // namespace textsql
