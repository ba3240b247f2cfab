#pragma once

#include <span>
#include <string_view>

#include "textsql/catalog.hpp"
#include "textsql/sql_ast.hpp"

namespace textsql {

/// Parses one statement (optionally terminated by ';') and resolves every
/// column reference against the catalog. Throws SqlError with code Syntax or
/// Resolution; never guesses.
SqlAst parse_sql(std::string_view text, const SchemaCatalog& catalog);

/// Grammar-only parse: no table or column resolution.
SqlAst parse_sql_unresolved(std::string_view text);

/// How far a token prefix gets through the grammar.
enum class PrefixStatus {
    Viable,    // input ran out while a continuation is still possible
    Complete,  // the tokens form a full statement
    Dead,      // no continuation can succeed
};

struct PrefixResult {
    PrefixStatus status = PrefixStatus::Viable;
    /// Index of the token that killed the prefix when Dead.
    std::size_t failed_token = 0;
};

/// Runs the statement parser over tokens that may be cut short. With a catalog
/// every name check is applied as soon as it is decidable; checks that depend
/// on later input only reject names that no completion could make valid.
PrefixResult parse_prefix(std::span<const SqlToken> tokens, const SchemaCatalog* catalog);

}  // namespace textsql
