#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "textsql/errors.hpp"
#include "textsql/serializer.hpp"

using namespace textsql;
using textsql::testing::spider;
using textsql::testing::spider_catalogs;

namespace {

SchemaCatalog make(std::string db, std::vector<TableDef> tables, std::vector<ForeignKey> fks) {
    for (auto& fk : fks) {
        SchemaCatalog draft(db, tables, {});
        fk.kind = classify_relation(fk, draft);
    }
    return SchemaCatalog(std::move(db), std::move(tables), std::move(fks));
}

TableDef table(std::string name, std::vector<std::string> columns, std::vector<std::string> pk) {
    TableDef t{std::move(name), {}, std::move(pk)};
    for (auto& c : columns) t.columns.push_back({std::move(c), ValueType::Text});
    return t;
}

std::vector<Segment> of_kind(const SerializedInput& in, SegmentKind kind) {
    std::vector<Segment> out;
    std::copy_if(in.segments.begin(), in.segments.end(), std::back_inserter(out),
                 [&](const Segment& s) { return s.kind == kind; });
    return out;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

void expect_tiling(const SerializedInput& in) {
    std::size_t cursor = 0;
    for (const auto& s : in.segments) {
        ASSERT_LE(cursor, s.begin);
        ASSERT_LT(s.begin, s.end);
        ASSERT_LE(s.end, in.text.size());
        const auto gap = in.text.substr(cursor, s.begin - cursor);
        EXPECT_TRUE(gap.find_first_not_of(" |:,()") == std::string::npos) << "gap '" << gap << "'";
        cursor = s.end;
    }
    EXPECT_TRUE(in.text.substr(cursor).find_first_not_of(" )") == std::string::npos);
}

// city.country -> country.id, many cities per country.
SchemaCatalog city_country() {
    return make("geo", {table("country", {"id", "name"}, {"id"}), table("city", {"id", "name", "country"}, {"id"})},
                {{"city", "country", "country", "id"}});
}

}  // namespace

TEST(Baseline, MinimalCatalog) {
    auto cat = make("db", {table("t", {"c"}, {})}, {});
    EXPECT_EQ(serialize_baseline("q", cat).text, "q | db | t : c");
}

TEST(Baseline, MatchesGoldens) {
    auto rows = textsql::testing::read_jsonl(textsql::testing::fixtures_dir() / "oracle" / "serialization_goldens.jsonl");
    ASSERT_GE(rows.size(), 40u);
    std::set<std::string> dbs;
    for (const auto& row : rows) {
        const auto db = row["db_id"].get<std::string>();
        dbs.insert(db);
        EXPECT_EQ(serialize_baseline(row["question"].get<std::string>(), spider(db)).text, row["text"].get<std::string>());
    }
    EXPECT_GE(dbs.size(), 10u);
}

TEST(Baseline, QuestionKeptSchemaLowercased) {
    auto in = serialize_baseline("How many Singers?", spider("concert_singer"));
    EXPECT_EQ(in.text.rfind("How many Singers? | concert_singer | stadium : stadium_id , location", 0), 0u);
    EXPECT_NE(in.text.find("singer_in_concert : concert_id , singer_id"), std::string::npos);
}

TEST(Baseline, EmptyQuestionRejected) {
    for (const char* q : {"", "   ", "\t\n"}) {
        try {
            serialize_baseline(q, spider("concert_singer"));
            FAIL() << "accepted '" << q << "'";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::EmptyQuestion);
        }
    }
}

TEST(Baseline, SegmentsTileAndCarryNames) {
    for (const auto& cat : spider_catalogs()) {
        auto in = serialize_baseline("what?", cat);
        expect_tiling(in);
        EXPECT_TRUE(of_kind(in, SegmentKind::FkMarker).empty());
        EXPECT_TRUE(of_kind(in, SegmentKind::Description).empty());
        ASSERT_EQ(of_kind(in, SegmentKind::Table).size(), cat.tables().size());
        std::size_t columns = 0;
        for (const auto& t : cat.tables()) columns += t.columns.size();
        EXPECT_EQ(of_kind(in, SegmentKind::Column).size(), columns);
        for (const auto& s : of_kind(in, SegmentKind::Column)) {
            ASSERT_NE(cat.find_column(s.table, s.column), nullptr);
        }
        EXPECT_EQ(in.slice(in.segments[0]), "what?");
        EXPECT_EQ(in.slice(in.segments[1]), cat.db_id());
    }
}

TEST(Baseline, Deterministic) {
    const auto& cat = spider("world_1");
    EXPECT_EQ(serialize_baseline("x", cat), serialize_baseline("x", cat));
}

TEST(ForeignKeyScheme, OneToManyMarkedOnManySide) {
    auto in = serialize_fk("q", city_country());
    EXPECT_EQ(in.text, "q | geo | country : id , name | city : id , name , country foreign key country");
    auto markers = of_kind(in, SegmentKind::FkMarker);
    ASSERT_EQ(markers.size(), 1u);
    EXPECT_EQ(markers[0].table, "city");
    EXPECT_EQ(markers[0].column, "country");
    EXPECT_EQ(markers[0].target, "country");
}

TEST(ForeignKeyScheme, OneToOneBothKeysMarkedTwice) {
    auto cat = make("hr", {table("person", {"id", "name"}, {"id"}), table("employee", {"id", "salary"}, {"id"})},
                    {{"employee", "id", "person", "id"}});
    ASSERT_EQ(cat.foreign_keys()[0].kind, RelationKind::OneToOne);
    auto in = serialize_fk("q", cat);
    EXPECT_EQ(in.text, "q | hr | person : id foreign key employee , name | employee : id foreign key person , salary");
    EXPECT_EQ(of_kind(in, SegmentKind::FkMarker).size(), 2u);
    EXPECT_EQ(expected_marker_count(cat.foreign_keys()[0], cat), 2u);
}

TEST(ForeignKeyScheme, OneToOneWithNonKeyEndMarkedOnce) {
    // badge.holder is badge's key and references the non-key person.code.
    auto cat = make("club", {table("person", {"id", "code"}, {"id"}), table("badge", {"holder", "color"}, {"holder"})},
                    {{"badge", "holder", "person", "code"}});
    ASSERT_EQ(cat.foreign_keys()[0].kind, RelationKind::OneToOne);
    auto in = serialize_fk("q", cat);
    EXPECT_EQ(in.text, "q | club | person : id , code foreign key badge | badge : holder , color");
    EXPECT_EQ(expected_marker_count(cat.foreign_keys()[0], cat), 1u);
}

TEST(ForeignKeyScheme, NoKeysEqualsBaseline) {
    auto cat = make("db", {table("a", {"x", "y"}, {"x"}), table("b", {"z"}, {})}, {});
    EXPECT_EQ(serialize_fk("q", cat).text, serialize_baseline("q", cat).text);
}

TEST(ForeignKeyScheme, MarkersFollowFormulaOnFixtures) {
    for (const auto& cat : spider_catalogs()) {
        auto in = serialize_fk("q", cat);
        std::size_t expected = 0;
        for (const auto& fk : cat.foreign_keys()) expected += expected_marker_count(fk, cat);
        EXPECT_EQ(of_kind(in, SegmentKind::FkMarker).size(), expected) << cat.db_id();
        EXPECT_EQ(count_of(in.text, " foreign key "), expected) << cat.db_id();
        expect_tiling(in);
    }
}

TEST(ForeignKeyScheme, MarkerTargetsAreTables) {
    for (const auto& cat : spider_catalogs()) {
        auto in = serialize_fk("q", cat);
        std::set<std::string> tables;
        for (const auto& s : of_kind(in, SegmentKind::Table)) tables.insert(std::string(in.slice(s)));
        for (const auto& m : of_kind(in, SegmentKind::FkMarker)) {
            const auto text = std::string(in.slice(m));
            ASSERT_EQ(text.rfind("foreign key ", 0), 0u);
            EXPECT_TRUE(tables.count(text.substr(12))) << text;
        }
    }
}

TEST(ForeignKeyScheme, RemovingMarkersGivesBaseline) {
    for (const auto& cat : spider_catalogs()) {
        auto fk = serialize_fk("Which ones?", cat);
        std::string stripped;
        std::size_t cursor = 0;
        for (const auto& m : of_kind(fk, SegmentKind::FkMarker)) {
            stripped += fk.text.substr(cursor, m.begin - 1 - cursor);  // drop the joining space
            cursor = m.end;
        }
        stripped += fk.text.substr(cursor);
        EXPECT_EQ(stripped, serialize_baseline("Which ones?", cat).text) << cat.db_id();
    }
}

TEST(DescriptionScheme, BooleanColumnExplained) {
    auto store = load_descriptions(textsql::testing::descriptions_path());
    auto in = serialize_sd("How many active customers?", spider("sakila_1"), store);
    const auto marker = in.text.find(" | description | ");
    ASSERT_NE(marker, std::string::npos);
    EXPECT_NE(in.text.find("customer : store customers and their account state , active : 1 if the customer account "
                           "is active, 0 otherwise",
                           marker),
              std::string::npos);
    std::vector<std::size_t> positions;
    for (const auto& t : spider("sakila_1").tables()) {
        if (t.name == "customer" || t.name == "film" || t.name == "payment") {
            positions.push_back(in.text.find("| " + t.name + " :", marker));
        }
    }
    ASSERT_EQ(positions.size(), 3u);
    EXPECT_TRUE(std::is_sorted(positions.begin(), positions.end()));
    EXPECT_NE(positions.back(), std::string::npos);
    expect_tiling(in);
}

TEST(DescriptionScheme, BaselineIsPrefix) {
    auto store = load_descriptions(textsql::testing::descriptions_path());
    for (const auto& cat : spider_catalogs()) {
        auto base = serialize_baseline("q?", cat).text;
        auto sd = serialize_sd("q?", cat, store).text;
        EXPECT_EQ(sd.rfind(base + " | description", 0), 0u) << cat.db_id();
    }
}

TEST(DescriptionScheme, EmptyStoreLeavesBareMarker) {
    DescriptionStore store;
    const auto& cat = spider("concert_singer");
    EXPECT_EQ(serialize_sd("q", cat, store).text, serialize_baseline("q", cat).text + " | description");
    EXPECT_EQ(serialize("q", cat, Scheme::Sd, nullptr).text, serialize_baseline("q", cat).text + " | description");
}

TEST(DescriptionScheme, DescriptionSegmentsMarked) {
    auto store = load_descriptions(textsql::testing::descriptions_path());
    auto in = serialize_sd("q", spider("world_1"), store);
    auto descs = of_kind(in, SegmentKind::Description);
    ASSERT_EQ(descs.size(), 4u);  // marker, one table text, two column texts
    EXPECT_EQ(in.slice(descs[0]), "description");
    for (const auto& s : in.segments) EXPECT_EQ(s.in_description, s.begin >= descs[0].begin);
}

TEST(DescriptionScheme, UnknownEntityRejected) {
    auto bad_column = load_descriptions_from_string(R"({"sakila_1": {"columns": {"customer.shoe_size": "x"}}})");
    auto bad_table = load_descriptions_from_string(R"({"sakila_1": {"tables": {"ghosts": "x"}}})");
    for (const auto* store : {&bad_column, &bad_table}) {
        try {
            serialize_sd("q", spider("sakila_1"), *store);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::UnknownEntity);
        }
        EXPECT_EQ(validate_descriptions(store->for_db("sakila_1"), spider("sakila_1")).size(), 1u);
    }
}

TEST(DescriptionScheme, MalformedStoreIsParseError) {
    for (const char* text : {"[1]", "{\"db\": 3}", "{\"db\": {\"columns\": {\"nodot\": \"x\"}}}", "{oops"}) {
        try {
            load_descriptions_from_string(text);
            FAIL() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::Parse) << text;
        }
    }
}

TEST(Scheme, NamesRoundTrip) {
    for (auto s : {Scheme::Baseline, Scheme::Fk, Scheme::Sd}) EXPECT_EQ(parse_scheme(to_string(s)), s);
    EXPECT_THROW(parse_scheme("docu"), Error);
}
