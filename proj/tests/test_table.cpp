#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "finality/error.hpp"
#include "finality/table.hpp"

using namespace finality;
namespace fs = std::filesystem;

namespace {

std::vector<Column> schema() {
    return {{"delay", ColumnKind::Real}, {"depth", ColumnKind::Integer}, {"name", ColumnKind::Text}};
}

fs::path scratch_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / ("finality_table_" + std::string(name));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("emit_csv layout") {
    Table t(schema());
    CHECK(to_csv(t) == "delay,depth,name\n");

    t.add_row({1.5, std::int64_t{3}, std::string("plain")});
    CHECK(to_csv(t) == "delay,depth,name\n1.5,3,plain\n");

    t.add_row({0.1, std::int64_t{-2}, std::string("has,comma \"q\"")});
    CHECK(to_csv(t) == "delay,depth,name\n1.5,3,plain\n0.10000000000000001,-2,\"has,comma \"\"q\"\"\"\n");

    std::ostringstream os;
    const std::size_t written = emit_csv(t, os);
    CHECK(written == os.str().size());
    CHECK(os.str() == to_csv(t));

    CHECK_THROWS_AS(t.add_row({1.0, 2.0, std::string("x")}), InvalidArgument);
    CHECK_THROWS_AS(t.add_row({1.0}), InvalidArgument);
}

TEST_CASE("sort_rows orders by leading keys") {
    Table t(schema());
    t.add_row({2.0, std::int64_t{1}, std::string("c")});
    t.add_row({1.0, std::int64_t{2}, std::string("b")});
    t.add_row({1.0, std::int64_t{1}, std::string("a")});
    t.sort_rows(2);
    CHECK(t.text(0, 2) == "a");
    CHECK(t.text(1, 2) == "b");
    CHECK(t.text(2, 2) == "c");
}

TEST_CASE("parse_csv") {
    const auto t = parse_csv("delay,depth,name\r\n1e-3,7,\"multi\nline\"\r\n", schema());
    REQUIRE(t.size() == 1);
    CHECK(t.real(0, 0) == 1e-3);
    CHECK(t.integer(0, 1) == 7);
    CHECK(t.text(0, 2) == "multi\nline");

    CHECK_THROWS_AS(parse_csv("", schema()), ParseError);
    CHECK_THROWS_AS(parse_csv("delay,depth\n", schema()), ParseError);
    CHECK_THROWS_AS(parse_csv("delay,depth,label\n", schema()), ParseError);
    CHECK_THROWS_AS(parse_csv("delay,depth,name\nx,1,a\n", schema()), ParseError);
    CHECK_THROWS_AS(parse_csv("delay,depth,name\n1,1.5,a\n", schema()), ParseError);
    CHECK_THROWS_AS(parse_csv("delay,depth,name\n1,1\n", schema()), ParseError);
    CHECK_THROWS_AS(parse_csv("delay,depth,name\n1,1,\"open\n", schema()), ParseError);
}

TEST_CASE("round trip on randomized tables") {
    std::mt19937_64 gen(12345);
    std::uniform_int_distribution<int> ncols(1, 5), nrows(0, 30), kind(0, 2), len(0, 12);
    const std::string alphabet = "abcXYZ019 ,\"\n\r#-.";

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Column> cols;
        const int nc = ncols(gen);
        for (int c = 0; c < nc; ++c)
            cols.push_back({"col" + std::to_string(c), static_cast<ColumnKind>(kind(gen))});
        Table t(cols);
        const int nr = nrows(gen);
        for (int r = 0; r < nr; ++r) {
            Row row;
            for (const auto& col : cols) {
                switch (col.kind) {
                    case ColumnKind::Integer: row.emplace_back(static_cast<std::int64_t>(gen())); break;
                    case ColumnKind::Real: {
                        // Arbitrary finite bit patterns, including subnormals and -0.
                        double x;
                        do {
                            x = std::bit_cast<double>(gen());
                        } while (!std::isfinite(x));
                        row.emplace_back(x);
                        break;
                    }
                    case ColumnKind::Text: {
                        std::string s;
                        const int n = len(gen);
                        for (int i = 0; i < n; ++i) s += alphabet[gen() % alphabet.size()];
                        row.emplace_back(std::move(s));
                        break;
                    }
                }
            }
            t.add_row(std::move(row));
        }
        const std::string text = to_csv(t);
        const Table back = parse_csv(text, cols);
        CHECK(back == t);
        CHECK(to_csv(back) == text);
    }
}

TEST_CASE("atomic file output") {
    const fs::path dir = scratch_dir("atomic");
    Table t(schema());
    t.add_row({1.0, std::int64_t{1}, std::string("x")});

    const fs::path path = dir / "out.csv";
    const std::size_t bytes = emit_csv(t, path);
    CHECK(bytes == fs::file_size(path));
    CHECK(read_file(path) == to_csv(t));

    // Overwrite leaves no temporary files behind.
    emit_csv(Table(schema()), path);
    CHECK(read_file(path) == "delay,depth,name\n");
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);

    const fs::path missing = dir / "no_such_dir" / "out.csv";
    try {
        emit_csv(t, missing);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("no_such_dir") != std::string::npos);
    }
    fs::remove_all(dir);
}
