#include "ssqr/table.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

using namespace ssqr;
using namespace ssqr::io;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ssqr_test_table";
    std::filesystem::create_directories(dir);
    return dir / name;
}

ResultTable sample() {
    ResultTable t("sample", {Column::exact("t", "s"), Column::real("rate", "1/s"), Column::integer("n"),
                             Column::text("label")});
    t.set_meta("seed", "42");
    t.set_meta("resolved_config", R"({"a": [1, 2], "b": "x: y"})");
    t.add_row({-12.125, 1.0 / 3.0, 7LL, std::string("plain")});
    t.add_row({0.1, 2.5e-7, -3LL, std::string("with, comma and \"quotes\"")});
    t.add_row({1e300, 123456789.0, 0LL, std::string(" padded ")});
    t.add_row({std::numeric_limits<double>::infinity(), std::nan(""), 1LL << 40, std::string("")});
    return t;
}

std::string to_text(const ResultTable& t) {
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

}  // namespace

TEST_CASE("formatting") {
    CHECK(format_real(1.0 / 3.0, 6) == "0.333333");
    CHECK(format_real(1234567.0, 6) == "1.23457e+06");
    CHECK(format_real(0.1, 17) == "0.10000000000000001");
    CHECK(format_real(-std::numeric_limits<double>::infinity(), 6) == "-inf");
    CHECK(format_real(std::nan(""), 6) == "nan");
}

TEST_CASE("csv round trip") {
    const auto t = sample();
    const std::string text = to_text(t);
    CHECK(text.rfind("# table: sample\n# column_types: r17,r6,i,t\n# seed: 42\n", 0) == 0);
    CHECK(text.find("t [s],rate [1/s],n,label\n") != std::string::npos);

    std::istringstream in(text);
    const auto back = read_csv(in);
    CHECK(back.name() == "sample");
    CHECK(back.columns() == t.columns());
    CHECK(back.metadata() == t.metadata());
    REQUIRE(back.rows().size() == 4);
    // Exact columns round-trip bit for bit; 6-digit columns to 6 digits.
    CHECK(back.real_at(0, "t") == -12.125);
    CHECK(back.real_at(1, "t") == 0.1);
    CHECK(back.real_at(0, "rate") == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(std::get<long long>(back.rows()[3][2]) == (1LL << 40));
    CHECK(std::get<std::string>(back.rows()[1][3]) == "with, comma and \"quotes\"");
    CHECK(std::get<std::string>(back.rows()[2][3]) == " padded ");
    CHECK(std::isinf(back.real_at(3, "t")));
    CHECK(std::isnan(back.real_at(3, "rate")));

    // Writing what was read gives the same bytes.
    CHECK(to_text(back) == text);
}

TEST_CASE("files are byte identical across writes") {
    const auto p1 = scratch("a.csv");
    const auto p2 = scratch("nested/b.csv");
    write_table(sample(), p1);
    write_table(sample(), p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(!s1.empty());
    CHECK(s1 == s2);
    CHECK(read_table(p2).rows().size() == 4);
    CHECK_THROWS_AS(read_table(scratch("missing.csv")), std::runtime_error);
}

TEST_CASE("schema checks") {
    CHECK_THROWS_AS(ResultTable("x", {Column::real("a,b", "")}), std::invalid_argument);
    CHECK_THROWS_AS(ResultTable("x", {Column::real("a", "[s]")}), std::invalid_argument);
    CHECK_THROWS_AS(ResultTable("x", {Column::real("", "")}), std::invalid_argument);
    CHECK_THROWS_AS(Column::real("a", "", 0), std::invalid_argument);

    ResultTable t("x", {Column::real("a", "s"), Column::integer("n"), Column::text("s")});
    CHECK_THROWS_AS(t.add_row({1.0, 2LL}), std::invalid_argument);
    CHECK_THROWS_AS(t.add_row({1.0, 2.0, std::string("s")}), std::invalid_argument);
    CHECK_THROWS_AS(t.add_row({std::string("a"), 2LL, std::string("s")}), std::invalid_argument);
    CHECK_THROWS_AS(t.add_row({1.0, 2LL, std::string("two\nlines")}), std::invalid_argument);
    t.add_row({3LL, 2LL, std::string("s")});
    CHECK(std::holds_alternative<double>(t.rows()[0][0]));
    CHECK_THROWS_AS(t.real_at(0, "s"), std::invalid_argument);
    CHECK_THROWS_AS(t.column_index("nope"), std::out_of_range);
    CHECK_THROWS_AS(t.set_meta("a:b", "v"), std::invalid_argument);
    t.set_meta("k", "1");
    t.set_meta("k", "2");
    CHECK(t.metadata().size() == 1);
    CHECK(t.meta("k") == "2");
    CHECK(t.meta("absent").empty());

    std::istringstream ragged("# table: r\n# column_types: r6,i\na,n\n1,2,3\n");
    CHECK_THROWS_AS(read_csv(ragged), std::runtime_error);
    std::istringstream mismatch("# table: r\n# column_types: r6\na,n\n");
    CHECK_THROWS_AS(read_csv(mismatch), std::runtime_error);
    std::istringstream bad("# table: r\n# column_types: r6\na\n1.5x\n");
    CHECK_THROWS_AS(read_csv(bad), std::runtime_error);
    std::istringstream empty("# table: r\n");
    CHECK_THROWS_AS(read_csv(empty), std::runtime_error);
}

TEST_CASE("event log round trip") {
    const auto path = scratch("events.jsonl");
    mc::TrialRecord r;
    r.trial_id = 3;
    r.events = {{-101.25, 0.0033356409519815205, 0.0041, 0.98765432109876543, true},
                {7.0 / 3.0, 1e-3, 2e-3, 0.5 + 1e-16, false}};
    {
        EventLogWriter w(path);
        w.write(r);
        w.write(9, r.events[0]);
        CHECK(w.written() == 3);
    }
    const auto back = read_event_log(path);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].trial_id == 3);
        CHECK(back[i].event.t == r.events[i].t);
        CHECK(back[i].event.wait_a == r.events[i].wait_a);
        CHECK(back[i].event.wait_b == r.events[i].wait_b);
        CHECK(back[i].event.fidelity == r.events[i].fidelity);
        CHECK(back[i].event.bsm_success == r.events[i].bsm_success);
    }
    CHECK(back[2].trial_id == 9);

    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind(R"({"t":-101.25,"wait_A_s":)", 0) == 0);
    CHECK(first.find(R"("bsm_success":true,"trial_id":3})") != std::string::npos);
}
