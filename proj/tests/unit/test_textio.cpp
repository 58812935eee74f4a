#include <doctest.h>

#include "hodse/errors.hpp"
#include "hodse/textio.hpp"

#include <sstream>
#include <string>

using namespace hodse;

namespace {

SampleMatrix csv(const std::string& text) {
    std::istringstream in(text);
    return read_csv_matrix(in, "test");
}

std::string csv_error(const std::string& text) {
    try {
        (void)csv(text);
    } catch (const input_error& e) {
        return e.what();
    }
    return {};
}

ConfigMap config(const std::string& text) {
    std::istringstream in(text);
    return ConfigMap::parse(in, "test.cfg");
}

} // namespace

TEST_CASE("csv tables: happy path, line endings, blank lines, notation") {
    const SampleMatrix m = csv("1,2\n3,4\n");
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 2);
    CHECK(m(1, 0) == doctest::Approx(3.0));

    const SampleMatrix crlf = csv("1.5, -2\r\n\r\n 1e-3 ,4.25\r\n");
    REQUIRE(crlf.rows() == 2);
    CHECK(crlf(1, 0) == doctest::Approx(1e-3));
    CHECK(crlf(0, 1) == doctest::Approx(-2.0));
}

TEST_CASE("csv tables: failures carry line and column positions") {
    CHECK(csv_error("1,2\n3\n").find("test:2") != std::string::npos);
    const std::string bad_field = csv_error("1,2\n3,abc\n");
    CHECK(bad_field.find("test:2:2") != std::string::npos);
    CHECK_FALSE(csv_error("").empty());
    CHECK_THROWS_AS((void)read_csv_file("/nonexistent/path.csv"), input_error);
}

TEST_CASE("csv writing produces a parseable header table") {
    std::ostringstream out;
    write_csv_table(out, {"rep", "value"}, {{1.0, 0.5}, {2.0, 0.25}});
    const std::string text = out.str();
    CHECK(text.find("rep,value") == 0);
    CHECK(text.find("0.25") != std::string::npos);
    // Data rows (after the header) parse back to the same matrix.
    const std::string body = text.substr(text.find('\n') + 1);
    const SampleMatrix back = csv(body);
    REQUIRE(back.rows() == 2);
    CHECK(back(1, 1) == doctest::Approx(0.25));
}

TEST_CASE("config files: typed access, comments, and strict key accounting") {
    ConfigMap c = config(
        "schema_version = 1\n"
        "# a comment line\n"
        "run.n = 25\n"
        "noise.sigma_n = 0.5   # trailing comment\n"
        "run.flag = true\n"
        "name = hello\n");
    CHECK(c.has("run.n"));
    CHECK(c.get_long("run.n", 0) == 25);
    CHECK(c.get_double("noise.sigma_n", 0.0) == doctest::Approx(0.5));
    CHECK(c.get_bool("run.flag", false));
    CHECK(c.get_string("name", "") == "hello");
    CHECK(c.get_long("run.absent", 7) == 7);
    CHECK_NOTHROW(c.finish());

    ConfigMap leftover = config("schema_version = 1\nrun.n = 5\nrun.typo = 3\n");
    (void)leftover.get_long("run.n", 0);
    try {
        leftover.finish();
        FAIL("expected unconsumed-key failure");
    } catch (const input_error& e) {
        CHECK(std::string(e.what()).find("run.typo") != std::string::npos);
    }
}

TEST_CASE("config files: version and syntax guards") {
    CHECK_THROWS_AS((void)config("run.n = 5\n"), input_error);
    CHECK_THROWS_AS((void)config("schema_version = 2\nrun.n = 5\n"), input_error);
    CHECK_THROWS_AS((void)config("schema_version = 1\nnot a pair\n"), input_error);
    CHECK_THROWS_AS((void)config("schema_version = 1\na = 1\na = 2\n"), input_error);
    ConfigMap c = config("schema_version = 1\nrun.n = many\n");
    CHECK_THROWS_AS((void)c.get_long("run.n", 0), input_error);
}

TEST_CASE("functional grammar: polynomial expressions") {
    const FunctionalDescription one = parse_functional("poly:x^2");
    CHECK(one.is_polynomial);
    REQUIRE(one.poly_terms.size() == 1);
    CHECK(one.poly_terms[0].second == doctest::Approx(1.0));
    CHECK(one.poly_terms[0].first.at(0) == 2);

    const FunctionalDescription big =
        parse_functional("poly:0.5 x1^2 x2 - 3 x3 / 2 + 1");
    CHECK(big.poly_min_dimension == 3);
    REQUIRE(big.poly_terms.size() == 3);
    CHECK(big.poly_terms[0].second == doctest::Approx(0.5));
    CHECK(big.poly_terms[0].first.at(0) == 2);
    CHECK(big.poly_terms[0].first.at(1) == 1);
    CHECK(big.poly_terms[1].second == doctest::Approx(-1.5));
    CHECK(big.poly_terms[2].first.empty()); // constant term
    CHECK(big.poly_terms[2].second == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)parse_functional("poly:x^0"), input_error);
    CHECK_THROWS_AS((void)parse_functional("poly:2 y"), input_error);
    CHECK_THROWS_AS((void)parse_functional("poly:3 / 0"), input_error);
    CHECK_THROWS_AS((void)parse_functional("poly:"), input_error);
}

TEST_CASE("functional grammar: coordinate-wise families and bandwidth suffix") {
    const FunctionalDescription a = parse_functional("sep:abs");
    CHECK_FALSE(a.is_polynomial);
    CHECK(a.scalar_name == "abs");
    CHECK(a.bandwidth == 0.0);

    const FunctionalDescription ah = parse_functional("sep:abs:h=0.5");
    CHECK(ah.bandwidth == doctest::Approx(0.5));

    const FunctionalDescription p = parse_functional("sep:pow:0.5:h=0.3");
    CHECK(p.scalar_name == "pow");
    CHECK(p.power == doctest::Approx(0.5));
    CHECK(p.bandwidth == doctest::Approx(0.3));

    CHECK(parse_functional("sep:square").scalar_name == "square");
    CHECK(parse_functional("sep:sin").scalar_name == "sin");

    CHECK_THROWS_AS((void)parse_functional("sep:pow"), input_error);
    CHECK_THROWS_AS((void)parse_functional("sep:pow:1.5"), input_error);
    CHECK_THROWS_AS((void)parse_functional("sep:cube"), input_error);
    CHECK_THROWS_AS((void)parse_functional("sep:abs:h=0"), input_error);
    CHECK_THROWS_AS((void)parse_functional("mean:x"), input_error);
}

TEST_CASE("model construction from descriptions") {
    const FunctionalDescription poly = parse_functional("poly:x1 x2");
    const FunctionalModel f = build_functional(poly, 3, 0.0, 4);
    CHECK(f.dimension() == 3);
    Eigen::VectorXd theta(3);
    theta << 2.0, 5.0, 9.0;
    CHECK(f.eval(theta) == doctest::Approx(10.0));
    CHECK_THROWS_AS((void)build_functional(poly, 1, 0.0, 4), input_error);

    const FunctionalDescription abs_desc = parse_functional("sep:abs:h=0.4");
    const FunctionalModel g = build_functional(abs_desc, 2, 0.0, 6);
    REQUIRE(g.smoothing() != nullptr);
    CHECK(g.smoothing()->bandwidth() == doctest::Approx(0.4));
    // The override wins over the suffix.
    const FunctionalModel g2 = build_functional(abs_desc, 2, 0.9, 6);
    CHECK(g2.smoothing()->bandwidth() == doctest::Approx(0.9));

    // Unsmoothed abs builds fine (plug-in use); smooth families reject h.
    const FunctionalModel raw = build_functional(parse_functional("sep:abs"), 2, 0.0, 4);
    CHECK(raw.smoothing() == nullptr);
    const FunctionalDescription sq = parse_functional("sep:square");
    CHECK_THROWS_AS((void)build_functional(sq, 2, 0.5, 4), input_error);
}
