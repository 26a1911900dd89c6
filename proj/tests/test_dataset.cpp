#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "plspath/common.hpp"
#include "plspath/dataset.hpp"

using namespace plspath;

namespace {

ModelSpec two_block_spec() {
  return parse_model_spec(R"(plsspec v1
construct A: a1 a2
construct B: b1 b2
edge A -> B
outcome B
)");
}

const char* kCsv =
    "a1,a2,b1,b2\n"
    "1,2,3,4\n"
    "2,3,4,5\n"
    "5,5,6,6\n"
    "7,6,5,4\n";

}  // namespace

TEST_CASE("parses a plain CSV in spec column order") {
  const auto data = parse_dataset(kCsv, two_block_spec());
  CHECK(data.n() == 4);
  CHECK(data.p() == 4);
  CHECK(data.column_names == std::vector<std::string>{"a1", "a2", "b1", "b2"});
  CHECK(data.rows(0, 0) == 1.0);
  CHECK(data.rows(3, 3) == 4.0);
  CHECK(data.rejected_rows == 0);
  CHECK(data.column_index("b1") == 2);
  CHECK_THROWS_AS((void)data.column_index("zz"), DataError);
}

TEST_CASE("columns bind by name, not by file position") {
  const auto spec = two_block_spec();
  const auto straight = parse_dataset(kCsv, spec);
  const auto permuted = parse_dataset(
      "b2,a1,b1,a2\n"
      "4,1,3,2\n"
      "5,2,4,3\n"
      "6,5,6,5\n"
      "4,7,5,6\n",
      spec);
  CHECK(permuted.column_names == straight.column_names);
  CHECK((permuted.rows - straight.rows).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extra columns are carried as meta untouched") {
  const auto data = parse_dataset(
      "a1,a2,b1,b2,country,age\n"
      "1,2,3,4,DE,21\n"
      "2,3,4,5,MY,24\n",
      two_block_spec());
  CHECK(data.p() == 4);
  REQUIRE(data.meta_names == std::vector<std::string>{"country", "age"});
  REQUIRE(data.meta.size() == 2);
  CHECK(data.meta[0] == std::vector<std::string>{"DE", "21"});
  CHECK(data.meta[1] == std::vector<std::string>{"MY", "24"});
}

TEST_CASE("missing estimation cells reject the whole row and are counted") {
  const auto data = parse_dataset(
      "a1,a2,b1,b2\n"
      "1,2,3,4\n"
      "2,,4,5\n"
      "5,5,6,6\n",
      two_block_spec());
  CHECK(data.n() == 2);
  CHECK(data.rejected_rows == 1);
  CHECK(data.rows(1, 0) == 5.0);
}

TEST_CASE("non-numeric estimation cells are hard errors with context") {
  try {
    parse_dataset("a1,a2,b1,b2\n1,2,eight,4\n", two_block_spec());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("b1") != std::string::npos);
    CHECK(msg.find("eight") != std::string::npos);
  }
}

TEST_CASE("range policy gates out-of-range values") {
  const std::string csv = "a1,a2,b1,b2\n1,2,3,9\n2,3,4,5\n";
  CHECK_THROWS_AS(parse_dataset(csv, two_block_spec(), RangePolicy::kLikert7), DataError);
  const auto data = parse_dataset(csv, two_block_spec(), RangePolicy::kUnrestricted);
  CHECK(data.rows(0, 3) == 9.0);
  CHECK_THROWS_AS(parse_dataset("a1,a2,b1,b2\n0,2,3,4\n1,3,4,5\n", two_block_spec()), DataError);
}

TEST_CASE("missing estimation columns are errors") {
  CHECK_THROWS_AS(parse_dataset("a1,a2,b1\n1,2,3\n", two_block_spec()), DataError);
}

TEST_CASE("dataset round-trips through CSV emission") {
  const auto data = parse_dataset(kCsv, two_block_spec(), RangePolicy::kUnrestricted);
  const auto again = parse_dataset(emit_dataset_csv(data), two_block_spec(),
                                   RangePolicy::kUnrestricted);
  CHECK(again.column_names == data.column_names);
  CHECK(again.rows.isApprox(data.rows));
}

TEST_CASE("validate computes the subject-to-item adequacy ratio") {
  const auto spec = two_block_spec();
  const auto sample = validate(parse_dataset(kCsv, spec), spec);
  CHECK(sample.n == 4);
  CHECK(sample.p == 4);
  CHECK(sample.adequacy == doctest::Approx(1.0));
  REQUIRE_FALSE(sample.warnings.empty());  // adequacy below 10 warns

  // 40 rows over 4 indicators reaches the ratio of 10.
  std::string big = "a1,a2,b1,b2\n";
  for (int i = 0; i < 40; ++i) {
    const int v = 1 + (i * 3 + 1) % 7;
    const int w = 1 + (i * 5 + 2) % 7;
    big += std::to_string(v) + "," + std::to_string(w) + "," + std::to_string(8 - v) + "," +
           std::to_string(8 - w) + "\n";
  }
  const auto ok = validate(parse_dataset(big, spec), spec);
  CHECK(ok.adequacy == doctest::Approx(10.0));
  CHECK(ok.warnings.empty());
}

TEST_CASE("validate rejects constant columns and tiny samples") {
  const auto spec = two_block_spec();
  CHECK_THROWS_AS(validate(parse_dataset("a1,a2,b1,b2\n1,2,3,4\n", spec), spec), DataError);
  const auto constant = parse_dataset("a1,a2,b1,b2\n1,2,3,4\n1,3,4,5\n1,4,5,6\n", spec);
  CHECK_THROWS_AS(validate(constant, spec), DataError);  // a1 never varies
}

TEST_CASE("validate is pure") {
  const auto spec = two_block_spec();
  const auto data = parse_dataset(kCsv, spec);
  const auto s1 = validate(data, spec);
  const auto s2 = validate(data, spec);
  CHECK(s1.adequacy == s2.adequacy);
  CHECK(s1.warnings == s2.warnings);
  CHECK((s1.dataset.rows - s2.dataset.rows).cwiseAbs().maxCoeff() == 0.0);
}
