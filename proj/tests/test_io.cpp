#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "epilab/io.hpp"

using namespace epilab;
using namespace epilab::io;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("epilab_io_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Csv, NumbersKeepSeventeenDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(std::stod(format_number(kPi)), kPi);
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Csv, QuotingAndLineEnds) {
  CsvTable t({"name", "value", "flag"});
  t.add({std::string("a,b"), 1.5, true});
  t.add({std::string("say \"hi\""), static_cast<long long>(3), false});
  EXPECT_EQ(t.str(), "name,value,flag\r\n\"a,b\",1.5,true\r\n\"say \"\"hi\"\"\",3,false\r\n");
  EXPECT_THROW(t.add({1.0}), LabError);
}

TEST(Csv, RoundTrip) {
  CsvTable t({"x", "label"});
  t.add({0.25, std::string("line\nbreak")});
  t.add({-3.0, std::string("plain")});
  const auto rows = parse_csv(t.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][1], "line\nbreak");
  EXPECT_EQ(rows[2][0], "-3");
}

TEST(Csv, NumericReader) {
  const auto dir = scratch("numeric");
  write_atomic(dir / "g.csv", "x,g\r\n0,1\r\n0.5,2.5\r\n");
  const auto rows = read_numeric_csv(dir / "g.csv", 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][1], 2.5);
  write_atomic(dir / "bad.csv", "x,g\r\n0,abc\r\n");
  EXPECT_THROW(read_numeric_csv(dir / "bad.csv", 2), LabError);
  EXPECT_THROW(read_numeric_csv(dir / "g.csv", 3), LabError);
  EXPECT_THROW(read_numeric_csv(dir / "missing.csv", 2), LabError);
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
  const auto dir = scratch("atomic");
  write_atomic(dir / "sub" / "a.txt", "first");
  write_atomic(dir / "sub" / "a.txt", "second");
  EXPECT_EQ(read_file(dir / "sub" / "a.txt"), "second");
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir / "sub")) n += e.is_regular_file() ? 1 : 0;
  EXPECT_EQ(n, 1u);
}

TEST(Hash, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(Json, NonFiniteNumbersBecomeStrings) {
  EXPECT_EQ(number(2.0).dump(), "2.0");
  EXPECT_EQ(number(std::numeric_limits<double>::infinity()).dump(), "\"inf\"");
  EXPECT_EQ(number(ExtReal::infinity()).dump(), "\"inf\"");
  EXPECT_TRUE(optional_number(std::optional<double>{}).is_null());
}

TEST(Svg, SelfContainedDocument) {
  SvgPlot p("title <a&b>", "x", "y");
  p.add({"s", {0, 1, 2}, {1, 0, std::numeric_limits<double>::quiet_NaN()}});
  p.mark({Marker::Axis::x, 1.5, "m"});
  const auto s = p.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  EXPECT_NE(s.find("title &lt;a&amp;b&gt;"), std::string::npos);
  EXPECT_EQ(s.find("nan"), std::string::npos);
  EXPECT_THROW(p.add({"bad", {0, 1}, {0}}), LabError);
}
