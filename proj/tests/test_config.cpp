#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "qmcsa/config.hpp"

using namespace qmcsa;

namespace {

IniDocument parse(const std::string& text) {
  std::istringstream in(text);
  return IniDocument::parse(in, "test.ini");
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Ini, SectionsCommentsAndValues) {
  const auto doc = parse("# header\n[engine]\n  engine = qmc-sa  \n; note\niterations=10 # inline\n\n[kernel]\nlower = -inf\n");
  ConfigReader r(doc);
  EXPECT_EQ(r.text("engine.engine"), "qmc-sa");
  EXPECT_EQ(r.integer("engine.iterations"), 10u);
  EXPECT_EQ(r.real("kernel.lower"), -std::numeric_limits<double>::infinity());
  EXPECT_FALSE(r.text("kernel.upper").has_value());
  EXPECT_NO_THROW(r.reject_unknown());
}

TEST(Ini, SyntaxErrorsCarryLineNumbers) {
  EXPECT_NE(error_of([] { parse("[a]\nx = 1\nbroken line\n"); }).find("test.ini:3"), std::string::npos);
  EXPECT_NE(error_of([] { parse("x = 1\n"); }).find("before any [section]"), std::string::npos);
  EXPECT_NE(error_of([] { parse("[a]\nx=1\nx=2\n"); }).find("duplicate key 'a.x'"), std::string::npos);
  EXPECT_NE(error_of([] { parse("[a\n"); }).find("unterminated"), std::string::npos);
}

TEST(Reader, UnknownKeysAreRejectedWithLine) {
  const auto doc = parse("[engine]\nengine = ta\nbogus = 3\n");
  ConfigReader r(doc);
  r.text("engine.engine");
  const auto msg = error_of([&] { r.reject_unknown(); });
  EXPECT_NE(msg.find("engine.bogus"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.ini:3"), std::string::npos) << msg;
}

TEST(Reader, TypedErrorsNameTheKey) {
  const auto doc = parse("[a]\nn = -3\nx = abc\nb = maybe\nl = 1,,2\n");
  ConfigReader r(doc);
  EXPECT_THROW(r.integer("a.n"), ConfigError);
  EXPECT_NE(error_of([&] { r.real("a.x"); }).find("a.x"), std::string::npos);
  EXPECT_THROW(r.boolean("a.b"), ConfigError);
  EXPECT_THROW(r.real_list("a.l"), ConfigError);
}

TEST(Reader, Lists) {
  const auto doc = parse("[a]\nl = 1, 2.5 ,inf\nnames = qmc-sa, mc-sa\n");
  ConfigReader r(doc);
  const auto l = *r.real_list("a.l");
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[1], 2.5);
  EXPECT_TRUE(std::isinf(l[2]));
  EXPECT_EQ(*r.list("a.names"), (std::vector<std::string>{"qmc-sa", "mc-sa"}));
}

TEST(Ini, OverridesReplaceValues) {
  auto doc = parse("[engine]\nseed = 1\n");
  doc.set("engine.seed", "7");
  doc.set("kernel.scale", "2");
  ConfigReader r(doc);
  EXPECT_EQ(r.integer("engine.seed"), 7u);
  EXPECT_EQ(r.real("kernel.scale"), 2.0);
  EXPECT_THROW(doc.set("noseparator", "1"), ConfigError);
}
