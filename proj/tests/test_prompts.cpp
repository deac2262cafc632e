#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsir/error.hpp"
#include "nsir/prompts.hpp"

using namespace nsir;
using namespace nsir::prompts;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Prompts, EmbeddedTextMatchesFilesByteForByte) {
  for (const auto t : kAllTemplates) {
    const auto path = std::filesystem::path(NSIR_PROMPT_DIR) / (std::string(name(t)) + ".txt");
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(std::string(text(t)), read_file(path)) << name(t);
  }
}

TEST(Prompts, PlaceholderSets) {
  EXPECT_EQ(placeholders(Template::Nl2FolQuery), std::vector<std::string>{"%QUERY%"});
  EXPECT_EQ(placeholders(Template::Nl2FolDocument), std::vector<std::string>{"%DOCUMENT%"});
  EXPECT_EQ(placeholders(Template::GenerateAMinusA),
            (std::vector<std::string>{"%POSITIVE DOCUMENT%", "%NEGATIVE DOCUMENT%", "%QUERY%"}));
  EXPECT_EQ(placeholders(Template::GenerateAMinusAUnionBMinusB),
            (std::vector<std::string>{"%POSITIVE DOCUMENT%", "%NEGATIVE DOCUMENT 1%", "%NEGATIVE DOCUMENT 2%",
                                      "%NEGATIVE DOCUMENT 3%", "%QUERY%"}));
}

TEST(Prompts, InstantiateReplacesEveryOccurrenceOnce) {
  const auto out = instantiate(Template::Nl2FolQuery, {{"%QUERY%", "Who wrote %QUERY%?"}});
  EXPECT_EQ(out.find("%QUERY%"), out.rfind("%QUERY%"));  // only the one inside the value
  EXPECT_NE(out.find("Query:\nWho wrote %QUERY%?\n"), std::string::npos);
  EXPECT_EQ(out.size(), text(Template::Nl2FolQuery).size() - 7 + 18);
}

TEST(Prompts, MarkerErrors) {
  auto code = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code([] { instantiate(Template::Nl2FolQuery, {}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code([] { instantiate(Template::Nl2FolQuery, {{"%QUERY%", "q"}, {"%DOCUMENT%", "d"}}); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code([] {
              instantiate(Template::GenerateAMinusA, {{"%QUERY%", ""}, {"%POSITIVE DOCUMENT%", "p"}});
            }),
            ErrorCode::InvalidArgument);
}
