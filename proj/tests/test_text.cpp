#include <gtest/gtest.h>

#include "topicforge/text.hpp"

using namespace topicforge::text;

TEST(Utf8, RoundTripsMultibyte) {
  const std::string s = "caf\xC3\xA9 \xE2\x82\xAC \xF0\x9F\x98\x80";
  EXPECT_EQ(encode_utf8(decode_utf8(s)), s);
  EXPECT_EQ(decode_utf8(s).size(), 8u);
}

TEST(Utf8, InvalidBytesBecomeReplacement) {
  const auto cps = decode_utf8("a\xFF" "b");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], 0xFFFDu);
}

TEST(Punctuation, AsciiAndUnicode) {
  for (char c : std::string("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")) EXPECT_TRUE(is_punctuation(c)) << c;
  EXPECT_TRUE(is_punctuation(0x2014));  // em dash
  EXPECT_TRUE(is_punctuation(0x00BF));  // inverted question mark
  EXPECT_FALSE(is_punctuation('a'));
  EXPECT_FALSE(is_punctuation(0x00E9));
}

TEST(Lowercase, UnicodeSimpleMapping) {
  EXPECT_EQ(to_lower('A'), static_cast<char32_t>('a'));
  EXPECT_EQ(to_lower(0x00C9), 0x00E9u);
  EXPECT_EQ(to_lower(0x0416), 0x0436u);  // Cyrillic Zhe
  EXPECT_EQ(to_lower('7'), static_cast<char32_t>('7'));
}

TEST(Whitespace, SplitsOnUnicodeSpaces) {
  const auto parts = split_whitespace("a\tb\xC2\xA0" "c  d\n");
  EXPECT_EQ(parts, (std::vector<std::string>{"a", "b", "c", "d"}));
}
