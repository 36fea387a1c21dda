#include <doctest.h>

#include <set>

#include "bwe/errors.hpp"
#include "bwe/lexicon.hpp"

using namespace bwe;

namespace {

EmbeddingStore store_of(std::vector<std::string> tokens) {
  RowMatrix m = RowMatrix::Ones(static_cast<Eigen::Index>(tokens.size()), 2);
  return EmbeddingStore("xx", std::move(tokens), std::move(m));
}

const EmbeddingStore kEn = store_of({"dog", "cat", "house", "bank", "tree", "red"});
const EmbeddingStore kEs = store_of({"perro", "gato", "casa", "banco", "orilla", "árbol", "rojo"});

std::vector<WordPair> distinct_sources(std::size_t n) {
  std::vector<WordPair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.push_back({"s" + std::to_string(i), "t" + std::to_string(i)});
  return pairs;
}

}  // namespace

TEST_CASE("all lines covered") {
  auto loaded = parse_lexicon("dog\tperro\ncat\tgato\nhouse casa\nbank\tbanco\ntree\tárbol\n", kEn, kEs);
  CHECK(loaded.lexicon.size() == 5);
  CHECK(loaded.report.kept == 5);
  CHECK(loaded.report.dropped_uncovered == 0);
}

TEST_CASE("uncovered targets are dropped") {
  auto loaded = parse_lexicon("dog\tperro\ncat\tgato\nhouse\tcasa\nbank\tbancos\ntree\tarbol\n", kEn, kEs);
  CHECK(loaded.lexicon.size() == 3);
  CHECK(loaded.report.dropped_uncovered == 2);
}

TEST_CASE("duplicates, comments and multiword entries") {
  auto loaded = parse_lexicon(
      "# header comment\n"
      "dog perro\n"
      "\n"
      "dog perro\n"
      "red\tcasa roja\n"
      "cat\tgato\n",
      kEn, kEs);
  CHECK(loaded.lexicon.size() == 2);
  CHECK(loaded.report.duplicates == 1);
  CHECK(loaded.report.multiword == 1);
  CHECK(loaded.report.lines == 4);
}

TEST_CASE("wrong field count and empty result are errors") {
  CHECK_THROWS_AS(parse_lexicon("dog perro extra\n", kEn, kEs), FormatError);
  CHECK_THROWS_AS(parse_lexicon("dog\n", kEn, kEs), FormatError);
  CHECK_THROWS_AS(parse_lexicon("dog\tperro\tx\n", kEn, kEs), FormatError);
  CHECK_THROWS_AS(parse_lexicon("zzz yyy\n", kEn, kEs), Error);
  CHECK_THROWS_AS(parse_lexicon("# only comments\n", kEn, kEs), Error);
}

TEST_CASE("filtering is idempotent") {
  SeedLexicon lex({{"dog", "perro"}, {"dog", "nope"}, {"cat", "gato"}, {"zzz", "casa"}});
  std::size_t dropped = 0;
  auto once = lex.filtered(kEn, kEs, &dropped);
  CHECK(dropped == 2);
  auto twice = once.filtered(kEn, kEs, &dropped);
  CHECK(dropped == 0);
  CHECK(twice.pairs() == once.pairs());
}

TEST_CASE("70/30 split of distinct sources") {
  SeedLexicon lex(distinct_sources(10));
  auto split = lex.split(0.7, 42);
  CHECK(split.train_indices().size() == 7);
  CHECK(split.dev_indices().size() == 3);
  CHECK(split.split_seed() == 42);
}

TEST_CASE("split is deterministic and a partition") {
  SeedLexicon lex(distinct_sources(57));
  auto a = lex.split(0.7, 9), b = lex.split(0.7, 9);
  CHECK(a.train_indices() == b.train_indices());
  CHECK(a.dev_indices() == b.dev_indices());

  std::set<std::size_t> all(a.train_indices().begin(), a.train_indices().end());
  for (auto i : a.dev_indices()) CHECK(all.insert(i).second);
  CHECK(all.size() == lex.size());
  CHECK(a.train_indices().size() == 40);  // round(0.7 * 57)

  auto c = lex.split(0.7, 10);
  CHECK(c.train_indices() != a.train_indices());
}

TEST_CASE("pairs sharing a source land on the same side for every seed") {
  auto pairs = distinct_sources(12);
  pairs.push_back({"bank", "banco"});
  pairs.push_back({"bank", "orilla"});
  pairs.push_back({"s3", "extra"});
  SeedLexicon lex(pairs);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto split = lex.split(0.7, seed);
    std::set<std::string> train_sources, dev_sources;
    for (const auto& p : split.train_pairs()) train_sources.insert(p.source);
    for (const auto& p : split.dev_pairs()) dev_sources.insert(p.source);
    for (const auto& s : train_sources) REQUIRE(dev_sources.count(s) == 0);
    CHECK(split.train_indices().size() <= 11);  // round(0.7 * 15)
  }
}

TEST_CASE("split rejects bad fractions and empty lexicons") {
  SeedLexicon lex(distinct_sources(3));
  CHECK_THROWS_AS(lex.split(0.0, 1), Error);
  CHECK_THROWS_AS(lex.split(1.0, 1), Error);
  CHECK_THROWS_AS(lex.split(-0.5, 1), Error);
  CHECK_THROWS_AS(SeedLexicon().split(0.5, 1), Error);
}

TEST_CASE("constructor deduplicates and puts everything in train") {
  SeedLexicon lex({{"a", "b"}, {"a", "b"}, {"a", "c"}});
  CHECK(lex.size() == 2);
  CHECK(lex.train_indices().size() == 2);
  CHECK(lex.dev_indices().empty());
}
