#include "bwe/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>
#include <utility>

#include "bwe/binary_io.hpp"
#include "bwe/errors.hpp"

namespace bwe {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool has_internal_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_space(c); });
}

}  // namespace

SeedLexicon::SeedLexicon(std::vector<WordPair> pairs) {
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& p : pairs) {
    if (seen.emplace(p.source, p.target).second) pairs_.push_back(std::move(p));
  }
  train_.resize(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) train_[i] = i;
}

std::vector<WordPair> SeedLexicon::train_pairs() const {
  std::vector<WordPair> out;
  out.reserve(train_.size());
  for (auto i : train_) out.push_back(pairs_[i]);
  return out;
}

std::vector<WordPair> SeedLexicon::dev_pairs() const {
  std::vector<WordPair> out;
  out.reserve(dev_.size());
  for (auto i : dev_) out.push_back(pairs_[i]);
  return out;
}

SeedLexicon SeedLexicon::filtered(const EmbeddingStore& source, const EmbeddingStore& target,
                                  std::size_t* dropped) const {
  std::vector<WordPair> kept;
  for (const auto& p : pairs_) {
    if (source.contains(p.source) && target.contains(p.target)) kept.push_back(p);
  }
  if (dropped) *dropped = pairs_.size() - kept.size();
  return SeedLexicon(std::move(kept));
}

SeedLexicon SeedLexicon::split(double train_fraction, std::uint64_t seed) const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must lie in (0, 1), got " + io::format_double(train_fraction));
  }
  if (pairs_.empty()) throw Error("cannot split an empty lexicon");

  // groups of pair indices sharing a source token, in first-appearance order
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    auto [it, fresh] = group_of.emplace(pairs_[i].source, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  // Fisher-Yates with a fully specified engine, so partitions are the
  // same on every standard library.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  const auto target = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(pairs_.size())));
  SeedLexicon out = *this;
  out.train_.clear();
  out.dev_.clear();
  out.seed_ = seed;
  std::size_t in_train = 0;
  for (auto g : order) {
    auto& dest = (in_train + groups[g].size() <= target) ? out.train_ : out.dev_;
    if (&dest == &out.train_) in_train += groups[g].size();
    dest.insert(dest.end(), groups[g].begin(), groups[g].end());
  }
  std::sort(out.train_.begin(), out.train_.end());
  std::sort(out.dev_.begin(), out.dev_.end());
  return out;
}

LoadedLexicon parse_lexicon(std::string_view text, const EmbeddingStore& source, const EmbeddingStore& target,
                            const std::string& source_name) {
  LoadedLexicon out;
  auto& report = out.report;
  std::vector<WordPair> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto raw = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    ++report.lines;

    std::string_view src, tgt;
    if (line.find('\t') != std::string_view::npos) {
      auto tab = line.find('\t');
      src = trim(line.substr(0, tab));
      tgt = trim(line.substr(tab + 1));
      if (src.empty() || tgt.empty() || tgt.find('\t') != std::string_view::npos) {
        throw FormatError(source_name + ":" + std::to_string(line_no) + ": expected exactly 2 fields");
      }
      if (has_internal_space(src) || has_internal_space(tgt)) {
        ++report.multiword;
        continue;
      }
    } else {
      auto fields = split_ws(line);
      if (fields.size() != 2) {
        throw FormatError(source_name + ":" + std::to_string(line_no) + ": expected exactly 2 fields, got " +
                          std::to_string(fields.size()));
      }
      src = fields[0];
      tgt = fields[1];
    }
    if (!seen.emplace(std::string(src), std::string(tgt)).second) {
      ++report.duplicates;
      continue;
    }
    if (!source.contains(src) || !target.contains(tgt)) {
      ++report.dropped_uncovered;
      continue;
    }
    pairs.push_back({std::string(src), std::string(tgt)});
  }
  report.kept = pairs.size();
  if (pairs.empty()) throw Error(source_name + ": lexicon is empty after filtering");
  out.lexicon = SeedLexicon(std::move(pairs));
  return out;
}

LoadedLexicon load_lexicon(const std::filesystem::path& path, const EmbeddingStore& source,
                           const EmbeddingStore& target) {
  return parse_lexicon(io::read_file(path), source, target, path.string());
}

std::string to_text(const std::vector<WordPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += p.source + "\t" + p.target + "\n";
  return out;
}

}  // namespace bwe
