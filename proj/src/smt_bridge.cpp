#include "bwe/smt_bridge.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>

#include "bwe/binary_io.hpp"
#include "bwe/errors.hpp"

namespace bwe {

namespace {

enum class LetterCase { none, upper, lower };

// Decodes one UTF-8 code point starting at s[i]; advances i. Malformed
// bytes decode as U+FFFD one byte at a time.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  const std::size_t extra = b0 < 0x80 ? 0 : (b0 & 0xe0) == 0xc0 ? 1 : (b0 & 0xf0) == 0xe0 ? 2 : (b0 & 0xf8) == 0xf0 ? 3 : 4;
  if (extra == 0) return s[i++] & 0x7f;
  if (extra > 3 || i + extra >= s.size()) {
    ++i;
    return 0xfffd;
  }
  char32_t cp = b0 & (0x7f >> (extra + 1));
  for (std::size_t k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xc0) != 0x80) {
      ++i;
      return 0xfffd;
    }
    cp = (cp << 6) | (b & 0x3f);
  }
  i += extra + 1;
  return cp;
}

// Case of Latin, Greek and Cyrillic letters; other scripts count as uncased.
LetterCase letter_case(char32_t c) {
  if (c >= 'A' && c <= 'Z') return LetterCase::upper;
  if (c >= 'a' && c <= 'z') return LetterCase::lower;
  if (c < 0xc0) return LetterCase::none;
  if (c <= 0xde) return c == 0xd7 ? LetterCase::none : LetterCase::upper;
  if (c <= 0xff) return c == 0xf7 ? LetterCase::none : LetterCase::lower;
  if (c <= 0x17f) {
    // Latin Extended-A alternates upper/lower, with the parity flipping
    // after U+0138 and again after U+0149.
    if (c == 0x138 || c == 0x149 || c == 0x17f) return LetterCase::lower;
    if (c == 0x178) return LetterCase::upper;
    const bool even = (c % 2) == 0;
    if (c < 0x138 || (c > 0x149 && c < 0x178)) return even ? LetterCase::upper : LetterCase::lower;
    return even ? LetterCase::lower : LetterCase::upper;
  }
  if (c == 0x386 || (c >= 0x388 && c <= 0x38f) || (c >= 0x391 && c <= 0x3ab && c != 0x3a2)) return LetterCase::upper;
  if (c >= 0x3ac && c <= 0x3ce) return LetterCase::lower;
  if (c >= 0x400 && c <= 0x42f) return LetterCase::upper;
  if (c >= 0x430 && c <= 0x45f) return LetterCase::lower;
  return LetterCase::none;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    out.push_back(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
  }
  return out;
}

std::string format_probability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%#.6g", p);
  return buf;
}

std::vector<std::string_view> split_on(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + sep.size();
  }
  return out;
}

}  // namespace

SystemVocabulary::SystemVocabulary(std::vector<std::string> tokens) : tokens_(tokens.begin(), tokens.end()) {
  if (tokens_.empty()) throw Error("system vocabulary is empty");
}

bool SystemVocabulary::contains(std::string_view token) const { return tokens_.count(std::string(token)) > 0; }

SystemVocabulary parse_system_vocabulary(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto line : lines_of(text)) {
    for (auto& t : split_ws(line)) tokens.push_back(std::move(t));
  }
  return SystemVocabulary(std::move(tokens));
}

SystemVocabulary load_system_vocabulary(const std::filesystem::path& path) {
  return parse_system_vocabulary(io::read_file(path));
}

std::vector<Sentence> parse_corpus(std::string_view text) {
  std::vector<Sentence> out;
  for (auto line : lines_of(text)) out.push_back(split_ws(line));
  return out;
}

std::vector<Sentence> load_corpus(const std::filesystem::path& path) { return parse_corpus(io::read_file(path)); }

bool NamedEntityRule::after_boundary(const Sentence& sentence, std::size_t position) const {
  return position == 0 || punctuation.contains(sentence.at(position - 1));
}

bool classify_named_entity(std::string_view token, bool is_sentence_initial_or_after_punct) {
  if (token.empty()) return false;
  std::size_t i = 0;
  const bool starts_upper = letter_case(next_code_point(token, i)) == LetterCase::upper;
  if (starts_upper && !is_sentence_initial_or_after_punct) return true;

  bool any_upper = false;
  i = 0;
  while (i < token.size()) {
    switch (letter_case(next_code_point(token, i))) {
      case LetterCase::lower:
        return false;
      case LetterCase::upper:
        any_upper = true;
        break;
      case LetterCase::none:
        break;
    }
  }
  return any_upper;
}

double OovReport::oov_all_fraction() const {
  return tokens == 0 ? 0.0 : static_cast<double>(oov_all) / static_cast<double>(tokens);
}

double OovReport::oov_cw_fraction() const {
  return tokens == 0 ? 0.0 : static_cast<double>(oov_cw) / static_cast<double>(tokens);
}

OovScan scan_oov(std::span<const Sentence> corpus, const SystemVocabulary& vocab, const NamedEntityRule& rule) {
  OovScan out;
  out.report.sentences = corpus.size();
  out.flags.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    std::vector<TokenFlag> flags(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (vocab.contains(sentence[i])) continue;
      flags[i].oov = true;
      flags[i].named_entity = classify_named_entity(sentence[i], rule.after_boundary(sentence, i));
      ++out.report.oov_all;
      if (!flags[i].named_entity) ++out.report.oov_cw;
    }
    out.report.tokens += sentence.size();
    out.flags.push_back(std::move(flags));
  }
  if (out.report.tokens == 0) throw Error("corpus contains no tokens");
  return out;
}

OptionList build_options(const BilinearModel* model, const std::string& oov, const MarkupPolicy& policy,
                         bool is_ne) {
  if (policy.mode == MarkupMode::none) throw Error("build_options: policy 'none' produces no options");
  if (policy.top_n == 0) throw Error("build_options: top_n must be positive");
  OptionList out;
  const bool verbatim = policy.mode == MarkupMode::verbatim || (policy.mode == MarkupMode::bwe_cw && is_ne);
  if (!verbatim && (model == nullptr || !model->source_store().contains(oov))) out.embedding_fallback = true;
  if (verbatim || out.embedding_fallback) {
    out.options.push_back({oov, 1.0});
    return out;
  }

  out.options = model->top_n(oov, policy.top_n).entries;
  if (policy.add_verbatim_option) {
    const bool present = std::any_of(out.options.begin(), out.options.end(),
                                     [&](const Translation& t) { return t.target == oov; });
    if (!present) out.options.push_back({oov, out.options.front().probability});
  }
  double total = 0.0;
  for (const auto& o : out.options) total += o.probability;
  for (auto& o : out.options) o.probability /= total;
  return out;
}

std::string escape_xml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string unescape_xml(std::string_view text) {
  static constexpr std::pair<std::string_view, char> kEntities[] = {
      {"&lt;", '<'}, {"&gt;", '>'}, {"&amp;", '&'}, {"&quot;", '"'}};
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    bool matched = false;
    if (text[i] == '&') {
      for (auto [entity, c] : kEntities) {
        if (text.substr(i, entity.size()) == entity) {
          out += c;
          i += entity.size();
          matched = true;
          break;
        }
      }
      if (!matched) throw FormatError("unknown entity in '" + std::string(text) + "'");
    } else {
      out += text[i++];
    }
  }
  return out;
}

std::string emit_markup(const Sentence& sentence, std::span<const std::vector<Translation>> options,
                        std::string_view tag) {
  if (!options.empty() && options.size() != sentence.size()) {
    throw Error("emit_markup: options are not parallel to the sentence");
  }
  std::string out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i > 0) out += ' ';
    if (options.empty() || options[i].empty()) {
      out += sentence[i];
      continue;
    }
    std::vector<Translation> sorted = options[i];
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Translation& a, const Translation& b) { return a.probability > b.probability; });
    std::string translations, probs;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (k > 0) {
        translations += "||";
        probs += "||";
      }
      translations += escape_xml(sorted[k].target);
      probs += format_probability(sorted[k].probability);
    }
    out += '<';
    out += tag;
    out += " translation=\"" + translations + "\" prob=\"" + probs + "\">" + escape_xml(sentence[i]) + "</";
    out += tag;
    out += '>';
  }
  return out;
}

std::vector<MarkupItem> parse_markup(std::string_view line, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + " translation=\"";
  const std::string close = "</" + std::string(tag) + ">";
  auto fail = [&](const std::string& why) { return FormatError("markup: " + why + " in '" + std::string(line) + "'"); };

  std::vector<MarkupItem> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ') {
      ++i;
      continue;
    }
    if (line.substr(i, open.size()) != open) {
      auto end = line.find(' ', i);
      if (end == std::string_view::npos) end = line.size();
      out.push_back({std::string(line.substr(i, end - i)), {}});
      i = end;
      continue;
    }
    i += open.size();
    auto tq = line.find('"', i);
    if (tq == std::string_view::npos) throw fail("unterminated translation attribute");
    auto translations = line.substr(i, tq - i);
    i = tq + 1;
    constexpr std::string_view prob_attr = " prob=\"";
    if (line.substr(i, prob_attr.size()) != prob_attr) throw fail("missing prob attribute");
    i += prob_attr.size();
    auto pq = line.find('"', i);
    if (pq == std::string_view::npos) throw fail("unterminated prob attribute");
    auto probs = line.substr(i, pq - i);
    i = pq + 1;
    if (i >= line.size() || line[i] != '>') throw fail("malformed element");
    ++i;
    auto ce = line.find(close, i);
    if (ce == std::string_view::npos) throw fail("missing closing tag");
    MarkupItem item{unescape_xml(line.substr(i, ce - i)), {}};
    i = ce + close.size();

    auto ts = split_on(translations, "||");
    auto ps = split_on(probs, "||");
    if (ts.size() != ps.size()) throw fail("translation and prob lists differ in length");
    for (std::size_t k = 0; k < ts.size(); ++k) {
      double p = 0.0;
      auto [ptr, ec] = std::from_chars(ps[k].data(), ps[k].data() + ps[k].size(), p);
      if (ec != std::errc() || ptr != ps[k].data() + ps[k].size()) throw fail("bad probability");
      item.options.push_back({unescape_xml(ts[k]), p});
    }
    out.push_back(std::move(item));
  }
  return out;
}

MarkupResult markup_corpus(std::span<const Sentence> corpus, const SystemVocabulary& vocab, const BilinearModel* model,
                           const MarkupPolicy& policy, std::string_view tag, const NamedEntityRule& rule) {
  MarkupResult out;
  out.scan = scan_oov(corpus, vocab, rule);
  out.lines.reserve(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& sentence = corpus[s];
    std::vector<std::vector<Translation>> options(sentence.size());
    if (policy.mode != MarkupMode::none) {
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        const auto& flag = out.scan.flags[s][i];
        if (!flag.oov) continue;
        auto list = build_options(model, sentence[i], policy, flag.named_entity);
        if (list.embedding_fallback) ++out.embedding_fallbacks;
        options[i] = std::move(list.options);
        ++out.marked_tokens;
      }
    }
    out.lines.push_back(emit_markup(sentence, options, tag));
  }
  return out;
}

std::string oov_report_table(const OovReport& report, std::size_t embedding_fallbacks) {
  return "sentences\ttokens\toov_all\toov_all_fraction\toov_cw\toov_cw_fraction\tembedding_fallbacks\n" +
         std::to_string(report.sentences) + "\t" + std::to_string(report.tokens) + "\t" +
         std::to_string(report.oov_all) + "\t" + io::format_double(report.oov_all_fraction()) + "\t" +
         std::to_string(report.oov_cw) + "\t" + io::format_double(report.oov_cw_fraction()) + "\t" +
         std::to_string(embedding_fallbacks) + "\n";
}

std::string to_string(MarkupMode m) {
  switch (m) {
    case MarkupMode::none:
      return "none";
    case MarkupMode::verbatim:
      return "verbatim";
    case MarkupMode::bwe_all:
      return "bwe_all";
    case MarkupMode::bwe_cw:
      return "bwe_cw";
  }
  return "?";
}

MarkupMode parse_markup_mode(const std::string& s) {
  if (s == "none") return MarkupMode::none;
  if (s == "verbatim") return MarkupMode::verbatim;
  if (s == "bwe_all") return MarkupMode::bwe_all;
  if (s == "bwe_cw") return MarkupMode::bwe_cw;
  throw Error("unknown markup policy '" + s + "'");
}

}  // namespace bwe
