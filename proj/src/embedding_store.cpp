#include "bwe/embedding_store.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "bwe/binary_io.hpp"
#include "bwe/errors.hpp"

namespace bwe {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Splits off the next whitespace-delimited field.
std::string_view next_field(std::string_view& rest) {
  while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
  std::size_t end = 0;
  while (end < rest.size() && !is_space(rest[end])) ++end;
  auto field = rest.substr(0, end);
  rest.remove_prefix(end);
  return field;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

LoadedEmbeddings assemble(std::string tag, std::vector<std::string> tokens, RowMatrix rows) {
  // drop repeated tokens, keeping the first row
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<Eigen::Index> keep;
  keep.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (seen.emplace(tokens[i], i).second) keep.push_back(static_cast<Eigen::Index>(i));
  }
  LoadedEmbeddings out;
  out.duplicates_dropped = tokens.size() - keep.size();
  if (out.duplicates_dropped == 0) {
    out.store = EmbeddingStore(std::move(tag), std::move(tokens), std::move(rows));
    return out;
  }
  std::vector<std::string> unique;
  RowMatrix matrix(static_cast<Eigen::Index>(keep.size()), rows.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    unique.push_back(std::move(tokens[static_cast<std::size_t>(keep[r])]));
    matrix.row(static_cast<Eigen::Index>(r)) = rows.row(keep[r]);
  }
  out.store = EmbeddingStore(std::move(tag), std::move(unique), std::move(matrix));
  return out;
}

LoadedEmbeddings parse_binary(std::string_view bytes, const LoadOptions& options, const std::string& name) {
  io::ByteReader in(bytes, name);
  in.bytes(kEmbeddingMagic.size());
  auto version = in.u8();
  if (version != kEmbeddingVersion) {
    throw FormatError(name + ": unsupported embedding cache version " + std::to_string(version));
  }
  auto dim = in.u32();
  auto count = in.u32();
  if (dim == 0) throw FormatError(name + ": dimension must be positive");
  if (count == 0) throw FormatError(name + ": empty vocabulary");
  std::size_t rows = count;
  if (options.limit) rows = std::min<std::size_t>(rows, *options.limit);
  std::vector<std::string> tokens;
  tokens.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) tokens.push_back(in.str());
  RowMatrix matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) matrix(static_cast<Eigen::Index>(r), c) = in.f32();
  }
  if (rows == count && !in.at_end()) throw FormatError(name + ": trailing bytes after matrix");
  tokens.resize(rows);
  return assemble(options.language_tag, std::move(tokens), std::move(matrix));
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::string language_tag, std::vector<std::string> tokens, RowMatrix matrix)
    : language_tag_(std::move(language_tag)), tokens_(std::move(tokens)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != tokens_.size()) {
    throw Error("embedding store: " + std::to_string(tokens_.size()) + " tokens but " +
                std::to_string(matrix_.rows()) + " rows");
  }
  if (!tokens_.empty() && matrix_.cols() == 0) throw Error("embedding store: dimension must be positive");
  if (!matrix_.allFinite()) throw Error("embedding store: non-finite component");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw Error("embedding store: empty token at row " + std::to_string(i));
    if (!index_.emplace(tokens_[i], i).second) {
      throw Error("embedding store: duplicate token '" + tokens_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingStore::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Eigen::VectorXd> EmbeddingStore::lookup(std::string_view token) const {
  auto idx = index_of(token);
  if (!idx) return std::nullopt;
  return Eigen::VectorXd(matrix_.row(static_cast<Eigen::Index>(*idx)).transpose());
}

double EmbeddingStore::coverage(std::span<const std::string> tokens) const {
  if (tokens.empty()) return 1.0;
  std::size_t hits = 0;
  for (const auto& t : tokens) hits += contains(t) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

EmbeddingStore EmbeddingStore::normalized() const {
  RowMatrix m = matrix_;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double n = m.row(r).norm();
    if (n > 0.0) m.row(r) /= n;
  }
  return EmbeddingStore(language_tag_, tokens_, std::move(m));
}

LoadedEmbeddings parse_text_embeddings(std::string_view text, const LoadOptions& options,
                                       const std::string& source_name) {
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    while (!text.empty()) {
      auto nl = text.find('\n');
      line = text.substr(0, nl);
      text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  auto where = [&] { return source_name + ":" + std::to_string(line_no); };

  std::string_view line;
  if (!next_line(line)) throw FormatError(source_name + ": empty file");
  std::string_view rest = line;
  std::size_t declared = 0, dim = 0;
  auto f1 = next_field(rest), f2 = next_field(rest);
  if (!parse_number(f1, declared) || !parse_number(f2, dim) || !trim(rest).empty()) {
    throw FormatError(where() + ": malformed header, expected 'vocab_size dimension'");
  }
  if (dim == 0) throw FormatError(where() + ": malformed header, dimension must be positive");
  if (declared == 0) throw FormatError(where() + ": empty vocabulary");

  std::size_t rows = declared;
  if (options.limit) rows = std::min(rows, *options.limit);
  std::vector<std::string> tokens;
  tokens.reserve(rows);
  RowMatrix matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!next_line(line)) {
      throw FormatError(source_name + ": header declares " + std::to_string(declared) + " rows, found " +
                        std::to_string(r));
    }
    rest = line;
    auto token = next_field(rest);
    for (std::size_t c = 0; c < dim; ++c) {
      auto field = next_field(rest);
      if (field.empty()) {
        throw FormatError(where() + ": row has " + std::to_string(c) + " components, expected " +
                          std::to_string(dim));
      }
      float v = 0.0f;
      if (!parse_number(field, v)) {
        throw FormatError(where() + ": non-numeric component '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) throw FormatError(where() + ": non-finite component");
      matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    if (!trim(rest).empty()) {
      throw FormatError(where() + ": row has more than " + std::to_string(dim) + " components");
    }
    tokens.emplace_back(token);
  }
  if (rows == declared && next_line(line)) {
    throw FormatError(where() + ": more rows than the header declares");
  }
  auto out = assemble(options.language_tag, std::move(tokens), std::move(matrix));
  if (options.normalize) out.store = out.store.normalized();
  return out;
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path, const LoadOptions& options) {
  auto bytes = io::read_file(path);
  auto opts = options;
  if (opts.language_tag.empty()) opts.language_tag = path.stem().string();
  if (bytes.starts_with(kEmbeddingMagic)) {
    auto out = parse_binary(bytes, opts, path.string());
    if (opts.normalize) out.store = out.store.normalized();
    return out;
  }
  return parse_text_embeddings(bytes, opts, path.string());
}

std::string to_text(const EmbeddingStore& store) {
  std::string out = std::to_string(store.size()) + " " + std::to_string(store.dimension()) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < store.size(); ++i) {
    out += store.token(i);
    for (auto v : store.row(i)) {
      std::snprintf(buf, sizeof buf, " %.9g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_text(const EmbeddingStore& store, const std::filesystem::path& path) {
  io::write_file_atomic(path, to_text(store));
}

std::string to_binary(const EmbeddingStore& store) {
  io::ByteWriter w;
  w.bytes(kEmbeddingMagic);
  w.u8(kEmbeddingVersion);
  w.u32(static_cast<std::uint32_t>(store.dimension()));
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (const auto& t : store.vocab()) w.str(t);
  const auto& m = store.matrix();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f32(static_cast<float>(m(r, c)));
  }
  return w.data();
}

void save_binary(const EmbeddingStore& store, const std::filesystem::path& path) {
  io::write_file_atomic(path, to_binary(store));
}

}  // namespace bwe
