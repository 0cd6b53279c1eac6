#pragma once

// Text ingestion: paragraph/sentence/token segmentation, the two shuffled
// null models, transcriber voting and truncation to a fixed node count.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parnet/error.hpp"
#include "parnet/random.hpp"
#include "parnet/unicode.hpp"

namespace parnet {

enum class DocKind { RT, SW, SS };

inline std::string_view to_string(DocKind k) {
  switch (k) {
    case DocKind::RT: return "RT";
    case DocKind::SW: return "SW";
    case DocKind::SS: return "SS";
  }
  return "?";
}

inline DocKind parse_kind(std::string_view s) {
  if (s == "RT") return DocKind::RT;
  if (s == "SW") return DocKind::SW;
  if (s == "SS") return DocKind::SS;
  throw Error("unknown document kind '" + std::string(s) + "'");
}

using Token = std::string;

struct Sentence {
  std::vector<Token> tokens;
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Paragraph {
  std::size_t index = 0;
  std::vector<Sentence> sentences;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
  }
  /// All tokens in reading order.
  std::vector<Token> tokens() const {
    std::vector<Token> out;
    out.reserve(token_count());
    for (const auto& s : sentences) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
    return out;
  }
  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

struct Document {
  std::string id;
  DocKind kind = DocKind::RT;
  std::vector<Paragraph> paragraphs;
  std::optional<int> sample_index;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& p : paragraphs) n += p.token_count();
    return n;
  }
  friend bool operator==(const Document&, const Document&) = default;
};

struct RawDocument {
  std::string id;
  std::string text;
  std::optional<std::string> language;
  std::string dataset_label;
};

/// One manuscript line as read by several transcribers, in priority order.
struct TranscriptionLineSet {
  std::vector<std::string> variants;
};

// ---------------------------------------------------------------------------
// Segmentation

namespace detail {
inline bool is_blank(std::string_view line) {
  for (std::size_t pos = 0; pos < line.size();) {
    if (!unicode::is_space(unicode::next_code_point(line, pos))) return false;
  }
  return true;
}

inline std::string_view trim_ascii(std::string_view s) {
  constexpr std::string_view ws = " \t\n\r\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}
}  // namespace detail

/// Splits text into blocks separated by one or more blank lines. CR and CRLF
/// line endings are normalized first.
inline std::vector<std::string> segment_paragraphs(std::string_view text) {
  std::string norm;
  norm.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      norm.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      norm.push_back(text[i]);
    }
  }

  std::vector<std::string> blocks;
  std::string current;
  std::size_t start = 0;
  while (start <= norm.size()) {
    auto end = norm.find('\n', start);
    if (end == std::string::npos) end = norm.size();
    std::string_view line(norm.data() + start, end - start);
    if (detail::is_blank(line)) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
    start = end + 1;
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  if (blocks.empty()) throw Error("empty document: no non-blank paragraph found");
  return blocks;
}

/// Sentences end at '.', '!' or '?' followed by whitespace or the end of the
/// block; the terminator stays with its sentence.
inline std::vector<std::string> split_sentences(std::string_view block) {
  std::vector<std::string> out;
  std::size_t sentence_start = 0;
  std::size_t pos = 0;
  auto flush = [&](std::size_t end) {
    auto s = detail::trim_ascii(block.substr(sentence_start, end - sentence_start));
    if (!s.empty()) out.emplace_back(s);
    sentence_start = end;
  };
  while (pos < block.size()) {
    const char32_t cp = unicode::next_code_point(block, pos);
    if (cp != '.' && cp != '!' && cp != '?') continue;
    if (pos == block.size()) break;
    std::size_t peek = pos;
    if (unicode::is_space(unicode::next_code_point(block, peek))) flush(pos);
  }
  flush(block.size());
  return out;
}

/// Lowercased maximal runs of Unicode letters; everything else separates.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::string current;
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t cp = unicode::next_code_point(text, pos);
    if (unicode::is_letter(cp)) {
      unicode::append_utf8(current, unicode::to_lower(cp));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

/// segment -> split -> tokenize. Sentences and paragraphs without a single
/// letter token are dropped, so every paragraph of the result is non-empty.
inline Document parse_document(std::string id, std::string_view text) {
  Document doc;
  doc.id = std::move(id);
  doc.kind = DocKind::RT;
  for (const auto& block : segment_paragraphs(text)) {
    Paragraph p;
    p.index = doc.paragraphs.size();
    for (const auto& s : split_sentences(block)) {
      auto toks = tokenize(s);
      if (!toks.empty()) p.sentences.push_back(Sentence{std::move(toks)});
    }
    if (!p.sentences.empty()) doc.paragraphs.push_back(std::move(p));
  }
  if (doc.paragraphs.empty())
    throw Error("empty document: '" + doc.id + "' contains no letter tokens");
  return doc;
}

inline Document parse_document(const RawDocument& raw) { return parse_document(raw.id, raw.text); }

// ---------------------------------------------------------------------------
// Null models

namespace detail {
inline void require_real(const Document& doc, std::string_view op) {
  if (doc.kind != DocKind::RT)
    throw Error(std::string(op) + " expects a real-text document, got " +
                std::string(to_string(doc.kind)) + " for '" + doc.id + "'");
}
}  // namespace detail

/// Permutes every token of the document uniformly, then re-slices the stream
/// into the original paragraph lengths. Each output paragraph holds a single
/// pseudo-sentence.
inline Document shuffle_words(const Document& doc, std::uint64_t seed) {
  detail::require_real(doc, "shuffle_words");
  std::vector<Token> pool;
  pool.reserve(doc.token_count());
  for (const auto& p : doc.paragraphs)
    for (const auto& s : p.sentences) pool.insert(pool.end(), s.tokens.begin(), s.tokens.end());

  Rng rng(seed);
  shuffle_in_place(std::span<Token>(pool), rng);

  Document out{doc.id, DocKind::SW, {}, std::nullopt};
  out.paragraphs.reserve(doc.paragraphs.size());
  auto it = pool.begin();
  for (const auto& p : doc.paragraphs) {
    const auto n = static_cast<std::ptrdiff_t>(p.token_count());
    Sentence pseudo{std::vector<Token>(std::make_move_iterator(it), std::make_move_iterator(it + n))};
    it += n;
    out.paragraphs.push_back(Paragraph{p.index, {std::move(pseudo)}});
  }
  return out;
}

/// Permutes sentences across the whole document and re-slices them into the
/// original sentences-per-paragraph counts. Sentence contents are untouched.
inline Document shuffle_sentences(const Document& doc, std::uint64_t seed) {
  detail::require_real(doc, "shuffle_sentences");
  std::vector<Sentence> pool;
  for (const auto& p : doc.paragraphs) pool.insert(pool.end(), p.sentences.begin(), p.sentences.end());

  Rng rng(seed);
  shuffle_in_place(std::span<Sentence>(pool), rng);

  Document out{doc.id, DocKind::SS, {}, std::nullopt};
  out.paragraphs.reserve(doc.paragraphs.size());
  auto it = pool.begin();
  for (const auto& p : doc.paragraphs) {
    const auto n = static_cast<std::ptrdiff_t>(p.sentences.size());
    out.paragraphs.push_back(Paragraph{
        p.index, std::vector<Sentence>(std::make_move_iterator(it), std::make_move_iterator(it + n))});
    it += n;
  }
  return out;
}

/// Keeps the first `n` paragraphs.
inline Document truncate_paragraphs(const Document& doc, std::size_t n) {
  if (doc.paragraphs.size() < n)
    throw Error("document too short: '" + doc.id + "' has " + std::to_string(doc.paragraphs.size()) +
                " paragraphs, " + std::to_string(n) + " required");
  Document out = doc;
  out.paragraphs.resize(n);
  return out;
}

// ---------------------------------------------------------------------------
// Transcriber voting

/// Votes one line. Output length is the most common variant length (ties go
/// to the length seen first); each position takes the most common character
/// among variants that reach it, ties going to the earliest variant.
inline std::string vote_line(const std::vector<std::string>& variants) {
  if (variants.empty()) throw Error("transcription line without variants");
  std::vector<std::u32string> decoded;
  decoded.reserve(variants.size());
  for (const auto& v : variants) decoded.push_back(unicode::decode(v));

  std::map<std::size_t, std::size_t> length_votes;
  for (const auto& d : decoded) ++length_votes[d.size()];
  std::size_t length = decoded.front().size();
  std::size_t best = 0;
  for (const auto& d : decoded) {  // earliest variant wins among tied lengths
    const auto votes = length_votes[d.size()];
    if (votes > best) {
      best = votes;
      length = d.size();
    }
  }

  std::u32string out;
  out.reserve(length);
  for (std::size_t pos = 0; pos < length; ++pos) {
    std::vector<std::pair<char32_t, std::size_t>> tally;  // first-seen order
    for (const auto& d : decoded) {
      if (d.size() <= pos) continue;
      auto hit = std::find_if(tally.begin(), tally.end(), [&](auto& t) { return t.first == d[pos]; });
      if (hit == tally.end())
        tally.emplace_back(d[pos], 1);
      else
        ++hit->second;
    }
    auto winner = tally.front();
    for (const auto& t : tally)
      if (t.second > winner.second) winner = t;
    out.push_back(winner.first);
  }
  return unicode::encode(out);
}

/// Voted text, one output line per input line, joined with '\n'.
inline std::string vote_transcription(const std::vector<TranscriptionLineSet>& lines) {
  if (lines.empty()) throw Error("transcription has no lines");
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += vote_line(lines[i].variants);
  }
  return out;
}

}  // namespace parnet
