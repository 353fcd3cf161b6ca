#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace ntrocr {

// Special token ids shared by the vocabulary and the decoder.
constexpr int kPadId = 0;
constexpr int kBosId = 1;
constexpr int kEosId = 2;
constexpr int kUnkId = 3;

enum class CodepointClass {
  IndependentVowel,
  Consonant,
  DependentVowelSign,
  Virama,
  Nukta,
  Modifier,  // candrabindu, anusvara, visarga
  Digit,
  Whitespace,
  Other,
};

/// Table-driven classification covering Bengali (U+0980..U+09FF) and
/// Devanagari (U+0900..U+097F). Everything else is Whitespace or Other.
CodepointClass classify_codepoint(uint32_t cp);

// Lenient UTF-8 iteration: a malformed byte decodes as its own value and
// advances one byte, so cluster boundaries always land on byte boundaries
// of the original string.
struct DecodedCp {
  uint32_t cp;
  int len;
};
DecodedCp decode_utf8_at(const std::string& text, size_t pos);
std::string encode_utf8(uint32_t cp);
std::vector<uint32_t> decode_utf8(const std::string& text);

/// Text split into grapheme clusters; joining clusters restores the input.
struct GraphemeString {
  std::vector<std::string> clusters;
  // Set when the text opens with a dependent sign, virama, nukta, or
  // modifier; that run still becomes the first cluster.
  bool leading_defective = false;

  std::string join() const;
  size_t size() const { return clusters.size(); }
};

// New cluster at codepoint c unless c is a dependent sign / nukta /
// modifier, c is a virama, or the previous codepoint was a virama.
GraphemeString grapheme_split(const std::string& text);

/// Bidirectional cluster <-> id map with PAD/BOS/EOS/UNK at ids 0..3.
struct Vocab {
  std::unordered_map<std::string, int> cluster_to_id;
  std::vector<std::string> id_to_cluster;  // specials hold placeholder names

  int size() const { return static_cast<int>(id_to_cluster.size()); }
  int lookup(const std::string& cluster) const;  // kUnkId when absent
};

// Ids assigned in first-appearance order over the corpus, after specials.
Vocab build_vocab(const std::vector<std::string>& corpus);

// BOS + per-cluster ids (UNK for unseen) + EOS.
std::vector<int> encode_text(const std::string& text, const Vocab& vocab);

// Concatenates clusters strictly between BOS and the first EOS.
// PAD renders as nothing, UNK as U+FFFD. Unknown id -> out_of_range.
std::string decode_tokens(const std::vector<int>& ids, const Vocab& vocab);

// Line-oriented "id<TAB>hex codepoints" dump for inspection.
std::string vocab_dump(const Vocab& vocab);

// Whitespace-run tokenization used by word-level scoring.
std::vector<std::string> split_words(const std::string& text);

}  // namespace ntrocr
