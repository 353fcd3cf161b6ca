#include "ntrocr/script.hpp"

#include <array>
#include <sstream>
#include <stdexcept>

namespace ntrocr {

namespace {

using Class = CodepointClass;
using BlockTable = std::array<Class, 128>;

void fill(BlockTable& t, uint32_t lo, uint32_t hi, uint32_t base, Class c) {
  for (uint32_t cp = lo; cp <= hi; ++cp) t[cp - base] = c;
}

BlockTable make_devanagari_table() {
  constexpr uint32_t B = 0x0900;
  BlockTable t;
  t.fill(Class::Other);
  fill(t, 0x0900, 0x0903, B, Class::Modifier);
  fill(t, 0x0904, 0x0914, B, Class::IndependentVowel);
  fill(t, 0x0915, 0x0939, B, Class::Consonant);
  fill(t, 0x093A, 0x093B, B, Class::DependentVowelSign);
  fill(t, 0x093C, 0x093C, B, Class::Nukta);
  fill(t, 0x093E, 0x094C, B, Class::DependentVowelSign);
  fill(t, 0x094D, 0x094D, B, Class::Virama);
  fill(t, 0x094E, 0x094F, B, Class::DependentVowelSign);
  fill(t, 0x0951, 0x0954, B, Class::Modifier);
  fill(t, 0x0955, 0x0957, B, Class::DependentVowelSign);
  fill(t, 0x0958, 0x095F, B, Class::Consonant);
  fill(t, 0x0960, 0x0961, B, Class::IndependentVowel);
  fill(t, 0x0962, 0x0963, B, Class::DependentVowelSign);
  fill(t, 0x0966, 0x096F, B, Class::Digit);
  fill(t, 0x0972, 0x0977, B, Class::IndependentVowel);
  fill(t, 0x0978, 0x097F, B, Class::Consonant);
  return t;
}

BlockTable make_bengali_table() {
  constexpr uint32_t B = 0x0980;
  BlockTable t;
  t.fill(Class::Other);
  fill(t, 0x0981, 0x0983, B, Class::Modifier);
  fill(t, 0x0985, 0x098C, B, Class::IndependentVowel);
  fill(t, 0x098F, 0x0990, B, Class::IndependentVowel);
  fill(t, 0x0993, 0x0994, B, Class::IndependentVowel);
  fill(t, 0x0995, 0x09A8, B, Class::Consonant);
  fill(t, 0x09AA, 0x09B0, B, Class::Consonant);
  fill(t, 0x09B2, 0x09B2, B, Class::Consonant);
  fill(t, 0x09B6, 0x09B9, B, Class::Consonant);
  fill(t, 0x09BC, 0x09BC, B, Class::Nukta);
  fill(t, 0x09BE, 0x09C4, B, Class::DependentVowelSign);
  fill(t, 0x09C7, 0x09C8, B, Class::DependentVowelSign);
  fill(t, 0x09CB, 0x09CC, B, Class::DependentVowelSign);
  fill(t, 0x09CD, 0x09CD, B, Class::Virama);
  fill(t, 0x09CE, 0x09CE, B, Class::Consonant);  // khanda ta
  fill(t, 0x09D7, 0x09D7, B, Class::DependentVowelSign);  // AU length mark
  fill(t, 0x09DC, 0x09DD, B, Class::Consonant);
  fill(t, 0x09DF, 0x09DF, B, Class::Consonant);
  fill(t, 0x09E0, 0x09E1, B, Class::IndependentVowel);
  fill(t, 0x09E2, 0x09E3, B, Class::DependentVowelSign);
  fill(t, 0x09E6, 0x09EF, B, Class::Digit);
  fill(t, 0x09F0, 0x09F1, B, Class::Consonant);
  fill(t, 0x09FE, 0x09FE, B, Class::Modifier);  // sandhi mark
  return t;
}

bool is_ascii_space(uint32_t cp) {
  return cp == 0x20 || (cp >= 0x09 && cp <= 0x0D);
}

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

CodepointClass classify_codepoint(uint32_t cp) {
  static const BlockTable devanagari = make_devanagari_table();
  static const BlockTable bengali = make_bengali_table();
  if (cp >= 0x0900 && cp <= 0x097F) return devanagari[cp - 0x0900];
  if (cp >= 0x0980 && cp <= 0x09FF) return bengali[cp - 0x0980];
  if (is_ascii_space(cp)) return CodepointClass::Whitespace;
  return CodepointClass::Other;
}

DecodedCp decode_utf8_at(const std::string& text, size_t pos) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
  const size_t n = text.size();
  const unsigned char b0 = bytes[pos];
  if (b0 < 0x80) return {b0, 1};

  int extra;
  uint32_t cp;
  uint32_t min_cp;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
    min_cp = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
    min_cp = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
    min_cp = 0x10000;
  } else {
    return {b0, 1};  // stray continuation or invalid lead byte
  }
  if (pos + static_cast<size_t>(extra) >= n) return {b0, 1};
  for (int i = 1; i <= extra; ++i) {
    if (!is_continuation(bytes[pos + static_cast<size_t>(i)])) return {b0, 1};
    cp = (cp << 6) | (bytes[pos + static_cast<size_t>(i)] & 0x3F);
  }
  if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return {b0, 1};
  }
  return {cp, extra + 1};
}

std::string encode_utf8(uint32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::vector<uint32_t> decode_utf8(const std::string& text) {
  std::vector<uint32_t> cps;
  size_t pos = 0;
  while (pos < text.size()) {
    DecodedCp d = decode_utf8_at(text, pos);
    cps.push_back(d.cp);
    pos += static_cast<size_t>(d.len);
  }
  return cps;
}

std::string GraphemeString::join() const {
  std::string out;
  for (const std::string& c : clusters) out += c;
  return out;
}

namespace {

bool glues_to_previous(CodepointClass c) {
  return c == CodepointClass::DependentVowelSign ||
         c == CodepointClass::Nukta || c == CodepointClass::Modifier ||
         c == CodepointClass::Virama;
}

}  // namespace

GraphemeString grapheme_split(const std::string& text) {
  GraphemeString out;
  size_t pos = 0;
  size_t cluster_start = 0;
  bool have_cluster = false;
  bool prev_virama = false;
  bool first_cp = true;

  while (pos < text.size()) {
    DecodedCp d = decode_utf8_at(text, pos);
    CodepointClass cls = classify_codepoint(d.cp);
    bool start_new = !(glues_to_previous(cls) || prev_virama);
    if (first_cp) {
      if (glues_to_previous(cls)) out.leading_defective = true;
      start_new = true;
      first_cp = false;
    }
    if (start_new && have_cluster) {
      out.clusters.push_back(text.substr(cluster_start, pos - cluster_start));
      cluster_start = pos;
    }
    have_cluster = true;
    prev_virama = (cls == CodepointClass::Virama);
    pos += static_cast<size_t>(d.len);
  }
  if (have_cluster) {
    out.clusters.push_back(text.substr(cluster_start, pos - cluster_start));
  }
  return out;
}

int Vocab::lookup(const std::string& cluster) const {
  auto it = cluster_to_id.find(cluster);
  return it == cluster_to_id.end() ? kUnkId : it->second;
}

Vocab build_vocab(const std::vector<std::string>& corpus) {
  Vocab v;
  v.id_to_cluster = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (const std::string& line : corpus) {
    GraphemeString g = grapheme_split(line);
    for (const std::string& cluster : g.clusters) {
      if (v.cluster_to_id.emplace(cluster, v.size()).second) {
        v.id_to_cluster.push_back(cluster);
      }
    }
  }
  return v;
}

std::vector<int> encode_text(const std::string& text, const Vocab& vocab) {
  std::vector<int> ids;
  GraphemeString g = grapheme_split(text);
  ids.reserve(g.clusters.size() + 2);
  ids.push_back(kBosId);
  for (const std::string& cluster : g.clusters) {
    ids.push_back(vocab.lookup(cluster));
  }
  ids.push_back(kEosId);
  return ids;
}

std::string decode_tokens(const std::vector<int>& ids, const Vocab& vocab) {
  std::string out;
  size_t i = 0;
  if (!ids.empty() && ids[0] == kBosId) i = 1;
  for (; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id == kEosId) break;
    if (id == kPadId || id == kBosId) continue;
    if (id == kUnkId) {
      out += encode_utf8(0xFFFD);
      continue;
    }
    if (id < 0 || id >= vocab.size()) {
      throw std::out_of_range("decode_tokens: id " + std::to_string(id) +
                              " outside vocab of " +
                              std::to_string(vocab.size()));
    }
    out += vocab.id_to_cluster[static_cast<size_t>(id)];
  }
  return out;
}

std::string vocab_dump(const Vocab& vocab) {
  static const char* kSpecialNames[4] = {"PAD", "BOS", "EOS", "UNK"};
  std::ostringstream os;
  for (int id = 0; id < vocab.size(); ++id) {
    os << id << '\t';
    if (id < 4) {
      os << kSpecialNames[id];
    } else {
      const std::string& cluster = vocab.id_to_cluster[static_cast<size_t>(id)];
      bool first = true;
      for (uint32_t cp : decode_utf8(cluster)) {
        if (!first) os << ' ';
        first = false;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04X", cp);
        os << buf;
      }
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    while (i < n && is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < n && !is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

}  // namespace ntrocr
