#include "ntrocr/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "ntrocr/errors.hpp"
#include "ntrocr/script.hpp"

namespace ntrocr {

namespace {

std::vector<std::string> ref_clusters_checked(const std::string& ref) {
  std::vector<std::string> clusters = grapheme_split(ref).clusters;
  if (clusters.empty()) throw ValidationError("empty reference");
  return clusters;
}

std::string format_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

EditCounts cer_edits(const std::string& ref, const std::string& hyp) {
  std::vector<std::string> r = ref_clusters_checked(ref);
  std::vector<std::string> h = grapheme_split(hyp).clusters;
  return levenshtein(r, h);
}

double cer(const std::string& ref, const std::string& hyp) {
  std::vector<std::string> r = ref_clusters_checked(ref);
  std::vector<std::string> h = grapheme_split(hyp).clusters;
  return static_cast<double>(levenshtein(r, h).total()) /
         static_cast<double>(r.size());
}

double wer(const std::string& ref, const std::string& hyp) {
  std::vector<std::string> r = split_words(ref);
  if (r.empty()) throw ValidationError("empty reference");
  std::vector<std::string> h = split_words(hyp);
  return static_cast<double>(levenshtein(r, h).total()) /
         static_cast<double>(r.size());
}

double cer_codepoints(const std::string& ref, const std::string& hyp) {
  std::vector<uint32_t> r = decode_utf8(ref);
  if (r.empty()) throw ValidationError("empty reference");
  std::vector<uint32_t> h = decode_utf8(hyp);
  return static_cast<double>(levenshtein(r, h).total()) /
         static_cast<double>(r.size());
}

SampleScore score_sample(const std::string& id, const std::string& ref,
                         const std::string& hyp) {
  try {
    SampleScore s;
    s.id = id;

    std::vector<std::string> ref_g = ref_clusters_checked(ref);
    std::vector<std::string> hyp_g = grapheme_split(hyp).clusters;
    s.char_edits = levenshtein(ref_g, hyp_g);
    s.ref_len = static_cast<long>(ref_g.size());
    s.cer = static_cast<double>(s.char_edits.total()) / s.ref_len;

    std::vector<std::string> ref_w = split_words(ref);
    if (ref_w.empty()) throw ValidationError("empty reference");
    std::vector<std::string> hyp_w = split_words(hyp);
    s.word_edits = levenshtein(ref_w, hyp_w);
    s.ref_words = static_cast<long>(ref_w.size());
    s.wer = static_cast<double>(s.word_edits.total()) / s.ref_words;

    std::vector<uint32_t> ref_c = decode_utf8(ref);
    std::vector<uint32_t> hyp_c = decode_utf8(hyp);
    s.cp_edits = levenshtein(ref_c, hyp_c);
    s.ref_cps = static_cast<long>(ref_c.size());
    return s;
  } catch (const ValidationError& e) {
    throw ValidationError("sample " + id + ": " + e.what());
  }
}

EvalReport accuracy_report(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) throw ValidationError("no samples to score");
  EvalReport report;
  report.samples.reserve(pairs.size());
  for (const EvalPair& p : pairs) {
    report.samples.push_back(score_sample(p.id, p.ref, p.hyp));
  }
  std::sort(report.samples.begin(), report.samples.end(),
            [](const SampleScore& a, const SampleScore& b) {
              return a.id < b.id;
            });

  long char_edits = 0, ref_len = 0, word_edits = 0, ref_words = 0;
  long cp_edits = 0, ref_cps = 0;
  double cer_sum = 0.0, wer_sum = 0.0, cp_cer_sum = 0.0;
  for (const SampleScore& s : report.samples) {
    char_edits += s.char_edits.total();
    ref_len += s.ref_len;
    word_edits += s.word_edits.total();
    ref_words += s.ref_words;
    cp_edits += s.cp_edits.total();
    ref_cps += s.ref_cps;
    cer_sum += s.cer;
    wer_sum += s.wer;
    cp_cer_sum += static_cast<double>(s.cp_edits.total()) / s.ref_cps;
  }
  double n = static_cast<double>(report.samples.size());
  report.micro_cer = static_cast<double>(char_edits) / ref_len;
  report.micro_wer = static_cast<double>(word_edits) / ref_words;
  report.micro_cer_codepoints = static_cast<double>(cp_edits) / ref_cps;
  report.macro_cer = cer_sum / n;
  report.macro_wer = wer_sum / n;
  report.macro_cer_codepoints = cp_cer_sum / n;
  report.char_accuracy = 1.0 - std::min(1.0, report.micro_cer);
  report.word_accuracy = 1.0 - std::min(1.0, report.micro_wer);
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "id,cer,wer,subs,ins,dels,ref_len,ref_words\n";
  for (const SampleScore& s : report.samples) {
    out += s.id;
    out += ',' + format_rate(s.cer) + ',' + format_rate(s.wer);
    out += ',' + std::to_string(s.char_edits.substitutions);
    out += ',' + std::to_string(s.char_edits.insertions);
    out += ',' + std::to_string(s.char_edits.deletions);
    out += ',' + std::to_string(s.ref_len);
    out += ',' + std::to_string(s.ref_words);
    out += '\n';
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  long char_edits = 0, ref_len = 0, word_edits = 0, ref_words = 0;
  long cp_edits = 0, ref_cps = 0;
  for (const SampleScore& s : report.samples) {
    char_edits += s.char_edits.total();
    ref_len += s.ref_len;
    word_edits += s.word_edits.total();
    ref_words += s.ref_words;
    cp_edits += s.cp_edits.total();
    ref_cps += s.ref_cps;
  }
  nlohmann::json j{
      {"samples", report.samples.size()},
      {"micro_cer", report.micro_cer},
      {"macro_cer", report.macro_cer},
      {"micro_wer", report.micro_wer},
      {"macro_wer", report.macro_wer},
      {"micro_cer_codepoints", report.micro_cer_codepoints},
      {"macro_cer_codepoints", report.macro_cer_codepoints},
      {"char_accuracy", report.char_accuracy},
      {"word_accuracy", report.word_accuracy},
      {"total_char_edits", char_edits},
      {"total_ref_clusters", ref_len},
      {"total_word_edits", word_edits},
      {"total_ref_words", ref_words},
      {"total_codepoint_edits", cp_edits},
      {"total_ref_codepoints", ref_cps},
  };
  return j.dump(2) + "\n";
}

}  // namespace ntrocr
