#pragma once

#include <string>
#include <vector>

namespace ntrocr {

struct EditCounts {
  long substitutions = 0;
  long insertions = 0;
  long deletions = 0;
  long total() const { return substitutions + insertions + deletions; }
};

// Unit-cost edit distance transforming ref into hyp. The backtrace resolves
// ties preferring substitution, then deletion, then insertion.
template <typename Symbol>
EditCounts levenshtein(const std::vector<Symbol>& ref,
                       const std::vector<Symbol>& hyp) {
  size_t m = ref.size();
  size_t n = hyp.size();
  std::vector<int> d((m + 1) * (n + 1));
  auto cell = [&](size_t i, size_t j) -> int& { return d[i * (n + 1) + j]; };
  for (size_t i = 0; i <= m; ++i) cell(i, 0) = static_cast<int>(i);
  for (size_t j = 0; j <= n; ++j) cell(0, j) = static_cast<int>(j);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      int diag = cell(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int del = cell(i - 1, j) + 1;
      int ins = cell(i, j - 1) + 1;
      cell(i, j) = std::min(diag, std::min(del, ins));
    }
  }
  EditCounts counts;
  size_t i = m;
  size_t j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] &&
        cell(i, j) == cell(i - 1, j - 1)) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && cell(i, j) == cell(i - 1, j - 1) + 1) {
      ++counts.substitutions;
      --i;
      --j;
    } else if (i > 0 && cell(i, j) == cell(i - 1, j) + 1) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

// Grapheme-cluster error rate; reference must split to at least one cluster.
double cer(const std::string& ref, const std::string& hyp);
EditCounts cer_edits(const std::string& ref, const std::string& hyp);

// Word error rate over whitespace-separated tokens.
double wer(const std::string& ref, const std::string& hyp);

// Codepoint-level variant, reported alongside the cluster-level rate.
double cer_codepoints(const std::string& ref, const std::string& hyp);

struct EvalPair {
  std::string id;
  std::string ref;
  std::string hyp;
};

struct SampleScore {
  std::string id;
  double cer = 0.0;
  double wer = 0.0;
  EditCounts char_edits;  // grapheme-cluster level
  EditCounts word_edits;
  EditCounts cp_edits;
  long ref_len = 0;  // grapheme clusters in ref
  long ref_words = 0;
  long ref_cps = 0;
};

struct EvalReport {
  std::vector<SampleScore> samples;  // sorted by id
  double micro_cer = 0.0;
  double macro_cer = 0.0;
  double micro_wer = 0.0;
  double macro_wer = 0.0;
  double micro_cer_codepoints = 0.0;
  double macro_cer_codepoints = 0.0;
  double char_accuracy = 1.0;
  double word_accuracy = 1.0;
};

SampleScore score_sample(const std::string& id, const std::string& ref,
                         const std::string& hyp);

// Scores every pair, sorts by id, aggregates with exact integer sums.
// Per-sample validation failures are rethrown naming the sample id.
EvalReport accuracy_report(const std::vector<EvalPair>& pairs);

// CSV with header id,cer,wer,subs,ins,dels,ref_len,ref_words
std::string report_csv(const EvalReport& report);

// JSON object with the aggregate fields.
std::string report_json(const EvalReport& report);

}  // namespace ntrocr
