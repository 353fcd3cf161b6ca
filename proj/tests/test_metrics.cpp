#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <string>
#include <vector>

#include "ntrocr/errors.hpp"
#include "ntrocr/metrics.hpp"
#include "ntrocr/rng.hpp"

using namespace ntrocr;

namespace {

std::vector<char> chars(const std::string& s) {
  return std::vector<char>(s.begin(), s.end());
}

long lev(const std::string& a, const std::string& b) {
  return levenshtein(chars(a), chars(b)).total();
}

// Top-down evaluation of the textbook recurrence, memoized for speed.
// Independent of the production bottom-up DP with backtrace.
struct BruteForce {
  const std::string& a;
  const std::string& b;
  std::vector<int> memo;

  BruteForce(const std::string& a_, const std::string& b_)
      : a(a_), b(b_), memo((a.size() + 1) * (b.size() + 1), -1) {}

  int solve(size_t i, size_t j) {
    if (i == 0) return static_cast<int>(j);
    if (j == 0) return static_cast<int>(i);
    int& slot = memo[i * (b.size() + 1) + j];
    if (slot >= 0) return slot;
    int best = solve(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
    best = std::min(best, solve(i - 1, j) + 1);
    best = std::min(best, solve(i, j - 1) + 1);
    return slot = best;
  }

  int run() { return solve(a.size(), b.size()); }
};

std::vector<std::string> all_strings_up_to(int max_len) {
  std::vector<std::string> out{""};
  std::vector<std::string> frontier{""};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const std::string& s : frontier) {
      for (char c : {'a', 'b', 'c'}) {
        next.push_back(s + c);
        out.push_back(s + c);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

// 10 identical Bengali clusters, optionally substituting some with another
std::string ka_run(int n_subs) {
  std::string out;
  for (int i = 0; i < 10; ++i) out += (i < n_subs) ? "খ" : "ক";
  return out;
}

}  // namespace

TEST_CASE("levenshtein classic cases") {
  CHECK(lev("kitten", "sitting") == 3);
  CHECK(lev("", "") == 0);
  CHECK(lev("abc", "abc") == 0);

  EditCounts gone = levenshtein(chars("abc"), chars(""));
  CHECK(gone.total() == 3);
  CHECK(gone.deletions == 3);

  EditCounts grown = levenshtein(chars(""), chars("abc"));
  CHECK(grown.insertions == 3);

  EditCounts kitten = levenshtein(chars("kitten"), chars("sitting"));
  CHECK(kitten.total() == 3);
  CHECK(kitten.substitutions == 2);
  CHECK(kitten.insertions == 1);
  CHECK(kitten.deletions == 0);
}

TEST_CASE("backtrace ties prefer substitution") {
  EditCounts swapped = levenshtein(chars("ab"), chars("ba"));
  CHECK(swapped.total() == 2);
  CHECK(swapped.substitutions == 2);
  CHECK(swapped.insertions == 0);
  CHECK(swapped.deletions == 0);

  EditCounts single = levenshtein(chars("a"), chars("b"));
  CHECK(single.substitutions == 1);
}

TEST_CASE("matches brute force on all pairs up to length 4") {
  std::vector<std::string> strings = all_strings_up_to(4);
  for (const std::string& a : strings) {
    for (const std::string& b : strings) {
      int expected = BruteForce(a, b).run();
      EditCounts got = levenshtein(chars(a), chars(b));
      CHECK(got.total() == expected);
    }
  }
}

TEST_CASE("matches brute force on sampled length-5 pairs") {
  Rng rng(606);
  auto random_string = [&rng]() {
    std::string s;
    size_t len = rng.below(6);
    for (size_t i = 0; i < len; ++i) s += static_cast<char>('a' + rng.below(3));
    return s;
  };
  for (int trial = 0; trial < 3000; ++trial) {
    std::string a = random_string();
    std::string b = random_string();
    CHECK(lev(a, b) == BruteForce(a, b).run());
  }
}

TEST_CASE("levenshtein is a metric on small strings") {
  std::vector<std::string> strings = all_strings_up_to(3);
  size_t n = strings.size();
  std::vector<int> dist(n * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      dist[i * n + j] = static_cast<int>(lev(strings[i], strings[j]));
    }
  }
  for (size_t i = 0; i < n; ++i) {
    CHECK(dist[i * n + i] == 0);
    for (size_t j = 0; j < n; ++j) {
      CHECK(dist[i * n + j] == dist[j * n + i]);
      if (i != j) CHECK(dist[i * n + j] > 0);
      for (size_t k = 0; k < n; ++k) {
        CHECK(dist[i * n + k] <= dist[i * n + j] + dist[j * n + k]);
      }
    }
  }
}

TEST_CASE("cer worked examples") {
  CHECK(cer("hello", "hello") == 0.0);
  CHECK(cer(ka_run(0), ka_run(1)) == 0.1);
  CHECK(cer("কি", "ক") == 1.0);
  // cluster counts, not codepoints: substituting a full conjunct is one edit
  CHECK(cer("ক্ক", "ক") == 1.0);
}

TEST_CASE("cer rejects empty reference") {
  CHECK_THROWS_WITH_AS(cer("", "abc"), "empty reference", ValidationError);
  CHECK_NOTHROW(cer("abc", ""));
  CHECK(cer("abc", "") == 1.0);
}

TEST_CASE("wer worked examples") {
  CHECK(wer("x y", "x y") == 0.0);
  CHECK(wer("a b c d e f g h i j", "a b c d Q f g h i j") == 0.1);
  CHECK(wer("x y", "x y z") == 0.5);
  CHECK(wer("one  two\tthree", "one two three") == 0.0);
  CHECK_THROWS_AS(wer("   ", "x"), ValidationError);
}

TEST_CASE("cer can exceed one and accuracy clamps") {
  CHECK(cer("a", "abcd") == 3.0);
  EvalReport r = accuracy_report({{"s", "a", "abcd"}});
  CHECK(r.micro_cer == 3.0);
  CHECK(r.char_accuracy == 0.0);
}

TEST_CASE("latin text cer equals codepoint cer") {
  Rng rng(321);
  for (int trial = 0; trial < 50; ++trial) {
    auto random_ascii = [&rng]() {
      std::string s;
      size_t len = 1 + rng.below(12);
      for (size_t i = 0; i < len; ++i) {
        s += static_cast<char>('a' + rng.below(26));
      }
      return s;
    };
    std::string ref = random_ascii();
    std::string hyp = random_ascii();
    CHECK(cer(ref, hyp) == cer_codepoints(ref, hyp));
  }
}

TEST_CASE("accuracy_report on a perfect set") {
  EvalReport r = accuracy_report({{"a", "xy z", "xy z"}, {"b", "ক", "ক"}});
  CHECK(r.micro_cer == 0.0);
  CHECK(r.micro_wer == 0.0);
  CHECK(r.macro_cer == 0.0);
  CHECK(r.char_accuracy == 1.0);
  CHECK(r.word_accuracy == 1.0);
}

TEST_CASE("equal ref lengths make micro and macro agree") {
  EvalReport r = accuracy_report({
      {"a", ka_run(0), ka_run(0)},  // cer 0.0
      {"b", ka_run(0), ka_run(2)},  // cer 0.2
  });
  CHECK(r.micro_cer == doctest::Approx(0.1));
  CHECK(r.macro_cer == doctest::Approx(0.1));
}

TEST_CASE("skewed ref lengths separate micro and macro") {
  std::string ref10 = ka_run(0);
  std::string hyp10 = ka_run(1);  // distance 1
  std::string ref90, hyp90;
  for (int i = 0; i < 9; ++i) ref90 += ka_run(0);
  hyp90 = ref90;  // distance 0
  EvalReport r = accuracy_report({{"a", ref10, hyp10}, {"b", ref90, hyp90}});
  CHECK(r.micro_cer == doctest::Approx(0.01));
  CHECK(r.macro_cer == doctest::Approx(0.05));
}

TEST_CASE("samples are sorted by id and micro matches integer recomputation") {
  EvalReport r = accuracy_report({
      {"zz", "abcd", "abed"},
      {"aa", "hello world", "hello world"},
      {"mm", "xyz", "xy"},
  });
  REQUIRE(r.samples.size() == 3);
  CHECK(r.samples[0].id == "aa");
  CHECK(r.samples[1].id == "mm");
  CHECK(r.samples[2].id == "zz");

  long edits = 0, len = 0;
  for (const SampleScore& s : r.samples) {
    edits += s.char_edits.total();
    len += s.ref_len;
  }
  CHECK(r.micro_cer == static_cast<double>(edits) / static_cast<double>(len));
}

TEST_CASE("report errors name the offending sample") {
  try {
    accuracy_report({{"good", "a", "a"}, {"bad7", "", "x"}});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("bad7") != std::string::npos);
    CHECK(msg.find("empty reference") != std::string::npos);
  }
  CHECK_THROWS_AS(accuracy_report({}), ValidationError);
}

TEST_CASE("csv layout") {
  EvalReport r = accuracy_report({{"s1", ka_run(0), ka_run(1)}});
  std::string csv = report_csv(r);
  CHECK(csv == "id,cer,wer,subs,ins,dels,ref_len,ref_words\n"
               "s1,0.100000,1.000000,1,0,0,10,1\n");
}

TEST_CASE("json summary fields") {
  EvalReport r = accuracy_report({
      {"a", "ab cd", "ab cd"},
      {"b", "ef", "eg"},
  });
  nlohmann::json j = nlohmann::json::parse(report_json(r));
  CHECK(j["samples"] == 2);
  CHECK(j["micro_cer"].get<double>() == doctest::Approx(1.0 / 7.0));
  CHECK(j["macro_cer"].get<double>() == doctest::Approx(0.25));
  CHECK(j["total_char_edits"] == 1);
  CHECK(j["total_ref_clusters"] == 7);
  CHECK(j["char_accuracy"].get<double>() == doctest::Approx(6.0 / 7.0));
  CHECK(j.contains("micro_cer_codepoints"));
  CHECK(j["total_ref_words"] == 3);
}
