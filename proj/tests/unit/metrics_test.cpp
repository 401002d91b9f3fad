#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "aitpr/errors.hpp"
#include "aitpr/metrics.hpp"
#include "aitpr/vocabulary.hpp"
#include "metric_corpora.hpp"

namespace aitpr {
namespace {

using test::Corpus;

Tokens toks(const std::string& s) { return split_tokens(s); }

void expect_matches_oracle(const Corpus& c) {
  for (int n = 1; n <= 4; ++n) {
    EXPECT_NEAR(bleu(c.candidates, c.references, n), c.bleu[n - 1], 1e-6) << c.name << " BLEU-" << n;
  }
  const EvalReport r = evaluate_corpus(c.candidates, c.references);
  EXPECT_NEAR(r.rouge_l, c.rouge_l, 1e-6) << c.name;
  const CiderResult cd = cider_d(c.candidates, c.references);
  EXPECT_NEAR(cd.score, c.cider, 1e-6) << c.name;
  ASSERT_EQ(cd.per_image.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(cd.per_image[i], c.cider_per_image[i], 1e-6) << c.name << " image " << i;
}

TEST(Metrics, CorpusAMatchesOracle) { expect_matches_oracle(test::corpus_a()); }
TEST(Metrics, CorpusBMatchesOracle) { expect_matches_oracle(test::corpus_b()); }
TEST(Metrics, CorpusCMatchesOracle) { expect_matches_oracle(test::corpus_c()); }

TEST(Bleu, IdenticalIsOne) {
  const std::vector<Tokens> c{toks("a red square left-of a blue circle")};
  const std::vector<ReferenceSet> r{{toks("a red square left-of a blue circle")}};
  EXPECT_DOUBLE_EQ(bleu(c, r, 4), 1.0);
}

TEST(Bleu, NoFourGramOverlapIsZero) {
  const std::vector<Tokens> c{toks("a b c d e")};
  const std::vector<ReferenceSet> r{{toks("a b c x d e")}};
  EXPECT_EQ(bleu(c, r, 4), 0.0);
}

TEST(Bleu, BrevityPenaltyByHand) {
  // Every n-gram of the 3-token candidate matches; the 4-token reference sets BP = e^{1-4/3}.
  const std::vector<Tokens> c{toks("a b c")};
  const std::vector<ReferenceSet> r{{toks("a b c d")}};
  EXPECT_NEAR(bleu(c, r, 3), std::exp(1.0 - 4.0 / 3.0), 1e-12);
}

TEST(Bleu, EmptyCandidateSet) {
  EXPECT_THROW(bleu(std::vector<Tokens>{}, std::vector<ReferenceSet>{}, 4), InputError);
}

TEST(Bleu, CorpusOrderDoesNotMatter) {
  Corpus c = test::corpus_a();
  const double base = bleu(c.candidates, c.references, 4);
  std::reverse(c.candidates.begin(), c.candidates.end());
  std::reverse(c.references.begin(), c.references.end());
  EXPECT_NEAR(bleu(c.candidates, c.references, 4), base, 1e-14);
}

TEST(Bleu, FixingAWordDoesNotLowerScore) {
  const std::vector<ReferenceSet> r{{toks("a red square above a green star")}};
  const std::vector<Tokens> worse{toks("a red square above a blue star")};
  const std::vector<Tokens> better{toks("a red square above a green star")};
  for (int n = 1; n <= 4; ++n) EXPECT_GE(bleu(better, r, n), bleu(worse, r, n));
}

TEST(RougeL, IdenticalAndDisjoint) {
  EXPECT_DOUBLE_EQ(rouge_l(toks("a b c"), {toks("a b c")}), 1.0);
  EXPECT_EQ(rouge_l(toks("a b c"), {toks("x y z")}), 0.0);
}

TEST(RougeL, LcsExample) {
  EXPECT_EQ(lcs_length(toks("a b c d"), toks("a c d")), 3u);
  const double p = 3.0 / 4.0, r = 3.0 / 3.0, b2 = 1.2 * 1.2;
  EXPECT_NEAR(rouge_l(toks("a b c d"), {toks("a c d")}), (1 + b2) * p * r / (r + b2 * p), 1e-12);
}

TEST(CiderD, NoSharedNgramsIsZero) {
  const std::vector<Tokens> c{toks("x y z"), toks("a red square")};
  const std::vector<ReferenceSet> r{{toks("a b c")}, {toks("a red square")}};
  EXPECT_EQ(cider_d(c, r).per_image[0], 0.0);
}

TEST(CiderD, SelfSimilarityApproachesTen) {
  std::vector<Tokens> c;
  std::vector<ReferenceSet> r;
  for (int i = 0; i < 40; ++i) {
    Tokens t{"w" + std::to_string(i), "v" + std::to_string(i % 7), "u" + std::to_string(i % 5), "end"};
    c.push_back(t);
    r.push_back({t});
  }
  const double s = cider_d(c, r).score;
  EXPECT_NEAR(s, 10.0, 1e-9);
}

TEST(CiderD, SingleImageFlagsDegenerateIdf) {
  const std::vector<Tokens> c{toks("a b")};
  const std::vector<ReferenceSet> r{{toks("a b")}};
  EXPECT_TRUE(cider_d(c, r).degenerate_idf);
  const EvalReport rep = evaluate_corpus(c, r);
  EXPECT_FALSE(rep.warnings.empty());
}

TEST(Report, JsonIsDeterministicAndRounded) {
  const Corpus c = test::corpus_a();
  const std::vector<std::string> names{"x", "y", "z"};
  const std::string a = evaluate_corpus(c.candidates, c.references, names).to_json();
  EXPECT_EQ(a, evaluate_corpus(c.candidates, c.references, names).to_json());
  EXPECT_NE(a.find("\"bleu4\": 0.5297"), std::string::npos) << a;
}

}  // namespace
}  // namespace aitpr
