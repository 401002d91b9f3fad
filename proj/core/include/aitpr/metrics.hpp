#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace aitpr {

using Tokens = std::vector<std::string>;
// All references for one image.
using ReferenceSet = std::vector<Tokens>;

// Corpus BLEU-n: clipped n-gram counts summed over the corpus, geometric mean
// of precisions 1..n, brevity penalty against the closest reference length
// (shorter wins ties). Any zero precision gives 0.
double bleu(std::span<const Tokens> candidates, std::span<const ReferenceSet> references, int n);

// LCS-based F-measure with recall weight beta: precision and recall are each
// maximised over the references before combining.
double rouge_l(const Tokens& candidate, const ReferenceSet& references, double beta = 1.2);

std::size_t lcs_length(const Tokens& a, const Tokens& b);

struct CiderResult {
  double score = 0.0;               // corpus mean, scaled x10
  std::vector<double> per_image;    // scaled x10
  bool degenerate_idf = false;      // fewer than two images
};

// CIDEr-D: TF-IDF over 1..4-grams with document frequencies from the reference
// corpus, clipped cosine per reference, Gaussian length penalty, x10.
CiderResult cider_d(std::span<const Tokens> candidates, std::span<const ReferenceSet> references, double sigma = 6.0);

struct ImageScores {
  std::string name;
  std::string candidate;
  std::array<double, 4> bleu{};  // sentence-level BLEU-1..4
  double rouge_l = 0.0;
  double cider_d = 0.0;
};

struct EvalReport {
  std::array<double, 4> bleu{};
  double rouge_l = 0.0;
  double cider_d = 0.0;
  std::vector<ImageScores> per_image;
  std::vector<std::string> warnings;

  // {"bleu1":..,"bleu2":..,"bleu3":..,"bleu4":..,"rouge_l":..,"cider_d":..,"per_image":[..]}
  // Scores are rounded to 4 decimals.
  std::string to_json() const;
};

// `names` may be empty; otherwise one per candidate.
EvalReport evaluate_corpus(std::span<const Tokens> candidates, std::span<const ReferenceSet> references,
                           std::span<const std::string> names = {});

}  // namespace aitpr
