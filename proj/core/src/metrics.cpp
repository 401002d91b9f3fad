#include "aitpr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "aitpr/errors.hpp"

namespace aitpr {

namespace {

using NgramCounts = std::map<Tokens, double>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))] += 1.0;
  }
  return counts;
}

void check_corpus(std::span<const Tokens> candidates, std::span<const ReferenceSet> references) {
  if (candidates.empty()) throw InputError("metric: empty candidate set");
  if (candidates.size() != references.size()) {
    throw InputError("metric: " + std::to_string(candidates.size()) + " candidates but " +
                     std::to_string(references.size()) + " reference sets");
  }
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (references[i].empty()) throw InputError("metric: image " + std::to_string(i) + " has no references");
  }
}

std::size_t closest_ref_length(std::size_t cand_len, const ReferenceSet& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = r.size() > cand_len ? r.size() - cand_len : cand_len - r.size();
    const auto bd = best > cand_len ? best - cand_len : cand_len - best;
    if (d < bd || (d == bd && r.size() < best)) best = r.size();
  }
  return best;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

double bleu(std::span<const Tokens> candidates, std::span<const ReferenceSet> references, int n) {
  if (n < 1 || n > 4) throw InputError("bleu: n must be in 1..4");
  check_corpus(candidates, references);

  std::vector<double> matched(static_cast<std::size_t>(n), 0.0);
  std::vector<double> total(static_cast<std::size_t>(n), 0.0);
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    cand_len += cand.size();
    ref_len += closest_ref_length(cand.size(), references[i]);
    for (std::size_t k = 1; k <= static_cast<std::size_t>(n); ++k) {
      const auto cand_counts = count_ngrams(cand, k);
      NgramCounts max_ref;
      for (const auto& ref : references[i]) {
        for (const auto& [gram, c] : count_ngrams(ref, k)) max_ref[gram] = std::max(max_ref[gram], c);
      }
      for (const auto& [gram, c] : cand_counts) {
        auto it = max_ref.find(gram);
        matched[k - 1] += std::min(c, it == max_ref.end() ? 0.0 : it->second);
        total[k - 1] += c;
      }
    }
  }

  double log_sum = 0.0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
    if (total[k] == 0.0 || matched[k] == 0.0) return 0.0;
    log_sum += std::log(matched[k] / total[k]);
  }
  const double bp = cand_len >= ref_len ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_sum / static_cast<double>(n));
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& candidate, const ReferenceSet& references, double beta) {
  if (candidate.empty() || references.empty()) throw InputError("rouge_l: empty candidate or reference set");
  double best_p = 0.0, best_r = 0.0;
  for (const auto& ref : references) {
    if (ref.empty()) throw InputError("rouge_l: empty reference");
    const double lcs = static_cast<double>(lcs_length(candidate, ref));
    best_p = std::max(best_p, lcs / static_cast<double>(candidate.size()));
    best_r = std::max(best_r, lcs / static_cast<double>(ref.size()));
  }
  if (best_p == 0.0 || best_r == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * best_p * best_r / (best_r + b2 * best_p);
}

namespace {

struct TfIdfVector {
  std::array<std::map<Tokens, double>, 4> weights;
  std::array<double, 4> norm{};
  double length = 0.0;  // bigram count, as in the reference CIDEr-D scorer
};

}  // namespace

CiderResult cider_d(std::span<const Tokens> candidates, std::span<const ReferenceSet> references, double sigma) {
  check_corpus(candidates, references);
  CiderResult result;
  result.degenerate_idf = candidates.size() < 2;

  std::map<Tokens, double> doc_freq;
  for (const auto& refs : references) {
    std::set<Tokens> seen;
    for (const auto& ref : refs)
      for (std::size_t n = 1; n <= 4; ++n)
        for (const auto& [gram, c] : count_ngrams(ref, n)) seen.insert(gram);
    for (const auto& gram : seen) doc_freq[gram] += 1.0;
  }
  const double log_images = std::log(static_cast<double>(references.size()));

  auto vectorize = [&](const Tokens& tokens) {
    TfIdfVector vec;
    for (std::size_t n = 1; n <= 4; ++n) {
      for (const auto& [gram, tf] : count_ngrams(tokens, n)) {
        auto it = doc_freq.find(gram);
        const double df = std::log(std::max(1.0, it == doc_freq.end() ? 0.0 : it->second));
        const double w = tf * (log_images - df);
        vec.weights[n - 1][gram] = w;
        vec.norm[n - 1] += w * w;
        if (n == 2) vec.length += tf;
      }
    }
    for (auto& v : vec.norm) v = std::sqrt(v);
    return vec;
  };

  auto similarity = [&](const TfIdfVector& hyp, const TfIdfVector& ref) {
    const double delta = hyp.length - ref.length;
    const double penalty = std::exp(-(delta * delta) / (2.0 * sigma * sigma));
    std::array<double, 4> val{};
    for (std::size_t n = 0; n < 4; ++n) {
      for (const auto& [gram, w] : hyp.weights[n]) {
        auto it = ref.weights[n].find(gram);
        if (it != ref.weights[n].end()) val[n] += std::min(w, it->second) * it->second;
      }
      if (hyp.norm[n] != 0.0 && ref.norm[n] != 0.0) val[n] /= hyp.norm[n] * ref.norm[n];
      val[n] *= penalty;
    }
    return val;
  };

  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto hyp = vectorize(candidates[i]);
    std::array<double, 4> acc{};
    for (const auto& ref : references[i]) {
      const auto s = similarity(hyp, vectorize(ref));
      for (std::size_t n = 0; n < 4; ++n) acc[n] += s[n];
    }
    double mean = (acc[0] + acc[1] + acc[2] + acc[3]) / 4.0;
    mean /= static_cast<double>(references[i].size());
    result.per_image.push_back(mean * 10.0);
    total += mean * 10.0;
  }
  result.score = total / static_cast<double>(candidates.size());
  return result;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["bleu1"] = round4(bleu[0]);
  j["bleu2"] = round4(bleu[1]);
  j["bleu3"] = round4(bleu[2]);
  j["bleu4"] = round4(bleu[3]);
  j["rouge_l"] = round4(rouge_l);
  j["cider_d"] = round4(cider_d);
  auto images = nlohmann::ordered_json::array();
  for (const auto& img : per_image) {
    nlohmann::ordered_json e;
    e["name"] = img.name;
    e["candidate"] = img.candidate;
    e["bleu1"] = round4(img.bleu[0]);
    e["bleu2"] = round4(img.bleu[1]);
    e["bleu3"] = round4(img.bleu[2]);
    e["bleu4"] = round4(img.bleu[3]);
    e["rouge_l"] = round4(img.rouge_l);
    e["cider_d"] = round4(img.cider_d);
    images.push_back(std::move(e));
  }
  j["per_image"] = std::move(images);
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

EvalReport evaluate_corpus(std::span<const Tokens> candidates, std::span<const ReferenceSet> references,
                           std::span<const std::string> names) {
  check_corpus(candidates, references);
  if (!names.empty() && names.size() != candidates.size()) throw InputError("evaluate_corpus: name count mismatch");
  EvalReport report;
  for (int n = 1; n <= 4; ++n) report.bleu[static_cast<std::size_t>(n - 1)] = bleu(candidates, references, n);
  const auto cider = cider_d(candidates, references);
  report.cider_d = cider.score;
  if (cider.degenerate_idf) report.warnings.push_back("CIDEr-D on a single-image corpus: IDF weights are degenerate");

  double rouge_total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ImageScores img;
    img.name = names.empty() ? std::to_string(i) : names[i];
    for (std::size_t w = 0; w < candidates[i].size(); ++w) img.candidate += (w ? " " : "") + candidates[i][w];
    const std::span<const Tokens> one_cand(&candidates[i], 1);
    const std::span<const ReferenceSet> one_refs(&references[i], 1);
    for (int n = 1; n <= 4; ++n) {
      img.bleu[static_cast<std::size_t>(n - 1)] = candidates[i].empty() ? 0.0 : bleu(one_cand, one_refs, n);
    }
    img.rouge_l = candidates[i].empty() ? 0.0 : rouge_l(candidates[i], references[i]);
    img.cider_d = cider.per_image[i];
    rouge_total += img.rouge_l;
    report.per_image.push_back(std::move(img));
  }
  report.rouge_l = rouge_total / static_cast<double>(candidates.size());
  return report;
}

}  // namespace aitpr
