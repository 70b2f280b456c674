#pragma once

#include "recbench/recommender.hpp"
#include "recbench/sparse.hpp"

namespace recbench {

struct TagEvent {
  std::string item;
  std::string tag;
  double weight = 1.0;
};

/// Item x tag weight matrix aligned with the Interactions item indices.
/// Items with no usable tags are flagged uncovered and skipped by the probe.
struct SemanticSpace {
  SparseMatrix item_tags;
  std::vector<std::string> tag_vocabulary;
  std::vector<bool> covered;

  Index coveredCount() const {
    Index n = 0;
    for (bool c : covered) n += c;
    return n;
  }
};

/// genome_relevance: weights are relevance scores used directly; otherwise
/// TF-IDF over the tag events (tf = summed weight, idf = ln(N/df) over
/// covered items).
SemanticSpace buildSemanticSpace(const std::vector<TagEvent>& events,
                                 const std::vector<std::string>& item_ids,
                                 bool genome_relevance);

struct SciResult {
  double value = 0;
  Index items_used = 0;
  Index items_skipped = 0;  // degenerate Pearson inputs
};

/// Semantic Coherence Index: mean over covered items of the Pearson
/// correlation between the model's relatedness row for the item and the
/// cosine similarities of its semantic vector to all other covered items.
SciResult sci(const Recommender& model, const SemanticSpace& space);

double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace recbench
