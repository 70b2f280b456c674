#include "recbench/semantics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace recbench {

SemanticSpace buildSemanticSpace(const std::vector<TagEvent>& events,
                                 const std::vector<std::string>& item_ids,
                                 bool genome_relevance) {
  const Index n_items = static_cast<Index>(item_ids.size());
  std::unordered_map<std::string, Index> item_index;
  for (Index i = 0; i < n_items; ++i) item_index.emplace(item_ids[i], i);

  SemanticSpace space;
  std::unordered_map<std::string, Index> tag_index;
  // (item, tag) -> accumulated weight; events for unknown items are dropped.
  std::map<std::pair<Index, Index>, double> cells;
  for (const auto& ev : events) {
    auto it = item_index.find(ev.item);
    if (it == item_index.end()) continue;
    auto [tit, fresh] = tag_index.emplace(
        ev.tag, static_cast<Index>(space.tag_vocabulary.size()));
    if (fresh) space.tag_vocabulary.push_back(ev.tag);
    cells[{it->second, tit->second}] += ev.weight;
  }
  const Index n_tags = static_cast<Index>(space.tag_vocabulary.size());

  std::vector<Triplet> trips;
  if (genome_relevance) {
    for (const auto& [key, w] : cells)
      if (w != 0.0) trips.push_back({key.first, key.second, w});
  } else {
    // document frequency over items that have at least one tag
    std::vector<Index> df(n_tags, 0);
    std::vector<bool> has_tag(n_items, false);
    for (const auto& [key, w] : cells) {
      if (w <= 0) continue;
      df[key.second]++;
      has_tag[key.first] = true;
    }
    Index n_covered = 0;
    for (bool h : has_tag) n_covered += h;
    for (const auto& [key, tf] : cells) {
      if (tf <= 0) continue;
      const double idf =
          std::log(static_cast<double>(n_covered) / static_cast<double>(df[key.second]));
      const double w = tf * idf;
      if (w != 0.0) trips.push_back({key.first, key.second, w});
    }
  }
  space.item_tags =
      SparseMatrix::fromTriplets(n_items, std::max<Index>(n_tags, 1), trips);
  space.covered.assign(n_items, false);
  for (Index i = 0; i < n_items; ++i)
    space.covered[i] = space.item_tags.rowSize(i) > 0;
  return space;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() >= 2, "pearson needs two vectors");
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  require(va > 0 && vb > 0, "pearson undefined for a constant vector");
  return cov / std::sqrt(va * vb);
}

SciResult sci(const Recommender& model, const SemanticSpace& space) {
  const Index n_items = static_cast<Index>(space.covered.size());
  require(model.itemCount() == n_items, "semantic space / catalog mismatch");
  std::vector<Index> covered_items;
  for (Index i = 0; i < n_items; ++i)
    if (space.covered[i]) covered_items.push_back(i);
  require(!covered_items.empty(), "no valid items");

  const Index m = static_cast<Index>(covered_items.size());
  const Vector norms = space.item_tags.rowNorms();

  std::vector<double> per_item(m, std::numeric_limits<double>::quiet_NaN());
  parallelFor(0, m, [&](Index idx) {
    const Index item = covered_items[idx];
    // Semantic cosine of `item` against every other covered item.
    Vector self = Vector::Zero(space.item_tags.cols());
    {
      auto cs = space.item_tags.rowCols(item);
      auto vs = space.item_tags.rowVals(item);
      for (std::size_t t = 0; t < cs.size(); ++t) self[cs[t]] = vs[t];
    }
    Vector relatedness = model.itemRelatedness(item);
    std::vector<double> s, r;
    s.reserve(m - 1);
    r.reserve(m - 1);
    for (Index jdx = 0; jdx < m; ++jdx) {
      const Index other = covered_items[jdx];
      if (other == item) continue;
      double dot = 0;
      auto cs = space.item_tags.rowCols(other);
      auto vs = space.item_tags.rowVals(other);
      for (std::size_t t = 0; t < cs.size(); ++t) dot += vs[t] * self[cs[t]];
      s.push_back(dot / (norms[item] * norms[other]));
      r.push_back(relatedness[other]);
    }
    // Skip degenerate vectors (constant scores make Pearson undefined).
    auto constant = [](const std::vector<double>& v) {
      for (double x : v)
        if (x != v.front()) return false;
      return true;
    };
    if (s.size() < 2 || constant(s) || constant(r)) return;
    per_item[idx] = pearson(s, r);
  });

  SciResult out;
  double sum = 0;
  for (double v : per_item) {
    if (std::isnan(v)) {
      out.items_skipped++;
    } else {
      sum += v;
      out.items_used++;
    }
  }
  require(out.items_used > 0, "no valid items");
  out.value = sum / static_cast<double>(out.items_used);
  return out;
}

}  // namespace recbench
