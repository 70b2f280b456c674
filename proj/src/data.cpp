#include "recbench/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string_view>

namespace recbench {

namespace {

std::vector<std::string_view> splitLine(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parseValue(std::string_view s, const std::string& path, int line_no) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && p == s.data() + s.size(),
          path + ":" + std::to_string(line_no) + ": bad numeric field '" +
              std::string(s) + "'");
  return v;
}

}  // namespace

RawEvents readEvents(const std::string& path, const TextTableSpec& spec) {
  std::ifstream in(path);
  require(in.good(), "cannot open events file: " + path);
  RawEvents out;
  std::string line;
  int line_no = 0;
  const int needed = std::max({spec.user_col, spec.item_col, spec.value_col,
                               spec.timestamp_col}) +
                     1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= spec.header_lines) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = splitLine(line, spec.delimiter);
    require(static_cast<int>(fields.size()) >= needed,
            path + ":" + std::to_string(line_no) + ": expected at least " +
                std::to_string(needed) + " fields");
    RawEvent ev;
    ev.user = std::string(fields[spec.user_col]);
    ev.item = std::string(fields[spec.item_col]);
    if (spec.value_col >= 0)
      ev.value = parseValue(fields[spec.value_col], path, line_no);
    if (spec.timestamp_col >= 0)
      ev.timestamp = static_cast<std::int64_t>(
          parseValue(fields[spec.timestamp_col], path, line_no));
    require(!ev.user.empty() && !ev.item.empty(),
            path + ":" + std::to_string(line_no) + ": empty id field");
    out.events.push_back(std::move(ev));
  }
  return out;
}

RawEvents binarize(const RawEvents& events, double threshold) {
  require(std::isfinite(threshold), "threshold must be finite");
  RawEvents out;
  std::unordered_map<std::string, bool> seen;
  seen.reserve(events.events.size());
  for (const auto& ev : events.events) {
    if (ev.value < threshold) continue;
    std::string key = ev.user + '\x1f' + ev.item;
    if (seen.emplace(std::move(key), true).second) {
      RawEvent pos = ev;
      pos.value = 1.0;
      out.events.push_back(std::move(pos));
    }
  }
  return out;
}

Interactions buildInteractions(const RawEvents& positives) {
  Interactions x;
  std::unordered_map<std::string, Index> user_index, item_index;
  std::vector<Triplet> trips;
  trips.reserve(positives.events.size());
  for (const auto& ev : positives.events) {
    auto [uit, unew] =
        user_index.emplace(ev.user, static_cast<Index>(x.user_ids.size()));
    if (unew) x.user_ids.push_back(ev.user);
    auto [iit, inew] =
        item_index.emplace(ev.item, static_cast<Index>(x.item_ids.size()));
    if (inew) x.item_ids.push_back(ev.item);
    trips.push_back({uit->second, iit->second, 1.0});
  }
  x.matrix = SparseMatrix::fromTriplets(static_cast<Index>(x.user_ids.size()),
                                        static_cast<Index>(x.item_ids.size()),
                                        std::move(trips));
  // Duplicate (user,item) events collapse to a single positive.
  std::vector<Triplet> binary;
  binary.reserve(x.matrix.nonZeros());
  for (Index r = 0; r < x.matrix.rows(); ++r)
    for (Index c : x.matrix.rowCols(r)) binary.push_back({r, c, 1.0});
  x.matrix = SparseMatrix::fromTriplets(x.matrix.rows(), x.matrix.cols(),
                                        std::move(binary));
  return x;
}

Interactions kcoreFilter(const Interactions& x, Index h) {
  require(h >= 1, "h must be >= 1");
  const SparseMatrix& m = x.matrix;
  std::vector<bool> user_alive(m.rows(), true), item_alive(m.cols(), true);
  // Alternate full pruning passes until a fixed point.
  bool changed = true;
  while (changed) {
    changed = false;
    for (Index r = 0; r < m.rows(); ++r) {
      if (!user_alive[r]) continue;
      Index live = 0;
      for (Index c : m.rowCols(r))
        if (item_alive[c]) live++;
      if (live < h) {
        user_alive[r] = false;
        changed = true;
      }
    }
    std::vector<Index> item_deg(m.cols(), 0);
    for (Index r = 0; r < m.rows(); ++r) {
      if (!user_alive[r]) continue;
      for (Index c : m.rowCols(r)) item_deg[c]++;
    }
    for (Index c = 0; c < m.cols(); ++c) {
      if (item_alive[c] && item_deg[c] < h) {
        item_alive[c] = false;
        changed = true;
      }
    }
  }

  std::vector<Index> new_user(m.rows(), -1), new_item(m.cols(), -1);
  Interactions out;
  for (Index r = 0; r < m.rows(); ++r)
    if (user_alive[r]) {
      new_user[r] = static_cast<Index>(out.user_ids.size());
      out.user_ids.push_back(x.user_ids[r]);
    }
  for (Index c = 0; c < m.cols(); ++c)
    if (item_alive[c]) {
      new_item[c] = static_cast<Index>(out.item_ids.size());
      out.item_ids.push_back(x.item_ids[c]);
    }
  require(!out.user_ids.empty() && !out.item_ids.empty(),
          "h-core eliminated all data");
  std::vector<Triplet> trips;
  for (Index r = 0; r < m.rows(); ++r) {
    if (!user_alive[r]) continue;
    for (Index c : m.rowCols(r))
      if (item_alive[c]) trips.push_back({new_user[r], new_item[c], 1.0});
  }
  out.matrix = SparseMatrix::fromTriplets(
      static_cast<Index>(out.user_ids.size()),
      static_cast<Index>(out.item_ids.size()), std::move(trips));
  return out;
}

std::uint64_t Interactions::contentHash() const {
  std::uint64_t h = matrix.contentHash();
  for (const auto& s : user_ids) h = fnv1a(s, h);
  for (const auto& s : item_ids) h = fnv1a(s, h);
  return h;
}

std::vector<Index> FoldPlan::usersInFold(int fold) const {
  std::vector<Index> out;
  for (Index u = 0; u < static_cast<Index>(fold_of_user.size()); ++u)
    if (fold_of_user[u] == fold) out.push_back(u);
  return out;
}

std::vector<Index> FoldPlan::trainUsers(int round) const {
  const int val = (round + 1) % n_folds;
  std::vector<Index> out;
  for (Index u = 0; u < static_cast<Index>(fold_of_user.size()); ++u)
    if (fold_of_user[u] != round && fold_of_user[u] != val) out.push_back(u);
  return out;
}

FoldPlan makeFolds(const Interactions& x, int n_folds, std::uint64_t seed) {
  require(n_folds >= 2, "n_folds must be >= 2");
  require(x.users() >= n_folds, "fewer users than folds");
  std::vector<Index> order(x.users());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix64(seed, 0xf01d5u));
  for (Index i = x.users() - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.fold_of_user.assign(x.users(), 0);
  for (Index pos = 0; pos < x.users(); ++pos)
    plan.fold_of_user[order[pos]] = static_cast<int>(pos % n_folds);
  return plan;
}

HoldoutSet selectHoldouts(const Interactions& x, std::span<const Index> users,
                          std::uint64_t seed) {
  HoldoutSet out;
  out.seed = seed;
  out.item_of_user.assign(x.users(), -1);
  for (Index u : users) {
    auto row = x.matrix.rowCols(u);
    require(!row.empty(), "user has no interactions to hold out");
    // Per-user stream: the pick depends only on (seed, user), not on the
    // order or content of the `users` list.
    std::mt19937_64 rng(mix64(seed, static_cast<std::uint64_t>(u), 0x401d0u));
    std::uniform_int_distribution<std::size_t> pick(0, row.size() - 1);
    out.item_of_user[u] = row[pick(rng)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshot io

namespace {

constexpr char kSnapshotMagic[8] = {'R', 'B', 'S', 'N', 'A', 'P', '0', '1'};

template <typename T>
void writePod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T readPod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(is.good(), "truncated snapshot");
  return v;
}

void writeString(std::ostream& os, const std::string& s) {
  writePod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string readString(std::istream& is) {
  auto n = readPod<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  require(is.good(), "truncated snapshot");
  return s;
}

template <typename T>
void writeVec(std::ostream& os, const std::vector<T>& v) {
  writePod<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> readVec(std::istream& is) {
  auto n = readPod<std::uint64_t>(is);
  std::vector<T> v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(T)));
  require(is.good(), "truncated snapshot");
  return v;
}

}  // namespace

void saveSnapshot(const std::string& path, const DatasetSnapshot& snap) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "cannot write snapshot: " + path);
  os.write(kSnapshotMagic, sizeof(kSnapshotMagic));
  const SparseMatrix& m = snap.interactions.matrix;
  writePod<Index>(os, m.rows());
  writePod<Index>(os, m.cols());
  writeVec(os, m.indptr());
  writeVec(os, m.colIndices());
  writeVec(os, m.values());
  writePod<std::uint64_t>(os, snap.interactions.user_ids.size());
  for (const auto& s : snap.interactions.user_ids) writeString(os, s);
  writePod<std::uint64_t>(os, snap.interactions.item_ids.size());
  for (const auto& s : snap.interactions.item_ids) writeString(os, s);
  writePod<std::int32_t>(os, snap.folds.n_folds);
  writePod<std::uint64_t>(os, snap.folds.seed);
  writeVec(os, snap.folds.fold_of_user);
  require(os.good(), "snapshot write failed: " + path);
}

DatasetSnapshot loadSnapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open snapshot: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  require(is.good() && std::equal(magic, magic + 8, kSnapshotMagic),
          "not a snapshot file (bad magic): " + path);
  DatasetSnapshot snap;
  Index rows = readPod<Index>(is);
  Index cols = readPod<Index>(is);
  auto indptr = readVec<Index>(is);
  auto col_idx = readVec<Index>(is);
  auto vals = readVec<double>(is);
  require(indptr.size() == static_cast<std::size_t>(rows) + 1,
          "corrupt snapshot");
  std::vector<Triplet> trips;
  trips.reserve(col_idx.size());
  for (Index r = 0; r < rows; ++r)
    for (Index k = indptr[r]; k < indptr[r + 1]; ++k)
      trips.push_back({r, col_idx[k], vals[k]});
  snap.interactions.matrix = SparseMatrix::fromTriplets(rows, cols, std::move(trips));
  auto nu = readPod<std::uint64_t>(is);
  snap.interactions.user_ids.reserve(nu);
  for (std::uint64_t i = 0; i < nu; ++i)
    snap.interactions.user_ids.push_back(readString(is));
  auto ni = readPod<std::uint64_t>(is);
  snap.interactions.item_ids.reserve(ni);
  for (std::uint64_t i = 0; i < ni; ++i)
    snap.interactions.item_ids.push_back(readString(is));
  snap.folds.n_folds = readPod<std::int32_t>(is);
  snap.folds.seed = readPod<std::uint64_t>(is);
  snap.folds.fold_of_user = readVec<int>(is);
  return snap;
}

}  // namespace recbench
