#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "recbench/sparse.hpp"

namespace recbench {

struct RawEvent {
  std::string user;
  std::string item;
  double value = 1.0;
  std::optional<std::int64_t> timestamp;
};

struct RawEvents {
  std::vector<RawEvent> events;
};

/// How to read a delimited interaction file: column order, delimiter,
/// header lines to skip. The canonical layout is user,item,value[,timestamp].
struct TextTableSpec {
  char delimiter = '\t';
  int header_lines = 0;
  // positions of the fields within a record; value_col/timestamp_col may be
  // -1 (value defaults to 1, timestamp absent).
  int user_col = 0;
  int item_col = 1;
  int value_col = 2;
  int timestamp_col = -1;
};

RawEvents readEvents(const std::string& path, const TextTableSpec& spec);

/// Binary interaction matrix plus the external-id maps for both axes.
struct Interactions {
  SparseMatrix matrix;  // n_users x n_items, weights all 1
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;

  Index users() const { return matrix.rows(); }
  Index items() const { return matrix.cols(); }
  std::uint64_t contentHash() const;
};

/// Keeps events with value >= threshold and collapses duplicate (user, item)
/// pairs. Idempotent.
RawEvents binarize(const RawEvents& events, double threshold);

/// Builds the dense-indexed binary matrix from positive events. User/item
/// indices follow first appearance order in the event list.
Interactions buildInteractions(const RawEvents& positives);

/// Iteratively removes users and items with fewer than h interactions until
/// every remaining row and column has >= h. Errors when nothing is left.
Interactions kcoreFilter(const Interactions& x, Index h);

/// 5-fold (or n-fold) user partition. fold_of_user[u] in [0, n_folds).
struct FoldPlan {
  std::vector<int> fold_of_user;
  int n_folds = 0;
  std::uint64_t seed = 0;

  std::vector<Index> usersInFold(int fold) const;
  /// Train folds for a CV round: all folds except test (= round) and
  /// validation (= (round+1) % n_folds).
  std::vector<Index> trainUsers(int round) const;
  std::vector<Index> validationUsers(int round) const {
    return usersInFold((round + 1) % n_folds);
  }
  std::vector<Index> testUsers(int round) const { return usersInFold(round); }
};

/// Uniform random user partition; fold sizes differ by at most one and the
/// assignment depends only on (seed, user count).
FoldPlan makeFolds(const Interactions& x, int n_folds, std::uint64_t seed);

/// One held-out item per covered user; item_of_user[u] == -1 for users not
/// covered. The selected item always belongs to the user's row.
struct HoldoutSet {
  std::vector<Index> item_of_user;
  std::uint64_t seed = 0;
};

/// Picks one uniformly random owned item per listed user. Deterministic under
/// seed and independent of the order of `users`.
HoldoutSet selectHoldouts(const Interactions& x, std::span<const Index> users,
                          std::uint64_t seed);

/// Cached binary snapshot of a prepared dataset (matrix + id maps + fold
/// plan), versioned with a magic header so reruns are bit-identical.
struct DatasetSnapshot {
  Interactions interactions;
  FoldPlan folds;
};

void saveSnapshot(const std::string& path, const DatasetSnapshot& snap);
DatasetSnapshot loadSnapshot(const std::string& path);

}  // namespace recbench
