#pragma once

// Term families of the general n-way disentangled state.
//
// A term family is a labeled set partition of the parties with at least two
// blocks; every block of size >= 2 carries a genuinely |block|-way entangled
// state and singletons carry arbitrary single-party states. The canonical
// term count is therefore Bell(n) - 1.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace disent {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxPartitionParties = 16;
inline constexpr int kMaxEnumerationParties = 14;
inline constexpr int kMaxCountingParties = 64;

/// Labeled partition of {0..n-1}, stored as its restricted-growth string.
class SetPartition {
 public:
  using Block = std::vector<int>;

  SetPartition() = default;

  /// Validates the restricted-growth property.
  static SetPartition from_rgs(const std::vector<int>& assignment) {
    const auto n = static_cast<int>(assignment.size());
    if (n < 1 || n > kMaxPartitionParties) {
      throw std::out_of_range("set partition size must be in [1, " +
                              std::to_string(kMaxPartitionParties) + "]");
    }
    SetPartition p;
    p.size_ = static_cast<std::uint8_t>(n);
    int next_block = 0;
    for (int i = 0; i < n; ++i) {
      const int a = assignment[static_cast<std::size_t>(i)];
      if (a < 0 || a > next_block) {
        throw std::invalid_argument("not a restricted-growth string at position " +
                                    std::to_string(i));
      }
      if (a == next_block) ++next_block;
      p.rgs_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(a);
    }
    return p;
  }

  /// Builds the canonical encoding from arbitrary disjoint blocks covering
  /// {0..n-1}; block order and member order are irrelevant.
  static SetPartition from_blocks(int n, const std::vector<Block>& blocks) {
    if (n < 1 || n > kMaxPartitionParties) {
      throw std::out_of_range("set partition size must be in [1, " +
                              std::to_string(kMaxPartitionParties) + "]");
    }
    std::vector<int> owner(static_cast<std::size_t>(n), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].empty()) throw std::invalid_argument("empty block");
      for (int party : blocks[b]) {
        if (party < 0 || party >= n) {
          throw std::invalid_argument("party label " + std::to_string(party) + " out of range");
        }
        if (owner[static_cast<std::size_t>(party)] != -1) {
          throw std::invalid_argument("party " + std::to_string(party) + " appears twice");
        }
        owner[static_cast<std::size_t>(party)] = static_cast<int>(b);
      }
    }
    std::vector<int> relabel(blocks.size(), -1);
    std::vector<int> rgs(static_cast<std::size_t>(n));
    int next_block = 0;
    for (int i = 0; i < n; ++i) {
      const int b = owner[static_cast<std::size_t>(i)];
      if (b < 0) throw std::invalid_argument("party " + std::to_string(i) + " not covered");
      auto& label = relabel[static_cast<std::size_t>(b)];
      if (label < 0) label = next_block++;
      rgs[static_cast<std::size_t>(i)] = label;
    }
    return from_rgs(rgs);
  }

  int n() const noexcept { return size_; }

  int block_of(int party) const { return rgs_.at(static_cast<std::size_t>(party)); }

  std::vector<int> assignment() const {
    return {rgs_.begin(), rgs_.begin() + size_};
  }

  int block_count() const noexcept {
    int m = 0;
    for (int i = 0; i < size_; ++i) m = std::max(m, rgs_[static_cast<std::size_t>(i)] + 1);
    return m;
  }

  /// Blocks in order of first appearance; members sorted ascending.
  std::vector<Block> blocks() const {
    std::vector<Block> out(static_cast<std::size_t>(block_count()));
    for (int i = 0; i < size_; ++i) out[rgs_[static_cast<std::size_t>(i)]].push_back(i);
    return out;
  }

  /// Restricted-growth string, e.g. "011".
  std::string rgs_string() const {
    std::string s;
    for (int i = 0; i < size_; ++i) {
      const int a = rgs_[static_cast<std::size_t>(i)];
      s.push_back(a < 10 ? static_cast<char>('0' + a) : static_cast<char>('a' + a - 10));
    }
    return s;
  }

  /// Block notation, e.g. "{0}{12}"; multi-digit labels are comma separated.
  std::string to_string() const {
    std::string s;
    const bool wide = size_ > 10;
    for (const auto& block : blocks()) {
      s += '{';
      for (std::size_t k = 0; k < block.size(); ++k) {
        if (wide && k > 0) s += ',';
        s += std::to_string(block[k]);
      }
      s += '}';
    }
    return s;
  }

  friend bool operator==(const SetPartition&, const SetPartition&) = default;
  friend auto operator<=>(const SetPartition&, const SetPartition&) = default;

 private:
  // Slots past size_ stay zero so defaulted comparison is the RGS comparison.
  std::uint8_t size_ = 0;
  std::array<std::uint8_t, kMaxPartitionParties> rgs_{};
};

/// One summation of the disentangled form.
class StructureFamily {
 public:
  explicit StructureFamily(SetPartition partition) : partition_(partition) {
    if (partition_.block_count() < 2) {
      throw std::invalid_argument("a term family needs at least two blocks");
    }
  }

  /// Parses "0/12" or "{0}{12}". Party labels are single digits.
  static StructureFamily parse(int n, const std::string& text) {
    std::vector<SetPartition::Block> blocks(1);
    for (char c : text) {
      if (c == '/' || c == '|' || (c == '{' && !blocks.back().empty())) {
        blocks.emplace_back();
      } else if (c >= '0' && c <= '9') {
        blocks.back().push_back(c - '0');
      } else if (c != ' ' && c != '{' && c != '}') {
        throw std::invalid_argument("bad character '" + std::string(1, c) + "' in family \"" +
                                    text + "\"");
      }
    }
    return StructureFamily(SetPartition::from_blocks(n, blocks));
  }

  const SetPartition& partition() const noexcept { return partition_; }
  int n() const noexcept { return partition_.n(); }
  std::vector<SetPartition::Block> blocks() const { return partition_.blocks(); }

  std::vector<SetPartition::Block> entangled_blocks() const {
    std::vector<SetPartition::Block> out;
    for (auto& block : partition_.blocks()) {
      if (block.size() >= 2) out.push_back(std::move(block));
    }
    return out;
  }

  bool fully_product() const noexcept { return partition_.block_count() == partition_.n(); }

  std::string to_string() const { return partition_.to_string(); }

  friend bool operator==(const StructureFamily&, const StructureFamily&) = default;
  friend auto operator<=>(const StructureFamily&, const StructureFamily&) = default;

 private:
  SetPartition partition_;
};

/// Canonical count alongside the value reported in the literature.
struct CountReport {
  int n = 0;
  BigInt canonical_count;
  std::optional<std::int64_t> paper_count;
  // count(n) / count(n-1); absent for the first row.
  std::optional<BigRational> ratio_to_previous;

  bool mismatch() const { return paper_count && BigInt(*paper_count) != canonical_count; }
};

namespace detail {

inline void require_range(int n, int lo, int hi, const char* what) {
  if (n < lo || n > hi) {
    throw std::out_of_range(std::string(what) + ": n must be in [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "], got " + std::to_string(n));
  }
}

}  // namespace detail

/// Visits every partition of {0..n-1} in lexicographic RGS order without
/// materializing the list. Returns the number visited.
template <typename Visitor>
std::uint64_t for_each_set_partition(int n, Visitor&& visit) {
  detail::require_range(n, 1, kMaxEnumerationParties, "for_each_set_partition");
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  // bound[i] = 1 + max(a[0..i-1]); a[i] may range over [0, bound[i]].
  std::vector<int> bound(static_cast<std::size_t>(n), 1);
  bound[0] = 0;
  std::uint64_t visited = 0;
  while (true) {
    visit(static_cast<const std::vector<int>&>(a));
    ++visited;
    int i = n - 1;
    while (i > 0 && a[static_cast<std::size_t>(i)] == bound[static_cast<std::size_t>(i)]) --i;
    if (i == 0) break;
    ++a[static_cast<std::size_t>(i)];
    const int carried = std::max(bound[static_cast<std::size_t>(i)],
                                 a[static_cast<std::size_t>(i)] + 1);
    for (int j = i + 1; j < n; ++j) {
      a[static_cast<std::size_t>(j)] = 0;
      bound[static_cast<std::size_t>(j)] = carried;
    }
  }
  return visited;
}

inline std::vector<SetPartition> enumerate_set_partitions(int n) {
  detail::require_range(n, 1, kMaxEnumerationParties, "enumerate_set_partitions");
  std::vector<SetPartition> out;
  for_each_set_partition(n, [&](const std::vector<int>& rgs) {
    out.push_back(SetPartition::from_rgs(rgs));
  });
  return out;
}

/// All term families for n parties: every set partition except the single
/// block, in lexicographic RGS order.
inline std::vector<StructureFamily> enumerate_disentangled_structures(int n) {
  detail::require_range(n, 2, kMaxEnumerationParties, "enumerate_disentangled_structures");
  std::vector<StructureFamily> out;
  for_each_set_partition(n, [&](const std::vector<int>& rgs) {
    auto p = SetPartition::from_rgs(rgs);
    if (p.block_count() >= 2) out.emplace_back(p);
  });
  return out;
}

/// Bell numbers B(0..n_max) from the Bell triangle.
inline std::vector<BigInt> bell_numbers(int n_max) {
  detail::require_range(n_max, 0, kMaxCountingParties, "bell_numbers");
  std::vector<BigInt> bell{1};
  std::vector<BigInt> row{1};
  for (int k = 1; k <= n_max; ++k) {
    std::vector<BigInt> next;
    next.reserve(row.size() + 1);
    next.push_back(row.back());
    for (const auto& above : row) next.push_back(next.back() + above);
    bell.push_back(next.front());
    row = std::move(next);
  }
  return bell;
}

inline BigInt count_disentangled_terms(int n) {
  detail::require_range(n, 2, kMaxCountingParties, "count_disentangled_terms");
  return bell_numbers(n)[static_cast<std::size_t>(n)] - 1;
}

/// Term counts stated in the literature for the general disentangled state.
/// Only n = 3 (four summations in the tripartite form) and n = 5, 6, 7 are
/// stated; their counting rule for n >= 5 is not given.
inline std::optional<std::int64_t> paper_reported_term_count(int n) {
  detail::require_range(n, 2, std::numeric_limits<int>::max(), "paper_reported_term_count");
  switch (n) {
    case 3: return 4;
    case 5: return 66;
    case 6: return 332;
    case 7: return 1681;
    default: return std::nullopt;
  }
}

/// One CountReport per n in 2..n_max.
inline std::vector<CountReport> growth_report(int n_max) {
  detail::require_range(n_max, 3, kMaxCountingParties, "growth_report");
  const auto bell = bell_numbers(n_max);
  std::vector<CountReport> out;
  for (int n = 2; n <= n_max; ++n) {
    CountReport row;
    row.n = n;
    row.canonical_count = bell[static_cast<std::size_t>(n)] - 1;
    row.paper_count = paper_reported_term_count(n);
    if (!out.empty()) row.ratio_to_previous = BigRational(row.canonical_count, out.back().canonical_count);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace disent
