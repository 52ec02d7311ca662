#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "convexnn/data.hpp"

namespace cvxnn {

/// One hyperplane-arrangement pattern: bit i = 1 iff x_i^T u >= 0 for the
/// generating direction u. Equality is on bits only.
struct ArrangementPattern {
  std::vector<std::uint8_t> bits;
  std::optional<Eigen::VectorXd> witness;  // direction realizing the pattern

  ArrangementPattern() = default;
  explicit ArrangementPattern(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

  std::size_t size() const { return bits.size(); }

  std::string bit_string() const;
  static ArrangementPattern from_bit_string(const std::string& s);

  /// Pattern of a direction: 1[X u >= 0] with ties resolved to 1.
  static ArrangementPattern of_direction(const Eigen::MatrixXd& X, const Eigen::VectorXd& u);

  bool operator==(const ArrangementPattern& o) const { return bits == o.bits; }
  bool operator<(const ArrangementPattern& o) const { return bits < o.bits; }
};

enum class PatternSource { exact, gaussian, convolutional, user };

std::string to_string(PatternSource s);
PatternSource pattern_source_from_string(const std::string& s);

/// Ordered, deduplicated pattern collection. Canonical order is
/// lexicographic on bits, which makes merges of sampling shards
/// deterministic.
struct PatternSet {
  std::vector<ArrangementPattern> patterns;
  PatternSource source = PatternSource::user;
  std::optional<std::uint64_t> seed;
  std::size_t n = 0;  // pattern length

  std::size_t size() const { return patterns.size(); }

  /// Sorts lexicographically and removes duplicate bit vectors (first
  /// witness wins).
  void canonicalize();

  /// Merges another set into this one (used by sampling shards).
  void merge(const PatternSet& other);

  bool contains(const ArrangementPattern& p) const;
  std::optional<std::size_t> index_of(const ArrangementPattern& p) const;

  /// Text format: "# n=<n> source=<s> seed=<s>" header, then one pattern per
  /// line as a 0/1 string, optionally followed by comma-separated witness
  /// coordinates.
  std::string serialize() const;
  static PatternSet deserialize(const std::string& text);

  void save(const std::string& path) const;
  static PatternSet load(const std::string& path);
};

/// Kappa-valued diagonal for a pattern: 1 where the bit is set, kappa
/// elsewhere.
Eigen::VectorXd kappa_diagonal(const ArrangementPattern& p, double kappa);

/// Binary constraint diagonal 2*bit - 1 in {-1, +1}.
Eigen::VectorXd sign_diagonal(const ArrangementPattern& p);

}  // namespace cvxnn
