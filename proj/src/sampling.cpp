#include "convexnn/sampling.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace cvxnn {

namespace {

PatternSet gaussian_shard(const DataMatrix& X, std::size_t count, std::uint64_t seed) {
  PatternSet set;
  set.source = PatternSource::gaussian;
  set.seed = seed;
  set.n = static_cast<std::size_t>(X.rows());
  Rng rng(seed);
  for (std::size_t t = 0; t < count; ++t) {
    Eigen::VectorXd u = rng.normal_vector(X.cols());
    set.patterns.push_back(ArrangementPattern::of_direction(X.values(), u));
  }
  set.canonicalize();
  return set;
}

}  // namespace

PatternSet sample_gaussian(const DataMatrix& X, std::size_t count, std::uint64_t seed,
                           int shards) {
  if (count < 1) throw std::invalid_argument("sample_gaussian: count >= 1 required");
  if (shards < 1) shards = 1;
  if (shards == 1) return gaussian_shard(X, count, seed);

  PatternSet merged;
  merged.source = PatternSource::gaussian;
  merged.seed = seed;
  merged.n = static_cast<std::size_t>(X.rows());
  const std::size_t per = count / static_cast<std::size_t>(shards);
  std::size_t left = count;
  for (int s = 0; s < shards; ++s) {
    const std::size_t take = (s + 1 == shards) ? left : per;
    left -= take;
    if (take == 0) continue;
    merged.merge(gaussian_shard(X, take, seed + static_cast<std::uint64_t>(s) + 1));
  }
  merged.source = PatternSource::gaussian;
  merged.seed = seed;
  return merged;
}

PatternSet sample_convolutional(const DataMatrix& X, ImageShape image, ImageShape filter,
                                std::size_t count, std::uint64_t seed) {
  if (image.height <= 0 || image.width <= 0)
    throw std::invalid_argument("sample_convolutional: bad image shape");
  if (filter.height <= 0 || filter.width <= 0 || filter.height > image.height ||
      filter.width > image.width)
    throw std::invalid_argument("sample_convolutional: filter must fit inside the image");
  if (static_cast<Eigen::Index>(image.height) * image.width != X.cols())
    throw std::invalid_argument("sample_convolutional: image shape does not match feature count");

  PatternSet set;
  set.source = PatternSource::convolutional;
  set.seed = seed;
  set.n = static_cast<std::size_t>(X.rows());
  Rng rng(seed);
  const int pos_r = image.height - filter.height + 1;
  const int pos_c = image.width - filter.width + 1;
  for (std::size_t t = 0; t < count; ++t) {
    const int r0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(pos_r)));
    const int c0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(pos_c)));
    Eigen::VectorXd u = Eigen::VectorXd::Zero(X.cols());
    for (int dr = 0; dr < filter.height; ++dr)
      for (int dc = 0; dc < filter.width; ++dc)
        u[(r0 + dr) * image.width + (c0 + dc)] = rng.normal();
    set.patterns.push_back(ArrangementPattern::of_direction(X.values(), u));
  }
  set.canonicalize();
  return set;
}

std::int64_t sample_size_threshold(std::int64_t P, double theta_bar, double epsilon) {
  if (P < 1) throw std::invalid_argument("sample_size_threshold: P >= 1 required");
  if (!(theta_bar > 0.0))
    throw std::invalid_argument("sample_size_threshold: theta_bar must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("sample_size_threshold: epsilon must lie in (0,1)");
  const double v = std::ceil(static_cast<double>(P) / theta_bar *
                             std::log(static_cast<double>(P) / epsilon));
  return static_cast<std::int64_t>(v);
}

Eigen::VectorXd zonotope_vertex(const DataMatrix& X, const Eigen::VectorXd& v) {
  if (v.size() != X.cols()) throw std::invalid_argument("zonotope_vertex: dimension mismatch");
  if (v.isZero(0.0)) throw std::invalid_argument("zonotope_vertex: v must be nonzero");
  const Eigen::VectorXd s = X.values() * v;
  Eigen::VectorXd ind(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) ind[i] = s[i] >= 0.0 ? 1.0 : 0.0;
  return X.values().transpose() * ind;
}

ZonotopeReport estimate_solid_angles(const DataMatrix& X, const PatternSet& patterns,
                                     std::int64_t mc_samples, std::uint64_t seed) {
  if (mc_samples < 1000)
    throw std::invalid_argument("estimate_solid_angles: mc_samples >= 1000 required");

  ZonotopeReport rep;
  rep.mc_samples = mc_samples;
  const std::size_t P = patterns.size();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));

  Rng rng(seed);
  std::map<std::vector<std::uint8_t>, std::int64_t> seen;
  for (std::int64_t t = 0; t < mc_samples; ++t) {
    Eigen::VectorXd u = rng.normal_vector(X.cols());
    ArrangementPattern p = ArrangementPattern::of_direction(X.values(), u);
    ++seen[p.bits];
    if (auto idx = patterns.index_of(p))
      counts[static_cast<Eigen::Index>(*idx)] += 1.0;
    else
      ++rep.unmatched_draws;
  }

  rep.vertex_count_estimate = static_cast<std::int64_t>(seen.size());
  rep.solid_angle_estimates = counts / static_cast<double>(mc_samples);
  rep.standard_errors.resize(static_cast<Eigen::Index>(P));
  for (Eigen::Index i = 0; i < rep.standard_errors.size(); ++i) {
    const double p = rep.solid_angle_estimates[i];
    rep.standard_errors[i] = std::sqrt(p * (1.0 - p) / static_cast<double>(mc_samples));
  }

  double min_pos = 0.0;
  for (Eigen::Index i = 0; i < rep.solid_angle_estimates.size(); ++i) {
    const double p = rep.solid_angle_estimates[i];
    if (p > 0.0 && (min_pos == 0.0 || p < min_pos)) min_pos = p;
  }
  rep.theta_bar_estimate = static_cast<double>(P) * min_pos;
  return rep;
}

}  // namespace cvxnn
