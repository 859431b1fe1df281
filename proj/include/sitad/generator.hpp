#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "sitad/database.hpp"
#include "sitad/descriptor.hpp"

namespace sitad {

// splitmix64: tiny, well-mixed, and stable across platforms, so generated
// databases are byte-identical for a given seed everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("empty sampling range");
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct GenParams {
  std::uint64_t count = 0;
  std::uint64_t dim = 1;         // dimensions drawn from 1..dim
  std::uint64_t max_weight = 1;  // weights uniform in 1..max_weight
  double density = 4.0;          // mean entries per descriptor (Poisson, clamped to [1, dim])
  std::uint64_t seed = 1;
  double dup_rate = 0.1;  // fraction emitted as near-duplicates of earlier records
};

namespace detail {

inline std::uint64_t poisson_clamped(SplitMix64& rng, double lambda, std::uint64_t hi) {
  const double floor = std::exp(-lambda);
  std::uint64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.unit();
  } while (p > floor && k <= hi);
  const std::uint64_t draw = k - 1;
  return draw == 0 ? 1 : std::min(draw, hi);
}

inline std::vector<std::uint64_t> sample_dims(SplitMix64& rng, std::uint64_t pool, std::uint64_t k) {
  std::vector<std::uint64_t> dims;
  dims.reserve(k);
  if (k * 2 >= pool) {
    // dense draw: partial Fisher-Yates over the whole pool
    std::vector<std::uint64_t> all(pool);
    for (std::uint64_t i = 0; i < pool; ++i) all[i] = i + 1;
    for (std::uint64_t i = 0; i < k; ++i) {
      std::swap(all[i], all[i + rng.below(pool - i)]);
      dims.push_back(all[i]);
    }
  } else {
    std::unordered_set<std::uint64_t> seen;
    while (dims.size() < k) {
      const std::uint64_t d = 1 + rng.below(pool);
      if (seen.insert(d).second) dims.push_back(d);
    }
  }
  std::sort(dims.begin(), dims.end());
  return dims;
}

}  // namespace detail

// Deterministic synthetic database: entry counts Poisson-like around
// `density`, weights uniform, plus near-duplicate copies of earlier records
// so high-threshold queries keep nonempty answers. Ids run 1..count.
inline Database generate(const GenParams& p) {
  if (p.dim == 0) throw std::invalid_argument("dimension pool must be positive");
  if (p.max_weight == 0 || p.max_weight > kMaxIngestWeight) {
    throw std::invalid_argument("max weight must be in [1, " + std::to_string(kMaxIngestWeight) + "]");
  }
  if (!(p.density > 0)) throw std::invalid_argument("density must be positive");
  if (!(p.dup_rate >= 0 && p.dup_rate < 1)) throw std::invalid_argument("duplicate rate must be in [0, 1)");

  SplitMix64 rng(p.seed);
  Database db;
  for (std::uint64_t i = 0; i < p.count; ++i) {
    std::vector<Entry> entries;
    if (i > 0 && rng.unit() < p.dup_rate) {
      // perturb an earlier record: maybe drop one entry, then resample one weight
      const auto& base = db.records()[rng.below(i)].desc;
      entries.assign(base.entries().begin(), base.entries().end());
      if (entries.size() > 1 && rng.below(2) == 0) {
        entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(rng.below(entries.size())));
      }
      entries[rng.below(entries.size())].weight = 1 + rng.below(p.max_weight);
    } else {
      const auto dims = detail::sample_dims(rng, p.dim, detail::poisson_clamped(rng, p.density, p.dim));
      entries.reserve(dims.size());
      for (auto d : dims) entries.push_back({d, 1 + rng.below(p.max_weight)});
    }
    db.add({i + 1, Descriptor::from_entries(std::move(entries))});
  }
  return db;
}

}  // namespace sitad
