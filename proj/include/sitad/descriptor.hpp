#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sitad {

using uint128 = unsigned __int128;

using DescriptorId = std::uint64_t;

// One nonzero coordinate of a sparse vector: 1-based dimension index and its
// positive weight. Absent dimensions are zero by convention.
struct Entry {
  std::uint64_t dim = 0;
  std::uint64_t weight = 0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Sparse non-negative integer vector held as (dim, weight) pairs with
// strictly increasing dims and weights >= 1.
class Descriptor {
 public:
  Descriptor() = default;

  // Validates ordering, uniqueness and positivity; throws std::invalid_argument.
  static Descriptor from_entries(std::vector<Entry> entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].dim == 0) throw std::invalid_argument("dimension index must be >= 1");
      if (entries[i].weight == 0) throw std::invalid_argument("weight must be >= 1");
      if (i > 0 && entries[i - 1].dim >= entries[i].dim) {
        throw std::invalid_argument("dimension indices must be strictly increasing");
      }
    }
    Descriptor d;
    d.entries_ = std::move(entries);
    return d;
  }

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::uint64_t max_dim() const { return entries_.empty() ? 0 : entries_.back().dim; }

  std::uint64_t max_weight() const {
    std::uint64_t m = 0;
    for (const auto& e : entries_) m = std::max(m, e.weight);
    return m;
  }

  friend bool operator==(const Descriptor&, const Descriptor&) = default;

 private:
  std::vector<Entry> entries_;
};

struct DescriptorRecord {
  DescriptorId id = 0;
  Descriptor desc;

  friend bool operator==(const DescriptorRecord&, const DescriptorRecord&) = default;
};

// Exact non-negative rational, kept in lowest terms.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational reduced(std::uint64_t n, std::uint64_t d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (n == 0) return {0, 1};
    const std::uint64_t g = std::gcd(n, d);
    return {n / g, d / g};
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Fixed-point decimal rendering, round half up, exact integer arithmetic.
  std::string to_decimal(int places) const {
    uint128 scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    uint128 scaled = static_cast<uint128>(num) * scale;
    uint128 q = scaled / den;
    uint128 r = scaled % den;
    if (r * 2 >= den) ++q;
    std::string digits;
    if (q == 0) digits = "0";
    while (q > 0) {
      digits.push_back(static_cast<char>('0' + static_cast<unsigned>(q % 10)));
      q /= 10;
    }
    std::reverse(digits.begin(), digits.end());
    if (places == 0) return digits;
    if (digits.size() <= static_cast<std::size_t>(places)) {
      digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    return digits;
  }

  friend bool operator==(const Rational&, const Rational&) = default;
};

// a < b as exact rationals.
inline bool rational_less(const Rational& a, const Rational& b) {
  return static_cast<uint128>(a.num) * b.den < static_cast<uint128>(b.num) * a.den;
}

// Similarity threshold in (0, 1], parsed from its decimal string into an
// exact rational so boundary comparisons never round.
class Threshold {
 public:
  static Threshold parse(std::string_view text) {
    std::string_view s = text;
    if (s.empty()) throw std::invalid_argument("empty threshold");
    const auto dot_pos = s.find('.');
    std::string_view int_part = (dot_pos == std::string_view::npos) ? s : s.substr(0, dot_pos);
    std::string_view frac_part = (dot_pos == std::string_view::npos) ? std::string_view{} : s.substr(dot_pos + 1);
    if (int_part.empty() && frac_part.empty()) throw std::invalid_argument("malformed threshold: " + std::string(text));
    if (frac_part.size() > 9) throw std::invalid_argument("threshold has more than 9 fractional digits");
    std::uint64_t num = 0;
    for (std::string_view part : {int_part, frac_part}) {
      for (char c : part) {
        if (c < '0' || c > '9') throw std::invalid_argument("malformed threshold: " + std::string(text));
        num = num * 10 + static_cast<std::uint64_t>(c - '0');
      }
    }
    std::uint64_t den = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) den *= 10;
    if (num == 0) throw std::invalid_argument("threshold must be > 0");
    if (num > den) throw std::invalid_argument("threshold must be <= 1");
    const std::uint64_t g = std::gcd(num, den);
    return Threshold(num / g, den / g);
  }

  std::uint64_t num() const { return num_; }
  std::uint64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend bool operator==(const Threshold&, const Threshold&) = default;

 private:
  Threshold(std::uint64_t n, std::uint64_t d) : num_(n), den_(d) {}
  std::uint64_t num_;
  std::uint64_t den_;
};

namespace detail {

inline std::uint64_t checked_u64(uint128 v, const char* what) {
  if (v > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error(what);
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

// Sum of squared weights.
inline std::uint64_t squared_norm(const Descriptor& x) {
  uint128 acc = 0;
  for (const auto& e : x.entries()) {
    acc += static_cast<uint128>(e.weight) * e.weight;
  }
  return detail::checked_u64(acc, "squared norm exceeds 64 bits");
}

// Sparse dot product by sorted merge over the two entry lists.
inline std::uint64_t dot(const Descriptor& x, const Descriptor& y) {
  uint128 acc = 0;
  auto xs = x.entries();
  auto ys = y.entries();
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    if (xs[i].dim < ys[j].dim) {
      ++i;
    } else if (ys[j].dim < xs[i].dim) {
      ++j;
    } else {
      acc += static_cast<uint128>(xs[i].weight) * ys[j].weight;
      ++i;
      ++j;
    }
  }
  return detail::checked_u64(acc, "dot product exceeds 64 bits");
}

// J(x, q) >= eps given the dot product and both squared norms, evaluated as
// (num + den) * dot >= num * (nx + nq) in 128-bit integers.
inline bool jaccard_geq_parts(std::uint64_t dot_xq, std::uint64_t norm_x, std::uint64_t norm_q,
                              const Threshold& eps) {
  if (norm_x == 0 && norm_q == 0) throw std::domain_error("Jaccard similarity undefined for two empty descriptors");
  const uint128 lhs = static_cast<uint128>(eps.num() + eps.den()) * dot_xq;
  const uint128 rhs = static_cast<uint128>(eps.num()) * (static_cast<uint128>(norm_x) + norm_q);
  return lhs >= rhs;
}

inline bool jaccard_geq(const Descriptor& x, const Descriptor& q, const Threshold& eps) {
  return jaccard_geq_parts(dot(x, q), squared_norm(x), squared_norm(q), eps);
}

// Exact similarity dot / (nx + nq - dot) from precomputed parts.
inline Rational similarity_from_parts(std::uint64_t dot_xq, std::uint64_t norm_x, std::uint64_t norm_q) {
  if (norm_x == 0 && norm_q == 0) throw std::domain_error("Jaccard similarity undefined for two empty descriptors");
  const uint128 den = static_cast<uint128>(norm_x) + norm_q - dot_xq;
  if (den == 0) return {1, 1};  // both empty excluded above; identical vectors only
  return Rational::reduced(dot_xq, detail::checked_u64(den, "similarity denominator exceeds 64 bits"));
}

inline Rational jaccard_value(const Descriptor& x, const Descriptor& q) {
  return similarity_from_parts(dot(x, q), squared_norm(x), squared_norm(q));
}

namespace detail {

inline std::uint64_t parse_u64_field(std::string_view text, const char* what) {
  if (text.empty()) throw ParseError(std::string("missing ") + what);
  if (text.front() == '-') throw ParseError(std::string(what) + " must be non-negative: " + std::string(text));
  std::uint64_t value = 0;
  const auto* begin = text.data();
  const auto* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec == std::errc::result_out_of_range) throw ParseError(std::string(what) + " out of range: " + std::string(text));
  if (ec != std::errc() || ptr != end) throw ParseError(std::string("malformed ") + what + ": " + std::string(text));
  return value;
}

}  // namespace detail

// Parses one record line `<id><TAB>d1:f1 d2:f2 ...`. Pairs may arrive in any
// order; the result is sorted ascending. Duplicate dims, zero weights and
// dims outside [1, max_dim] are rejected.
inline DescriptorRecord parse_descriptor(std::string_view line,
                                         std::uint64_t max_dim = std::numeric_limits<std::uint64_t>::max()) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) throw ParseError("missing TAB after record id");
  DescriptorRecord rec;
  rec.id = detail::parse_u64_field(line.substr(0, tab), "record id");

  std::vector<Entry> entries;
  std::string_view rest = line.substr(tab + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    if (rest[pos] == ' ') {
      ++pos;
      continue;
    }
    std::size_t end = rest.find(' ', pos);
    if (end == std::string_view::npos) end = rest.size();
    std::string_view pair = rest.substr(pos, end - pos);
    pos = end;

    const auto colon = pair.find(':');
    if (colon == std::string_view::npos) throw ParseError("malformed pair (expected d:f): " + std::string(pair));
    std::string_view dim_text = pair.substr(0, colon);
    std::string_view weight_text = pair.substr(colon + 1);
    const std::uint64_t dim = detail::parse_u64_field(dim_text, "dimension index");
    if (dim == 0) throw ParseError("dimension index must be >= 1");
    if (dim > max_dim) throw ParseError("dimension index out of range: " + std::string(dim_text));
    if (!weight_text.empty() && weight_text.front() == '-') {
      throw ParseError("negative weight: " + std::string(weight_text));
    }
    const std::uint64_t weight = detail::parse_u64_field(weight_text, "weight");
    if (weight == 0) throw ParseError("zero weight for dimension " + std::string(dim_text));
    entries.push_back({dim, weight});
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.dim < b.dim; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i - 1].dim == entries[i].dim) {
      throw ParseError("duplicate dimension index " + std::to_string(entries[i].dim));
    }
  }
  rec.desc = Descriptor::from_entries(std::move(entries));
  return rec;
}

// Inverse of parse_descriptor, used by the dataset writer.
inline std::string format_record(const DescriptorRecord& rec) {
  std::string out = std::to_string(rec.id);
  out.push_back('\t');
  bool first = true;
  for (const auto& e : rec.desc.entries()) {
    if (!first) out.push_back(' ');
    first = false;
    out += std::to_string(e.dim);
    out.push_back(':');
    out += std::to_string(e.weight);
  }
  return out;
}

}  // namespace sitad
