#pragma once

// Patterns, spin configurations, Mattis overlaps and the Hopfield cost
// functions (classical, relativistic and the truncated relativistic series).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relhop {

using Spin = std::int8_t;

/// Non-owning view of a P x N pattern matrix stored site-major, so that the
/// P entries of one site are contiguous and a contiguous block of sites is a
/// subspan. Views are what the enumeration code uses for subsystems, which may
/// have fewer sites than patterns.
class PatternView {
 public:
  PatternView(std::span<const Spin> site_major, std::size_t pattern_count);

  std::size_t pattern_count() const noexcept { return p_; }
  std::size_t site_count() const noexcept { return n_; }

  Spin at(std::size_t mu, std::size_t i) const noexcept { return data_[i * p_ + mu]; }
  std::span<const Spin> site(std::size_t i) const noexcept { return data_.subspan(i * p_, p_); }

  /// Restriction to sites [first, first + count).
  PatternView sites(std::size_t first, std::size_t count) const;

 private:
  std::span<const Spin> data_;
  std::size_t p_;
  std::size_t n_;
};

/// The quenched disorder: P binary patterns of length N. Immutable.
class PatternSet {
 public:
  /// `rows` holds P patterns of N entries each, pattern after pattern.
  /// Throws InputError unless every entry is +-1, P >= 1, N >= 1 and P <= N.
  PatternSet(std::size_t pattern_count, std::size_t site_count, std::span<const Spin> rows);

  static PatternSet from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t pattern_count() const noexcept { return p_; }
  std::size_t site_count() const noexcept { return n_; }

  Spin at(std::size_t mu, std::size_t i) const noexcept { return sites_[i * p_ + mu]; }
  std::span<const Spin> site(std::size_t i) const noexcept {
    return std::span<const Spin>(sites_).subspan(i * p_, p_);
  }
  std::vector<Spin> pattern(std::size_t mu) const;

  PatternView view() const noexcept { return PatternView(sites_, p_); }

  /// Copy with the order of patterns permuted: new pattern k is old pattern perm[k].
  PatternSet permuted(std::span<const std::size_t> perm) const;

  bool operator==(const PatternSet&) const = default;

 private:
  std::size_t p_;
  std::size_t n_;
  std::vector<Spin> sites_;
};

/// The P Mattis overlaps m_mu, each in [-1, 1].
class OverlapVector {
 public:
  OverlapVector() = default;
  /// Throws InputError if a component lies outside [-1, 1].
  explicit OverlapVector(std::vector<double> m);

  std::size_t size() const noexcept { return m_.size(); }
  double operator[](std::size_t mu) const noexcept { return m_[mu]; }
  std::span<const double> values() const noexcept { return m_; }
  auto begin() const noexcept { return m_.begin(); }
  auto end() const noexcept { return m_.end(); }

  double norm_sq() const noexcept;
  double norm() const noexcept;

  bool operator==(const OverlapVector&) const = default;

 private:
  std::vector<double> m_;
};

/// Which cost function: H = -N ||m||^2 / 2, H = -N sqrt(1 + ||m||^2), or the
/// Taylor series of the latter in ||m||^2 kept through order `order` in m.
class ModelKind {
 public:
  enum class Family { Classical, Relativistic, Truncated };

  static ModelKind classical() noexcept { return ModelKind(Family::Classical, 0); }
  static ModelKind relativistic() noexcept { return ModelKind(Family::Relativistic, 0); }
  /// Throws InputError unless order is even and >= 2.
  static ModelKind truncated(int order);

  /// Accepts "classical", "relativistic" and "truncated:<order>".
  static ModelKind parse(std::string_view text);

  Family family() const noexcept { return family_; }
  int order() const noexcept { return order_; }
  std::string name() const;

  bool operator==(const ModelKind&) const = default;

 private:
  ModelKind(Family f, int order) noexcept : family_(f), order_(order) {}

  Family family_;
  int order_;
};

/// H / N as a function of x = ||m||^2.
double energy_density(const ModelKind& kind, double norm_sq);

/// energy_density(kind, x_new) - energy_density(kind, x_old), evaluated
/// without cancelling two O(1) numbers.
double energy_density_change(const ModelKind& kind, double norm_sq_old, double norm_sq_new);

/// A configuration sigma in {-1,+1}^N together with the integer overlap sums
/// S_mu = sum_i xi_i^mu sigma_i, kept exact under single flips. Overlaps are
/// read as S_mu / N. A state is tied to the pattern set it was built from;
/// passing a different-sized set to a mutating call throws.
class SpinState {
 public:
  SpinState(std::vector<Spin> spins, const PatternSet& patterns);

  /// sigma = sign * xi^mu.
  static SpinState aligned(const PatternSet& patterns, std::size_t mu, int sign = 1);

  std::size_t size() const noexcept { return spins_.size(); }
  Spin operator[](std::size_t i) const noexcept { return spins_[i]; }
  std::span<const Spin> spins() const noexcept { return spins_; }

  std::span<const std::int64_t> overlap_sums() const noexcept { return sums_; }
  double overlap(std::size_t mu) const noexcept {
    return static_cast<double>(sums_[mu]) / static_cast<double>(spins_.size());
  }
  OverlapVector overlaps() const;

  /// Integer sum of squares sum_mu S_mu^2, and the same after flipping site i.
  std::int64_t overlap_sum_sq() const noexcept { return sum_sq_; }
  std::int64_t overlap_sum_sq_after_flip(std::size_t i, const PatternSet& patterns) const;

  /// ||m||^2 from the exact integer accumulators.
  double norm_sq() const noexcept;

  /// Negate spin i and update the overlap sums in O(P).
  void flip(std::size_t i, const PatternSet& patterns);

  /// H(sigma) from the cached overlaps.
  double energy(const ModelKind& kind) const;

  bool operator==(const SpinState&) const = default;

 private:
  void check_site(std::size_t i, const PatternSet& patterns) const;

  std::vector<Spin> spins_;
  std::vector<std::int64_t> sums_;
  std::int64_t sum_sq_ = 0;
};

/// m_mu = (1/N) sum_i xi_i^mu sigma_i, computed from scratch.
OverlapVector mattis_overlaps(std::span<const Spin> spins, const PatternSet& patterns);

/// H(sigma | xi) from scratch (ignores the state's cache).
double energy(const ModelKind& kind, const SpinState& state, const PatternSet& patterns);

double energy_from_overlaps(const ModelKind& kind, const OverlapVector& m, std::size_t n);

/// H(sigma with spin i flipped) - H(sigma) in O(P) from the cached sums.
double delta_energy(const ModelKind& kind, const SpinState& state, const PatternSet& patterns,
                    std::size_t i);

// Pattern files: header line "P N seed", then one line of N '+'/'-' characters
// per pattern.

struct PatternFile {
  PatternSet patterns;
  std::uint64_t seed = 0;
};

void write_patterns(std::ostream& out, const PatternSet& patterns, std::uint64_t seed);
PatternFile read_patterns(std::istream& in);

}  // namespace relhop
