#include "relhop/model.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "relhop/error.hpp"

namespace relhop {

namespace {

bool is_spin(int v) { return v == 1 || v == -1; }

// Taylor coefficients of sqrt(1 + x): c_j = binom(1/2, j).
double sqrt_series_coefficient(int j) {
  double c = 1.0;
  for (int k = 1; k <= j; ++k) c *= (0.5 - (k - 1)) / k;
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// PatternView / PatternSet

PatternView::PatternView(std::span<const Spin> site_major, std::size_t pattern_count)
    : data_(site_major), p_(pattern_count), n_(pattern_count == 0 ? 0 : site_major.size() / pattern_count) {
  if (p_ == 0 || site_major.size() % p_ != 0)
    throw InputError("pattern view: storage size is not a multiple of the pattern count");
}

PatternView PatternView::sites(std::size_t first, std::size_t count) const {
  if (first + count > n_ || count == 0)
    throw InputError("pattern view: site range out of bounds");
  return PatternView(data_.subspan(first * p_, count * p_), p_);
}

PatternSet::PatternSet(std::size_t pattern_count, std::size_t site_count, std::span<const Spin> rows)
    : p_(pattern_count), n_(site_count) {
  if (p_ < 1 || n_ < 1) throw InputError("pattern set: need P >= 1 and N >= 1");
  if (p_ > n_)
    throw InputError("pattern set: P = " + std::to_string(p_) + " exceeds N = " + std::to_string(n_) +
                     " (low-storage guard)");
  if (rows.size() != p_ * n_) throw InputError("pattern set: expected P*N entries");
  sites_.resize(p_ * n_);
  for (std::size_t mu = 0; mu < p_; ++mu) {
    for (std::size_t i = 0; i < n_; ++i) {
      const Spin v = rows[mu * n_ + i];
      if (!is_spin(v)) throw InputError("pattern set: entries must be -1 or +1");
      sites_[i * p_ + mu] = v;
    }
  }
}

PatternSet PatternSet::from_rows(const std::vector<std::vector<int>>& rows) {
  if (rows.empty()) throw InputError("pattern set: no patterns");
  const std::size_t n = rows.front().size();
  std::vector<Spin> flat;
  flat.reserve(rows.size() * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw InputError("pattern set: ragged pattern rows");
    for (int v : row) {
      if (!is_spin(v)) throw InputError("pattern set: entries must be -1 or +1");
      flat.push_back(static_cast<Spin>(v));
    }
  }
  return PatternSet(rows.size(), n, flat);
}

std::vector<Spin> PatternSet::pattern(std::size_t mu) const {
  std::vector<Spin> row(n_);
  for (std::size_t i = 0; i < n_; ++i) row[i] = at(mu, i);
  return row;
}

PatternSet PatternSet::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != p_) throw InputError("pattern set: permutation has wrong length");
  std::vector<Spin> rows(p_ * n_);
  for (std::size_t k = 0; k < p_; ++k) {
    if (perm[k] >= p_) throw InputError("pattern set: permutation index out of range");
    for (std::size_t i = 0; i < n_; ++i) rows[k * n_ + i] = at(perm[k], i);
  }
  return PatternSet(p_, n_, rows);
}

// ---------------------------------------------------------------------------
// OverlapVector

OverlapVector::OverlapVector(std::vector<double> m) : m_(std::move(m)) {
  for (double v : m_) {
    if (!(v >= -1.0 && v <= 1.0)) throw InputError("overlap vector: component outside [-1, 1]");
  }
}

double OverlapVector::norm_sq() const noexcept {
  double s = 0.0;
  for (double v : m_) s += v * v;
  return s;
}

double OverlapVector::norm() const noexcept { return std::sqrt(norm_sq()); }

// ---------------------------------------------------------------------------
// ModelKind and cost functions

ModelKind ModelKind::truncated(int order) {
  if (order < 2 || order % 2 != 0)
    throw InputError("truncated model: order must be even and >= 2, got " + std::to_string(order));
  return ModelKind(Family::Truncated, order);
}

ModelKind ModelKind::parse(std::string_view text) {
  if (text == "classical") return classical();
  if (text == "relativistic") return relativistic();
  constexpr std::string_view prefix = "truncated:";
  if (text.starts_with(prefix)) {
    const auto digits = text.substr(prefix.size());
    int order = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), order);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return truncated(order);
  }
  throw InputError("unknown model '" + std::string(text) +
                   "' (expected classical, relativistic or truncated:<even order>)");
}

std::string ModelKind::name() const {
  switch (family_) {
    case Family::Classical: return "classical";
    case Family::Relativistic: return "relativistic";
    case Family::Truncated: return "truncated:" + std::to_string(order_);
  }
  return {};
}

double energy_density(const ModelKind& kind, double x) {
  switch (kind.family()) {
    case ModelKind::Family::Classical: return -0.5 * x;
    case ModelKind::Family::Relativistic: return -std::sqrt(1.0 + x);
    case ModelKind::Family::Truncated: {
      // Horner in x over the first order/2 + 1 coefficients.
      const int terms = kind.order() / 2;
      double acc = 0.0;
      for (int j = terms; j >= 0; --j) acc = acc * x + sqrt_series_coefficient(j);
      return -acc;
    }
  }
  return 0.0;
}

double energy_density_change(const ModelKind& kind, double x_old, double x_new) {
  const double dx = x_new - x_old;
  switch (kind.family()) {
    case ModelKind::Family::Classical: return -0.5 * dx;
    case ModelKind::Family::Relativistic:
      return -dx / (std::sqrt(1.0 + x_new) + std::sqrt(1.0 + x_old));
    case ModelKind::Family::Truncated: {
      // x_new^j - x_old^j = dx * sum_{k<j} x_new^k x_old^(j-1-k)
      const int terms = kind.order() / 2;
      double acc = 0.0;
      for (int j = 1; j <= terms; ++j) {
        double geometric = 0.0;
        double pn = 1.0;
        for (int k = 0; k < j; ++k) {
          geometric += pn * std::pow(x_old, j - 1 - k);
          pn *= x_new;
        }
        acc += sqrt_series_coefficient(j) * geometric;
      }
      return -dx * acc;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// SpinState

SpinState::SpinState(std::vector<Spin> spins, const PatternSet& patterns) : spins_(std::move(spins)) {
  if (spins_.size() != patterns.site_count())
    throw InputError("spin state: length " + std::to_string(spins_.size()) + " does not match N = " +
                     std::to_string(patterns.site_count()));
  sums_.assign(patterns.pattern_count(), 0);
  for (std::size_t i = 0; i < spins_.size(); ++i) {
    if (!is_spin(spins_[i])) throw InputError("spin state: spins must be -1 or +1");
    const auto xi = patterns.site(i);
    for (std::size_t mu = 0; mu < xi.size(); ++mu) sums_[mu] += xi[mu] * spins_[i];
  }
  for (auto s : sums_) sum_sq_ += s * s;
}

SpinState SpinState::aligned(const PatternSet& patterns, std::size_t mu, int sign) {
  if (mu >= patterns.pattern_count()) throw InputError("spin state: pattern index out of range");
  if (!is_spin(sign)) throw InputError("spin state: sign must be -1 or +1");
  auto row = patterns.pattern(mu);
  for (auto& v : row) v = static_cast<Spin>(v * sign);
  return SpinState(std::move(row), patterns);
}

OverlapVector SpinState::overlaps() const {
  std::vector<double> m(sums_.size());
  for (std::size_t mu = 0; mu < sums_.size(); ++mu) m[mu] = overlap(mu);
  return OverlapVector(std::move(m));
}

double SpinState::norm_sq() const noexcept {
  const auto n = static_cast<double>(spins_.size());
  return static_cast<double>(sum_sq_) / (n * n);
}

void SpinState::check_site(std::size_t i, const PatternSet& patterns) const {
  if (i >= spins_.size()) throw InputError("site index " + std::to_string(i) + " out of range");
  if (patterns.site_count() != spins_.size() || patterns.pattern_count() != sums_.size())
    throw InputError("spin state: pattern set dimensions do not match");
}

std::int64_t SpinState::overlap_sum_sq_after_flip(std::size_t i, const PatternSet& patterns) const {
  check_site(i, patterns);
  const auto xi = patterns.site(i);
  const std::int64_t s = spins_[i];
  std::int64_t out = 0;
  for (std::size_t mu = 0; mu < sums_.size(); ++mu) {
    const std::int64_t shifted = sums_[mu] - 2 * xi[mu] * s;
    out += shifted * shifted;
  }
  return out;
}

void SpinState::flip(std::size_t i, const PatternSet& patterns) {
  check_site(i, patterns);
  const auto xi = patterns.site(i);
  const std::int64_t s = spins_[i];
  sum_sq_ = 0;
  for (std::size_t mu = 0; mu < sums_.size(); ++mu) {
    sums_[mu] -= 2 * xi[mu] * s;
    sum_sq_ += sums_[mu] * sums_[mu];
  }
  spins_[i] = static_cast<Spin>(-s);
}

double SpinState::energy(const ModelKind& kind) const {
  return static_cast<double>(spins_.size()) * energy_density(kind, norm_sq());
}

// ---------------------------------------------------------------------------
// Free functions

OverlapVector mattis_overlaps(std::span<const Spin> spins, const PatternSet& patterns) {
  if (spins.size() != patterns.site_count())
    throw InputError("mattis_overlaps: spin length does not match N");
  const std::size_t p = patterns.pattern_count();
  std::vector<std::int64_t> dot(p, 0);
  for (std::size_t i = 0; i < spins.size(); ++i) {
    const auto xi = patterns.site(i);
    for (std::size_t mu = 0; mu < p; ++mu) dot[mu] += xi[mu] * spins[i];
  }
  std::vector<double> m(p);
  const auto n = static_cast<double>(spins.size());
  for (std::size_t mu = 0; mu < p; ++mu) m[mu] = static_cast<double>(dot[mu]) / n;
  return OverlapVector(std::move(m));
}

double energy_from_overlaps(const ModelKind& kind, const OverlapVector& m, std::size_t n) {
  return static_cast<double>(n) * energy_density(kind, m.norm_sq());
}

double energy(const ModelKind& kind, const SpinState& state, const PatternSet& patterns) {
  return energy_from_overlaps(kind, mattis_overlaps(state.spins(), patterns), state.size());
}

double delta_energy(const ModelKind& kind, const SpinState& state, const PatternSet& patterns,
                    std::size_t i) {
  const auto n = static_cast<double>(state.size());
  const double x_old = state.norm_sq();
  const double x_new = static_cast<double>(state.overlap_sum_sq_after_flip(i, patterns)) / (n * n);
  return n * energy_density_change(kind, x_old, x_new);
}

// ---------------------------------------------------------------------------
// Pattern files

void write_patterns(std::ostream& out, const PatternSet& patterns, std::uint64_t seed) {
  out << patterns.pattern_count() << ' ' << patterns.site_count() << ' ' << seed << '\n';
  std::string line(patterns.site_count(), '+');
  for (std::size_t mu = 0; mu < patterns.pattern_count(); ++mu) {
    for (std::size_t i = 0; i < patterns.site_count(); ++i) line[i] = patterns.at(mu, i) > 0 ? '+' : '-';
    out << line << '\n';
  }
}

PatternFile read_patterns(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InputError("pattern file: missing header");
  std::istringstream hs(header);
  std::size_t p = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  if (!(hs >> p >> n >> seed)) throw InputError("pattern file: header must read 'P N seed'");

  std::vector<Spin> rows;
  rows.reserve(p * n);
  std::string line;
  for (std::size_t mu = 0; mu < p; ++mu) {
    if (!std::getline(in, line)) throw InputError("pattern file: expected " + std::to_string(p) + " pattern lines");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() != n) throw InputError("pattern file: line " + std::to_string(mu + 2) + " has wrong length");
    for (char c : line) {
      if (c == '+') rows.push_back(1);
      else if (c == '-') rows.push_back(-1);
      else throw InputError(std::string("pattern file: unexpected character '") + c + "'");
    }
  }
  return PatternFile{PatternSet(p, n, rows), seed};
}

}  // namespace relhop
