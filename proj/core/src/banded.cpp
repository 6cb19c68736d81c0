#include "kdvinv/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "kdvinv/errors.hpp"

namespace kdvinv {

BandMatrix::BandMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), kv_(kl + ku), ldab_(2 * kl + ku + 1), ab_(ldab_ * n, 0.0), pivots_(n, 0) {
  if (n == 0) throw DomainError("band matrix must be non-empty");
}

bool BandMatrix::in_band(std::size_t i, std::size_t j) const {
  return i < n_ && j < n_ && i + ku_ >= j && i <= j + kl_;
}

double& BandMatrix::at(std::size_t i, std::size_t j) {
  if (!in_band(i, j)) throw DomainError("band matrix entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside band");
  return ab_[index(i, j)];
}

double BandMatrix::at(std::size_t i, std::size_t j) const {
  if (!in_band(i, j)) return 0.0;
  return ab_[index(i, j)];
}

void BandMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > kl_ ? i - kl_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + ku_);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += ab_[index(i, j)] * x[j];
    y[i] = s;
  }
}

void BandMatrix::factorize() {
  if (factorized_) return;
  std::size_t ju = 0;
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    std::size_t jp = 0;
    double best = std::abs(ab_[index(j, j)]);
    for (std::size_t p = 1; p <= km; ++p) {
      const double v = std::abs(ab_[index(j + p, j)]);
      if (v > best) {
        best = v;
        jp = p;
      }
    }
    pivots_[j] = j + jp;
    if (!(best > 0.0) || !std::isfinite(best)) {
      throw SingularSystem("zero pivot in column " + std::to_string(j) + " of the band system");
    }
    ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
    if (jp != 0) {
      for (std::size_t c = j; c <= ju; ++c) std::swap(ab_[index(j, c)], ab_[index(j + jp, c)]);
    }
    const double pivot = ab_[index(j, j)];
    for (std::size_t r = j + 1; r <= j + km; ++r) ab_[index(r, j)] /= pivot;
    for (std::size_t c = j + 1; c <= ju; ++c) {
      const double ujc = ab_[index(j, c)];
      if (ujc == 0.0) continue;
      for (std::size_t r = j + 1; r <= j + km; ++r) ab_[index(r, c)] -= ab_[index(r, j)] * ujc;
    }
  }
  factorized_ = true;
}

void BandMatrix::solve(std::span<double> rhs) const {
  if (!factorized_) throw DomainError("band matrix must be factorized before solve");
  if (rhs.size() != n_) throw DomainError("right-hand side length mismatch");
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    if (pivots_[j] != j) std::swap(rhs[j], rhs[pivots_[j]]);
    const double bj = rhs[j];
    if (bj == 0.0) continue;
    for (std::size_t r = j + 1; r <= j + km; ++r) rhs[r] -= ab_[index(r, j)] * bj;
  }
  for (std::size_t jj = n_; jj-- > 0;) {
    rhs[jj] /= ab_[index(jj, jj)];
    const double bj = rhs[jj];
    const std::size_t lo = jj > kv_ ? jj - kv_ : 0;
    for (std::size_t i = lo; i < jj; ++i) rhs[i] -= ab_[index(i, jj)] * bj;
  }
}

}  // namespace kdvinv
