#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kdvinv {

// Square band matrix with kl sub- and ku super-diagonals, factored in place
// by Gaussian elimination with partial pivoting. Storage follows the LAPACK
// general-band layout with kl extra rows for pivoting fill-in.
class BandMatrix {
public:
  BandMatrix(std::size_t n, std::size_t kl, std::size_t ku);

  std::size_t size() const { return n_; }
  std::size_t lower() const { return kl_; }
  std::size_t upper() const { return ku_; }

  // Entry (i,j); requires j - ku <= i <= j + kl.
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;
  bool in_band(std::size_t i, std::size_t j) const;

  // y = A x, valid before factorization only.
  void multiply(std::span<const double> x, std::span<double> y) const;

  // Throws SingularSystem on a zero pivot.
  void factorize();
  bool factorized() const { return factorized_; }
  // Solves A x = rhs in place.
  void solve(std::span<double> rhs) const;

private:
  std::size_t index(std::size_t i, std::size_t j) const { return (kv_ + i - j) + j * ldab_; }

  std::size_t n_;
  std::size_t kl_;
  std::size_t ku_;
  std::size_t kv_;
  std::size_t ldab_;
  std::vector<double> ab_;
  std::vector<std::size_t> pivots_;
  bool factorized_ = false;
};

}  // namespace kdvinv
