#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "wavepin/grid.hpp"

namespace wavepin {

/// Solves (I - lambda h^2 Delta_h) x = b on the masked cells of a grid with
/// zero-flux closure at mask edges. In cell units the operator is
///   (A x)_i = x_i + lambda * sum_{inside neighbours j} (x_i - x_j),
/// which is symmetric positive definite and preserves sum_i x_i.
///
/// Conjugate gradients preconditioned by one symmetric multigrid V-cycle
/// (cell aggregation, red-black Gauss-Seidel, dense Cholesky at the bottom).
class HelmholtzSolver {
 public:
  HelmholtzSolver(const GridSpec& grid, double lambda);
  ~HelmholtzSolver();
  HelmholtzSolver(HelmholtzSolver&&) noexcept;
  HelmholtzSolver& operator=(HelmholtzSolver&&) noexcept;

  /// x holds the initial guess on entry. Stops when ||b - A x|| <= rel_tol ||b||.
  /// Returns the iteration count; throws SolverDivergence after max_iter.
  int solve(const std::vector<double>& b, std::vector<double>& x, double rel_tol = 1e-10,
            int max_iter = 200) const;

  /// y = A x (masked-out entries of y are zero).
  void apply(const std::vector<double>& x, std::vector<double>& y) const;

  double lambda() const { return lambda_; }
  std::size_t levels() const;

 private:
  struct Level;
  double lambda_;
  std::vector<std::unique_ptr<Level>> levels_;
  struct Coarse;
  std::unique_ptr<Coarse> coarse_;

  void vcycle(std::size_t l, const std::vector<double>& r, std::vector<double>& z) const;
  void to_frame(const std::vector<double>& in, std::vector<double>& out) const;
  void from_frame(const std::vector<double>& in, std::vector<double>& out) const;
};

}  // namespace wavepin
