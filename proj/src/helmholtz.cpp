#include "wavepin/helmholtz.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "wavepin/errors.hpp"

namespace wavepin {

namespace {

constexpr std::size_t kCoarseCells = 256;
constexpr int kSweeps = 2;  // red-black pairs before and after the coarse correction

}  // namespace

// Every level is stored with a one-cell frame of dead cells around it, so
// the stencil loops need no bounds tests. Dead cells (frame and masked-out)
// have unit mass and no faces; with a zero right-hand side they stay zero.
struct HelmholtzSolver::Level {
  std::size_t nx = 0, ny = 0;  // live extent
  std::size_t NX = 0, NY = 0;  // with the frame
  std::vector<std::uint8_t> mask;
  std::vector<double> mass;
  std::vector<double> ax;  // lambda * face weight between k and k + 1
  std::vector<double> ay;  // lambda * face weight between k and k + NX
  std::vector<double> inv_diag;
  std::vector<std::size_t> parent;  // index on the next level (dead cells -> 0)
  bool cx = false, cy = false;      // which directions the next level coarsens
  mutable std::vector<double> r, z, t;
  mutable std::vector<double> b, x, cr, cz, cp, cq;  // conjugate gradient work (finest level)

  std::size_t size() const { return NX * NY; }
  std::size_t at(std::size_t i, std::size_t j) const { return (j + 1) * NX + (i + 1); }
  std::size_t live_begin() const { return NX; }
  std::size_t live_end() const { return NX * (NY - 1); }
};

struct HelmholtzSolver::Coarse {
  std::vector<std::size_t> cells;  // level index of each unknown
  Eigen::LLT<Eigen::MatrixXd> llt;
};

namespace {

template <class L>
void apply_level(const L& lv, const std::vector<double>& x, std::vector<double>& y) {
  const std::size_t NX = lv.NX;
  const double* __restrict ax = lv.ax.data();
  const double* __restrict ay = lv.ay.data();
  const double* __restrict m = lv.mass.data();
  const double* __restrict xp = x.data();
  double* __restrict yp = y.data();
  for (std::size_t k = lv.live_begin(); k < lv.live_end(); ++k) {
    const double xk = xp[k];
    yp[k] = m[k] * xk + ax[k] * (xk - xp[k + 1]) + ax[k - 1] * (xk - xp[k - 1]) +
            ay[k] * (xk - xp[k + NX]) + ay[k - NX] * (xk - xp[k - NX]);
  }
}

// One Gauss-Seidel pass over the cells of one colour.
template <class L>
void relax_colour(const L& lv, const std::vector<double>& b, std::vector<double>& x, int colour) {
  const std::size_t NX = lv.NX;
  const double* __restrict ax = lv.ax.data();
  const double* __restrict ay = lv.ay.data();
  const double* __restrict id = lv.inv_diag.data();
  const double* __restrict bp = b.data();
  double* __restrict xp = x.data();
  for (std::size_t j = 1; j + 1 < lv.NY; ++j) {
    const std::size_t row = j * NX;
    for (std::size_t i = (j + colour) % 2; i < NX; i += 2) {
      const std::size_t k = row + i;
      xp[k] = (bp[k] + ax[k] * xp[k + 1] + ax[k - 1] * xp[k - 1] + ay[k] * xp[k + NX] +
               ay[k - NX] * xp[k - NX]) *
              id[k];
    }
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

HelmholtzSolver::HelmholtzSolver(const GridSpec& g, double lambda) : lambda_(lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("Helmholtz lambda must be non-negative");
  auto shape = [](Level& lv, std::size_t nx, std::size_t ny) {
    lv.nx = nx;
    lv.ny = ny;
    lv.NX = nx + 2;
    lv.NY = ny + 2;
    lv.mask.assign(lv.size(), 0);
    lv.mass.assign(lv.size(), 0.0);
    lv.ax.assign(lv.size(), 0.0);
    lv.ay.assign(lv.size(), 0.0);
  };
  // face weights are accumulated unscaled and multiplied by lambda at the end
  auto fine = std::make_unique<Level>();
  shape(*fine, g.nx, g.ny);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (!g.inside(i, j)) continue;
      const std::size_t k = fine->at(i, j);
      fine->mask[k] = 1;
      fine->mass[k] = 1.0;
      if (i + 1 < g.nx && g.inside(i + 1, j)) fine->ax[k] = 1.0;
      if (j + 1 < g.ny && g.inside(i, j + 1)) fine->ay[k] = 1.0;
    }
  }
  levels_.push_back(std::move(fine));

  auto count = [](const Level& lv) {
    std::size_t c = 0;
    for (auto m : lv.mask) c += m;
    return c;
  };
  while (count(*levels_.back()) > kCoarseCells) {
    Level& f = *levels_.back();
    f.cx = f.nx > 1;
    f.cy = f.ny > 1;
    if (!f.cx && !f.cy) break;
    auto c = std::make_unique<Level>();
    shape(*c, f.cx ? (f.nx + 1) / 2 : f.nx, f.cy ? (f.ny + 1) / 2 : f.ny);
    f.parent.assign(f.size(), 0);
    const double sx = f.cx ? 0.5 : 1.0, sy = f.cy ? 0.5 : 1.0;
    for (std::size_t j = 0; j < f.ny; ++j) {
      for (std::size_t i = 0; i < f.nx; ++i) {
        const std::size_t k = f.at(i, j);
        if (!f.mask[k]) continue;
        const std::size_t I = f.cx ? i / 2 : i, J = f.cy ? j / 2 : j;
        const std::size_t kc = c->at(I, J);
        f.parent[k] = kc;
        c->mask[kc] = 1;
        c->mass[kc] += f.mass[k];
        // fine faces that cross a coarse face
        if (f.ax[k] != 0.0 && (f.cx ? (i + 1) / 2 : i + 1) != I) c->ax[kc] += sx * f.ax[k];
        if (f.ay[k] != 0.0 && (f.cy ? (j + 1) / 2 : j + 1) != J) c->ay[kc] += sy * f.ay[k];
      }
    }
    levels_.push_back(std::move(c));
  }

  for (auto& lv : levels_) {
    lv->inv_diag.assign(lv->size(), 1.0);
    for (std::size_t k = 0; k < lv->size(); ++k) {
      lv->ax[k] *= lambda_;
      lv->ay[k] *= lambda_;
      if (!lv->mask[k]) lv->mass[k] = 1.0;
    }
    for (std::size_t k = lv->live_begin(); k < lv->live_end(); ++k) {
      lv->inv_diag[k] =
          1.0 / (lv->mass[k] + lv->ax[k] + lv->ax[k - 1] + lv->ay[k] + lv->ay[k - lv->NX]);
    }
    lv->r.assign(lv->size(), 0.0);
    lv->z.assign(lv->size(), 0.0);
    lv->t.assign(lv->size(), 0.0);
  }

  // dense factorization of the coarsest operator
  const Level& lc = *levels_.back();
  coarse_ = std::make_unique<Coarse>();
  std::vector<long> pos(lc.size(), -1);
  for (std::size_t k = 0; k < lc.size(); ++k) {
    if (lc.mask[k]) {
      pos[k] = static_cast<long>(coarse_->cells.size());
      coarse_->cells.push_back(k);
    }
  }
  const auto m = static_cast<long>(coarse_->cells.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (long a = 0; a < m; ++a) {
    const std::size_t k = coarse_->cells[static_cast<std::size_t>(a)];
    A(a, a) = 1.0 / lc.inv_diag[k];
    if (lc.ax[k] != 0.0) A(a, pos[k + 1]) = A(pos[k + 1], a) = -lc.ax[k];
    if (lc.ay[k] != 0.0) A(a, pos[k + lc.NX]) = A(pos[k + lc.NX], a) = -lc.ay[k];
  }
  coarse_->llt.compute(A);
}

HelmholtzSolver::~HelmholtzSolver() = default;
HelmholtzSolver::HelmholtzSolver(HelmholtzSolver&&) noexcept = default;
HelmholtzSolver& HelmholtzSolver::operator=(HelmholtzSolver&&) noexcept = default;

std::size_t HelmholtzSolver::levels() const { return levels_.size(); }

void HelmholtzSolver::to_frame(const std::vector<double>& in, std::vector<double>& out) const {
  const Level& f = *levels_.front();
  out.assign(f.size(), 0.0);
  for (std::size_t j = 0; j < f.ny; ++j) {
    for (std::size_t i = 0; i < f.nx; ++i) {
      const std::size_t k = f.at(i, j);
      if (f.mask[k]) out[k] = in[j * f.nx + i];
    }
  }
}

void HelmholtzSolver::from_frame(const std::vector<double>& in, std::vector<double>& out) const {
  const Level& f = *levels_.front();
  out.assign(f.nx * f.ny, 0.0);
  for (std::size_t j = 0; j < f.ny; ++j) {
    for (std::size_t i = 0; i < f.nx; ++i) out[j * f.nx + i] = in[f.at(i, j)];
  }
}

void HelmholtzSolver::apply(const std::vector<double>& x, std::vector<double>& y) const {
  const Level& f = *levels_.front();
  std::vector<double> xf, yf(f.size(), 0.0);
  to_frame(x, xf);
  apply_level(f, xf, yf);
  from_frame(yf, y);
}

void HelmholtzSolver::vcycle(std::size_t l, const std::vector<double>& b, std::vector<double>& z) const {
  const Level& lv = *levels_[l];
  std::fill(z.begin(), z.end(), 0.0);
  if (l + 1 == levels_.size()) {
    const std::size_t m = coarse_->cells.size();
    Eigen::VectorXd rhs(static_cast<long>(m));
    for (std::size_t a = 0; a < m; ++a) rhs[static_cast<long>(a)] = b[coarse_->cells[a]];
    const Eigen::VectorXd sol = coarse_->llt.solve(rhs);
    for (std::size_t a = 0; a < m; ++a) z[coarse_->cells[a]] = sol[static_cast<long>(a)];
    return;
  }
  for (int s = 0; s < kSweeps; ++s) {
    relax_colour(lv, b, z, 0);
    relax_colour(lv, b, z, 1);
  }
  // residual, restricted by summing children; dead cells add zero to the
  // coarse frame cell 0
  const Level& c = *levels_[l + 1];
  std::fill(c.r.begin(), c.r.end(), 0.0);
  {
    const std::size_t NX = lv.NX;
    const double* __restrict ax = lv.ax.data();
    const double* __restrict ay = lv.ay.data();
    const double* __restrict m = lv.mass.data();
    const double* __restrict zp = z.data();
    const std::size_t* __restrict par = lv.parent.data();
    double* __restrict cr = c.r.data();
    for (std::size_t k = lv.live_begin(); k < lv.live_end(); ++k) {
      const double zk = zp[k];
      const double az = m[k] * zk + ax[k] * (zk - zp[k + 1]) + ax[k - 1] * (zk - zp[k - 1]) +
                        ay[k] * (zk - zp[k + NX]) + ay[k - NX] * (zk - zp[k - NX]);
      // dead cells have b = z = 0 and add nothing
      cr[par[k]] += b[k] - az;
    }
  }
  vcycle(l + 1, c.r, c.z);
  for (std::size_t k = lv.live_begin(); k < lv.live_end(); ++k) {
    z[k] += lv.mask[k] ? c.z[lv.parent[k]] : 0.0;
  }
  // reversed order keeps the preconditioner symmetric
  for (int s = 0; s < kSweeps; ++s) {
    relax_colour(lv, b, z, 1);
    relax_colour(lv, b, z, 0);
  }
}

int HelmholtzSolver::solve(const std::vector<double>& b_in, std::vector<double>& x_io,
                           double rel_tol, int max_iter) const {
  const Level& f = *levels_.front();
  if (b_in.size() != f.nx * f.ny) throw std::invalid_argument("Helmholtz rhs has the wrong size");
  if (x_io.size() != b_in.size()) x_io.assign(b_in.size(), 0.0);
  const std::size_t n = f.size();
  std::vector<double>& b = f.b;
  std::vector<double>& x = f.x;
  to_frame(b_in, b);
  to_frame(x_io, x);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x_io.begin(), x_io.end(), 0.0);
    return 0;
  }
  std::vector<double>& r = f.cr;
  std::vector<double>& z = f.cz;
  std::vector<double>& p = f.cp;
  std::vector<double>& q = f.cq;
  for (auto* w : {&r, &z, &p, &q}) w->assign(n, 0.0);
  apply_level(f, x, q);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
  double rnorm = std::sqrt(dot(r, r));
  int it = 0;
  if (rnorm > rel_tol * bnorm) {
    vcycle(0, r, z);
    p = z;
    double rz = dot(r, z);
    for (it = 1;; ++it) {
      if (it > max_iter) {
        throw SolverDivergence("no convergence in " + std::to_string(max_iter) +
                               " iterations (relative residual " + std::to_string(rnorm / bnorm) +
                               ")");
      }
      apply_level(f, p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) throw SolverDivergence("conjugate gradient lost positivity");
      const double alpha = rz / pq;
      double rr = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * q[k];
        rr += r[k] * r[k];
      }
      rnorm = std::sqrt(rr);
      if (!std::isfinite(rnorm)) throw SolverDivergence("non-finite residual");
      if (rnorm <= rel_tol * bnorm) break;
      vcycle(0, r, z);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
  }
  from_frame(x, x_io);
  return it;
}

}  // namespace wavepin
