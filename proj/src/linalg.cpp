#include "fsd/linalg.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <stdexcept>
#include <string>

extern "C" void openblas_set_num_threads(int);

namespace fsd::linalg {
namespace {

// Results must not depend on how many trials run concurrently, so the BLAS
// backend is pinned to one thread; the harness parallelizes across trials.
struct BlasInit {
  BlasInit() { openblas_set_num_threads(1); }
};
const BlasInit blas_init;

Eigen::MatrixXd syrk(const Eigen::MatrixXd& x, bool transpose, double scale) {
  const int n = transpose ? static_cast<int>(x.cols()) : static_cast<int>(x.rows());
  const int k = transpose ? static_cast<int>(x.rows()) : static_cast<int>(x.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return out;
  cblas_dsyrk(CblasColMajor, CblasLower, transpose ? CblasTrans : CblasNoTrans,
              n, k, scale, x.data(), static_cast<int>(x.rows()), 0.0,
              out.data(), n);
  out.triangularView<Eigen::StrictlyUpper>() =
      out.triangularView<Eigen::StrictlyLower>().transpose();
  return out;
}

}  // namespace

Eigen::MatrixXd gram_primal(const Eigen::MatrixXd& design) {
  const double n = static_cast<double>(design.rows());
  return syrk(design, /*transpose=*/true, 1.0 / n);
}

Eigen::MatrixXd gram_dual(const Eigen::MatrixXd& design) {
  const double n = static_cast<double>(design.rows());
  return syrk(design, /*transpose=*/false, 1.0 / n);
}

SymEig sym_eig(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("sym_eig: matrix not square");
  const int n = static_cast<int>(a.rows());
  SymEig out;
  out.vectors = a;
  out.values.resize(n);
  if (n == 0) return out;
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                  out.vectors.data(), n, out.values.data());
  if (info != 0)
    throw std::runtime_error("sym_eig: dsyevd failed, info=" + std::to_string(info) +
                             ", n=" + std::to_string(n));
  return out;
}

Eigen::VectorXd sym_eigvals(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("sym_eigvals: matrix not square");
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  Eigen::MatrixXd work = a;
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, w.data());
  if (info != 0)
    throw std::runtime_error("sym_eigvals: dsyevd failed, info=" + std::to_string(info) +
                             ", n=" + std::to_string(n));
  return w;
}

double sym_op_norm(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  const Eigen::VectorXd w = sym_eigvals(a);
  return std::max(std::abs(w(0)), std::abs(w(w.size() - 1)));
}

}  // namespace fsd::linalg
