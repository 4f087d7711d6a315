#pragma once

// Reference solvers used only by the tests. They share no code with the library.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpc::oracle
{

/// Stabilizing DARE solution by the structure-preserving doubling algorithm.
inline Eigen::Matrix3d dareDoubling(const Eigen::Matrix3d & A,
                                    const Eigen::Vector3d & B,
                                    const Eigen::Matrix3d & H,
                                    double R,
                                    int maxIterations = 200)
{
  Eigen::Matrix3d Ak = A;
  Eigen::Matrix3d Gk = B * B.transpose() / R;
  Eigen::Matrix3d Hk = H;
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  for(int it = 0; it < maxIterations; ++it)
  {
    const Eigen::Matrix3d W = (I + Gk * Hk).inverse();
    const Eigen::Matrix3d Anext = Ak * W * Ak;
    const Eigen::Matrix3d Gnext = Gk + Ak * W * Gk * Ak.transpose();
    const Eigen::Matrix3d Hnext = Hk + Ak.transpose() * Hk * W * Ak;
    const double change = (Hnext - Hk).norm();
    Ak = Anext;
    Gk = 0.5 * (Gnext + Gnext.transpose());
    Hk = 0.5 * (Hnext + Hnext.transpose());
    if(change <= 1e-15 * Hk.norm())
    {
      return Hk;
    }
  }
  return Hk;
}

/** First optimal input of the truncated servo problem, by dense least squares over the jerk sequence.
 *
 * min sum_{k=1}^{N-1} |C x_k - y_k|_Q^2 + sum_{j=0}^{N-1} R u_j^2 + (x_N - xbar)' P (x_N - xbar)
 * with xbar = (y_N position, 0, 0). The last reference sample must have a zero second output.
 */
inline double densePreviewInput(const Eigen::Matrix3d & A,
                                const Eigen::Vector3d & B,
                                const Eigen::Matrix<double, 2, 3> & C,
                                const Eigen::Vector2d & qDiag,
                                double R,
                                const Eigen::Matrix3d & P,
                                const Eigen::Vector3d & x0,
                                const Eigen::Matrix<double, Eigen::Dynamic, 2> & window)
{
  const int N = static_cast<int>(window.rows());
  if(window(N - 1, 1) != 0.0)
  {
    throw std::invalid_argument("densePreviewInput: last sample must have a zero second output");
  }
  // x_k = Phi_k x0 + Gamma_k u
  std::vector<Eigen::Matrix3d> phi(N + 1);
  std::vector<Eigen::MatrixXd> gamma(N + 1, Eigen::MatrixXd::Zero(3, N));
  phi[0].setIdentity();
  for(int k = 1; k <= N; ++k)
  {
    phi[k] = A * phi[k - 1];
    gamma[k] = A * gamma[k - 1];
    gamma[k].col(k - 1) += B;
  }
  const int rows = 2 * (N - 1) + N + 3;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, N);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  const Eigen::Vector2d sq = qDiag.cwiseSqrt();
  int r = 0;
  for(int k = 1; k < N; ++k)
  {
    for(int o = 0; o < 2; ++o)
    {
      M.row(r) = sq[o] * C.row(o) * gamma[k];
      b[r] = sq[o] * (window(k - 1, o) - C.row(o).dot(phi[k] * x0));
      ++r;
    }
  }
  for(int j = 0; j < N; ++j)
  {
    M(r++, j) = std::sqrt(R);
  }
  const Eigen::Vector3d xbar(window(N - 1, 0), 0.0, 0.0);
  const Eigen::Matrix3d Lt = P.llt().matrixU();
  M.block(r, 0, 3, N) = Lt * gamma[N];
  b.segment<3>(r) = Lt * (xbar - phi[N] * x0);
  const Eigen::VectorXd u = M.colPivHouseholderQr().solve(b);
  return u[0];
}

struct PgResult
{
  Eigen::VectorXd lambda;
  double objective = 0.0;
  int iterations = 0;
};

/// min |G l - w|^2 s.t. l >= 0 by accelerated projected gradient with adaptive restart.
inline PgResult projectedGradientNnls(const Eigen::MatrixXd & G,
                                      const Eigen::VectorXd & w,
                                      int maxIterations = 2000000,
                                      double gradientTolerance = 1e-13)
{
  const Eigen::Index n = G.cols();
  const Eigen::MatrixXd GtG = G.transpose() * G;
  const Eigen::VectorXd Gtw = G.transpose() * w;
  const double L = GtG.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(L, 1e-300);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = x;
  Eigen::VectorXd xPrev = x;
  double t = 1.0;
  const double scale = 1.0 + Gtw.cwiseAbs().maxCoeff();
  PgResult out;
  for(int it = 0; it < maxIterations; ++it)
  {
    const Eigen::VectorXd grad = GtG * y - Gtw;
    xPrev = x;
    x = (y - step * grad).cwiseMax(0.0);
    const double tNext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Restart the momentum when it points uphill.
    if((y - x).dot(x - xPrev) > 0.0)
    {
      t = 1.0;
      y = x;
    }
    else
    {
      y = x + ((t - 1.0) / tNext) * (x - xPrev);
      t = tNext;
    }
    out.iterations = it + 1;
    if(it % 50 == 0)
    {
      // Natural residual min(x, grad): zero exactly at a KKT point.
      const Eigen::VectorXd gx = GtG * x - Gtw;
      const double worst = x.cwiseMin(gx).cwiseAbs().maxCoeff();
      if(worst <= gradientTolerance * scale)
      {
        break;
      }
    }
  }
  out.lambda = x;
  out.objective = (G * x - w).squaredNorm();
  return out;
}

} // namespace cpc::oracle
