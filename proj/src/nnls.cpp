#include <cpc/errors.h>
#include <cpc/wrench_opt.h>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <vector>

namespace cpc
{

namespace
{

void checkProblem(const NnlsProblem & p)
{
  if(p.G.cols() < 1)
  {
    throw InvalidArgument("solveNnls: problem has no columns");
  }
  if(p.target.size() != p.G.rows())
  {
    throw InvalidArgument("solveNnls: target size does not match the matrix rows");
  }
  if(!p.G.allFinite() || !p.target.allFinite())
  {
    throw InvalidArgument("solveNnls: non-finite problem data");
  }
  if(p.columnWeights.size() != 0)
  {
    if(p.columnWeights.size() != p.G.cols())
    {
      throw InvalidArgument("solveNnls: one column weight per column is required");
    }
    if(!p.columnWeights.allFinite() || (p.columnWeights.array() < 0.0).any())
    {
      throw InvalidArgument("solveNnls: column weights must be finite and non-negative");
    }
  }
}

double kktScale(const NnlsProblem & p)
{
  return 1.0 + (p.G.transpose() * p.target).cwiseAbs().maxCoeff();
}

} // namespace

double nnlsKktViolation(const NnlsProblem & problem, const Eigen::VectorXd & lambda)
{
  Eigen::VectorXd grad = 2.0 * problem.G.transpose() * (problem.G * lambda - problem.target);
  if(problem.columnWeights.size() != 0)
  {
    grad += 2.0 * problem.columnWeights.cwiseProduct(lambda);
  }
  double worst = 0.0;
  for(Eigen::Index i = 0; i < lambda.size(); ++i)
  {
    const double v = lambda[i] > 0.0 ? std::abs(grad[i]) : std::max(0.0, -grad[i]);
    worst = std::max(worst, v);
  }
  return worst / kktScale(problem);
}

NnlsSolution solveNnls(const NnlsProblem & problem, const NnlsOptions & options)
{
  checkProblem(problem);
  const Eigen::Index n = problem.G.cols();
  const bool regularized = problem.columnWeights.size() != 0 && (problem.columnWeights.array() > 0.0).any();

  // Tikhonov weights are folded in as extra rows.
  Eigen::MatrixXd M;
  Eigen::VectorXd b;
  if(regularized)
  {
    M.resize(problem.G.rows() + n, n);
    M.topRows(problem.G.rows()) = problem.G;
    M.bottomRows(n) = problem.columnWeights.cwiseSqrt().asDiagonal();
    b = Eigen::VectorXd::Zero(M.rows());
    b.head(problem.G.rows()) = problem.target;
  }
  const Eigen::MatrixXd & A = regularized ? M : problem.G;
  const Eigen::VectorXd & y = regularized ? b : problem.target;

  const int maxIterations = options.maxIterations > 0 ? options.maxIterations : static_cast<int>(3 * n + 30);
  // Stop well inside the reported tolerance (gradient = -2 A'r).
  const double stopTol = 0.05 * kNnlsKktTolerance * kktScale(problem);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  std::vector<char> skipped(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> index;
  index.reserve(static_cast<std::size_t>(n));

  Eigen::MatrixXd sub;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);

  auto solveSubproblem = [&]() {
    index.clear();
    for(Eigen::Index j = 0; j < n; ++j)
    {
      if(passive[j])
      {
        index.push_back(j);
      }
    }
    sub.resize(A.rows(), static_cast<Eigen::Index>(index.size()));
    for(std::size_t k = 0; k < index.size(); ++k)
    {
      sub.col(static_cast<Eigen::Index>(k)) = A.col(index[k]);
    }
    const Eigen::VectorXd zp = sub.colPivHouseholderQr().solve(y);
    z.setZero();
    for(std::size_t k = 0; k < index.size(); ++k)
    {
      z[index[k]] = zp[static_cast<Eigen::Index>(k)];
    }
  };

  int iterations = 0;
  while(true)
  {
    const Eigen::VectorXd w = A.transpose() * (y - A * x);
    Eigen::Index t = -1;
    double best = stopTol;
    for(Eigen::Index j = 0; j < n; ++j)
    {
      if(!passive[j] && !skipped[j] && w[j] > best)
      {
        best = w[j];
        t = j;
      }
    }
    if(t < 0)
    {
      break;
    }
    if(iterations >= maxIterations)
    {
      throw IterationLimit("solveNnls: iteration limit reached with " + std::to_string(n) + " columns", iterations,
                           nnlsKktViolation(problem, x));
    }

    passive[t] = 1;
    bool first = true;
    bool moved = false;
    while(true)
    {
      ++iterations;
      solveSubproblem();
      if(first && !(z[t] > 0.0))
      {
        // Rounding made the entering column useless; ignore it until x changes.
        passive[t] = 0;
        skipped[t] = 1;
        break;
      }
      first = false;
      bool feasible = true;
      for(Eigen::Index j : index)
      {
        if(!(z[j] > 0.0))
        {
          feasible = false;
          break;
        }
      }
      if(feasible)
      {
        x = z;
        moved = true;
        break;
      }
      double alpha = 1.0;
      for(Eigen::Index j : index)
      {
        if(!(z[j] > 0.0))
        {
          alpha = std::min(alpha, x[j] / (x[j] - z[j]));
        }
      }
      x += alpha * (z - x);
      moved = true;
      const double floor = 1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff());
      for(Eigen::Index j : index)
      {
        if(x[j] <= floor)
        {
          x[j] = 0.0;
          passive[j] = 0;
        }
      }
      if(iterations >= maxIterations)
      {
        throw IterationLimit("solveNnls: iteration limit reached inside the active-set update", iterations,
                             nnlsKktViolation(problem, x.cwiseMax(0.0)));
      }
    }
    if(moved)
    {
      std::fill(skipped.begin(), skipped.end(), 0);
    }
  }

  NnlsSolution out;
  out.lambda = x.cwiseMax(0.0);
  out.residual = problem.G * out.lambda - problem.target;
  out.kktViolation = nnlsKktViolation(problem, out.lambda);
  out.iterations = iterations;
  return out;
}

Eigen::VectorXd minimumNormCombination(const Eigen::MatrixXd & G,
                                       const Eigen::VectorXd & achieved,
                                       const Eigen::VectorXd & fallback)
{
  // Dual of min 1/2 |l|^2 s.t. G l = a, l >= 0:  min_v 1/2 |(G'v)+|^2 - v'a, with l = (G'v)+.
  const Eigen::Index m = G.rows();
  auto dual = [&](const Eigen::VectorXd & v) {
    return 0.5 * (G.transpose() * v).cwiseMax(0.0).squaredNorm() - v.dot(achieved);
  };

  Eigen::VectorXd v = G.transpose().colPivHouseholderQr().solve(fallback);
  const double tol = 1e-11 * (1.0 + achieved.cwiseAbs().maxCoeff());
  const double damping = 1e-13 * (1.0 + G.squaredNorm());
  Eigen::MatrixXd H(m, m);

  for(int iter = 0; iter < 200; ++iter)
  {
    const Eigen::VectorXd s = G.transpose() * v;
    const Eigen::VectorXd lambda = s.cwiseMax(0.0);
    const Eigen::VectorXd grad = G * lambda - achieved;
    if(grad.cwiseAbs().maxCoeff() <= tol)
    {
      return lambda;
    }
    H = damping * Eigen::MatrixXd::Identity(m, m);
    for(Eigen::Index j = 0; j < G.cols(); ++j)
    {
      if(s[j] > 0.0)
      {
        H.noalias() += G.col(j) * G.col(j).transpose();
      }
    }
    const Eigen::VectorXd step = -H.ldlt().solve(grad);
    const double slope = grad.dot(step);
    if(!(slope < 0.0) || !step.allFinite())
    {
      break;
    }
    const double f0 = dual(v);
    double alpha = 1.0;
    bool accepted = false;
    for(int ls = 0; ls < 60; ++ls)
    {
      const Eigen::VectorXd trial = v + alpha * step;
      if(dual(trial) <= f0 + 1e-4 * alpha * slope)
      {
        v = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if(!accepted)
    {
      break;
    }
  }
  return fallback;
}

} // namespace cpc
