#pragma once

// Dirichlet solvers on finite weighted graphs.
//
// The operator keeps the stiffness formulation: on the interior (all vertices
// minus a ground set) Q has diagonal sum_{all y ~ x} b(x,y) and off-diagonal
// -b(x,y) for interior neighbors, so grounded edges stay on the diagonal.
// Q is a symmetric M-matrix; its Cholesky factors have nonpositive
// off-diagonals, which makes triangular solves with nonnegative right sides
// cancellation free. That property carries componentwise accuracy through
// graphs whose weights and measures span hundreds of orders of magnitude,
// where any absolute-error bound would be meaningless.
//
// Residual certificates are stated in the measure-free flux form
// sum_y b(x,y)(u(x) - u(y)) = m(x) rhs(x); dividing by tiny measures amplifies
// floating point noise without adding information.

#include <netpot/graph.hpp>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace netpot {

class DirichletOperator {
 public:
  DirichletOperator(FiniteWeightedGraph graph, std::vector<VertexId> ground)
      : graph_(std::move(graph)) {
    const auto n = static_cast<std::int32_t>(graph_.size());
    std::vector<bool> grounded(static_cast<std::size_t>(n), false);
    for (const auto& id : ground) {
      grounded[static_cast<std::size_t>(graph_.require_index(id))] = true;
    }
    interior_pos_.assign(static_cast<std::size_t>(n), -1);
    for (std::int32_t i = 0; i < n; ++i) {
      if (grounded[static_cast<std::size_t>(i)]) continue;
      interior_pos_[static_cast<std::size_t>(i)] =
          static_cast<std::int32_t>(interior_.size());
      interior_.push_back(i);
    }
    build_stiffness();
  }

  const FiniteWeightedGraph& graph() const { return graph_; }
  const std::vector<std::int32_t>& interior() const { return interior_; }
  std::size_t interior_size() const { return interior_.size(); }
  bool is_ground(std::int32_t graph_index) const {
    return interior_pos_[static_cast<std::size_t>(graph_index)] < 0;
  }
  std::int32_t interior_position(std::int32_t graph_index) const {
    return interior_pos_[static_cast<std::size_t>(graph_index)];
  }
  std::size_t ground_size() const { return graph_.size() - interior_.size(); }

  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  Eigen::VectorXd interior_measures() const {
    Eigen::VectorXd m(static_cast<Eigen::Index>(interior_.size()));
    for (std::size_t i = 0; i < interior_.size(); ++i)
      m[static_cast<Eigen::Index>(i)] = graph_.measure(interior_[i]);
    return m;
  }

  // Structural solvability: every connected component of the graph must
  // contain a ground vertex, otherwise the stiffness block for that
  // component is singular (constants on the component are in its kernel).
  void require_grounded() const {
    auto [count, labels] = connected_components(graph_);
    std::vector<bool> has_ground(static_cast<std::size_t>(count), false);
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(graph_.size()); ++i)
      if (is_ground(i)) has_ground[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] = true;
    for (int c = 0; c < count; ++c) {
      if (!has_ground[static_cast<std::size_t>(c)]) {
        throw std::invalid_argument(
            "operator is singular: a connected component has no ground "
            "vertex");
      }
    }
  }

 private:
  void build_stiffness() {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t pos = 0; pos < interior_.size(); ++pos) {
      const auto x = interior_[pos];
      double diag = 0.0;
      for (const auto& nb : graph_.neighbors(x)) {
        diag += nb.weight;
        const auto ypos = interior_pos_[static_cast<std::size_t>(nb.index)];
        if (ypos >= 0) {
          triplets.emplace_back(static_cast<int>(pos), ypos, -nb.weight);
        }
      }
      triplets.emplace_back(static_cast<int>(pos), static_cast<int>(pos), diag);
    }
    stiffness_.resize(static_cast<Eigen::Index>(interior_.size()),
                      static_cast<Eigen::Index>(interior_.size()));
    stiffness_.setFromTriplets(triplets.begin(), triplets.end());
  }

  FiniteWeightedGraph graph_;
  std::vector<std::int32_t> interior_;
  std::vector<std::int32_t> interior_pos_;
  Eigen::SparseMatrix<double> stiffness_;
};

struct SolveOptions {
  enum class Method { Auto, Direct, ConjugateGradient };
  Method method = Method::Auto;
  double cg_tolerance = 1e-12;
  int max_iterations = 0;  // 0: 50 * interior size
  // per-vertex flux certificate threshold, relative to local flux magnitude
  double certificate_tol = 1e-9;
};

struct Solution {
  VertexFunction values;    // full graph, zero on ground vertices
  double flux_certificate;  // worst relative flux defect over the interior
  double residual_m_norm;   // ||L u - rhs||_m / max(||rhs||_m, tiny)
  int iterations;           // 0 for the direct path
};

// Solve L u = rhs on the interior with u = 0 on the ground set.
// rhs is a function on the whole graph; its ground values are ignored.
inline Solution solve(const DirichletOperator& op, const VertexFunction& rhs,
                      const SolveOptions& options = {}) {
  if (!rhs.graph.same_rep(op.graph()))
    throw std::invalid_argument("rhs lives on a different graph");
  op.require_grounded();
  const auto n = static_cast<Eigen::Index>(op.interior_size());
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < op.interior_size(); ++i) {
    const auto x = op.interior()[i];
    b[static_cast<Eigen::Index>(i)] = rhs[x] * op.graph().measure(x);
  }

  Eigen::VectorXd u(n);
  int iterations = 0;
  auto method = options.method;
  if (method == SolveOptions::Method::Auto)
    method = SolveOptions::Method::Direct;
  if (method == SolveOptions::Method::Direct) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(op.stiffness());
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("stiffness factorization failed");
    u = llt.solve(b);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        cg;
    cg.setTolerance(options.cg_tolerance);
    cg.setMaxIterations(options.max_iterations > 0
                            ? options.max_iterations
                            : 50 * static_cast<int>(op.interior_size()));
    cg.compute(op.stiffness());
    u = cg.solve(b);
    iterations = static_cast<int>(cg.iterations());
  }

  Solution out;
  out.values = VertexFunction(op.graph());
  for (std::size_t i = 0; i < op.interior_size(); ++i)
    out.values[op.interior()[i]] = u[static_cast<Eigen::Index>(i)];
  out.iterations = iterations;

  // flux certificate: sum_y b(x,y)(u(x)-u(y)) must match m(x) rhs(x) at every
  // interior vertex, relative to the size of the terms entering the balance
  double worst = 0.0;
  double m_num = 0.0, m_den = 0.0;
  for (std::size_t i = 0; i < op.interior_size(); ++i) {
    const auto x = op.interior()[i];
    double flux = 0.0;
    double scale = std::abs(b[static_cast<Eigen::Index>(i)]);
    for (const auto& nb : op.graph().neighbors(x)) {
      flux += nb.weight * (out.values[x] - out.values[nb.index]);
      scale += nb.weight * (std::abs(out.values[x]) + std::abs(out.values[nb.index]));
    }
    const double defect = std::abs(flux - b[static_cast<Eigen::Index>(i)]);
    if (scale > 0.0) worst = std::max(worst, defect / scale);
    else if (defect > 0.0) worst = std::max(worst, 1.0);
    const double lr = flux / op.graph().measure(x) - rhs[x];
    m_num += lr * lr * op.graph().measure(x);
    m_den += rhs[x] * rhs[x] * op.graph().measure(x);
  }
  out.flux_certificate = worst;
  out.residual_m_norm =
      std::sqrt(m_num) / std::max(std::sqrt(m_den), 1e-300);
  if (worst > options.certificate_tol) {
    throw std::runtime_error(
        "solve failed its flux certificate: worst relative defect " +
        std::to_string(worst));
  }
  return out;
}

// Harmonic extension of prescribed boundary values: u equals the given value
// on each listed vertex and satisfies L u = 0 on the rest. The stiffness
// right side sum_{y in boundary} b(x,y) value(y) is sign-definite whenever the
// boundary values are, keeping the solve cancellation free.
inline Solution solve_boundary(
    const FiniteWeightedGraph& g,
    const std::vector<std::pair<VertexId, double>>& boundary,
    const SolveOptions& options = {}) {
  std::vector<VertexId> ground;
  ground.reserve(boundary.size());
  for (const auto& [id, value] : boundary) ground.push_back(id);
  DirichletOperator op(g, ground);
  op.require_grounded();

  VertexFunction fixed(g);
  for (const auto& [id, value] : boundary) fixed.at(id) = value;

  const auto n = static_cast<Eigen::Index>(op.interior_size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < op.interior_size(); ++i) {
    const auto x = op.interior()[i];
    for (const auto& nb : g.neighbors(x))
      if (op.is_ground(nb.index))
        b[static_cast<Eigen::Index>(i)] += nb.weight * fixed[nb.index];
  }

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(op.stiffness());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("stiffness factorization failed");
  const Eigen::VectorXd u = llt.solve(b);

  Solution out;
  out.values = fixed;
  for (std::size_t i = 0; i < op.interior_size(); ++i)
    out.values[op.interior()[i]] = u[static_cast<Eigen::Index>(i)];
  out.iterations = 0;
  out.residual_m_norm = 0.0;

  double worst = 0.0;
  for (std::size_t i = 0; i < op.interior_size(); ++i) {
    const auto x = op.interior()[i];
    double flux = 0.0;
    double scale = 0.0;
    for (const auto& nb : g.neighbors(x)) {
      flux += nb.weight * (out.values[x] - out.values[nb.index]);
      scale +=
          nb.weight * (std::abs(out.values[x]) + std::abs(out.values[nb.index]));
    }
    if (scale > 0.0) worst = std::max(worst, std::abs(flux) / scale);
    else if (std::abs(flux) > 0.0) worst = std::max(worst, 1.0);
  }
  out.flux_certificate = worst;
  if (worst > options.certificate_tol) {
    throw std::runtime_error(
        "boundary solve failed its flux certificate: worst relative defect " +
        std::to_string(worst));
  }
  return out;
}

struct EigenOptions {
  double rtol = 1e-13;
  int max_iterations = 2000;
};

struct EigenPair {
  double value;        // converged Rayleigh quotient, an upper bound for the
                       // bottom of the spectrum of the grounded operator
  double last_change;  // final Rayleigh update, a convergence indicator
  int iterations;
  VertexFunction vector;  // m-normalized, zero on ground vertices
};

// Bottom eigenvalue of the grounded operator via inverse power iteration.
// Each step solves Q v = M v_prev with the sparse Cholesky factor; since the
// iterates stay entrywise positive (the inverse of an M-matrix is
// nonnegative), every triangular solve is cancellation free and the Rayleigh
// quotient is assembled from positive energy sums. This path stays accurate
// where dense absolute-error eigensolvers lose the bottom eigenvalue
// entirely.
inline EigenPair smallest_eigenvalue(const DirichletOperator& op,
                                     const EigenOptions& options = {}) {
  op.require_grounded();
  if (op.interior_size() == 0)
    throw std::invalid_argument("operator has no interior vertices");
  const auto n = static_cast<Eigen::Index>(op.interior_size());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(op.stiffness());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("stiffness factorization failed");
  const Eigen::VectorXd m = op.interior_measures();

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  auto m_norm = [&](const Eigen::VectorXd& x) {
    return std::sqrt((x.array().square() * m.array()).sum());
  };
  v /= m_norm(v);

  // Rayleigh quotient via the energy form: interior edges plus grounded
  // coupling, all terms nonnegative.
  auto rayleigh = [&](const Eigen::VectorXd& x) {
    double q = 0.0;
    for (const auto& e : op.graph().edges()) {
      const auto pu = op.interior_position(e.u);
      const auto pv = op.interior_position(e.v);
      if (pu >= 0 && pv >= 0) {
        const double d = x[pu] - x[pv];
        q += e.weight * d * d;
      } else if (pu >= 0) {
        q += e.weight * x[pu] * x[pu];
      } else if (pv >= 0) {
        q += e.weight * x[pv] * x[pv];
      }
    }
    const double nm = m_norm(x);
    return q / (nm * nm);
  };

  double lambda = rayleigh(v);
  double change = lambda;
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    Eigen::VectorXd rhs = v.array() * m.array();
    Eigen::VectorXd next = llt.solve(rhs);
    next /= m_norm(next);
    const double nl = rayleigh(next);
    change = std::abs(lambda - nl);
    lambda = nl;
    v = next;
    if (change <= options.rtol * std::max(lambda, 1e-300)) break;
  }

  EigenPair out;
  out.value = lambda;
  out.last_change = change;
  out.iterations = it;
  out.vector = VertexFunction(op.graph());
  for (std::size_t i = 0; i < op.interior_size(); ++i)
    out.vector[op.interior()[i]] = v[static_cast<Eigen::Index>(i)];
  return out;
}

namespace detail {

// Dense eigendecomposition of the measure-symmetrized interior operator.
// Only valid for moderate sizes and moderate dynamic range.
struct DenseSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd vectors;      // columns, orthonormal
};

inline DenseSpectrum dense_spectrum(const DirichletOperator& op,
                                    std::size_t limit = 500) {
  if (op.interior_size() > limit)
    throw std::invalid_argument(
        "dense spectral path supports up to " + std::to_string(limit) +
        " interior vertices; this operator has " +
        std::to_string(op.interior_size()));
  const auto n = static_cast<Eigen::Index>(op.interior_size());
  const Eigen::VectorXd m = op.interior_measures();
  Eigen::MatrixXd a = Eigen::MatrixXd(op.stiffness());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) /= std::sqrt(m[i] * m[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace detail

// Smallest eigenvalue via the dense path, as an independent cross check for
// the iterative estimate on graphs with mild weights.
inline double smallest_eigenvalue_dense(const DirichletOperator& op) {
  op.require_grounded();
  return detail::dense_spectrum(op).eigenvalues[0];
}

// Ascending spectrum of the full (ungrounded) operator; entry 1 is the
// spectral gap of a connected graph.
inline std::vector<double> full_spectrum_dense(const FiniteWeightedGraph& g) {
  DirichletOperator op(g, {});
  auto spec = detail::dense_spectrum(op);
  return {spec.eigenvalues.data(), spec.eigenvalues.data() + spec.eigenvalues.size()};
}

// Integral of the heat semigroup against a point source over [0, T]:
// h = int_0^T e^{-tL} (delta_source / m(source)) dt, computed from the dense
// spectrum of the symmetrized operator. As T grows this converges to the
// grounded potential with unit source.
inline VertexFunction heat_integral(const DirichletOperator& op,
                                    const VertexId& source, double T) {
  if (!(T >= 0.0) || !std::isfinite(T))
    throw std::invalid_argument("heat integral needs a finite T >= 0");
  op.require_grounded();
  const auto src = op.graph().require_index(source);
  const auto spos = op.interior_position(src);
  if (spos < 0)
    throw std::invalid_argument("heat source must be an interior vertex");
  const auto spec = detail::dense_spectrum(op);
  const Eigen::VectorXd m = op.interior_measures();
  const auto n = static_cast<Eigen::Index>(op.interior_size());

  Eigen::VectorXd coeffs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = spec.eigenvalues[i];
    if (lam <= 0.0)
      throw std::runtime_error(
          "heat integral hit a nonpositive eigenvalue; the grounded operator "
          "must be positive definite");
    coeffs[i] = (1.0 - std::exp(-lam * T)) / lam * spec.vectors(spos, i) /
                std::sqrt(m[spos]);
  }
  Eigen::VectorXd h = spec.vectors * coeffs;
  VertexFunction out(op.graph());
  for (std::size_t i = 0; i < op.interior_size(); ++i)
    out[op.interior()[i]] =
        h[static_cast<Eigen::Index>(i)] / std::sqrt(m[static_cast<Eigen::Index>(i)]);
  return out;
}

}  // namespace netpot
