#include "oplab/model_spaces.hpp"

#include <cmath>
#include <sstream>

#include "oplab/errors.hpp"

namespace oplab {

namespace {

constexpr double kRootMatchTol = 1e-9;

std::vector<double> shift_weights(const SpaceKind& kind, Index m) {
  std::vector<double> w(static_cast<size_t>(m - 1));
  for (Index k = 0; k + 1 < m; ++k) {
    const double kk = static_cast<double>(k);
    double wk = 1.0;
    switch (kind.family) {
      case SpaceFamily::Hardy:
        wk = 1.0;
        break;
      case SpaceFamily::Bergman:
        wk = std::sqrt((kk + 1.0) / (kk + 2.0));
        break;
      case SpaceFamily::Dirichlet:
        wk = std::sqrt((kk + 2.0) / (kk + 1.0));
        break;
      case SpaceFamily::WeightedBergman:
        wk = std::sqrt(weighted_bergman_monomial_norm2(kind.alpha, static_cast<int>(k) + 1) /
                       weighted_bergman_monomial_norm2(kind.alpha, static_cast<int>(k)));
        break;
      case SpaceFamily::Custom:
        wk = kind.weights[static_cast<size_t>(k)];
        break;
    }
    w[static_cast<size_t>(k)] = wk;
  }
  return w;
}

}  // namespace

SpaceKind SpaceKind::weighted_bergman(int alpha) {
  if (alpha < 1) throw InputError("weighted Bergman space needs alpha >= 1");
  return {SpaceFamily::WeightedBergman, alpha, {}};
}

SpaceKind SpaceKind::custom(std::vector<double> weights) {
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InputError("custom weights must be positive");
  }
  return {SpaceFamily::Custom, 0, std::move(weights)};
}

std::string SpaceKind::name() const {
  switch (family) {
    case SpaceFamily::Hardy:
      return "hardy";
    case SpaceFamily::Bergman:
      return "bergman";
    case SpaceFamily::Dirichlet:
      return "dirichlet";
    case SpaceFamily::WeightedBergman:
      return "weighted_bergman(" + std::to_string(alpha) + ")";
    case SpaceFamily::Custom:
      return "custom";
  }
  return "unknown";
}

double weighted_bergman_monomial_norm2(int alpha, int k) {
  // binom(k + alpha - 1, k) built up incrementally to stay in floating point
  double binom = 1.0;
  for (int j = 1; j <= k; ++j) binom *= static_cast<double>(alpha - 1 + j) / j;
  return 1.0 / binom;
}

ShiftModel make_shift(const SpaceKind& kind, Index m) {
  if (m < 2) throw InputError("make_shift: truncation dimension must be >= 2");
  if (kind.family == SpaceFamily::WeightedBergman && kind.alpha < 1) {
    throw InputError("make_shift: weighted Bergman alpha must be >= 1");
  }
  if (kind.family == SpaceFamily::Custom) {
    if (static_cast<Index>(kind.weights.size()) != m - 1) {
      std::ostringstream msg;
      msg << "make_shift: custom model of dimension " << m << " needs " << m - 1
          << " weights, got " << kind.weights.size();
      throw InputError(msg.str());
    }
    for (double w : kind.weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InputError("make_shift: weights must be positive");
    }
  }
  ShiftModel model;
  model.kind = kind;
  model.m = m;
  model.weights = shift_weights(kind, m);
  Matrix t = Matrix::Zero(m, m);
  for (Index k = 0; k + 1 < m; ++k) t(k + 1, k) = model.weights[static_cast<size_t>(k)];
  model.op = Operator(std::move(t));
  return model;
}

KernelVector kernel_vector(const ShiftModel& model, Scalar lambda) {
  if (!(std::abs(lambda) < 1.0)) throw InputError("kernel_vector: need |lambda| < 1");
  const Index m = model.m;
  Vector v(m);
  v(0) = 1.0;
  for (Index k = 0; k + 1 < m; ++k) {
    v(k + 1) = std::conj(lambda) * v(k) / model.weights[static_cast<size_t>(k)];
  }
  v.normalize();
  Vector r = model.op.matrix().adjoint() * v - std::conj(lambda) * v;
  return {v, r.norm()};
}

Subspace prefix_coinvariant(const ShiftModel& model, Index k, double tol) {
  if (k <= 0 || k >= model.m) {
    std::ostringstream msg;
    msg << "prefix_coinvariant: need 0 < k < " << model.m << ", got " << k;
    throw InputError(msg.str());
  }
  Matrix basis = Matrix::Identity(model.m, k);
  return Subspace::from_orthonormal(std::move(basis), tol);
}

std::vector<Scalar> poly_from_roots(const std::vector<Root>& roots) {
  std::vector<Scalar> c{Scalar(1.0)};
  for (const Root& r : roots) {
    for (int rep = 0; rep < r.multiplicity; ++rep) {
      std::vector<Scalar> next(c.size() + 1, Scalar(0.0));
      for (size_t i = 0; i < c.size(); ++i) {
        next[i + 1] += c[i];
        next[i] -= r.value * c[i];
      }
      c = std::move(next);
    }
  }
  return c;
}

Scalar poly_eval(std::span<const Scalar> coefficients, Scalar z) {
  Scalar acc(0.0);
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * z + *it;
  return acc;
}

QuotientModel make_quotient(std::vector<Root> roots) {
  Index m = 0;
  for (const Root& r : roots) {
    if (r.multiplicity <= 0) throw InputError("make_quotient: multiplicities must be positive");
    if (!(std::abs(r.value) < 1.0)) throw InputError("make_quotient: roots must lie in |z| < 1");
    m += r.multiplicity;
  }
  if (m < 1) throw InputError("make_quotient: p must have positive degree");

  QuotientModel model;
  model.p_coefficients = poly_from_roots(roots);
  model.roots = std::move(roots);
  model.m = m;
  // companion matrix: z * z^k = z^{k+1}, z * z^{m-1} = -(p_0 + ... + p_{m-1} z^{m-1})
  Matrix t = Matrix::Zero(m, m);
  for (Index k = 0; k + 1 < m; ++k) t(k + 1, k) = 1.0;
  for (Index k = 0; k < m; ++k) t(k, m - 1) = -model.p_coefficients[static_cast<size_t>(k)];
  model.op = Operator(std::move(t));
  return model;
}

Subspace ideal_subspace(const QuotientModel& model, const std::vector<Root>& q_roots,
                        double tol) {
  // q must divide p: match each root of q against the remaining roots of p
  std::vector<Root> remaining = model.roots;
  Index deg_q = 0;
  for (const Root& qr : q_roots) {
    if (qr.multiplicity <= 0) throw InputError("ideal_subspace: multiplicities must be positive");
    bool matched = false;
    for (Root& pr : remaining) {
      if (std::abs(pr.value - qr.value) <= kRootMatchTol && pr.multiplicity >= qr.multiplicity) {
        pr.multiplicity -= qr.multiplicity;
        matched = true;
        break;
      }
    }
    if (!matched) throw InputError("ideal_subspace: q does not divide p");
    deg_q += qr.multiplicity;
  }
  if (deg_q >= model.m) throw InputError("ideal_subspace: q must be a proper divisor of p");

  const std::vector<Scalar> q = poly_from_roots(q_roots);
  const Index count = model.m - deg_q;
  Matrix cols = Matrix::Zero(model.m, count);
  for (Index j = 0; j < count; ++j) {
    for (Index i = 0; i <= deg_q; ++i) cols(i + j, j) = q[static_cast<size_t>(i)];
  }
  return orthonormalize(cols, tol);
}

double coinvariance_residual(const Operator& t, const Subspace& q) {
  if (q.is_zero()) return 0.0;
  const Matrix image = t.matrix().adjoint() * q.basis();
  const Matrix residual = image - q.basis() * (q.basis().adjoint() * image);
  return operator_norm(residual);
}

double invariance_residual(const Operator& t, const Subspace& s) {
  if (s.is_zero()) return 0.0;
  const Matrix image = t.matrix() * s.basis();
  const Matrix residual = image - s.basis() * (s.basis().adjoint() * image);
  return operator_norm(residual);
}

}  // namespace oplab
