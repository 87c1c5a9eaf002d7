#include "normip/polytopes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "normip/detail/simplex.hpp"

namespace normip {
namespace {

constexpr double kTol = 1e-9;

std::size_t common_dim(const std::vector<Vector>& vs, const char* what) {
  if (vs.empty()) throw PreconditionError(std::string(what) + ": empty list");
  const std::size_t n = vs.front().size();
  if (n == 0) throw PreconditionError(std::string(what) + ": zero dimension");
  for (const auto& v : vs) {
    if (v.size() != n) throw PreconditionError(std::string(what) + ": inconsistent dimensions");
    require_finite(v, what);
  }
  return n;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool contains_negation(const std::vector<Vector>& vs, const Vector& v) {
  for (const auto& u : vs) {
    bool neg = true;
    for (std::size_t i = 0; i < v.size() && neg; ++i) neg = std::abs(u[i] + v[i]) <= kTol;
    if (neg) return true;
  }
  return false;
}

// One representative per +-pair; exact zero vectors dropped.
std::vector<Vector> pair_representatives(const std::vector<Vector>& vs) {
  std::vector<Vector> out;
  for (const auto& v : vs) {
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) continue;
    bool seen = false;
    for (const auto& u : out) {
      if (max_abs_diff(u, v) <= kTol || max_abs_diff(u, scaled(v, -1.0)) <= kTol) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(v);
  }
  return out;
}

double hrep_gauge(const std::vector<Vector>& rows, std::span<const double> x) {
  double m = 0.0;
  for (const auto& a : rows) m = std::max(m, std::abs(dot(a, x)));
  return m;
}

double vrep_gauge(const std::vector<Vector>& verts, std::span<const double> x) {
  const auto n = static_cast<long>(x.size());
  const auto m = static_cast<long>(verts.size());
  if (std::all_of(x.begin(), x.end(), [](double t) { return t == 0.0; })) return 0.0;
  Eigen::MatrixXd A(n, m);
  for (long j = 0; j < m; ++j)
    for (long i = 0; i < n; ++i) A(i, j) = verts[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  const auto res = lp::minimize(A, b, Eigen::VectorXd::Ones(m));
  if (res.status == lp::Status::infeasible) throw std::domain_error("gauge_norm: point outside the span of the vertices");
  if (res.status != lp::Status::optimal) throw std::runtime_error("gauge_norm: LP did not converge");
  return res.objective;
}

Eigen::MatrixXd rows_matrix(const std::vector<Vector>& rows) {
  Eigen::MatrixXd A(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) A(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  return A;
}

}  // namespace

Polytope Polytope::from_hrep(std::vector<Vector> rows) {
  Polytope p;
  p.dim_ = common_dim(rows, "Polytope hrep");
  p.hrep_ = std::move(rows);
  p.has_hrep_ = true;
  return p;
}

Polytope Polytope::from_hrep(std::vector<Vector> rows, std::span<const double> rhs) {
  if (rhs.size() != rows.size()) throw PreconditionError("Polytope hrep: rhs length mismatch");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rhs[i] > 0.0)) throw PreconditionError("Polytope hrep: right-hand sides must be positive");
    rows[i] = scaled(rows[i], 1.0 / rhs[i]);
  }
  return from_hrep(std::move(rows));
}

Polytope Polytope::from_vrep(std::vector<Vector> vertices) {
  Polytope p;
  p.dim_ = common_dim(vertices, "Polytope vrep");
  for (const auto& v : vertices)
    if (!contains_negation(vertices, v)) throw PreconditionError("Polytope vrep: vertex list is not closed under negation");
  p.vrep_ = std::move(vertices);
  p.has_vrep_ = true;
  return p;
}

Polytope Polytope::from_both(std::vector<Vector> rows, std::vector<Vector> vertices) {
  Polytope p = from_hrep(std::move(rows));
  const Polytope q = from_vrep(std::move(vertices));
  if (q.dim_ != p.dim_) throw PreconditionError("Polytope: representations differ in dimension");
  const Eigen::MatrixXd A = rows_matrix(p.hrep_);
  for (const auto& v : q.vrep_) {
    const Eigen::VectorXd ax = A * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
    if (ax.cwiseAbs().maxCoeff() > 1.0 + kTol) throw PreconditionError("Polytope: a vertex violates an inequality");
    // A vertex makes n linearly independent inequalities tight.
    std::vector<Vector> tight;
    for (long i = 0; i < ax.size(); ++i)
      if (std::abs(std::abs(ax(i)) - 1.0) <= kTol) tight.push_back(p.hrep_[static_cast<std::size_t>(i)]);
    if (tight.empty() || rows_matrix(tight).fullPivLu().rank() < static_cast<long>(p.dim_))
      throw PreconditionError("Polytope: listed point is not a vertex of the inequality description");
  }
  Rng rng(0x5eed);
  for (int t = 0; t < 32; ++t) {
    Vector x(p.dim_);
    for (auto& xi : x) xi = standard_normal(rng);
    const double gh = hrep_gauge(p.hrep_, x);
    const double gv = vrep_gauge(q.vrep_, x);
    if (std::abs(gh - gv) > kTol * std::max(1.0, gh))
      throw PreconditionError("Polytope: representations induce different gauges");
  }
  p.vrep_ = q.vrep_;
  p.has_vrep_ = true;
  return p;
}

Polytope Polytope::cube(std::size_t n) {
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(unit_vector(n, i));
  return from_hrep(std::move(rows));
}

Polytope Polytope::cross_polytope(std::size_t n) {
  std::vector<Vector> verts;
  for (std::size_t i = 0; i < n; ++i) {
    verts.push_back(unit_vector(n, i));
    verts.push_back(scaled(unit_vector(n, i), -1.0));
  }
  return from_vrep(std::move(verts));
}

Polytope Polytope::with_vertices() const {
  if (has_vrep_) return *this;
  Polytope p = *this;
  p.vrep_ = enumerate_vertices(*this);
  p.has_vrep_ = true;
  return p;
}

Polytope Polytope::with_inequalities() const {
  if (has_hrep_) return *this;
  Polytope p = *this;
  p.hrep_ = pair_representatives(enumerate_vertices(dual_polytope(*this)));
  p.has_hrep_ = true;
  return p;
}

double gauge_norm(const Polytope& P, std::span<const double> x) {
  if (x.size() != P.dim()) throw PreconditionError("gauge_norm: dimension mismatch");
  require_finite(x, "gauge_norm input");
  if (P.has_hrep()) return hrep_gauge(P.hrep(), x);
  return vrep_gauge(P.vrep(), x);
}

Polytope dual_polytope(const Polytope& P) {
  Polytope d;
  d.dim_ = P.dim_;
  if (P.has_hrep_) {
    for (const auto& a : P.hrep_) {
      d.vrep_.push_back(a);
      d.vrep_.push_back(scaled(a, -1.0));
    }
    d.has_vrep_ = true;
  }
  if (P.has_vrep_) {
    d.hrep_ = pair_representatives(P.vrep_);
    d.has_hrep_ = true;
  }
  return d;
}

std::vector<Vector> enumerate_vertices(const Polytope& P) {
  if (!P.has_hrep()) throw PreconditionError("enumerate_vertices: inequality description required");
  const std::size_t n = P.dim();
  if (n > 8) throw PreconditionError("enumerate_vertices: dimension above 8");
  const auto& rows = P.hrep();
  const Eigen::MatrixXd A = rows_matrix(rows);
  if (A.fullPivLu().rank() < static_cast<long>(n)) throw PreconditionError("enumerate_vertices: polytope is unbounded");
  const std::size_t m = rows.size();

  // Every vertex solves A_S x = sigma for some n-subset S of rows and signs.
  std::vector<Vector> out;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t visited = 0;
  while (true) {
    Eigen::MatrixXd As(static_cast<long>(n), static_cast<long>(n));
    for (std::size_t r = 0; r < n; ++r) As.row(static_cast<long>(r)) = A.row(static_cast<long>(idx[r]));
    const auto lu = As.fullPivLu();
    if (lu.rank() == static_cast<long>(n)) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        if (++visited > 50'000'000) throw PreconditionError("enumerate_vertices: enumeration too large");
        Eigen::VectorXd s(static_cast<long>(n));
        for (std::size_t r = 0; r < n; ++r) s(static_cast<long>(r)) = (mask >> r) & 1U ? -1.0 : 1.0;
        const Eigen::VectorXd x = lu.solve(s);
        if ((A * x).cwiseAbs().maxCoeff() > 1.0 + kTol) continue;
        Vector v(x.data(), x.data() + x.size());
        bool dup = false;
        for (const auto& u : out) {
          if (max_abs_diff(u, v) <= kTol) {
            dup = true;
            break;
          }
        }
        if (!dup) out.push_back(std::move(v));
      }
    }
    // Next combination in lexicographic order.
    std::size_t k = n;
    while (k > 0 && idx[k - 1] == m - n + k - 1) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t r = k; r < n; ++r) idx[r] = idx[r - 1] + 1;
  }
  return out;
}

std::string SlackMatrix::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "vertex";
  for (std::size_t c = 0; c < cols; ++c) os << ",ineq_" << c;
  os << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    os << "v_" << r;
    for (std::size_t c = 0; c < cols; ++c) os << ',' << at(r, c);
    os << '\n';
  }
  return os.str();
}

SlackMatrix slack_matrix(const Polytope& P) {
  const Polytope full = P.with_vertices().with_inequalities();
  SlackMatrix S;
  S.rows = full.vrep().size();
  S.cols = full.hrep().size();
  S.entries.reserve(S.rows * S.cols);
  for (const auto& v : full.vrep()) {
    for (const auto& a : full.hrep()) {
      double s = 1.0 - dot(a, v);
      if (s < -kTol || s > 2.0 + kTol) throw PreconditionError("slack_matrix: vertex outside the inequality description");
      S.entries.push_back(std::clamp(s, 0.0, 2.0));
    }
  }
  return S;
}

ConvexCombination convex_decompose(const Polytope& P, std::span<const double> v) {
  if (v.size() != P.dim()) throw PreconditionError("convex_decompose: dimension mismatch");
  require_finite(v, "convex_decompose input");
  const Polytope withv = P.with_vertices();
  const auto& verts = withv.vrep();
  for (std::size_t j = 0; j < verts.size(); ++j)
    if (max_abs_diff(verts[j], v) <= 1e-12) return {{{j, 1.0}}};

  const auto n = static_cast<long>(v.size());
  const auto m = static_cast<long>(verts.size());
  Eigen::MatrixXd A(n + 1, m);
  for (long j = 0; j < m; ++j) {
    for (long i = 0; i < n; ++i) A(i, j) = verts[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    A(n, j) = 1.0;
  }
  Eigen::VectorXd b(n + 1);
  for (long i = 0; i < n; ++i) b(i) = v[static_cast<std::size_t>(i)];
  b(n) = 1.0;
  // A basic feasible point of this system has at most n+1 nonzeros.
  const auto res = lp::minimize(A, b, Eigen::VectorXd::Zero(m));
  if (res.status != lp::Status::optimal) {
    double margin = 0.0;
    try {
      margin = gauge_norm(withv, v) - 1.0;
    } catch (const std::domain_error&) {
      margin = std::numeric_limits<double>::infinity();
    }
    throw InfeasibleError("convex_decompose: point lies outside the polytope", margin);
  }
  ConvexCombination c;
  for (long j = 0; j < m; ++j)
    if (res.x(j) > 0.0) c.weights.emplace_back(static_cast<std::size_t>(j), res.x(j));
  return c;
}

double decomposition_residual(const Polytope& P, const ConvexCombination& c, std::span<const double> v) {
  const Polytope withv = P.with_vertices();
  double worst = 0.0;
  double total = 0.0;
  Vector sum(v.size(), 0.0);
  for (const auto& [j, lambda] : c.weights) {
    worst = std::max(worst, -lambda);
    total += lambda;
    const auto& vert = withv.vrep().at(j);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += lambda * vert[i];
  }
  worst = std::max(worst, std::abs(total - 1.0));
  return std::max(worst, max_abs_diff(sum, v));
}

std::size_t vertex_sample_count(double eps, double constant) {
  if (!(eps > 0.0)) throw PreconditionError("vertex_sample_count: eps must be positive");
  return static_cast<std::size_t>(std::ceil(constant / (eps * eps)));
}

ProtocolOutcome vertex_sampling_protocol(const Polytope& P, const ConvexCombination& decomposition,
                                         std::span<const double> w, double eps, Rng& rng, double constant) {
  const Polytope withv = P.with_vertices();
  const auto& verts = withv.vrep();
  if (w.size() != P.dim()) throw PreconditionError("vertex_sampling_protocol: dimension mismatch");
  if (hrep_gauge(verts, w) > 1.0 + kTol) throw PreconditionError("vertex_sampling_protocol: w outside the dual ball");
  if (decomposition.weights.empty()) throw PreconditionError("vertex_sampling_protocol: empty decomposition");

  std::vector<double> cdf;
  cdf.reserve(decomposition.weights.size());
  double acc = 0.0;
  for (const auto& [j, lambda] : decomposition.weights) cdf.push_back(acc += std::max(lambda, 0.0));

  const std::size_t t = vertex_sample_count(eps, constant);
  const unsigned id_bits = bits_for(verts.size());
  BitWriter bw;
  double sum = 0.0;
  for (std::size_t s = 0; s < t; ++s) {
    const std::size_t id = decomposition.weights[sample_from_cdf(cdf, rng)].first;
    bw.write(id, id_bits);
    sum += dot(verts[id], w);
  }
  ProtocolOutcome out;
  out.estimate = sum / static_cast<double>(t);
  out.transcript.append(Message{Party::alice, bw.take(), t * id_bits, "vertex-ids"});
  out.output_party = Party::bob;
  out.sparsity = t;
  out.trace.emplace_back("samples", static_cast<double>(t));
  out.trace.emplace_back("support", static_cast<double>(decomposition.weights.size()));
  return out;
}

ProtocolOutcome vertex_sampling_protocol(const Polytope& P, std::span<const double> v, std::span<const double> w,
                                         double eps, Rng& rng, double constant) {
  const Polytope withv = P.with_vertices();
  return vertex_sampling_protocol(withv, convex_decompose(withv, v), w, eps, rng, constant);
}

std::size_t slack_repetitions(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("slack_repetitions: eps must lie in (0,1)");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(4.0 * std::log2(1.0 / eps))));
}

SlackEstimate slack_in_expectation(const Polytope& P, std::size_t vertex, std::size_t inequality, double eps,
                                   Rng& rng, const InnerProductRunner& runner) {
  const Polytope full = P.with_vertices().with_inequalities();
  if (vertex >= full.vrep().size() || inequality >= full.hrep().size())
    throw PreconditionError("slack_in_expectation: index out of range");
  const Vector& v = full.vrep()[vertex];
  const Vector& a = full.hrep()[inequality];

  InnerProductRunner run = runner;
  if (!run) {
    // A vertex decomposes as itself; reuse that across repetitions.
    const ConvexCombination c = convex_decompose(full, v);
    run = [&full, c, eps](std::span<const double>, std::span<const double> w, Rng& r) {
      return vertex_sampling_protocol(full, c, w, eps, r);
    };
  }
  SlackEstimate est;
  est.repetitions = slack_repetitions(eps);
  std::vector<double> values;
  values.reserve(est.repetitions);
  for (std::size_t r = 0; r < est.repetitions; ++r) {
    const auto out = run(v, a, rng);
    values.push_back(out.estimate);
    est.bits += out.transcript.total_bits();
  }
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  est.median_inner_product = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
  est.value = std::clamp(1.0 - est.median_inner_product, 0.0, 2.0);
  return est;
}

}  // namespace normip
