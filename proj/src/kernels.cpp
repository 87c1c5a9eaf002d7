#include "normip/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>

namespace normip {
namespace {

template <class Row, class Body>
std::vector<Row> parallel_rows(std::size_t count, const Body& body) {
  std::vector<Row> rows(count);
  std::exception_ptr error;
  const auto total = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_limit())
  for (std::int64_t t = 0; t < total; ++t) {
    try {
      rows[static_cast<std::size_t>(t)] = body(static_cast<std::size_t>(t));
    } catch (...) {
#pragma omp critical(normip_trial_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

template <class Row, class Body>
std::vector<Row> serial_rows(std::size_t count, const Body& body) {
  std::vector<Row> rows(count);
  for (std::size_t t = 0; t < count; ++t) rows[t] = body(t);
  return rows;
}

}  // namespace

int thread_limit() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("NORMIP_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) n = std::min(n, cap);
    } catch (const std::exception&) {
    }
  }
  return std::max(n, 1);
}

std::vector<TrialResult> run_trials(std::size_t trials, std::uint64_t seed, std::uint64_t cell,
                                    const TrialFunction& trial) {
  return parallel_rows<TrialResult>(trials, [&](std::size_t t) {
    Rng rng = make_rng(substream_seed(seed, cell, t));
    return trial(t, rng);
  });
}

std::vector<TrialResult> run_trials_serial(std::size_t trials, std::uint64_t seed, std::uint64_t cell,
                                           const TrialFunction& trial) {
  return serial_rows<TrialResult>(trials, [&](std::size_t t) {
    Rng rng = make_rng(substream_seed(seed, cell, t));
    return trial(t, rng);
  });
}

std::vector<TrialResult> protocol_trials(const ProtocolSpec& spec, std::span<const double> v,
                                         std::span<const double> w, std::size_t trials, std::uint64_t seed,
                                         std::uint64_t cell, bool parallel) {
  const double truth = dot(v, w);
  const TrialFunction f = [&](std::size_t, Rng& rng) {
    const ProtocolOutcome out = run_protocol(spec, v, w, rng);
    return TrialResult{out.estimate, truth, out.transcript.total_bits(), out.sparsity};
  };
  return parallel ? run_trials(trials, seed, cell, f) : run_trials_serial(trials, seed, cell, f);
}

std::vector<SparseVector> sparsify_trials(const SparsifierSpec& spec, std::span<const double> v, std::size_t trials,
                                          std::uint64_t seed, std::uint64_t cell, bool parallel) {
  const auto body = [&](std::size_t t) {
    Rng rng = make_rng(substream_seed(seed, cell, t));
    return sparsify(v, spec, rng);
  };
  return parallel ? parallel_rows<SparseVector>(trials, body) : serial_rows<SparseVector>(trials, body);
}

std::vector<Vector> sparsifier_estimates(const SparsifierSpec& spec, std::span<const double> v,
                                         std::span<const Vector> ws, std::size_t trials, std::uint64_t seed,
                                         std::uint64_t cell, bool parallel) {
  const auto body = [&](std::size_t t) {
    Rng rng = make_rng(substream_seed(seed, cell, t));
    const SparseVector phi = sparsify(v, spec, rng);
    Vector row(ws.size());
    for (std::size_t j = 0; j < ws.size(); ++j) row[j] = phi.dot(ws[j]);
    return row;
  };
  return parallel ? parallel_rows<Vector>(trials, body) : serial_rows<Vector>(trials, body);
}

TrialSummary summarize(std::span<const TrialResult> results, double eps, double target_rate) {
  TrialSummary s;
  s.trials = results.size();
  if (results.empty()) return s;
  s.min_bits = results.front().bits;
  double err_sum = 0.0;
  double bit_sum = 0.0;
  for (const auto& r : results) {
    const double e = std::abs(r.estimate - r.truth);
    if (e <= eps) ++s.successes;
    err_sum += e;
    s.max_error = std::max(s.max_error, e);
    s.max_bits = std::max(s.max_bits, r.bits);
    s.min_bits = std::min(s.min_bits, r.bits);
    bit_sum += static_cast<double>(r.bits);
    s.max_sparsity = std::max(s.max_sparsity, r.sparsity);
  }
  const double n = static_cast<double>(s.trials);
  s.success_rate = static_cast<double>(s.successes) / n;
  s.standard_error = std::sqrt(target_rate * (1.0 - target_rate) / n);
  s.mean_error = err_sum / n;
  s.mean_bits = bit_sum / n;
  return s;
}

}  // namespace normip
