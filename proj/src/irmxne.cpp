#include "bsmx/irmxne.hpp"

#include <cmath>
#include <ostream>

#include "bsmx/io.hpp"

namespace bsmx {

namespace {

// max_ij |A_ij - B_ij| over the densified matrices, without densifying.
double max_abs_difference(const BlockSparseEstimate& a, const BlockSparseEstimate& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Matrix* other = b.find(a.active_set()[i]);
    const double d = other ? (a.blocks()[i] - *other).cwiseAbs().maxCoeff()
                           : a.blocks()[i].cwiseAbs().maxCoeff();
    out = std::max(out, d);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!a.find(b.active_set()[i])) out = std::max(out, b.blocks()[i].cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace

double nonconvex_objective(const Measurements& M, const BlockDesign& G,
                           const BlockSparseEstimate& est, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  double penalty = 0.0;
  for (const auto& b : est.blocks()) penalty += std::sqrt(b.norm());
  return 0.5 * residual(M, G, est).squaredNorm() + lambda * penalty;
}

Vector compute_weights(const BlockSparseEstimate& prev) {
  Vector w = Vector::Zero(prev.n_locations());
  for (std::size_t i = 0; i < prev.size(); ++i) {
    w[prev.active_set()[i]] = 2.0 * std::sqrt(prev.blocks()[i].norm());
  }
  return w;
}

void ReweightState::write_json(std::ostream& os) const {
  nlohmann::json doc;
  doc["iterations"] = iterations;
  doc["converged"] = converged;
  doc["objective_trace"] = objective_trace;
  nlohmann::json ws = nlohmann::json::array();
  for (const auto& w : weights) ws.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  doc["weights"] = std::move(ws);
  os << doc.dump(1) << '\n';
}

ReweightResult solve_irmxne(const Measurements& M, const BlockDesign& G, const SolverConfig& config) {
  config.validate();
  const double lmax = lambda_max(M, G);
  const double lambda = config.resolve_lambda(lmax);
  if (!(lambda > 0.0)) {
    // M is orthogonal to every block (lambda_max = 0): X = 0 is optimal.
    ReweightResult out{BlockSparseEstimate(G.n_locations(), G.n_orient(), M.n_times()), {}, {}, {}, 0.0};
    out.state.weights.push_back(Vector::Ones(G.n_locations()));
    out.state.iterations = 1;
    out.state.objective_trace.push_back(0.5 * M.entries().squaredNorm());
    out.state.converged = true;
    out.iterates.push_back(out.estimate);
    return out;
  }
  return solve_irmxne(M, G, lambda, config);
}

ReweightResult solve_irmxne(const Measurements& M, const BlockDesign& G, double lambda,
                            const SolverConfig& config) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  check_dimensions(M, G);
  const Index S = G.n_locations();
  const Index O = G.n_orient();
  const Index T = M.n_times();

  ReweightResult out{BlockSparseEstimate(S, O, T), {}, {}, {}, lambda};
  Vector w = Vector::Ones(S);
  std::optional<BlockSparseEstimate> previous;

  for (int k = 1; k <= config.max_reweight; ++k) {
    out.state.weights.push_back(w);

    std::vector<Index> candidates;
    std::vector<double> factors;
    for (Index s = 0; s < S; ++s) {
      if (w[s] > 0.0) {
        candidates.push_back(s);
        factors.push_back(w[s]);
      }
    }
    const BlockDesign Gk = G.restrict_to(candidates).scaled(factors);
    const auto n_cand = static_cast<Index>(candidates.size());

    // Warm start in the rescaled coordinates: X~_s = X^_s / w[s].
    std::optional<BlockSparseEstimate> warm;
    if (previous) {
      std::vector<Index> locs;
      std::vector<Matrix> blocks;
      for (Index c = 0; c < n_cand; ++c) {
        if (const Matrix* b = previous->find(candidates[static_cast<std::size_t>(c)])) {
          locs.push_back(c);
          blocks.push_back(*b / factors[static_cast<std::size_t>(c)]);
        }
      }
      warm = BlockSparseEstimate::from_blocks(n_cand, O, T, std::move(locs), std::move(blocks));
    }

    BlockSparseEstimate current(S, O, T);
    if (n_cand > 0) {
      SolveResult sub = solve_active_set(M, Gk, warm, lambda, config);
      out.trace.append(sub.trace);
      std::vector<Index> locs;
      std::vector<Matrix> blocks;
      for (std::size_t i = 0; i < sub.estimate.size(); ++i) {
        const auto c = static_cast<std::size_t>(sub.estimate.active_set()[i]);
        locs.push_back(candidates[c]);
        blocks.push_back(sub.estimate.blocks()[i] * factors[c]);
      }
      current = BlockSparseEstimate::from_blocks(S, O, T, std::move(locs), std::move(blocks));
    }

    out.state.iterations = k;
    out.state.objective_trace.push_back(nonconvex_objective(M, G, current, lambda));
    out.iterates.push_back(current);

    const bool stop = previous && max_abs_difference(current, *previous) < config.reweight_tol;
    previous = std::move(current);
    if (stop) {
      out.state.converged = true;
      break;
    }
    w = compute_weights(*previous);
  }

  out.estimate = *previous;
  return out;
}

Method parse_method(const std::string& name) {
  if (name == "mxne") return Method::mxne;
  if (name == "irmxne") return Method::irmxne;
  throw InvalidArgument("unknown method '" + name + "' (expected mxne or irmxne)");
}

std::string to_string(Method method) { return method == Method::mxne ? "mxne" : "irmxne"; }

ReweightResult solve_method(Method method, const Measurements& M, const BlockDesign& G,
                            const SolverConfig& config) {
  if (method == Method::irmxne) return solve_irmxne(M, G, config);
  SolverConfig single = config;
  single.max_reweight = 1;
  ReweightResult out = solve_irmxne(M, G, single);
  out.state.converged = true;
  return out;
}

}  // namespace bsmx
