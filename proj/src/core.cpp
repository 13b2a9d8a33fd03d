#include "bsmx/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bsmx {

namespace {

std::string shape(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace

BlockDesign::BlockDesign(Matrix entries, Index n_orient)
    : entries_(std::move(entries)), n_orient_(n_orient), n_locations_(0) {
  if (n_orient_ < 1) throw InvalidArgument("n_orient must be >= 1");
  if (entries_.cols() % n_orient_ != 0) {
    throw DimensionError("gain has " + std::to_string(entries_.cols()) +
                         " columns, not a multiple of n_orient=" + std::to_string(n_orient_));
  }
  if (!entries_.allFinite()) throw InvalidArgument("gain contains non-finite entries");
  n_locations_ = entries_.cols() / n_orient_;
}

BlockDesign BlockDesign::restrict_to(std::span<const Index> locations) const {
  Matrix out(n_sensors(), static_cast<Index>(locations.size()) * n_orient_);
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const Index s = locations[i];
    if (s < 0 || s >= n_locations_) throw InvalidArgument("location index out of range");
    out.middleCols(static_cast<Index>(i) * n_orient_, n_orient_) = block(s);
  }
  return BlockDesign(std::move(out), n_orient_);
}

BlockDesign BlockDesign::scaled(std::span<const double> factors) const {
  if (static_cast<Index>(factors.size()) != n_locations_) {
    throw DimensionError("expected " + std::to_string(n_locations_) + " block factors, got " +
                         std::to_string(factors.size()));
  }
  Matrix out = entries_;
  for (Index s = 0; s < n_locations_; ++s) out.middleCols(s * n_orient_, n_orient_) *= factors[s];
  return BlockDesign(std::move(out), n_orient_);
}

Measurements::Measurements(Matrix entries) : entries_(std::move(entries)) {
  if (!entries_.allFinite()) throw InvalidArgument("measurements contain non-finite entries");
}

BlockSparseEstimate::BlockSparseEstimate(Index n_locations, Index n_orient, Index n_times)
    : n_locations_(n_locations), n_orient_(n_orient), n_times_(n_times) {
  if (n_locations < 0 || n_orient < 1 || n_times < 1) {
    throw InvalidArgument("estimate dimensions must be positive");
  }
}

BlockSparseEstimate BlockSparseEstimate::from_blocks(Index n_locations, Index n_orient,
                                                     Index n_times, std::vector<Index> locations,
                                                     std::vector<Matrix> blocks) {
  BlockSparseEstimate est(n_locations, n_orient, n_times);
  if (locations.size() != blocks.size()) {
    throw InvalidArgument("location and block counts differ");
  }
  est.active_.reserve(locations.size());
  est.blocks_.reserve(blocks.size());
  Index previous = -1;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const Index s = locations[i];
    if (s < 0 || s >= n_locations) throw InvalidArgument("active location out of range");
    if (s <= previous) throw InvalidArgument("active set must be strictly increasing");
    previous = s;
    if (blocks[i].rows() != n_orient || blocks[i].cols() != n_times) {
      throw DimensionError("block for location " + std::to_string(s) + " is " +
                           shape(blocks[i].rows(), blocks[i].cols()) + ", expected " +
                           shape(n_orient, n_times));
    }
    if (!blocks[i].allFinite()) throw InvalidArgument("estimate block is not finite");
    if ((blocks[i].array() == 0.0).all()) continue;
    est.active_.push_back(s);
    est.blocks_.push_back(std::move(blocks[i]));
  }
  return est;
}

const Matrix* BlockSparseEstimate::find(Index s) const {
  auto it = std::lower_bound(active_.begin(), active_.end(), s);
  if (it == active_.end() || *it != s) return nullptr;
  return &blocks_[static_cast<std::size_t>(it - active_.begin())];
}

double BlockSparseEstimate::l21_norm() const {
  double total = 0.0;
  for (const auto& b : blocks_) total += b.norm();
  return total;
}

void SolverConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be > 0");
  if (!(gap_tol > 0.0)) throw InvalidArgument("gap_tol must be > 0");
  if (!(reweight_tol > 0.0)) throw InvalidArgument("reweight_tol must be > 0");
  if (max_reweight < 1) throw InvalidArgument("max_reweight must be >= 1");
  if (active_batch < 1) throw InvalidArgument("active_batch must be >= 1");
  if (max_bcd_iter < 1) throw InvalidArgument("max_bcd_iter must be >= 1");
}

double SolverConfig::resolve_lambda(double lambda_max) const {
  return lambda_is_relative ? lambda * lambda_max : lambda;
}

Matrix densify(const BlockSparseEstimate& est) {
  const Index O = est.n_orient();
  Matrix X = Matrix::Zero(est.n_locations() * O, est.n_times());
  for (std::size_t i = 0; i < est.size(); ++i) {
    X.middleRows(est.active_set()[i] * O, O) = est.blocks()[i];
  }
  return X;
}

BlockSparseEstimate sparsify(const Matrix& X, Index n_orient) {
  if (n_orient < 1 || X.rows() % n_orient != 0) {
    throw DimensionError("row count " + std::to_string(X.rows()) +
                         " is not a multiple of n_orient=" + std::to_string(n_orient));
  }
  const Index S = X.rows() / n_orient;
  std::vector<Index> locations;
  std::vector<Matrix> blocks;
  for (Index s = 0; s < S; ++s) {
    auto rows = X.middleRows(s * n_orient, n_orient);
    if ((rows.array() == 0.0).all()) continue;
    locations.push_back(s);
    blocks.emplace_back(rows);
  }
  return BlockSparseEstimate::from_blocks(S, n_orient, X.cols(), std::move(locations),
                                          std::move(blocks));
}

void check_dimensions(const Measurements& M, const BlockDesign& G) {
  if (M.n_sensors() != G.n_sensors()) {
    throw DimensionError("measurements have " + std::to_string(M.n_sensors()) +
                         " rows but the gain has " + std::to_string(G.n_sensors()));
  }
}

void check_dimensions(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est) {
  check_dimensions(M, G);
  if (est.n_locations() != G.n_locations() || est.n_orient() != G.n_orient() ||
      est.n_times() != M.n_times()) {
    throw DimensionError("estimate is S=" + std::to_string(est.n_locations()) +
                         ", O=" + std::to_string(est.n_orient()) +
                         ", T=" + std::to_string(est.n_times()) + "; problem is S=" +
                         std::to_string(G.n_locations()) + ", O=" + std::to_string(G.n_orient()) +
                         ", T=" + std::to_string(M.n_times()));
  }
}

Matrix predict(const BlockDesign& G, const BlockSparseEstimate& est) {
  if (est.n_locations() != G.n_locations() || est.n_orient() != G.n_orient()) {
    throw DimensionError("estimate does not match the gain block layout");
  }
  Matrix out = Matrix::Zero(G.n_sensors(), est.n_times());
  for (std::size_t i = 0; i < est.size(); ++i) {
    out.noalias() += G.block(est.active_set()[i]) * est.blocks()[i];
  }
  return out;
}

Matrix residual(const Measurements& M, const BlockDesign& G, const BlockSparseEstimate& est) {
  check_dimensions(M, G, est);
  Matrix R = M.entries();
  for (std::size_t i = 0; i < est.size(); ++i) {
    R.noalias() -= G.block(est.active_set()[i]) * est.blocks()[i];
  }
  return R;
}

}  // namespace bsmx
