#include "cbp/conv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbp/errors.hpp"

namespace cbp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void validate_probs(const std::vector<double>& probs) {
  if (probs.empty()) throw DomainError("convolution base law must not be empty");
  for (double p : probs)
    if (!(p >= 0.0) || p > 1.0 + 1e-12)
      throw DomainError("convolution base law entries must lie in [0, 1]");
}

}  // namespace

ConvPowers::ConvPowers(const std::vector<double>& probs, std::int64_t phi_max,
                       std::int64_t width) {
  validate_probs(probs);
  if (phi_max < 0) throw DomainError("phi_max must be nonnegative");
  if (width < 1) throw DomainError("width must be positive");
  s_max_ = static_cast<int>(probs.size()) - 1;
  width_ = width;
  rows_.reserve(static_cast<std::size_t>(phi_max) + 1);
  log_scale_.reserve(static_cast<std::size_t>(phi_max) + 1);
  rows_.push_back({1.0});
  log_scale_.push_back(0.0);
  for (std::int64_t phi = 1; phi <= phi_max; ++phi) {
    const auto& prev = rows_.back();
    auto prev_len = static_cast<std::int64_t>(prev.size());
    std::int64_t len = std::min(width, phi * static_cast<std::int64_t>(s_max_) + 1);
    std::vector<double> row(static_cast<std::size_t>(len), 0.0);
    for (std::int64_t x = 0; x < len; ++x) {
      // Neumaier-compensated sum of at most s_max + 1 products.
      double sum = 0.0, comp = 0.0;
      std::int64_t k_hi = std::min<std::int64_t>(s_max_, x);
      std::int64_t k_lo = std::max<std::int64_t>(0, x - (prev_len - 1));
      for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        double term = probs[static_cast<std::size_t>(k)] * prev[static_cast<std::size_t>(x - k)];
        double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
      }
      row[static_cast<std::size_t>(x)] = sum + comp;
    }
    double peak = 0.0;
    for (double v : row) peak = std::max(peak, v);
    if (peak > 0.0) {
      for (double& v : row) v /= peak;
      log_scale_.push_back(log_scale_.back() + std::log(peak));
    } else {
      log_scale_.push_back(log_scale_.back());
    }
    rows_.push_back(std::move(row));
  }
}

ConvPowers::ConvPowers(const std::vector<double>& probs, std::int64_t phi_max)
    : ConvPowers(probs, phi_max,
                 phi_max * static_cast<std::int64_t>(probs.empty() ? 0 : probs.size() - 1) + 1) {}

void ConvPowers::check_phi(std::int64_t phi) const {
  if (phi < 0 || phi >= static_cast<std::int64_t>(rows_.size()))
    throw DomainError("convolution power index out of range");
}

double ConvPowers::scaled_at(std::int64_t phi, std::int64_t x) const {
  check_phi(phi);
  const auto& row = rows_[static_cast<std::size_t>(phi)];
  if (x < 0) return 0.0;
  if (x >= static_cast<std::int64_t>(row.size())) {
    if (x > phi * static_cast<std::int64_t>(s_max_)) return 0.0;  // beyond true support
    throw DomainError("convolution query beyond computed width");
  }
  return row[static_cast<std::size_t>(x)];
}

double ConvPowers::at(std::int64_t phi, std::int64_t x) const {
  double v = scaled_at(phi, x);
  return v == 0.0 ? 0.0 : v * std::exp(log_scale_[static_cast<std::size_t>(phi)]);
}

double ConvPowers::log_at(std::int64_t phi, std::int64_t x) const {
  double v = scaled_at(phi, x);
  return v == 0.0 ? kNegInf : std::log(v) + log_scale_[static_cast<std::size_t>(phi)];
}

double ConvPowers::log_scale(std::int64_t phi) const {
  check_phi(phi);
  return log_scale_[static_cast<std::size_t>(phi)];
}

const std::vector<double>& ConvPowers::scaled_row(std::int64_t phi) const {
  check_phi(phi);
  return rows_[static_cast<std::size_t>(phi)];
}

double ConvPowers::row_sum(std::int64_t phi) const {
  check_phi(phi);
  const auto& row = rows_[static_cast<std::size_t>(phi)];
  double sum = 0.0, comp = 0.0;
  for (double v : row) {
    double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double scale = std::exp(log_scale_[static_cast<std::size_t>(phi)]);
  return (sum + comp) * scale;
}

}  // namespace cbp
