#include "draftval/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "draftval/error.hpp"

namespace draftval {

PickNumber::PickNumber(int n) : n_(n) {
  if (n < kMin || n > kMax) {
    throw Error(ErrorKind::invalid_argument,
                "pick number " + std::to_string(n) + " outside [1, 1024]");
  }
}

CurveParams::CurveParams(double lambda, double beta) : lambda_(lambda), beta_(beta) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw Error(ErrorKind::invalid_argument, "lambda must be finite and >= 0");
  }
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw Error(ErrorKind::invalid_argument, "beta must be finite and > 0");
  }
}

NormOrder::NormOrder(double p) : p_(p) {
  if (!std::isfinite(p) || p < 1.0) {
    throw Error(ErrorKind::invalid_argument, "norm order p must be finite and >= 1");
  }
}

TradeSide::TradeSide(std::vector<PickNumber> picks) : picks_(std::move(picks)) {
  if (picks_.empty()) {
    throw Error(ErrorKind::invalid_argument, "trade side has no picks");
  }
  std::vector<PickNumber> sorted = picks_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::invalid_argument, "trade side repeats a pick number");
  }
}

bool TradeSide::contains(PickNumber n) const noexcept {
  return std::find(picks_.begin(), picks_.end(), n) != picks_.end();
}

TradeSide make_side(std::initializer_list<int> picks) {
  std::vector<PickNumber> out;
  out.reserve(picks.size());
  for (int n : picks) out.emplace_back(n);
  return TradeSide(std::move(out));
}

double pick_value(PickNumber n, const CurveParams& params) noexcept {
  if (n.value() == 1) return 1.0;
  // (n-1)^beta as exp(beta ln(n-1)); the n = 1 case above avoids ln(0).
  const double gap = std::exp(params.beta() * std::log(static_cast<double>(n.value() - 1)));
  return std::exp(-params.lambda() * gap);
}

double side_value(const TradeSide& side, const CurveParams& params, NormOrder p) noexcept {
  const double order = p.value();
  double total = 0.0;
  for (PickNumber n : side.picks()) {
    const double v = pick_value(n, params);
    if (order == 1.0) {
      total += v;
    } else if (order == 2.0) {
      total += v * v;
    } else {
      total += std::pow(v, order);
    }
  }
  if (order == 1.0) return total;
  if (order == 2.0) return std::sqrt(total);
  return std::pow(total, 1.0 / order);
}

double trade_delta(const Trade& trade, const CurveParams& params, NormOrder p) noexcept {
  return side_value(trade.up, params, p) - side_value(trade.down, params, p);
}

}  // namespace draftval
