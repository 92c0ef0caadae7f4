#pragma once

// Draft-pick valuation: the exponential decay curve v(n) = exp(-lambda (n-1)^beta),
// p-norm aggregation of a package of picks, and the trade residual.

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace draftval {

/// Overall draft position, 1 = first overall.
class PickNumber {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 1024;

  explicit PickNumber(int n);

  int value() const noexcept { return n_; }

  friend auto operator<=>(const PickNumber&, const PickNumber&) = default;

 private:
  int n_;
};

/// Decay rate (lambda >= 0) and curvature (beta > 0) of the value curve.
class CurveParams {
 public:
  CurveParams(double lambda, double beta);

  double lambda() const noexcept { return lambda_; }
  double beta() const noexcept { return beta_; }

  friend bool operator==(const CurveParams&, const CurveParams&) = default;

 private:
  double lambda_;
  double beta_;
};

/// Order p >= 1 of the norm used to combine the pick values of one side.
class NormOrder {
 public:
  explicit NormOrder(double p);

  static NormOrder l1() { return NormOrder(1.0); }
  static NormOrder l2() { return NormOrder(2.0); }

  double value() const noexcept { return p_; }

  friend bool operator==(const NormOrder&, const NormOrder&) = default;

 private:
  double p_;
};

/// The picks one team surrenders. Nonempty, no repeated pick numbers,
/// original order preserved.
class TradeSide {
 public:
  explicit TradeSide(std::vector<PickNumber> picks);

  std::span<const PickNumber> picks() const noexcept { return picks_; }
  std::size_t size() const noexcept { return picks_.size(); }
  bool contains(PickNumber n) const noexcept;

  friend bool operator==(const TradeSide&, const TradeSide&) = default;

 private:
  std::vector<PickNumber> picks_;
};

TradeSide make_side(std::initializer_list<int> picks);

/// One pick-for-pick transaction. `up` holds the picks surrendered by the
/// team moving up, `down` those surrendered by the team moving down.
struct Trade {
  TradeSide up;
  TradeSide down;
  int year = 0;
  std::string id;

  Trade swapped() const { return Trade{down, up, year, id}; }

  friend bool operator==(const Trade&, const Trade&) = default;
};

/// exp(-lambda (n-1)^beta); exactly 1 for pick 1.
double pick_value(PickNumber n, const CurveParams& params) noexcept;

/// (sum_i v_i^p)^(1/p) over the side's pick values.
double side_value(const TradeSide& side, const CurveParams& params, NormOrder p) noexcept;

/// side_value(up) - side_value(down). Positive means the team moving up gave
/// away more value than it received.
double trade_delta(const Trade& trade, const CurveParams& params, NormOrder p) noexcept;

}  // namespace draftval
