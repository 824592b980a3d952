#include "occld/rng.hpp"

#include <cmath>

namespace occld {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Philox4x32-10 block function.
inline void philox_block(std::uint32_t ctr[4], std::uint32_t k0,
                         std::uint32_t k1, std::uint32_t out[4]) {
  std::uint32_t x0 = ctr[0], x1 = ctr[1], x2 = ctr[2], x3 = ctr[3];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, x0, hi0, lo0);
    mulhilo(kM1, x2, hi1, lo1);
    const std::uint32_t y0 = hi1 ^ x1 ^ k0;
    const std::uint32_t y1 = lo1;
    const std::uint32_t y2 = hi0 ^ x3 ^ k1;
    const std::uint32_t y3 = lo0;
    x0 = y0;
    x1 = y1;
    x2 = y2;
    x3 = y3;
    k0 += kW0;
    k1 += kW1;
  }
  out[0] = x0;
  out[1] = x1;
  out[2] = x2;
  out[3] = x3;
}

inline double to_unit_double(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

CounterRng::CounterRng(RngStream stream) {
  key_[0] = static_cast<std::uint32_t>(stream.seed);
  key_[1] = static_cast<std::uint32_t>(stream.seed >> 32);
  ctr_hi_[0] = static_cast<std::uint32_t>(stream.index);
  ctr_hi_[1] = static_cast<std::uint32_t>(stream.index >> 32);
}

void CounterRng::refill_() {
  std::uint32_t ctr[4] = {static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32),
                          ctr_hi_[0], ctr_hi_[1]};
  std::uint32_t out[4];
  philox_block(ctr, key_[0], key_[1], out);
  ++block_;
  buffer_[0] = to_unit_double(out[1], out[0]);
  buffer_[1] = to_unit_double(out[3], out[2]);
  avail_ = 2;
}

double CounterRng::uniform() {
  if (avail_ == 0) refill_();
  return buffer_[--avail_];
}

double CounterRng::exponential(double rate) {
  return -std::log1p(-uniform()) / rate;
}

int CounterRng::categorical(const Eigen::VectorXd& row) {
  const double u = uniform();
  double acc = 0.0;
  const int n = static_cast<int>(row.size());
  for (int i = 0; i < n; ++i) {
    acc += row[i];
    if (u < acc) return i;
  }
  // Row sums can fall a rounding error short of 1.
  for (int i = n - 1; i >= 0; --i) {
    if (row[i] > 0.0) return i;
  }
  return n - 1;
}

}  // namespace occld
