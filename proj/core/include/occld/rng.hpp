#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace occld {

// Identifies one logical random stream: everything drawn from (seed, index)
// is independent of scheduling, so parallel trial batches reproduce the
// single-threaded results exactly.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

// Philox4x32-10 counter-based generator. Key = (seed, stream index),
// counter = draw position; each block yields four 32-bit words, consumed
// as two 53-bit-mantissa doubles in [0, 1).
class CounterRng {
public:
  explicit CounterRng(RngStream stream);

  double uniform();                       // U[0,1)
  double exponential(double rate);        // -log(1-U)/rate
  int categorical(const Eigen::VectorXd& row);  // CDF scan in index order

private:
  void refill_();

  std::uint32_t key_[2];
  std::uint32_t ctr_hi_[2];  // stream split across the upper counter words
  std::uint64_t block_ = 0;
  double buffer_[2];
  int avail_ = 0;
};

}  // namespace occld
