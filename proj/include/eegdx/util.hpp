#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace eegdx::util {

// Round-trip exact base-10 text for doubles (shortest form that parses back
// to the same bits). Rejects non-finite values.
std::string format_double(double value);

// Strict double parser: the whole token must be consumed and the value must
// be finite. Returns false on any violation.
bool parse_double(const std::string& token, double& out);

// 64-bit mixer used to derive independent substream seeds from a user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Small deterministic RNG with explicit sampling algorithms so that output
// is reproducible independent of the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double gaussian();                      // standard normal, Box-Muller
  double gaussian(double mean, double sd);
  std::size_t poisson(double lambda);     // Knuth's product method

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Runs fn(i) for i in [0, n) across at most `jobs` threads. Work items must
// be independent and write only to their own output slots; the call is then
// deterministic regardless of the job count. jobs == 0 means one thread per
// hardware core. The first exception thrown by any item is rethrown.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

std::vector<std::string> split(const std::string& text, char sep);

}  // namespace eegdx::util
